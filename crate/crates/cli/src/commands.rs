//! Subcommand bodies. Each returns the rendered output and whether it passed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use g2flat::cone::cone_immersion;
use g2flat::exterior::{combinations, GridField, GridFile, Rational, Signature};
use g2flat::g2::{det_int, metric_from_three_form, preserves_pairing, sl4_induced_action, standard_forms, wedge_pairing};
use g2flat::monge_ampere::{cylindrical_embed, ma_residual, PotentialField};
use g2flat::poly::Polynomial;
use g2flat::quadric::{
    build_sequence, extract_toda_data, flat_minimal_residuals, verify_sequence_relations, weierstrass_integrate,
    Classification, HolomorphicCurve, SequenceOptions, SurfaceMap,
};
use g2flat::report::{order_estimate, with_orders, Check, ResidualReport};
use g2flat::semiflat::{build_phi_psi, closure_residuals, harmonicity_residual, ImmersionField};
use g2flat::toda::{curvature_signs, solution_error, solve_newton, tzitzeica_lift};

use crate::config::TodaConfig;
use crate::{CliError, Command, ConeCmd, G2Cmd, MaCmd, Outcome, QuadricCmd, ReportArgs, SemiflatCmd, TodaCmd};

type Res<T> = Result<T, CliError>;

pub fn title(cmd: &Command) -> &'static str {
    match cmd {
        Command::G2(G2Cmd::Tables) => "g2 tables",
        Command::G2(G2Cmd::Monodromy { .. }) => "g2 monodromy",
        Command::Semiflat(SemiflatCmd::Build { .. }) => "semiflat build",
        Command::Semiflat(SemiflatCmd::Verify { .. }) => "semiflat verify",
        Command::Ma(MaCmd::Check { .. }) => "ma check",
        Command::Ma(MaCmd::Embed { .. }) => "ma embed",
        Command::Quadric(QuadricCmd::Analyze { .. }) => "quadric analyze",
        Command::Quadric(QuadricCmd::Weierstrass { .. }) => "quadric weierstrass",
        Command::Toda(TodaCmd::Solve { .. }) => "toda solve",
        Command::Toda(TodaCmd::Lift { .. }) => "toda lift",
        Command::Cone(ConeCmd::Extend { .. }) => "cone extend",
        Command::Cone(ConeCmd::Verify { .. }) => "cone verify",
    }
}

pub fn dispatch(cmd: &Command) -> Res<Outcome> {
    let title = title(cmd);
    match cmd {
        Command::G2(G2Cmd::Tables) => g2_tables(),
        Command::G2(G2Cmd::Monodromy { matrix }) => g2_monodromy(matrix),
        Command::Semiflat(SemiflatCmd::Build { input, tau, output }) => semiflat_build(input, *tau, output),
        Command::Semiflat(SemiflatCmd::Verify { input, tau, report }) => semiflat_verify(title, input, *tau, report),
        Command::Ma(MaCmd::Check { input, report }) => ma_check(title, input, report),
        Command::Ma(MaCmd::Embed { input, output }) => {
            let u = cylindrical_embed(&PotentialField::new(read_field(input, "phi")?)?)?;
            GridFile::single("u", u.field().clone()).write(output)?;
            Ok(Outcome { text: String::new(), passed: true })
        }
        Command::Quadric(QuadricCmd::Analyze { input, signature, h0, report }) => {
            quadric_analyze(title, input, signature, *h0, report)
        }
        Command::Quadric(QuadricCmd::Weierstrass { curve, domain, n, output, report }) => {
            quadric_weierstrass(title, curve, domain, *n, output, report)
        }
        Command::Toda(TodaCmd::Solve { config, output, trace, report }) => {
            toda_solve(title, config, output.as_deref(), trace.as_deref(), report)
        }
        Command::Toda(TodaCmd::Lift { w1, q, report, tol_scale }) => toda_lift(title, w1, q, report.as_deref(), *tol_scale),
        Command::Cone(ConeCmd::Extend { input, r0, r1, nr, output }) => {
            let surface = read_surface(input)?;
            let cone = cone_immersion(&surface, *r0, *r1, *nr)?;
            GridFile::single("u", cone.immersion.field().clone()).write(output)?;
            let mut rep = ResidualReport::new(title);
            rep.push(Check::new("cone_metric", cone.metric_residual));
            Ok(Outcome::report(&rep))
        }
        Command::Cone(ConeCmd::Verify { input, r0, r1, nr, report }) => cone_verify(title, input, *r0, *r1, *nr, report),
    }
}

fn read_field(path: &Path, name: &str) -> Res<GridField> {
    Ok(GridFile::read(path)?.field_or_only(name)?.clone())
}

fn read_surface(path: &Path) -> Res<SurfaceMap> {
    Ok(SurfaceMap::new(read_field(path, "phi")?, Signature::new(3, 3)?, 1.0)?)
}

const TOL_SCALE: f64 = 10.0;

fn tolerance(args: &ReportArgs, h: f64) -> f64 {
    args.tol.unwrap_or(args.tol_scale.unwrap_or(TOL_SCALE) * h * h)
}

/// Sup over nodes at least `margin` from the boundary, with its location.
fn located(name: &str, f: &GridField, margin: usize) -> Check {
    let (v, at) = f.sup_norm_where(|n| f.is_interior(n, margin));
    Check::new(name, v).at(at.map(|n| f.multi_index(n)))
}

fn finish(rep: &ResidualReport, path: Option<&Path>) -> Res<Outcome> {
    let out = Outcome::report(rep);
    if let Some(p) = path {
        fs::write(p, &out.text).map_err(g2flat::Error::from)?;
    }
    Ok(out)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Res<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} {text:?}"))))
        .collect()
}

fn label(idx: &[usize]) -> String {
    let digits: String = idx.iter().map(|i| char::from(b'1' + *i as u8)).collect();
    format!("e{digits}")
}

fn g2_tables() -> Res<Outcome> {
    let std = standard_forms::<Rational>();
    let mv = metric_from_three_form(&std.phi)?;
    let mut s = String::from("# g2flat-tables v1\n");
    for (name, form) in [("phi0", &std.phi), ("psi0", &std.psi)] {
        for (idx, c) in form.terms() {
            let _ = writeln!(s, "{name} {} {c}", label(&idx));
        }
    }
    for row in &mv.metric {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "metric {}", cells.join(" "));
    }
    for (idx, c) in mv.dvol.terms() {
        let _ = writeln!(s, "vol {} {c}", label(&idx));
    }
    for (idx, row) in combinations(4, 2).iter().zip(wedge_pairing()) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "pairing {} {}", label(idx), cells.join(" "));
    }
    Ok(Outcome { text: s, passed: true })
}

fn g2_monodromy(matrix: &str) -> Res<Outcome> {
    let rows: Vec<Vec<i64>> = matrix.split(';').map(|r| parse_list(r, "matrix row")).collect::<Res<_>>()?;
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(CliError::Usage(format!("matrix must be 4x4, got {matrix:?}")));
    }
    let mut m = [[0i64; 4]; 4];
    for (dst, src) in m.iter_mut().zip(&rows) {
        dst.copy_from_slice(src);
    }
    let l = sl4_induced_action(&m)?;
    let mut s = String::from("# g2flat-monodromy v1\n");
    for (idx, row) in combinations(4, 2).iter().zip(l) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "lambda2 {} {}", label(idx), cells.join(" "));
    }
    let det = det_int(&l);
    let preserved = preserves_pairing(&l);
    let _ = writeln!(s, "det {det}\npairing_preserved {preserved}");
    Ok(Outcome { text: s, passed: preserved && det == 1 })
}

fn semiflat_build(input: &Path, tau: f64, output: &Path) -> Res<Outcome> {
    let u = ImmersionField::new(read_field(input, "u")?, tau)?;
    let s = build_phi_psi(&u)?;
    let mut file = GridFile::single("h", s.h.clone());
    file.push("phi", s.phi.clone())?;
    file.push("psi", s.psi.clone())?;
    file.push("theta", s.theta.clone())?;
    file.write(output)?;
    Ok(Outcome { text: String::new(), passed: true })
}

fn semiflat_checks(title: &str, path: &Path, tau: f64, args: &ReportArgs) -> Res<(ResidualReport, f64)> {
    let u = ImmersionField::new(read_field(path, "u")?, tau)?;
    let s = build_phi_psi(&u)?;
    let (dphi, dpsi) = closure_residuals(&s, args.margin)?;
    let mut rep = ResidualReport::new(title);
    rep.push(Check::new("dphi", dphi));
    rep.push(Check::new("dpsi", dpsi));
    rep.push(located("harmonicity", &harmonicity_residual(&u)?, args.margin));
    Ok((rep, u.field().max_spacing()))
}

fn semiflat_verify(title: &str, inputs: &[std::path::PathBuf], tau: f64, args: &ReportArgs) -> Res<Outcome> {
    let mut reps = Vec::new();
    let mut h = 0.0;
    for p in inputs {
        let (r, hp) = semiflat_checks(title, p, tau, args)?;
        reps.push(r);
        h = hp;
    }
    let orders = if reps.len() > 1 { Some(order_estimate(&reps)?) } else { None };
    let mut rep = reps.pop().expect("at least one input");
    let tol = tolerance(args, h);
    for c in &mut rep.checks {
        c.tolerance = Some(tol);
    }
    if let Some(o) = orders {
        rep = with_orders(rep, &o);
        for e in o.iter().filter(|e| e.non_converging) {
            rep.note(format!("{} not converging (orders {:?})", e.name, e.orders));
        }
    }
    finish(&rep, args.report.as_deref())
}

fn ma_check(title: &str, input: &Path, args: &ReportArgs) -> Res<Outcome> {
    let phi = PotentialField::new(read_field(input, "phi")?)?;
    let (grad_det, trace_form) = ma_residual(&phi)?;
    let harm = harmonicity_residual(&cylindrical_embed(&phi)?)?;
    let tol = tolerance(args, phi.field().max_spacing());
    let mut rep = ResidualReport::new(title);
    rep.push(located("ma_grad_det", &grad_det, args.margin).tol(tol));
    rep.push(located("ma_trace_form", &trace_form, args.margin).tol(tol));
    rep.push(located("embed_harmonicity", &harm, args.margin).tol(tol));
    finish(&rep, args.report.as_deref())
}

fn parse_signature(text: &str) -> Res<Signature> {
    let v: Vec<usize> = parse_list(text, "signature")?;
    match v[..] {
        [p, q] => Ok(Signature::new(p, q)?),
        _ => Err(CliError::Usage(format!("signature must be p,q, got {text:?}"))),
    }
}

fn quadric_analyze(title: &str, input: &Path, signature: &str, h0: f64, args: &ReportArgs) -> Res<Outcome> {
    let sig = parse_signature(signature)?;
    let surface = SurfaceMap::new(read_field(input, "phi")?, sig, h0)?;
    let seq = build_sequence(&surface, SequenceOptions { tol_scale: args.tol_scale.unwrap_or(TOL_SCALE), margin: args.margin })?;
    let tol = tolerance(args, seq.spacing);
    let mut rep = ResidualReport::new(title);
    rep.push(Check::new("input_harmonicity", seq.harmonicity).tol(tol));
    rep.push(Check::new("input_conformality", seq.conformality).tol(tol));
    for c in verify_sequence_relations(&seq)? {
        rep.push(c.tol(tol));
    }
    if seq.classification == Classification::Superconformal && sig.dim() % 2 == 0 {
        let data = extract_toda_data(&seq)?;
        rep.push(Check::new("q_holomorphy", data.q_holomorphy).tol(tol));
        rep.push(Check::new("reality", data.reality_residual).tol(tol));
        for (i, r) in data.toda_residuals.iter().enumerate() {
            rep.push(Check::new(format!("toda_{}", i + 1), *r).tol(tol));
        }
        rep.note(format!("mu {:?}", data.mu));
    }
    for i in 1..seq.h.len() {
        let vals: Vec<f64> = (0..seq.h[i].num_nodes()).filter(|&k| seq.analyzed(k, i)).map(|k| seq.h[i].node(k)[0]).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rep.note(format!("h_{i} in [{lo:e}, {hi:e}], vanishing gate {:e}", seq.tol[i]));
    }
    rep.note(format!("classification {:?}: {}", seq.classification, seq.describe()));
    if !seq.excluded.is_empty() {
        rep.note(format!("{} nodes excluded where some h_i vanishes", seq.excluded.len()));
    }
    finish(&rep, args.report.as_deref())
}

fn quadric_weierstrass(title: &str, curve: &Path, domain: &str, n: usize, output: &Path, args: &ReportArgs) -> Res<Outcome> {
    let text = fs::read_to_string(curve).map_err(g2flat::Error::from)?;
    let curve = HolomorphicCurve::from_json(&text)?;
    let d: Vec<f64> = parse_list(domain, "domain")?;
    let d: [f64; 4] = d.try_into().map_err(|_| CliError::Usage(format!("domain must be x0,x1,y0,y1, got {domain:?}")))?;
    let phi = weierstrass_integrate(&curve, d, n)?;
    GridFile::single("phi", phi.clone()).write(output)?;
    let (harm, conf) = flat_minimal_residuals(&phi, curve.sig, args.margin)?;
    let tol = tolerance(args, phi.max_spacing());
    let mut rep = ResidualReport::new(title);
    rep.push(Check::new("flat_harmonicity", harm).tol(tol));
    rep.push(Check::new("flat_conformality", conf).tol(tol));
    finish(&rep, args.report.as_deref())
}

fn write_trace(path: &Path, trace: &[f64]) -> Res<()> {
    let mut s = String::from("iteration,residual\n");
    for (k, r) in trace.iter().enumerate() {
        let _ = writeln!(s, "{k},{r:e}");
    }
    fs::write(path, s).map_err(g2flat::Error::from)?;
    Ok(())
}

fn toda_solve(title: &str, config: &Path, output: Option<&Path>, trace: Option<&Path>, args: &ReportArgs) -> Res<Outcome> {
    let (problem, exact) = TodaConfig::read(config)?.problem()?;
    let sol = match solve_newton(&problem) {
        Ok(s) => s,
        Err(e) => {
            if let (Some(path), g2flat::Error::Diverged { trace: t, .. }) = (trace, &e) {
                write_trace(path, t)?;
            }
            return Err(e.into());
        }
    };
    if let Some(path) = trace {
        write_trace(path, &sol.trace)?;
    }
    if let Some(path) = output {
        let mut file = GridFile::single("w", sol.w.clone());
        file.push("mask", sol.mask.clone())?;
        file.write(path)?;
    }
    let mut rep = ResidualReport::new(title);
    rep.push(Check::new("newton_residual", sol.residual).tol(problem.newton.tol));
    if let Some(exact) = exact {
        let h = sol.w.max_spacing();
        let tol = args.tol.unwrap_or(args.tol_scale.unwrap_or(20.0) * h * h);
        rep.push(Check::new("solution_error", solution_error(&problem, &sol.w, &exact)?).tol(tol));
    }
    rep.note(format!("newton steps {}", sol.trace.len().saturating_sub(1)));
    if sol.clamped {
        rep.note("exponent clamped during iteration");
    }
    finish(&rep, args.report.as_deref())
}

fn toda_lift(title: &str, w1: &Path, q: &str, report: Option<&Path>, tol_scale: f64) -> Res<Outcome> {
    let file = GridFile::read(w1)?;
    let w = file.field_or_only("w")?;
    let mask = file.get("mask");
    let q: Polynomial = q.parse()?;
    let lift = tzitzeica_lift(w, &q, mask)?;
    let curv = curvature_signs(&lift.w, mask)?;
    let h = w.max_spacing();
    let tol = tol_scale * h * h;
    let mut rep = ResidualReport::new(title);
    rep.push(Check::new("toda_1", lift.residuals[0]).tol(tol));
    rep.push(Check::new("toda_2", lift.residuals[1]).tol(tol));
    rep.push(Check::new("tzitzeica", lift.tzitzeica_residual).tol(tol));
    rep.push(Check::new("k1_min", curv.k1_min).at(curv.k1_min_at.clone()));
    rep.push(Check::new("k2_max", curv.k2_max).at(curv.k2_max_at.clone()));
    let signs = curv.signs_hold();
    rep.note(format!("curvature signs K1 > 0, K2 < 0: {}", if signs { "hold" } else { "violated" }));
    let mut out = finish(&rep, report)?;
    out.passed &= signs;
    Ok(out)
}

fn cone_verify(title: &str, input: &Path, r0: f64, r1: f64, nr: Option<usize>, args: &ReportArgs) -> Res<Outcome> {
    let surface = read_surface(input)?;
    let nr = nr.unwrap_or(surface.field().shape()[0]);
    let link_h = g2flat::quadric::harmonicity_residual(&surface)?;
    let link_c = g2flat::quadric::conformality_residual(&surface)?;
    let cone = cone_immersion(&surface, r0, r1, nr)?;
    let s = build_phi_psi(&cone.immersion)?;
    let (dphi, dpsi) = closure_residuals(&s, args.margin)?;
    let harm = harmonicity_residual(&cone.immersion)?;
    let tol = tolerance(args, cone.immersion.field().max_spacing());
    let mut rep = ResidualReport::new(title);
    rep.push(located("link_harmonicity", &link_h, args.margin).tol(tol));
    rep.push(located("link_conformality", &link_c, args.margin).tol(tol));
    rep.push(Check::new("cone_metric", cone.metric_residual).tol(tol));
    rep.push(Check::new("dphi", dphi).tol(tol));
    rep.push(Check::new("dpsi", dpsi).tol(tol));
    rep.push(located("harmonicity", &harm, args.margin).tol(tol));
    finish(&rep, args.report.as_deref())
}

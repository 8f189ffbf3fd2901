use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use g2flat::exterior::{GridField, GridFile, Signature};
use g2flat::fixtures;
use g2flat::poly::Polynomial;
use g2flat::quadric::HolomorphicCurve;
use g2flat::report::ResidualReport;
use tempfile::TempDir;

fn g2flat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2flat")).args(args).env_remove("G2FLAT_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_grid(dir: &TempDir, name: &str, field: &str, f: GridField) -> PathBuf {
    let p = dir.path().join(name);
    GridFile::single(field, f).write(&p).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(o: &Output) -> ResidualReport {
    ResidualReport::parse_text(&stdout(o)).unwrap()
}

#[test]
fn g2_tables_golden_lines() {
    let o = g2flat(&["g2", "tables"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let phi: Vec<&str> = out.lines().filter(|l| l.starts_with("phi0 ")).collect();
    assert_eq!(
        phi,
        ["phi0 e123 1", "phi0 e145 1", "phi0 e167 1", "phi0 e246 1", "phi0 e257 -1", "phi0 e347 -1", "phi0 e356 -1"]
    );
    assert_eq!(out.lines().filter(|l| l.starts_with("psi0 ")).count(), 7);
    assert!(out.contains("metric 0 0 0 1 0 0 0\n"));
    assert!(out.contains("vol e1234567 1\n"));
    assert!(out.contains("pairing e12 0 0 0 0 0 1\n"));
}

#[test]
fn monodromy_elementary_matrix() {
    let o = g2flat(&["g2", "monodromy", "--matrix", "1,0,0,0;0,1,-3,0;0,0,1,0;0,0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("det 1\npairing_preserved true\n"));
    let bad = g2flat(&["g2", "monodromy", "--matrix", "2,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn semiflat_verify_linear_is_exact() {
    let dir = TempDir::new().unwrap();
    let u = write_grid(&dir, "linear_u.grid", "u", fixtures::linear_immersion(9, 1.0).field().clone());
    let rep_path = dir.path().join("r.txt");
    let o = g2flat(&["semiflat", "verify", "--input", s(&u), "--report", s(&rep_path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(&o);
    assert_eq!(rep.checks.len(), 3);
    assert!(rep.checks.iter().all(|c| c.sup_norm <= 1e-12), "{rep:?}");
    assert_eq!(fs::read_to_string(&rep_path).unwrap(), stdout(&o));
}

#[test]
fn semiflat_verify_series_reports_orders() {
    let dir = TempDir::new().unwrap();
    let inputs: Vec<PathBuf> = [9, 17, 33]
        .iter()
        .map(|&n| write_grid(&dir, &format!("u{n}.grid"), "u", fixtures::cone_immersion_fixture(n, 0.0).field().clone()))
        .collect();
    let mut args = vec!["semiflat", "verify"];
    for p in &inputs {
        args.extend(["--input", s(p)]);
    }
    let o = g2flat(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(&o);
    let order = rep.get("dpsi").unwrap().order.unwrap();
    assert!((1.5..2.5).contains(&order), "order {order}");
}

#[test]
fn semiflat_build_writes_all_fields_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let u = write_grid(&dir, "u.grid", "u", fixtures::cone_immersion_fixture(5, 0.1).field().clone());
    let out = dir.path().join("g2.grid");
    let o = g2flat(&["semiflat", "build", "--input", s(&u), "--tau", "1.0", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let file = GridFile::from_json(&text).unwrap();
    let names: Vec<&str> = file.fields.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["h", "phi", "psi", "theta"]);
    assert_eq!(file.get("phi").unwrap().components(), 35);
    assert_eq!(file.to_json().unwrap(), text);
}

#[test]
fn grid_round_trip_is_bitwise() {
    let dir = TempDir::new().unwrap();
    let phi = fixtures::clifford_torus(17);
    let a = write_grid(&dir, "a.grid", "phi", phi.clone());
    let back = GridFile::read(&a).unwrap();
    let got = back.get("phi").unwrap();
    assert!(got.values().iter().zip(phi.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let b = dir.path().join("b.grid");
    back.write(&b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn ma_check_and_embed() {
    let dir = TempDir::new().unwrap();
    let quad = GridField::from_bounds(&[-0.5; 3], &[0.5; 3], &[9; 3], 1, |x, o| {
        o[0] = 0.5 * x.iter().map(|t| t * t).sum::<f64>();
    })
    .unwrap();
    let p = write_grid(&dir, "phi.grid", "phi", quad);
    let o = g2flat(&["ma", "check", "--input", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(report(&o).checks.iter().all(|c| c.sup_norm <= 1e-12));

    let u = dir.path().join("u.grid");
    assert_eq!(g2flat(&["ma", "embed", "--input", s(&p), "--output", s(&u)]).status.code(), Some(0));
    let v = g2flat(&["semiflat", "verify", "--input", s(&u)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));

    let cubic = g2flat::monge_ampere::cubic_perturbation(9, -0.5, 0.5, 0.1).unwrap();
    let c = write_grid(&dir, "cubic.grid", "phi", cubic.field().clone());
    let o = g2flat(&["ma", "check", "--input", s(&c)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn degenerate_potential_is_numeric_failure() {
    let dir = TempDir::new().unwrap();
    let zero = GridField::from_bounds(&[-0.5; 3], &[0.5; 3], &[5; 3], 1, |_, o| o[0] = 0.0).unwrap();
    let p = write_grid(&dir, "zero.grid", "phi", zero);
    let o = g2flat(&["ma", "check", "--input", s(&p)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains("# error:"));
}

#[test]
fn usage_errors_exit_two() {
    let o = g2flat(&["semiflat", "verify", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(g2flat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(g2flat(&[]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.grid");
    assert_eq!(g2flat(&["semiflat", "verify", "--input", s(&missing)]).status.code(), Some(2));
}

#[test]
fn malformed_config_single_line() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.txt");
    for text in ["system = toda\n", "system = \"toda\"\nshape = [9, 9]\nwhat = 1\n", "system = \"heat\"\n"] {
        fs::write(&cfg, text).unwrap();
        let o = g2flat(&["toda", "solve", "--config", s(&cfg)]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{}", stderr(&o));
    }
}

#[test]
fn toda_divergence_exits_three_with_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(
        &cfg,
        "system = \"toda\"\nshape = [9, 9]\nlower = [0.0, 0.0]\nupper = [1.0, 1.0]\nboundary = [40.0, -40.0]\n\
         [newton]\nmax_iter = 2\n",
    )
    .unwrap();
    let trace = dir.path().join("t.csv");
    let o = g2flat(&["toda", "solve", "--config", s(&cfg), "--trace", s(&trace)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(fs::read_to_string(&trace).unwrap().starts_with("iteration,residual\n"));
}

#[test]
fn toda_manufactured_solve() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("mms.toml");
    fs::write(&cfg, "system = \"toda\"\nmanufactured = true\nshape = [33, 33]\n").unwrap();
    let (out, trace) = (dir.path().join("w.grid"), dir.path().join("trace.csv"));
    let o = g2flat(&["toda", "solve", "--config", s(&cfg), "--output", s(&out), "--trace", s(&trace)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(&o);
    assert!(rep.get("solution_error").unwrap().sup_norm < 0.02);
    let steps = fs::read_to_string(&trace).unwrap().lines().count() - 2;
    assert!(steps <= 8, "{steps} Newton steps");
    let file = GridFile::read(&out).unwrap();
    assert_eq!(file.get("w").unwrap().components(), 2);
    assert!(file.get("mask").is_some());
}

#[test]
fn tzitzeica_solve_then_lift() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("tz.toml");
    fs::write(
        &cfg,
        "system = \"tzitzeica\"\nq = \"z\"\nshape = [33, 33]\nlower = [-1.0, -1.0]\nupper = [1.0, 1.0]\n\
         [domain]\nkind = \"annulus\"\nr0 = 0.5\nr1 = 1.0\n",
    )
    .unwrap();
    let w1 = dir.path().join("w1.grid");
    let o = g2flat(&["toda", "solve", "--config", s(&cfg), "--output", s(&w1)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let lift = dir.path().join("lift.txt");
    let o = g2flat(&["toda", "lift", "--w1", s(&w1), "--q", "z", "--report", s(&lift)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = ResidualReport::parse_text(&fs::read_to_string(&lift).unwrap()).unwrap();
    assert!(rep.get("k1_min").unwrap().sup_norm > 0.0);
    assert!(rep.get("k2_max").unwrap().sup_norm < 0.0);
    assert!(rep.notes.iter().any(|n| n.ends_with("hold")));
}

#[test]
fn quadric_analyze_clifford() {
    let dir = TempDir::new().unwrap();
    let p = write_grid(&dir, "torus.grid", "phi", fixtures::clifford_torus(129));
    let o = g2flat(&["quadric", "analyze", "--input", s(&p), "--signature", "6,0", "--h0", "1", "--tol-scale", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(&o);
    assert!(rep.notes.iter().any(|n| n.starts_with("classification Superconformal")), "{:?}", rep.notes);
    for name in ["orthogonality", "top_orthogonality", "holomorphic_differential", "dz_recursion", "dzbar_recursion", "toda_w"] {
        assert!(rep.get(name).unwrap().passed(), "{name}");
    }
}

#[test]
fn quadric_analyze_rejects_off_quadric() {
    let dir = TempDir::new().unwrap();
    let p = write_grid(&dir, "torus.grid", "phi", fixtures::clifford_torus(17).scaled(2.0));
    let o = g2flat(&["quadric", "analyze", "--input", s(&p), "--signature", "6,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn weierstrass_null_curve() {
    let dir = TempDir::new().unwrap();
    let sig = Signature::new(2, 3).unwrap();
    let comps: Vec<Polynomial> = ["1 - z^2", "i + i z^2", "1.4142135623730951i z", "1.4142135623730951i z", "0"]
        .iter()
        .map(|t| t.parse().unwrap())
        .collect();
    let curve = HolomorphicCurve::new(sig, comps, vec![0.0; 5]).unwrap();
    let cp = dir.path().join("tau.json");
    fs::write(&cp, curve.to_json().unwrap()).unwrap();
    let out = dir.path().join("phi.grid");
    let o = g2flat(&["quadric", "weierstrass", "--curve", s(&cp), "--domain", "-0.5,0.5,-0.5,0.5", "--n", "33", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(GridFile::read(&out).unwrap().get("phi").unwrap().components(), 5);

    let bad = HolomorphicCurve::new(sig, vec![Polynomial::constant(1.0.into()); 5], vec![0.0; 5]).unwrap();
    fs::write(&cp, bad.to_json().unwrap()).unwrap();
    let o = g2flat(&["quadric", "weierstrass", "--curve", s(&cp), "--domain", "-1,1,-1,1", "--n", "9", "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cone_extend_and_verify() {
    let dir = TempDir::new().unwrap();
    let p = write_grid(&dir, "sphere.grid", "phi", fixtures::sphere_surface(33, 0.25));
    let u = dir.path().join("u.grid");
    let o = g2flat(&["cone", "extend", "--input", s(&p), "--r0", "1", "--r1", "2", "--nr", "33", "--output", s(&u)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(GridFile::read(&u).unwrap().get("u").unwrap().shape(), &[33, 33, 33]);
    let o = g2flat(&["cone", "verify", "--input", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(report(&o).checks.len(), 6);
}

#[test]
fn thread_count_does_not_change_reports() {
    let dir = TempDir::new().unwrap();
    let torus = write_grid(&dir, "torus.grid", "phi", fixtures::clifford_torus(65));
    let u = write_grid(&dir, "u.grid", "u", fixtures::cone_immersion_fixture(17, 0.1).field().clone());
    let cfg = dir.path().join("mms.toml");
    fs::write(&cfg, "system = \"toda\"\nmanufactured = true\nshape = [33, 33]\n").unwrap();
    let runs: [Vec<&str>; 3] = [
        vec!["quadric", "analyze", "--input", s(&torus), "--signature", "6,0"],
        vec!["semiflat", "verify", "--input", s(&u)],
        vec!["toda", "solve", "--config", s(&cfg)],
    ];
    for args in &runs {
        let one = g2flat(&[&["--threads", "1"], &args[..]].concat());
        let many = g2flat(&[&["--threads", "8"], &args[..]].concat());
        let env = Command::new(env!("CARGO_BIN_EXE_g2flat")).args(args).env("G2FLAT_THREADS", "3").output().unwrap();
        assert_eq!(stdout(&one), stdout(&many), "{args:?}");
        assert_eq!(stdout(&one), stdout(&env), "{args:?}");
    }
}

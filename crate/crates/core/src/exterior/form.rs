//! Alternating multilinear forms on `R^n` with exact or floating coefficients.
//!
//! Monomials are stored as bitmasks (bit `i` set means `e^{i+1}` is a factor), so
//! every stored key is automatically a strictly increasing multi-index. Signs
//! from reordering are applied when terms are constructed.
//!
//! # Hodge star
//!
//! For a signature `(p, q)` metric `η = diag(+1 ×p, -1 ×q)` and volume form
//! `dvol = o·e^{1…n}` (`o = ±1`), the star is fixed by
//!
//! ```text
//! α ∧ *β = ⟨α, β⟩ dvol      for all k-forms α, β.
//! ```
//!
//! On a monomial `e^I` with complement `J` this gives `*e^I = η_I · o · σ(I,J) e^J`,
//! where `η_I = ∏_{i∈I} η_i` and `σ(I,J)` is the sign of the shuffle `(I,J)`.
//! Applying it twice, `**e^I = η_I η_J σ(I,J) σ(J,I) e^I`. Since `η_I η_J = (-1)^q`
//! and `σ(I,J) σ(J,I) = (-1)^{k(n-k)}`, on k-forms
//!
//! ```text
//! ** = (-1)^{k(n-k) + q}
//! ```
//!
//! independent of the orientation.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};

use crate::error::{Error, Result};

/// Coefficient ring for forms: `f64` or exact rationals.
pub trait Scalar: Num + Signed + Clone + PartialOrd + fmt::Debug + FromPrimitive + Send + Sync {}

impl<T> Scalar for T where T: Num + Signed + Clone + PartialOrd + fmt::Debug + FromPrimitive + Send + Sync {}

/// Exact rational coefficients.
pub type Rational = Ratio<i64>;

/// Signature `(p, q)`: the first `p` basis directions square to `+1`, the last `q` to `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::InvalidGrid("signature must have n = p + q ≥ 1".into()));
        }
        Ok(Self { p, q })
    }

    pub fn euclidean(n: usize) -> Self {
        Self { p: n, q: 0 }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// `η_i`, the square of the i-th basis vector (0-based).
    pub fn eta(&self, i: usize) -> i32 {
        if i < self.p {
            1
        } else {
            -1
        }
    }

    /// Bilinear pairing `⟨x, y⟩ = Σ η_i x_i y_i`.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(i, (a, b))| self.eta(i) as f64 * a * b)
            .sum()
    }
}

impl std::str::FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("signature must be `p,q`, got `{s}`")));
        }
        let p = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad signature `{s}`")))?;
        let q = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad signature `{s}`")))?;
        Signature::new(p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `dvol = +e^{1…n}`
    Positive,
    /// `dvol = -e^{1…n}`
    Negative,
}

impl Orientation {
    pub fn sign(self) -> i32 {
        match self {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }
}

/// Sign of moving all indices of `b` past the larger indices of `a`, i.e. the sign
/// relating `e^A ∧ e^B` to the sorted monomial `e^{A∪B}`.
fn shuffle_sign(a: u32, b: u32) -> i32 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Lexicographic order of index tuples (not numeric order of masks).
fn lex_key(mask: u32) -> Vec<usize> {
    mask_indices(mask)
}

/// Degree-`k` alternating form on `R^n`.
#[derive(Clone, PartialEq)]
pub struct AlternatingForm<T = f64> {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<u32, T>,
}

impl<T: Scalar> AlternatingForm<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= 31, "ambient dimension above 31 is not supported");
        Self { dim, degree, coeffs: BTreeMap::new() }
    }

    /// The 0-form `c`.
    pub fn scalar(dim: usize, c: T) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_mask(0, c);
        f
    }

    /// `c · e^{i₁} ∧ … ∧ e^{i_k}` for 0-based indices in any order.
    /// Repeated indices give the zero form.
    pub fn monomial(dim: usize, indices: &[usize], c: T) -> Result<Self> {
        let mut f = Self::zero(dim, indices.len());
        let mut mask = 0u32;
        let mut sign = 1;
        for &i in indices {
            if i >= dim {
                return Err(Error::InvalidDegree(format!("index {i} out of range for R^{dim}")));
            }
            if mask & (1 << i) != 0 {
                return Ok(f);
            }
            sign *= shuffle_sign(mask, 1 << i);
            mask |= 1 << i;
        }
        f.add_mask(mask, if sign > 0 { c } else { -c });
        Ok(f)
    }

    /// Parses sums like `"e123 + e145 - 2e257"` with the grammar
    /// `[±][coef]e<digits>` where digits are 1-based indices (so `n ≤ 9`).
    pub fn parse(dim: usize, text: &str) -> Result<Self> {
        let mut out: Option<Self> = None;
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut terms = Vec::new();
        let mut current = String::new();
        for ch in cleaned.chars() {
            if (ch == '+' || ch == '-') && !current.is_empty() {
                terms.push(std::mem::take(&mut current));
            }
            current.push(ch);
        }
        if !current.is_empty() {
            terms.push(current);
        }
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1i64, b),
                None => (1, term.strip_prefix('+').unwrap_or(&term)),
            };
            let epos = body
                .find('e')
                .ok_or_else(|| Error::Parse(format!("term `{term}` lacks e")))?;
            let coef: i64 = if epos == 0 {
                1
            } else {
                body[..epos]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in `{term}`")))?
            };
            let idx: Vec<usize> = body[epos + 1..]
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .filter(|&d| d >= 1)
                        .map(|d| d as usize - 1)
                        .ok_or_else(|| Error::Parse(format!("bad index in `{term}`")))
                })
                .collect::<Result<_>>()?;
            let c = T::from_i64(sign * coef).expect("integer fits scalar");
            let m = Self::monomial(dim, &idx, c)?;
            out = Some(match out {
                None => m,
                Some(acc) => acc.add(&m)?,
            });
        }
        out.ok_or_else(|| Error::Parse("empty form".into()))
    }

    fn add_mask(&mut self, mask: u32, c: T) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(mask).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&mask);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `e^{indices}` (0-based, any order; antisymmetry applied).
    pub fn coeff(&self, indices: &[usize]) -> T {
        let mut mask = 0u32;
        let mut sign = 1;
        for &i in indices {
            if i >= self.dim || mask & (1 << i) != 0 {
                return T::zero();
            }
            sign *= shuffle_sign(mask, 1 << i);
            mask |= 1 << i;
        }
        let c = self.coeffs.get(&mask).cloned().unwrap_or_else(T::zero);
        if sign > 0 {
            c
        } else {
            -c
        }
    }

    /// Nonzero terms as (sorted 0-based indices, coefficient), in lexicographic order.
    pub fn terms(&self) -> Vec<(Vec<usize>, T)> {
        let mut v: Vec<_> = self
            .coeffs
            .iter()
            .map(|(&m, c)| (lex_key(m), c.clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Dense coefficients over all increasing multi-indices in lexicographic order.
    pub fn to_dense(&self) -> Vec<T> {
        combinations(self.dim, self.degree)
            .iter()
            .map(|idx| self.coeff(idx))
            .collect()
    }

    pub fn from_dense(dim: usize, degree: usize, values: &[T]) -> Result<Self> {
        let combos = combinations(dim, degree);
        if combos.len() != values.len() {
            return Err(Error::DimensionMismatch(combos.len(), values.len()));
        }
        let mut f = Self::zero(dim, degree);
        for (idx, v) in combos.iter().zip(values) {
            let mask = idx.iter().fold(0u32, |m, &i| m | (1 << i));
            f.add_mask(mask, v.clone());
        }
        Ok(f)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&m, c) in &other.coeffs {
            out.add_mask(m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (&m, c) in &self.coeffs {
            out.add_mask(m, c.clone() * s.clone());
        }
        out
    }

    /// `a ∧ b`. If the degrees sum past `n` the result is the zero form of that degree.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (&ma, ca) in &self.coeffs {
            for (&mb, cb) in &other.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca.clone() * cb.clone();
                out.add_mask(ma | mb, if shuffle_sign(ma, mb) > 0 { c } else { -c });
            }
        }
        Ok(out)
    }

    /// Contraction `ι_v a`, with `(ι_v a)(x₂,…) = a(v, x₂, …)`.
    pub fn interior(&self, v: &[T]) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidDegree("interior product of a 0-form".into()));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (&m, c) in &self.coeffs {
            let mut before = 0;
            for i in mask_indices(m) {
                if !v[i].is_zero() {
                    let t = c.clone() * v[i].clone();
                    out.add_mask(m & !(1 << i), if before % 2 == 0 { t } else { -t });
                }
                before += 1;
            }
        }
        Ok(out)
    }

    /// `a(v₁, …, v_k)`.
    pub fn evaluate(&self, vectors: &[Vec<T>]) -> Result<T> {
        if vectors.len() != self.degree {
            return Err(Error::InvalidDegree(format!(
                "{}-form evaluated on {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        let mut f = self.clone();
        for v in vectors {
            f = f.interior(v)?;
        }
        Ok(f.coeffs.get(&0).cloned().unwrap_or_else(T::zero))
    }

    /// Pullback along the linear map `R^m → R^n` whose columns are `vectors`,
    /// i.e. the restriction to their span expressed in the dual basis of the vectors.
    pub fn pullback(&self, vectors: &[Vec<T>]) -> Result<Self> {
        let m = vectors.len();
        let mut out = Self::zero(m, self.degree);
        if self.degree > m {
            return Ok(out);
        }
        for idx in combinations(m, self.degree) {
            let vs: Vec<Vec<T>> = idx.iter().map(|&j| vectors[j].clone()).collect();
            let val = self.evaluate(&vs)?;
            let mask = idx.iter().fold(0u32, |acc, &i| acc | (1 << i));
            out.add_mask(mask, val);
        }
        Ok(out)
    }

    /// Induced pairing `⟨a, b⟩ = Σ_I η_I a_I b_I`.
    pub fn inner(&self, other: &Self, sig: Signature) -> Result<T> {
        self.check_same(other)?;
        if sig.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, sig.dim()));
        }
        let mut acc = T::zero();
        for (&m, c) in &self.coeffs {
            if let Some(d) = other.coeffs.get(&m) {
                let t = c.clone() * d.clone();
                acc = acc + if eta_mask(sig, m) > 0 { t } else { -t };
            }
        }
        Ok(acc)
    }

    /// Hodge star for the signature metric with `dvol = orientation · e^{1…n}`.
    pub fn hodge_star(&self, sig: Signature, orientation: Orientation) -> Result<Self> {
        if sig.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, sig.dim()));
        }
        let full: u32 = if self.dim == 32 { u32::MAX } else { (1u32 << self.dim) - 1 };
        let mut out = Self::zero(self.dim, self.dim - self.degree);
        for (&m, c) in &self.coeffs {
            let comp = full & !m;
            let s = eta_mask(sig, m) * orientation.sign() * shuffle_sign(m, comp);
            out.add_mask(comp, if s > 0 { c.clone() } else { -c.clone() });
        }
        Ok(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> T {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn map_coeffs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> AlternatingForm<U> {
        let mut out = AlternatingForm::<U>::zero(self.dim, self.degree);
        for (&m, c) in &self.coeffs {
            out.add_mask(m, f(c));
        }
        out
    }
}

impl AlternatingForm<f64> {
    /// Drops coefficients with magnitude ≤ `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (&m, &c) in &self.coeffs {
            if c.abs() > tol {
                out.add_mask(m, c);
            }
        }
        out
    }
}

/// `dvol = orientation · e^{1…n}`.
pub fn volume_form<T: Scalar>(dim: usize, orientation: Orientation) -> AlternatingForm<T> {
    let idx: Vec<usize> = (0..dim).collect();
    let c = if orientation == Orientation::Positive { T::one() } else { -T::one() };
    AlternatingForm::monomial(dim, &idx, c).expect("indices in range")
}

fn eta_mask(sig: Signature, mask: u32) -> i32 {
    let neg = mask_indices(mask).iter().filter(|&&i| sig.eta(i) < 0).count();
    if neg % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of `**` on k-forms in signature `sig`.
pub fn double_star_sign(sig: Signature, k: usize) -> i32 {
    let n = sig.dim();
    if (k * (n - k) + sig.q) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All strictly increasing k-subsets of `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Position of a sorted multi-index within `combinations(n, k)`.
pub fn combination_rank(n: usize, idx: &[usize]) -> Option<usize> {
    combinations(n, idx.len()).iter().position(|c| c == idx)
}

impl<T: Scalar + fmt::Display> fmt::Display for AlternatingForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, c)) in terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let label: String = idx.iter().map(|i| format!("{}", i + 1)).collect();
            write!(f, "({c})e{label}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for AlternatingForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlternatingForm")
            .field("dim", &self.dim)
            .field("degree", &self.degree)
            .field("terms", &self.terms())
            .finish()
    }
}

//! Complex polynomials in one variable `z`, with a small text syntax such as
//! `"z"`, `"(1+2i)z^3 - z + 0.5"` or `"2i z^2"`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// `coeffs[k]` multiplies `z^k`.
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0)];
        c.extend(self.coeffs.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        Self::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

/// `"2"`, `"-1.5i"`, `"i"`, `"1+2i"`, `"3-i"`.
fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    // split at the last sign that is not the leading one and not an exponent sign
    let bytes = s.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag_part = |t: &str| -> Result<f64> {
        let t = t.trim();
        let body = t.strip_suffix('i').ok_or_else(|| Error::Parse(format!("bad complex {s:?}")))?.trim();
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => parse_real(b),
        }
    };
    match split {
        Some(k) if s.ends_with('i') => Ok(Complex64::new(parse_real(&s[..k])?, imag_part(&s[k..])?)),
        None if s.ends_with('i') => Ok(Complex64::new(0.0, imag_part(s)?)),
        _ => Ok(Complex64::new(parse_real(s)?, 0.0)),
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let src: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let chars: Vec<char> = src.chars().collect();
        let mut terms: Vec<(f64, String)> = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        let mut sign = 1.0;
        for (k, &c) in chars.iter().enumerate() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && !(k > 0 && matches!(chars[k - 1], 'e' | 'E' | '^')) => {
                    if k > start {
                        terms.push((sign, chars[start..k].iter().collect()));
                    } else if k > 0 {
                        return Err(Error::Parse(format!("dangling operator in {text:?}")));
                    }
                    sign = if c == '-' { -1.0 } else { 1.0 };
                    start = k + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in {text:?}")));
        }
        if start >= chars.len() {
            return Err(Error::Parse(format!("trailing operator in {text:?}")));
        }
        terms.push((sign, chars[start..].iter().collect()));
        let mut p = Polynomial::constant(Complex64::new(0.0, 0.0));
        for (sign, t) in terms {
            let (coef, power) = match t.find('z') {
                None => (parse_term_coeff(&t)?, 0),
                Some(pos) => {
                    let c = if pos == 0 { Complex64::new(1.0, 0.0) } else { parse_term_coeff(t[..pos].trim_end_matches('*'))? };
                    let rest = &t[pos + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|e| e.parse::<usize>().ok())
                            .ok_or_else(|| Error::Parse(format!("bad power in term {t:?}")))?
                    };
                    (c, power)
                }
            };
            let mut c = vec![Complex64::new(0.0, 0.0); power + 1];
            c[power] = coef * sign;
            p = p.add(&Polynomial::new(c));
        }
        Ok(p)
    }
}

fn parse_term_coeff(t: &str) -> Result<Complex64> {
    match t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        Some(inner) => parse_complex(inner),
        None => parse_complex(t),
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 && !(self.coeffs.len() == 1) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            match k {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{k}")?,
            }
        }
        Ok(())
    }
}

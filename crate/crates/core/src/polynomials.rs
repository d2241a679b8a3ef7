//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are identified by the index of the graph vertex they stand
//! for, so two branches of a decomposition can share names.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// A polynomial variable: the index of the vertex it stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub usize);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Integration limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    ConstZero,
    ConstOne,
    Var(Var),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::ConstZero => f.write_str("0"),
            Bound::ConstOne => f.write_str("1"),
            Bound::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("no value assigned to variable {0}")]
    MissingVariable(Var),
}

/// Exponent vector, sorted by variable, no zero exponents.
type Monomial = Vec<(Var, u32)>;

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Polynomial::zero();
        p.terms.insert(vec![(v, 1)], Rational::one());
        p
    }

    pub fn from_bound(b: Bound) -> Self {
        match b {
            Bound::ConstZero => Polynomial::zero(),
            Bound::ConstOne => Polynomial::one(),
            Bound::Var(v) => Polynomial::var(v),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The value of a constant polynomial, `None` if some variable occurs.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// Variables occurring with nonzero exponent, ascending.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flatten().map(|(v, _)| *v).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn degree_in(&self, y: Var) -> u32 {
        self.terms
            .keys()
            .filter_map(|m| m.iter().find(|(v, _)| *v == y).map(|(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, q: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &q.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, q: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &q.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn mul(&self, q: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &q.terms {
                out.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// `∫_lo^hi p dy`; the result no longer mentions `y`.
    pub fn integrate(&self, y: Var, lo: Bound, hi: Bound) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let (k, rest): (u32, Monomial) = match m.iter().position(|(v, _)| *v == y) {
                Some(i) => {
                    let mut rest = m.clone();
                    let (_, e) = rest.remove(i);
                    (e, rest)
                }
                None => (0, m.clone()),
            };
            let coef = c / Rational::from_integer(BigInt::from(k + 1));
            for (bound, sign) in [(hi, false), (lo, true)] {
                let c = if sign { -coef.clone() } else { coef.clone() };
                match bound {
                    Bound::ConstZero => {}
                    Bound::ConstOne => out.add_term(rest.clone(), c),
                    Bound::Var(z) => out.add_term(mono_mul(&rest, &vec![(z, k + 1)]), c),
                }
            }
        }
        out
    }

    /// Exact evaluation under a full assignment.
    pub fn eval(&self, assignment: &HashMap<Var, Rational>) -> Result<Rational, PolyError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                let x = assignment.get(v).ok_or(PolyError::MissingVariable(*v))?;
                t *= num_traits::pow(x.clone(), *e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation under a full assignment.
    pub fn eval_f64(&self, assignment: &HashMap<Var, f64>) -> Result<f64, PolyError> {
        self.eval_f64_with(|v| assignment.get(&v).copied())
    }

    pub fn eval_f64_with(&self, value: impl Fn(Var) -> Option<f64>) -> Result<f64, PolyError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (v, e) in m {
                let x = value(*v).ok_or(PolyError::MissingVariable(*v))?;
                t *= x.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Coefficients `[c0, c1, ...]` of `p` as a polynomial in `y`, every
    /// other variable replaced by its value in `fixed`.
    pub fn restrict_univariate(
        &self,
        y: Var,
        fixed: &HashMap<Var, f64>,
    ) -> Result<Vec<f64>, PolyError> {
        self.restrict_univariate_with(y, |v| fixed.get(&v).copied())
    }

    pub fn restrict_univariate_with(
        &self,
        y: Var,
        value: impl Fn(Var) -> Option<f64>,
    ) -> Result<Vec<f64>, PolyError> {
        let mut coeffs = vec![0.0; self.degree_in(y) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            let mut k = 0usize;
            for (v, e) in m {
                if *v == y {
                    k = *e as usize;
                } else {
                    let x = value(*v).ok_or(PolyError::MissingVariable(*v))?;
                    t *= x.powi(*e as i32);
                }
            }
            coeffs[k] += t;
        }
        Ok(coeffs)
    }

    /// Like [`Polynomial::restrict_univariate_with`], also returning for each
    /// coefficient the sum of the magnitudes of its contributions, a bound
    /// on the cancellation it went through.
    pub fn restrict_univariate_bounded(
        &self,
        y: Var,
        value: impl Fn(Var) -> Option<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>), PolyError> {
        let d = self.degree_in(y) as usize + 1;
        let (mut coeffs, mut mags) = (vec![0.0; d], vec![0.0; d]);
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            let mut k = 0usize;
            for (v, e) in m {
                if *v == y {
                    k = *e as usize;
                } else {
                    let x = value(*v).ok_or(PolyError::MissingVariable(*v))?;
                    t *= x.powi(*e as i32);
                }
            }
            coeffs[k] += t;
            mags[k] += t.abs();
        }
        Ok((coeffs, mags))
    }

    /// Exact counterpart of [`Polynomial::restrict_univariate_with`].
    pub fn restrict_univariate_exact(
        &self,
        y: Var,
        value: impl Fn(Var) -> Option<Rational>,
    ) -> Result<Vec<Rational>, PolyError> {
        let mut coeffs = vec![Rational::zero(); self.degree_in(y) as usize + 1];
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let mut k = 0usize;
            for (v, e) in m {
                if *v == y {
                    k = *e as usize;
                } else {
                    let x = value(*v).ok_or(PolyError::MissingVariable(*v))?;
                    t *= num_traits::pow(x, *e as usize);
                }
            }
            coeffs[k] += t;
        }
        Ok(coeffs)
    }

    /// Render with caller-chosen variable names.
    pub fn display_with<'a>(&'a self, name: &'a dyn Fn(Var) -> String) -> impl fmt::Display + 'a {
        Rendered { p: self, name }
    }
}

/// Nearest float, also for numerators and denominators beyond `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large numerators and denominators: divide in log space.
        let n = r.numer().abs().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        let s = if r.is_negative() { -1.0 } else { 1.0 };
        s * (n.ln() - d.ln()).exp()
    })
}

struct Rendered<'a> {
    p: &'a Polynomial,
    name: &'a dyn Fn(Var) -> String,
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.terms.is_empty() {
            return f.write_str("0");
        }
        // Higher total degree first, then by exponent vector.
        let mut terms: Vec<_> = self.p.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().map(|(_, e)| e).sum();
            let db: u32 = b.iter().map(|(_, e)| e).sum();
            db.cmp(&da).then_with(|| a.cmp(b))
        });
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut parts = Vec::new();
            if !mag.is_one() || m.is_empty() {
                parts.push(mag.to_string());
            }
            for (v, e) in m {
                if *e == 1 {
                    parts.push((self.name)(*v));
                } else {
                    parts.push(format!("{}^{}", (self.name)(*v), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: Var| v.to_string();
        let r = Rendered { p: self, name: &name };
        fmt::Display::fmt(&r, f)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

/// `num/den` text form used in serialized formulas.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_from_str(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

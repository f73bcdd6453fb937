use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exponent vector of a monomial; its length is the number of variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<u8>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Sparse multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl RationalPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if m.0.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: m.0.len(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exponents: &[u8]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.nvars])
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Homogeneous part of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == degree)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: len,
            });
        }
        Ok(())
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<Rational> {
        self.check_point(x.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= xi;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut t = to_f64(c);
                for (xi, &e) in x.iter().zip(&m.0) {
                    t *= xi.powi(i32::from(e));
                }
                t
            })
            .sum())
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_point(x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut t = Complex64::new(to_f64(c), 0.0);
                for (xi, &e) in x.iter().zip(&m.0) {
                    t *= xi.powi(i32::from(e));
                }
                t
            })
            .sum())
    }

    /// Coefficients as `f64` paired with exponent vectors.
    pub fn to_f64_terms(&self) -> Vec<(Vec<u8>, f64)> {
        self.terms.iter().map(|(m, c)| (m.0.clone(), to_f64(c))).collect()
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"num/den"`, or `"num"` for integers.
pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: num_bigint::BigInt = num.parse().map_err(|_| bad())?;
    let den: num_bigint::BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn add(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn sub(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn neg(self) -> RationalPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn mul(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = RationalPolynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for RationalPolynomial {
    /// Terms in ascending degree, variables written `x1..xn`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
        for (idx, (m, c)) in terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", rational_to_string(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", rational_to_string(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

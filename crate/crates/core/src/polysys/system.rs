use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{build_b, build_b_inverse};
use super::poly::{parse_rational, rational_to_string, Monomial, Rational, RationalPolynomial};
use super::spec::DesignSpec;
use crate::error::{Error, Result};

/// Which unknowns a system is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formulation {
    /// `f_i = c / c_i`, from `det(sI - BF)`.
    FForm,
    /// `k_i = c_i / c`, from `det(sI - K B^-1)`.
    KForm,
}

impl Formulation {
    pub fn variable_prefix(self) -> &'static str {
        match self {
            Formulation::FForm => "f",
            Formulation::KForm => "k",
        }
    }
}

/// `n` polynomial equations in `n` unknowns, ordered by ascending total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    polynomials: Vec<RationalPolynomial>,
    formulation: Formulation,
    spec: DesignSpec,
}

impl PolySystem {
    pub fn polynomials(&self) -> &[RationalPolynomial] {
        &self.polynomials
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn spec(&self) -> &DesignSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.polynomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polynomials.is_empty()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polynomials.iter().map(RationalPolynomial::total_degree).collect()
    }

    /// Product of the degrees.
    pub fn bezout_number(&self) -> u64 {
        self.degrees().iter().map(|&d| u64::from(d)).product()
    }

    pub fn variables(&self) -> Vec<String> {
        let p = self.formulation.variable_prefix();
        (1..=self.spec.n()).map(|i| format!("{p}{i}")).collect()
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Vec<Rational>> {
        self.polynomials.iter().map(|p| p.eval_exact(point)).collect()
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.polynomials.iter().map(|p| p.eval_f64(point)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SystemDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct PolyDoc {
    degree: u32,
    terms: Vec<(Vec<u8>, String)>,
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    formulation: Formulation,
    spec: DesignSpec,
    variables: Vec<String>,
    polynomials: Vec<PolyDoc>,
}

impl From<&PolySystem> for SystemDoc {
    fn from(s: &PolySystem) -> Self {
        SystemDoc {
            formulation: s.formulation,
            spec: s.spec.clone(),
            variables: s.variables(),
            polynomials: s
                .polynomials
                .iter()
                .map(|p| PolyDoc {
                    degree: p.total_degree(),
                    terms: p
                        .terms()
                        .map(|(m, c)| (m.exponents().to_vec(), rational_to_string(c)))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SystemDoc> for PolySystem {
    type Error = Error;

    fn try_from(doc: SystemDoc) -> Result<Self> {
        let n = doc.spec.n();
        if doc.polynomials.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: doc.polynomials.len(),
            });
        }
        let polynomials = doc
            .polynomials
            .into_iter()
            .map(|p| {
                let terms = p
                    .terms
                    .into_iter()
                    .map(|(e, c)| Ok((Monomial::from_exponents(e), parse_rational(&c)?)))
                    .collect::<Result<Vec<_>>>()?;
                RationalPolynomial::from_terms(n, terms)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolySystem {
            polynomials,
            formulation: doc.formulation,
            spec: doc.spec,
        })
    }
}

/// Elementary symmetric functions `e_1..e_n` of the given values.
pub fn elementary_symmetric(values: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); values.len() + 1];
    e[0] = Rational::one();
    for (j, v) in values.iter().enumerate() {
        for i in (1..=j + 1).rev() {
            let add = &e[i - 1] * v;
            e[i] += add;
        }
    }
    e.remove(0);
    e
}

/// `p_i(f) = e_i(BF) - e_i(alpha^2 - 1)`, where `e_i(BF)` is read off the
/// characteristic polynomial built by the continuant recurrence.
pub fn system_f(spec: &DesignSpec) -> Result<PolySystem> {
    let n = spec.n();
    let b = build_b(n)?.diagonal();
    let f = |i: usize| RationalPolynomial::var(n, i);
    // D_k(s) as coefficient vectors in s (index = power).
    let mut prev: Vec<RationalPolynomial> = vec![RationalPolynomial::constant(n, Rational::one())];
    let mut cur: Vec<RationalPolynomial> = vec![
        (&RationalPolynomial::zero(n) - &f(0).scale(&b[0])),
        RationalPolynomial::constant(n, Rational::one()),
    ];
    for k in 1..n {
        let bf = f(k).scale(&b[k]);
        let ff = &f(k) * &f(k - 1);
        let mut next = vec![RationalPolynomial::zero(n); k + 2];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] = &next[p + 1] + c;
            next[p] = &next[p] - &(&bf * c);
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] = &next[p] - &(&ff * c);
        }
        prev = cur;
        cur = next;
    }
    let targets = elementary_symmetric(&spec.targets());
    let polynomials = (1..=n)
        .map(|i| {
            let coeff = &cur[n - i];
            let e_i = if i % 2 == 0 { coeff.clone() } else { -coeff };
            &e_i - &RationalPolynomial::constant(n, targets[i - 1].clone())
        })
        .collect();
    Ok(PolySystem {
        polynomials,
        formulation: Formulation::FForm,
        spec: spec.clone(),
    })
}

/// `q_i(k) = e_i(K B^-1) - e_i(1 / (alpha^2 - 1))`. `e_i(K B^-1)` is the sum of
/// `i x i` principal minors, each a principal minor of `B^-1` times the
/// matching product of `k`s.
pub fn system_k(spec: &DesignSpec) -> Result<PolySystem> {
    let n = spec.n();
    let binv = build_b_inverse(n)?;
    let mut polynomials: Vec<RationalPolynomial> = vec![RationalPolynomial::zero(n); n];
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let minor = binv.select(&idx, &idx).determinant()?;
        let exps = (0..n).map(|j| u8::from(mask & (1 << j) != 0)).collect();
        polynomials[idx.len() - 1].add_term(Monomial::from_exponents(exps), minor);
    }
    let targets = elementary_symmetric(&spec.inverse_targets());
    for (p, t) in polynomials.iter_mut().zip(targets) {
        p.add_term(Monomial::one(n), -t);
    }
    Ok(PolySystem {
        polynomials,
        formulation: Formulation::KForm,
        spec: spec.clone(),
    })
}

/// Float copy of a system for repeated evaluation with its Jacobian.
#[derive(Debug, Clone)]
pub struct FloatSystem {
    nvars: usize,
    polys: Vec<Vec<(Vec<u8>, f64)>>,
}

impl FloatSystem {
    pub fn new(system: &PolySystem) -> Self {
        Self {
            nvars: system.spec().n(),
            polys: system.polynomials().iter().map(RationalPolynomial::to_f64_terms).collect(),
        }
    }

    /// The system in `y = s * x`, each equation divided by its largest
    /// coefficient magnitude.
    pub fn rescaled(&self, s: f64) -> Self {
        let polys = self
            .polys
            .iter()
            .map(|terms| {
                let mut t: Vec<(Vec<u8>, f64)> = terms
                    .iter()
                    .map(|(e, c)| {
                        let d: i32 = e.iter().map(|&x| i32::from(x)).sum();
                        (e.clone(), c / s.powi(d))
                    })
                    .collect();
                let m = t.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
                if m > 0.0 {
                    for (_, c) in &mut t {
                        *c /= m;
                    }
                }
                t
            })
            .collect();
        Self {
            nvars: self.nvars,
            polys,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys
            .iter()
            .map(|t| t.iter().map(|(e, _)| e.iter().map(|&x| u32::from(x)).sum()).max().unwrap_or(0))
            .collect()
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.polys
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|(e, c)| {
                        let mut t = Complex64::new(*c, 0.0);
                        for (xi, &p) in x.iter().zip(e) {
                            if p > 0 {
                                t *= xi.powu(u32::from(p));
                            }
                        }
                        t
                    })
                    .sum()
            })
            .collect()
    }

    /// Row-major Jacobian `d eq_i / d x_j`.
    pub fn jacobian(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n = self.nvars;
        self.polys
            .iter()
            .map(|terms| {
                let mut row = vec![Complex64::zero(); n];
                for (e, c) in terms {
                    for j in 0..n {
                        if e[j] == 0 {
                            continue;
                        }
                        let mut t = Complex64::new(*c * f64::from(e[j]), 0.0);
                        for (l, (xl, &p)) in x.iter().zip(e).enumerate() {
                            let p = if l == j { p - 1 } else { p };
                            if p > 0 {
                                t *= xl.powu(u32::from(p));
                            }
                        }
                        row[j] += t;
                    }
                }
                row
            })
            .collect()
    }

    pub fn eval_real(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&z).iter().map(|v| v.re).collect()
    }
}

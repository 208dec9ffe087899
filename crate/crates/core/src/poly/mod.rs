//! Exact multivariate polynomials with rational coefficients.
//!
//! Variables are numbered from zero. When a polynomial lives on a cotangent
//! bundle of a base of dimension `m`, variables `0..m` are the base
//! coordinates `x1..xm` and `m..2m` are the fiber coordinates `y1..ym`.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;

pub use parse::parse_polynomial;

/// Exponent vector with trailing zeros removed, so equal monomials compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial::new((0..n).map(|i| self.exponent(i) + other.exponent(i)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_int(c: i64) -> Self {
        Polynomial::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(i: usize) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var(i), BigRational::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = Polynomial::zero();
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    fn add_term(&mut self, mono: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// One past the largest variable index that occurs.
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|m| m.0.len()).max().unwrap_or(0)
    }

    /// The constant value, if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::from_int(1);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (mono, c) in &self.terms {
            let e = mono.exponent(i);
            if e == 0 {
                continue;
            }
            let mut exps = mono.0.clone();
            exps[i] -= 1;
            out.add_term(Monomial::new(exps), c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Evaluates with coefficients converted into `S`; exact when `S` is rational.
    pub fn eval<S: Scalar>(&self, point: &[S]) -> S {
        let mut total = S::zero();
        for (mono, c) in &self.terms {
            let mut term = S::from_rational(c);
            for (i, &e) in mono.0.iter().enumerate() {
                for _ in 0..e {
                    term *= point.get(i).cloned().unwrap_or_else(S::zero);
                }
            }
            total += term;
        }
        total
    }

    /// Exact value at a floating point, rounded once.
    pub fn eval_exact_f64(&self, point: &[f64]) -> f64 {
        let q: Vec<BigRational> = point
            .iter()
            .map(|&v| BigRational::from_float(v).unwrap_or_else(BigRational::zero))
            .collect();
        self.eval(&q).to_f64().unwrap_or(f64::NAN)
    }

    /// Substitutes `value` for variable `i`.
    pub fn substitute(&self, i: usize, value: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (mono, c) in &self.terms {
            let e = mono.exponent(i);
            let mut exps = mono.0.clone();
            if e > 0 {
                exps[i] = 0;
            }
            let mut coef = c.clone();
            for _ in 0..e {
                coef *= value;
            }
            out.add_term(Monomial::new(exps), coef);
        }
        out
    }

    /// Floating-point evaluator with precomputed coefficients.
    pub fn compile(&self) -> CompiledPolynomial {
        CompiledPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let powers = m.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                    (c.to_f64().unwrap_or(f64::NAN), powers)
                })
                .collect(),
        }
    }

    /// Formats with `x1..xm` for variables below `base_dim` and `y1..` above it.
    pub fn display_with(&self, base_dim: Option<usize>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let name = |i: usize| match base_dim {
            Some(m) if i >= m => format!("y{}", i - m + 1),
            _ => format!("x{}", i + 1),
        };
        let mut out = String::new();
        // highest degree first reads naturally
        let mut ordered: Vec<(&Monomial, &BigRational)> = self.terms.iter().collect();
        ordered.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(b.0.cmp(a.0)));
        for (n, (mono, c)) in ordered.into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if n == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let factors: Vec<String> = mono
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { name(i) } else { format!("{}^{}", name(i), e) })
                .collect();
            if factors.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(None))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Polynomial lowered to `f64` coefficients for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPolynomial {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPolynomial {
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, powers)| powers.iter().fold(*c, |acc, &(i, e)| acc * point.get(i).copied().unwrap_or(0.0).powi(e)))
            .sum()
    }
}

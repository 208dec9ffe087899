//! Dense affine curvature tensors.
//!
//! A [`CurvatureTensor`] of dimension `m` stores `A_{ijk}^l` with
//! `A(e_i, e_j) e_k = sum_l A_{ijk}^l e_l`. The Jacobi operator of a vector
//! `X` is `Y -> A(Y, X) X`.

use nalgebra::{DMatrix, DVector};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Rank-4 tensor with entries indexed `(i, j, k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor<S> {
    dim: usize,
    entries: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub antisymmetry_defect: f64,
    pub bianchi_defect: f64,
    pub tol: f64,
    pub pass: bool,
}

impl<S: Scalar> CurvatureTensor<S> {
    pub fn zeros(dim: usize) -> Self {
        CurvatureTensor {
            dim,
            entries: vec![S::zero(); dim.pow(4)],
        }
    }

    /// Builds a tensor from `f(i, j, k, l)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(dim.pow(4));
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        entries.push(f(i, j, k, l));
                    }
                }
            }
        }
        CurvatureTensor { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &S {
        &self.entries[self.index(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: S) {
        let idx = self.index(i, j, k, l);
        self.entries[idx] = value;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    /// Iterates over `(i, j, k, l, value)` for nonzero entries in lexicographic order.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, &S)> + '_ {
        let d = self.dim;
        self.entries.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(idx, v)| {
            let l = idx % d;
            let k = (idx / d) % d;
            let j = (idx / (d * d)) % d;
            let i = idx / (d * d * d);
            (i, j, k, l, v)
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CurvatureTensor<T> {
        CurvatureTensor {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> CurvatureTensor<f64> {
        self.map(|v| v.as_f64())
    }

    pub fn scaled(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(CurvatureTensor {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    /// Linear combination `sum c_t A_t` of tensors of equal dimension.
    pub fn linear_combination(dim: usize, terms: &[(S, &CurvatureTensor<S>)]) -> Result<Self> {
        let mut out = Self::zeros(dim);
        for (c, t) in terms {
            check_dim(dim, t.dim)?;
            if c.is_zero() {
                continue;
            }
            for (o, v) in out.entries.iter_mut().zip(&t.entries) {
                if !v.is_zero() {
                    *o = o.clone() + c.clone() * v.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max)
    }
}

fn check_vec<S>(dim: usize, v: &[S]) -> Result<()> {
    check_dim(dim, v.len())
}

/// Trilinear contraction `A(X, Y) Z`.
pub fn evaluate<S: Scalar>(a: &CurvatureTensor<S>, x: &[S], y: &[S], z: &[S]) -> Result<DVector<S>> {
    let m = a.dim;
    check_vec(m, x)?;
    check_vec(m, y)?;
    check_vec(m, z)?;
    let mut out = DVector::from_element(m, S::zero());
    for i in 0..m {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..m {
            if y[j].is_zero() {
                continue;
            }
            let xy = x[i].clone() * y[j].clone();
            for k in 0..m {
                if z[k].is_zero() {
                    continue;
                }
                let c = xy.clone() * z[k].clone();
                for l in 0..m {
                    let v = a.get(i, j, k, l);
                    if !v.is_zero() {
                        out[l] = out[l].clone() + c.clone() * v.clone();
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Maximum antisymmetry and first-Bianchi residuals over all index quadruples.
pub fn check_affine_symmetries<S: Scalar>(a: &CurvatureTensor<S>, tol: f64) -> SymmetryReport {
    let m = a.dim;
    let mut anti = 0.0f64;
    let mut bianchi = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let s = a.get(i, j, k, l).clone() + a.get(j, i, k, l).clone();
                    if !s.is_zero() {
                        anti = anti.max(s.as_f64().abs());
                    }
                    let c = a.get(i, j, k, l).clone() + a.get(j, k, i, l).clone() + a.get(k, i, j, l).clone();
                    if !c.is_zero() {
                        bianchi = bianchi.max(c.as_f64().abs());
                    }
                }
            }
        }
    }
    SymmetryReport {
        antisymmetry_defect: anti,
        bianchi_defect: bianchi,
        tol,
        pass: anti <= tol && bianchi <= tol,
    }
}

/// Default symmetry tolerance for numeric input, scaled by the tensor size.
pub fn default_symmetry_tol<S: Scalar>(a: &CurvatureTensor<S>) -> f64 {
    if S::EXACT {
        0.0
    } else {
        1e-10 * a.max_abs().max(1.0)
    }
}

/// Matrix of `Y -> A(Y, X) X`; column `j` is `A(e_j, X) X`.
pub fn jacobi<S: Scalar>(a: &CurvatureTensor<S>, x: &[S]) -> Result<DMatrix<S>> {
    let m = a.dim;
    check_vec(m, x)?;
    let mut out = DMatrix::from_element(m, m, S::zero());
    for k in 0..m {
        if x[k].is_zero() {
            continue;
        }
        for n in 0..m {
            if x[n].is_zero() {
                continue;
            }
            let c = x[k].clone() * x[n].clone();
            for j in 0..m {
                for l in 0..m {
                    let v = a.get(j, k, n, l);
                    if !v.is_zero() {
                        out[(l, j)] = out[(l, j)].clone() + c.clone() * v.clone();
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Orthonormal basis of `X^perp`, returned as the columns of an `m x (m-1)` matrix.
///
/// Gram-Schmidt over the standard basis with the axis of largest `|X^i|`
/// dropped (lowest index on ties), after seeding with `X / |X|`.
pub fn orthogonal_complement_basis<S: Scalar + Float>(x: &[S]) -> Result<DMatrix<S>> {
    let m = x.len();
    let norm = x.iter().fold(S::zero(), |acc, v| acc + *v * *v).sqrt();
    if norm.is_zero() || !norm.is_finite() {
        return Err(Error::InvalidArgument("reduced Jacobi operator needs a nonzero vector".into()));
    }
    let mut dropped = 0;
    for i in 1..m {
        if x[i].abs() > x[dropped].abs() {
            dropped = i;
        }
    }
    let mut basis: Vec<Vec<S>> = vec![x.iter().map(|v| *v / norm).collect()];
    for axis in (0..m).filter(|&i| i != dropped) {
        let mut v = vec![S::zero(); m];
        v[axis] = S::one();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for b in &basis {
                let dot = v.iter().zip(b).fold(S::zero(), |acc, (p, q)| acc + *p * *q);
                for (p, q) in v.iter_mut().zip(b) {
                    *p -= dot * *q;
                }
            }
        }
        let n = v.iter().fold(S::zero(), |acc, p| acc + *p * *p).sqrt();
        basis.push(v.into_iter().map(|p| p / n).collect());
    }
    Ok(DMatrix::from_fn(m, m - 1, |r, c| basis[c + 1][r]))
}

/// Matrix of the induced map on `V / R X`, written in the orthonormal basis of
/// `X^perp` from [`orthogonal_complement_basis`].
pub fn reduced_jacobi<S: Scalar + Float>(a: &CurvatureTensor<S>, x: &[S]) -> Result<DMatrix<S>> {
    check_vec(a.dim, x)?;
    let basis = orthogonal_complement_basis(x)?;
    let j = jacobi(a, x)?;
    Ok(basis.transpose() * j * basis)
}

/// `A(X, Y) Z -> Xi (A(X, Y) Z)`.
pub fn compose_endomorphism<S: Scalar>(xi: &DMatrix<S>, a: &CurvatureTensor<S>) -> Result<CurvatureTensor<S>> {
    let m = a.dim;
    check_dim(m, xi.nrows())?;
    check_dim(m, xi.ncols())?;
    let mut out = CurvatureTensor::<S>::zeros(m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for p in 0..m {
                    let v = a.get(i, j, k, p);
                    if v.is_zero() {
                        continue;
                    }
                    for l in 0..m {
                        let c = &xi[(l, p)];
                        if !c.is_zero() {
                            let idx = out.index(i, j, k, l);
                            out.entries[idx] = out.entries[idx].clone() + c.clone() * v.clone();
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn identity<S: Scalar>(m: usize) -> DMatrix<S> {
    DMatrix::from_fn(m, m, |r, c| if r == c { S::one() } else { S::zero() })
}

/// Sparse on-disk form: `{"dim": m, "entries": [[i, j, k, l, value], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub dim: usize,
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

impl<S: Scalar> CurvatureTensor<S> {
    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            dim: self.dim,
            entries: self.nonzero_entries().map(|(i, j, k, l, v)| (i, j, k, l, v.as_f64())).collect(),
        }
    }
}

impl CurvatureTensor<f64> {
    pub fn from_file(file: &TensorFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(Error::InvalidArgument("model dimension must be positive".into()));
        }
        let mut t = CurvatureTensor::zeros(file.dim);
        let mut seen = std::collections::BTreeSet::new();
        for &(i, j, k, l, v) in &file.entries {
            if i >= file.dim || j >= file.dim || k >= file.dim || l >= file.dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i},{j},{k},{l}) out of range for dim {}",
                    file.dim
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("entry ({i},{j},{k},{l}) is not finite")));
            }
            if !seen.insert((i, j, k, l)) {
                return Err(Error::InvalidArgument(format!("duplicate entry ({i},{j},{k},{l})")));
            }
            t.set(i, j, k, l, v);
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("tensor serialization")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let file: TensorFile = serde_json::from_str(src)?;
        Self::from_file(&file)
    }
}

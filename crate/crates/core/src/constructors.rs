//! Explicit curvature operators: constant sectional curvature, the
//! complex-structure operator `A_J`, and the two coefficient families built
//! from them over complex and quaternionic structures.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{compose_endomorphism, identity, CurvatureTensor};

/// Unitary almost complex structure: `J^2 = -Id`, `J^T J = Id`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure<S> {
    j: DMatrix<S>,
}

fn max_residual<S: Scalar>(m: &DMatrix<S>) -> f64 {
    m.iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max)
}

impl<S: Scalar> ComplexStructure<S> {
    pub fn new(j: DMatrix<S>) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::InvalidArgument("complex structure must be square".into()));
        }
        let m = j.nrows();
        let id = identity::<S>(m);
        let sq = &j * &j + &id;
        let orth = j.transpose() * &j - &id;
        let tol = S::identity_tol();
        let (r1, r2) = (max_residual(&sq), max_residual(&orth));
        if r1 > tol || r2 > tol {
            return Err(Error::InvalidArgument(format!(
                "not a unitary complex structure (|J^2+I| = {r1:e}, |J^T J - I| = {r2:e})"
            )));
        }
        Ok(ComplexStructure { j })
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }
}

/// `{J1, J2, J3}` with `J1 J2 = J3`, pairwise anticommuting.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionStructure<S> {
    j1: ComplexStructure<S>,
    j2: ComplexStructure<S>,
    j3: ComplexStructure<S>,
}

impl<S: Scalar> QuaternionStructure<S> {
    pub fn new(j1: DMatrix<S>, j2: DMatrix<S>, j3: DMatrix<S>) -> Result<Self> {
        let j1 = ComplexStructure::new(j1)?;
        let j2 = ComplexStructure::new(j2)?;
        let j3 = ComplexStructure::new(j3)?;
        let m = j1.dim();
        check_dim(m, j2.dim())?;
        check_dim(m, j3.dim())?;
        let tol = S::identity_tol();
        let prod = j1.matrix() * j2.matrix() - j3.matrix();
        if max_residual(&prod) > tol {
            return Err(Error::InvalidArgument("quaternion structure requires J1 J2 = J3".into()));
        }
        for (a, b) in [(&j1, &j2), (&j2, &j3), (&j1, &j3)] {
            let anti = a.matrix() * b.matrix() + b.matrix() * a.matrix();
            if max_residual(&anti) > tol {
                return Err(Error::InvalidArgument("quaternion structure must anticommute".into()));
            }
        }
        Ok(QuaternionStructure { j1, j2, j3 })
    }

    pub fn j1(&self) -> &ComplexStructure<S> {
        &self.j1
    }
    pub fn j2(&self) -> &ComplexStructure<S> {
        &self.j2
    }
    pub fn j3(&self) -> &ComplexStructure<S> {
        &self.j3
    }
    pub fn dim(&self) -> usize {
        self.j1.dim()
    }
}

/// `J e_{2k} = e_{2k+1}`, `J e_{2k+1} = -e_{2k}` (0-based).
pub fn standard_complex_structure<S: Scalar>(m: usize) -> Result<ComplexStructure<S>> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("complex structure needs even m > 0, got {m}")));
    }
    let mut j = DMatrix::from_element(m, m, S::zero());
    for b in 0..m / 2 {
        j[(2 * b + 1, 2 * b)] = S::one();
        j[(2 * b, 2 * b + 1)] = -S::one();
    }
    ComplexStructure::new(j)
}

/// Left multiplication by `i`, `j`, `k` on each block of `R^m = H^{m/4}`,
/// with block basis `(1, i, j, k)`.
pub fn standard_quaternion_structure<S: Scalar>(m: usize) -> Result<QuaternionStructure<S>> {
    if m == 0 || !m.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!("quaternion structure needs m divisible by 4, got {m}")));
    }
    // images of (1, i, j, k) as (target, sign)
    const LEFT_I: [(usize, i64); 4] = [(1, 1), (0, -1), (3, 1), (2, -1)];
    const LEFT_J: [(usize, i64); 4] = [(2, 1), (3, -1), (0, -1), (1, 1)];
    const LEFT_K: [(usize, i64); 4] = [(3, 1), (2, 1), (1, -1), (0, -1)];
    let build = |table: &[(usize, i64); 4]| {
        let mut j = DMatrix::from_element(m, m, S::zero());
        for b in 0..m / 4 {
            for (src, &(dst, sign)) in table.iter().enumerate() {
                j[(4 * b + dst, 4 * b + src)] = S::from_i64_exact(sign);
            }
        }
        j
    };
    QuaternionStructure::new(build(&LEFT_I), build(&LEFT_J), build(&LEFT_K))
}

/// Constant sectional curvature one: `A0(X, Y) Z = <Y, Z> X - <X, Z> Y`.
pub fn a0<S: Scalar>(m: usize) -> Result<CurvatureTensor<S>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("a0 needs m >= 2, got {m}")));
    }
    Ok(CurvatureTensor::from_fn(m, |i, j, k, l| {
        let plus = j == k && i == l;
        let minus = i == k && j == l;
        match (plus, minus) {
            (true, false) => S::one(),
            (false, true) => -S::one(),
            _ => S::zero(),
        }
    }))
}

/// `A_J(X, Y) Z = 1/3 (<JY, Z> X - <JX, Z> Y - 2 <JX, Y> Z)`.
pub fn a_j<S: Scalar>(j: &ComplexStructure<S>) -> CurvatureTensor<S> {
    let jm = j.matrix();
    let m = j.dim();
    let third = S::one() / S::from_i64_exact(3);
    let two = S::from_i64_exact(2);
    CurvatureTensor::from_fn(m, |i, jj, k, l| {
        let mut v = S::zero();
        if i == l {
            v += jm[(k, jj)].clone();
        }
        if jj == l {
            v -= jm[(k, i)].clone();
        }
        if k == l {
            v -= two.clone() * jm[(jj, i)].clone();
        }
        if v.is_zero() {
            v
        } else {
            v * third.clone()
        }
    })
}

/// `a0 A0 + a1 J(A0 - J A_J) + (c1 - a0) J A_J`, composition acting on the output slot.
///
/// For unit `X` the Jacobi operator is `0` on `X`, `c1` on `JX`, and
/// `Y -> a0 Y + a1 JY` on `{X, JX}^perp`.
pub fn build_complex_family<S: Scalar>(c1: S, a0_coef: S, a1: S, j: &ComplexStructure<S>) -> Result<CurvatureTensor<S>> {
    let m = j.dim();
    let base = a0::<S>(m)?;
    let j_aj = compose_endomorphism(j.matrix(), &a_j(j))?;
    let inner = CurvatureTensor::linear_combination(m, &[(S::one(), &base), (-S::one(), &j_aj)])?;
    let j_inner = compose_endomorphism(j.matrix(), &inner)?;
    CurvatureTensor::linear_combination(
        m,
        &[(a0_coef.clone(), &base), (a1, &j_inner), (c1 - a0_coef, &j_aj)],
    )
}

/// Coefficients of the quaternionic family.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionicCoefficients<S> {
    pub c: [S; 4],
    pub a1: S,
    pub a2: S,
}

#[derive(Clone, Debug)]
pub struct QuaternionicModel<S> {
    pub tensor: CurvatureTensor<S>,
    /// Dimension of `{X, J1X, J2X, J3X}^perp`; zero when `m = 4`, in which case the
    /// `c4 +- i a1` eigenvalues do not occur.
    pub complement_dim: usize,
}

impl<S> QuaternionicModel<S> {
    pub fn complement_absent(&self) -> bool {
        self.complement_dim == 0
    }
}

/// `c4 A0 + sum_i (c_i - c4) J_i A_{J_i} + a1 J1(A0 - J1 A_{J1}) + a2 J1(J2 A_{J2} + J3 A_{J3})`.
///
/// Unit-`X` Jacobi table: `0` on `X`; `c1` on `J1X`; `c2 Y + (a1+a2) J1 Y` on `J2X`;
/// `c3 Y + (a1+a2) J1 Y` on `J3X`; `c4 Y + a1 J1 Y` on the quaternionic complement.
pub fn build_quaternionic_family<S: Scalar>(coef: &QuaternionicCoefficients<S>, q: &QuaternionStructure<S>) -> Result<QuaternionicModel<S>> {
    let m = q.dim();
    let [c1, c2, c3, c4] = coef.c.clone();
    let base = a0::<S>(m)?;
    let ji_aji = |js: &ComplexStructure<S>| compose_endomorphism(js.matrix(), &a_j(js));
    let t1 = ji_aji(q.j1())?;
    let t2 = ji_aji(q.j2())?;
    let t3 = ji_aji(q.j3())?;
    let inner1 = CurvatureTensor::linear_combination(m, &[(S::one(), &base), (-S::one(), &t1)])?;
    let j1_inner1 = compose_endomorphism(q.j1().matrix(), &inner1)?;
    let inner2 = t2.try_add(&t3)?;
    let j1_inner2 = compose_endomorphism(q.j1().matrix(), &inner2)?;
    let tensor = CurvatureTensor::linear_combination(
        m,
        &[
            (c4.clone(), &base),
            (c1 - c4.clone(), &t1),
            (c2 - c4.clone(), &t2),
            (c3 - c4, &t3),
            (coef.a1.clone(), &j1_inner1),
            (coef.a2.clone(), &j1_inner2),
        ],
    )?;
    Ok(QuaternionicModel { tensor, complement_dim: m - 4 })
}

//! Deformed and modified Riemannian extensions on the cotangent bundle.
//!
//! Coordinates are `(x1..xm, y1..ym)`, variable indices `0..m` and `m..2m`.
//! Both metrics have the block form `[[B, I], [I, 0]]` whose inverse is
//! `[[0, I], [I, -B]]`, so the Levi-Civita connection stays polynomial.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::classifier::{is_projective_affine_osserman, OssermanStatus, SampleConfig};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{curvature, PolyConnection, PolyCurvature};
use crate::poly::Polynomial;
use crate::spectral::{projective_scale, spectrum, Eigenvalue, ProjectiveMatch, Spectrum, SpectrumFile};
use crate::tensor::jacobi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    Deformed,
    Modified,
}

impl ExtensionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtensionKind::Deformed => "deformed",
            ExtensionKind::Modified => "modified",
        }
    }
}

/// Cotangent-bundle metric `[[B(x, y), I], [I, 0]]` over a base of dimension `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMetric {
    m: usize,
    b: Vec<Polynomial>,
}

impl PolyMetric {
    /// `b` is the row-major `m x m` upper-left block; it must be symmetric.
    pub fn block(m: usize, b: Vec<Polynomial>) -> Result<Self> {
        check_dim(m * m, b.len())?;
        for i in 0..m {
            for j in i + 1..m {
                if b[i * m + j] != b[j * m + i] {
                    return Err(Error::InvalidArgument(format!("metric block is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(PolyMetric { m, b })
    }

    pub fn base_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn b(&self, i: usize, j: usize) -> &Polynomial {
        &self.b[i * self.m + j]
    }

    pub fn component(&self, a: usize, c: usize) -> Polynomial {
        let m = self.m;
        match (a < m, c < m) {
            (true, true) => self.b(a, c).clone(),
            (true, false) | (false, true) => {
                if a.abs_diff(c) == m {
                    Polynomial::from_int(1)
                } else {
                    Polynomial::zero()
                }
            }
            (false, false) => Polynomial::zero(),
        }
    }

    /// Components of `[[0, I], [I, -B]]`.
    pub fn inverse_component(&self, a: usize, c: usize) -> Polynomial {
        let m = self.m;
        match (a < m, c < m) {
            (true, true) => Polynomial::zero(),
            (true, false) | (false, true) => {
                if a.abs_diff(c) == m {
                    Polynomial::from_int(1)
                } else {
                    Polynomial::zero()
                }
            }
            (false, false) => -self.b(a - m, c - m),
        }
    }

    /// `g g^{-1} = I` as polynomial identities.
    pub fn inverse_is_exact(&self) -> bool {
        let n = self.dim();
        for a in 0..n {
            for c in 0..n {
                let mut s = Polynomial::zero();
                for d in 0..n {
                    s = &s + &(&self.component(a, d) * &self.inverse_component(d, c));
                }
                let want = if a == c { Polynomial::from_int(1) } else { Polynomial::zero() };
                if s != want {
                    return false;
                }
            }
        }
        true
    }

    pub fn gram_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), point.len())?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for a in 0..n {
            for c in 0..n {
                g[(a, c)] = self.component(a, c).eval_exact_f64(point);
            }
        }
        Ok(g)
    }
}

/// `(positive, negative, zero)` eigenvalue counts of the Gram matrix.
pub fn signature(g: &DMatrix<f64>) -> (usize, usize, usize) {
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let scale = eig.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-12 * scale;
    let pos = eig.iter().filter(|&&v| v > tol).count();
    let neg = eig.iter().filter(|&&v| v < -tol).count();
    (pos, neg, eig.len() - pos - neg)
}

fn fiber_contraction(base: &PolyConnection, i: usize, j: usize) -> Polynomial {
    // -2 y_k Gamma_{ij}^k
    let m = base.dim();
    let mut s = Polynomial::zero();
    for k in 0..m {
        let g = base.gamma(i, j, k);
        if !g.is_zero() {
            s = &s + &(&Polynomial::var(m + k) * g);
        }
    }
    s.scale(&BigRational::from_integer((-2).into()))
}

/// `B_ij = -2 y_k Gamma_{ij}^k(x) + Phi_ij(x)`; `phi` is row-major `m x m`, or `None` for zero.
pub fn deformed_extension(base: &PolyConnection, phi: Option<&[Polynomial]>) -> Result<PolyMetric> {
    let m = base.dim();
    if let Some(phi) = phi {
        check_dim(m * m, phi.len())?;
        for i in 0..m {
            for j in i + 1..m {
                if phi[i * m + j] != phi[j * m + i] {
                    return Err(Error::InvalidArgument(format!("Phi is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        if let Some(p) = phi.iter().find(|p| p.num_vars() > m) {
            return Err(Error::InvalidArgument(format!("Phi entry {p} depends on fiber coordinates")));
        }
    }
    let mut b = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut v = fiber_contraction(base, i, j);
            if let Some(phi) = phi {
                v = &v + &phi[i * m + j];
            }
            b.push(v);
        }
    }
    PolyMetric::block(m, b)
}

/// `B_ij = y_i y_j - 2 y_k Gamma_{ij}^k(x)`.
pub fn modified_extension(base: &PolyConnection) -> Result<PolyMetric> {
    let m = base.dim();
    let mut b = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            b.push(&(&Polynomial::var(m + i) * &Polynomial::var(m + j)) + &fiber_contraction(base, i, j));
        }
    }
    PolyMetric::block(m, b)
}

/// Levi-Civita connection `Gamma_{ab}^c = 1/2 g^{cd} (d_a g_{bd} + d_b g_{ad} - d_d g_{ab})`.
///
/// Metric compatibility is verified as an exact identity before returning.
pub fn levi_civita_block(g: &PolyMetric) -> Result<PolyConnection> {
    let n = g.dim();
    let comp: Vec<Polynomial> = (0..n * n).map(|k| g.component(k / n, k % n)).collect();
    let inv: Vec<Polynomial> = (0..n * n).map(|k| g.inverse_component(k / n, k % n)).collect();
    let gc = |a: usize, b: usize| &comp[a * n + b];
    let half = BigRational::new(1.into(), 2.into());
    // first kind: Gamma_{abd} = 1/2 (d_a g_bd + d_b g_ad - d_d g_ab)
    let mut first = vec![Polynomial::zero(); n * n * n];
    for a in 0..n {
        for b in a..n {
            for d in 0..n {
                let v = &(&gc(b, d).derivative(a) + &gc(a, d).derivative(b)) - &gc(a, b).derivative(d);
                let v = v.scale(&half);
                first[(a * n + b) * n + d] = v.clone();
                first[(b * n + a) * n + d] = v;
            }
        }
    }
    let conn = PolyConnection::from_fn(n, |a, b, c| {
        let mut s = Polynomial::zero();
        for d in 0..n {
            let (gi, f) = (&inv[c * n + d], &first[(a * n + b) * n + d]);
            if !gi.is_zero() && !f.is_zero() {
                s = &s + &(gi * f);
            }
        }
        s
    })?
    .with_base_dim(g.base_dim());
    if !metric_compatible(g, &conn) {
        return Err(Error::Inconsistency("Levi-Civita connection failed metric compatibility".into()));
    }
    Ok(conn)
}

/// `d_a g_{bc} - Gamma_{ab}^d g_{dc} - Gamma_{ac}^d g_{bd} = 0` for all indices.
pub fn metric_compatible(g: &PolyMetric, conn: &PolyConnection) -> bool {
    let n = g.dim();
    if conn.dim() != n {
        return false;
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = g.component(b, c).derivative(a);
                for d in 0..n {
                    v = &v - &(conn.gamma(a, b, d) * &g.component(d, c));
                    v = &v - &(conn.gamma(a, c, d) * &g.component(b, d));
                }
                if !v.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Extension metric with its connection and curvature, built once and probed at points.
#[derive(Clone, Debug)]
pub struct ExtensionModel {
    pub kind: ExtensionKind,
    pub base: PolyConnection,
    pub metric: PolyMetric,
    pub connection: PolyConnection,
    pub curvature: PolyCurvature,
}

impl ExtensionModel {
    pub fn new(kind: ExtensionKind, base: &PolyConnection, phi: Option<&[Polynomial]>) -> Result<Self> {
        let metric = match kind {
            ExtensionKind::Deformed => deformed_extension(base, phi)?,
            ExtensionKind::Modified => {
                if phi.is_some() {
                    return Err(Error::InvalidArgument("the modified extension takes no Phi".into()));
                }
                modified_extension(base)?
            }
        };
        let connection = levi_civita_block(&metric)?;
        let curvature = curvature(&connection)?;
        Ok(ExtensionModel { kind, base: base.clone(), metric, connection, curvature })
    }

    pub fn base_dim(&self) -> usize {
        self.metric.base_dim()
    }

    /// Samples unit spacelike and timelike vectors at `point` and checks the
    /// spectral clauses for this kind of extension.
    pub fn check_at(&self, point: &[f64], n_vectors: usize, seed: u64, tol: f64) -> Result<ExtensionReport> {
        let m = self.base_dim();
        check_dim(2 * m, point.len())?;
        let gram = self.metric.gram_at(point)?;
        let (pos, neg, zero) = signature(&gram);
        let tensor = self.curvature.at_f64(point)?;
        let base_tensor = curvature(&self.base)?.at_f64(&point[..m])?;
        let base_status = is_projective_affine_osserman(&base_tensor, &SampleConfig { seed, tol, ..SampleConfig::default() })?.status;

        let (space, time) = causal_samples(&gram, n_vectors, seed)?;
        let probe = |vs: &[Vec<f64>]| -> Result<Vec<VectorReport>> {
            vs.iter()
                .map(|xi| {
                    let j = jacobi(&tensor, xi)?;
                    let s = spectrum(&j, tol)?;
                    let power = matrix_power(&j, 2 * m);
                    Ok(VectorReport {
                        vector: xi.clone(),
                        norm: xi.iter().zip(gram.row_iter()).map(|(a, row)| a * row.iter().zip(xi).map(|(g, b)| g * b).sum::<f64>()).sum(),
                        max_abs_eigenvalue: s.spectral_radius(),
                        jacobi_power_norm: power.norm(),
                        spectrum: s,
                    })
                })
                .collect()
        };
        let spacelike = probe(&space)?;
        let timelike = probe(&time)?;

        let mut clauses = vec![Clause {
            name: "neutral_signature".into(),
            pass: pos == m && neg == m && zero == 0,
            detail: format!("signature ({pos}, {neg}) with {zero} null directions"),
        }];
        match self.kind {
            ExtensionKind::Deformed => match base_status {
                OssermanStatus::AffineOsserman => clauses.push(nilpotent_clause(&spacelike, &timelike, tol, 2 * m)),
                OssermanStatus::ProjectiveAffineOsserman => {
                    clauses.push(projective_clause("projective_spacelike", &spacelike, tol)?);
                    clauses.push(projective_clause("projective_timelike", &timelike, tol)?);
                }
                OssermanStatus::Neither => clauses.push(Clause {
                    name: "base_hypothesis".into(),
                    pass: false,
                    detail: "base is neither affine nor projective Osserman at this point".into(),
                }),
            },
            ExtensionKind::Modified => {
                if base_status != OssermanStatus::AffineOsserman {
                    clauses.push(Clause {
                        name: "base_hypothesis".into(),
                        pass: false,
                        detail: format!("base verdict is {}, expected affine_osserman", base_status.as_str()),
                    });
                }
                clauses.push(fixed_spectrum_clause("spacelike_spectrum", &spacelike, 1.0, m, tol)?);
                clauses.push(fixed_spectrum_clause("timelike_spectrum", &timelike, -1.0, m, tol)?);
                clauses.push(negation_clause(&spacelike, &timelike, tol));
            }
        }
        let pass = clauses.iter().all(|c| c.pass);
        Ok(ExtensionReport {
            kind: self.kind,
            point: point.to_vec(),
            base_status,
            signature: (pos, neg),
            spacelike,
            timelike,
            clauses,
            pass,
        })
    }
}

fn matrix_power(j: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = j.nrows();
    let mut p = DMatrix::identity(n, n);
    for _ in 0..k {
        p = &p * j;
    }
    p
}

/// Deterministic Gaussian directions rescaled to `g(xi, xi) = +1` and `-1`.
pub fn causal_samples(gram: &DMatrix<f64>, n: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let dim = gram.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut space, mut time) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let max_draws = 1000 * n.max(1);
    for _ in 0..max_draws {
        if space.len() >= n && time.len() >= n {
            break;
        }
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let q: f64 = (0..dim).map(|a| (0..dim).map(|b| v[a] * gram[(a, b)] * v[b]).sum::<f64>()).sum();
        if q.abs() <= 1e-6 {
            continue;
        }
        let s = 1.0 / q.abs().sqrt();
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        if q > 0.0 && space.len() < n {
            space.push(scaled);
        } else if q < 0.0 && time.len() < n {
            time.push(scaled);
        }
    }
    if space.len() < n || time.len() < n {
        return Err(Error::Numerical(format!(
            "found {} spacelike and {} timelike unit vectors, needed {n} of each",
            space.len(),
            time.len()
        )));
    }
    Ok((space, time))
}

#[derive(Clone, Debug, Serialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VectorReport {
    pub vector: Vec<f64>,
    /// `g(xi, xi)`.
    pub norm: f64,
    pub spectrum: Spectrum,
    pub max_abs_eigenvalue: f64,
    /// Frobenius norm of `J^{2m}`.
    pub jacobi_power_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
struct VectorReportFile<'a> {
    vector: &'a [f64],
    norm: f64,
    spectrum: SpectrumFile,
    max_abs_eigenvalue: f64,
    jacobi_power_norm: f64,
}

#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub kind: ExtensionKind,
    pub point: Vec<f64>,
    pub base_status: OssermanStatus,
    pub signature: (usize, usize),
    pub spacelike: Vec<VectorReport>,
    pub timelike: Vec<VectorReport>,
    pub clauses: Vec<Clause>,
    pub pass: bool,
}

fn vector_files(vs: &[VectorReport]) -> Vec<VectorReportFile<'_>> {
    vs.iter()
        .map(|v| VectorReportFile {
            vector: &v.vector,
            norm: v.norm,
            spectrum: v.spectrum.to_file(),
            max_abs_eigenvalue: v.max_abs_eigenvalue,
            jacobi_power_norm: v.jacobi_power_norm,
        })
        .collect()
}

impl ExtensionReport {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn report(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "point": self.point,
            "base_status": self.base_status.as_str(),
            "signature": [self.signature.0, self.signature.1],
            "spacelike": vector_files(&self.spacelike),
            "timelike": vector_files(&self.timelike),
            "clauses": self.clauses,
            "pass": self.pass,
        })
    }
}

fn nilpotent_clause(space: &[VectorReport], time: &[VectorReport], tol: f64, power: usize) -> Clause {
    let all = space.iter().chain(time);
    let max_eig = all.clone().map(|v| v.max_abs_eigenvalue).fold(0.0, f64::max);
    let max_pow = all.map(|v| v.jacobi_power_norm).fold(0.0, f64::max);
    Clause {
        name: "nilpotent".into(),
        pass: max_eig < tol && max_pow < tol,
        detail: format!("max |eigenvalue| = {max_eig:e}, max |J^{power}| = {max_pow:e}"),
    }
}

fn projective_clause(name: &str, vs: &[VectorReport], tol: f64) -> Result<Clause> {
    if let Some(v) = vs.iter().find(|v| v.spectrum.is_zero()) {
        return Ok(Clause { name: name.into(), pass: false, detail: format!("nilpotent Jacobi operator at {:?}", v.vector) });
    }
    let mut worst = 0.0f64;
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            match projective_scale(&a.spectrum, &b.spectrum, tol)? {
                ProjectiveMatch::Positive { residual, .. } => worst = worst.max(residual),
                ProjectiveMatch::NegativeOnly { .. } => {
                    return Ok(Clause { name: name.into(), pass: false, detail: "spectra related by a negative factor".into() })
                }
                ProjectiveMatch::None { residual } => {
                    return Ok(Clause {
                        name: name.into(),
                        pass: false,
                        detail: format!("spectra not proportional (residual {residual:e})"),
                    })
                }
            }
        }
    }
    Ok(Clause { name: name.into(), pass: true, detail: format!("worst pairwise residual {worst:e}") })
}

/// Target spectrum `sign * {0: 1, 1: 1, 1/4: 2m - 2}`.
pub fn modified_target(sign: f64, m: usize, tol: f64) -> Result<Spectrum> {
    let mut items = vec![Eigenvalue::real(0.0, 1), Eigenvalue::real(sign, 1)];
    if m > 1 {
        items.push(Eigenvalue::real(0.25 * sign, 2 * m - 2));
    }
    Spectrum::from_items(items, tol)
}

fn spectra_match(a: &Spectrum, b: &Spectrum, tol: f64) -> Option<f64> {
    if a.items().len() != b.items().len() {
        return None;
    }
    let mut worst = 0.0f64;
    for (x, y) in a.items().iter().zip(b.items()) {
        if x.mult != y.mult {
            return None;
        }
        worst = worst.max((x.value - y.value).norm());
    }
    (worst <= tol).then_some(worst)
}

fn describe(s: &Spectrum) -> String {
    s.items().iter().map(|e| format!("{} x{}", e.value, e.mult)).collect::<Vec<_>>().join(", ")
}

fn fixed_spectrum_clause(name: &str, vs: &[VectorReport], sign: f64, m: usize, tol: f64) -> Result<Clause> {
    let target = modified_target(sign, m, tol)?;
    // the eigenvalue tolerance is looser than the clustering tolerance: values
    // come from a non-normal operator
    let match_tol = tol.max(1e-6);
    for v in vs {
        if spectra_match(&v.spectrum, &target, match_tol).is_none() {
            return Ok(Clause { name: name.into(), pass: false, detail: format!("spectrum [{}] at {:?}", describe(&v.spectrum), v.vector) });
        }
    }
    Ok(Clause { name: name.into(), pass: true, detail: format!("{} vectors match [{}]", vs.len(), describe(&target)) })
}

fn negation_clause(space: &[VectorReport], time: &[VectorReport], tol: f64) -> Clause {
    let match_tol = tol.max(1e-6);
    let ok = space.iter().zip(time).all(|(s, t)| spectra_match(&s.spectrum.scaled(-1.0), &t.spectrum, match_tol).is_some());
    Clause {
        name: "timelike_is_negated_spacelike".into(),
        pass: ok,
        detail: if ok { "timelike spectra are the negatives of spacelike spectra".into() } else { "sign reading violated".into() },
    }
}

/// Exact symmetric `m x m` tensor from row-major rational constants.
pub fn constant_phi(m: usize, entries: &[BigRational]) -> Result<Vec<Polynomial>> {
    check_dim(m * m, entries.len())?;
    Ok(entries.iter().map(|q| if q.is_zero() { Polynomial::zero() } else { Polynomial::constant(q.clone()) }).collect())
}

/// `Phi = I` as polynomials; convenient non-trivial deformation.
pub fn identity_phi(m: usize) -> Vec<Polynomial> {
    (0..m * m).map(|k| if k / m == k % m { Polynomial::constant(BigRational::one()) } else { Polynomial::zero() }).collect()
}

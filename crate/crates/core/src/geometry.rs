//! Affine connections with polynomial Christoffel symbols.
//!
//! Index conventions: `nabla_{d_i} d_j = Gamma_{ij}^k d_k` and
//! `R(d_i, d_j) d_k = R_{ijk}^l d_l` with
//!
//! ```text
//! R_{ijk}^l = d_i Gamma_{jk}^l - d_j Gamma_{ik}^l + Gamma_{in}^l Gamma_{jk}^n - Gamma_{jn}^l Gamma_{ik}^n
//! ```
//!
//! which matches [`CurvatureTensor`] entry for entry. The Ricci tensor traces
//! the first slot: `rho_{jk} = sum_l R_{ljk}^l`, so `rho(X, X)` is the trace
//! of the Jacobi operator of `X`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::classifier::{is_projective_affine_osserman, OssermanStatus, SampleConfig};
use crate::error::{Error, Result};
use crate::poly::{parse_polynomial, CompiledPolynomial, Polynomial};
use crate::scalar::{rational_from_f64, Scalar};
use crate::tensor::CurvatureTensor;

/// Torsion-free connection on `R^dim` (or on a cotangent bundle, with `dim = 2m`).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyConnection {
    dim: usize,
    gamma: Vec<Polynomial>,
    /// Base dimension when the coordinates are `(x, y)` on a cotangent bundle; used for display.
    base_dim: Option<usize>,
}

impl PolyConnection {
    pub fn flat(dim: usize) -> Self {
        PolyConnection { dim, gamma: vec![Polynomial::zero(); dim * dim * dim], base_dim: None }
    }

    /// Builds from `gamma(i, j, k) = Gamma_{ij}^k` (0-based), rejecting torsion.
    pub fn from_fn(dim: usize, mut gamma: impl FnMut(usize, usize, usize) -> Polynomial) -> Result<Self> {
        let mut g = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    g.push(gamma(i, j, k));
                }
            }
        }
        let c = PolyConnection { dim, gamma: g, base_dim: None };
        c.check_torsion_free()?;
        Ok(c)
    }

    /// Builds from a list of symbols; each `(i, j, k)` also sets `(j, i, k)`.
    /// Conflicting assignments are an error.
    pub fn from_symbols(dim: usize, symbols: &[((usize, usize, usize), Polynomial)]) -> Result<Self> {
        let mut c = PolyConnection::flat(dim);
        let mut set: BTreeMap<(usize, usize, usize), Polynomial> = BTreeMap::new();
        for ((i, j, k), p) in symbols {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidArgument(format!("Christoffel index ({i}, {j}, {k}) out of range for dim {dim}")));
            }
            if p.num_vars() > dim {
                return Err(Error::InvalidArgument(format!("symbol ({i}, {j}, {k}) uses variables beyond dimension {dim}")));
            }
            for key in [(i, j, k), (j, i, k)] {
                match set.get(&key) {
                    Some(prev) if prev != p => {
                        return Err(Error::Torsion { i: key.0 + 1, j: key.1 + 1, k: key.2 + 1 });
                    }
                    _ => {
                        set.insert(key, p.clone());
                    }
                }
            }
        }
        for ((i, j, k), p) in set {
            let idx = c.index(i, j, k);
            c.gamma[idx] = p;
        }
        Ok(c)
    }

    pub fn with_base_dim(mut self, m: usize) -> Self {
        self.base_dim = Some(m);
        self
    }

    pub fn base_dim(&self) -> Option<usize> {
        self.base_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &Polynomial {
        &self.gamma[self.index(i, j, k)]
    }

    fn check_torsion_free(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    if self.gamma(i, j, k) != self.gamma(j, i, k) {
                        return Err(Error::Torsion { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    /// Nonzero symbols `(i, j, k, Gamma_{ij}^k)`, 0-based.
    pub fn nonzero_symbols(&self) -> impl Iterator<Item = (usize, usize, usize, &Polynomial)> + '_ {
        let m = self.dim;
        (0..m * m * m).filter(|&n| !self.gamma[n].is_zero()).map(move |n| (n / (m * m), (n / m) % m, n % m, &self.gamma[n]))
    }

    pub fn to_file(&self) -> ConnectionFile {
        let mut gamma = BTreeMap::new();
        for (i, j, k, p) in self.nonzero_symbols() {
            if i <= j {
                gamma.insert(format!("{},{},{}", i + 1, j + 1, k + 1), p.display_with(self.base_dim));
            }
        }
        ConnectionFile { dim: self.dim, gamma }
    }

    pub fn from_file(file: &ConnectionFile) -> Result<Self> {
        let m = file.dim;
        if m == 0 {
            return Err(Error::InvalidArgument("connection dimension must be positive".into()));
        }
        let mut symbols = Vec::with_capacity(file.gamma.len());
        for (key, src) in &file.gamma {
            let idx: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("malformed Christoffel key '{key}'")))?;
            if idx.len() != 3 || idx.iter().any(|&v| v == 0 || v > m) {
                return Err(Error::InvalidArgument(format!("Christoffel key '{key}' needs three indices in 1..={m}")));
            }
            let p = parse_polynomial(src, Some(m)).map_err(|e| match e {
                Error::Parse { position, message } => {
                    Error::Parse { position, message: format!("{message} (in symbol {key})") }
                }
                other => other,
            })?;
            if p.num_vars() > m {
                return Err(Error::InvalidArgument(format!("symbol {key} uses fiber variables")));
            }
            symbols.push(((idx[0] - 1, idx[1] - 1, idx[2] - 1), p));
        }
        PolyConnection::from_symbols(m, &symbols)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("connection serializes")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        PolyConnection::from_file(&serde_json::from_str(src)?)
    }
}

/// `{"dim": m, "gamma": {"i,j,k": "<polynomial>"}}` with 1-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionFile {
    pub dim: usize,
    pub gamma: BTreeMap<String, String>,
}

/// Exact curvature `R_{ijk}^l` of a polynomial connection.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCurvature {
    dim: usize,
    r: Vec<Polynomial>,
}

impl PolyCurvature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &Polynomial {
        &self.r[self.index(i, j, k, l)]
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(Polynomial::is_zero)
    }

    /// Nonzero entries `(i, j, k, l, R_{ijk}^l)`, 0-based.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, &Polynomial)> + '_ {
        let m = self.dim;
        (0..self.r.len()).filter(|&n| !self.r[n].is_zero()).map(move |n| {
            (n / (m * m * m), (n / (m * m)) % m, (n / m) % m, n % m, &self.r[n])
        })
    }

    /// Antisymmetry and first Bianchi identity as exact polynomial identities.
    pub fn satisfies_identities(&self) -> bool {
        let m = self.dim;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        if !(self.get(i, j, k, l) + self.get(j, i, k, l)).is_zero() {
                            return false;
                        }
                        let cyc = &(self.get(i, j, k, l) + self.get(j, k, i, l)) + self.get(k, i, j, l);
                        if !cyc.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Evaluates every entry at `point`; exact when `S` is rational.
    pub fn at<S: Scalar>(&self, point: &[S]) -> CurvatureTensor<S> {
        CurvatureTensor::from_fn(self.dim, |i, j, k, l| self.get(i, j, k, l).eval(point))
    }

    /// Evaluates at a floating point, each entry computed exactly and rounded once.
    pub fn at_f64(&self, point: &[f64]) -> Result<CurvatureTensor<f64>> {
        let q = exact_point(point)?;
        Ok(self.at(&q).to_f64())
    }
}

fn exact_point(point: &[f64]) -> Result<Vec<BigRational>> {
    point
        .iter()
        .map(|&v| rational_from_f64(v).ok_or_else(|| Error::InvalidArgument(format!("coordinate {v} is not finite"))))
        .collect()
}

/// Exact curvature of `c`; the curvature identities are verified before returning.
pub fn curvature(c: &PolyConnection) -> Result<PolyCurvature> {
    c.check_torsion_free()?;
    let m = c.dim;
    // derivatives d_i Gamma_{jk}^l, indexed like gamma with a leading i
    let mut dgamma = Vec::with_capacity(m * c.gamma.len());
    for i in 0..m {
        for g in &c.gamma {
            dgamma.push(g.derivative(i));
        }
    }
    let dg = |i: usize, j: usize, k: usize, l: usize| &dgamma[i * m * m * m + c.index(j, k, l)];
    let mut r = Vec::with_capacity(m * m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    if i == j {
                        r.push(Polynomial::zero());
                        continue;
                    }
                    let mut v = dg(i, j, k, l) - dg(j, i, k, l);
                    for n in 0..m {
                        let (a, b) = (c.gamma(i, n, l), c.gamma(j, k, n));
                        if !a.is_zero() && !b.is_zero() {
                            v = &v + &(a * b);
                        }
                        let (a, b) = (c.gamma(j, n, l), c.gamma(i, k, n));
                        if !a.is_zero() && !b.is_zero() {
                            v = &v - &(a * b);
                        }
                    }
                    r.push(v);
                }
            }
        }
    }
    let curv = PolyCurvature { dim: m, r };
    if !curv.satisfies_identities() {
        return Err(Error::Inconsistency("curvature of a torsion-free connection failed the Bianchi identity".into()));
    }
    Ok(curv)
}

pub fn curvature_at(c: &PolyConnection, point: &[f64]) -> Result<CurvatureTensor<f64>> {
    crate::error::check_dim(c.dim, point.len())?;
    curvature(c)?.at_f64(point)
}

/// Covariant derivative of curvature, `(nabla_{d_n} R)(d_i, d_j) d_k` with component `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct NablaCurvature {
    dim: usize,
    t: Vec<Polynomial>,
}

impl NablaCurvature {
    fn index(&self, i: usize, j: usize, k: usize, n: usize, l: usize) -> usize {
        (((i * self.dim + j) * self.dim + k) * self.dim + n) * self.dim + l
    }

    /// Component `l` of `nabla R(d_i, d_j, d_k; d_n)`, 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize, n: usize, l: usize) -> &Polynomial {
        &self.t[self.index(i, j, k, n, l)]
    }

    /// The vector `nabla R(d_i, d_j, d_k; d_n)` as its `dim` components.
    pub fn vector(&self, i: usize, j: usize, k: usize, n: usize) -> Vec<Polynomial> {
        (0..self.dim).map(|l| self.get(i, j, k, n, l).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().all(Polynomial::is_zero)
    }
}

/// `d_n R_{ijk}^l + Gamma_{np}^l R_{ijk}^p - Gamma_{ni}^p R_{pjk}^l - Gamma_{nj}^p R_{ipk}^l - Gamma_{nk}^p R_{ijp}^l`.
pub fn nabla_r(c: &PolyConnection, r: &PolyCurvature) -> Result<NablaCurvature> {
    crate::error::check_dim(c.dim, r.dim)?;
    let m = c.dim;
    let mut t = Vec::with_capacity(m.pow(5));
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for n in 0..m {
                    for l in 0..m {
                        let mut v = r.get(i, j, k, l).derivative(n);
                        for p in 0..m {
                            let terms = [
                                (c.gamma(n, p, l), r.get(i, j, k, p), true),
                                (c.gamma(n, i, p), r.get(p, j, k, l), false),
                                (c.gamma(n, j, p), r.get(i, p, k, l), false),
                                (c.gamma(n, k, p), r.get(i, j, p, l), false),
                            ];
                            for (g, rr, plus) in terms {
                                if g.is_zero() || rr.is_zero() {
                                    continue;
                                }
                                let prod = g * rr;
                                v = if plus { &v + &prod } else { &v - &prod };
                            }
                        }
                        t.push(v);
                    }
                }
            }
        }
    }
    Ok(NablaCurvature { dim: m, t })
}

/// Ricci tensor with its symmetric and antisymmetric parts, row-major `dim x dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciSplit {
    pub dim: usize,
    pub rho: Vec<Polynomial>,
    pub symmetric: Vec<Polynomial>,
    pub antisymmetric: Vec<Polynomial>,
}

impl RicciSplit {
    pub fn symmetric_at(&self, point: &[f64]) -> Result<Vec<f64>> {
        let q = exact_point(point)?;
        Ok(self.symmetric.iter().map(|p| p.eval(&q).as_f64()).collect())
    }
}

pub fn ricci_split(c: &PolyConnection) -> Result<RicciSplit> {
    let r = curvature(c)?;
    Ok(ricci_from_curvature(&r))
}

pub fn ricci_from_curvature(r: &PolyCurvature) -> RicciSplit {
    let m = r.dim;
    let half = BigRational::new(1.into(), 2.into());
    let mut rho = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let mut v = Polynomial::zero();
            for l in 0..m {
                v = &v + r.get(l, j, k, l);
            }
            rho.push(v);
        }
    }
    let mut symmetric = Vec::with_capacity(m * m);
    let mut antisymmetric = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            let (a, b) = (&rho[j * m + k], &rho[k * m + j]);
            symmetric.push((a + b).scale(&half));
            antisymmetric.push((a - b).scale(&half));
        }
    }
    RicciSplit { dim: m, rho, symmetric, antisymmetric }
}

/// Definiteness of the symmetric Ricci part of a surface, with the sampled verdict alongside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceVerdict {
    pub rho_s: [[f64; 2]; 2],
    pub definite: bool,
    pub sampled: OssermanStatus,
    pub agree: bool,
}

/// Exact 2x2 definiteness: `det > 0` (both eigenvalues nonzero and of one sign).
fn definite_2x2(a: &BigRational, b: &BigRational, d: &BigRational) -> bool {
    let det = a * d - b * b;
    det.is_positive()
}

pub fn surface_projective_osserman(c: &PolyConnection, point: &[f64], config: &SampleConfig) -> Result<SurfaceVerdict> {
    if c.dim != 2 {
        return Err(Error::InvalidArgument(format!("surface criterion needs m = 2, got {}", c.dim)));
    }
    crate::error::check_dim(2, point.len())?;
    let r = curvature(c)?;
    let ricci = ricci_from_curvature(&r);
    let q = exact_point(point)?;
    let s: Vec<BigRational> = ricci.symmetric.iter().map(|p| p.eval(&q)).collect();
    let definite = definite_2x2(&s[0], &s[1], &s[3]);
    let sampled = is_projective_affine_osserman(&r.at(&q).to_f64(), config)?.status;
    let agree = definite == (sampled == OssermanStatus::ProjectiveAffineOsserman);
    let f = |v: &BigRational| v.as_f64();
    Ok(SurfaceVerdict { rho_s: [[f(&s[0]), f(&s[1])], [f(&s[2]), f(&s[3])]], definite, sampled, agree })
}

/// The connection with `Gamma_{mm}^m = 2`, `Gamma_{im}^i = Gamma_{mi}^i = Gamma_{ii}^m = 1`
/// for `i < m`, and `Gamma_{11}^1 = -Gamma_{22}^2 = eps (x1 + x2)`.
///
/// The `eps` terms need `m >= 3`; at `m = 2` only `eps = 0` is accepted.
pub fn deformed_constant_curvature(m: usize, eps: &BigRational) -> Result<PolyConnection> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("the family needs m >= 2, got {m}")));
    }
    if m < 3 && !eps.is_zero() {
        return Err(Error::InvalidArgument("nonzero eps needs m >= 3".into()));
    }
    let last = m - 1;
    let one = Polynomial::from_int(1);
    let mut symbols = vec![((last, last, last), Polynomial::from_int(2))];
    for i in 0..last {
        symbols.push(((i, last, i), one.clone()));
        symbols.push(((i, i, last), one.clone()));
    }
    if !eps.is_zero() {
        let s = (&Polynomial::var(0) + &Polynomial::var(1)).scale(eps);
        symbols.push(((0, 0, 0), s.clone()));
        symbols.push(((1, 1, 1), -&s));
    }
    PolyConnection::from_symbols(m, &symbols)
}

/// `Gamma_{11}^3 = x2` on `R^3`: non-flat with 2-step nilpotent Jacobi operators.
pub fn plane_wave_base() -> PolyConnection {
    PolyConnection::from_symbols(3, &[((0, 0, 2), Polynomial::var(1))]).expect("valid symbols")
}

/// Geodesic trajectory sampled at accepted integrator steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicResult {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// Time at which the speed exceeded the blow-up threshold or the step size collapsed.
    pub blow_up: Option<f64>,
}

pub const BLOW_UP_SPEED: f64 = 1e8;

struct GeodesicField {
    dim: usize,
    gamma: Vec<(usize, usize, usize, CompiledPolynomial)>,
}

impl GeodesicField {
    fn accel(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.dim];
        for (i, j, k, g) in &self.gamma {
            a[*k] -= g.eval(x) * v[*i] * v[*j];
        }
        a
    }

    fn rk4(&self, x: &[f64], v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
        let axpy = |base: &[f64], d: &[f64], s: f64| -> Vec<f64> { base.iter().zip(d).map(|(b, d)| b + s * d).collect() };
        let k1x = v.to_vec();
        let k1v = self.accel(x, v);
        let x2 = axpy(x, &k1x, h / 2.0);
        let v2 = axpy(v, &k1v, h / 2.0);
        let k2x = v2.clone();
        let k2v = self.accel(&x2, &v2);
        let x3 = axpy(x, &k2x, h / 2.0);
        let v3 = axpy(v, &k2v, h / 2.0);
        let k3x = v3.clone();
        let k3v = self.accel(&x3, &v3);
        let x4 = axpy(x, &k3x, h);
        let v4 = axpy(v, &k3v, h);
        let k4x = v4.clone();
        let k4v = self.accel(&x4, &v4);
        let comb = |b: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
            (0..b.len()).map(|n| b[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])).collect()
        };
        (comb(x, &k1x, &k2x, &k3x, &k4x), comb(v, &k1v, &k2v, &k3v, &k4v))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates `x'' + Gamma_{ij}^k(x) x'^i x'^j = 0` with step-doubling RK4.
///
/// `step` is the largest step taken; steps are halved when the local error
/// estimate is too large. Blow-up is reported when the speed passes
/// [`BLOW_UP_SPEED`] or the step would shrink below `1e-14 * max(1, t_max)`.
pub fn geodesic_integrate(c: &PolyConnection, x0: &[f64], v0: &[f64], t_max: f64, step: f64) -> Result<GeodesicResult> {
    crate::error::check_dim(c.dim, x0.len())?;
    crate::error::check_dim(c.dim, v0.len())?;
    if !(step > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidArgument("geodesic integration needs step > 0 and t_max >= 0".into()));
    }
    let field = GeodesicField {
        dim: c.dim,
        gamma: c.nonzero_symbols().map(|(i, j, k, p)| (i, j, k, p.compile())).collect(),
    };
    const LOCAL_TOL: f64 = 1e-10;
    let min_step = 1e-14 * t_max.max(1.0);
    let (mut x, mut v) = (x0.to_vec(), v0.to_vec());
    let mut t = 0.0;
    let mut h = step;
    let mut out = GeodesicResult { times: vec![0.0], positions: vec![x.clone()], velocities: vec![v.clone()], blow_up: None };
    while t < t_max {
        if norm(&v) > BLOW_UP_SPEED {
            out.blow_up = Some(t);
            break;
        }
        let h_try = h.min(t_max - t);
        let (x_full, v_full) = field.rk4(&x, &v, h_try);
        let (x_half, v_half) = field.rk4(&x, &v, h_try / 2.0);
        let (x_two, v_two) = field.rk4(&x_half, &v_half, h_try / 2.0);
        let scale = 1.0 + norm(&x_two) + norm(&v_two);
        let err = x_full
            .iter()
            .zip(&x_two)
            .chain(v_full.iter().zip(&v_two))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let finite = x_two.iter().chain(&v_two).all(|z| z.is_finite());
        if !finite || err > LOCAL_TOL * scale {
            h = h_try / 2.0;
            if h < min_step {
                out.blow_up = Some(t);
                break;
            }
            continue;
        }
        t += h_try;
        x = x_two;
        v = v_two;
        out.times.push(t);
        out.positions.push(x.clone());
        out.velocities.push(v.clone());
        if err < LOCAL_TOL * scale / 64.0 {
            h = (h * 2.0).min(step);
        }
    }
    if out.blow_up.is_none() && norm(&v) > BLOW_UP_SPEED {
        out.blow_up = Some(t);
    }
    Ok(out)
}

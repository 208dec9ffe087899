//! Eigenvalue extraction with multiplicity clustering, Jordan block profiles
//! and projective comparison of spectra.
//!
//! Eigenvalues of a defective matrix computed in floating point split into a
//! small cloud of radius about `eps^(1/k)` around the true value (k the block
//! size). Plain distance clustering at a tight tolerance would report such a
//! cloud as several distinct eigenvalues, so [`spectrum`] first clusters at
//! `cluster_tol` and then merges nearby clusters whenever the candidate
//! centroid has a generalized eigenspace of the combined dimension. The
//! centroid of the cloud is accurate to working precision because the trace
//! is perturbed only linearly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value threshold used when confirming that a cluster of
/// computed eigenvalues belongs to one generalized eigenspace.
const GENERALIZED_NULLITY_TOL: f64 = 1e-12;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub mult: usize,
}

impl Eigenvalue {
    pub fn real(value: f64, mult: usize) -> Self {
        Eigenvalue { value: Complex64::new(value, 0.0), mult }
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Clustered eigenvalues with algebraic multiplicities.
///
/// Items are sorted by real part, then imaginary part. Non-real values come in
/// exact conjugate pairs with equal multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    items: Vec<Eigenvalue>,
    cluster_tol: f64,
}

fn sort_items(items: &mut [Eigenvalue]) {
    items.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
}

impl Spectrum {
    /// Builds a spectrum from explicit items, checking the invariants.
    pub fn from_items(mut items: Vec<Eigenvalue>, cluster_tol: f64) -> Result<Self> {
        if items.iter().any(|e| e.mult == 0 || !e.value.re.is_finite() || !e.value.im.is_finite()) {
            return Err(Error::InvalidArgument("spectrum items need finite values and positive multiplicity".into()));
        }
        sort_items(&mut items);
        for (a, i) in items.iter().zip(0..) {
            for b in &items[i + 1..] {
                if (a.value - b.value).norm() <= cluster_tol {
                    return Err(Error::InvalidArgument(format!(
                        "spectrum items {} and {} are within the cluster tolerance",
                        a.value, b.value
                    )));
                }
            }
            if a.value.im != 0.0 {
                let partner = items
                    .iter()
                    .any(|b| b.value == a.value.conj() && b.mult == a.mult);
                if !partner {
                    return Err(Error::InvalidArgument(format!("{} lacks its conjugate partner", a.value)));
                }
            }
        }
        Ok(Spectrum { items, cluster_tol })
    }

    pub fn items(&self) -> &[Eigenvalue] {
        &self.items
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn size(&self) -> usize {
        self.items.iter().map(|e| e.mult).sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.items.iter().map(|e| e.value.norm()).fold(0.0, f64::max)
    }

    /// Absolute tolerance: `cluster_tol` relative to the spectral radius, absolute below radius one.
    pub fn abs_tol(&self) -> f64 {
        self.cluster_tol * self.spectral_radius().max(1.0)
    }

    pub fn multiplicity_of(&self, value: Complex64, tol: f64) -> usize {
        self.items
            .iter()
            .filter(|e| (e.value - value).norm() <= tol)
            .map(|e| e.mult)
            .sum()
    }

    pub fn zero_multiplicity(&self) -> usize {
        self.items.iter().filter(|e| e.value == Complex64::new(0.0, 0.0)).map(|e| e.mult).sum()
    }

    /// `true` when every eigenvalue is zero (nilpotent operator).
    pub fn is_zero(&self) -> bool {
        self.items.iter().all(|e| e.value.norm() == 0.0)
    }

    /// Adds one to the multiplicity of zero; turns a reduced-Jacobi spectrum into the full one.
    pub fn with_extra_zero(&self) -> Spectrum {
        let mut items = self.items.clone();
        match items.iter_mut().find(|e| e.value.norm() == 0.0) {
            Some(e) => e.mult += 1,
            None => items.push(Eigenvalue::real(0.0, 1)),
        }
        sort_items(&mut items);
        Spectrum { items, cluster_tol: self.cluster_tol }
    }

    pub fn scaled(&self, s: f64) -> Spectrum {
        let mut items: Vec<_> = self
            .items
            .iter()
            .map(|e| Eigenvalue { value: e.value * s, mult: e.mult })
            .collect();
        sort_items(&mut items);
        Spectrum { items, cluster_tol: self.cluster_tol }
    }

    /// Real eigenvalues.
    pub fn real_items(&self) -> impl Iterator<Item = &Eigenvalue> {
        self.items.iter().filter(|e| e.value.im == 0.0)
    }

    /// Representatives of conjugate pairs (`Im > 0`).
    pub fn pair_items(&self) -> impl Iterator<Item = &Eigenvalue> {
        self.items.iter().filter(|e| e.value.im > 0.0)
    }

    pub fn to_file(&self) -> SpectrumFile {
        SpectrumFile {
            eigenvalues: self
                .items
                .iter()
                .map(|e| EigenvalueFile { re: e.value.re, im: e.value.im, mult: e.mult })
                .collect(),
            tol: self.cluster_tol,
        }
    }

    pub fn from_file(file: &SpectrumFile) -> Result<Self> {
        Spectrum::from_items(
            file.eigenvalues
                .iter()
                .map(|e| Eigenvalue { value: Complex64::new(e.re, e.im), mult: e.mult })
                .collect(),
            file.tol,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueFile {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

/// `{"eigenvalues": [{"re", "im", "mult"}], "tol"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub eigenvalues: Vec<EigenvalueFile>,
    pub tol: f64,
}

fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("spectrum of a non-square matrix".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eig = schur_eigenvalues(m).ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    if eig.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(Error::Numerical("eigen-solver produced non-finite values".into()));
    }
    Ok(eig)
}

// The shifted QR iteration can stall on matrices with clustered derogatory
// eigenvalues; similar matrices share eigenvalues, so retry on conjugates with
// a looser deflation threshold, then in complex arithmetic.
fn schur_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    let max_iter = 30 * n + 100;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c4u64);
    let mut candidates = vec![m.clone(), m.transpose()];
    for _ in 0..2 {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        candidates.push(q.transpose() * m * &q);
    }
    for eps in [f64::EPSILON, 16.0 * f64::EPSILON] {
        for c in &candidates {
            if let Some(s) = c.clone().try_schur(eps, max_iter) {
                return Some(s.complex_eigenvalues().iter().cloned().collect());
            }
        }
    }
    for c in &candidates {
        if let Some(s) = to_complex(c).try_schur(16.0 * f64::EPSILON, 10 * max_iter) {
            let (_, t) = s.unpack();
            return Some(t.diagonal().iter().cloned().collect());
        }
    }
    None
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

fn singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().cloned().collect())
}

fn shifted_power(m: &DMatrix<Complex64>, shift: Complex64, k: usize) -> DMatrix<Complex64> {
    let n = m.nrows();
    let shifted = m - DMatrix::<Complex64>::identity(n, n) * shift;
    let mut p = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..k {
        p = &p * &shifted;
    }
    p
}

/// Numerical rank of `(M - shift I)^k` with threshold `rel_tol * base^k`.
fn power_rank(m: &DMatrix<Complex64>, shift: Complex64, k: usize, base: f64, rel_tol: f64) -> Result<usize> {
    let n = m.nrows();
    if k == 0 {
        return Ok(n);
    }
    let sv = singular_values(&shifted_power(m, shift, k))?;
    let threshold = rel_tol * base.powi(k as i32);
    Ok(sv.iter().filter(|&&s| s > threshold && s > 0.0).count())
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

struct Cluster {
    members: Vec<Complex64>,
}

impl Cluster {
    fn centroid(&self) -> Complex64 {
        self.members.iter().sum::<Complex64>() / self.members.len() as f64
    }
}

/// Groups items whose representative points are within `radius` (single linkage).
fn linkage_components(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut c = i;
        while label[c] != r {
            let next = label[c];
            label[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut label, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigenvalues of a real square matrix, clustered with multiplicities.
///
/// `cluster_tol` is relative to the spectral radius (absolute when the radius
/// is below one). Clusters with `|Im| <= tol` are snapped to the real axis and
/// clusters with `|value| <= tol` to zero.
pub fn spectrum(m: &DMatrix<f64>, cluster_tol: f64) -> Result<Spectrum> {
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument("cluster tolerance must be nonnegative".into()));
    }
    let eig = eigenvalues(m)?;
    let radius = eig.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let scale = radius.max(1.0);
    let tight = cluster_tol * scale;

    let mut clusters: Vec<Cluster> = linkage_components(&eig, tight)
        .into_iter()
        .map(|idx| Cluster { members: idx.into_iter().map(|i| eig[i]).collect() })
        .collect();

    // Merge clouds of a defective eigenvalue, from the tightest radius outwards.
    if cluster_tol > 0.0 && clusters.len() > 1 {
        let cm = to_complex(m);
        let base = frobenius(&cm);
        let loose = cluster_tol.powf(0.25) * scale;
        let mut r = tight * 10.0;
        while r <= loose * 10.0 {
            let radius_now = r.min(loose);
            let centroids: Vec<Complex64> = clusters.iter().map(Cluster::centroid).collect();
            let groups = linkage_components(&centroids, radius_now);
            let mut next = Vec::with_capacity(clusters.len());
            let mut taken: Vec<Option<Cluster>> = clusters.into_iter().map(Some).collect();
            for g in groups {
                if g.len() == 1 {
                    next.push(taken[g[0]].take().unwrap());
                    continue;
                }
                let members: Vec<Complex64> = g
                    .iter()
                    .flat_map(|&i| taken[i].as_ref().unwrap().members.clone())
                    .collect();
                let merged = Cluster { members };
                let c = merged.centroid();
                let k = merged.members.len();
                let n = cm.nrows();
                let rank = power_rank(&cm, c, k, base + c.norm(), GENERALIZED_NULLITY_TOL)?;
                if n - rank >= k {
                    next.push(merged);
                    for &i in &g {
                        taken[i] = None;
                    }
                } else {
                    for &i in &g {
                        next.push(taken[i].take().unwrap());
                    }
                }
            }
            clusters = next;
            if radius_now >= loose {
                break;
            }
            r *= 10.0;
        }
    }

    let mut items: Vec<Eigenvalue> = clusters
        .iter()
        .map(|c| {
            let mut v = c.centroid();
            if v.im.abs() <= tight {
                v.im = 0.0;
            }
            if v.norm() <= tight {
                v = Complex64::new(0.0, 0.0);
            }
            Eigenvalue { value: v, mult: c.members.len() }
        })
        .collect();

    // Snapping can bring distinct clusters onto one point (e.g. two near-zero clouds).
    sort_items(&mut items);
    let mut dedup: Vec<Eigenvalue> = Vec::with_capacity(items.len());
    for e in items {
        match dedup.iter_mut().find(|d| (d.value - e.value).norm() <= tight) {
            Some(d) => {
                let total = (d.mult + e.mult) as f64;
                d.value = (d.value * d.mult as f64 + e.value * e.mult as f64) / total;
                d.mult += e.mult;
            }
            None => dedup.push(e),
        }
    }

    // Enforce exact conjugate pairing.
    let mut paired: Vec<Eigenvalue> = Vec::with_capacity(dedup.len());
    let mut used = vec![false; dedup.len()];
    for i in 0..dedup.len() {
        if used[i] {
            continue;
        }
        let e = dedup[i];
        if e.value.im == 0.0 {
            used[i] = true;
            paired.push(e);
            continue;
        }
        let target = e.value.conj();
        let partner = (0..dedup.len())
            .filter(|&j| j != i && !used[j] && dedup[j].mult == e.mult)
            .min_by(|&a, &b| {
                (dedup[a].value - target)
                    .norm()
                    .total_cmp(&(dedup[b].value - target).norm())
            });
        match partner {
            Some(j) if (dedup[j].value - target).norm() <= tight.max(1e3 * f64::EPSILON * scale) => {
                used[i] = true;
                used[j] = true;
                let other = dedup[j].value;
                let rep = Complex64::new(
                    (e.value.re + other.re) / 2.0,
                    (e.value.im.abs() + other.im.abs()) / 2.0,
                );
                paired.push(Eigenvalue { value: rep, mult: e.mult });
                paired.push(Eigenvalue { value: rep.conj(), mult: e.mult });
            }
            _ => {
                return Err(Error::Numerical(format!(
                    "eigenvalue {} has no conjugate partner of equal multiplicity",
                    e.value
                )))
            }
        }
    }
    sort_items(&mut paired);
    Ok(Spectrum { items: paired, cluster_tol })
}

/// Jordan block sizes for one eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanProfile {
    pub eigenvalue: Complex64,
    /// Sorted descending.
    pub block_sizes: Vec<usize>,
    /// `rank((M - lambda I)^k)` for `k = 0..=mult`.
    pub rank_sequence: Vec<usize>,
}

impl JordanProfile {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

/// Recovers block sizes from the rank sequence of `(M - lambda I)^k`.
///
/// The eigenvalue is matched against [`spectrum`] at the same tolerance and
/// replaced by its cluster centroid. Numerical rank counts singular values
/// above `tol * (sigma_max(M) + |lambda|)^k`.
pub fn jordan_profile(m: &DMatrix<f64>, eigenvalue: Complex64, tol: f64) -> Result<JordanProfile> {
    let spec = spectrum(m, tol)?;
    let abs_tol = spec.abs_tol();
    let item = spec
        .items()
        .iter()
        .filter(|e| (e.value - eigenvalue).norm() <= abs_tol)
        .min_by(|a, b| (a.value - eigenvalue).norm().total_cmp(&(b.value - eigenvalue).norm()))
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("{eigenvalue} is not an eigenvalue within tolerance {abs_tol:e}")))?;
    let cm = to_complex(m);
    let sigma_max = singular_values(&cm)?.into_iter().fold(0.0, f64::max);
    let base = sigma_max + item.value.norm();
    let n = m.nrows();
    let mut ranks = Vec::with_capacity(item.mult + 2);
    for k in 0..=item.mult + 1 {
        ranks.push(if base == 0.0 && k > 0 { 0 } else { power_rank(&cm, item.value, k, base, tol)? });
    }
    let nullity = n - ranks[item.mult];
    if nullity != item.mult || ranks.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Numerical(format!(
            "rank sequence {:?} inconsistent with algebraic multiplicity {}",
            ranks, item.mult
        )));
    }
    // blocks of size >= k: ranks[k-1] - ranks[k]
    let at_least = |k: usize| ranks[k - 1] - ranks[k];
    let mut blocks = Vec::new();
    for k in (1..=item.mult).rev() {
        let exact = at_least(k) - at_least(k + 1);
        blocks.extend(std::iter::repeat_n(k, exact));
    }
    ranks.truncate(item.mult + 1);
    Ok(JordanProfile { eigenvalue: item.value, block_sizes: blocks, rank_sequence: ranks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuSlot {
    pub mult: usize,
    pub kind: SlotKind,
}

/// Ordered multiplicities `(mu(0), mu(lambda_1), ..., mu(nu_1), mu(conj nu_1), ...)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuVector {
    pub slots: Vec<MuSlot>,
    /// Spectrum is `{0}` only.
    pub nilpotent: bool,
}

impl MuVector {
    pub fn entries(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.mult).collect()
    }
}

/// Canonical ordering: zero first; real eigenvalues by descending
/// multiplicity then ascending value; conjugate pairs (both members listed)
/// by descending multiplicity then ascending real part.
pub fn mu_vector(s: &Spectrum) -> Result<MuVector> {
    let zero = s.zero_multiplicity();
    if zero == 0 {
        return Err(Error::InvalidArgument("mu vector needs 0 in the spectrum".into()));
    }
    let mut reals: Vec<&Eigenvalue> = s.real_items().filter(|e| e.value.re != 0.0).collect();
    reals.sort_by(|a, b| b.mult.cmp(&a.mult).then(a.value.re.total_cmp(&b.value.re)));
    let mut pairs: Vec<&Eigenvalue> = s.pair_items().collect();
    pairs.sort_by(|a, b| {
        b.mult
            .cmp(&a.mult)
            .then(a.value.re.total_cmp(&b.value.re))
            .then(a.value.im.total_cmp(&b.value.im))
    });
    let mut slots = vec![MuSlot { mult: zero, kind: SlotKind::Real }];
    slots.extend(reals.iter().map(|e| MuSlot { mult: e.mult, kind: SlotKind::Real }));
    for p in &pairs {
        slots.push(MuSlot { mult: p.mult, kind: SlotKind::Complex });
        slots.push(MuSlot { mult: p.mult, kind: SlotKind::Complex });
    }
    Ok(MuVector { nilpotent: slots.len() == 1, slots })
}

/// Outcome of matching `S1` against `s * S2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProjectiveMatch {
    /// `S1 = s S2` with `s > 0`; residual relative to `max(1, rho(S1))`.
    Positive { scale: f64, residual: f64 },
    /// Only a negative factor matches.
    NegativeOnly { scale: f64, residual: f64 },
    None { residual: f64 },
}

fn match_residual(s1: &Spectrum, s2: &Spectrum, factor: f64) -> Option<f64> {
    if s1.items.len() != s2.items.len() {
        return None;
    }
    let mut used = vec![false; s2.items.len()];
    let mut worst = 0.0f64;
    for a in &s1.items {
        let best = s2
            .items
            .iter()
            .enumerate()
            .filter(|(j, b)| !used[*j] && b.mult == a.mult)
            .map(|(j, b)| (j, (a.value - b.value * factor).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    Some(worst)
}

/// Finds `s` with `S1 = s S2` as multisets with multiplicity.
///
/// The candidate is the ratio of spectral radii; it is then verified item by
/// item within `tol * max(1, rho(S1))`.
pub fn projective_scale(s1: &Spectrum, s2: &Spectrum, tol: f64) -> Result<ProjectiveMatch> {
    for s in [s1, s2] {
        if s.zero_multiplicity() == 0 {
            return Err(Error::InvalidArgument("projective comparison needs 0 in both spectra".into()));
        }
        if s.is_zero() {
            return Err(Error::InvalidArgument(
                "spectrum is {0}: the operator is nilpotent (affine Osserman)".into(),
            ));
        }
    }
    let (r1, r2) = (s1.spectral_radius(), s2.spectral_radius());
    let ratio = r1 / r2;
    let norm = r1.max(1.0);
    let pos = match_residual(s1, s2, ratio).map(|r| r / norm);
    let neg = match_residual(s1, s2, -ratio).map(|r| r / norm);
    Ok(match (pos, neg) {
        (Some(r), _) if r <= tol => ProjectiveMatch::Positive { scale: ratio, residual: r },
        (_, Some(r)) if r <= tol => ProjectiveMatch::NegativeOnly { scale: -ratio, residual: r },
        (p, n) => ProjectiveMatch::None {
            residual: p.unwrap_or(f64::INFINITY).min(n.unwrap_or(f64::INFINITY)),
        },
    })
}

/// Positive `s` with `S1 = s S2`, if one exists.
pub fn projectively_equal(s1: &Spectrum, s2: &Spectrum, tol: f64) -> Result<Option<f64>> {
    Ok(match projective_scale(s1, s2, tol)? {
        ProjectiveMatch::Positive { scale, .. } => Some(scale),
        _ => None,
    })
}

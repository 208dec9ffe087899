//! Sphere-sampling test for the projective Osserman property, structure
//! classification, and the Adams bound on eigenbundle partitions.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{mu_vector, projective_scale, spectrum, MuVector, ProjectiveMatch, Spectrum};
use crate::structure::{listed_cases, CaseLabel, SlotPattern, StructureSpec};
use crate::tensor::{check_affine_symmetries, reduced_jacobi, CurvatureTensor};

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Sampling parameters for the classifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { n_samples: DEFAULT_SAMPLES, seed: 0, tol: DEFAULT_TOL }
    }
}

/// The `m` basis vectors, the normalized all-ones vector, then `n` seeded
/// Gaussian directions, all of unit length.
pub fn sample_sphere(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(m + 1 + n);
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        out.push(e);
    }
    if m > 0 {
        out.push(vec![1.0 / (m as f64).sqrt(); m]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < m + 1 + n && m > 0 {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OssermanStatus {
    ProjectiveAffineOsserman,
    AffineOsserman,
    Neither,
}

impl OssermanStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OssermanStatus::ProjectiveAffineOsserman => "projective_affine_osserman",
            OssermanStatus::AffineOsserman => "affine_osserman",
            OssermanStatus::Neither => "neither",
        }
    }
}

/// Comparison of one sample against the representative (the first sample).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleScale {
    pub index: usize,
    /// `s` with `Spec(J_rep) = s Spec(J_sample)`, when positive.
    pub scale: Option<f64>,
    pub residual: f64,
    pub negative_scale: bool,
}

#[derive(Clone, Debug)]
pub struct OssermanVerdict {
    pub status: OssermanStatus,
    /// Full Jacobi spectrum at the first sample.
    pub representative: Spectrum,
    pub representative_reduced: Spectrum,
    /// Reduced spectrum divided by its spectral radius.
    pub normalized_reduced: Option<Spectrum>,
    pub mu: Option<MuVector>,
    /// Largest pairwise relative matching residual.
    pub worst_residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// A pair of samples matched only under a negative factor.
    pub negative_scale_flag: bool,
    pub scales: Vec<SampleScale>,
    /// First pair of samples whose spectra failed to match, if any.
    pub mismatch: Option<(usize, usize)>,
}

impl OssermanVerdict {
    pub fn report(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status.as_str(),
            "representative_spectrum": self.representative.to_file(),
            "reduced_spectrum": self.representative_reduced.to_file(),
            "normalized_reduced_spectrum": self.normalized_reduced.as_ref().map(Spectrum::to_file),
            "mu": self.mu.as_ref().map(MuVector::entries),
            "worst_residual": self.worst_residual,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "negative_scale_flag": self.negative_scale_flag,
            "mismatch": self.mismatch,
            "scales": self.scales,
        })
    }
}

fn symmetry_precondition(a: &CurvatureTensor<f64>) -> Result<()> {
    let tol = 1e-10 * a.max_abs().max(1.0);
    let rep = check_affine_symmetries(a, tol);
    if rep.pass {
        Ok(())
    } else {
        Err(Error::NotCurvature { antisymmetry: rep.antisymmetry_defect, bianchi: rep.bianchi_defect })
    }
}

/// Reduced-Jacobi spectra at the given unit vectors.
pub fn sampled_spectra(a: &CurvatureTensor<f64>, samples: &[Vec<f64>], tol: f64) -> Result<Vec<Spectrum>> {
    samples.iter().map(|x| spectrum(&reduced_jacobi(a, x)?, tol)).collect()
}

/// Samples the unit sphere and checks that all Jacobi spectra are positive
/// multiples of one another (or all zero).
pub fn is_projective_affine_osserman(a: &CurvatureTensor<f64>, config: &SampleConfig) -> Result<OssermanVerdict> {
    symmetry_precondition(a)?;
    let m = a.dim();
    if m < 2 {
        return Err(Error::InvalidArgument("classification needs m >= 2".into()));
    }
    let samples = sample_sphere(m, config.n_samples, config.seed);
    let reduced = sampled_spectra(a, &samples, config.tol)?;
    let full: Vec<Spectrum> = reduced.iter().map(Spectrum::with_extra_zero).collect();
    let mut verdict = OssermanVerdict {
        status: OssermanStatus::Neither,
        representative: full[0].clone(),
        representative_reduced: reduced[0].clone(),
        normalized_reduced: None,
        mu: None,
        worst_residual: 0.0,
        samples: samples.len(),
        seed: config.seed,
        tol: config.tol,
        negative_scale_flag: false,
        scales: Vec::new(),
        mismatch: None,
    };

    let zero_count = full.iter().filter(|s| s.is_zero()).count();
    if zero_count == full.len() {
        verdict.status = OssermanStatus::AffineOsserman;
        verdict.mu = Some(mu_vector(&full[0])?);
        return Ok(verdict);
    }
    if zero_count > 0 {
        let z = full.iter().position(Spectrum::is_zero).unwrap();
        let nz = full.iter().position(|s| !s.is_zero()).unwrap();
        verdict.mismatch = Some((z.min(nz), z.max(nz)));
        verdict.worst_residual = f64::INFINITY;
        return Ok(verdict);
    }

    let mut projective = true;
    for i in 0..full.len() {
        for j in i + 1..full.len() {
            let outcome = projective_scale(&full[i], &full[j], config.tol)?;
            let (ok, residual) = match outcome {
                ProjectiveMatch::Positive { residual, .. } => (true, residual),
                ProjectiveMatch::NegativeOnly { residual, .. } => {
                    verdict.negative_scale_flag = true;
                    (false, residual)
                }
                ProjectiveMatch::None { residual } => (false, residual),
            };
            verdict.worst_residual = verdict.worst_residual.max(residual);
            if i == 0 {
                let (scale, negative) = match outcome {
                    ProjectiveMatch::Positive { scale, .. } => (Some(scale), false),
                    ProjectiveMatch::NegativeOnly { .. } => (None, true),
                    ProjectiveMatch::None { .. } => (None, false),
                };
                verdict.scales.push(SampleScale { index: j, scale, residual, negative_scale: negative });
            }
            if !ok && projective {
                projective = false;
                verdict.mismatch = Some((i, j));
            }
        }
    }
    let mu0 = mu_vector(&full[0])?;
    if projective {
        for (i, s) in full.iter().enumerate().skip(1) {
            if mu_vector(s)? != mu0 {
                projective = false;
                verdict.mismatch = Some((0, i));
                break;
            }
        }
    }
    verdict.mu = Some(mu0);
    if projective {
        verdict.status = OssermanStatus::ProjectiveAffineOsserman;
        verdict.normalized_reduced = Some(normalize(&reduced[0]));
    }
    Ok(verdict)
}

/// Divides by the modulus of the largest eigenvalue, keeping the positive
/// scale class of the spectrum.
fn normalize(s: &Spectrum) -> Spectrum {
    let r = s.spectral_radius();
    if r == 0.0 {
        s.clone()
    } else {
        s.scaled(1.0 / r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleKind {
    Real,
    ComplexPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub dim: usize,
    pub kind: BundleKind,
}

/// Eigenbundle dimensions of the reduced Jacobi operator on an `m`-dimensional space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundlePartition {
    pub m: usize,
    pub bundles: Vec<Bundle>,
}

impl BundlePartition {
    pub fn real(m: usize, dims: &[usize]) -> Self {
        BundlePartition { m, bundles: dims.iter().map(|&dim| Bundle { dim, kind: BundleKind::Real }).collect() }
    }

    /// One bundle per real eigenvalue and one per conjugate pair (of dimension `2 mult`).
    pub fn from_reduced_spectrum(m: usize, s: &Spectrum) -> Self {
        let mut bundles: Vec<Bundle> =
            s.real_items().map(|e| Bundle { dim: e.mult, kind: BundleKind::Real }).collect();
        bundles.extend(s.pair_items().map(|e| Bundle { dim: 2 * e.mult, kind: BundleKind::ComplexPair }));
        BundlePartition { m, bundles }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("partition needs m >= 1".into()));
        }
        if let Some(b) = self.bundles.iter().find(|b| b.dim == 0) {
            return Err(Error::InvalidArgument(format!("bundle of dimension 0 ({:?})", b.kind)));
        }
        if let Some(b) = self.bundles.iter().find(|b| b.kind == BundleKind::ComplexPair && b.dim % 2 == 1) {
            return Err(Error::InvalidArgument(format!("complex-pair bundle of odd dimension {}", b.dim)));
        }
        let total: usize = self.bundles.iter().map(|b| b.dim).sum();
        if total != self.m - 1 {
            return Err(Error::InvalidArgument(format!(
                "bundle dimensions sum to {total}, expected m - 1 = {}",
                self.m - 1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum AdamsVerdict {
    Admissible,
    Inadmissible(String),
    Unconstrained,
}

/// Bound on the number of eigenbundles and the largest bundle by the residue of `m`.
pub fn adams_admissible(m: usize, partition: &BundlePartition) -> Result<AdamsVerdict> {
    if partition.m != m {
        return Err(Error::DimensionMismatch { expected: m, got: partition.m });
    }
    partition.validate()?;
    let count = partition.bundles.len();
    let largest = partition.bundles.iter().map(|b| b.dim).max().unwrap_or(0);
    let (max_count, min_largest) = if m % 2 == 1 {
        (1, m - 1)
    } else if m % 4 == 2 {
        (2, m - 2)
    } else if m % 8 == 4 {
        (4, m - 4)
    } else {
        return Ok(AdamsVerdict::Unconstrained);
    };
    if count > max_count {
        return Ok(AdamsVerdict::Inadmissible(format!(
            "{count} eigenbundles exceed the bound {max_count} for m = {m}"
        )));
    }
    if largest < min_largest {
        return Ok(AdamsVerdict::Inadmissible(format!(
            "largest eigenbundle has dimension {largest} < {min_largest} for m = {m}"
        )));
    }
    Ok(AdamsVerdict::Admissible)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StructureMatch {
    Case(StructureSpec),
    Unlisted,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: OssermanVerdict,
    pub structure: StructureMatch,
    pub partition: BundlePartition,
    pub adams: AdamsVerdict,
}

/// Fits the representative reduced spectrum to a listed eigenvalue pattern.
///
/// Labels are tried in listing order; the first whose multiplicity multisets
/// agree wins. Eigenvalues are assigned to slots by multiplicity, ascending
/// among slots of equal multiplicity.
pub fn match_structure(m: usize, reduced: &Spectrum) -> Option<StructureSpec> {
    let reals: Vec<(f64, usize)> = reduced.real_items().map(|e| (e.value.re, e.mult)).collect();
    let pairs: Vec<(Complex64, usize)> = reduced.pair_items().map(|e| (e.value, e.mult)).collect();
    let observed = SlotPattern {
        real: reals.iter().map(|r| r.1 as i64).collect(),
        pairs: pairs.iter().map(|p| p.1 as i64).collect(),
    };
    for case in listed_cases(m) {
        let pattern = case.pattern(m);
        if !pattern.same_shape(&observed) {
            continue;
        }
        let lambda = assign(&pattern.real, reals.clone(), |a, b| a.total_cmp(b));
        let nu = assign(&pattern.pairs, pairs.clone(), |a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        return Some(StructureSpec::new(case, m, lambda, nu));
    }
    None
}

fn assign<T: Copy>(slots: &[i64], mut values: Vec<(T, usize)>, cmp: impl Fn(&T, &T) -> std::cmp::Ordering) -> Vec<T> {
    values.sort_by(|a, b| cmp(&a.0, &b.0));
    slots
        .iter()
        .map(|&k| {
            let pos = values.iter().position(|v| v.1 as i64 == k).expect("shape already matched");
            values.remove(pos).0
        })
        .collect()
}

/// Classifies a projective model against the listed eigenvalue structures.
pub fn classify_structure(a: &CurvatureTensor<f64>, config: &SampleConfig) -> Result<Classification> {
    let verdict = is_projective_affine_osserman(a, config)?;
    if verdict.status != OssermanStatus::ProjectiveAffineOsserman {
        return Err(Error::InvalidArgument(format!(
            "structure classification needs a projective model, verdict is {}",
            verdict.status.as_str()
        )));
    }
    let m = a.dim();
    let reduced = &verdict.representative_reduced;
    if m % 2 == 1 && reduced.pair_items().next().is_some() {
        return Err(Error::Inconsistency(format!(
            "complex eigenvalue detected in odd dimension m = {m}"
        )));
    }
    let partition = BundlePartition::from_reduced_spectrum(m, reduced);
    let adams = adams_admissible(m, &partition)?;
    if let AdamsVerdict::Inadmissible(reason) = &adams {
        return Err(Error::Inconsistency(format!("eigenbundle partition violates the Adams bound: {reason}")));
    }
    let structure = match match_structure(m, reduced) {
        Some(s) => StructureMatch::Case(s),
        None => StructureMatch::Unlisted,
    };
    Ok(Classification { verdict, structure, partition, adams })
}

impl Classification {
    pub fn case(&self) -> Option<CaseLabel> {
        match &self.structure {
            StructureMatch::Case(s) => Some(s.case),
            StructureMatch::Unlisted => None,
        }
    }

    /// Multiplicities of the matched structure in slot order.
    pub fn slot_mu(&self) -> Option<Vec<usize>> {
        match &self.structure {
            StructureMatch::Case(s) => Some(s.slot_mu()),
            StructureMatch::Unlisted => None,
        }
    }

    pub fn report(&self) -> serde_json::Value {
        let mut v = self.verdict.report();
        v["slot_mu"] = serde_json::to_value(self.slot_mu()).expect("serializable");
        v["structure"] = match &self.structure {
            StructureMatch::Case(s) => serde_json::to_value(s.to_file()).expect("serializable"),
            StructureMatch::Unlisted => serde_json::Value::String("unlisted".into()),
        };
        v["partition"] = serde_json::to_value(&self.partition).expect("serializable");
        v["adams"] = serde_json::to_value(&self.adams).expect("serializable");
        v
    }
}

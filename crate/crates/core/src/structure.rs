//! Eigenvalue-structure labels for projective models and their explicit
//! realizations.
//!
//! A [`StructureSpec`] names one of the admissible reduced-Jacobi eigenvalue
//! patterns together with its eigenvalue parameters. [`realize`] builds a
//! curvature tensor whose unit Jacobi operators have exactly that spectrum.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constructors::{
    a0, build_complex_family, build_quaternionic_family, standard_complex_structure, standard_quaternion_structure,
    QuaternionicCoefficients,
};
use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, Scalar};
use crate::spectral::{mu_vector, Eigenvalue, MuVector, Spectrum};
use crate::tensor::CurvatureTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    One,
    TwoA,
    TwoB,
    TwoC,
    ThreeA,
    ThreeBI,
    ThreeBII,
    ThreeBIII,
    ThreeCI,
    ThreeCII,
    ThreeD,
    ThreeEI,
    ThreeEII,
    ThreeEIII,
    ThreeFI,
    ThreeFII,
    ThreeG,
    ThreeH,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 18] = [
        CaseLabel::One,
        CaseLabel::TwoA,
        CaseLabel::TwoB,
        CaseLabel::TwoC,
        CaseLabel::ThreeA,
        CaseLabel::ThreeBI,
        CaseLabel::ThreeBII,
        CaseLabel::ThreeBIII,
        CaseLabel::ThreeCI,
        CaseLabel::ThreeCII,
        CaseLabel::ThreeD,
        CaseLabel::ThreeEI,
        CaseLabel::ThreeEII,
        CaseLabel::ThreeEIII,
        CaseLabel::ThreeFI,
        CaseLabel::ThreeFII,
        CaseLabel::ThreeG,
        CaseLabel::ThreeH,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::One => "1",
            CaseLabel::TwoA => "2-a",
            CaseLabel::TwoB => "2-b",
            CaseLabel::TwoC => "2-c",
            CaseLabel::ThreeA => "3-a",
            CaseLabel::ThreeBI => "3-b-i",
            CaseLabel::ThreeBII => "3-b-ii",
            CaseLabel::ThreeBIII => "3-b-iii",
            CaseLabel::ThreeCI => "3-c-i",
            CaseLabel::ThreeCII => "3-c-ii",
            CaseLabel::ThreeD => "3-d",
            CaseLabel::ThreeEI => "3-e-i",
            CaseLabel::ThreeEII => "3-e-ii",
            CaseLabel::ThreeEIII => "3-e-iii",
            CaseLabel::ThreeFI => "3-f-i",
            CaseLabel::ThreeFII => "3-f-ii",
            CaseLabel::ThreeG => "3-g",
            CaseLabel::ThreeH => "3-h",
        }
    }

    /// 1, 2 or 3: which residue class of `m` the label belongs to.
    pub fn family(self) -> u8 {
        match self {
            CaseLabel::One => 1,
            CaseLabel::TwoA | CaseLabel::TwoB | CaseLabel::TwoC => 2,
            _ => 3,
        }
    }

    /// Whether `m` lies in the residue class served by this label's construction.
    pub fn dimension_compatible(self, m: usize) -> bool {
        match self.family() {
            1 => m % 2 == 1,
            2 => m % 4 == 2,
            _ => m.is_multiple_of(4),
        }
    }

    /// Multiplicities of the real and complex-pair slots, in parameter order.
    /// Values may be nonpositive when `m` is too small for the label.
    pub fn pattern(self, m: usize) -> SlotPattern {
        let m = m as i64;
        let (real, pairs): (Vec<i64>, Vec<i64>) = match self {
            CaseLabel::One | CaseLabel::TwoA | CaseLabel::ThreeA => (vec![m - 1], vec![]),
            CaseLabel::TwoB | CaseLabel::ThreeBI => (vec![1, m - 2], vec![]),
            CaseLabel::TwoC => (vec![1], vec![(m - 2) / 2]),
            CaseLabel::ThreeBII => (vec![2, m - 3], vec![]),
            CaseLabel::ThreeBIII => (vec![3, m - 4], vec![]),
            CaseLabel::ThreeCI => (vec![1, 1, m - 3], vec![]),
            CaseLabel::ThreeCII => (vec![1, 2, m - 4], vec![]),
            CaseLabel::ThreeD => (vec![1, 1, 1, m - 4], vec![]),
            CaseLabel::ThreeEI => (vec![1], vec![(m - 2) / 2]),
            CaseLabel::ThreeEII => (vec![3], vec![(m - 4) / 2]),
            CaseLabel::ThreeEIII => (vec![m - 3], vec![1]),
            CaseLabel::ThreeFI => (vec![1, 2], vec![(m - 4) / 2]),
            CaseLabel::ThreeFII => (vec![1, m - 4], vec![1]),
            CaseLabel::ThreeG => (vec![1, 1, 1], vec![(m - 4) / 2]),
            CaseLabel::ThreeH => (vec![1], vec![1, (m - 4) / 2]),
        };
        SlotPattern { real, pairs }
    }

    /// The scaled constant-curvature labels require a nonzero eigenvalue.
    fn requires_nonzero(self) -> bool {
        matches!(self, CaseLabel::One | CaseLabel::TwoA | CaseLabel::ThreeA)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.as_str() == t)
            .ok_or_else(|| Error::InvalidStructure(format!("unknown case label '{s}'")))
    }
}

impl Serialize for CaseLabel {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CaseLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Slot multiplicities of a label at a given dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotPattern {
    pub real: Vec<i64>,
    pub pairs: Vec<i64>,
}

impl SlotPattern {
    pub fn is_feasible(&self) -> bool {
        self.real.iter().chain(&self.pairs).all(|&v| v >= 1)
    }

    fn sorted(&self) -> (Vec<i64>, Vec<i64>) {
        let mut r = self.real.clone();
        let mut p = self.pairs.clone();
        r.sort_unstable();
        p.sort_unstable();
        (r, p)
    }

    /// Same multisets of real and pair multiplicities.
    pub fn same_shape(&self, other: &SlotPattern) -> bool {
        self.sorted() == other.sorted()
    }
}

/// A case label with eigenvalue parameters: `lambda` real, `nu` complex with `Im > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureSpec {
    pub case: CaseLabel,
    pub m: usize,
    pub lambda: Vec<f64>,
    pub nu: Vec<Complex64>,
}

/// `{"case": "3-g", "m": 12, "lambda": [..], "nu": [[re, im], ..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSpecFile {
    pub case: CaseLabel,
    pub m: usize,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub nu: Vec<[f64; 2]>,
}

impl StructureSpec {
    pub fn new(case: CaseLabel, m: usize, lambda: Vec<f64>, nu: Vec<Complex64>) -> Self {
        StructureSpec { case, m, lambda, nu }
    }

    pub fn to_file(&self) -> StructureSpecFile {
        StructureSpecFile {
            case: self.case,
            m: self.m,
            lambda: self.lambda.clone(),
            nu: self.nu.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_file(f: &StructureSpecFile) -> Self {
        StructureSpec {
            case: f.case,
            m: f.m,
            lambda: f.lambda.clone(),
            nu: f.nu.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("structure spec serializes")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        Ok(StructureSpec::from_file(&serde_json::from_str(src)?))
    }

    pub fn pattern(&self) -> SlotPattern {
        self.case.pattern(self.m)
    }

    /// Checks residue class, parameter counts, multiplicities and distinctness.
    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        if !self.case.dimension_compatible(m) {
            let need = match self.case.family() {
                1 => "m odd",
                2 => "m = 2 mod 4",
                _ => "m = 0 mod 4",
            };
            return Err(Error::InvalidStructure(format!("case {} needs {need}, got m = {m}", self.case)));
        }
        let pattern = self.pattern();
        if self.lambda.len() != pattern.real.len() || self.nu.len() != pattern.pairs.len() {
            return Err(Error::InvalidStructure(format!(
                "case {} takes {} real and {} complex parameters, got {} and {}",
                self.case,
                pattern.real.len(),
                pattern.pairs.len(),
                self.lambda.len(),
                self.nu.len()
            )));
        }
        for (slot, &mult) in pattern.real.iter().enumerate() {
            if mult < 1 {
                return Err(Error::InvalidStructure(format!(
                    "case {} at m = {m}: multiplicity of lambda_{} is {mult}",
                    self.case,
                    slot + 1
                )));
            }
        }
        for (slot, &mult) in pattern.pairs.iter().enumerate() {
            if mult < 1 {
                return Err(Error::InvalidStructure(format!(
                    "case {} at m = {m}: multiplicity of nu_{} is {mult}",
                    self.case,
                    slot + 1
                )));
            }
        }
        if self.lambda.iter().any(|v| !v.is_finite()) || self.nu.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidStructure("eigenvalue parameters must be finite".into()));
        }
        if let Some(z) = self.nu.iter().find(|z| !(z.im > 0.0)) {
            return Err(Error::InvalidStructure(format!("complex parameter {z} must have Im > 0")));
        }
        for (i, a) in self.lambda.iter().enumerate() {
            if self.lambda[i + 1..].contains(a) {
                return Err(Error::InvalidStructure(format!("real eigenvalue {a} repeated across slots")));
            }
        }
        for (i, a) in self.nu.iter().enumerate() {
            if self.nu[i + 1..].contains(a) {
                return Err(Error::InvalidStructure(format!("complex eigenvalue {a} repeated across slots")));
            }
        }
        if self.case.requires_nonzero() && self.lambda[0] == 0.0 {
            return Err(Error::InvalidStructure(format!("case {} needs a nonzero eigenvalue", self.case)));
        }
        Ok(())
    }

    /// Reduced-Jacobi spectrum at a unit vector implied by the parameters.
    pub fn reduced_spectrum(&self, cluster_tol: f64) -> Result<Spectrum> {
        self.validate()?;
        let p = self.pattern();
        let mut items: Vec<Eigenvalue> = self
            .lambda
            .iter()
            .zip(&p.real)
            .map(|(&v, &k)| Eigenvalue::real(v, k as usize))
            .collect();
        for (z, &k) in self.nu.iter().zip(&p.pairs) {
            items.push(Eigenvalue { value: *z, mult: k as usize });
            items.push(Eigenvalue { value: z.conj(), mult: k as usize });
        }
        Spectrum::from_items(items, cluster_tol)
    }

    /// Full-Jacobi multiplicity vector implied by the parameters.
    pub fn mu_vector(&self) -> Result<MuVector> {
        mu_vector(&self.reduced_spectrum(0.0)?.with_extra_zero())
    }

    /// Full multiplicities in slot order: the kernel direction, the real slots
    /// as listed for the case, then each complex slot twice (value and conjugate).
    pub fn slot_mu(&self) -> Vec<usize> {
        let p = self.pattern();
        let mut out = vec![1];
        out.extend(p.real.iter().map(|&k| k.max(0) as usize));
        for &k in &p.pairs {
            out.extend([k.max(0) as usize; 2]);
        }
        out
    }

    /// Orders parameters that share a multiplicity ascending, so that two
    /// descriptions of the same structure compare equal.
    pub fn canonical(&self) -> StructureSpec {
        let p = self.pattern();
        let mut out = self.clone();
        sort_tied(&mut out.lambda, &p.real, |a, b| a.total_cmp(b));
        sort_tied(&mut out.nu, &p.pairs, |a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    /// Parameters agree with `other` (after canonical ordering) within `tol` relative.
    pub fn approx_eq(&self, other: &StructureSpec, tol: f64) -> bool {
        if self.case != other.case || self.m != other.m {
            return false;
        }
        let (a, b) = (self.canonical(), other.canonical());
        if a.lambda.len() != b.lambda.len() || a.nu.len() != b.nu.len() {
            return false;
        }
        let scale = a
            .lambda
            .iter()
            .map(|v| v.abs())
            .chain(a.nu.iter().map(|z| z.norm()))
            .fold(1.0, f64::max);
        a.lambda.iter().zip(&b.lambda).all(|(x, y)| (x - y).abs() <= tol * scale)
            && a.nu.iter().zip(&b.nu).all(|(x, y)| (x - y).norm() <= tol * scale)
    }
}

fn sort_tied<T: Copy>(values: &mut [T], mults: &[i64], cmp: impl Fn(&T, &T) -> std::cmp::Ordering) {
    let mut distinct: Vec<i64> = mults.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for k in distinct {
        let slots: Vec<usize> = (0..mults.len()).filter(|&i| mults[i] == k).collect();
        let mut vals: Vec<T> = slots.iter().map(|&i| values[i]).collect();
        vals.sort_by(&cmp);
        for (&i, v) in slots.iter().zip(vals) {
            values[i] = v;
        }
    }
}

fn exact<S: Scalar>(x: f64) -> Result<S> {
    let q = rational_from_f64(x).ok_or_else(|| Error::InvalidStructure(format!("parameter {x} is not finite")))?;
    Ok(S::from_rational(&q))
}

/// Builds a model with the requested structure over scalar type `S`.
///
/// Float parameters are converted through their exact binary value, so over
/// rationals the output satisfies the curvature identities exactly.
pub fn realize_as<S: Scalar>(spec: &StructureSpec) -> Result<CurvatureTensor<S>> {
    spec.validate()?;
    let m = spec.m;
    let l = |i: usize| exact::<S>(spec.lambda[i]);
    let re = |i: usize| exact::<S>(spec.nu[i].re);
    let im = |i: usize| exact::<S>(spec.nu[i].im);
    let zero = || S::zero();
    let quaternionic = |c: [S; 4], a1: S, a2: S| -> Result<CurvatureTensor<S>> {
        let q = standard_quaternion_structure::<S>(m)?;
        Ok(build_quaternionic_family(&QuaternionicCoefficients { c, a1, a2 }, &q)?.tensor)
    };
    match spec.case {
        CaseLabel::One | CaseLabel::TwoA | CaseLabel::ThreeA => Ok(a0::<S>(m)?.scaled(&l(0)?)),
        CaseLabel::TwoB | CaseLabel::ThreeBI => {
            build_complex_family(l(0)?, l(1)?, zero(), &standard_complex_structure::<S>(m)?)
        }
        CaseLabel::TwoC => build_complex_family(l(0)?, re(0)?, im(0)?, &standard_complex_structure::<S>(m)?),
        CaseLabel::ThreeBII => quaternionic([l(0)?, l(0)?, l(1)?, l(1)?], zero(), zero()),
        CaseLabel::ThreeBIII => quaternionic([l(0)?, l(0)?, l(0)?, l(1)?], zero(), zero()),
        CaseLabel::ThreeCI => quaternionic([l(0)?, l(1)?, l(2)?, l(2)?], zero(), zero()),
        CaseLabel::ThreeCII => quaternionic([l(0)?, l(1)?, l(1)?, l(2)?], zero(), zero()),
        CaseLabel::ThreeD => quaternionic([l(0)?, l(1)?, l(2)?, l(3)?], zero(), zero()),
        CaseLabel::ThreeEI => quaternionic([l(0)?, re(0)?, re(0)?, re(0)?], im(0)?, zero()),
        CaseLabel::ThreeEII => quaternionic([l(0)?, l(0)?, l(0)?, re(0)?], im(0)?, -im(0)?),
        CaseLabel::ThreeEIII => quaternionic([l(0)?, re(0)?, re(0)?, l(0)?], zero(), im(0)?),
        CaseLabel::ThreeFI => quaternionic([l(0)?, l(1)?, l(1)?, re(0)?], im(0)?, -im(0)?),
        CaseLabel::ThreeFII => quaternionic([l(0)?, re(0)?, re(0)?, l(1)?], zero(), im(0)?),
        CaseLabel::ThreeG => quaternionic([l(0)?, l(1)?, l(2)?, re(0)?], im(0)?, -im(0)?),
        // nu_1 lives on span{J2 X, J3 X}, nu_2 on the quaternionic complement
        CaseLabel::ThreeH => quaternionic([l(0)?, re(0)?, re(0)?, re(1)?], im(1)?, im(0)? - im(1)?),
    }
}

pub fn realize(spec: &StructureSpec) -> Result<CurvatureTensor<f64>> {
    realize_as::<f64>(spec)
}

/// Labels whose construction applies at `m`, with feasible multiplicities.
pub fn feasible_cases(m: usize) -> Vec<CaseLabel> {
    CaseLabel::ALL
        .into_iter()
        .filter(|c| c.dimension_compatible(m) && c.pattern(m).is_feasible())
        .collect()
}

/// Labels listed for the residue class of `m` in the classification; empty for `m = 0 mod 8`.
pub fn listed_cases(m: usize) -> Vec<CaseLabel> {
    if m.is_multiple_of(8) {
        return Vec::new();
    }
    feasible_cases(m)
}

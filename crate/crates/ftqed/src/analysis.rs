//! Sweeps of `D_p = F_p − f_p`, threshold search, placement calibration and
//! error-rate fitting.
//!
//! All comparisons work on exact rational functions. The threshold search
//! looks at the sign of the cross-multiplied difference
//! `G(p) = N_F(p)·B_f(p) − N_f(p)·B_F(p)`, which has the sign of `D_p`
//! wherever both post-selection probabilities are positive.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::parse_circuit;
use crate::noise::poly::rational_from_f64;
use crate::noise::{
    evaluate_exact, CnotRule, ExactResult, IntegerForm, ModeRule, NoiseError, PlacementPolicy, Poly,
    ProbabilityFunction, QubitSelection, RationalPoly, Strategy, MAX_LOCATIONS,
};
use crate::protocols::{
    build_protocol, logical_cnot21, logical_h2, GateRealization, ProtocolError, ProtocolName, ProtocolSpec,
    Registry,
};
use crate::statekit::Pauli;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("degenerate interval [{lo}, {hi}] (need 0 <= lo < hi <= 1)")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("scan step {0} must be positive and smaller than the interval")]
    Step(f64),
    #[error("tolerance {0} must be positive")]
    Tolerance(f64),
    #[error("sweep needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("observed distribution has {got} entries, model has {expected}")]
    ObservedLength { expected: usize, got: usize },
    #[error("observed entry {index} is {value} (must be a nonnegative number)")]
    ObservedEntry { index: usize, value: f64 },
    #[error("observed distribution sums to {0}, not 1")]
    NotNormalizable(f64),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// Exact value of `num/den` at `x`, removing common roots of the two at `x`.
/// `None` at a genuine pole.
fn ratio_limit(num: &RationalPoly, den: &RationalPoly, x: &BigRational) -> Option<BigRational> {
    let (mut n, mut d) = (num.clone(), den.clone());
    loop {
        let dv = d.eval_rational(x);
        if !dv.is_zero() {
            return Some(n.eval_rational(x) / dv);
        }
        if !n.eval_rational(x).is_zero() || d.is_zero() {
            return None;
        }
        n = deflate(&n, x);
        d = deflate(&d, x);
    }
}

/// `q` with `p(t) = (t − x)·q(t)` for a root `x` of `p`.
fn deflate(p: &RationalPoly, x: &BigRational) -> RationalPoly {
    let c = p.coeffs();
    if c.len() <= 1 {
        return Poly::zero();
    }
    let mut q = vec![BigRational::zero(); c.len() - 1];
    let mut carry = BigRational::zero();
    for i in (1..c.len()).rev() {
        carry = &c[i] + &carry * x;
        q[i - 1] = carry.clone();
    }
    Poly::new(q)
}

/// A ratio `N/B` with precomputed integer forms for fast exact evaluation.
#[derive(Debug, Clone)]
struct FastRatio {
    function: ProbabilityFunction,
    num: IntegerForm,
    den: IntegerForm,
}

impl FastRatio {
    fn new(function: ProbabilityFunction) -> Self {
        let num = function.numerator().integer_form();
        let den = function.denominator().integer_form();
        Self { function, num, den }
    }

    fn exact(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            ratio_limit(self.function.numerator(), self.function.denominator(), x)
        } else {
            Some(self.num.eval(x) / d)
        }
    }
}

/// An encoded protocol against its bare counterpart under one error model.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub encoded_name: String,
    pub bare_name: String,
    pub pauli: Pauli,
    encoded: FastRatio,
    bare: FastRatio,
    difference: RationalPoly,
    difference_form: IntegerForm,
}

impl Comparison {
    pub fn new(
        encoded_name: &str,
        bare_name: &str,
        pauli: Pauli,
        encoded: ProbabilityFunction,
        bare: ProbabilityFunction,
    ) -> Self {
        let difference = &(encoded.numerator() * bare.denominator()) - &(bare.numerator() * encoded.denominator());
        let difference_form = difference.integer_form();
        Self {
            encoded_name: encoded_name.to_string(),
            bare_name: bare_name.to_string(),
            pauli,
            encoded: FastRatio::new(encoded),
            bare: FastRatio::new(bare),
            difference,
            difference_form,
        }
    }

    /// `F_p` of the encoded circuit.
    pub fn encoded(&self) -> &ProbabilityFunction {
        &self.encoded.function
    }

    /// `f_p` of the bare circuit.
    pub fn bare(&self) -> &ProbabilityFunction {
        &self.bare.function
    }

    /// `G(p) = N_F·B_f − N_f·B_F`.
    pub fn difference_poly(&self) -> &RationalPoly {
        &self.difference
    }

    /// Exact `(F_p, f_p)`; `None` at a pole.
    pub fn values_exact(&self, p: &BigRational) -> Option<(BigRational, BigRational)> {
        Some((self.encoded.exact(p)?, self.bare.exact(p)?))
    }

    /// Exact `D_p`.
    pub fn d_exact(&self, p: &BigRational) -> Option<BigRational> {
        self.values_exact(p).map(|(f_enc, f_bare)| f_enc - f_bare)
    }

    /// `(F_p, f_p, D_p)`, each computed exactly and rounded once.
    pub fn values(&self, p: f64) -> (f64, f64, f64) {
        match self.values_exact(&rational_from_f64(p)) {
            Some((a, b)) => {
                let d = &a - &b;
                (to_f64(&a), to_f64(&b), to_f64(&d))
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        }
    }

    pub fn d(&self, p: f64) -> f64 {
        self.values(p).2
    }

    fn sign_at(&self, p: &BigRational) -> Ordering {
        self.difference_form.sign_at(p)
    }

    fn abs_d(&self, p: &BigRational) -> f64 {
        self.d_exact(p).map(|d| to_f64(&d.abs())).unwrap_or(f64::INFINITY)
    }
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Builds the comparison for the pair a bundled protocol belongs to.
pub fn compare(name: ProtocolName, pauli: Pauli, registry: &Registry) -> Result<Comparison> {
    let (enc, bare) = name.pair();
    compare_specs(&build_protocol(enc, registry)?, &build_protocol(bare, registry)?, pauli, registry)
}

/// Builds the comparison for any two specs.
pub fn compare_specs(
    encoded: &ProtocolSpec,
    bare: &ProtocolSpec,
    pauli: Pauli,
    registry: &Registry,
) -> Result<Comparison> {
    let run = |spec: &ProtocolSpec| -> Result<ProbabilityFunction> {
        let program = spec.program(pauli, registry)?;
        Ok(evaluate_exact(&program, Strategy::Merged)?.correct)
    };
    Ok(Comparison::new(&encoded.name, &bare.name, pauli, run(encoded)?, run(bare)?))
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub encoded: f64,
    pub bare: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub encoded_name: String,
    pub bare_name: String,
    pub pauli: Pauli,
    pub rows: Vec<SweepRow>,
}

/// Evaluates `F_p`, `f_p` and `D_p` on `steps` evenly spaced points from
/// `p_min` to `p_max` inclusive.
pub fn sweep(cmp: &Comparison, p_min: f64, p_max: f64, steps: usize) -> Result<SweepResult> {
    if !(0.0..1.0).contains(&p_min) || !(p_min < p_max && p_max <= 1.0) {
        return Err(AnalysisError::DegenerateInterval { lo: p_min, hi: p_max });
    }
    if steps < 2 {
        return Err(AnalysisError::TooFewSteps(steps));
    }
    let last = (steps - 1) as f64;
    let rows = (0..steps)
        .into_par_iter()
        .map(|i| {
            let p = if i + 1 == steps { p_max } else { p_min + (p_max - p_min) * (i as f64 / last) };
            let (encoded, bare, d) = cmp.values(p);
            SweepRow { p, encoded, bare, d }
        })
        .collect();
    Ok(SweepResult {
        encoded_name: cmp.encoded_name.clone(),
        bare_name: cmp.bare_name.clone(),
        pauli: cmp.pauli,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Search interval; grid points lie strictly inside it.
    pub lo: f64,
    pub hi: f64,
    /// Scan step of the sign grid.
    pub step: f64,
    /// Bracket width at which bisection stops.
    pub tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.0, step: 1e-3, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdStatus {
    Found,
    None,
    IdenticallyZero,
}

impl ThresholdStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdStatus::Found => "found",
            ThresholdStatus::None => "none",
            ThresholdStatus::IdenticallyZero => "identically-zero",
        }
    }
}

impl fmt::Display for ThresholdStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub status: ThresholdStatus,
    /// Largest sign-change root.
    pub p_star: Option<f64>,
    /// `D` has opposite signs at the two ends.
    pub bracket: Option<(f64, f64)>,
    /// `|D(p*)|`.
    pub residual: Option<f64>,
    /// Remaining sign-change roots, ascending.
    pub other_roots: Vec<f64>,
    /// Largest `D_p` over the scan grid.
    pub max_interior_d: f64,
}

/// Bisection cap; each step halves the bracket.
const MAX_BISECTIONS: usize = 200;
/// Bisection continues past `tol` until `|D| ≤ RESIDUAL_TARGET`.
pub const RESIDUAL_TARGET: f64 = 1e-9;

struct Root {
    p: BigRational,
    bracket: (BigRational, BigRational),
}

fn bisect(cmp: &Comparison, mut lo: BigRational, mut hi: BigRational, lo_sign: Ordering, tol: f64) -> Root {
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..MAX_BISECTIONS {
        let mid = (&lo + &hi) / &two;
        let s = cmp.sign_at(&mid);
        if s == Ordering::Equal {
            return exact_root(cmp, mid, (lo, hi), tol);
        }
        if s == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = to_f64(&(&hi - &lo));
        if width <= tol {
            let p = (&lo + &hi) / &two;
            if cmp.abs_d(&p) <= RESIDUAL_TARGET {
                return Root { p, bracket: (lo, hi) };
            }
        }
    }
    Root { p: (&lo + &hi) / &two, bracket: (lo, hi) }
}

/// A grid or bisection point where `G` vanishes exactly: shrink a symmetric
/// bracket around it while keeping strict opposite signs.
fn exact_root(cmp: &Comparison, p: BigRational, outer: (BigRational, BigRational), tol: f64) -> Root {
    let mut w = rational_from_f64(tol / 2.0);
    for _ in 0..64 {
        let (a, b) = (&p - &w, &p + &w);
        if a > outer.0 && b < outer.1 {
            let (sa, sb) = (cmp.sign_at(&a), cmp.sign_at(&b));
            if sa != Ordering::Equal && sb != Ordering::Equal && sa != sb {
                return Root { p, bracket: (a, b) };
            }
        }
        w /= BigRational::from_integer(BigInt::from(2));
    }
    Root { p, bracket: outer }
}

/// Locates the largest sign change of `D_p` in the interval.
pub fn find_threshold(cmp: &Comparison, opts: ThresholdOptions) -> Result<ThresholdResult> {
    let ThresholdOptions { lo, hi, step, tol } = opts;
    if !(lo >= 0.0 && lo < hi && hi <= 1.0) {
        return Err(AnalysisError::DegenerateInterval { lo, hi });
    }
    if !(step > 0.0 && step < hi - lo) {
        return Err(AnalysisError::Step(step));
    }
    if !(tol > 0.0) {
        return Err(AnalysisError::Tolerance(tol));
    }
    let grid = scan_grid(lo, hi, step);
    let signs: Vec<Ordering> = grid.par_iter().map(|p| cmp.sign_at(p)).collect();
    let max_interior_d = grid
        .par_iter()
        .map(|p| cmp.d_exact(p).map(|d| to_f64(&d)).unwrap_or(f64::NAN))
        .reduce(|| f64::NEG_INFINITY, f64::max);

    if cmp.difference.is_zero() {
        return Ok(ThresholdResult {
            status: ThresholdStatus::IdenticallyZero,
            p_star: None,
            bracket: None,
            residual: None,
            other_roots: Vec::new(),
            max_interior_d,
        });
    }

    // Consecutive nonzero-sign grid points with opposite signs bracket a root;
    // zeros without a sign change across them are touching points.
    let mut brackets = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &s) in signs.iter().enumerate() {
        if s == Ordering::Equal {
            continue;
        }
        if let Some(j) = last {
            if signs[j] != s {
                brackets.push((j, i));
            }
        }
        last = Some(i);
    }
    let mut roots: Vec<Root> = brackets
        .par_iter()
        .map(|&(j, i)| {
            let zeros: Vec<usize> = (j + 1..i).filter(|&k| signs[k] == Ordering::Equal).collect();
            match zeros.as_slice() {
                [k] => exact_root(cmp, grid[*k].clone(), (grid[j].clone(), grid[i].clone()), tol),
                _ => bisect(cmp, grid[j].clone(), grid[i].clone(), signs[j], tol),
            }
        })
        .collect();

    let Some(top) = roots.pop() else {
        return Ok(ThresholdResult {
            status: ThresholdStatus::None,
            p_star: None,
            bracket: None,
            residual: None,
            other_roots: Vec::new(),
            max_interior_d,
        });
    };
    Ok(ThresholdResult {
        status: ThresholdStatus::Found,
        p_star: Some(to_f64(&top.p)),
        bracket: Some((to_f64(&top.bracket.0), to_f64(&top.bracket.1))),
        residual: Some(cmp.abs_d(&top.p)),
        other_roots: roots.iter().map(|r| to_f64(&r.p)).collect(),
        max_interior_d,
    })
}

/// Exact grid `lo + i·step` strictly inside `(lo, hi)`.
fn scan_grid(lo: f64, hi: f64, step: f64) -> Vec<BigRational> {
    let (lo_r, hi_r) = (decimal(lo), decimal(hi));
    let step_r = decimal(step);
    let mut out = Vec::new();
    let mut x = &lo_r + &step_r;
    while x < hi_r {
        out.push(x.clone());
        x = &x + &step_r;
    }
    out
}

/// The shortest decimal that round-trips to `x`, as an exact rational, so
/// that `0.001` means `1/1000` rather than its binary neighbour.
fn decimal(x: f64) -> BigRational {
    let s = format!("{x:e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    }
}

// ---------------------------------------------------------------------------
// Placement calibration

/// Published thresholds the placement is calibrated against (X errors).
pub const TARGET_PREP: f64 = 0.986;
pub const TARGET_H2: f64 = 0.978;
pub const TARGET_CNOT21_H2: f64 = 0.968;
/// Out-of-sample Y-error threshold for h2.
pub const TARGET_H2_Y: f64 = 0.983;
/// Acceptance half-width around each target.
pub const TARGET_WINDOW: f64 = 0.003;

/// Realization of the logical H on qubit 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum H2Variant {
    /// The physical CNOT/H/CNOT sequence, noisy gate by gate.
    GateSequence,
    /// A single mode unitary with one location per qubit afterwards.
    ModePerQubit,
    /// A single mode unitary with no locations.
    ModeSilent,
}

/// Locations after the logical CNOT 2→1 mode unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cnot21Variant {
    /// Qubits 2 and 4, the support of the target's X̄.
    TargetSupport,
    PerQubit,
    Silent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub init: bool,
    pub prep_both: bool,
    pub prep_tail: bool,
    pub h2: H2Variant,
    pub cnot21: Cnot21Variant,
    /// `None` means all four qubits.
    pub measurement: Option<Vec<usize>>,
}

const H2_SEQUENCE: &str = "gate cnot 4 2\ngate cnot 2 1\ngate h 2\ngate cnot 2 1\ngate cnot 4 2\n";
const H2_MODE: &str = "gate mode-unitary Hbar2\n";

impl Candidate {
    /// The placement the bundled encoded protocols use.
    pub fn bundled() -> Self {
        Self {
            init: false,
            prep_both: true,
            prep_tail: true,
            h2: H2Variant::GateSequence,
            cnot21: Cnot21Variant::TargetSupport,
            measurement: None,
        }
    }

    /// Every combination of the documented variants.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::new();
        for init in [false, true] {
            for prep_both in [false, true] {
                for prep_tail in [false, true] {
                    for h2 in [H2Variant::GateSequence, H2Variant::ModePerQubit, H2Variant::ModeSilent] {
                        for cnot21 in [Cnot21Variant::TargetSupport, Cnot21Variant::PerQubit, Cnot21Variant::Silent] {
                            for measurement in [None, Some(vec![0, 1])] {
                                out.push(Self { init, prep_both, prep_tail, h2, cnot21, measurement });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn policy(&self) -> PlacementPolicy {
        PlacementPolicy {
            init: self.init,
            prep_cnot: if self.prep_both { CnotRule::Both } else { CnotRule::TargetOnly },
            prep_tail: self.prep_tail,
            evolution_cnot: CnotRule::TargetOnly,
            mode: ModeRule::Realization,
            measurement: match &self.measurement {
                None => QubitSelection::All,
                Some(qs) => QubitSelection::Only(qs.clone()),
            },
        }
    }

    /// Registry whose mode unitaries carry this candidate's location sets.
    pub fn registry(&self) -> Registry {
        let mut r = Registry::bundled();
        let h2_locs = match self.h2 {
            H2Variant::ModeSilent => vec![],
            _ => vec![0, 1, 2, 3],
        };
        let cnot_locs = match self.cnot21 {
            Cnot21Variant::TargetSupport => vec![1, 3],
            Cnot21Variant::PerQubit => vec![0, 1, 2, 3],
            Cnot21Variant::Silent => vec![],
        };
        r.register_realization(GateRealization::from_logical("Hbar2", logical_h2(), h2_locs))
            .expect("bundled logical H");
        r.register_realization(GateRealization::from_logical("CNOTbar21", logical_cnot21(), cnot_locs))
            .expect("bundled logical CNOT");
        r
    }

    /// Encoded protocol under this candidate.
    pub fn spec(&self, name: ProtocolName, registry: &Registry) -> Result<ProtocolSpec> {
        let source = name.source();
        let source = match self.h2 {
            H2Variant::GateSequence => source.to_string(),
            _ => source.replace(H2_SEQUENCE, H2_MODE),
        };
        let document = parse_circuit(&source).map_err(ProtocolError::from)?;
        Ok(ProtocolSpec::from_document(name.as_str(), document, self.policy(), registry)?)
    }

    /// Part of the candidate that affects `name`; used to share work.
    fn key(&self, name: ProtocolName) -> Candidate {
        let mut k = self.clone();
        if name == ProtocolName::Prep {
            k.h2 = H2Variant::GateSequence;
        }
        if name != ProtocolName::Cnot21H2 {
            k.cnot21 = Cnot21Variant::TargetSupport;
        }
        k
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        let h2 = match self.h2 {
            H2Variant::GateSequence => "gates",
            H2Variant::ModePerQubit => "mode-all",
            H2Variant::ModeSilent => "mode-none",
        };
        let cnot = match self.cnot21 {
            Cnot21Variant::TargetSupport => "support",
            Cnot21Variant::PerQubit => "all",
            Cnot21Variant::Silent => "none",
        };
        let meas = match &self.measurement {
            None => "all".to_string(),
            Some(qs) => qs.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join("+"),
        };
        write!(
            f,
            "init={} prep-cnot={} tail={} h2={} cnot21={} meas={}",
            yn(self.init),
            if self.prep_both { "both" } else { "target" },
            yn(self.prep_tail),
            h2,
            cnot,
            meas
        )
    }
}

/// Threshold of one encoded protocol under one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub locations: usize,
    /// `None` when the program exceeds the enumeration bound.
    pub threshold: Option<ThresholdResult>,
}

impl Evaluation {
    pub fn p_star(&self) -> Option<f64> {
        self.threshold.as_ref().and_then(|t| t.p_star)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub candidate: Candidate,
    /// prep, h2, cnot21-h2 against the bundled bare circuits (X errors).
    pub evaluations: [Evaluation; 3],
    /// prep against the alternative four-location bare preparation.
    pub prep_four_location_bare: Option<f64>,
    /// Largest `|p* − target|`; infinite when a threshold is missing.
    pub max_deviation: f64,
    pub matches: bool,
}

impl CandidateRow {
    pub fn total_locations(&self) -> usize {
        self.evaluations.iter().map(|e| e.locations).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Holdout {
    /// h2 under Y errors.
    pub y_h2: ThresholdResult,
    /// h2 under Z errors.
    pub z_h2: ThresholdResult,
    pub y_matches: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub rows: Vec<CandidateRow>,
    /// Index of the selected row, if any candidate matches.
    pub selected: Option<usize>,
    /// Index of the row with the smallest deviation (equal to `selected` when matched).
    pub nearest: usize,
    pub holdout: Option<Holdout>,
    /// The selected candidate equals [`Candidate::bundled`].
    pub selected_is_bundled: bool,
    /// Whether any candidate meets the prep target against the four-location bare preparation.
    pub four_location_bare_prep_feasible: bool,
}

impl CalibrationReport {
    pub fn selected_row(&self) -> Option<&CandidateRow> {
        self.selected.map(|i| &self.rows[i])
    }
}

/// Bare preparation with locations at preparation and measurement of both qubits.
const FOUR_LOCATION_BARE_PREP: &str = "qubits 2\nnoise auto\nstage prep\nstage measurement\nmeasure ideal bare-00\n";

const ENCODED: [ProtocolName; 3] = [ProtocolName::Prep, ProtocolName::H2, ProtocolName::Cnot21H2];
const TARGETS: [f64; 3] = [TARGET_PREP, TARGET_H2, TARGET_CNOT21_H2];

fn bare_functions(pauli: Pauli) -> Result<(BTreeMap<ProtocolName, ProbabilityFunction>, ProbabilityFunction)> {
    let registry = Registry::bundled();
    let mut bare = BTreeMap::new();
    for name in ENCODED {
        let spec = build_protocol(name.pair().1, &registry)?;
        let program = spec.program(pauli, &registry)?;
        bare.insert(name, evaluate_exact(&program, Strategy::Merged)?.correct);
    }
    let doc = parse_circuit(FOUR_LOCATION_BARE_PREP).map_err(ProtocolError::from)?;
    let spec = ProtocolSpec::from_document("bare-prep-4", doc, PlacementPolicy::standard(), &registry)?;
    let four = evaluate_exact(&spec.program(pauli, &registry)?, Strategy::Merged)?.correct;
    Ok((bare, four))
}

struct KeyOutcome {
    locations: usize,
    encoded: Option<ProbabilityFunction>,
}

fn evaluate_key(name: ProtocolName, candidate: &Candidate, pauli: Pauli) -> Result<KeyOutcome> {
    let registry = candidate.registry();
    let spec = candidate.spec(name, &registry)?;
    let program = spec.program(pauli, &registry)?;
    let locations = program.n_locations();
    if locations > MAX_LOCATIONS {
        return Ok(KeyOutcome { locations, encoded: None });
    }
    Ok(KeyOutcome { locations, encoded: Some(evaluate_exact(&program, Strategy::Merged)?.correct) })
}

/// Thresholds of `name` under `candidate` and any Pauli; the encoded
/// protocol is compared with its bundled bare counterpart.
pub fn candidate_threshold(name: ProtocolName, candidate: &Candidate, pauli: Pauli) -> Result<Evaluation> {
    let (bare, _) = bare_functions(pauli)?;
    let outcome = evaluate_key(name, candidate, pauli)?;
    let threshold = match outcome.encoded {
        Some(f) => {
            let cmp = Comparison::new(name.as_str(), name.pair().1.as_str(), pauli, f, bare[&name].clone());
            Some(find_threshold(&cmp, ThresholdOptions::default())?)
        }
        None => None,
    };
    Ok(Evaluation { locations: outcome.locations, threshold })
}

/// Evaluates every candidate against the X-error targets, selects the
/// matching candidate with the smallest worst-case deviation (then fewest
/// locations), and checks the selection on the Y/Z holdout.
pub fn calibrate_placement(candidates: &[Candidate]) -> Result<CalibrationReport> {
    let pauli = Pauli::X;
    let (bare, four) = bare_functions(pauli)?;

    let mut keys: BTreeMap<(ProtocolName, Candidate), ()> = BTreeMap::new();
    for c in candidates {
        for name in ENCODED {
            keys.insert((name, c.key(name)), ());
        }
    }
    let keys: Vec<(ProtocolName, Candidate)> = keys.into_keys().collect();
    type Outcome = (usize, Option<ThresholdResult>, Option<ThresholdResult>);
    let outcomes: Vec<Result<Outcome>> = keys
        .par_iter()
        .map(|(name, cand)| {
            let out = evaluate_key(*name, cand, pauli)?;
            let Some(f) = out.encoded else {
                return Ok((out.locations, None, None));
            };
            let bare_name = name.pair().1.as_str();
            let cmp = Comparison::new(name.as_str(), bare_name, pauli, f.clone(), bare[name].clone());
            let main = find_threshold(&cmp, ThresholdOptions::default())?;
            let alt = if *name == ProtocolName::Prep {
                let cmp4 = Comparison::new(name.as_str(), "bare-prep-4", pauli, f, four.clone());
                Some(find_threshold(&cmp4, ThresholdOptions::default())?)
            } else {
                None
            };
            Ok((out.locations, Some(main), alt))
        })
        .collect();
    let mut table = BTreeMap::new();
    for (key, outcome) in keys.into_iter().zip(outcomes) {
        table.insert(key, outcome?);
    }

    let rows: Vec<CandidateRow> = candidates
        .iter()
        .map(|c| {
            let evaluations = ENCODED.map(|name| {
                let (locations, threshold, _) = table[&(name, c.key(name))].clone();
                Evaluation { locations, threshold }
            });
            let prep_four_location_bare =
                table[&(ProtocolName::Prep, c.key(ProtocolName::Prep))].2.as_ref().and_then(|t| t.p_star);
            let max_deviation = evaluations
                .iter()
                .zip(TARGETS)
                .map(|(e, t)| e.p_star().map(|p| (p - t).abs()).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            CandidateRow {
                candidate: c.clone(),
                evaluations,
                prep_four_location_bare,
                max_deviation,
                matches: max_deviation <= TARGET_WINDOW,
            }
        })
        .collect();

    let order = |a: &usize, b: &usize| {
        let (ra, rb): (&CandidateRow, &CandidateRow) = (&rows[*a], &rows[*b]);
        ra.max_deviation
            .total_cmp(&rb.max_deviation)
            .then(ra.total_locations().cmp(&rb.total_locations()))
            .then(a.cmp(b))
    };
    let nearest = (0..rows.len()).min_by(order).unwrap_or(0);
    let selected = (0..rows.len()).filter(|&i| rows[i].matches).min_by(order);

    let holdout = match selected {
        Some(i) => {
            let c = &rows[i].candidate;
            let y_h2 = candidate_threshold(ProtocolName::H2, c, Pauli::Y)?.threshold;
            let z_h2 = candidate_threshold(ProtocolName::H2, c, Pauli::Z)?.threshold;
            match (y_h2, z_h2) {
                (Some(y_h2), Some(z_h2)) => {
                    let y_matches = y_h2.p_star.is_some_and(|p| (p - TARGET_H2_Y).abs() <= TARGET_WINDOW);
                    Some(Holdout { y_h2, z_h2, y_matches })
                }
                _ => None,
            }
        }
        None => None,
    };
    let selected_is_bundled = selected.is_some_and(|i| rows[i].candidate == Candidate::bundled());
    let four_location_bare_prep_feasible = rows
        .iter()
        .any(|r| r.prep_four_location_bare.is_some_and(|p| (p - TARGET_PREP).abs() <= TARGET_WINDOW));
    Ok(CalibrationReport { rows, selected, nearest, holdout, selected_is_bundled, four_location_bare_prep_feasible })
}

// ---------------------------------------------------------------------------
// Error-rate fitting

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitObjective {
    /// Squared distance between distributions.
    #[default]
    LeastSquares,
    /// Multinomial negative log-likelihood (cross-entropy).
    Likelihood,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub p_hat: f64,
    /// Euclidean distance between model and observed distributions at `p_hat`.
    pub residual: f64,
}

/// Golden-section search stops at this bracket width.
pub const FIT_TOLERANCE: f64 = 1e-7;
const COARSE_STEPS: usize = 100;

/// Fits `p` so the model's mode distribution matches `observed`.
pub fn fit_error_rate(observed: &[f64], model: &ExactResult, objective: FitObjective) -> Result<FitResult> {
    if observed.len() != model.modes.len() {
        return Err(AnalysisError::ObservedLength { expected: model.modes.len(), got: observed.len() });
    }
    for (index, &value) in observed.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(AnalysisError::ObservedEntry { index, value });
        }
    }
    let sum: f64 = observed.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(AnalysisError::NotNormalizable(sum));
    }
    let forms: Vec<IntegerForm> = model.modes.iter().map(|m| m.integer_form()).collect();
    let distribution = |p: f64| -> Vec<f64> { forms.iter().map(|f| f.eval_f64(p)).collect() };
    let cost = |p: f64| -> f64 {
        let m = distribution(p);
        match objective {
            FitObjective::LeastSquares => m.iter().zip(observed).map(|(a, b)| (a - b) * (a - b)).sum(),
            FitObjective::Likelihood => m
                .iter()
                .zip(observed)
                .filter(|(_, &o)| o > 0.0)
                .map(|(&mi, &o)| if mi > 0.0 { -o * mi.ln() } else { f64::INFINITY })
                .sum(),
        }
    };

    let coarse: Vec<f64> = (0..=COARSE_STEPS).map(|i| i as f64 / COARSE_STEPS as f64).collect();
    let costs: Vec<f64> = coarse.par_iter().map(|&p| cost(p)).collect();
    let best = (0..coarse.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap_or(0);
    let a = coarse[best.saturating_sub(1)];
    let b = coarse[(best + 1).min(COARSE_STEPS)];
    let inner = golden_section(&cost, a, b, FIT_TOLERANCE);
    let p_hat = [inner, a, b, coarse[best]]
        .into_iter()
        .min_by(|x, y| cost(*x).total_cmp(&cost(*y)))
        .unwrap_or(inner);
    let residual = distribution(p_hat).iter().zip(observed).map(|(m, o)| (m - o) * (m - o)).sum::<f64>().sqrt();
    Ok(FitResult { p_hat, residual })
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Raw 16-mode distribution of a bundled protocol at `p`.
pub fn mode_distribution(name: ProtocolName, pauli: Pauli, p: f64, registry: &Registry) -> Result<Vec<f64>> {
    let spec = build_protocol(name, registry)?;
    let result = evaluate_exact(&spec.program(pauli, registry)?, Strategy::Merged)?;
    Ok(result.mode_distribution(p))
}

/// Exact engine result of a bundled protocol (for fitting).
pub fn exact_model(name: ProtocolName, pauli: Pauli, registry: &Registry) -> Result<ExactResult> {
    let spec = build_protocol(name, registry)?;
    Ok(evaluate_exact(&spec.program(pauli, registry)?, Strategy::Merged)?)
}

//! Pauli error model, placement policies and the evaluation engines.
//!
//! Every error location applies `ρ → p ρ + (1 − p) E ρ E†` for the model's
//! Pauli `E`. The exact engines enumerate the `2^L` fire/no-fire patterns and
//! return rational polynomials in `p`; the Monte Carlo engine samples them.

mod dense;
mod exact;
mod mc;
pub mod poly;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Item, MeasurementSpec, Op, Stage};
use crate::statekit::{Gate, Matrix, Pauli, PureState, StateError};

pub use dense::{channel_correct_probability, channel_density_matrix};
pub use exact::{
    enumerate_patterns, evaluate_exact, exact_correct_probability, merged_tallies, output_mixture,
    EnumerationOptions, ExactResult, PatternTallies, Strategy, SNAP_BITS,
};
pub use mc::{mc_correct_probability, McEstimate, MC_CHUNK};
pub use poly::{IntegerForm, Poly, RationalPoly};

/// Upper bound on error locations for exhaustive enumeration.
pub const MAX_LOCATIONS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("unknown placement policy `{0}` (expected standard or calibrated)")]
    UnknownPolicy(String),
    #[error("unknown mode unitary `{0}`")]
    UnknownMode(String),
    #[error("{locations} error locations exceed the enumeration bound of {max}")]
    TooManyLocations { locations: usize, max: usize },
    #[error("post-selection probability is identically zero")]
    DenominatorZero,
    #[error("no samples passed post-selection")]
    NoAcceptedSamples,
    #[error("success probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("program acts on {program} qubits but measurement on {measurement}")]
    Dimension { program: usize, measurement: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, NoiseError>;

/// Which qubits of a CNOT receive an error location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CnotRule {
    TargetOnly,
    Both,
}

/// Where mode-unitary gates place their locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeRule {
    /// The location set registered with the realization.
    Realization,
    /// One location on every qubit.
    PerQubit,
    /// No locations.
    Silent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QubitSelection {
    All,
    Only(Vec<usize>),
}

impl QubitSelection {
    fn qubits(&self, n_qubits: usize) -> Vec<usize> {
        match self {
            QubitSelection::All => (0..n_qubits).collect(),
            QubitSelection::Only(qs) => qs.iter().copied().filter(|&q| q < n_qubits).collect(),
        }
    }
}

/// Rules that turn `noise auto` into explicit error locations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlacementPolicy {
    /// One location per qubit at the start of the preparation stage.
    pub init: bool,
    pub prep_cnot: CnotRule,
    /// One location per qubit at the end of the preparation stage.
    pub prep_tail: bool,
    pub evolution_cnot: CnotRule,
    pub mode: ModeRule,
    pub measurement: QubitSelection,
}

impl PlacementPolicy {
    /// One location per qubit at preparation, per single-qubit gate, per CNOT
    /// target and per qubit at measurement.
    pub fn standard() -> Self {
        Self {
            init: true,
            prep_cnot: CnotRule::TargetOnly,
            prep_tail: false,
            evolution_cnot: CnotRule::TargetOnly,
            mode: ModeRule::Realization,
            measurement: QubitSelection::All,
        }
    }

    /// The placement selected by calibration for the encoded protocols:
    /// no initialization locations, both qubits of every encoder CNOT, one
    /// location per qubit once the encoder has finished, target-only CNOTs
    /// afterwards.
    pub fn calibrated() -> Self {
        Self {
            init: false,
            prep_cnot: CnotRule::Both,
            prep_tail: true,
            ..Self::standard()
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Self::standard()),
            "calibrated" => Ok(Self::calibrated()),
            other => Err(NoiseError::UnknownPolicy(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Placement {
    /// Expand `noise auto` with a policy.
    Policy(PlacementPolicy),
    /// Use only the circuit's explicit `error` items.
    Explicit,
}

/// Error type plus placement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErrorModel {
    pub pauli: Pauli,
    pub placement: Placement,
}

impl ErrorModel {
    pub fn new(pauli: Pauli, policy: PlacementPolicy) -> Self {
        Self { pauli, placement: Placement::Policy(policy) }
    }

    pub fn explicit(pauli: Pauli) -> Self {
        Self { pauli, placement: Placement::Explicit }
    }
}

/// Lookup of named mode unitaries and their declared location sets.
pub trait ModeResolver {
    fn mode_unitary(&self, name: &str) -> Option<&Matrix<f64>>;
    fn mode_locations(&self, name: &str) -> Option<&[usize]>;
}

/// A resolver that knows no names.
pub struct NoModes;

impl ModeResolver for NoModes {
    fn mode_unitary(&self, _: &str) -> Option<&Matrix<f64>> {
        None
    }
    fn mode_locations(&self, _: &str) -> Option<&[usize]> {
        None
    }
}

fn gate_locations(
    op: &Op,
    stage: Stage,
    n_qubits: usize,
    policy: &PlacementPolicy,
    modes: &dyn ModeResolver,
) -> Result<Vec<usize>> {
    Ok(match op {
        Op::H(q) | Op::X(q) | Op::Y(q) | Op::Z(q) => vec![*q],
        Op::Cnot { control, target } => {
            let rule = if stage == Stage::Prep { policy.prep_cnot } else { policy.evolution_cnot };
            match rule {
                CnotRule::TargetOnly => vec![*target],
                CnotRule::Both => vec![*control, *target],
            }
        }
        Op::Swap(a, b) => vec![*a, *b],
        Op::ModeUnitary(name) => match policy.mode {
            ModeRule::Realization => modes
                .mode_locations(name)
                .ok_or_else(|| NoiseError::UnknownMode(name.clone()))?
                .to_vec(),
            ModeRule::PerQubit => (0..n_qubits).collect(),
            ModeRule::Silent => Vec::new(),
        },
    })
}

/// Expands `noise auto` into explicit error locations.
///
/// Circuits without `noise auto`, or models with explicit placement, are
/// returned unchanged.
pub fn expand_placement(circuit: &Circuit, model: &ErrorModel, modes: &dyn ModeResolver) -> Result<Circuit> {
    let policy = match (&model.placement, circuit.auto_noise()) {
        (Placement::Policy(p), true) => p,
        _ => {
            let mut c = circuit.clone();
            c.set_auto_noise(false);
            return Ok(c);
        }
    };
    let n = circuit.n_qubits();
    let mut out = Circuit::new(n)?;
    let all: Vec<usize> = (0..n).collect();
    let mut items = circuit.items().iter().peekable();
    if let Some(Item::Barrier(Stage::Prep)) = items.peek() {
        out.stage(Stage::Prep)?;
        items.next();
    }
    if policy.init {
        for &q in &all {
            out.error(q)?;
        }
    }
    let mut stage = Stage::Prep;
    let mut measured = false;
    let leave_prep = |out: &mut Circuit| -> Result<()> {
        if policy.prep_tail {
            for &q in &all {
                out.error(q)?;
            }
        }
        Ok(())
    };
    for item in items {
        match item {
            Item::Barrier(next) => {
                if stage == Stage::Prep && *next > Stage::Prep {
                    leave_prep(&mut out)?;
                }
                out.stage(*next)?;
                if *next == Stage::Measurement && !measured {
                    measured = true;
                    for q in policy.measurement.qubits(n) {
                        out.error(q)?;
                    }
                }
                stage = *next;
            }
            Item::Gate(op) => {
                out.gate(op.clone())?;
                for q in gate_locations(op, stage, n, policy, modes)? {
                    out.error(q)?;
                }
            }
            Item::Error { qubit, .. } => {
                out.error(*qubit)?;
            }
        }
    }
    if stage == Stage::Prep {
        leave_prep(&mut out)?;
    }
    if !measured {
        out.stage(Stage::Measurement)?;
        for q in policy.measurement.qubits(n) {
            out.error(q)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub(crate) enum Step {
    Gate(Gate<f64>),
    Location(usize),
}

/// A circuit lowered to gates and error locations, ready for evaluation.
#[derive(Debug, Clone)]
pub struct Program {
    n_qubits: usize,
    steps: Vec<Step>,
    n_locations: usize,
    pauli: Pauli,
    measurement: MeasurementSpec,
    location_qubits: Vec<usize>,
}

impl Program {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_locations(&self) -> usize {
        self.n_locations
    }

    pub fn pauli(&self) -> Pauli {
        self.pauli
    }

    pub fn measurement(&self) -> &MeasurementSpec {
        &self.measurement
    }

    /// Qubit of every error location, in circuit order.
    pub fn location_qubits(&self) -> &[usize] {
        &self.location_qubits
    }

    /// Output of the circuit with no error firing.
    pub fn noiseless_output(&self) -> PureState<f64> {
        let mut s = PureState::zero(self.n_qubits).expect("validated register");
        for step in &self.steps {
            if let Step::Gate(g) = step {
                s.apply(g).expect("validated gate");
            }
        }
        s
    }

    /// The same program with a different error type.
    pub fn with_pauli(&self, pauli: Pauli) -> Self {
        Self { pauli, ..self.clone() }
    }

    pub(crate) fn steps(&self) -> &[Step] {
        &self.steps
    }
}

/// Lowers a circuit: expands placement, resolves mode unitaries, validates.
pub fn compile(
    circuit: &Circuit,
    measurement: &MeasurementSpec,
    model: &ErrorModel,
    modes: &dyn ModeResolver,
) -> Result<Program> {
    let expanded = expand_placement(circuit, model, modes)?;
    let n = expanded.n_qubits();
    if measurement.ideal.dim() != 1 << n {
        return Err(NoiseError::Dimension {
            program: n,
            measurement: measurement.ideal.dim().trailing_zeros() as usize,
        });
    }
    let mut steps = Vec::new();
    let mut location_qubits = Vec::new();
    for item in expanded.items() {
        match item {
            Item::Barrier(_) => {}
            Item::Error { qubit, .. } => {
                location_qubits.push(*qubit);
                steps.push(Step::Location(*qubit));
            }
            Item::Gate(op) => {
                let gate = match op {
                    Op::H(q) => Gate::h(*q),
                    Op::X(q) => Gate::x(*q),
                    Op::Y(q) => Gate::y(*q),
                    Op::Z(q) => Gate::z(*q),
                    Op::Cnot { control, target } => Gate::cnot(*control, *target),
                    Op::Swap(a, b) => Gate::swap(*a, *b),
                    Op::ModeUnitary(name) => Gate::mode_unitary(
                        modes.mode_unitary(name).ok_or_else(|| NoiseError::UnknownMode(name.clone()))?.clone(),
                    )?,
                };
                // Validates targets and dimension against the register.
                PureState::<f64>::zero(n)?.applied(&gate)?;
                steps.push(Step::Gate(gate));
            }
        }
    }
    Ok(Program {
        n_qubits: n,
        n_locations: location_qubits.len(),
        steps,
        pauli: model.pauli,
        measurement: measurement.clone(),
        location_qubits,
    })
}

/// How trustworthy a [`ProbabilityFunction`]'s coefficients are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exactness {
    /// Coefficients are exact rationals.
    Exact,
    /// Some pattern value was not a dyadic rational; coefficients come from
    /// compensated floating sums with the stated absolute error bound.
    Approximate { max_abs_error: f64 },
}

/// `N(p) / B(p)` with exact rational coefficients.
#[derive(Clone, PartialEq)]
pub struct ProbabilityFunction {
    numerator: RationalPoly,
    denominator: RationalPoly,
    locations: usize,
    exactness: Exactness,
}

impl fmt::Debug for ProbabilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({}) [L={}, {:?}]", self.numerator, self.denominator, self.locations, self.exactness)
    }
}

impl ProbabilityFunction {
    pub fn new(numerator: RationalPoly, denominator: RationalPoly, locations: usize, exactness: Exactness) -> Result<Self> {
        if denominator.is_zero() {
            return Err(NoiseError::DenominatorZero);
        }
        Ok(Self { numerator, denominator, locations, exactness })
    }

    /// A plain polynomial (no post-selection).
    pub fn polynomial(numerator: RationalPoly) -> Self {
        let locations = numerator.degree().unwrap_or(0);
        Self { numerator, denominator: Poly::one(), locations, exactness: Exactness::Exact }
    }

    pub fn numerator(&self) -> &RationalPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &RationalPoly {
        &self.denominator
    }

    pub fn locations(&self) -> usize {
        self.locations
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn is_postselected(&self) -> bool {
        self.denominator != Poly::one()
    }

    pub fn eval_exact(&self, p: &BigRational) -> Option<BigRational> {
        let d = self.denominator.eval_rational(p);
        (!d.is_zero()).then(|| self.numerator.eval_rational(p) / d)
    }

    /// Value at `p`, computed exactly and rounded once. NaN where `B(p) = 0`.
    pub fn eval(&self, p: f64) -> f64 {
        self.eval_exact(&poly::rational_from_f64(p))
            .and_then(|v| v.to_f64())
            .unwrap_or(f64::NAN)
    }
}

impl FromStr for CnotRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "target" => Ok(Self::TargetOnly),
            "both" => Ok(Self::Both),
            _ => Err(format!("unknown CNOT rule `{s}`")),
        }
    }
}

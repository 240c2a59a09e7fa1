//! The [[4,2,2]] codebook, named projectors and mode unitaries, and the six
//! bundled protocols.
//!
//! Logical basis states (logical qubit 1 written first):
//!
//! | logical | physical                    |
//! |---------|-----------------------------|
//! | `|00⟩_l` | `(|0000⟩ + |1111⟩)/√2`      |
//! | `|01⟩_l` | `(|0011⟩ + |1100⟩)/√2`      |
//! | `|10⟩_l` | `(|0101⟩ + |1010⟩)/√2`      |
//! | `|11⟩_l` | `(|0110⟩ + |1001⟩)/√2`      |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::circuit::{
    parse_circuit, CircuitError, Document, Measurement, MeasurementSpec, ParseError, PostSelect,
};
use crate::noise::{compile, ErrorModel, ModeResolver, NoiseError, PlacementPolicy, Program};
use crate::statekit::{is_even_parity, Gate, Matrix, Pauli, Projector, PureState, StateError, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("unknown protocol `{0}` (expected one of prep, h2, cnot21-h2, bare-prep, bare-h2, bare-cnot21-h2)")]
    UnknownProtocol(String),
    #[error("unknown projector `{0}`")]
    UnknownProjector(String),
    #[error("document has no `measure ideal` line")]
    MissingMeasurement,
    #[error("realization `{0}` does not preserve parity")]
    NotParityPreserving(String),
    #[error("realization `{name}` deviates from its logical action by {deviation:.3e}")]
    WrongLogicalAction { name: String, deviation: f64 },
    #[error("realization `{0}` is not a 16-dimensional unitary")]
    NotModeUnitary(String),
    #[error("realization `{name}` names qubit {qubit} outside the register")]
    LocationOutOfRange { name: String, qubit: usize },
    #[error("invalid Pauli string `{0}`")]
    PauliString(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Physical qubits of the code.
pub const CODE_QUBITS: usize = 4;

/// Representative physical ket of each logical basis state `|ab⟩_l`; the
/// other half of the superposition is its bitwise complement.
pub const CODE_WORDS: [usize; 4] = [0b0000, 0b0011, 0b0101, 0b0110];

const COMPLEMENT: usize = 0b1111;

/// A tensor product of single-qubit Paulis, e.g. `IXIX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString(Vec<Option<Pauli>>);

impl FromStr for PauliString {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' | 'i' => Ok(None),
                c => Pauli::from_symbol(c).map(Some).ok_or_else(|| ProtocolError::PauliString(s.into())),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl PauliString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, state: &PureState<f64>) -> Result<PureState<f64>> {
        if self.len() != state.n_qubits() {
            return Err(StateError::Dimension { left: self.len(), right: state.n_qubits() }.into());
        }
        let mut s = state.clone();
        for (q, p) in self.0.iter().enumerate() {
            if let Some(p) = p {
                s.apply(&Gate::pauli(*p, q))?;
            }
        }
        Ok(s)
    }
}

/// Logical basis, code-space projector and logical Pauli table.
#[derive(Debug, Clone)]
pub struct Codebook {
    /// `|00⟩_l, |01⟩_l, |10⟩_l, |11⟩_l`.
    pub states: [PureState<f64>; 4],
    pub even_parity: Projector<f64>,
    /// `(name, operator)`: X̄₁, X̄₂, Z̄₁, Z̄₂.
    pub logical_paulis: Vec<(&'static str, PauliString)>,
}

pub fn build_codebook() -> Codebook {
    let states = CODE_WORDS.map(|w| PureState::uniform(CODE_QUBITS, &[w, w ^ COMPLEMENT]).expect("4 qubits"));
    let op = |s: &str| s.parse().expect("valid Pauli string");
    Codebook {
        states,
        even_parity: Projector::even_parity(CODE_QUBITS).expect("4 qubits"),
        logical_paulis: vec![("X1", op("IXIX")), ("X2", op("IIXX")), ("Z1", op("ZZII")), ("Z2", op("ZIZI"))],
    }
}

impl Codebook {
    /// Encodes a two-qubit state `Σ c_ab |ab⟩` as `Σ c_ab |ab⟩_l`.
    pub fn encode(&self, bare: &PureState<f64>) -> Result<PureState<f64>> {
        if bare.n_qubits() != 2 {
            return Err(StateError::Dimension { left: bare.n_qubits(), right: 2 }.into());
        }
        let terms: Vec<_> = bare.amplitudes().iter().copied().zip(self.states.iter()).collect();
        Ok(PureState::combine(&terms)?)
    }

    /// Matrix elements `⟨i_l|U|j_l⟩` and the largest probability any logical
    /// basis state leaks out of the code space.
    pub fn restrict(&self, unitary: &Matrix<f64>) -> (Matrix<f64>, f64) {
        let mut m = Matrix::zeros(4);
        let mut leak: f64 = 0.0;
        for (j, sj) in self.states.iter().enumerate() {
            let image = unitary.apply(sj.amplitudes());
            let mut kept = 0.0;
            for (i, si) in self.states.iter().enumerate() {
                let z = si.amplitudes().iter().zip(&image).fold(Complex64::zero(), |acc, (a, b)| acc + a.conj() * b);
                m[(i, j)] = z;
                kept += z.norm_sqr();
            }
            leak = leak.max((1.0 - kept).abs());
        }
        (m, leak)
    }
}

/// Extends a logical two-qubit unitary to all 16 modes: the logical matrix
/// on the code space, the same matrix on the sign-flipped even partners
/// `(|x⟩ − |x̄⟩)/√2`, identity on odd parity.
pub fn logical_unitary(logical: &Matrix<f64>) -> Matrix<f64> {
    let mut u = Matrix::identity(16);
    for w in CODE_WORDS {
        u[(w, w)] = Complex64::zero();
        u[(w ^ COMPLEMENT, w ^ COMPLEMENT)] = Complex64::zero();
    }
    for (j, &wj) in CODE_WORDS.iter().enumerate() {
        for (i, &wi) in CODE_WORDS.iter().enumerate() {
            let z = logical[(i, j)];
            // |i_l⟩⟨j_l| + |i_p⟩⟨j_p| = |wi⟩⟨wj| + |w̄i⟩⟨w̄j|: the cross terms cancel.
            u[(wi, wj)] += z;
            u[(wi ^ COMPLEMENT, wj ^ COMPLEMENT)] += z;
        }
    }
    u
}

/// `I ⊗ H` on the logical pair.
pub fn logical_h2() -> Matrix<f64> {
    let h = Gate::<f64>::h(0).full_matrix(1).expect("1 qubit");
    Matrix::identity(2).kron(&h)
}

/// `|ab⟩ → |a⊕b, b⟩`: control logical qubit 2, target logical qubit 1.
pub fn logical_cnot21() -> Matrix<f64> {
    Gate::<f64>::cnot(1, 0).full_matrix(2).expect("2 qubits")
}

/// A named mode unitary with its logical action and error-location set.
#[derive(Debug, Clone)]
pub struct GateRealization {
    pub name: String,
    pub unitary: Matrix<f64>,
    /// Intended 4×4 action in the logical basis.
    pub logical: Matrix<f64>,
    /// Qubits that receive an evolution-stage location after the gate.
    pub locations: Vec<usize>,
}

impl GateRealization {
    /// Realization obtained from [`logical_unitary`].
    pub fn from_logical(name: &str, logical: Matrix<f64>, locations: Vec<usize>) -> Self {
        Self { name: name.to_string(), unitary: logical_unitary(&logical), logical, locations }
    }

    pub fn validate(&self, codebook: &Codebook) -> Result<()> {
        let name = || self.name.clone();
        if self.unitary.dim() != 16 || !self.unitary.is_unitary() || self.logical.dim() != 4 {
            return Err(ProtocolError::NotModeUnitary(name()));
        }
        if !self.unitary.preserves_parity() {
            return Err(ProtocolError::NotParityPreserving(name()));
        }
        if let Some(&qubit) = self.locations.iter().find(|&&q| q >= CODE_QUBITS) {
            return Err(ProtocolError::LocationOutOfRange { name: name(), qubit });
        }
        let (restricted, leak) = codebook.restrict(&self.unitary);
        let deviation = restricted.max_deviation(&self.logical).max(leak);
        if deviation > TOLERANCE {
            return Err(ProtocolError::WrongLogicalAction { name: name(), deviation });
        }
        Ok(())
    }
}

/// Named projectors and mode unitaries available to `.ftc` documents.
#[derive(Debug, Clone)]
pub struct Registry {
    codebook: Codebook,
    projectors: BTreeMap<String, Projector<f64>>,
    realizations: BTreeMap<String, GateRealization>,
}

impl Registry {
    /// An empty registry.
    pub fn new() -> Self {
        Self { codebook: build_codebook(), projectors: BTreeMap::new(), realizations: BTreeMap::new() }
    }

    /// Everything the bundled protocols use.
    ///
    /// Projectors: `logical-00`, `logical-00+01`, `logical-00+11`,
    /// `even-parity` and the two-qubit `bare-00`, `bare-00+01`, `bare-00+11`.
    /// Mode unitaries: `Hbar2` (locations on all four qubits) and
    /// `CNOTbar21` (locations on qubits 2 and 4, the support of the target
    /// logical qubit's X̄ operator).
    pub fn bundled() -> Self {
        let mut r = Self::new();
        let cb = r.codebook.clone();
        let pair = |a: &PureState<f64>, b: &PureState<f64>| {
            let c = Complex64::one();
            PureState::combine(&[(c, a), (c, b)]).expect("orthogonal states")
        };
        let bare = |idx: &[usize]| PureState::uniform(2, idx).expect("2 qubits");
        let named = [
            ("logical-00", Projector::onto(cb.states[0].clone())),
            ("logical-00+01", Projector::onto(pair(&cb.states[0], &cb.states[1]))),
            ("logical-00+11", Projector::onto(pair(&cb.states[0], &cb.states[3]))),
            ("even-parity", cb.even_parity.clone()),
            ("bare-00", Projector::onto(bare(&[0]))),
            ("bare-00+01", Projector::onto(bare(&[0, 1]))),
            ("bare-00+11", Projector::onto(bare(&[0, 3]))),
        ];
        for (name, p) in named {
            r.register_projector(name, p);
        }
        r.register_realization(GateRealization::from_logical("Hbar2", logical_h2(), vec![0, 1, 2, 3]))
            .expect("valid realization");
        r.register_realization(GateRealization::from_logical("CNOTbar21", logical_cnot21(), vec![1, 3]))
            .expect("valid realization");
        r
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn register_projector(&mut self, name: &str, projector: Projector<f64>) {
        self.projectors.insert(name.to_string(), projector);
    }

    /// Validates and registers a realization, replacing any of the same name.
    pub fn register_realization(&mut self, realization: GateRealization) -> Result<()> {
        realization.validate(&self.codebook)?;
        self.realizations.insert(realization.name.clone(), realization);
        Ok(())
    }

    pub fn projector(&self, name: &str) -> Result<&Projector<f64>> {
        self.projectors.get(name).ok_or_else(|| ProtocolError::UnknownProjector(name.to_string()))
    }

    pub fn realization(&self, name: &str) -> Option<&GateRealization> {
        self.realizations.get(name)
    }

    pub fn projector_names(&self) -> impl Iterator<Item = &str> {
        self.projectors.keys().map(String::as_str)
    }

    pub fn realization_names(&self) -> impl Iterator<Item = &str> {
        self.realizations.keys().map(String::as_str)
    }

    /// Resolves a symbolic measurement for an `n_qubits` register.
    pub fn resolve_measurement(&self, m: &Measurement, n_qubits: usize) -> Result<MeasurementSpec> {
        let ideal = self.projector(m.ideal.as_deref().ok_or(ProtocolError::MissingMeasurement)?)?.clone();
        let post = match m.postselect {
            Some(PostSelect::EvenParity) => Some(Projector::even_parity(n_qubits)?),
            None => None,
        };
        Ok(MeasurementSpec::new(ideal, post)?)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::bundled()
    }
}

impl ModeResolver for Registry {
    fn mode_unitary(&self, name: &str) -> Option<&Matrix<f64>> {
        self.realizations.get(name).map(|r| &r.unitary)
    }

    fn mode_locations(&self, name: &str) -> Option<&[usize]> {
        self.realizations.get(name).map(|r| r.locations.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolName {
    Prep,
    H2,
    Cnot21H2,
    BarePrep,
    BareH2,
    BareCnot21H2,
}

impl ProtocolName {
    pub const ALL: [ProtocolName; 6] = [
        ProtocolName::Prep,
        ProtocolName::H2,
        ProtocolName::Cnot21H2,
        ProtocolName::BarePrep,
        ProtocolName::BareH2,
        ProtocolName::BareCnot21H2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::Prep => "prep",
            ProtocolName::H2 => "h2",
            ProtocolName::Cnot21H2 => "cnot21-h2",
            ProtocolName::BarePrep => "bare-prep",
            ProtocolName::BareH2 => "bare-h2",
            ProtocolName::BareCnot21H2 => "bare-cnot21-h2",
        }
    }

    pub fn is_encoded(self) -> bool {
        matches!(self, ProtocolName::Prep | ProtocolName::H2 | ProtocolName::Cnot21H2)
    }

    /// `(encoded, bare)` pair this protocol belongs to.
    pub fn pair(self) -> (ProtocolName, ProtocolName) {
        match self {
            ProtocolName::Prep | ProtocolName::BarePrep => (ProtocolName::Prep, ProtocolName::BarePrep),
            ProtocolName::H2 | ProtocolName::BareH2 => (ProtocolName::H2, ProtocolName::BareH2),
            ProtocolName::Cnot21H2 | ProtocolName::BareCnot21H2 => {
                (ProtocolName::Cnot21H2, ProtocolName::BareCnot21H2)
            }
        }
    }

    /// Bundled `.ftc` source.
    pub fn source(self) -> &'static str {
        match self {
            ProtocolName::Prep => include_str!("../protocols/prep.ftc"),
            ProtocolName::H2 => include_str!("../protocols/h2.ftc"),
            ProtocolName::Cnot21H2 => include_str!("../protocols/cnot21-h2.ftc"),
            ProtocolName::BarePrep => include_str!("../protocols/bare-prep.ftc"),
            ProtocolName::BareH2 => include_str!("../protocols/bare-h2.ftc"),
            ProtocolName::BareCnot21H2 => include_str!("../protocols/bare-cnot21-h2.ftc"),
        }
    }

    /// Ideal output as a two-qubit (bare) state.
    pub fn ideal_logical(self) -> PureState<f64> {
        let idx: &[usize] = match self.pair().0 {
            ProtocolName::Prep => &[0],
            ProtocolName::H2 => &[0, 1],
            _ => &[0, 3],
        };
        PureState::uniform(2, idx).expect("2 qubits")
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolName {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self> {
        ProtocolName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ProtocolError::UnknownProtocol(s.to_string()))
    }
}

/// A protocol ready to run: circuit, measurement, ideal output, placement.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub document: Document,
    pub measurement: MeasurementSpec,
    pub ideal_output: PureState<f64>,
    pub placement: PlacementPolicy,
}

impl ProtocolSpec {
    /// Builds a spec from any document; the ideal output is read off the
    /// rank-one ideal projector when it has one.
    pub fn from_document(name: &str, document: Document, placement: PlacementPolicy, registry: &Registry) -> Result<Self> {
        let n = document.circuit.n_qubits();
        let measurement = registry.resolve_measurement(&document.measurement, n)?;
        let ideal_output = match &measurement.ideal {
            Projector::State(s) => s.clone(),
            _ => {
                let program = compile(&document.circuit, &measurement, &ErrorModel::explicit(Pauli::X), registry)?;
                program.noiseless_output()
            }
        };
        Ok(Self { name: name.to_string(), document, measurement, ideal_output, placement })
    }

    pub fn error_model(&self, pauli: Pauli) -> ErrorModel {
        ErrorModel::new(pauli, self.placement.clone())
    }

    pub fn program(&self, pauli: Pauli, registry: &Registry) -> Result<Program> {
        Ok(compile(&self.document.circuit, &self.measurement, &self.error_model(pauli), registry)?)
    }

    pub fn is_encoded(&self) -> bool {
        self.measurement.postselect.is_some()
    }
}

/// One of the six bundled protocols. Encoded protocols use the calibrated
/// placement, bare ones the standard placement.
pub fn build_protocol(name: ProtocolName, registry: &Registry) -> Result<ProtocolSpec> {
    let document = parse_circuit(name.source())?;
    let placement = if name.is_encoded() { PlacementPolicy::calibrated() } else { PlacementPolicy::standard() };
    ProtocolSpec::from_document(name.as_str(), document, placement, registry)
}

/// `true` when any single Pauli `pauli` on the noiseless output leaves the
/// even-parity subspace entirely.
pub fn single_errors_detected(output: &PureState<f64>, pauli: Pauli) -> bool {
    let even = Projector::even_parity(output.n_qubits()).expect("valid register");
    (0..output.n_qubits()).all(|q| {
        let flipped = output.applied(&Gate::pauli(pauli, q)).expect("in range");
        even.expectation(&flipped).expect("same size") <= TOLERANCE
    })
}

/// Basis indices with even parity.
pub fn even_basis(n_qubits: usize) -> Vec<usize> {
    (0..1 << n_qubits).filter(|&i| is_even_parity(i)).collect()
}

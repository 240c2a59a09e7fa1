//! Dense linear-algebra kernel for registers of at most five qubits.
//!
//! Basis labels follow the ket convention `|q1 q2 … qn⟩`: qubit 0 (written
//! as qubit 1 in text) is the most significant bit of the basis index.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, One, Zero};
use thiserror::Error;

/// Largest register the kernel accepts.
pub const MAX_QUBITS: usize = 5;

/// Absolute tolerance used for every equality check in the kernel.
pub const TOLERANCE: f64 = 1e-12;

/// Real scalar the kernel is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + Default + Send + Sync + fmt::Debug + fmt::Display + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Default + Send + Sync + fmt::Debug + fmt::Display + 'static
{
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("expected {expected} amplitudes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("qubit {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("gate names qubit {0} more than once")]
    RepeatedQubit(usize),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not a Hermitian idempotent")]
    NotProjector,
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("branch weights sum to {0}, expected 1")]
    Weights(f64),
    #[error("mixture has no branches")]
    EmptyMixture,
}

pub type Result<T> = std::result::Result<T, StateError>;

fn scalar<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable")
}

fn tol<T: Scalar>() -> T {
    // f32 cannot resolve 1e-12; scale to the type's precision instead.
    scalar::<T>(TOLERANCE).max(T::epsilon() * scalar(64.0))
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(StateError::QubitCount(n_qubits))
    }
}

/// Bit mask selecting `qubit` inside a basis index of an `n_qubits` register.
#[inline]
pub fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// `true` when basis index `index` has an even number of ones.
#[inline]
pub fn is_even_parity(index: usize) -> bool {
    index.count_ones().is_multiple_of(2)
}

/// A square complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, " {:+.3}{:+.3}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.dim + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_rows(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(StateError::Length { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Builds a real matrix from `dim * dim` row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_rows(dim, data.iter().map(|&x| Complex::new(scalar(x), T::zero())).collect())
    }

    /// Column-stacks the given vectors (`|v_j⟩⟨e_j|`).
    pub fn from_columns(columns: &[&[Complex<T>]]) -> Result<Self> {
        let dim = columns.len();
        let mut m = Self::zeros(dim);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != dim {
                return Err(StateError::Dimension { left: col.len(), right: dim });
            }
            for (r, z) in col.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(StateError::Dimension { left: self.dim, right: rhs.dim });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] = out.data[r * n + c] + a * rhs.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(StateError::Dimension { left: self.dim, right: rhs.dim });
        }
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry-wise modulus of `self - rhs`.
    pub fn max_deviation(&self, rhs: &Self) -> T {
        if self.dim != rhs.dim {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest entry of `U·U† − I`.
    pub fn unitarity_defect(&self) -> T {
        let prod = self.mul(&self.adjoint()).expect("square");
        prod.max_deviation(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= tol()
    }

    pub fn is_projector(&self) -> bool {
        let sq = self.mul(self).expect("square");
        sq.max_deviation(self) <= tol() && self.adjoint().max_deviation(self) <= tol()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let mut out = Self::zeros(a * b);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self[(r1, c1)];
                for r2 in 0..b {
                    for c2 in 0..b {
                        out[(r1 * b + r2, c1 * b + c2)] = x * rhs[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    /// `true` when the matrix never couples even- and odd-parity basis states.
    pub fn preserves_parity(&self) -> bool {
        let t = tol::<T>();
        (0..self.dim).all(|r| {
            (0..self.dim)
                .all(|c| is_even_parity(r) == is_even_parity(c) || self[(r, c)].norm() <= t)
        })
    }
}

/// The three non-trivial Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Scalar>(self) -> Matrix<T> {
        let (o, z, i) = (Complex::one(), Complex::zero(), Complex::i());
        let data = match self {
            Pauli::X => vec![z, o, o, z],
            Pauli::Y => vec![z, -i, i, z],
            Pauli::Z => vec![o, z, z, -o],
        };
        Matrix::from_rows(2, data).expect("2x2")
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_lowercase() {
            'x' => Some(Pauli::X),
            'y' => Some(Pauli::Y),
            'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl std::str::FromStr for Pauli {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut chars = s.chars();
        match (chars.next().and_then(Pauli::from_symbol), chars.next()) {
            (Some(p), None) => Ok(p),
            _ => Err(format!("unknown Pauli `{s}` (expected x, y or z)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Cnot,
    Swap,
    ModeUnitary,
}

/// A gate bound to its target qubits.
///
/// Mode unitaries carry a full `2^n × 2^n` matrix together with a sparse
/// copy used by the in-place application path.
/// Nonzero `(row, column, value)` entries of a mode unitary.
type SparseEntries<T> = Arc<[(usize, usize, Complex<T>)]>;

#[derive(Clone)]
pub struct Gate<T> {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: Option<Arc<Matrix<T>>>,
    sparse: Option<SparseEntries<T>>,
}

impl<T: Scalar> fmt::Debug for Gate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.kind, self.targets)
    }
}

impl<T: Scalar> Gate<T> {
    fn simple(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets, matrix: None, sparse: None }
    }

    pub fn h(q: usize) -> Self {
        Self::simple(GateKind::H, vec![q])
    }
    pub fn x(q: usize) -> Self {
        Self::simple(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> Self {
        Self::simple(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Self::simple(GateKind::Z, vec![q])
    }
    pub fn pauli(p: Pauli, q: usize) -> Self {
        match p {
            Pauli::X => Self::x(q),
            Pauli::Y => Self::y(q),
            Pauli::Z => Self::z(q),
        }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::simple(GateKind::Cnot, vec![control, target])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::simple(GateKind::Swap, vec![a, b])
    }

    /// Wraps a full-register unitary. Rejects non-unitary matrices.
    pub fn mode_unitary(matrix: Matrix<T>) -> Result<Self> {
        let defect = matrix.unitarity_defect();
        if !(defect <= tol()) {
            return Err(StateError::NotUnitary(defect.to_f64().unwrap_or(f64::NAN)));
        }
        let n = matrix.dim();
        let sparse: Vec<_> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter_map(|(r, c)| {
                let z = matrix[(r, c)];
                (!z.is_zero()).then_some((r, c, z))
            })
            .collect();
        Ok(Self {
            kind: GateKind::ModeUnitary,
            targets: Vec::new(),
            matrix: Some(Arc::new(matrix)),
            sparse: Some(sparse.into()),
        })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Returns the inverse gate (every primitive is self-inverse).
    pub fn inverse(&self) -> Self {
        match &self.matrix {
            Some(m) => Self::mode_unitary(m.adjoint()).expect("adjoint of unitary"),
            None => self.clone(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        for (i, &q) in self.targets.iter().enumerate() {
            if q >= n_qubits {
                return Err(StateError::QubitOutOfRange { index: q, n_qubits });
            }
            if self.targets[..i].contains(&q) {
                return Err(StateError::RepeatedQubit(q));
            }
        }
        if let Some(m) = &self.matrix {
            if m.dim() != 1 << n_qubits {
                return Err(StateError::Dimension { left: m.dim(), right: 1 << n_qubits });
            }
        }
        Ok(())
    }

    /// The gate as a dense `2^n × 2^n` matrix, built by Kronecker products
    /// (independent of the in-place application path).
    pub fn full_matrix(&self, n_qubits: usize) -> Result<Matrix<T>> {
        self.validate(n_qubits)?;
        if let Some(m) = &self.matrix {
            return Ok((**m).clone());
        }
        let one_qubit = |q: usize, m: Matrix<T>| {
            (0..n_qubits).fold(Matrix::identity(1), |acc, i| {
                acc.kron(&if i == q { m.clone() } else { Matrix::identity(2) })
            })
        };
        let h = scalar::<T>(std::f64::consts::FRAC_1_SQRT_2);
        Ok(match self.kind {
            GateKind::H => {
                let m = Matrix::from_rows(
                    2,
                    vec![
                        Complex::new(h, T::zero()),
                        Complex::new(h, T::zero()),
                        Complex::new(h, T::zero()),
                        Complex::new(-h, T::zero()),
                    ],
                )?;
                one_qubit(self.targets[0], m)
            }
            GateKind::X => one_qubit(self.targets[0], Pauli::X.matrix()),
            GateKind::Y => one_qubit(self.targets[0], Pauli::Y.matrix()),
            GateKind::Z => one_qubit(self.targets[0], Pauli::Z.matrix()),
            GateKind::Cnot | GateKind::Swap => {
                // Permutation matrices: build column by column from the bit action.
                let dim = 1 << n_qubits;
                let (a, b) = (self.targets[0], self.targets[1]);
                let mut m = Matrix::zeros(dim);
                for col in 0..dim {
                    let bit = |q: usize| (col >> (n_qubits - 1 - q)) & 1;
                    let mut row = col;
                    if self.kind == GateKind::Cnot {
                        if bit(a) == 1 {
                            row ^= qubit_mask(n_qubits, b);
                        }
                    } else if bit(a) != bit(b) {
                        row ^= qubit_mask(n_qubits, a) | qubit_mask(n_qubits, b);
                    }
                    m[(row, col)] = Complex::one();
                }
                m
            }
            GateKind::ModeUnitary => unreachable!("handled above"),
        })
    }

    /// Applies the gate in place. Targets must already be validated.
    pub(crate) fn apply_unchecked(&self, n_qubits: usize, amps: &mut [Complex<T>]) {
        let dim = amps.len();
        match self.kind {
            GateKind::H => {
                let m = qubit_mask(n_qubits, self.targets[0]);
                let h = scalar::<T>(std::f64::consts::FRAC_1_SQRT_2);
                for i in (0..dim).filter(|i| i & m == 0) {
                    let (a, b) = (amps[i], amps[i | m]);
                    amps[i] = (a + b) * h;
                    amps[i | m] = (a - b) * h;
                }
            }
            GateKind::X => {
                let m = qubit_mask(n_qubits, self.targets[0]);
                for i in (0..dim).filter(|i| i & m == 0) {
                    amps.swap(i, i | m);
                }
            }
            GateKind::Y => {
                let m = qubit_mask(n_qubits, self.targets[0]);
                let i_unit = Complex::<T>::i();
                for i in (0..dim).filter(|i| i & m == 0) {
                    let (a, b) = (amps[i], amps[i | m]);
                    amps[i] = -i_unit * b;
                    amps[i | m] = i_unit * a;
                }
            }
            GateKind::Z => {
                let m = qubit_mask(n_qubits, self.targets[0]);
                for i in (0..dim).filter(|i| i & m != 0) {
                    amps[i] = -amps[i];
                }
            }
            GateKind::Cnot => {
                let c = qubit_mask(n_qubits, self.targets[0]);
                let t = qubit_mask(n_qubits, self.targets[1]);
                for i in (0..dim).filter(|i| i & c != 0 && i & t == 0) {
                    amps.swap(i, i | t);
                }
            }
            GateKind::Swap => {
                let a = qubit_mask(n_qubits, self.targets[0]);
                let b = qubit_mask(n_qubits, self.targets[1]);
                for i in (0..dim).filter(|i| i & a != 0 && i & b == 0) {
                    amps.swap(i, i ^ a ^ b);
                }
            }
            GateKind::ModeUnitary => {
                let sparse = self.sparse.as_ref().expect("mode unitary has entries");
                let mut out = [Complex::<T>::zero(); 1 << MAX_QUBITS];
                for &(r, c, z) in sparse.iter() {
                    out[r] = out[r] + z * amps[c];
                }
                amps.copy_from_slice(&out[..dim]);
            }
        }
    }
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Clone, PartialEq)]
pub struct PureState<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for PureState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.n_qubits;
        let mut first = true;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if z.norm() > tol() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({:.4}{:+.4}i)|{:0width$b}⟩", z.re, z.im, i)?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> PureState<T> {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(StateError::Length { expected: dim, got: index + 1 });
        }
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[index] = Complex::one();
        Ok(Self { n_qubits, amplitudes })
    }

    /// Validates length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(StateError::Length { expected: 1 << n_qubits, got: amplitudes.len() });
        }
        let s = Self { n_qubits, amplitudes };
        let norm = s.norm_sqr();
        if (norm - T::one()).abs() > tol() {
            return Err(StateError::NotNormalized(norm.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(s)
    }

    /// Equal-weight superposition `Σ |i⟩ / √k` of the given basis indices.
    pub fn uniform(n_qubits: usize, indices: &[usize]) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut amplitudes = vec![Complex::zero(); dim];
        let a = T::one() / scalar::<T>(indices.len() as f64).sqrt();
        for &i in indices {
            if i >= dim {
                return Err(StateError::Length { expected: dim, got: i + 1 });
            }
            amplitudes[i] = amplitudes[i] + Complex::new(a, T::zero());
        }
        Self::from_amplitudes(n_qubits, amplitudes)
    }

    /// Normalized linear combination `Σ c_i |ψ_i⟩`.
    pub fn combine(terms: &[(Complex<T>, &PureState<T>)]) -> Result<Self> {
        let first = terms.first().ok_or(StateError::EmptyMixture)?.1;
        let mut amplitudes = vec![Complex::zero(); first.dim()];
        for (c, s) in terms {
            if s.n_qubits != first.n_qubits {
                return Err(StateError::Dimension { left: s.dim(), right: first.dim() });
            }
            for (a, b) in amplitudes.iter_mut().zip(&s.amplitudes) {
                *a = *a + c * b;
            }
        }
        let norm = amplitudes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        Self::from_amplitudes(first.n_qubits, amplitudes.iter().map(|z| z / norm).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(StateError::Dimension { left: self.dim(), right: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Basis-state populations.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        gate.apply_unchecked(self.n_qubits, &mut self.amplitudes);
        Ok(())
    }

    pub fn applied(&self, gate: &Gate<T>) -> Result<Self> {
        let mut s = self.clone();
        s.apply(gate)?;
        Ok(s)
    }

    /// Outer product `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> Matrix<T> {
        let n = self.dim();
        let mut m = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        m
    }
}

/// Applies `gate` to `state`, returning the new state.
pub fn apply_gate<T: Scalar>(state: &PureState<T>, gate: &Gate<T>) -> Result<PureState<T>> {
    state.applied(gate)
}

/// An orthogonal projector.
#[derive(Clone, PartialEq)]
pub enum Projector<T> {
    /// Span of even-weight basis states.
    EvenParity { n_qubits: usize },
    /// Rank-one projector `|φ⟩⟨φ|`.
    State(PureState<T>),
    /// Any Hermitian idempotent.
    Dense(Matrix<T>),
}

impl<T: Scalar> Projector<T> {
    pub fn even_parity(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(Projector::EvenParity { n_qubits })
    }

    pub fn onto(state: PureState<T>) -> Self {
        Projector::State(state)
    }

    pub fn dense(matrix: Matrix<T>) -> Result<Self> {
        if matrix.is_projector() {
            Ok(Projector::Dense(matrix))
        } else {
            Err(StateError::NotProjector)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Projector::EvenParity { n_qubits } => 1 << n_qubits,
            Projector::State(s) => s.dim(),
            Projector::Dense(m) => m.dim(),
        }
    }

    pub fn matrix(&self) -> Matrix<T> {
        match self {
            Projector::EvenParity { n_qubits } => {
                let dim = 1 << n_qubits;
                let mut m = Matrix::zeros(dim);
                for i in (0..dim).filter(|&i| is_even_parity(i)) {
                    m[(i, i)] = Complex::one();
                }
                m
            }
            Projector::State(s) => s.density_matrix(),
            Projector::Dense(m) => m.clone(),
        }
    }

    /// `⟨ψ|P|ψ⟩`, assuming matching dimensions.
    pub(crate) fn expectation_unchecked(&self, amps: &[Complex<T>]) -> T {
        match self {
            Projector::EvenParity { .. } => amps
                .iter()
                .enumerate()
                .filter(|(i, _)| is_even_parity(*i))
                .fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr()),
            Projector::State(s) => s
                .amplitudes
                .iter()
                .zip(amps)
                .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
                .norm_sqr(),
            Projector::Dense(m) => {
                let pv = m.apply(amps);
                amps.iter().zip(&pv).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
            }
        }
    }

    pub fn expectation(&self, state: &PureState<T>) -> Result<T> {
        if self.dim() != state.dim() {
            return Err(StateError::Dimension { left: self.dim(), right: state.dim() });
        }
        Ok(self.expectation_unchecked(&state.amplitudes))
    }

    /// `Tr[P ρ]` for a dense density matrix.
    pub fn trace_with(&self, rho: &Matrix<T>) -> Result<T> {
        Ok(self.matrix().mul(rho)?.trace().re)
    }

    /// `true` when `self · inner = inner` (the range of `inner` lies in ours).
    pub fn contains(&self, inner: &Projector<T>) -> bool {
        match (self.matrix().mul(&inner.matrix()), inner.matrix()) {
            (Ok(prod), m) => prod.max_deviation(&m) <= tol(),
            _ => false,
        }
    }
}

/// A finite mixture of pure states.
#[derive(Clone, PartialEq)]
pub struct MixedState<T> {
    branches: Vec<(T, PureState<T>)>,
}

impl<T: Scalar> MixedState<T> {
    pub fn new(branches: Vec<(T, PureState<T>)>) -> Result<Self> {
        let first = branches.first().ok_or(StateError::EmptyMixture)?;
        let dim = first.1.dim();
        let mut total = T::zero();
        for (w, s) in &branches {
            if s.dim() != dim {
                return Err(StateError::Dimension { left: s.dim(), right: dim });
            }
            if *w < T::zero() || *w > T::one() + tol() {
                return Err(StateError::Weights(w.to_f64().unwrap_or(f64::NAN)));
            }
            total = total + *w;
        }
        if (total - T::one()).abs() > tol() {
            return Err(StateError::Weights(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { branches })
    }

    pub fn pure(state: PureState<T>) -> Self {
        Self { branches: vec![(T::one(), state)] }
    }

    pub fn branches(&self) -> &[(T, PureState<T>)] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.branches[0].1.dim()
    }

    pub fn density_matrix(&self) -> Matrix<T> {
        self.branches.iter().fold(Matrix::zeros(self.dim()), |acc, (w, s)| {
            acc.add(&s.density_matrix().scale(*w)).expect("same dimension")
        })
    }
}

/// `Tr[P ρ]`.
pub fn overlap<T: Scalar>(state: &MixedState<T>, projector: &Projector<T>) -> Result<T> {
    state.branches.iter().try_fold(T::zero(), |acc, (w, s)| {
        Ok(acc + *w * projector.expectation(s)?)
    })
}

/// Populations of every basis state (entry `i` is the weight of `|i⟩`).
pub fn mode_distribution<T: Scalar>(state: &MixedState<T>) -> Vec<T> {
    let mut out = vec![T::zero(); state.dim()];
    for (w, s) in &state.branches {
        for (o, p) in out.iter_mut().zip(s.probabilities()) {
            *o = *o + *w * p;
        }
    }
    out
}

impl<T: Scalar> fmt::Debug for Projector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::EvenParity { n_qubits } => f.debug_struct("EvenParity").field("n_qubits", n_qubits).finish(),
            Projector::State(s) => f.debug_tuple("State").field(s).finish(),
            Projector::Dense(m) => f.debug_tuple("Dense").field(m).finish(),
        }
    }
}

impl<T: Scalar> fmt::Debug for MixedState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedState").field("branches", &self.branches).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOLERANCE
    }

    #[test]
    fn hadamard_on_zero() {
        let s = PureState::<f64>::zero(1).unwrap().applied(&Gate::h(0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amplitudes()[0].re, h) && close(s.amplitudes()[1].re, h));
    }

    #[test]
    fn bit_flip_uses_msb_convention() {
        let s = PureState::<f64>::zero(4).unwrap().applied(&Gate::x(1)).unwrap();
        assert_eq!(s.probabilities()[0b0100], 1.0);
    }

    #[test]
    fn encoder_chain_yields_ghz() {
        let mut s = PureState::<f64>::zero(4).unwrap();
        for g in [Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::cnot(2, 3)] {
            s.apply(&g).unwrap();
        }
        let ghz = PureState::<f64>::uniform(4, &[0, 15]).unwrap();
        assert!(close(ghz.fidelity(&s).unwrap(), 1.0));
    }

    #[test]
    fn in_place_matches_full_matrix() {
        let amps: Vec<C> = (0..8).map(|i| C::new(i as f64 + 1.0, 0.5 - i as f64)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = PureState::from_amplitudes(3, amps.iter().map(|z| z / norm).collect()).unwrap();
        let gates = [
            Gate::h(1),
            Gate::x(0),
            Gate::y(2),
            Gate::z(1),
            Gate::cnot(2, 0),
            Gate::swap(0, 2),
        ];
        for g in gates {
            let fast = s.applied(&g).unwrap();
            let slow = g.full_matrix(3).unwrap().apply(s.amplitudes());
            for (a, b) in fast.amplitudes().iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "{g:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = PureState::<f64>::zero(2).unwrap();
        assert!(matches!(s.applied(&Gate::h(2)), Err(StateError::QubitOutOfRange { .. })));
        assert!(matches!(s.applied(&Gate::cnot(1, 1)), Err(StateError::RepeatedQubit(1))));
        let m = Matrix::<f64>::from_real(4, &[1., 1., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.]);
        assert!(matches!(Gate::mode_unitary(m.unwrap()), Err(StateError::NotUnitary(_))));
        assert!(PureState::<f64>::zero(6).is_err());
        assert!(PureState::<f64>::from_amplitudes(1, vec![C::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn pauli_algebra() {
        let i2 = Matrix::<f64>::identity(2);
        for p in Pauli::ALL {
            let m = p.matrix::<f64>();
            assert!(m.mul(&m).unwrap().max_deviation(&i2) < 1e-12);
        }
        let h = Gate::<f64>::h(0).full_matrix(1).unwrap();
        let hxh = h.mul(&Pauli::X.matrix()).unwrap().mul(&h).unwrap();
        let hzh = h.mul(&Pauli::Z.matrix()).unwrap().mul(&h).unwrap();
        assert!(hxh.max_deviation(&Pauli::Z.matrix()) < 1e-12);
        assert!(hzh.max_deviation(&Pauli::X.matrix()) < 1e-12);
    }

    #[test]
    fn overlaps_and_modes() {
        let l00 = PureState::<f64>::uniform(4, &[0, 15]).unwrap();
        let mixed = MixedState::pure(l00.clone());
        assert!(close(overlap(&mixed, &Projector::onto(l00)).unwrap(), 1.0));
        let odd = MixedState::pure(PureState::<f64>::basis(4, 1).unwrap());
        assert!(close(overlap(&odd, &Projector::even_parity(4).unwrap()).unwrap(), 0.0));
        let d = mode_distribution(&mixed);
        assert!(close(d[0], 0.5) && close(d[15], 0.5));
        assert!(close(d.iter().sum::<f64>(), 1.0));
    }

    #[test]
    fn mixture_validation() {
        let a = PureState::<f64>::basis(1, 0).unwrap();
        let b = PureState::<f64>::basis(1, 1).unwrap();
        assert!(MixedState::new(vec![(0.5, a.clone()), (0.4, b.clone())]).is_err());
        let m = MixedState::new(vec![(0.25, a), (0.75, b)]).unwrap();
        let rho = m.density_matrix();
        assert!(close(rho.trace().re, 1.0));
        assert!(Projector::dense(rho).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let s = PureState::<f32>::zero(2).unwrap().applied(&Gate::h(0)).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}

//! Exact simulation of error-detecting circuits on the [[4,2,2]] code.
//!
//! * [`statekit`]: state vectors, gates and projectors for up to five qubits.
//! * [`circuit`]: circuit IR and the `.ftc` text format.
//! * [`noise`]: Pauli error placement, exact pattern enumeration, dense
//!   density-matrix reference and Monte Carlo sampling.
//! * [`protocols`]: codebook, named projectors/unitaries, bundled protocols.
//! * [`analysis`]: sweeps, thresholds, placement calibration, error-rate fits.
//!
//! The kernel is generic over the real scalar; the aliases below fix the
//! double-precision and exact-rational instantiations the engines use.

pub mod analysis;
pub mod circuit;
pub mod noise;
pub mod protocols;
pub mod statekit;

/// Double-precision pure state.
pub type State = statekit::PureState<f64>;
/// Double-precision branch mixture.
pub type Mixture = statekit::MixedState<f64>;
/// Double-precision dense complex matrix.
pub type Unitary = statekit::Matrix<f64>;
/// Double-precision projector.
pub type Projector = statekit::Projector<f64>;
/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Polynomial in `p` with exact rational coefficients.
pub type RationalPoly = noise::Poly<Rational>;
/// Polynomial with `f64` coefficients.
pub type FloatPoly = noise::Poly<f64>;

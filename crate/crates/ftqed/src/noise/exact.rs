//! Exact evaluation by enumerating error patterns.
//!
//! A pattern is one fire/no-fire assignment to the `L` locations; with `k`
//! errors firing it has weight `p^(L−k) (1−p)^k`. For each `k` the engines
//! tally `Σ Tr[P ρ_pattern]` over patterns, then expand the tallies over the
//! monomial basis. Per-pattern traces of the bundled circuits are dyadic
//! rationals, so they are snapped to a `2^-SNAP_BITS` grid and summed as
//! integers; that makes the result exact and independent of summation order.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::poly::{pattern_basis, rational_from_f64, Poly, RationalPoly};
use super::{
    compile, Exactness, ModeResolver, NoiseError, ErrorModel, ProbabilityFunction, Program, Result, Step,
    MAX_LOCATIONS,
};
use crate::circuit::{Circuit, MeasurementSpec};
use crate::statekit::{Gate, MixedState, PureState, MAX_QUBITS};

/// Per-pattern traces are snapped to multiples of `2^-SNAP_BITS`.
pub const SNAP_BITS: u32 = 16;

const SNAP_SCALE: f64 = (1u64 << SNAP_BITS) as f64;

/// A trace is accepted as dyadic when it lies this close to the grid.
const SNAP_TOLERANCE: f64 = 1e-10;

type Amps = [Complex64; 1 << MAX_QUBITS];

/// Rounds `v` onto the dyadic grid, or `None` when it is not on it.
pub(crate) fn snap(v: f64) -> Option<u64> {
    let s = v * SNAP_SCALE;
    let r = s.round();
    ((s - r).abs() <= SNAP_TOLERANCE * SNAP_SCALE && r >= 0.0).then_some(r as u64)
}

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Accumulators indexed by `(quantity, k)`.
///
/// Quantity 0 is the ideal overlap, 1 the post-selected weight and `2 + i`
/// the population of basis state `i`.
#[derive(Debug, Clone)]
struct Accumulator {
    width: usize,
    ints: Vec<u128>,
    floats: Vec<Compensated>,
    exact: bool,
    patterns: u128,
}

impl Accumulator {
    fn new(locations: usize, dim: usize) -> Self {
        let width = locations + 1;
        let n = (2 + dim) * width;
        Self { width, ints: vec![0; n], floats: vec![Compensated::default(); n], exact: true, patterns: 0 }
    }

    fn add(&mut self, quantity: usize, k: usize, count: u64, v: f64) {
        let idx = quantity * self.width + k;
        self.floats[idx].add(count as f64 * v);
        match snap(v) {
            Some(n) => self.ints[idx] += u128::from(n) * u128::from(count),
            None => self.exact = false,
        }
    }

    fn record(&mut self, program: &Program, k: usize, count: u64, amps: &[Complex64]) {
        let m = program.measurement();
        self.add(0, k, count, m.ideal.expectation_unchecked(amps));
        let accepted = m.postselect.as_ref().map_or(1.0, |p| p.expectation_unchecked(amps));
        self.add(1, k, count, accepted);
        for (i, z) in amps.iter().enumerate() {
            self.add(2 + i, k, count, z.norm_sqr());
        }
        self.patterns += u128::from(count);
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.ints.iter_mut().zip(&other.ints) {
            *a += b;
        }
        for (a, b) in self.floats.iter_mut().zip(&other.floats) {
            a.merge(b);
        }
        self.exact &= other.exact;
        self.patterns += other.patterns;
    }

    fn finish(self, locations: usize, dim: usize) -> PatternTallies {
        let scale = BigRational::from_integer(BigInt::from(1u64 << SNAP_BITS));
        let row = |q: usize| -> Vec<BigRational> {
            (0..self.width)
                .map(|k| {
                    let idx = q * self.width + k;
                    if self.exact {
                        BigRational::from_integer(BigInt::from(self.ints[idx])) / &scale
                    } else {
                        rational_from_f64(self.floats[idx].value())
                    }
                })
                .collect()
        };
        PatternTallies {
            locations,
            ideal: row(0),
            accepted: row(1),
            modes: (0..dim).map(|i| row(2 + i)).collect(),
            exact: self.exact,
            patterns: self.patterns,
        }
    }
}

/// Sums of per-pattern traces, grouped by number of fired errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTallies {
    pub locations: usize,
    /// `ideal[k] = Σ_{|pattern| = k} Tr[P_ideal ρ]`.
    pub ideal: Vec<BigRational>,
    /// `accepted[k] = Σ_{|pattern| = k} Tr[P_post ρ]` (1 per pattern without post-selection).
    pub accepted: Vec<BigRational>,
    /// `modes[i][k]`: population of basis state `i`.
    pub modes: Vec<Vec<BigRational>>,
    /// Whether every trace snapped onto the dyadic grid.
    pub exact: bool,
    /// Number of patterns covered (must be `2^L`).
    pub patterns: u128,
}

impl PatternTallies {
    /// `Σ_k t_k p^(L−k) (1−p)^k` over the monomial basis.
    pub fn expand(&self, tallies: &[BigRational]) -> RationalPoly {
        let basis = pattern_basis(self.locations);
        let mut out = Poly::zero();
        for (t, b) in tallies.iter().zip(&basis) {
            if t.is_zero() {
                continue;
            }
            let term = Poly::new(b.coeffs().iter().map(|c| BigRational::from_integer(c.clone()) * t).collect());
            out = &out + &term;
        }
        out
    }

    /// Total weight of all patterns as a polynomial, identically 1.
    pub fn normalization(&self) -> RationalPoly {
        let ones: Vec<BigRational> = (0..=self.locations)
            .map(|k| BigRational::from_integer(binomial(self.locations, k)))
            .collect();
        self.expand(&ones)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Exact engine output for one program.
#[derive(Debug, Clone)]
pub struct ExactResult {
    /// `F_p = N_i / N_t`.
    pub correct: ProbabilityFunction,
    /// Post-selection probability `N_t`.
    pub accepted: RationalPoly,
    /// Raw (not post-selected) basis-state populations.
    pub modes: Vec<RationalPoly>,
    pub tallies: PatternTallies,
}

impl ExactResult {
    /// Mode distribution at `p`.
    pub fn mode_distribution(&self, p: f64) -> Vec<f64> {
        self.modes.iter().map(|m| m.eval_f64(p)).collect()
    }
}

/// Pattern-enumeration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Visit every pattern individually (depth-first, split across workers).
    Patterns(EnumerationOptions),
    /// Walk the circuit once, merging patterns whose intermediate states
    /// coincide up to global phase. Same tallies, far fewer branches.
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// The first `split_bits` locations are fixed per task; tasks run in parallel.
    pub split_bits: usize,
    /// Visit tasks in reverse order (permutation check).
    pub reverse: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { split_bits: 8, reverse: false }
    }
}

fn check_bound(program: &Program) -> Result<()> {
    if program.n_locations() > MAX_LOCATIONS {
        return Err(NoiseError::TooManyLocations { locations: program.n_locations(), max: MAX_LOCATIONS });
    }
    Ok(())
}

fn initial_amps() -> Amps {
    let mut a = [Complex64::zero(); 1 << MAX_QUBITS];
    a[0] = Complex64::one();
    a
}

struct Walker<'a> {
    program: &'a Program,
    dim: usize,
    error: Vec<Gate<f64>>,
    prefix: u64,
    prefix_bits: usize,
}

impl Walker<'_> {
    fn walk(&self, start: usize, mut amps: Amps, mut k: usize, mut loc: usize, acc: &mut Accumulator) {
        let n = self.program.n_qubits();
        let steps = self.program.steps();
        for (i, step) in steps.iter().enumerate().skip(start) {
            match step {
                Step::Gate(g) => g.apply_unchecked(n, &mut amps[..self.dim]),
                Step::Location(q) => {
                    if loc < self.prefix_bits {
                        if (self.prefix >> loc) & 1 == 1 {
                            self.error[*q].apply_unchecked(n, &mut amps[..self.dim]);
                            k += 1;
                        }
                    } else {
                        let mut fired = amps;
                        self.error[*q].apply_unchecked(n, &mut fired[..self.dim]);
                        self.walk(i + 1, fired, k + 1, loc + 1, acc);
                    }
                    loc += 1;
                }
            }
        }
        acc.record(self.program, k, 1, &amps[..self.dim]);
    }
}

/// Visits all `2^L` patterns one by one.
pub fn enumerate_patterns(program: &Program, options: EnumerationOptions) -> Result<PatternTallies> {
    check_bound(program)?;
    let l = program.n_locations();
    let dim = 1 << program.n_qubits();
    let bits = options.split_bits.min(l);
    let error: Vec<_> = (0..program.n_qubits()).map(|q| Gate::pauli(program.pauli(), q)).collect();
    let mut tasks: Vec<u64> = (0..1u64 << bits).collect();
    if options.reverse {
        tasks.reverse();
    }
    let partials: Vec<Accumulator> = tasks
        .par_iter()
        .map(|&prefix| {
            let walker = Walker { program, dim, error: error.clone(), prefix, prefix_bits: bits };
            let mut acc = Accumulator::new(l, dim);
            walker.walk(0, initial_amps(), 0, 0, &mut acc);
            acc
        })
        .collect();
    let mut total = Accumulator::new(l, dim);
    for part in &partials {
        total.merge(part);
    }
    Ok(total.finish(l, dim))
}

struct Branch {
    amps: Amps,
    /// `counts[k]`: number of patterns with `k` errors so far that lead here.
    counts: Vec<u64>,
}

/// Key identifying a state up to global phase.
fn phase_key(amps: &[Complex64]) -> Vec<i64> {
    let lead = amps.iter().find(|z| z.norm_sqr() > 1e-12).copied().unwrap_or(Complex64::one());
    let phase = lead.conj() / lead.norm();
    amps.iter()
        .flat_map(|z| {
            let w = z * phase;
            [(w.re * 1e9).round() as i64, (w.im * 1e9).round() as i64]
        })
        .collect()
}

/// Same tallies as [`enumerate_patterns`], merging coincident branches.
pub fn merged_tallies(program: &Program) -> Result<PatternTallies> {
    let branches = merged_branches(program)?;
    let l = program.n_locations();
    let dim = 1 << program.n_qubits();
    let mut acc = Accumulator::new(l, dim);
    for b in &branches {
        for (k, &c) in b.counts.iter().enumerate().filter(|(_, c)| **c > 0) {
            acc.record(program, k, c, &b.amps[..dim]);
        }
    }
    Ok(acc.finish(l, dim))
}

fn merged_branches(program: &Program) -> Result<Vec<Branch>> {
    check_bound(program)?;
    let n = program.n_qubits();
    let dim = 1 << n;
    let l = program.n_locations();
    let error: Vec<_> = (0..n).map(|q| Gate::pauli(program.pauli(), q)).collect();
    let mut counts = vec![0; l + 1];
    counts[0] = 1;
    let mut branches = vec![Branch { amps: initial_amps(), counts }];
    for step in program.steps() {
        match step {
            Step::Gate(g) => {
                for b in &mut branches {
                    g.apply_unchecked(n, &mut b.amps[..dim]);
                }
            }
            Step::Location(q) => {
                let mut next: Vec<Branch> = Vec::with_capacity(branches.len() * 2);
                let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
                let mut insert = |amps: Amps, counts: Vec<u64>, shift: usize| {
                    let key = phase_key(&amps[..dim]);
                    let slot = *index.entry(key).or_insert_with(|| {
                        next.push(Branch { amps, counts: vec![0; l + 1] });
                        next.len() - 1
                    });
                    for (k, c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
                        next[slot].counts[k + shift] += c;
                    }
                };
                for b in branches {
                    let mut fired = b.amps;
                    error[*q].apply_unchecked(n, &mut fired[..dim]);
                    insert(fired, b.counts.clone(), 1);
                    insert(b.amps, b.counts, 0);
                }
                branches = next;
            }
        }
    }
    Ok(branches)
}

/// The output state at `p` as a weighted branch list, one branch per
/// distinct final state (patterns with coinciding outputs are merged).
pub fn output_mixture(program: &Program, p: f64) -> Result<MixedState<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::InvalidProbability(p));
    }
    let n = program.n_qubits();
    let dim = 1 << n;
    let l = program.n_locations();
    let branches = merged_branches(program)?;
    let mut out = Vec::new();
    for b in branches {
        let w: f64 = b
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * p.powi((l - k) as i32) * (1.0 - p).powi(k as i32))
            .sum();
        if w > 0.0 {
            out.push((w, PureState::from_amplitudes(n, b.amps[..dim].to_vec())?));
        }
    }
    Ok(MixedState::new(out)?)
}

fn max_abs_error(tallies: &PatternTallies) -> f64 {
    // Compensated sums of at most 2^L terms in [0, 1].
    (tallies.patterns as f64) * f64::EPSILON * 4.0
}

/// Runs an exact engine and assembles polynomials.
pub fn evaluate_exact(program: &Program, strategy: Strategy) -> Result<ExactResult> {
    let tallies = match strategy {
        Strategy::Patterns(opts) => enumerate_patterns(program, opts)?,
        Strategy::Merged => merged_tallies(program)?,
    };
    let exactness = if tallies.exact {
        Exactness::Exact
    } else {
        Exactness::Approximate { max_abs_error: max_abs_error(&tallies) }
    };
    let numerator = tallies.expand(&tallies.ideal);
    let denominator = tallies.expand(&tallies.accepted);
    let correct = ProbabilityFunction::new(numerator, denominator.clone(), tallies.locations, exactness)?;
    let modes = tallies.modes.iter().map(|m| tallies.expand(m)).collect();
    Ok(ExactResult { correct, accepted: denominator, modes, tallies })
}

/// `F_p` (or `f_p`) of a circuit as an exact ratio of polynomials.
pub fn exact_correct_probability(
    circuit: &Circuit,
    measurement: &MeasurementSpec,
    model: &ErrorModel,
    modes: &dyn ModeResolver,
) -> Result<ProbabilityFunction> {
    let program = compile(circuit, measurement, model, modes)?;
    Ok(evaluate_exact(&program, Strategy::Merged)?.correct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::noise::{NoModes, PlacementPolicy};
    use crate::statekit::{Pauli, Projector};

    fn bare_h2(pauli: Pauli) -> Program {
        let doc = parse_circuit("qubits 2\nnoise auto\nstage prep\nstage evolution\ngate h 2").unwrap();
        let ideal = PureState::uniform(2, &[0, 1]).unwrap();
        let spec = MeasurementSpec::new(Projector::onto(ideal), None).unwrap();
        compile(&doc.circuit, &spec, &ErrorModel::new(pauli, PlacementPolicy::standard()), &NoModes).unwrap()
    }

    fn ints(p: &RationalPoly) -> Vec<i64> {
        p.integer_coeffs().unwrap().iter().map(|c| i64::try_from(c).unwrap()).collect()
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(0.25), Some(1 << (SNAP_BITS - 2)));
        assert_eq!(snap(0.5 + 1e-15), Some(1 << (SNAP_BITS - 1)));
        assert_eq!(snap(1.0 / 3.0), None);
    }

    #[test]
    fn bare_h2_closed_form() {
        let r = evaluate_exact(&bare_h2(Pauli::X), Strategy::Merged).unwrap();
        assert_eq!(ints(r.correct.numerator()), vec![0, 1, -2, 2]);
        assert_eq!(ints(r.correct.denominator()), vec![1]);
        assert_eq!(r.tallies.patterns, 32);
    }

    #[test]
    fn strategies_agree() {
        for pauli in Pauli::ALL {
            let prog = bare_h2(pauli);
            let a = merged_tallies(&prog).unwrap();
            for split_bits in [0, 2, 5] {
                for reverse in [false, true] {
                    let b = enumerate_patterns(&prog, EnumerationOptions { split_bits, reverse }).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn normalization_is_one() {
        let t = merged_tallies(&bare_h2(Pauli::Y)).unwrap();
        assert_eq!(t.normalization(), Poly::one());
    }

    #[test]
    fn mixture_matches_polynomials() {
        let prog = bare_h2(Pauli::X);
        let mix = output_mixture(&prog, 0.8).unwrap();
        let r = evaluate_exact(&prog, Strategy::Merged).unwrap();
        let v = crate::statekit::overlap(&mix, &prog.measurement().ideal).unwrap();
        assert!((v - r.correct.eval(0.8)).abs() < 1e-12);
    }

    #[test]
    fn bound_enforced() {
        let mut text = String::from("qubits 1\n");
        for _ in 0..25 {
            text.push_str("error 1\n");
        }
        let doc = parse_circuit(&text).unwrap();
        let spec = MeasurementSpec::new(Projector::onto(PureState::zero(1).unwrap()), None).unwrap();
        let prog = compile(&doc.circuit, &spec, &ErrorModel::explicit(Pauli::X), &NoModes).unwrap();
        assert!(matches!(merged_tallies(&prog), Err(NoiseError::TooManyLocations { .. })));
    }
}

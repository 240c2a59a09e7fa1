//! Monte Carlo estimation of the correct-output probability.
//!
//! Samples are grouped into fixed chunks of [`MC_CHUNK`]. Chunk `c` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `c`, so results
//! depend only on the master seed, never on the number of workers.
//!
//! Each sample fires every location independently with probability `1 − p`
//! and records `a = Tr[P_ideal ρ]` and `b = Tr[P_post ρ]` of the resulting
//! pure state. The estimate is the ratio `Σa / Σb` with a delta-method
//! standard error.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::snap;
use super::{NoiseError, Program, Result, Step};
use crate::statekit::{Gate, MAX_QUBITS};

/// Samples per independently seeded stream.
pub const MC_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Expected number of post-selected samples, `Σ b`.
    pub accepted: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
}

impl Moments {
    fn push(&mut self, a: f64, b: f64) {
        self.n += 1;
        self.a += a;
        self.b += b;
        self.aa += a * a;
        self.bb += b * b;
        self.ab += a * b;
    }

    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.a += o.a;
        self.b += o.b;
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
    }
}

/// Snaps dyadic traces so that noiseless runs give exactly zero variance.
fn clean(v: f64) -> f64 {
    snap(v).map_or(v, |n| n as f64 / (1u64 << super::SNAP_BITS) as f64)
}

fn run_chunk(program: &Program, eps: f64, seed: u64, chunk: u64, len: u64) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let n = program.n_qubits();
    let dim = 1 << n;
    let errors: Vec<_> = (0..n).map(|q| Gate::pauli(program.pauli(), q)).collect();
    let m = program.measurement();
    let mut moments = Moments::default();
    let mut amps = [Complex64::zero(); 1 << MAX_QUBITS];
    for _ in 0..len {
        amps.fill(Complex64::zero());
        amps[0] = Complex64::one();
        for step in program.steps() {
            match step {
                Step::Gate(g) => g.apply_unchecked(n, &mut amps[..dim]),
                Step::Location(q) => {
                    if rng.random::<f64>() < eps {
                        errors[*q].apply_unchecked(n, &mut amps[..dim]);
                    }
                }
            }
        }
        let a = clean(m.ideal.expectation_unchecked(&amps[..dim]));
        let b = m.postselect.as_ref().map_or(1.0, |p| clean(p.expectation_unchecked(&amps[..dim])));
        moments.push(a, b);
    }
    moments
}

/// Estimates `F_p` from `n_samples` sampled error patterns.
pub fn mc_correct_probability(program: &Program, p: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::InvalidProbability(p));
    }
    if n_samples == 0 {
        return Err(NoiseError::NoSamples);
    }
    let eps = 1.0 - p;
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(n_samples - c * MC_CHUNK);
            run_chunk(program, eps, seed, c, len)
        })
        .collect();
    let mut total = Moments::default();
    for part in &parts {
        total.merge(part);
    }
    if total.b <= 0.0 {
        return Err(NoiseError::NoAcceptedSamples);
    }
    let n = total.n as f64;
    let r = total.a / total.b;
    let stderr = if total.n > 1 {
        let resid = (total.aa - 2.0 * r * total.ab + r * r * total.bb).max(0.0);
        let mean_b = total.b / n;
        (resid / (n - 1.0) / n).sqrt() / mean_b
    } else {
        0.0
    };
    Ok(McEstimate { estimate: r, stderr, samples: total.n, accepted: total.b })
}

//! Reference evaluation by dense density-matrix channel evolution.
//!
//! Deliberately shares nothing with the pattern engines beyond the program
//! description: gates become full Kronecker-product matrices and each
//! location applies `ρ → p ρ + (1 − p) E ρ E†` directly.

use super::{NoiseError, Program, Result, Step};
use crate::statekit::{Gate, Matrix, PureState};

/// `ρ_out` at success probability `p`.
pub fn channel_density_matrix(program: &Program, p: f64) -> Result<Matrix<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::InvalidProbability(p));
    }
    let n = program.n_qubits();
    let errors = (0..n)
        .map(|q| Gate::pauli(program.pauli(), q).full_matrix(n))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut rho = PureState::<f64>::zero(n)?.density_matrix();
    for step in program.steps() {
        rho = match step {
            Step::Gate(g) => {
                let u = g.full_matrix(n)?;
                u.mul(&rho)?.mul(&u.adjoint())?
            }
            Step::Location(q) => {
                let e = &errors[*q];
                let flipped = e.mul(&rho)?.mul(&e.adjoint())?;
                rho.scale(p).add(&flipped.scale(1.0 - p))?
            }
        };
    }
    Ok(rho)
}

/// `Tr[P_ideal ρ] / Tr[P_post ρ]` from the dense channel.
pub fn channel_correct_probability(program: &Program, p: f64) -> Result<f64> {
    let rho = channel_density_matrix(program, p)?;
    let m = program.measurement();
    let num = m.ideal.trace_with(&rho)?;
    let den = match &m.postselect {
        Some(post) => post.trace_with(&rho)?,
        None => rho.trace().re,
    };
    if den <= 0.0 {
        return Err(NoiseError::DenominatorZero);
    }
    Ok(num / den)
}

use num_rational::BigRational;
use num_traits::{One, Zero};

use ftqed::analysis::{
    compare, exact_model, find_threshold, fit_error_rate, sweep, FitObjective, ThresholdOptions, ThresholdStatus,
};
use ftqed::protocols::{build_protocol, single_errors_detected, ProtocolName, Registry};
use ftqed::statekit::Pauli;

const ENCODED: [ProtocolName; 3] = [ProtocolName::Prep, ProtocolName::H2, ProtocolName::Cnot21H2];

#[test]
fn advantage_vanishes_at_p_one_and_is_defined_near_zero() {
    let r = Registry::bundled();
    for name in ENCODED {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            let cmp = compare(name, pauli, &r).unwrap();
            assert_eq!(cmp.d_exact(&BigRational::one()), Some(BigRational::zero()), "{name}");
            assert!(cmp.d_exact(&BigRational::zero()).is_some(), "{name} {pauli:?}");
            let near = cmp.d(1e-6);
            assert!(near.is_finite() && near.abs() <= 1.0);
        }
    }
}

#[test]
fn threshold_is_stable_under_grid_refinement() {
    let r = Registry::bundled();
    for name in ENCODED {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            let cmp = compare(name, pauli, &r).unwrap();
            let coarse = find_threshold(&cmp, ThresholdOptions::default()).unwrap();
            let fine = find_threshold(&cmp, ThresholdOptions { step: 5e-4, ..Default::default() }).unwrap();
            assert_eq!(coarse.status, fine.status, "{name} {pauli:?}");
            if let (Some(a), Some(b)) = (coarse.p_star, fine.p_star) {
                assert!((a - b).abs() < 1e-6, "{name} {pauli:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn reported_bracket_straddles_the_root() {
    let r = Registry::bundled();
    for name in ENCODED {
        let cmp = compare(name, Pauli::X, &r).unwrap();
        let t = find_threshold(&cmp, ThresholdOptions::default()).unwrap();
        let (a, b) = t.bracket.unwrap();
        assert!(b - a <= 1e-6);
        assert!(cmp.d(a) * cmp.d(b) < 0.0);
        assert!(t.residual.unwrap() <= 1e-9);
        // The exact sign change at p = 1/2 is listed, not reported.
        assert!(t.other_roots.iter().any(|&x| (x - 0.5).abs() < 1e-12), "{name}: {:?}", t.other_roots);
    }
}

#[test]
fn y_errors_have_a_second_low_root() {
    let r = Registry::bundled();
    let t = find_threshold(&compare(ProtocolName::H2, Pauli::Y, &r).unwrap(), ThresholdOptions::default()).unwrap();
    assert_eq!(t.status, ThresholdStatus::Found);
    assert_eq!(t.other_roots.len(), 1);
    assert!(t.other_roots[0] < 0.05);
}

#[test]
fn restricted_interval_finds_lower_roots() {
    let r = Registry::bundled();
    let cmp = compare(ProtocolName::H2, Pauli::X, &r).unwrap();
    let t = find_threshold(&cmp, ThresholdOptions { lo: 0.2, hi: 0.9, ..Default::default() }).unwrap();
    assert_eq!(t.status, ThresholdStatus::Found);
    assert!((t.p_star.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn encoded_sweep_crosses_bare_once_near_threshold() {
    let r = Registry::bundled();
    let cmp = compare(ProtocolName::H2, Pauli::X, &r).unwrap();
    let s = sweep(&cmp, 0.95, 1.0, 501).unwrap();
    let interior = &s.rows[..s.rows.len() - 1];
    let crossings = interior.windows(2).filter(|w| (w[0].d < 0.0) != (w[1].d < 0.0)).count();
    assert_eq!(crossings, 1);
    let at = interior.windows(2).find(|w| (w[0].d < 0.0) != (w[1].d < 0.0)).unwrap()[1].p;
    assert!((at - 0.978).abs() <= 0.003);
    for row in &s.rows {
        for v in [row.encoded, row.bare] {
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn noiseless_distribution_fits_to_one() {
    let r = Registry::bundled();
    for name in ENCODED {
        let model = exact_model(name, Pauli::X, &r).unwrap();
        let noiseless = model.mode_distribution(1.0);
        let fit = fit_error_rate(&noiseless, &model, FitObjective::LeastSquares).unwrap();
        assert!((fit.p_hat - 1.0).abs() < 1e-6, "{name}: {fit:?}");
    }
}

#[test]
fn fit_tolerates_renormalized_counts() {
    let r = Registry::bundled();
    let model = exact_model(ProtocolName::H2, Pauli::X, &r).unwrap();
    // Integer counts of the ε = 0.03 distribution, renormalized.
    let exact = model.mode_distribution(0.97);
    let counts: Vec<f64> = exact.iter().map(|x| (x * 1e7).round()).collect();
    let total: f64 = counts.iter().sum();
    let observed: Vec<f64> = counts.iter().map(|c| c / total).collect();
    for objective in [FitObjective::LeastSquares, FitObjective::Likelihood] {
        let fit = fit_error_rate(&observed, &model, objective).unwrap();
        assert!((fit.p_hat - 0.97).abs() < 1e-3, "{objective:?}: {fit:?}");
    }
}

#[test]
fn weight_one_errors_are_detected_for_every_encoded_output() {
    let r = Registry::bundled();
    for name in ENCODED {
        let out = build_protocol(name, &r).unwrap().program(Pauli::X, &r).unwrap().noiseless_output();
        assert!(single_errors_detected(&out, Pauli::X), "{name}");
        assert!(single_errors_detected(&out, Pauli::Y), "{name}");
        // Z flips no bits, so parity checks cannot see it.
        assert!(!single_errors_detected(&out, Pauli::Z), "{name}");
    }
}

#[test]
fn bare_and_encoded_share_the_logical_action() {
    let r = Registry::bundled();
    for name in ENCODED {
        let enc = build_protocol(name, &r).unwrap();
        let bare = build_protocol(name.pair().1, &r).unwrap();
        let image = r.codebook().encode(&bare.ideal_output).unwrap();
        assert!((enc.ideal_output.fidelity(&image).unwrap() - 1.0).abs() < 1e-12, "{name}");
        assert!((bare.ideal_output.fidelity(&name.ideal_logical()).unwrap() - 1.0).abs() < 1e-12);
    }
}

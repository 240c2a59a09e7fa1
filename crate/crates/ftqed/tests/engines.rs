use ftqed::noise::{
    channel_correct_probability, channel_density_matrix, evaluate_exact, mc_correct_probability, output_mixture,
    EnumerationOptions, Exactness, NoiseError, Program, Strategy, MC_CHUNK,
};
use ftqed::protocols::{build_protocol, ProtocolName, Registry};
use ftqed::statekit::{overlap, Pauli};

fn program(name: ProtocolName, pauli: Pauli) -> Program {
    let r = Registry::bundled();
    build_protocol(name, &r).unwrap().program(pauli, &r).unwrap()
}

#[test]
fn exact_engines_agree_with_dense_channel_for_every_pauli() {
    for name in ProtocolName::ALL {
        for pauli in [Pauli::Y, Pauli::Z] {
            let prog = program(name, pauli);
            let f = evaluate_exact(&prog, Strategy::Merged).unwrap();
            assert_eq!(f.correct.exactness(), Exactness::Exact);
            for p in [0.3, 0.7, 0.9, 0.97, 0.99] {
                let dense = channel_correct_probability(&prog, p).unwrap();
                assert!((f.correct.eval(p) - dense).abs() < 1e-12, "{name} {pauli:?} p={p}");
            }
        }
    }
}

#[test]
fn enumeration_order_does_not_change_tallies() {
    let prog = program(ProtocolName::H2, Pauli::X);
    let base = evaluate_exact(&prog, Strategy::Merged).unwrap().tallies;
    for split_bits in [0, 3, 11] {
        for reverse in [false, true] {
            let t = evaluate_exact(&prog, Strategy::Patterns(EnumerationOptions { split_bits, reverse })).unwrap().tallies;
            assert_eq!(t.ideal, base.ideal);
            assert_eq!(t.accepted, base.accepted);
            assert_eq!(t.patterns, 1u128 << prog.n_locations());
        }
    }
}

#[test]
fn mixture_and_density_matrix_agree() {
    let prog = program(ProtocolName::Cnot21H2, Pauli::X);
    let p = 0.95;
    let mix = output_mixture(&prog, p).unwrap();
    let rho = channel_density_matrix(&prog, p).unwrap();
    assert!(mix.density_matrix().max_deviation(&rho) < 1e-12);
    let ideal = &prog.measurement().ideal;
    assert!((overlap(&mix, ideal).unwrap() - ideal.trace_with(&rho).unwrap()).abs() < 1e-12);
}

#[test]
fn post_selection_probability_is_one_at_p_equal_one() {
    for name in [ProtocolName::Prep, ProtocolName::H2, ProtocolName::Cnot21H2] {
        let res = evaluate_exact(&program(name, Pauli::X), Strategy::Merged).unwrap();
        assert!(res.correct.is_postselected());
        assert!((res.accepted.eval_f64(1.0) - 1.0).abs() < 1e-15);
        let total: f64 = res.mode_distribution(0.9).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_is_reproducible_and_worker_independent() {
    let prog = program(ProtocolName::H2, Pauli::X);
    let n = 3 * MC_CHUNK + 17;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_correct_probability(&prog, 0.95, n, 42).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    assert_eq!(a.samples, n);
    let c = mc_correct_probability(&prog, 0.95, n, 43).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn monte_carlo_edge_cases() {
    let prog = program(ProtocolName::H2, Pauli::X);
    let e = mc_correct_probability(&prog, 1.0, 1000, 0).unwrap();
    assert_eq!((e.estimate, e.stderr), (1.0, 0.0));
    assert!(matches!(mc_correct_probability(&prog, 1.5, 10, 0), Err(NoiseError::InvalidProbability(_))));
    assert!(matches!(mc_correct_probability(&prog, 0.5, 0, 0), Err(NoiseError::NoSamples)));
}

#[test]
fn monte_carlo_at_095_covers_exact_value() {
    let prog = program(ProtocolName::Cnot21H2, Pauli::X);
    let truth = evaluate_exact(&prog, Strategy::Merged).unwrap().correct.eval(0.95);
    let hits = (0..50u64)
        .filter(|&seed| {
            let e = mc_correct_probability(&prog, 0.95, 20_000, seed).unwrap();
            (e.estimate - truth).abs() <= 3.0 * e.stderr
        })
        .count();
    assert!(hits >= 47, "{hits}/50");
}

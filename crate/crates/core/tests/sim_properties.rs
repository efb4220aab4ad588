use cvqd_core::problem::{qubo_to_ising, IsingModel, QuboModel, Sense};
use cvqd_core::sim::{apply_circuit, diag_expectation, sample, Angle, Circuit, Gate, Statevector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state_strategy(n: usize) -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n).prop_filter_map("zero vector", |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        Statevector::from_amplitudes(amps).ok()
    })
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let angle = (-7.0..7.0f64).prop_map(Angle::Fixed);
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    prop_oneof![
        q.clone().prop_map(|qubit| Gate::X { qubit }),
        q.clone().prop_map(|qubit| Gate::H { qubit }),
        (q.clone(), angle.clone()).prop_map(|(qubit, angle)| Gate::Rx { qubit, angle }),
        (q.clone(), angle.clone()).prop_map(|(qubit, angle)| Gate::Ry { qubit, angle }),
        (q, angle.clone()).prop_map(|(qubit, angle)| Gate::Rz { qubit, angle }),
        pair.clone().prop_map(|(control, target)| Gate::Cnot { control, target }),
        (pair, angle).prop_map(|((a, b), angle)| Gate::Zz { a, b, angle }),
    ]
}

fn one_gate(n: usize, g: Gate) -> Circuit {
    let mut c = Circuit::new(n);
    c.push(g).unwrap();
    c
}

fn max_diff(a: &Statevector, b: &Statevector) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_ising(n: usize, seed: u64) -> IsingModel {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lin = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j, rng.random_range(-5.0..5.0)));
        }
    }
    qubo_to_ising(&QuboModel::new(1.0, lin, pairs, Sense::Minimize).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_preserved_after_every_gate(
        psi in state_strategy(4),
        gates in prop::collection::vec(gate_strategy(4), 1..30),
    ) {
        let mut psi = psi;
        for g in gates {
            psi = apply_circuit(&one_gate(4, g), &[], &psi).unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn cnot_is_an_involution(psi in state_strategy(3), c in 0usize..3, d in 1usize..3) {
        let g = Gate::Cnot { control: c, target: (c + d) % 3 };
        let mut twice = Circuit::new(3);
        twice.push(g).unwrap();
        twice.push(g).unwrap();
        let out = apply_circuit(&twice, &[], &psi).unwrap();
        prop_assert!(max_diff(&out, &psi) <= 1e-12);
    }

    #[test]
    fn ry_angles_add(psi in state_strategy(1), a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let mut two = Circuit::new(1);
        two.push(Gate::Ry { qubit: 0, angle: Angle::Fixed(a) }).unwrap();
        two.push(Gate::Ry { qubit: 0, angle: Angle::Fixed(b) }).unwrap();
        let sum = one_gate(1, Gate::Ry { qubit: 0, angle: Angle::Fixed(a + b) });
        let lhs = apply_circuit(&two, &[], &psi).unwrap();
        let rhs = apply_circuit(&sum, &[], &psi).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn expectation_lies_within_the_spectrum(psi in state_strategy(5), seed in any::<u64>()) {
        let m = random_ising(5, seed);
        let diag = m.diagonal().unwrap();
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e = diag_expectation(&m, &psi).unwrap();
        let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        prop_assert!(e >= lo - tol && e <= hi + tol, "{lo} <= {e} <= {hi}");
    }

    #[test]
    fn histogram_counts_sum_to_shots(psi in state_strategy(4), shots in 1u64..5000, seed in any::<u64>()) {
        let h = sample(&psi, shots, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(h.counts().values().sum::<u64>(), shots);
        prop_assert_eq!(h.shots(), shots);
        prop_assert!(h.counts().keys().all(|&k| k < 16));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    // Mean of 100 independent 10^4-shot estimates against the exact value,
    // 5 standard errors of the pooled mean.
    #[test]
    fn sampled_energy_is_unbiased(psi in state_strategy(4), seed in any::<u64>()) {
        let m = random_ising(4, seed);
        let diag = m.diagonal().unwrap();
        let probs = psi.probabilities();
        let exact = diag_expectation(&m, &psi).unwrap();
        let var: f64 = probs.iter().zip(&diag).map(|(p, e)| p * (e - exact).powi(2)).sum();
        let (runs, shots) = (100u64, 10_000u64);
        let mean = (0..runs)
            .map(|r| {
                let h = sample(&psi, shots, &mut ChaCha8Rng::seed_from_u64(seed ^ r)).unwrap();
                h.mean_energy(&m).unwrap()
            })
            .sum::<f64>()
            / runs as f64;
        let sigma = (var / (runs * shots) as f64).sqrt();
        prop_assert!((mean - exact).abs() <= 5.0 * sigma + 1e-12, "mean {mean} exact {exact} sigma {sigma}");
    }
}

#[test]
fn basic_gate_examples() {
    let zero = Statevector::zero_state(1).unwrap();
    let flipped =
        apply_circuit(&one_gate(1, Gate::Ry { qubit: 0, angle: Angle::Fixed(std::f64::consts::PI) }), &[], &zero)
            .unwrap();
    assert!((flipped.probability(1) - 1.0).abs() < 1e-12);

    let mut hh = Circuit::new(2);
    hh.push(Gate::H { qubit: 0 }).unwrap();
    hh.push(Gate::H { qubit: 1 }).unwrap();
    let plus = apply_circuit(&hh, &[], &Statevector::zero_state(2).unwrap()).unwrap();
    for a in plus.amplitudes() {
        assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    let psi = Statevector::uniform(3).unwrap();
    assert_eq!(apply_circuit(&Circuit::new(3), &[], &psi).unwrap(), psi);
}

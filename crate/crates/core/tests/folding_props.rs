mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use zne_core::circuit::cnot_chain;
use zne_core::folding::{
    fold_count, fold_from_left, fold_global, fold_noise_aware, fold_random, FoldPlacement,
    NoiseAwareOptions,
};
use zne_core::simulator::simulate_exact;
use zne_core::{fold, Circuit, FoldMethod, FoldOptions, Gate, NoiseModel};

/// Pair totals recomputed from the gate list.
fn pair_totals(c: &Circuit, model: &NoiseModel) -> std::collections::BTreeMap<(usize, usize), f64> {
    let mut out = std::collections::BTreeMap::new();
    for g in c.gates() {
        if let Some((a, b)) = g.pair() {
            let units = if matches!(g, Gate::Swap(..)) { 3.0 } else { 1.0 };
            *out.entry((a, b)).or_insert(0.0) += units * model.error(a, b).unwrap();
        }
    }
    out
}

/// Fold count by adding one `CX·CX` at a time.
fn brute_force_folds(base: f64, e: f64, limit: f64) -> usize {
    let mut total = base;
    let mut folds = 0;
    while total + 2.0 * e <= limit {
        total += 2.0 * e;
        folds += 1;
    }
    folds
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folding_preserves_the_state(seed in any::<u64>(), n in 1usize..6, len in 1usize..12, lambda in 1.0f64..4.0) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, len);
        let model = complete_model(&mut r, n, 1e-3, 3e-2);
        let reference = simulate_exact(&c).unwrap();
        for m in FoldMethod::ALL {
            let folded = fold(m, &c, lambda, &model, &FoldOptions { seed, ..Default::default() }).unwrap();
            let sv = simulate_exact(&folded.circuit).unwrap();
            prop_assert!(overlap(reference.amplitudes(), sv.amplitudes()) > 1.0 - 1e-9);
            prop_assert!(folded.circuit.is_measured());
            prop_assert_eq!(
                folded.circuit.unitary_part().len() - folded.circuit.fold_inserted_count(),
                c.unitary_part().len()
            );
        }
    }

    #[test]
    fn gate_count_law(d in 1usize..25, lambda in 1.0f64..5.0, seed in any::<u64>()) {
        let c = Circuit::from_gates(2, (0..d).map(|q| if q % 2 == 0 { Gate::H(0) } else { Gate::Cx(0, 1) })).unwrap();
        let k = fold_count(d, lambda);
        let expected = d * (2 * (k / d) + 1) + 2 * (k % d);
        prop_assert_eq!(fold_global(&c, lambda).unwrap().unitary_part().len(), expected);
        prop_assert_eq!(fold_from_left(&c, lambda).unwrap().unitary_part().len(), expected);
        prop_assert_eq!(fold_random(&c, lambda, seed).unwrap().unitary_part().len(), expected);
    }

    #[test]
    fn noise_aware_matches_brute_force(seed in any::<u64>(), n in 2usize..6, len in 1usize..16, lambda in 1.0f64..6.0, gamma in 0.5f64..3.0) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, n, len);
        let model = complete_model(&mut r, n, 1e-3, 3e-2);
        let opts = NoiseAwareOptions { gamma, ..Default::default() };
        let na = fold_noise_aware(&c, lambda, &model, &opts).unwrap();

        let before = pair_totals(&c, &model);
        let after = pair_totals(&na.circuit, &model);
        let eps_c = before.values().copied().fold(0.0, f64::max);
        let eps_max = (eps_c + eps_c * lambda) / gamma;
        prop_assert!((na.threshold.epsilon_max - eps_max).abs() <= 1e-15 * eps_max.max(1.0));
        let limit = eps_max * (1.0 + 1e-9);
        for (&(a, b), &base) in &before {
            let e = model.error(a, b).unwrap();
            let expected = if lambda == 1.0 { 0 } else { brute_force_folds(base, e, limit) };
            let total = after[&(a, b)];
            prop_assert!((total - (base + 2.0 * e * expected as f64)).abs() < 1e-12);
            // With gamma > 2 the threshold can sit below a pair's base rate;
            // nothing is folded there and the bounds do not apply.
            if lambda > 1.0 && base <= limit {
                prop_assert!(total <= limit);
                prop_assert!(total + 2.0 * e > limit);
            }
        }
        prop_assert!(overlap(
            simulate_exact(&c).unwrap().amplitudes(),
            simulate_exact(&na.circuit).unwrap().amplitudes()
        ) > 1.0 - 1e-9);
    }

    #[test]
    fn noise_aware_is_monotone_in_lambda(seed in any::<u64>(), l1 in 1.0f64..4.0, dl in 0.0f64..3.0) {
        let mut r = rng(seed);
        let c = random_circuit(&mut r, 4, 14);
        let model = complete_model(&mut r, 4, 1e-3, 3e-2);
        let opts = NoiseAwareOptions::default();
        let lo = fold_noise_aware(&c, l1, &model, &opts).unwrap();
        let hi = fold_noise_aware(&c, l1 + dl, &model, &opts).unwrap();
        for (p, q) in lo.pairs.iter().zip(&hi.pairs) {
            prop_assert_eq!(p.pair, q.pair);
            prop_assert!(q.folds >= p.folds);
        }
    }
}

#[test]
fn every_method_is_identity_at_scale_one() {
    let mut r = rng(3);
    for _ in 0..50 {
        let n = r.gen_range(2..6);
        let len = r.gen_range(1..15);
        let c = random_circuit(&mut r, n, len);
        let model = complete_model(&mut r, n, 1e-3, 5e-2);
        for m in FoldMethod::ALL {
            let f = fold(m, &c, 1.0, &model, &FoldOptions::default()).unwrap();
            assert_eq!(f.circuit, c, "{m}");
        }
    }
}

#[test]
fn uniform_closed_form() {
    // c CX gates on a single pair: folds = floor(c (lambda - 1) / 4).
    for c_gates in 1..6 {
        let c = Circuit::from_gates(2, vec![Gate::Cx(0, 1); c_gates]).unwrap();
        let model = NoiseModel::uniform_line(2, 0.01).unwrap();
        for step in 0..=12 {
            let lambda = 1.0 + 0.5 * step as f64;
            let na = fold_noise_aware(&c, lambda, &model, &NoiseAwareOptions::default()).unwrap();
            let expected = (c_gates as f64 * (lambda - 1.0) / 4.0 + 1e-9).floor() as usize;
            assert_eq!(na.total_folds(), expected, "c={c_gates} lambda={lambda}");
        }
    }
}

#[test]
fn append_placement_moves_folds_to_the_end() {
    let c = Circuit::from_gates(3, [Gate::Cx(0, 1), Gate::Cx(1, 2), Gate::H(0), Gate::MeasureAll]).unwrap();
    let model = NoiseModel::line(&[0.01, 0.03]).unwrap();
    let opts = NoiseAwareOptions {
        placement: FoldPlacement::Append,
        ..Default::default()
    };
    let na = fold_noise_aware(&c, 3.0, &model, &opts).unwrap();
    let ops = na.circuit.unitary_part();
    assert_eq!(&ops[..3].iter().map(|o| o.gate).collect::<Vec<_>>(), &[Gate::Cx(0, 1), Gate::Cx(1, 2), Gate::H(0)]);
    assert!(ops[3..].iter().all(|o| o.fold_inserted && o.gate == Gate::Cx(0, 1)));
    assert_eq!(ops.len() - 3, 2 * na.total_folds());
}

#[test]
fn rejects_bad_parameters() {
    let c = cnot_chain(3).unwrap();
    let model = NoiseModel::uniform_line(3, 0.01).unwrap();
    for m in FoldMethod::ALL {
        assert!(fold(m, &c, 0.5, &model, &FoldOptions::default()).is_err());
        assert!(fold(m, &c, f64::NAN, &model, &FoldOptions::default()).is_err());
    }
    let opts = NoiseAwareOptions { gamma: 0.0, ..Default::default() };
    assert!(fold_noise_aware(&c, 2.0, &model, &opts).is_err());
    let off_topology = Circuit::from_gates(3, [Gate::Cx(0, 2)]).unwrap();
    assert!(fold_noise_aware(&off_topology, 2.0, &model, &NoiseAwareOptions::default()).is_err());
}

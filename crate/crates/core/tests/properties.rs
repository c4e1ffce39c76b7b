use proptest::prelude::*;
use switchlab_core::channel::{bloch_measurement, joint_switch_instrument, validate_instrument, y_measurement};
use switchlab_core::dist::{bits, Given};
use switchlab_core::hco::{random_probabilistic_hco, ModelFamily, RandomHcoSpec};
use switchlab_core::inequality::{eval_bc, eval_causal_mermin_table};
use switchlab_core::linalg::{c, kets, projector};
use switchlab_core::scenario::{GHZ_SWITCH_INPUTS, GHZ_SWITCH_OUTPUTS};
use switchlab_core::suite::{chain_property_slack, mermin_property_slack, random_table_and_events};
use switchlab_core::{ControlBasis, Event, Matrix, ProbTable, Table, VarSpec};

fn qubit_state() -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let psi = Matrix::column(&[c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n)]);
            projector(&psi).unwrap()
        })
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        })
}

fn basis() -> impl Strategy<Value = ControlBasis> {
    prop_oneof![Just(ControlBasis::XBasis), Just(ControlBasis::ZBasis)]
}

/// A normalized table over `vars` from arbitrary nonnegative weights.
fn prob_table(vars: Vec<VarSpec>, weights: Vec<f64>) -> ProbTable {
    let total: f64 = weights.iter().sum();
    Table::new(vars, weights.iter().map(|w| w / total).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_instrument_is_an_instrument(
        x1 in 0u8..2, x2 in 0u8..2, b in basis(), target in qubit_state(), rho in qubit_state(),
    ) {
        let inst = joint_switch_instrument(x1, x2, &y_measurement(), b, &target).unwrap();
        prop_assert!(validate_instrument(&inst).pass);
        let probs = inst.probabilities(&rho).unwrap();
        let sum: f64 = probs.iter().map(|(_, p)| p).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        for (_, p) in probs {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn outcome_zero_at_unit_settings_tracks_plus_overlap(rho in qubit_state()) {
        let target = projector(&kets::zero()).unwrap();
        let inst = joint_switch_instrument(1, 1, &y_measurement(), ControlBasis::XBasis, &target).unwrap();
        let p0: f64 = inst.probabilities(&rho).unwrap().iter().filter(|(o, _)| o[0] == 0).map(|(_, p)| p).sum();
        let want = (rho.get(0, 0) + rho.get(0, 1) + rho.get(1, 0) + rho.get(1, 1)).re / 2.0;
        prop_assert!((p0 - want).abs() < 1e-12);
    }

    #[test]
    fn bloch_measurement_follows_born_rule(n in unit_vector(), r in unit_vector()) {
        let m = bloch_measurement(n).unwrap();
        prop_assert!(validate_instrument(&m).pass);
        // Pure state with Bloch vector r.
        let rho = Matrix::from_rows(&[
            &[c((1.0 + r[2]) / 2.0, 0.0), c(r[0] / 2.0, -r[1] / 2.0)],
            &[c(r[0] / 2.0, r[1] / 2.0), c((1.0 - r[2]) / 2.0, 0.0)],
        ]);
        let probs = m.probabilities(&rho).unwrap();
        let p0 = probs.iter().find(|(o, _)| o[0] == 0).unwrap().1;
        let dot = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
        prop_assert!((p0 - (1.0 + dot) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn marginals_preserve_mass(weights in prop::collection::vec(0.01f64..1.0, 24)) {
        let t = prob_table(vec![VarSpec::bit("p"), VarSpec::new("q", 3), VarSpec::new("r", 4)], weights);
        for keep in [&["p"][..], &["q", "r"], &["r", "p"], &[]] {
            let m = t.marginalize(keep).unwrap();
            prop_assert!((m.total() - 1.0).abs() < 1e-12);
        }
        let pr = t.marginalize(&["p", "r"]).unwrap();
        let via_q = t.sum_out(&["q"]).unwrap();
        prop_assert!(pr.max_abs_diff(&via_q).unwrap() < 1e-15);
    }

    #[test]
    fn possibility_shrinks_as_threshold_grows(
        weights in prop::collection::vec(0.0f64..1.0, 16), lo in 0.0f64..0.1, extra in 0.0f64..0.1,
    ) {
        let t = prob_table(bits(["p", "q", "r", "s"]), weights);
        let loose = t.possibilize(lo);
        let strict = t.possibilize(lo + extra);
        for (s, l) in strict.values().iter().zip(loose.values()) {
            prop_assert!(!s || *l);
        }
    }

    #[test]
    fn product_tables_are_independent(
        a in prop::collection::vec(0.01f64..1.0, 4), b in prop::collection::vec(0.01f64..1.0, 3),
    ) {
        let pa = prob_table(vec![VarSpec::bit("p"), VarSpec::bit("q")], a);
        let pb = prob_table(vec![VarSpec::new("r", 3)], b);
        let joint = pa.product(&pb).unwrap();
        let rep = joint.check_independence(&["p", "q"], &["r"], Given::Nothing).unwrap();
        prop_assert!(rep.independent);
        let rep = joint.check_independence(&["p"], &["r"], Given::Vars(&["q"])).unwrap();
        prop_assert!(rep.independent);
    }

    #[test]
    fn joint_lower_bound_holds(seed in any::<u64>()) {
        let (t, events) = random_table_and_events(seed).unwrap();
        let lb = t.joint_lower_bound(&events).unwrap();
        prop_assert!(lb.holds);
        prop_assert!(lb.lhs <= lb.rhs + 1e-12);
    }

    #[test]
    fn lower_bound_is_tight_for_disjoint_complements(w in prop::collection::vec(0.01f64..1.0, 4)) {
        // Events {p=0} and {p=1} never co-occur, so the bound reads 1 ≤ 0 + 1.
        let t = prob_table(bits(["p", "q"]), w);
        let lb = t
            .joint_lower_bound(&[Event::assign([("p", 0)]), Event::assign([("p", 1)])])
            .unwrap();
        prop_assert!((lb.lhs - 1.0).abs() < 1e-12 && (lb.rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chained_expression_below_algebraic_max(n in 2usize..6, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let k = n + 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Arbitrary conditional R(a, b | x3, y): one random 4-outcome distribution per setting.
        let mut values = vec![0.0; 4 * k * k];
        for s in 0..k * k {
            let w: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let sum: f64 = w.iter().sum();
            for (o, wi) in w.iter().enumerate() {
                values[o * k * k + s] = wi / sum;
            }
        }
        let r = Table::new(
            vec![VarSpec::bit("a"), VarSpec::bit("b"), VarSpec::new("x3", k), VarSpec::new("y", k)],
            values,
        )
        .unwrap();
        let bc = eval_bc(&r, n).unwrap();
        prop_assert!(bc <= (2 * n + 1) as f64 + 1e-12);
        prop_assert!(bc >= -1.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mermin_expression_below_algebraic_max(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vars = bits(GHZ_SWITCH_OUTPUTS.into_iter().chain(GHZ_SWITCH_INPUTS));
        let weights: Vec<f64> = (0..1 << 15).map(|_| rng.gen::<f64>() + 1e-6).collect();
        let rep = eval_causal_mermin_table(&prob_table(vars, weights)).unwrap();
        prop_assert!(rep.total <= 4.0 + 1e-12);
    }

    #[test]
    fn random_mermin_models_respect_bound_and_claim(seed in any::<u64>()) {
        let s = seed % (1 << 40);
        let (bound, claim) = mermin_property_slack(s..s + 1).unwrap();
        prop_assert!(bound >= -1e-9 && claim >= -1e-9);
    }

    #[test]
    fn random_chain_models_respect_bound(seed in any::<u64>(), n in 2usize..5) {
        let s = seed % (1 << 40);
        prop_assert!(chain_property_slack(n, s..s + 1).unwrap() >= -1e-9);
    }

    #[test]
    fn random_models_are_reproducible(seed in any::<u64>()) {
        let spec = RandomHcoSpec { seed, n: 3, family: ModelFamily::Chained };
        let a = random_probabilistic_hco(&spec).unwrap();
        let b = random_probabilistic_hco(&spec).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}

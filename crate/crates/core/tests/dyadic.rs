use fhc_core::dyadic::*;
use fhc_core::weights::WeightFamily;
use proptest::prelude::*;

#[test]
fn identity_closed_form_to_2_20() {
    let scan = verify_closed_form(&ClosedFormRoute::Identity, 1 << 20).unwrap();
    assert_eq!(scan.checked, 1 << 20);
    assert!(scan.mismatches.is_empty(), "{:?}", &scan.mismatches[..1]);
}

#[test]
fn general_closed_form_to_2_16() {
    for f in [
        StepFunction::Identity,
        StepFunction::Tower(1),
        StepFunction::Tower(2),
    ] {
        let scan = verify_closed_form(&ClosedFormRoute::General(f.clone()), 1 << 16).unwrap();
        assert!(
            scan.mismatches.is_empty(),
            "{f}: {:?}",
            scan.mismatches.first()
        );
    }
}

#[test]
fn general_closed_form_custom_steps() {
    let f = StepFunction::custom(vec![1, 2, 5, 6, 11, 30]).unwrap();
    let scan = verify_closed_form(&ClosedFormRoute::General(f), 1 << 14).unwrap();
    assert!(scan.mismatches.is_empty());
}

#[test]
fn lambda_subsequence_is_exact() {
    for j in 0..=9 {
        assert_eq!(lambda_identity_residual(j).unwrap(), 0, "j = {j}");
    }
    assert_eq!(
        nk_closed_general(&StepFunction::Identity, lambda_index(2)).unwrap(),
        65
    );
}

#[test]
fn separation_exhaustive() {
    for f in [StepFunction::Identity, StepFunction::Tower(1)] {
        let rep = separation_check_exhaustive(&f, 1 << 14).unwrap();
        assert!(rep.holds, "{f}: {:?}", rep.witness);
        assert_eq!(rep.pairs_checked, (1u64 << 14) * ((1 << 14) - 1) / 2);
    }
}

#[test]
fn partition_classes_are_disjoint() {
    let a = partition_set(&StepFunction::Identity, 1, 1, 1 << 12)
        .unwrap()
        .elements_up_to(u64::MAX)
        .unwrap();
    let b = partition_set(&StepFunction::Identity, 2, 1, 1 << 12)
        .unwrap()
        .elements_up_to(u64::MAX)
        .unwrap();
    assert!(a.iter().all(|n| b.binary_search(n).is_err()));
}

#[test]
fn sandwich_at_geometric_samples() {
    let samples: Vec<u64> = (0..64)
        .map(|i| (2.0 * (1e6f64 / 2.0).powf(i as f64 / 63.0)).round() as u64)
        .collect();
    for f in [
        StepFunction::Identity,
        StepFunction::Tower(1),
        StepFunction::Tower(2),
    ] {
        let rows = sandwich_check(&f, &samples).unwrap();
        assert!(
            rows.iter().all(|r| r.holds),
            "{f}: {:?}",
            rows.iter().find(|r| !r.holds)
        );
    }
}

#[test]
fn cesaro_tail_ratio() {
    let rep =
        limit_ratio_report(&StepFunction::Identity, &WeightFamily::Cesaro, 1_000_000).unwrap();
    assert!((0.249..=0.2502).contains(&rep.tail_min), "{}", rep.tail_min);
}

#[test]
fn tower_positivity() {
    let rep = limit_ratio_report(
        &StepFunction::Tower(2),
        &WeightFamily::iterated_log(2).unwrap(),
        100_000,
    )
    .unwrap();
    assert!(rep.tail_min > 0.01, "{}", rep.tail_min);
}

#[test]
fn b_half_lambda_ratios_decrease() {
    let rep = limit_ratio_report(&StepFunction::Identity, &WeightFamily::B(0.5), 1 << 16).unwrap();
    assert!(rep.lambda_decreasing);
}

fn step_strategy() -> impl Strategy<Value = StepFunction> {
    prop_oneof![
        Just(StepFunction::Identity),
        (1u32..=3).prop_map(StepFunction::Tower)
    ]
}

proptest! {
    #[test]
    fn profile_reconstructs(k in 1u64..) {
        let p = DyadicProfile::new(k).unwrap();
        prop_assert_eq!(p.reconstruct(), k);
        prop_assert_eq!(p.delta, p.blocks[0].len);
        prop_assert_eq!(p.trailing_zeros, p.blocks[0].start);
        for w in p.blocks.windows(2) {
            prop_assert!(w[1].start > w[0].start + w[0].len);
        }
    }

    #[test]
    fn identity_routes_agree_at_large_k(k in 1u64..(1 << 60)) {
        prop_assert_eq!(nk_closed_identity(k).unwrap(), nk_closed_general(&StepFunction::Identity, k).unwrap());
    }

    #[test]
    fn increments_follow_recursion(f in step_strategy(), k in 2u64..(1 << 50)) {
        let a = nk_closed_general(&f, k - 1).unwrap();
        let b = nk_closed_general(&f, k).unwrap();
        prop_assert_eq!(b - a, (f.eval(delta(k - 1) as u64) + f.eval(delta(k) as u64)) as u128);
    }

    #[test]
    fn prefix_sum_increments(f in step_strategy(), l in 1u64..100_000) {
        prop_assert_eq!(f.prefix_sum(l) - f.prefix_sum(l - 1), f.eval(l) as u128);
        prop_assert!(f.eval(l) >= f.eval(l - 1));
    }

    #[test]
    fn notation_reconstructs_block_length(f in step_strategy(), k in 2u64..(1 << 40)) {
        for (b, note) in blocks(k).zip(notation_params(k, &f).unwrap()) {
            if let BlockNotation::Regular { len, t, p, s, m, .. } = note {
                prop_assert_eq!(len, b.len);
                if t < len as u64 {
                    let span = f.a_exact(m).unwrap() - f.a_exact(m - p).unwrap();
                    prop_assert!(s >= 0);
                    prop_assert_eq!(1 + t + span + s as u64, len as u64);
                }
            }
        }
    }

    #[test]
    fn sandwich_holds_at_random_k(f in step_strategy(), k in 2u64..(1 << 40)) {
        let row = &sandwich_check(&f, &[k]).unwrap()[0];
        prop_assert!(row.holds, "{:?}", row);
    }
}

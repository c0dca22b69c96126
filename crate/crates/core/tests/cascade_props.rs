use proptest::prelude::*;

use doubling_core::arith::{big, certify_leq, ratio, BoundedReal, Precision, Verdict};
use doubling_core::cascade::{
    cube_count, cube_count_bound, nu_stage, nu_stage_direct, stage_curve, stage_curves,
    CascadeParams, Joining,
};
use doubling_core::geometry::{is_connected, union_length};

const CAP: u64 = 200_000;

fn toy_params() -> impl Strategy<Value = CascadeParams> {
    (
        prop::sample::select(vec![ratio(1, 5), ratio(1, 4), ratio(3, 10)]),
        1u32..3,
        1u32..3,
    )
        .prop_map(|(delta, n1, k1)| CascadeParams::toy(delta, 2, n1, k1.min(n1)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_formula_matches_direct_sum(p in toy_params(), l in 0u32..3) {
        prop_assume!(cube_count(&p, l) <= 10_000u32.into());
        prop_assert_eq!(nu_stage(&p, l), nu_stage_direct(&p, l, CAP).unwrap());
    }

    #[test]
    fn stage_mass_shrinks_and_counts_are_bounded(p in toy_params()) {
        for l in 1..=4 {
            prop_assert!(nu_stage(&p, l) <= nu_stage(&p, l - 1));
            let count = BoundedReal::exact(big(&cube_count(&p, l)));
            let bound = cube_count_bound(&p, l, Precision::new(64)).unwrap();
            prop_assert_eq!(certify_leq(&count, &bound), Verdict::True);
        }
    }

    #[test]
    fn bridged_stages_grow_and_stay_connected(p in toy_params()) {
        let stages = stage_curves(&p, 2, Joining::Bridged, CAP).unwrap();
        for w in stages.windows(2) {
            prop_assert!(w[0].is_subset_of(&w[1]));
            prop_assert!(union_length(&w[0]) <= union_length(&w[1]));
        }
        prop_assert!(stages.iter().all(is_connected));
        prop_assert_eq!(stage_curve(&p, 2, CAP).unwrap(), stages[2].clone());
    }
}

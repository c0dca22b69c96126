use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;

use doubling_core::arith::{int, ratio, third_pow, Rational};
use doubling_core::kset::{
    component_count, count_k, enumerate_k, gap_count, gaps, length_k, mu_k, KSetSpec,
};
use doubling_core::measure::{
    adjacent_ratio_max, density_oracle, mu, mu_interval, nu, ternary_digits, MeasureParams,
    TriadicBox, TriadicInterval,
};

const DELTAS: [(i64, i64); 4] = [(1, 5), (1, 4), (3, 10), (1, 3)];

fn params(pick: usize, dim: usize) -> MeasureParams {
    let (p, q) = DELTAS[pick];
    MeasureParams::new(ratio(p, q), dim).unwrap()
}

/// Atom mass from the digit count, computed here without the library.
fn brute_mu(delta: &Rational, level: u32, index: u64) -> Rational {
    let (mut i, mut m) = (index, Rational::one());
    for _ in 0..level {
        m *= if i % 3 == 1 {
            Rational::one() - delta * int(2)
        } else {
            delta.clone()
        };
        i /= 3;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parent_is_sum_of_children(pick in 0usize..4, level in 0u32..12, index in -2000i64..2000) {
        let p = params(pick, 1);
        let iv = TriadicInterval::new(level, index);
        let kids: Rational = iv.children().iter().map(|c| mu(&p, c)).sum();
        prop_assert_eq!(mu(&p, &iv), kids);
    }

    #[test]
    fn atoms_match_digit_count(pick in 0usize..4, level in 0u32..10, raw in any::<u64>()) {
        let p = params(pick, 1);
        let index = raw % 3u64.pow(level);
        let expected = brute_mu(p.delta(), level, index);
        prop_assert_eq!(mu(&p, &TriadicInterval::new(level, index)), expected);
        let shifted = TriadicInterval::new(level, BigInt::from(index) + BigInt::from(5u64 * 3u64.pow(level)));
        prop_assert_eq!(mu(&p, &shifted), mu(&p, &TriadicInterval::new(level, index)));
    }

    #[test]
    fn oracle_matches_at_midpoints(pick in 0usize..4, level in 0u32..8, raw in any::<u64>()) {
        let p = params(pick, 1);
        let iv = TriadicInterval::new(level, raw % 3u64.pow(level));
        let dens = density_oracle(&p, level, &iv.midpoint());
        prop_assert_eq!(mu(&p, &iv), dens * third_pow(level));
    }

    #[test]
    fn interval_measure_is_additive(
        pick in 0usize..4,
        level in 1u32..7,
        a in -30i64..300,
        len1 in 0i64..200,
        len2 in 0i64..200,
    ) {
        let p = params(pick, 1);
        let side = third_pow(level);
        let x = int(a) * &side;
        let y = int(a + len1) * &side;
        let z = int(a + len1 + len2) * &side;
        let whole = mu_interval(&p, &x, &z).unwrap();
        let parts = mu_interval(&p, &x, &y).unwrap() + mu_interval(&p, &y, &z).unwrap();
        prop_assert_eq!(&whole, &parts);
        let atoms: Rational = (a..a + len1 + len2)
            .map(|i| mu(&p, &TriadicInterval::new(level, i)))
            .sum();
        prop_assert_eq!(whole, atoms);
    }

    #[test]
    fn box_is_product_of_projections(pick in 0usize..4, dim in 1usize..4, seeds in prop::collection::vec((0u32..6, any::<u32>()), 3)) {
        let p = params(pick, dim);
        let axes: Vec<TriadicInterval> = seeds[..dim]
            .iter()
            .map(|&(level, raw)| TriadicInterval::new(level, raw % 3u32.pow(level)))
            .collect();
        let product: Rational = axes
            .iter()
            .map(|iv| mu_interval(&p, &iv.lo(), &iv.hi()).unwrap())
            .product();
        prop_assert_eq!(nu(&p, &TriadicBox::new(axes)).unwrap(), product);
    }

    #[test]
    fn digits_round_trip(level in 0u32..20, raw in any::<u64>()) {
        let index = raw % 3u64.pow(level);
        let digits = ternary_digits(&BigUint::from(index), level).unwrap();
        prop_assert_eq!(digits.len(), level as usize);
        let back = digits.iter().fold(0u64, |acc, &dg| 3 * acc + dg as u64);
        prop_assert_eq!(back, index);
    }

    #[test]
    fn adjacent_ratio_within_bound(pick in 0usize..4, level in 1u32..7, start in 0i64..700, len in 2i64..60) {
        let p = params(pick, 1);
        let worst = adjacent_ratio_max(&p, level, BigInt::from(start)..BigInt::from(start + len)).unwrap();
        prop_assert!(worst <= p.adjacent_ratio_bound());
        prop_assert!(worst >= Rational::one());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn kset_counts_agree_with_brute_force(pick in 0usize..3, n in 1u32..9, k_raw in 0u32..9) {
        let k = k_raw.min(n);
        let p = params(pick, 1);
        let spec = KSetSpec::new(n, k, p.delta().clone());
        let members: Vec<u64> = (0..3u64.pow(n))
            .filter(|&i| {
                let (mut j, mut others) = (i, 0);
                for _ in 0..n {
                    others += u32::from(j % 3 != 1);
                    j /= 3;
                }
                others <= k
            })
            .collect();
        let listed: Vec<u64> = enumerate_k(&spec).map(|i| i.try_into().unwrap()).collect();
        prop_assert_eq!(&listed, &members);
        prop_assert_eq!(count_k(&spec), BigUint::from(members.len()));
        let total: Rational = members.iter().map(|&i| brute_mu(p.delta(), n, i)).sum();
        prop_assert_eq!(mu_k(&spec), total);
        prop_assert_eq!(length_k(&spec), int(members.len() as i64) * third_pow(n));

        // runs of consecutive members
        let runs = 1 + members.windows(2).filter(|w| w[1] != w[0] + 1).count();
        prop_assert_eq!(component_count(&spec), BigUint::from(runs));
        let g = gaps(&spec, 1_000_000).unwrap();
        prop_assert_eq!(BigUint::from(g.len()), gap_count(&spec));
        prop_assert!(g.len() < runs.max(1));
        prop_assert!(g.total_length() <= Rational::one());
    }

    #[test]
    fn mu_k_monotone_in_k(pick in 0usize..4, n in 1u32..30) {
        let p = params(pick, 1);
        let mut prev = Rational::zero();
        let mut prev_len = Rational::zero();
        for k in 0..=n {
            let spec = KSetSpec::new(n, k, p.delta().clone());
            let (m, len) = (mu_k(&spec), length_k(&spec));
            prop_assert!(m >= prev && len >= prev_len);
            prev = m;
            prev_len = len;
        }
        prop_assert_eq!(prev, Rational::one());
        prop_assert_eq!(prev_len, Rational::one());
    }
}

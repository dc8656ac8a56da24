use proptest::prelude::*;

use cosine_ec::approximation::{card_bound, index_set, wce_all_minimal};
use cosine_ec::config::{parse_spec, spec_hash, to_text};
use cosine_ec::cosine_space::CosinePolynomial;
use cosine_ec::integration::{
    midpoint_cosine_sign, midpoint_cosine_sum, midpoint_rule, wce_lower_bound, wce_midpoint_exact,
    wce_upper_bound,
};
use cosine_ec::tractability::{fit_rate, RateForm, FIT_FLOOR};
use cosine_ec::weights::{MultiIndex, SeqGen, WeightSpec};

fn spec_strategy() -> impl Strategy<Value = WeightSpec> {
    (0.05f64..0.95, 0.2f64..3.0, 0.5f64..2.5, 0.0f64..1.0).prop_map(|(omega, a, b, slope)| {
        let a = SeqGen::Constant { c: a };
        let b = if slope > 0.5 {
            SeqGen::Polynomial { c: b, p: slope - 0.5 }
        } else {
            SeqGen::Constant { c: b }
        };
        WeightSpec::new(omega, a, b, 8).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn midpoint_error_is_sandwiched(spec in spec_strategy(), mesh in prop::collection::vec(1u64..40, 1..4)) {
        let rule = midpoint_rule(&mesh).unwrap();
        let e = wce_midpoint_exact(&spec, &rule).unwrap();
        let up = wce_upper_bound(&spec, &rule).unwrap();
        prop_assert!(e <= up * (1.0 + 1e-12));
        let lo = wce_lower_bound(&spec, &mesh, rule.n()).unwrap();
        prop_assert!(lo <= e * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn finer_mesh_never_hurts(spec in spec_strategy(), n in 1u64..200, extra in 1u64..50) {
        let e1 = wce_midpoint_exact(&spec, &midpoint_rule(&[n]).unwrap()).unwrap();
        let e2 = wce_midpoint_exact(&spec, &midpoint_rule(&[n + extra]).unwrap()).unwrap();
        prop_assert!(e2 <= e1);
    }

    #[test]
    fn midpoint_sum_matches_sign(l in 0u64..500, n in 1u64..30) {
        let direct = midpoint_cosine_sum(l, n);
        prop_assert!((direct - midpoint_cosine_sign(l, n) as f64).abs() < 1e-12);
    }

    #[test]
    fn index_set_within_card_bound(spec in spec_strategy(), s in 1usize..4, m in 1.5f64..200.0) {
        let bound = card_bound(&spec, s, m).unwrap();
        prop_assume!(bound < 1e6);
        let set = index_set(&spec, s, m).unwrap();
        prop_assert!(set.len() as f64 <= bound * (1.0 + 1e-12));
        prop_assert!(set.contains(&MultiIndex::zeros(s)));
    }

    #[test]
    fn spectral_error_decreases(spec in spec_strategy(), s in 1usize..4, n in 0usize..60) {
        let e1 = wce_all_minimal(&spec, s, n).unwrap();
        let e2 = wce_all_minimal(&spec, s, n + 1).unwrap();
        prop_assert!(e2 <= e1);
        prop_assert!(e1 <= 1.0);
    }

    #[test]
    fn spec_text_round_trips(spec in spec_strategy()) {
        let text = to_text(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(to_text(&back), text);
        prop_assert_eq!(spec_hash(&back), spec_hash(&spec));
    }

    #[test]
    fn polynomial_text_round_trips(
        terms in prop::collection::vec((prop::collection::vec(0usize..20, 2), -1e3f64..1e3), 0..12)
    ) {
        let mut f = CosinePolynomial::zero(2);
        for (k, c) in terms {
            if c != 0.0 {
                f.insert(MultiIndex::new(k), c).unwrap();
            }
        }
        let back = CosinePolynomial::from_text(&f.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), f.to_text());
    }

    #[test]
    fn planted_rate_is_recovered(p in 0.3f64..2.5, q in 0.05f64..0.8) {
        let table: Vec<(f64, f64)> =
            (2..60).map(|n| (n as f64, q.powf((n as f64).powf(p)))).collect();
        prop_assume!(table.iter().filter(|r| r.1 >= FIT_FLOOR).count() >= 5);
        let fit = fit_rate(&table, RateForm::LogLog).unwrap();
        prop_assert!((fit.p - p).abs() < 1e-6, "p = {}, fit = {}", p, fit.p);
    }
}

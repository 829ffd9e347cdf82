mod common;

use proptest::prelude::*;
use toruslab::arithmin::{MinOptions, MinTable, Variant};
use toruslab::dissipation::{
    classify, geometric_grid, n_diss, n_diss_with, operator_norm, r_diss_fit, threshold_robustness,
    DissipationClass, NoiseModel,
};
use toruslab::IntMatrix;

use common::{cat, plastic, shear, unimodular};

/// Random maps may be nonergodic with positive entropy, where `n_diss ~ 1/ε`
/// and the exact powers carry `~0.4/ε` digits; keep `ε ≥ 10⁻³` for them.
fn map() -> impl Strategy<Value = IntMatrix> {
    prop_oneof![unimodular(2, 5), unimodular(3, 3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contraction_bound(a in map(), n in 1usize..=12, eps in 1e-4f64..1.0) {
        let r = operator_norm(&a, &NoiseModel::new(eps, 1.0).unwrap(), n).unwrap();
        prop_assert!(r.log_norm <= -eps * n as f64 * (1.0 - 1e-15));
    }

    #[test]
    fn n_diss_is_monotone_and_bounded(a in map(), e_exp in 1.0f64..3.0) {
        let eps = 10f64.powf(-e_exp);
        let n = n_diss(&a, &NoiseModel::new(eps, 1.0).unwrap()).unwrap();
        let n_bigger_eps = n_diss(&a, &NoiseModel::new(eps * 2.0, 1.0).unwrap()).unwrap();
        let n_half = n_diss(&a, &NoiseModel::new(eps, 0.5).unwrap()).unwrap();
        prop_assert!(n >= 1);
        prop_assert!(n_bigger_eps <= n);
        prop_assert!(n <= n_half);
        prop_assert!(n <= (1.0 / eps).ceil() as usize + 1);
    }

    #[test]
    fn threshold_changes_stay_within_the_ratio_bound(
        a in map(), e_exp in 1.0f64..3.0, eta in 0.01f64..0.9
    ) {
        let eps = 10f64.powf(-e_exp);
        let rows = threshold_robustness(&a, 1.0, &[eps], &[(-1f64).exp(), eta]).unwrap();
        for r in rows {
            prop_assert!(r.within_bound, "{:?}", r);
        }
    }

    #[test]
    fn threshold_is_strict(a in map(), e_exp in 1.0f64..3.0) {
        let eps = 10f64.powf(-e_exp);
        let table = MinTable::new(&a, 1.0, Variant::FullSum, MinOptions::default());
        let n = n_diss_with(&table, eps, 1.0).unwrap();
        prop_assert!(eps * table.get(n).unwrap().value > 1.0);
        if n > 1 {
            prop_assert!(eps * table.get(n - 1).unwrap().value <= 1.0);
        }
    }
}

#[test]
fn classification_matches_the_fitted_regime() {
    let grid = geometric_grid(1e-3, 1e-7, 5).unwrap();
    for a in [
        cat(),
        shear(),
        plastic(),
        IntMatrix::identity(2),
        IntMatrix::from_i64([[0, -1], [1, 0]]),
    ] {
        let r = r_diss_fit(&a, &NoiseModel::new(1.0, 1.0).unwrap(), &grid).unwrap();
        assert_eq!(r.classification, classify(&a));
        match r.classification {
            // n_diss grows with ln(1/ε) at a rate bounded away from 0
            DissipationClass::Logarithmic => {
                assert!(r.r_diss_fit > 0.3, "{a:?}: {}", r.r_diss_fit);
                let last = r.entries.last().unwrap();
                assert!((last.n_diss as f64) < 100.0 * (1.0 / last.epsilon).ln());
            }
            // ε·n_diss stays bounded
            _ => {
                for e in &r.entries {
                    let v = e.epsilon * e.n_diss as f64;
                    assert!(v > 0.2 && v < 5.0, "{a:?}: {v}");
                }
            }
        }
        let eps: Vec<f64> = r.entries.iter().map(|e| e.epsilon).collect();
        assert!(eps.windows(2).all(|w| w[0] > w[1]));
    }
}

#[test]
fn rate_constants() {
    let grid = geometric_grid(1e-3, 1e-9, 7).unwrap();
    // ĥ = h/2 = ln λ / 2 for the cat map, so 1/(2αĥ) = 1/(α ln λ)
    let ln_lambda = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let r = r_diss_fit(&cat(), &NoiseModel::new(1.0, 1.0).unwrap(), &grid).unwrap();
    assert!((r.r_diss_predicted - 1.0 / ln_lambda).abs() < 1e-12);
    assert!((r.r_diss_fit - r.r_diss_predicted).abs() < 0.05 * r.r_diss_predicted);
    let r = r_diss_fit(&cat(), &NoiseModel::new(1.0, 0.5).unwrap(), &grid).unwrap();
    assert!((r.r_diss_predicted - 2.0 / ln_lambda).abs() < 1e-12);
    let r = r_diss_fit(
        &IntMatrix::identity(2),
        &NoiseModel::new(1.0, 1.0).unwrap(),
        &grid,
    )
    .unwrap();
    assert_eq!(r.classification, DissipationClass::Simple);
    assert!((r.r_diss_fit - 1.0).abs() <= 0.02);
}

mod common;

use common::{cat, plastic, shear, unimodular};
use proptest::prelude::*;
use toruslab::dissipation::{n_diss, NoiseModel};
use toruslab::dynamo::{dynamo_rate, peak_time, push_curve, push_norm, wave_map};
use toruslab::exact::{inverse, ln_operator_two_norm, mat_pow};
use toruslab::fourier_sim::TruncatedOperator;
use toruslab::spectral::ToralMap;
use toruslab::IntMatrix;

fn noise(eps: f64) -> NoiseModel {
    NoiseModel::new(eps, 1.0).unwrap()
}

fn block_diag(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut rows = vec![vec![0i64; da + db]; da + db];
    for i in 0..da {
        for j in 0..da {
            rows[i][j] = i64::try_from(&a[(i, j)]).unwrap();
        }
    }
    for i in 0..db {
        for j in 0..db {
            rows[da + i][da + j] = i64::try_from(&b[(i, j)]).unwrap();
        }
    }
    IntMatrix::from_rows(&rows).unwrap()
}

#[test]
fn push_norm_matches_the_simulated_inverse_operator() {
    // ‖Pⁿ‖ = ‖Tⁿ‖·‖Fⁿ‖ where T is the noisy Koopman operator of F⁻¹
    let maps = [
        cat(),
        shear(),
        IntMatrix::identity(2),
        IntMatrix::from_i64([[0, -1], [1, 0]]),
        IntMatrix::from_i64([[1, 2], [1, 3]]),
    ];
    let mut checked = 0;
    for f in &maps {
        for eps in [1.0, 0.1] {
            let t = TruncatedOperator::new(
                ToralMap::linear_only(inverse(f).unwrap()).unwrap(),
                noise(eps),
                64,
            )
            .unwrap();
            for n in 1..=8 {
                let est = t.norm_estimate(n).unwrap();
                if !est.valid {
                    continue;
                }
                let fnorm = ln_operator_two_norm(&mat_pow(f, n as i64).unwrap()).exp();
                let pushed = push_norm(f, &noise(eps), n).unwrap().exp();
                let sim = est.estimate * fnorm;
                assert!(
                    (pushed - sim).abs() <= 1e-8 * pushed.max(1.0),
                    "F = {f:?}, ε = {eps}, n = {n}: {pushed} vs {sim}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 40, "only {checked} valid cases");
}

#[test]
fn ergodic_peak_time_tracks_the_dissipation_time() {
    for f in [cat(), plastic(), IntMatrix::from_i64([[1, 2], [1, 3]])] {
        let nz = noise(1e-8);
        let n_p = peak_time(&f, &nz).unwrap().n_p as f64;
        let nd = n_diss(&wave_map(&f).unwrap(), &nz).unwrap() as f64;
        let r = n_p / nd;
        assert!(
            (0.8..=1.2).contains(&r),
            "F = {f:?}: n_p = {n_p}, n_diss = {nd}"
        );
    }
}

#[test]
fn nonergodic_growth_rate_matches_entropy_minus_noise() {
    let ln_rho = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let maps = [
        block_diag(&cat(), &IntMatrix::identity(1)),
        block_diag(&cat(), &shear()),
    ];
    for f in &maps {
        for eps in [0.1, 0.01, 0.001] {
            let r = dynamo_rate(f, &noise(eps), 60).unwrap();
            assert!(!r.divergent_negative);
            // an invariant wave vector gives M(n) = n
            let oracle = ln_rho - eps;
            assert!(
                (r.fitted - oracle).abs() <= 0.01,
                "F = {f:?}, ε = {eps}: {r:?}"
            );
            assert!((r.predicted.unwrap() - oracle).abs() <= 0.01);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scanned_curve_equals_pointwise_norms(
        f in prop_oneof![unimodular(2, 4), unimodular(3, 3)],
        eps in 0.01f64..1.0,
    ) {
        let nz = noise(eps);
        let curve = push_curve(&f, &nz, 6).unwrap();
        prop_assert_eq!(curve[0].log_push_norm, 0.0);
        for s in &curve[1..] {
            let direct = push_norm(&f, &nz, s.n).unwrap();
            prop_assert!((s.log_push_norm - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn push_norm_is_below_the_undamped_growth(
        f in prop_oneof![unimodular(2, 4), unimodular(3, 3)],
        eps in 0.01f64..1.0,
        n in 1usize..8,
    ) {
        // every term of M(n) is at least 1
        let lnf = ln_operator_two_norm(&mat_pow(&f, n as i64).unwrap());
        let p = push_norm(&f, &noise(eps), n).unwrap();
        prop_assert!(p <= lnf - eps * n as f64 + 1e-9 * lnf.abs().max(1.0));
    }
}

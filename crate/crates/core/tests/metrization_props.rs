use proptest::prelude::*;
use sumlike_core::conditions::{quasi_constants, Constant};
use sumlike_core::metrization::{build_level_sets, frink_pseudometric, metrize, truncate_modulus, CertificateStatus};
use sumlike_core::{ModulusSample, ToleranceConfig};

fn sample_from(xs: &[f64], p: f64) -> ModulusSample {
    let labels = (0..xs.len()).map(|i| format!("x{i}")).collect();
    ModulusSample::from_fn("pow", labels, |i, j| (xs[i] - xs[j]).abs().powf(p)).unwrap()
}

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_pseudometric(xs in points(), p in 0.25f64..3.0) {
        let s = truncate_modulus(&sample_from(&xs, p));
        let c = quasi_constants(&s, &ToleranceConfig::default()).combined();
        prop_assume!(c.is_finite());
        let lv = build_level_sets(&s, c.value(), &ToleranceConfig::default()).unwrap();
        let d = frink_pseudometric(&lv).unwrap();
        let n = d.len();
        for i in 0..n {
            prop_assert_eq!(d[i][i], 0.0);
            for j in 0..n {
                prop_assert!(d[i][j] >= 0.0);
                prop_assert_eq!(d[i][j], d[j][i]);
                for k in 0..n {
                    prop_assert!(d[i][k] <= d[i][j] + d[j][k]);
                }
            }
        }
    }

    #[test]
    fn power_samples_certify(xs in points(), p in 0.25f64..3.0) {
        let cert = metrize(&sample_from(&xs, p), &ToleranceConfig::default()).unwrap();
        prop_assert_eq!(cert.status, CertificateStatus::Certified);
        prop_assert!(cert.all_ok());
    }

    /// Scaling psi by a factor in [1, B) keeps every certificate check green
    /// and moves the distances by at most one level.
    #[test]
    fn scale_coherence(xs in points(), lambda in 0.05f64..1.0) {
        let tol = ToleranceConfig::default();
        let s = sample_from(&xs, 1.0);
        let scaled = s.map_values("scaled", |v| lambda * v).unwrap();
        let a = metrize(&s, &tol).unwrap();
        let b = metrize(&scaled, &tol).unwrap();
        prop_assert!(a.all_ok() && b.all_ok());
        let c = quasi_constants(&scaled, &tol).combined();
        prop_assert!(matches!(c, Constant::Finite(_)));
        let steps = (1.0 / lambda).log(a.b).ceil() + 1.0;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                prop_assert!(b.d[i][j] <= a.d[i][j] * 1.0000001);
                prop_assert!(b.d[i][j] * 2f64.powf(steps + 1.0) >= a.d[i][j]);
            }
        }
    }
}

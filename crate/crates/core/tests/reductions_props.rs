use proptest::prelude::*;
use sumlike_core::reductions::*;

fn stream() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..0.2, 400)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clamp_identity(z in -20.0f64..20.0, d in -3.0f64..3.0) {
        let w = z + d;
        let got = row_difference(z, w, covering_window(z, w));
        prop_assert!((got - (z - w).abs()).abs() <= 1e-12);
    }

    #[test]
    fn clamp_rows_nonincreasing(z in -10.0f64..10.0) {
        let t = clamp_reduce(&[z], -12..=12).unwrap();
        prop_assert!(t.rows[0].windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn plans_are_valid_and_margins_strict(
        streams in prop::collection::vec(stream(), 1..5),
        start in 0u32..4,
        zs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 5),
    ) {
        match select_blocks(&streams, start) {
            Ok(plan) => {
                prop_assert!(plan.validate().is_ok());
                let (z, w): (Vec<f64>, Vec<f64>) = zs[..plan.blocks.len()].iter().copied().unzip();
                let v = verify_block_inequality(&z, &w, &plan).unwrap();
                prop_assert!(v.all_ok, "{:?}", v);
            }
            Err(e) => {
                let exhausted = matches!(e, sumlike_core::Error::StreamExhausted { .. });
                prop_assert!(exhausted);
            }
        }
    }

    #[test]
    fn switch_index_monotone(s in stream(), z1 in 0.0f64..=1.0, z2 in 0.0f64..=1.0) {
        let plan = select_blocks(&[s], 0).unwrap();
        let (lo, hi) = (z1.min(z2), z1.max(z2));
        let count = |z: f64| block_reduce(&[z], &plan).unwrap().iter().filter(|s| matches!(s, Slot::X(_))).count();
        prop_assert!(count(lo) <= count(hi));
    }

    #[test]
    fn koch_depth_is_cauchy(rho in 0.5f64..1.0, depth in 1u32..10, s in 0.0f64..1.0) {
        let a = KochParams::from_rho(rho, depth).unwrap();
        let b = KochParams::from_rho(rho, depth + 1).unwrap();
        let (p, q) = (koch_point(&a, s).unwrap(), koch_point(&b, s).unwrap());
        prop_assert!((p.0 - q.0).hypot(p.1 - q.1) <= a.r.powi(depth as i32) * (1.0 + 1e-9));
    }

    #[test]
    fn koch_separation(rho in 0.5f64..1.0, i in -5i32..5, gap in 2i32..5, fs in 0.0f64..1.0, ft in 0.0f64..1.0, offset in prop::sample::select(vec![1.0, 2.0])) {
        let p = KochParams { interval_offset: offset, ..KochParams::from_rho(rho, 8).unwrap() };
        let (s, t) = (i as f64 + fs, (i + gap) as f64 + ft);
        let (a, b) = (koch_point(&p, s).unwrap(), koch_point(&p, t).unwrap());
        prop_assert!((a.0 - b.0).hypot(a.1 - b.1) >= 1.0);
    }

    #[test]
    fn normalized_pseudometric_is_metric(xs in prop::collection::vec(0.0f64..1.0, 2..8), n in 0u32..6) {
        // coarse rounding creates coincident points
        let d: Vec<Vec<f64>> = xs.iter()
            .map(|a| xs.iter().map(|b| ((a * 4.0).round() - (b * 4.0).round()).abs() / 4.0).collect())
            .collect();
        let m = normalize_metric(&d, n).unwrap();
        let k = m.len();
        for i in 0..k {
            for j in 0..k {
                prop_assert_eq!(m[i][j] == 0.0, i == j);
                prop_assert_eq!(m[i][j], m[j][i]);
                for l in 0..k {
                    prop_assert!(m[i][l] <= m[i][j] + m[j][l] + 1e-15);
                }
            }
        }
    }
}

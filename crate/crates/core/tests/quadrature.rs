use parity_core::partition::{q_set, Partition};
use parity_core::quadrature::grid::grid_slice_integral;
use parity_core::quadrature::{
    j_closed_form, moments, verify_main_identity, zk_center_formula, zk_lower_bound_check,
    QuadratureConfig, TestFunction, TestFunctionSpec,
};

fn thm1() -> TestFunction {
    TestFunction::new(TestFunctionSpec::thm1(3, 1.0 / 27.0, 1)).unwrap()
}

#[test]
fn thm1_moments_satisfy_first_moment_relation() {
    let ms = moments(&thm1(), &QuadratureConfig::default(), 6).unwrap();
    assert!(((ms.z[1] - ms.z[0] / 3.0) / ms.z[1]).abs() < 1e-6);
    for k in 0..=6 {
        assert!(ms.converges_at_order_two(k), "k={k} {:?}", ms.refinement_ratios(k));
    }
}

#[test]
fn thm1_moments_match_grid_oracle() {
    let tf = thm1();
    let ms = moments(&tf, &QuadratureConfig::default(), 2).unwrap();
    for k in 0..=2 {
        let g = grid_slice_integral(&tf.mix, &[3], &[1.0], 800, &|w| w[0].powi(k as i32));
        assert!(((g - ms.z[k]) / ms.z[k]).abs() < 1e-4);
    }
}

#[test]
fn thm2_moments() {
    let delta = 1.0 / 4096.0;
    let tf = TestFunction::new(TestFunctionSpec::thm2(4, delta)).unwrap();
    let ms = moments(&tf, &QuadratureConfig::default(), 6).unwrap();
    assert!(ms.z[0].abs() <= 1e-8 * ms.j);
    for k in 2..=6 {
        assert!(ms.z[k] < 0.0);
        let c = zk_center_formula(4, delta, k) * ms.j;
        assert!(((ms.z[k] - c) / c).abs() < 1e-4, "k={k} {} {c}", ms.z[k]);
    }
    assert!((ms.j / j_closed_form(4, delta.powi(3)) - 1.0).abs() < 1e-12);
}

#[test]
fn zk_bound_report() {
    let r = zk_lower_bound_check(4, 1.0 / 4096.0, 5, &QuadratureConfig::default()).unwrap();
    for row in &r.rows {
        assert!(row.bound_holds, "{row:?}");
    }
    // the center of the bump gives −Z_2 = Jδ²/4, i.e. 2M³ times Jδ²/(8M³)
    assert!((r.k2_over_leading - 128.0).abs() < 1e-6);
    // successive ratios follow (k + 1)/(k − 1)
    for row in r.rows.iter().filter(|row| row.next_ratio.is_some()) {
        let k = row.k as f64;
        assert!((row.next_ratio.unwrap() - (k + 1.0) / (k - 1.0)).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn f_alpha_matches_grid_oracle() {
    let tf = thm1();
    let q = QuadratureConfig::default();
    let a = Partition::new(vec![1, 2]).unwrap();
    for v1 in [0.32, 1.0 / 3.0, 0.345] {
        let v = [v1, 1.0 - v1];
        let ball = tf.f_alpha(&v, &a, &q).unwrap();
        // e_(1,2) = −1/2; inner integral over w_2 + w_3 = v_2 with w_1 = v_1
        let g = grid_slice_integral(&tf.mix, &[1, 2], &v, 4000, &|_| 1.0) * -0.5 * v[0] * v[1];
        assert!((ball - g).abs() < 1e-5 * ball.abs().max(1e-3));
    }
    // f_(3)(1) = e_(3) Z_0
    let ms = moments(&tf, &q, 0).unwrap();
    let f3 = tf.f_alpha(&[1.0], &Partition::single(3), &q).unwrap();
    assert!((f3 - ms.z[0] / 3.0).abs() < 1e-12);
}

#[test]
fn main_identity_m3() {
    let tf = thm1();
    let q = QuadratureConfig::default();
    for beta in q_set(3) {
        let samples: Vec<Vec<f64>> = if beta.is_empty() {
            vec![vec![]]
        } else {
            (0..5).map(|i| vec![1.0 / 3.0 - 0.03 + 0.015 * i as f64]).collect()
        };
        for v in samples {
            let r = verify_main_identity(&tf, &beta, &v, &q).unwrap();
            assert!(r.final_normalized() <= 1e-3, "{beta} {v:?} {:?}", r.normalized);
            assert!(r.refines_fourfold(1e-12), "{beta} {v:?} {:?}", r.normalized);
        }
    }
}

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use bmhull::analytic::{
    erf, pdf_m_mn, pdf_t_bb_part, pdf_t_bm_part, rho_mn_components, ClosedFormCatalog,
};
use bmhull::quadrature::{
    derivative_second_moment, expected_area_mn, expected_perimeter_mn, integrate,
    integrate_half_line, max_moment, Endpoints, QuadSpec,
};
use bmhull::ProcessCounts;
use proptest::prelude::*;

const C: ClosedFormCatalog = ClosedFormCatalog::STANDARD;

fn counts(m: u32, n: u32) -> ProcessCounts {
    ProcessCounts::new(m, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_the_integrand(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0) {
        let spec = QuadSpec::with_tol(1e-12);
        let f = |x: f64| (k * x).sin();
        let g = |x: f64| (-x * x).exp();
        let i = |h: &dyn Fn(f64) -> f64| integrate(h, 0.0, 2.0, &spec).unwrap().value;
        let lhs = i(&|x| a * f(x) + b * g(x));
        prop_assert!((lhs - (a * i(&f) + b * i(&g))).abs() < 1e-10);
    }

    #[test]
    fn additive_over_intervals(split in 0.05f64..0.95) {
        let spec = QuadSpec::with_tol(1e-12).singular(Endpoints::BOTH);
        let f = |t: f64| 1.0 / (t * (1.0 - t)).sqrt();
        let left = integrate(f, 0.0, split, &QuadSpec { singular: Endpoints::LEFT, ..spec }).unwrap().value;
        let right = integrate(f, split, 1.0, &QuadSpec { singular: Endpoints::RIGHT, ..spec }).unwrap().value;
        prop_assert!((left + right - PI).abs() < 1e-9, "{} + {}", left, right);
    }
}

#[test]
fn reference_integrals() {
    let spec = QuadSpec::with_tol(1e-12);
    assert!((integrate(|_| 1.0, 0.0, 1.0, &spec).unwrap().value - 1.0).abs() < 1e-12);
    let g = integrate_half_line(|x| (-x * x).exp(), &spec)
        .unwrap()
        .value;
    assert!((g - PI.sqrt() / 2.0).abs() < 1e-10);
    // (2/pi) int t(1-t) atan sqrt(t(1-t)) dt
    let v = integrate(
        |t| t * (1.0 - t) * 2.0 / PI * (t * (1.0 - t)).sqrt().atan(),
        0.0,
        1.0,
        &spec,
    )
    .unwrap()
    .value;
    let s5 = 5f64.sqrt();
    assert!((v - 2.0 / PI * (5.0 * s5 - 10.0) * PI / (24.0 * s5)).abs() < 1e-8);
}

#[test]
fn expectations_increase_with_either_family() {
    let spec = QuadSpec::default();
    let mut per = [[0.0; 5]; 5];
    let mut area = [[0.0; 5]; 5];
    for m in 1..=4 {
        for n in 1..=4 {
            per[m][n] = expected_perimeter_mn(counts(m as u32, n as u32), &spec)
                .unwrap()
                .value;
            area[m][n] = expected_area_mn(counts(m as u32, n as u32), &spec)
                .unwrap()
                .value;
        }
    }
    for m in 1..=4 {
        for n in 1..=4 {
            if m < 4 {
                assert!(per[m + 1][n] > per[m][n], "perimeter in m at ({m},{n})");
                assert!(area[m + 1][n] > area[m][n], "area in m at ({m},{n})");
            }
            if n < 4 {
                assert!(per[m][n + 1] > per[m][n], "perimeter in n at ({m},{n})");
                assert!(area[m][n + 1] > area[m][n], "area in n at ({m},{n})");
            }
        }
    }
}

#[test]
fn single_pair_moments_match_closed_forms() {
    let spec = QuadSpec::default();
    let one = counts(1, 1);
    let m1 = max_moment(one, 1, &spec).unwrap().moment.value;
    let m2 = max_moment(one, 2, &spec).unwrap().moment.value;
    let d = derivative_second_moment(one, &spec).unwrap();
    assert!((m1 - C.moment_m1).abs() < 1e-10, "{m1}");
    assert!((m2 - C.moment_m2).abs() < 1e-10, "{m2}");
    assert!((d.total.value - C.moment_mprime2).abs() < 1e-9, "{:?}", d);
    // E[M^2] = int x^2 e^{-x^2/2}(1-e^{-2x^2}) sqrt(2/pi) + 4 int x^3 e^{-2x^2} erf(x/sqrt2).
    let s5 = 5f64.sqrt();
    let expect = (2.0 / PI).sqrt() * (2.0 * PI).sqrt() * (5.0 * s5 - 1.0) / (10.0 * s5)
        + 4.0 * 7.0 / (40.0 * s5);
    assert!((m2 - expect).abs() < 1e-10);
}

#[test]
fn mixed_argmax_density_reduces_for_one_pair() {
    let spec = QuadSpec::with_tol(1e-11);
    for t in [0.01, 0.2, 0.5, 0.8, 0.99] {
        let rho = rho_mn_components(t, counts(1, 1), &spec).unwrap();
        assert!((rho.bm.value - pdf_t_bm_part(t)).abs() < 1e-8, "t = {t}");
        assert!((rho.bb.value - pdf_t_bb_part(t)).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn mixed_argmax_density_integrates_to_one() {
    let spec = QuadSpec::with_tol(1e-10);
    for (m, n) in [(1, 2), (2, 1), (3, 2)] {
        let c = counts(m, n);
        let total = integrate(
            |t| rho_mn_components(t, c, &spec).unwrap().total(),
            0.0,
            1.0,
            &QuadSpec::with_tol(1e-9).singular(Endpoints::BOTH),
        )
        .unwrap()
        .value;
        assert!((total - 1.0).abs() < 1e-7, "({m},{n}): {total}");
    }
}

#[test]
fn mixed_max_density_recovers_its_cdf() {
    let c = counts(2, 3);
    let spec = QuadSpec::with_tol(1e-12);
    let v = integrate(|x| pdf_m_mn(x, c), 0.0, 1.0, &spec)
        .unwrap()
        .value;
    let cdf = erf(FRAC_1_SQRT_2).powi(2) * (1.0 - (-2.0f64).exp()).powi(3);
    assert!((v - cdf).abs() < 1e-8);
}

#[test]
fn tighter_tolerance_does_not_move_the_table() {
    for (m, n) in [(1, 2), (2, 2)] {
        let loose = expected_area_mn(counts(m, n), &QuadSpec::with_tol(1e-8)).unwrap();
        let tight = expected_area_mn(counts(m, n), &QuadSpec::with_tol(1e-12)).unwrap();
        assert!((loose.value - tight.value).abs() <= 1e-7, "({m},{n})");
        assert!(loose.error_bound >= tight.error_bound);
    }
}

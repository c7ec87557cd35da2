use std::f64::consts::PI;

use busrmt_core::numeric::quad::Rule;
use busrmt_core::rmt_reference::*;
use busrmt_core::Execution;

#[test]
fn fredholm_determinant_is_stable_in_resolution() {
    let (g40, g80) = (NystromGrid::new(40).unwrap(), NystromGrid::new(80).unwrap());
    for i in 1..=30 {
        let s = 0.1 * f64::from(i);
        let (a, b) = (fredholm_det_sine(s, &g40).unwrap(), fredholm_det_sine(s, &g80).unwrap());
        assert!((a - b).abs() < 1e-10, "s={s}: {a} vs {b}");
    }
}

#[test]
fn gap_probability_small_interval_series() {
    // E(s) = 1 - s + pi^2 s^4 / 36 - pi^4 s^6 / 675 + ...
    let g = NystromGrid::default();
    for &s in &[0.01f64, 0.05, 0.1] {
        let series = 1.0 - s + PI.powi(2) * s.powi(4) / 36.0 - PI.powi(4) * s.powi(6) / 675.0;
        let e = gap_probability_sine(s, &g).unwrap();
        assert!((e - series).abs() < 1e-8, "s={s}: {e} vs {series}");
    }
    assert_eq!(gap_probability_sine(0.0, &g).unwrap(), 1.0);
}

#[test]
fn gaudin_density_moments() {
    let g = NystromGrid::default();
    let rule = Rule::new(20);
    let mass = rule.integrate_composite(0.0, 6.0, 24, |s| gaudin_density(s, &g).unwrap());
    let mean = rule.integrate_composite(0.0, 6.0, 24, |s| s * gaudin_density(s, &g).unwrap());
    let second = rule.integrate_composite(0.0, 6.0, 24, |s| s * s * gaudin_density(s, &g).unwrap());
    assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    assert!((mean - 1.0).abs() < 1e-3, "mean {mean}");
    // spacing variance of the unitary ensemble, 0.180
    let var = second - mean * mean;
    assert!((var - 0.180).abs() < 2e-3, "variance {var}");
}

#[test]
fn gaudin_cdf_integrates_density() {
    let g = NystromGrid::default();
    let rule = Rule::new(20);
    for &s in &[0.5, 1.0, 2.0] {
        let integral = rule.integrate_composite(0.0, s, 8, |r| gaudin_density(r, &g).unwrap());
        let cdf = gaudin_cdf(s, &g).unwrap();
        assert!((integral - cdf).abs() < 1e-5, "s={s}: {integral} vs {cdf}");
    }
}

#[test]
fn surmise_is_normalized_and_close_to_gaudin() {
    let rule = Rule::new(30);
    let mass = rule.integrate_composite(0.0, 8.0, 16, wigner_surmise);
    let mean = rule.integrate_composite(0.0, 8.0, 16, |s| s * wigner_surmise(s));
    assert!((mass - 1.0).abs() < 1e-12 && (mean - 1.0).abs() < 1e-12);
    for &s in &[0.3, 1.0, 2.2] {
        let cdf = rule.integrate(0.0, s, wigner_surmise);
        assert!((cdf - wigner_surmise_cdf(s)).abs() < 1e-13);
    }
    let g = NystromGrid::default();
    let sup = linear_grid(0.0, 3.0, 301)
        .into_iter()
        .map(|s| (gaudin_density(s, &g).unwrap() - wigner_surmise(s)).abs())
        .fold(0.0, f64::max);
    assert!(sup > 1e-4 && sup <= 0.02, "sup {sup}");
}

#[test]
fn number_variance_against_direct_double_integral() {
    let rule = Rule::new(40);
    for &s in &[0.5, 1.0, 2.0] {
        let double = rule.integrate(0.0, s, |x| rule.integrate(0.0, s, |y| sine_kernel(x, y).powi(2)));
        let want = s - double;
        assert!((gue_number_variance(s) - want).abs() < 1e-10, "s={s}");
    }
    let s: f64 = 0.05;
    let series = s - s * s + PI * PI * s.powi(4) / 18.0;
    assert!((gue_number_variance(s) - series).abs() < 1e-8);
}

#[test]
fn number_variance_grows_slower_than_poisson() {
    let grid = linear_grid(0.1, 10.0, 100);
    for w in grid.windows(2) {
        let dh = gue_number_variance(w[1]) - gue_number_variance(w[0]);
        assert!(dh > 0.0 && dh < w[1] - w[0]);
    }
}

#[test]
fn number_variance_approaches_asymptote() {
    for s in linear_grid(5.0, 10.0, 51) {
        let d = (gue_number_variance(s) - gue_number_variance_asymptote(s)).abs();
        assert!(d < 0.01, "s={s}: {d}");
    }
}

#[test]
fn reference_curves_tabulate_in_order() {
    let xs = linear_grid(0.25, 3.0, 12);
    for m in ReferenceMethod::ALL {
        let par = ReferenceCurve::tabulate(m, &xs, Execution::Parallel).unwrap();
        let seq = ReferenceCurve::tabulate(m, &xs, Execution::Sequential).unwrap();
        assert_eq!(par, seq);
        assert_eq!(m.name().parse::<ReferenceMethod>().unwrap(), m);
        let mut buf = Vec::new();
        par.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "s,value,method");
        assert_eq!(text.lines().count(), 13);
    }
    let poisson = ReferenceCurve::tabulate(ReferenceMethod::Poisson, &xs, Execution::Sequential).unwrap();
    assert!((poisson.interpolate(1.0) - (-1f64).exp()).abs() < 1e-12);
}

#[test]
fn domain_errors() {
    let g = NystromGrid::default();
    assert!(gaudin_density(-0.1, &g).is_err());
    assert!(gaudin_cdf(-0.1, &g).is_err());
    assert!(NystromGrid::new(2).is_err());
    assert!("hermite".parse::<ReferenceMethod>().is_err());
}

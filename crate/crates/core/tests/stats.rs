use busrmt_core::stats::*;
use busrmt_core::Seed;
use rand::Rng;

fn lattice(n: usize) -> UnfoldedSequence {
    UnfoldedSequence::new((0..n).map(|i| i as f64 + 0.5).collect(), 0, 1).unwrap()
}

#[test]
fn poisson_control_spacings_are_exponential() {
    let seqs: Vec<UnfoldedSequence> = (0..20).map(|r| uniform_control(2_000, Seed::new(4).replicate(r))).collect();
    let h = spacing_statistic(&seqs, 0.1, 0.1).unwrap();
    assert!((h.mass() - 1.0).abs() < 1e-12);
    assert_eq!(h.curve.counts.iter().sum::<u64>() as usize, h.spacings.len());
    let d = ks_distance(&h.spacings, |s| 1.0 - (-s).exp()).unwrap();
    assert!(d < 0.015, "KS {d}");
}

#[test]
fn poisson_control_number_variance_is_linear() {
    let seqs: Vec<UnfoldedSequence> = (0..40).map(|r| uniform_control(2_000, Seed::new(5).replicate(r))).collect();
    let grid = [0.5, 1.0, 2.0, 4.0];
    let nv = number_variance_statistic(&seqs, &grid, 0.1).unwrap();
    for (s, (v, se)) in grid.iter().zip(nv.values.iter().zip(&nv.std_errors)) {
        assert!((v - s).abs() < 0.05 * s, "s={s}: {v}");
        assert!(*se > 0.0 && *se < 0.05 * s);
    }
}

#[test]
fn lattice_is_rigid() {
    let nv = number_variance_statistic(&[lattice(200)], &[1.0, 2.0, 5.0], 0.1).unwrap();
    for v in &nv.values {
        assert!(v.abs() < 1e-12);
    }
    assert!(nv.std_errors.iter().all(|&e| e == 0.0));
    let h = spacing_statistic(&[lattice(50)], 0.25, 0.0).unwrap();
    assert_eq!(h.spacings.len(), 49);
    assert!(h.spacings.iter().all(|&s| (s - 1.0).abs() < 1e-12));
}

#[test]
fn ks_rejection_rate_is_nominal() {
    // 5% critical value of the KS statistic is about 1.358 / sqrt(n)
    let mut rng = Seed::new(12).rng();
    let (trials, n) = (4_000, 400);
    let crit = 1.358 / (n as f64).sqrt();
    let rejected = (0..trials)
        .filter(|_| {
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap() > crit
        })
        .count();
    let f = rejected as f64 / trials as f64;
    assert!((f - 0.05).abs() < 4.0 * (0.05 * 0.95 / trials as f64).sqrt(), "{f}");
}

#[test]
fn bulk_trims_both_edges() {
    let s = lattice(100);
    let b = s.bulk(0.1);
    assert_eq!(b.len(), 80);
    assert_eq!(b[0], 10.5);
    assert!((s.mean_bulk_spacing(0.1).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn tabulated_cdf_interpolates_and_clamps() {
    let c = TabulatedCdf::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0]).unwrap();
    assert_eq!(c.eval(-1.0), 0.0);
    assert!((c.eval(0.5) - 0.25).abs() < 1e-15);
    assert!((c.eval(1.5) - 0.75).abs() < 1e-15);
    assert_eq!(c.eval(3.0), 1.0);
    assert!(TabulatedCdf::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
}

#[test]
fn statistics_reject_bad_input() {
    assert!(UnfoldedSequence::new(vec![1.0, 1.0], 0, 1).is_err());
    assert!(ks_distance(&[0.1, 0.2], |x| x).is_err());
    let short = lattice(20);
    assert!(number_variance_statistic(std::slice::from_ref(&short), &[10.0], 0.1).is_err());
    assert!(number_variance_statistic(std::slice::from_ref(&short), &[-1.0], 0.1).is_err());
    assert!(spacing_statistic(std::slice::from_ref(&short), 0.0, 0.1).is_err());
    assert!(spacing_statistic(&[short], 0.1, 0.6).is_err());
}

#[test]
fn curve_csv_has_header_and_rows() {
    let nv = number_variance_statistic(&[lattice(100)], &[1.0, 2.0], 0.1).unwrap();
    let mut buf = Vec::new();
    nv.write_csv("s", &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("s,value,stderr,count"));
    assert_eq!(text.lines().count(), 3);
}

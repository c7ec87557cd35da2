use std::collections::HashMap;

use busrmt_core::model_line::position_pmf;
use busrmt_core::multitime::*;
use busrmt_core::orthopoly::KrawtchoukBasis;
use busrmt_core::sampler::sample_bridge_exact;
use busrmt_core::{ModelParams, PositionConfig, Seed};

#[test]
fn single_time_reduces_to_position_law() {
    for &(big_n, n, t) in &[(3u32, 2u32, 0.3), (4, 3, 0.65)] {
        let p = ModelParams::new(big_n, n, 1, 1.0).unwrap();
        let grid = TimeGrid::new(vec![t], 1.0).unwrap();
        for (cfgs, prob) in multitime_table(&p, &grid).unwrap() {
            let want = position_pmf(&p, t, &cfgs[0]).unwrap();
            assert!((prob - want).abs() < 1e-13, "{cfgs:?}: {prob} vs {want}");
        }
    }
}

#[test]
fn two_time_marginals_are_position_laws() {
    let p = ModelParams::new(3, 2, 1, 2.0).unwrap();
    let grid = TimeGrid::new(vec![0.5, 1.3], 2.0).unwrap();
    let table = multitime_table(&p, &grid).unwrap();
    let total: f64 = table.iter().map(|r| r.1).sum();
    assert!((total - 1.0).abs() < 1e-13);
    for (j, &t) in grid.times().iter().enumerate() {
        let mut marginal: HashMap<PositionConfig, f64> = HashMap::new();
        for (cfgs, prob) in &table {
            *marginal.entry(cfgs[j].clone()).or_insert(0.0) += prob;
        }
        for (c, m) in marginal {
            let want = position_pmf(&p, t, &c).unwrap();
            assert!((m - want).abs() < 1e-13, "time {t} {c:?}: {m} vs {want}");
        }
    }
}

#[test]
fn joint_law_matches_sampled_bridges() {
    let p = ModelParams::new(3, 2, 1, 1.0).unwrap();
    let times = vec![0.35, 0.7];
    let grid = TimeGrid::new(times.clone(), 1.0).unwrap();
    let table = multitime_table(&p, &grid).unwrap();
    let draws = 100_000u64;
    let mut counts: HashMap<Vec<PositionConfig>, u64> = HashMap::new();
    for i in 0..draws {
        let tr = sample_bridge_exact(&p, Seed::new(13).replicate(i));
        let key: Vec<PositionConfig> = times.iter().map(|&t| tr.positions_at(t)).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    let tv: f64 = 0.5
        * table
            .iter()
            .map(|(c, q)| (*counts.get(c).unwrap_or(&0) as f64 / draws as f64 - q).abs())
            .sum::<f64>();
    assert!(tv < 0.02, "TV {tv}");
}

#[test]
fn equal_time_correlations_match_krawtchouk_kernel() {
    let p = ModelParams::new(3, 2, 1, 1.0).unwrap();
    let top = p.krawtchouk_top() as i64;
    for &t in &[0.25, 0.5, 0.8] {
        let grid = TimeGrid::new(vec![t], 1.0).unwrap();
        let kb = KrawtchoukBasis::for_params(&p, t).unwrap();
        let k = |x: i64, y: i64| kb.kernel(x as usize, y as usize);
        for x in 0..=top {
            let one = correlation_determinant(&p, &grid, &[(0, x)], DEFAULT_SAMPLES).unwrap();
            assert!((one - k(x, x)).abs() < 1e-6, "t={t} x={x}");
            for y in 0..=top {
                let two = correlation_determinant(&p, &grid, &[(0, x), (0, y)], DEFAULT_SAMPLES).unwrap();
                let want = k(x, x) * k(y, y) - k(x, y) * k(y, x);
                assert!((two - want).abs() < 1e-6, "t={t} ({x},{y}): {two} vs {want}");
            }
        }
    }
}

#[test]
fn equal_time_kernel_is_a_conjugate_of_the_symmetric_kernel() {
    // K_ext(x, y) = K(x, y) sqrt(w(x) / w(y)) p^{y - x}, w the binomial weight
    let p = ModelParams::new(4, 3, 1, 1.0).unwrap();
    let top = p.krawtchouk_top() as i64;
    for &t in &[0.2, 0.5, 0.7] {
        let grid = TimeGrid::new(vec![t], 1.0).unwrap();
        let kb = KrawtchoukBasis::for_params(&p, t).unwrap();
        let contour = ContourSpec::default_for(t, t);
        let w = |z: i64| kb.phi(0, z as usize).powi(2);
        for x in 0..=top {
            for y in 0..=top {
                let e = extended_kernel(&p, &grid, 0, 0, x, y, &contour).unwrap();
                let want = kb.kernel(x as usize, y as usize) * (w(x) / w(y)).sqrt() * t.powi((y - x) as i32);
                assert!((e.value - want).abs() < 1e-6 * (1.0 + want.abs()), "t={t} ({x},{y}): {} vs {want}", e.value);
                assert!(e.imag.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn correlations_match_enumeration_across_times() {
    for &(big_n, n) in &[(3u32, 2u32), (4, 3)] {
        let p = ModelParams::new(big_n, n, 1, 1.0).unwrap();
        let grid = TimeGrid::new(vec![0.3, 0.6], 1.0).unwrap();
        let table = multitime_table(&p, &grid).unwrap();
        let top = p.krawtchouk_top() as i64;
        let prob = |pts: &[(usize, i64)]| -> f64 {
            table
                .iter()
                .filter(|(c, _)| pts.iter().all(|&(j, y)| c[j].shifted().contains(&y)))
                .map(|r| r.1)
                .sum()
        };
        for x in 0..=top {
            for y in 0..=top {
                for pts in [vec![(0, x)], vec![(1, y)], vec![(0, x), (1, y)], vec![(1, x), (0, y)]] {
                    let k = correlation_determinant(&p, &grid, &pts, DEFAULT_SAMPLES).unwrap();
                    let e = prob(&pts);
                    assert!((k - e).abs() < 1e-6, "N={big_n} n={n} {pts:?}: {k} vs {e}");
                }
                if x != y {
                    let pts = vec![(0, x), (0, y)];
                    let k = correlation_determinant(&p, &grid, &pts, DEFAULT_SAMPLES).unwrap();
                    assert!((k - prob(&pts)).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn contour_resolution_doubling_is_converged() {
    let p = ModelParams::new(3, 2, 1, 1.0).unwrap();
    let grid = TimeGrid::new(vec![0.3, 0.6], 1.0).unwrap();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let (pi, pj) = (grid.fraction(i), grid.fraction(j));
        for x in 0..=4 {
            for y in 0..=4 {
                let c = ContourSpec::default_for(pi, pj);
                let a = extended_kernel(&p, &grid, i, j, x, y, &c.with_samples(256)).unwrap().value;
                let b = extended_kernel(&p, &grid, i, j, x, y, &c.with_samples(512)).unwrap().value;
                assert!((a - b).abs() < 1e-10, "({i},{j}) ({x},{y}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn invalid_kernel_inputs() {
    let p = ModelParams::new(3, 2, 1, 1.0).unwrap();
    let grid = TimeGrid::new(vec![0.3, 0.6], 1.0).unwrap();
    let c = ContourSpec::default_for(0.3, 0.6);
    assert!(extended_kernel(&p, &grid, 0, 1, 5, 0, &c).is_err());
    assert!(extended_kernel(&p, &grid, 1, 0, 0, 0, &c).is_err());
    assert!(log_multitime_weight(&p, &grid, &[PositionConfig::from_shifted(vec![1, 0])]).is_err());
}

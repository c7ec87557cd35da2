//! Spacing and number-variance statistics of unfolded sequences.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::Seed;

pub const DEFAULT_EDGE_FRACTION: f64 = 0.1;

/// A series of estimates with standard errors and the number of samples
/// behind each point.
#[derive(Debug, Clone, PartialEq)]
pub struct StatCurve {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub counts: Vec<u64>,
}

impl StatCurve {
    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// CSV with columns `x,value,stderr,count` under the given x-column name.
    pub fn write_csv<W: Write>(&self, x_name: &str, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{x_name},value,stderr,count")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{}",
                self.abscissa[i], self.values[i], self.std_errors[i], self.counts[i]
            )?;
        }
        Ok(())
    }
}

/// Points on a unit-mean-density scale, tagged with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSequence {
    values: Vec<f64>,
    pub replicate: u64,
    pub site: u32,
}

impl UnfoldedSequence {
    pub fn new(values: Vec<f64>, replicate: u64, site: u32) -> Result<Self> {
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "unfolded sequence (replicate {replicate}) is not strictly increasing"
            )));
        }
        Ok(UnfoldedSequence {
            values,
            replicate,
            site,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The points left after dropping `floor(fraction * len)` from each end.
    pub fn bulk(&self, edge_fraction: f64) -> &[f64] {
        let k = (edge_fraction * self.values.len() as f64).floor() as usize;
        if 2 * k >= self.values.len() {
            return &[];
        }
        &self.values[k..self.values.len() - k]
    }

    /// Consecutive differences within the bulk.
    pub fn bulk_spacings(&self, edge_fraction: f64) -> Vec<f64> {
        self.bulk(edge_fraction).windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Mean bulk spacing; should be close to 1 after unfolding.
    pub fn mean_bulk_spacing(&self, edge_fraction: f64) -> Option<f64> {
        let b = self.bulk(edge_fraction);
        (b.len() >= 2).then(|| (b[b.len() - 1] - b[0]) / (b.len() - 1) as f64)
    }
}

/// Normalized spacing histogram plus the pooled spacings it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    /// Bin centers, densities (mass / bin width), standard errors of the
    /// densities, raw counts.
    pub curve: StatCurve,
    pub bin_width: f64,
    pub spacings: Vec<f64>,
}

impl SpacingHistogram {
    /// `sum density * width`; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.curve.values.iter().sum::<f64>() * self.bin_width
    }
}

/// Histogram of bulk nearest-neighbour spacings. Standard errors come from
/// the spread of per-replicate bin fractions (binomial when there is a
/// single sequence).
pub fn spacing_statistic(sequences: &[UnfoldedSequence], bin_width: f64, edge_fraction: f64) -> Result<SpacingHistogram> {
    if !(bin_width > 0.0) {
        return Err(Error::invalid("bin width must be positive"));
    }
    if !(0.0..0.5).contains(&edge_fraction) {
        return Err(Error::invalid("edge fraction must lie in [0, 0.5)"));
    }
    let per_rep: Vec<Vec<f64>> = sequences.iter().map(|s| s.bulk_spacings(edge_fraction)).collect();
    let spacings: Vec<f64> = per_rep.iter().flatten().copied().collect();
    if spacings.is_empty() {
        return Err(Error::InsufficientData("no bulk spacings to histogram".into()));
    }
    let max = spacings.iter().copied().fold(0.0, f64::max);
    let bins = ((max / bin_width).floor() as usize + 1).max(1);
    let bin_of = |s: f64| ((s / bin_width).floor() as usize).min(bins - 1);
    let mut counts = vec![0u64; bins];
    for &s in &spacings {
        counts[bin_of(s)] += 1;
    }
    let total = spacings.len() as f64;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64 / total / bin_width).collect();
    let used: Vec<&Vec<f64>> = per_rep.iter().filter(|r| !r.is_empty()).collect();
    let std_errors = if used.len() >= 2 {
        let r = used.len() as f64;
        let fractions: Vec<Vec<f64>> = used
            .iter()
            .map(|rep| {
                let mut f = vec![0.0; bins];
                for &s in rep.iter() {
                    f[bin_of(s)] += 1.0 / rep.len() as f64;
                }
                f
            })
            .collect();
        (0..bins)
            .map(|b| {
                let mean = fractions.iter().map(|f| f[b]).sum::<f64>() / r;
                let var = fractions.iter().map(|f| (f[b] - mean).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt() / bin_width
            })
            .collect()
    } else {
        counts
            .iter()
            .map(|&c| {
                let p = c as f64 / total;
                (p * (1.0 - p) / total).sqrt() / bin_width
            })
            .collect()
    };
    let abscissa = (0..bins).map(|b| (b as f64 + 0.5) * bin_width).collect();
    Ok(SpacingHistogram {
        curve: StatCurve {
            abscissa,
            values,
            std_errors,
            counts,
        },
        bin_width,
        spacings,
    })
}

fn window_counts(points: &[f64], s: f64) -> Vec<f64> {
    let (lo, hi) = (points[0], points[points.len() - 1]);
    let stride = 0.5 * s;
    let windows = ((hi - lo - s) / stride).floor() as usize + 1;
    (0..windows)
        .map(|w| {
            let u = lo + w as f64 * stride;
            let a = points.partition_point(|&p| p < u);
            let b = points.partition_point(|&p| p < u + s);
            (b - a) as f64
        })
        .collect()
}

fn pooled_variance(groups: &[&Vec<f64>]) -> f64 {
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let mean = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    groups.iter().flat_map(|g| g.iter()).map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
}

/// Number variance: for each `s`, the variance of the count in half-open
/// windows `[u, u + s)` slid over each sequence's bulk with stride `s / 2`,
/// pooled over sequences. Standard errors are leave-one-sequence-out
/// jackknife (zero for a single sequence).
pub fn number_variance_statistic(sequences: &[UnfoldedSequence], s_grid: &[f64], edge_fraction: f64) -> Result<StatCurve> {
    let bulks: Vec<&[f64]> = sequences.iter().map(|q| q.bulk(edge_fraction)).filter(|b| b.len() >= 2).collect();
    if bulks.is_empty() {
        return Err(Error::InsufficientData("no sequence has a bulk of two or more points".into()));
    }
    let min_span = bulks.iter().map(|b| b[b.len() - 1] - b[0]).fold(f64::INFINITY, f64::min);
    let mut curve = StatCurve {
        abscissa: Vec::new(),
        values: Vec::new(),
        std_errors: Vec::new(),
        counts: Vec::new(),
    };
    for &s in s_grid {
        if !(s > 0.0) {
            return Err(Error::invalid(format!("window length must be positive, got {s}")));
        }
        if s > 0.25 * min_span {
            return Err(Error::InsufficientData(format!(
                "window {s} exceeds 25% of the shortest bulk span {min_span:.3}"
            )));
        }
        let per_seq: Vec<Vec<f64>> = bulks.iter().map(|b| window_counts(b, s)).collect();
        let all: Vec<&Vec<f64>> = per_seq.iter().collect();
        let value = pooled_variance(&all);
        let r = per_seq.len();
        let se = if r >= 2 {
            let loo: Vec<f64> = (0..r)
                .map(|skip| {
                    let rest: Vec<&Vec<f64>> = per_seq.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, g)| g).collect();
                    pooled_variance(&rest)
                })
                .collect();
            let mean = loo.iter().sum::<f64>() / r as f64;
            ((r as f64 - 1.0) / r as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
        } else {
            0.0
        };
        curve.abscissa.push(s);
        curve.values.push(value);
        curve.std_errors.push(se);
        curve.counts.push(all.iter().map(|g| g.len() as u64).sum());
    }
    Ok(curve)
}

/// Kolmogorov–Smirnov distance `sup |F_emp - F|`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "KS distance needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Piecewise-linear CDF through tabulated `(s, F(s))` points, clamped to
/// `[0, 1]` outside the table.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() != fs.len() || xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tabulated CDF needs >= 2 strictly increasing abscissae"));
        }
        Ok(TabulatedCdf { xs, fs })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.fs[0].clamp(0.0, 1.0);
        }
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        (self.fs[i - 1] * (1.0 - t) + self.fs[i] * t).clamp(0.0, 1.0)
    }
}

/// Poisson control: `n` iid uniforms on `(0, n)` (unit density), sorted.
pub fn uniform_control(n: usize, seed: Seed) -> UnfoldedSequence {
    let mut rng = seed.rng();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    UnfoldedSequence::new(v, seed.replicate, 0).expect("sorted and deduplicated")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: Vec<f64>) -> UnfoldedSequence {
        UnfoldedSequence::new(v, 0, 1).unwrap()
    }

    #[test]
    fn unit_lattice_spacings() {
        let h = spacing_statistic(&[seq(vec![0.0, 1.0, 2.0, 3.0])], 0.25, 0.1).unwrap();
        assert_eq!(h.spacings, vec![1.0, 1.0, 1.0]);
        let (bin, _) = h.curve.counts.iter().enumerate().max_by_key(|(_, &c)| c).unwrap();
        let lo = bin as f64 * 0.25;
        assert!(lo <= 1.0 && 1.0 < lo + 0.25);
        assert!((h.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_has_zero_number_variance() {
        let lattice = seq((0..200).map(f64::from).collect());
        let c = number_variance_statistic(&[lattice.clone(), lattice], &[1.0, 2.0, 5.0], 0.1).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn window_limit_is_enforced() {
        let s = seq((0..40).map(f64::from).collect());
        assert!(matches!(
            number_variance_statistic(&[s], &[20.0], 0.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn ks_basics() {
        let pts: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&pts, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.01 + 1e-12);
        // all mass shifted by 0.2 on a uniform reference
        let shifted: Vec<f64> = pts.iter().map(|x| x * 0.8 + 0.2).collect();
        let d = ks_distance(&shifted, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.2).abs() < 0.011);
        assert!(ks_distance(&pts[..5], |x| x).is_err());
    }

    #[test]
    fn edge_trim_counts() {
        let s = seq((0..20).map(f64::from).collect());
        assert_eq!(s.bulk(0.1).len(), 16);
        assert_eq!(s.bulk_spacings(0.1).len(), 15);
        assert_eq!(s.mean_bulk_spacing(0.1), Some(1.0));
    }
}

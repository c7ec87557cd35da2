//! Joint law of the bus positions at several times and its extended
//! correlation kernel.
//!
//! Positions are in shifted coordinates `y = x + n - 1 in {0, .., K}`,
//! `K = N + n - 1`, throughout. With `p_j = t_j / T` the joint weight is
//!
//! `prod_{i<j}(y_i^1 - y_j^1) prod_i p_1^{y_i^1} / y_i^1!`
//! `x prod_j det V_{p_{j+1} - p_j}(y^j, y^{j+1})`
//! `x prod_{i<j}(y_i^k - y_j^k) prod_i (1-p_k)^{K - y_i^k} / (K - y_i^k)!`
//!
//! with `V_p(x, y) = p^{y-x} / (y-x)!` for `y >= x`. The correlation kernel
//! is a double contour integral evaluated by the trapezoidal rule on circles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model_line::{ModelParams, PositionConfig};
use crate::numeric::{det, ln_factorial, log_det, LogValue};

/// `0 < t_1 < .. < t_k < T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time grid needs at least one time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("times must be strictly increasing"));
        }
        if times.iter().any(|&t| !(t > 0.0 && t < horizon)) {
            return Err(Error::domain(format!("times must lie in (0, T = {horizon})")));
        }
        Ok(TimeGrid { horizon, times })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `p_j = t_j / T`.
    pub fn fraction(&self, j: usize) -> f64 {
        self.times[j] / self.horizon
    }

    pub fn fractions(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.fraction(j)).collect()
    }
}

/// Poisson increment weight `V_p(x, y) = p^{y-x} / (y-x)!`, zero for `y < x`.
pub fn transition_block(p_gap: f64, x: i64, y: i64) -> f64 {
    if y < x {
        return 0.0;
    }
    let m = (y - x) as u64;
    if m == 0 {
        return 1.0;
    }
    (m as f64 * p_gap.ln() - ln_factorial(m)).exp()
}

fn ln_transition(p_gap: f64, x: i64, y: i64) -> LogValue {
    if y < x {
        return LogValue::ZERO;
    }
    let m = (y - x) as u64;
    if m == 0 {
        return LogValue::ONE;
    }
    LogValue::positive(m as f64 * p_gap.ln() - ln_factorial(m))
}

fn ln_vandermonde(ys: &[i64]) -> LogValue {
    let mut acc = LogValue::ONE;
    for i in 0..ys.len() {
        for j in (i + 1)..ys.len() {
            acc = acc * LogValue::from_f64((ys[i] - ys[j]) as f64);
        }
    }
    acc
}

/// Unnormalized joint weight of `configs[j]` at time `t_j`.
pub fn log_multitime_weight(params: &ModelParams, grid: &TimeGrid, configs: &[PositionConfig]) -> Result<LogValue> {
    log_multitime_weight_raw(params.krawtchouk_top() as i64, grid, configs)
}

/// As [`log_multitime_weight`] for support `{0, .., top}` without the
/// model-parameter window.
pub fn log_multitime_weight_raw(top: i64, grid: &TimeGrid, configs: &[PositionConfig]) -> Result<LogValue> {
    if configs.len() != grid.len() {
        return Err(Error::invalid(format!(
            "{} configurations for {} times",
            configs.len(),
            grid.len()
        )));
    }
    let ys: Vec<Vec<i64>> = configs.iter().map(|c| c.shifted()).collect();
    let n = ys[0].len();
    if ys.iter().any(|y| y.len() != n) {
        return Err(Error::invalid("all configurations need the same bus count"));
    }
    if ys.iter().flatten().any(|&y| y < 0 || y > top) {
        return Ok(LogValue::ZERO);
    }
    let p1 = grid.fraction(0);
    let pk = grid.fraction(grid.len() - 1);
    let first = &ys[0];
    let last = &ys[ys.len() - 1];
    let mut w = ln_vandermonde(first) * ln_vandermonde(last);
    for &y in first {
        w = w * LogValue::positive(y as f64 * p1.ln() - ln_factorial(y as u64));
    }
    for &y in last {
        let r = (top - y) as u64;
        w = w * LogValue::positive(r as f64 * (1.0 - pk).ln() - ln_factorial(r));
    }
    for j in 0..ys.len() - 1 {
        let gap = grid.fraction(j + 1) - grid.fraction(j);
        let (a, b) = (&ys[j], &ys[j + 1]);
        let entries: Vec<LogValue> = a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| ln_transition(gap, x, y)))
            .collect();
        w = w * log_det(&entries, n);
    }
    Ok(w)
}

/// Every `k`-tuple of configurations with its normalized probability.
/// Exhaustive; meant for tiny instances.
pub fn multitime_table_raw(top: usize, buses: usize, grid: &TimeGrid) -> Result<Vec<(Vec<PositionConfig>, f64)>> {
    let singles: Vec<PositionConfig> = crate::numeric::k_subsets(top + 1, buses)
        .into_iter()
        .map(|s| PositionConfig::from_shifted(s.into_iter().map(|y| y as i64).collect()))
        .collect();
    let k = grid.len();
    let total = singles.len().pow(k as u32);
    if total > 5_000_000 {
        return Err(Error::invalid(format!("{total} configuration tuples is too many to enumerate")));
    }
    let mut rows = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let tuple: Vec<PositionConfig> = (0..k)
            .map(|_| {
                let c = singles[rest % singles.len()].clone();
                rest /= singles.len();
                c
            })
            .collect();
        let w = log_multitime_weight_raw(top as i64, grid, &tuple)?;
        rows.push((tuple, w));
    }
    let max = rows
        .iter()
        .filter(|r| !r.1.is_zero())
        .map(|r| r.1.log_magnitude())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Numerical("all multitime weights vanish".into()));
    }
    let scaled: Vec<f64> = rows.iter().map(|r| (r.1 / LogValue::positive(max)).value()).collect();
    let z: f64 = scaled.iter().sum();
    Ok(rows.into_iter().zip(scaled).map(|(r, v)| (r.0, v / z)).collect())
}

pub fn multitime_table(params: &ModelParams, grid: &TimeGrid) -> Result<Vec<(Vec<PositionConfig>, f64)>> {
    multitime_table_raw(params.krawtchouk_top() as usize, params.buses() as usize, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: f64,
    pub radius: f64,
    pub samples: usize,
}

impl Circle {
    fn contains(&self, z: f64) -> bool {
        (z - self.center).abs() < self.radius
    }

    fn inside(&self, other: &Circle) -> bool {
        (self.center - other.center).abs() + self.radius < other.radius
    }

    /// Points `z_k` and weights `r e^{i theta_k} / M`, so that
    /// `(1 / 2 pi i) oint f dz ~ sum f(z_k) w_k`.
    fn nodes(&self) -> Vec<(Complex64, Complex64)> {
        (0..self.samples)
            .map(|k| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.samples as f64);
                (self.center + self.radius * e, self.radius * e / self.samples as f64)
            })
            .collect()
    }
}

/// Circles for the `s`- and `t`-integrals (both centered on the real axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub s: Circle,
    pub t: Circle,
}

pub const DEFAULT_SAMPLES: usize = 512;

impl ContourSpec {
    /// Default circles for fractions `(p_i, p_j)`, with `c = p_i / (1 - p_i)`.
    /// For `p_i >= p_j` the `s`-circle is centered at `c / 2` with radius
    /// `(c + 1) / 2` (so it encloses both `c` and `0`) and the `t`-circle is
    /// `|t| = 1/4`. Otherwise the `s`-circle is centered at `c` with radius
    /// `(c + 1) / 2` and the `t`-circle around it has radius `c + r_s + 1`.
    pub fn default_for(p_i: f64, p_j: f64) -> Self {
        let c = p_i / (1.0 - p_i);
        let samples = DEFAULT_SAMPLES;
        if p_i >= p_j {
            ContourSpec {
                s: Circle {
                    center: 0.5 * c,
                    radius: 0.5 * (c + 1.0),
                    samples,
                },
                t: Circle {
                    center: 0.0,
                    radius: 0.25,
                    samples,
                },
            }
        } else {
            let rs = 0.5 * (c + 1.0);
            ContourSpec {
                s: Circle {
                    center: c,
                    radius: rs,
                    samples,
                },
                t: Circle {
                    center: 0.0,
                    radius: c.abs() + rs + 1.0,
                    samples,
                },
            }
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.s.samples = samples;
        self.t.samples = samples;
        self
    }

    /// Checks pole enclosure and nesting for fractions `(p_i, p_j)`.
    pub fn validate(&self, p_i: f64, p_j: f64) -> Result<()> {
        let c = p_i / (1.0 - p_i);
        if self.s.samples < 8 || self.t.samples < 8 {
            return Err(Error::Contour("need at least 8 samples per circle".into()));
        }
        if !(self.s.radius > 0.0 && self.t.radius > 0.0) {
            return Err(Error::Contour("radii must be positive".into()));
        }
        if !self.s.contains(c) {
            return Err(Error::Contour(format!("s-circle must enclose p_i/(1-p_i) = {c}")));
        }
        if self.s.contains(-1.0) || (-1.0 - self.s.center).abs() == self.s.radius {
            return Err(Error::Contour("s-circle must exclude -1".into()));
        }
        if !self.t.contains(0.0) {
            return Err(Error::Contour("t-circle must enclose 0".into()));
        }
        if p_i >= p_j {
            if !self.t.inside(&self.s) {
                return Err(Error::Contour("for p_i >= p_j the s-circle must contain the t-circle".into()));
            }
        } else if !self.s.inside(&self.t) {
            return Err(Error::Contour("for p_i < p_j the s-circle must lie inside the t-circle".into()));
        }
        Ok(())
    }
}

/// Complex kernel value; `imag` is a quadrature diagnostic and should be
/// near zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub imag: f64,
}

/// `K_{t_i, t_j}(x, y)` by the trapezoidal rule on `contour`. `x` and `y` are
/// shifted positions in `{0, .., K}`.
pub fn extended_kernel(
    params: &ModelParams,
    grid: &TimeGrid,
    i: usize,
    j: usize,
    x: i64,
    y: i64,
    contour: &ContourSpec,
) -> Result<KernelValue> {
    extended_kernel_raw(
        params.krawtchouk_top() as i64,
        params.buses() as i64,
        grid.fraction(i),
        grid.fraction(j),
        x,
        y,
        contour,
    )
}

/// Kernel for support `{0, .., top}`, `n` buses and fractions `p_i`, `p_j`.
pub fn extended_kernel_raw(
    top: i64,
    n: i64,
    p_i: f64,
    p_j: f64,
    x: i64,
    y: i64,
    contour: &ContourSpec,
) -> Result<KernelValue> {
    if !(0..=top).contains(&x) || !(0..=top).contains(&y) {
        return Err(Error::domain(format!("positions must lie in 0..={top}")));
    }
    contour.validate(p_i, p_j)?;
    // s^n / ((p_i - (1-p_i) s)^{x+1} (1+s)^{K+1-x}) ds, in logs
    let s_terms: Vec<(Complex64, Complex64, Complex64)> = contour
        .s
        .nodes()
        .into_iter()
        .map(|(s, w)| {
            let ln = pow_ln(n, s) - pow_ln(x + 1, p_i - (1.0 - p_i) * s) - pow_ln(top + 1 - x, 1.0 + s) + w.ln();
            (s, ln, w)
        })
        .collect();
    let t_terms: Vec<(Complex64, Complex64, Complex64)> = contour
        .t
        .nodes()
        .into_iter()
        .map(|(t, w)| {
            let ln = pow_ln(y, p_j - (1.0 - p_j) * t) + pow_ln(top - y, 1.0 + t) - pow_ln(n, t) + w.ln();
            (t, ln, w)
        })
        .collect();
    let s_max = s_terms.iter().map(|v| v.1.re).fold(f64::NEG_INFINITY, f64::max);
    let t_max = t_terms.iter().map(|v| v.1.re).fold(f64::NEG_INFINITY, f64::max);
    let fs: Vec<(Complex64, Complex64)> = s_terms.iter().map(|(s, l, _)| (*s, (l - s_max).exp())).collect();
    let gs: Vec<(Complex64, Complex64)> = t_terms.iter().map(|(t, l, _)| (*t, (l - t_max).exp())).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, f) in &fs {
        let mut inner = Complex64::new(0.0, 0.0);
        for (t, g) in &gs {
            inner += g / (t - s);
        }
        acc += f * inner;
    }
    let total = acc * (s_max + t_max).exp();
    if !total.re.is_finite() {
        return Err(Error::Numerical("non-finite contour sum".into()));
    }
    Ok(KernelValue {
        value: total.re,
        imag: total.im,
    })
}

/// `k ln z`, with `z^0 = 1` even where `z` vanishes on the contour.
fn pow_ln(k: i64, z: Complex64) -> Complex64 {
    if k == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        k as f64 * z.ln()
    }
}

/// Correlation `det[K_{t_{a}, t_{b}}(y_a, y_b)]` for points `(time index,
/// shifted position)`, using default contours with `samples` per circle.
pub fn correlation_determinant(
    params: &ModelParams,
    grid: &TimeGrid,
    points: &[(usize, i64)],
    samples: usize,
) -> Result<f64> {
    correlation_determinant_raw(
        params.krawtchouk_top() as i64,
        params.buses() as i64,
        &grid.fractions(),
        points,
        samples,
    )
}

pub fn correlation_determinant_raw(
    top: i64,
    n: i64,
    fractions: &[f64],
    points: &[(usize, i64)],
    samples: usize,
) -> Result<f64> {
    let r = points.len();
    let mut m = vec![0.0; r * r];
    for (a, &(ia, xa)) in points.iter().enumerate() {
        for (b, &(ib, yb)) in points.iter().enumerate() {
            let (pa, pb) = (fractions[ia], fractions[ib]);
            let contour = ContourSpec::default_for(pa, pb).with_samples(samples);
            m[a * r + b] = extended_kernel_raw(top, n, pa, pb, xa, yb, &contour)?.value;
        }
    }
    Ok(det(&m, r))
}

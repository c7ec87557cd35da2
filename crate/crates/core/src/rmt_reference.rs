//! GUE bulk reference statistics: sine-kernel Fredholm determinants, the
//! Gaudin spacing law, the Wigner surmise and the number variance.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::{det, Rule};
use crate::par::{map_slice, Execution};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default Nyström size; interval lengths up to 6 converge to roundoff.
pub const DEFAULT_NODES: usize = 60;

/// Finite-difference step for derivatives of the gap probability.
const FD_STEP: f64 = 1e-3;

/// `sin(pi (xi - rho)) / (pi (xi - rho))`, equal to 1 on the diagonal.
pub fn sine_kernel(xi: f64, rho: f64) -> f64 {
    let d = PI * (xi - rho);
    if d.abs() < 1e-8 {
        1.0 - d * d / 6.0
    } else {
        d.sin() / d
    }
}

/// Gauss–Legendre discretization used for `det(I - K)`.
#[derive(Debug, Clone)]
pub struct NystromGrid {
    rule: Rule,
}

impl NystromGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::invalid(format!("Nystrom grid needs at least 4 nodes, got {m}")));
        }
        Ok(NystromGrid { rule: Rule::new(m) })
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    /// Nodes and weights on `(lo, hi)`.
    pub fn mapped(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.rule.mapped(lo, hi)
    }
}

impl Default for NystromGrid {
    fn default() -> Self {
        NystromGrid {
            rule: Rule::new(DEFAULT_NODES),
        }
    }
}

/// `det(I - K_sine)` on `L^2(-s, s)` by symmetrized Nyström:
/// `det(delta_ij - sqrt(w_i) K(x_i, x_j) sqrt(w_j))`.
pub fn fredholm_det_sine(s: f64, grid: &NystromGrid) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("half-width must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let (xs, ws) = grid.mapped(-s, s);
    let m = xs.len();
    let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            a[i * m + j] = delta - sw[i] * sine_kernel(xs[i], xs[j]) * sw[j];
        }
    }
    let d = det(&a, m);
    if !d.is_finite() {
        return Err(Error::Numerical(format!("non-finite Fredholm determinant at s={s}")));
    }
    Ok(d)
}

/// Probability `E(L)` that an interval of unfolded length `L` holds no point.
pub fn gap_probability_sine(length: f64, grid: &NystromGrid) -> Result<f64> {
    fredholm_det_sine(0.5 * length, grid)
}

fn richardson<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    let coarse = f(FD_STEP)?;
    let fine = f(0.5 * FD_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Gaudin spacing density `p(s) = E''(s)`, by central differences with one
/// Richardson step. Below `2h` the Taylor series
/// `pi^2 s^2 / 3 - 2 pi^4 s^4 / 45` is used instead.
pub fn gaudin_density(s: f64, grid: &NystromGrid) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("spacing must be >= 0, got {s}")));
    }
    if s < 2.0 * FD_STEP {
        let s2 = s * s;
        return Ok(PI * PI * s2 / 3.0 - 2.0 * PI.powi(4) * s2 * s2 / 45.0);
    }
    let e0 = gap_probability_sine(s, grid)?;
    let d2 = richardson(|h| {
        let ep = gap_probability_sine(s + h, grid)?;
        let em = gap_probability_sine(s - h, grid)?;
        Ok((ep - 2.0 * e0 + em) / (h * h))
    })?;
    Ok(d2.max(0.0))
}

/// Gaudin spacing CDF `F(s) = 1 + E'(s)`.
pub fn gaudin_cdf(s: f64, grid: &NystromGrid) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("spacing must be >= 0, got {s}")));
    }
    if s < 2.0 * FD_STEP {
        let s3 = s * s * s;
        return Ok(PI * PI * s3 / 9.0 - 2.0 * PI.powi(4) * s3 * s * s / 225.0);
    }
    let d1 = richardson(|h| {
        let ep = gap_probability_sine(s + h, grid)?;
        let em = gap_probability_sine(s - h, grid)?;
        Ok((ep - em) / (2.0 * h))
    })?;
    Ok((1.0 + d1).clamp(0.0, 1.0))
}

/// GUE Wigner surmise `(32 / pi^2) s^2 exp(-4 s^2 / pi)`.
pub fn wigner_surmise(s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
}

/// CDF of the surmise: `erf(2 s / sqrt(pi)) - (4 s / pi) exp(-4 s^2 / pi)`.
pub fn wigner_surmise_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    // int_0^s (32/pi^2) r^2 e^{-4r^2/pi} dr
    let k = 4.0 / PI;
    let erf_part = libm::erf(k.sqrt() * s);
    let gauss = (-k * s * s).exp();
    (erf_part - 2.0 * (k / PI).sqrt() * s * gauss).clamp(0.0, 1.0)
}

/// GUE number variance
/// `H(s) = s - int int_{[0,s]^2} K(x,y)^2 = s - 2 int_0^s (s - r) sinc^2(pi r) dr`.
pub fn gue_number_variance(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let rule = Rule::new(16);
    let panels = (4.0 * s).ceil() as usize + 1;
    let integral = rule.integrate_composite(0.0, s, panels, |r| {
        let k = sine_kernel(r, 0.0);
        (s - r) * k * k
    });
    s - 2.0 * integral
}

/// Large-`s` asymptote `(ln(2 pi s) + gamma + 1) / pi^2`.
pub fn gue_number_variance_asymptote(s: f64) -> f64 {
    ((2.0 * PI * s).ln() + EULER_GAMMA + 1.0) / (PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMethod {
    Gaudin,
    GaudinCdf,
    Surmise,
    SurmiseCdf,
    Variance,
    VarianceAsymptotic,
    Poisson,
}

impl ReferenceMethod {
    pub const ALL: [ReferenceMethod; 7] = [
        ReferenceMethod::Gaudin,
        ReferenceMethod::GaudinCdf,
        ReferenceMethod::Surmise,
        ReferenceMethod::SurmiseCdf,
        ReferenceMethod::Variance,
        ReferenceMethod::VarianceAsymptotic,
        ReferenceMethod::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceMethod::Gaudin => "gaudin",
            ReferenceMethod::GaudinCdf => "gaudin-cdf",
            ReferenceMethod::Surmise => "surmise",
            ReferenceMethod::SurmiseCdf => "surmise-cdf",
            ReferenceMethod::Variance => "variance",
            ReferenceMethod::VarianceAsymptotic => "variance-asymptotic",
            ReferenceMethod::Poisson => "poisson",
        }
    }

    pub fn eval(self, s: f64, grid: &NystromGrid) -> Result<f64> {
        Ok(match self {
            ReferenceMethod::Gaudin => gaudin_density(s, grid)?,
            ReferenceMethod::GaudinCdf => gaudin_cdf(s, grid)?,
            ReferenceMethod::Surmise => wigner_surmise(s),
            ReferenceMethod::SurmiseCdf => wigner_surmise_cdf(s),
            ReferenceMethod::Variance => gue_number_variance(s),
            ReferenceMethod::VarianceAsymptotic => {
                if s <= 0.0 {
                    return Err(Error::domain("asymptote needs s > 0"));
                }
                gue_number_variance_asymptote(s)
            }
            ReferenceMethod::Poisson => (-s).exp(),
        })
    }
}

impl fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ReferenceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReferenceMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown reference method `{s}`")))
    }
}

/// A tabulated reference curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurve {
    pub method: ReferenceMethod,
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
}

impl ReferenceCurve {
    /// Tabulates `method` on a strictly increasing grid; points are evaluated
    /// independently, so the result does not depend on `exec`.
    pub fn tabulate(method: ReferenceMethod, abscissa: &[f64], exec: Execution) -> Result<Self> {
        if abscissa.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("reference abscissa must be strictly increasing"));
        }
        let grid = NystromGrid::default();
        let values = map_slice(abscissa, exec, |&s| method.eval(s, &grid)).into_iter().collect::<Result<_>>()?;
        Ok(ReferenceCurve {
            method,
            abscissa: abscissa.to_vec(),
            values,
        })
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "s,value,method")?;
        }
        for (s, v) in self.abscissa.iter().zip(&self.values) {
            writeln!(out, "{s:.16e},{v:.16e},{}", self.method)?;
        }
        Ok(())
    }

    /// Linear interpolation, clamped to the end values.
    pub fn interpolate(&self, s: f64) -> f64 {
        let xs = &self.abscissa;
        if s <= xs[0] {
            return self.values[0];
        }
        if s >= xs[xs.len() - 1] {
            return self.values[xs.len() - 1];
        }
        let i = xs.partition_point(|&x| x <= s);
        let (x0, x1) = (xs[i - 1], xs[i]);
        let t = (s - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

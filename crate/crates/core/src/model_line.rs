//! Exact probabilities for the line model.
//!
//! `n` buses start at sites `0, -1, .., 1-n`, each performs `N` unit jumps
//! driven by a rate-1 Poisson clock, and the family is conditioned never to
//! share a site on `[0, T]` and to end at `N, N-1, .., N-n+1`. Everything
//! here is an exact formula: Karlin–McGregor determinants and their
//! Vandermonde closed forms, the Jacobi-ensemble law of the arrival times at a
//! site, and the Krawtchouk-ensemble law of the positions at a fixed time.
//!
//! Bus indices are 1-based in the formulas and 0-based in the code
//! (`i_code = i - 1`).

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, log_det, LogValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    route_len: u32,
    buses: u32,
    site: u32,
    horizon: f64,
}

impl ModelParams {
    /// `route_len` = N, `buses` = n, `site` = x, `horizon` = T.
    pub fn new(route_len: u32, buses: u32, site: u32, horizon: f64) -> Result<Self> {
        if buses < 1 {
            return Err(Error::invalid("bus count n must be at least 1"));
        }
        if buses >= route_len {
            return Err(Error::invalid(format!(
                "bus count must satisfy n < N (got n={buses}, N={route_len})"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon T must be positive (got {horizon})")));
        }
        let max_site = route_len - buses + 1;
        if site < 1 || site > max_site {
            return Err(Error::invalid(format!(
                "site x must satisfy 1 <= x <= N - n + 1 = {max_site} (got x={site})"
            )));
        }
        Ok(ModelParams {
            route_len,
            buses,
            site,
            horizon,
        })
    }

    pub fn route_len(&self) -> u32 {
        self.route_len
    }

    pub fn buses(&self) -> u32 {
        self.buses
    }

    pub fn site(&self) -> u32 {
        self.site
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Same model observed at another site.
    pub fn with_site(&self, site: u32) -> Result<Self> {
        Self::new(self.route_len, self.buses, site, self.horizon)
    }

    /// Exponents `(alpha, beta)` of the Jacobi weight `(1-y)^alpha (1+y)^beta`
    /// governing the arrival times at the observation site.
    pub fn jacobi_exponents(&self) -> (u32, u32) {
        (self.route_len + 1 - self.buses - self.site, self.site - 1)
    }

    /// Largest shifted position `N + n - 1`; the Krawtchouk ensemble lives on
    /// `{0, .., N + n - 1}`.
    pub fn krawtchouk_top(&self) -> u32 {
        self.route_len + self.buses - 1
    }

    fn n(&self) -> usize {
        self.buses as usize
    }
}

/// Arrival times of the `n` buses at the observation site, in increasing
/// order. Coincident times are accepted and produce zero densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimes(Vec<f64>);

impl ArrivalTimes {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("arrival times must be finite"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("arrival times must be non-decreasing"));
        }
        Ok(ArrivalTimes(times))
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_ties(&self) -> bool {
        self.0.windows(2).any(|w| w[1] == w[0])
    }

    /// Rescaled times `t / T` in `(0, 1)`.
    pub fn unit_times(&self, horizon: f64) -> Vec<f64> {
        self.0.iter().map(|t| t / horizon).collect()
    }

    /// Jacobi coordinates `2 t / T - 1` in `(-1, 1)`.
    pub fn jacobi_points(&self, horizon: f64) -> Vec<f64> {
        self.0.iter().map(|t| 2.0 * t / horizon - 1.0).collect()
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        if self.0.len() != params.n() {
            return Err(Error::domain(format!(
                "expected {} arrival times, got {}",
                params.n(),
                self.0.len()
            )));
        }
        if self.0.iter().any(|&t| t <= 0.0 || t >= params.horizon) {
            return Err(Error::domain(format!(
                "arrival times must lie in (0, T = {})",
                params.horizon
            )));
        }
        Ok(())
    }
}

/// Bus positions at a fixed time, `x_1 >= x_2 >= .. >= x_n` (bus 1 leads).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PositionConfig(Vec<i64>);

impl PositionConfig {
    pub fn new(positions: Vec<i64>) -> Result<Self> {
        if positions.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("positions must be listed leader first (non-increasing)"));
        }
        Ok(PositionConfig(positions))
    }

    /// From shifted coordinates `y_j = x_j + n - 1`, in any order.
    pub fn from_shifted(mut shifted: Vec<i64>) -> Self {
        let n = shifted.len() as i64;
        shifted.sort_unstable_by(|a, b| b.cmp(a));
        PositionConfig(shifted.into_iter().map(|y| y - n + 1).collect())
    }

    pub fn positions(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shifted coordinates `y_j = x_j + n - 1`, still decreasing.
    pub fn shifted(&self) -> Vec<i64> {
        let n = self.0.len() as i64;
        self.0.iter().map(|x| x + n - 1).collect()
    }

    /// Every admissible configuration `N + n - 1 >= y_1 > .. > y_n >= 0`.
    pub fn enumerate(params: &ModelParams) -> Vec<PositionConfig> {
        let top = params.krawtchouk_top() as usize;
        crate::numeric::k_subsets(top + 1, params.n())
            .into_iter()
            .map(|s| PositionConfig::from_shifted(s.into_iter().map(|y| y as i64).collect()))
            .collect()
    }
}

fn ln_vandermonde(xs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            acc += (xs[j] - xs[i]).abs().ln();
        }
    }
    acc
}

/// Karlin–McGregor probability that bus `i` reaches site `x - 1` by time
/// `t_i` (just before its jump onto `x`) with no collision, as a density in
/// the arrival times. Evaluated through the Vandermonde closed form.
pub fn log_km_start_to_arrivals(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<LogValue> {
    arrivals.check(params)?;
    if arrivals.has_ties() {
        return Ok(LogValue::ZERO);
    }
    let x = f64::from(params.site);
    let ts = arrivals.times();
    let mut log = ln_vandermonde(ts);
    for &t in ts {
        log += -t + (x - 1.0) * t.ln();
    }
    for i in 1..=params.n() as u64 {
        log -= ln_factorial(u64::from(params.site) + i - 2);
    }
    Ok(LogValue::positive(log))
}

/// The same quantity as [`log_km_start_to_arrivals`], evaluated as the
/// `n x n` determinant `det(e^{-t_j} t_j^{x+i-2} / (x+i-2)!)`.
pub fn km_start_to_arrivals_det(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<LogValue> {
    arrivals.check(params)?;
    let n = params.n();
    let ts = arrivals.times();
    let mut m = Vec::with_capacity(n * n);
    for i in 1..=n as i64 {
        for &t in ts {
            let k = i64::from(params.site) + i - 2;
            m.push(poisson_entry(t, k));
        }
    }
    Ok(log_det(&m, n))
}

/// Karlin–McGregor probability that bus `i` travels from site `x` at time
/// `t_i` to its terminus `N + 1 - i` at `T` with no collision (closed form).
pub fn log_km_arrivals_to_end(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<LogValue> {
    arrivals.check(params)?;
    if arrivals.has_ties() {
        return Ok(LogValue::ZERO);
    }
    let (alpha, _) = params.jacobi_exponents();
    let horizon = params.horizon;
    let ts = arrivals.times();
    let mut log = ln_vandermonde(ts);
    for &t in ts {
        let rest = horizon - t;
        log += -rest + f64::from(alpha) * rest.ln();
    }
    let (big_n, x) = (i64::from(params.route_len), i64::from(params.site));
    for i in 1..=params.n() as i64 {
        log -= ln_factorial((big_n + 1 - x - i) as u64);
    }
    Ok(LogValue::positive(log))
}

/// Determinant form `det(e^{-(T-t_j)} (T-t_j)^{N+1-i-x} / (N+1-i-x)!)`.
pub fn km_arrivals_to_end_det(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<LogValue> {
    arrivals.check(params)?;
    let n = params.n();
    let (big_n, x) = (i64::from(params.route_len), i64::from(params.site));
    let mut m = Vec::with_capacity(n * n);
    for i in 1..=n as i64 {
        for &t in arrivals.times() {
            m.push(poisson_entry(params.horizon - t, big_n + 1 - i - x));
        }
    }
    Ok(log_det(&m, n))
}

/// Probability that the `n` free bridges from `1 - i` to `N + 1 - i` on
/// `[0, T]` never collide, `det(e^{-T} T^{N+i-j} / (N+i-j)!)`.
pub fn log_km_full_bridge(params: &ModelParams) -> LogValue {
    log_km_bridge(params.route_len, params.buses, params.horizon)
}

/// The full-bridge probability for raw `(N, n, T)`, without the `n < N`
/// model restriction, from the product formula
/// `e^{-nT} T^{nN} prod_i (i-1)! / (N+i-1)!`.
pub fn log_km_bridge(route_len: u32, buses: u32, horizon: f64) -> LogValue {
    let (n, big_n) = (u64::from(buses), u64::from(route_len));
    let mut log = n as f64 * (big_n as f64 * horizon.ln() - horizon);
    for i in 1..=n {
        log += ln_factorial(i - 1) - ln_factorial(big_n + i - 1);
    }
    LogValue::positive(log)
}

/// The same quantity as [`log_km_bridge`], evaluated as the `n x n`
/// determinant. Loses relative accuracy once `N` is large against `n`.
pub fn km_full_bridge_det(route_len: u32, buses: u32, horizon: f64) -> LogValue {
    let n = buses as usize;
    let big_n = i64::from(route_len);
    let mut m = Vec::with_capacity(n * n);
    for i in 1..=n as i64 {
        for j in 1..=n as i64 {
            m.push(poisson_entry(horizon, big_n + i - j));
        }
    }
    log_det(&m, n)
}

/// `e^{-t} t^k / k!`, zero for negative `k`.
fn poisson_entry(t: f64, k: i64) -> LogValue {
    match crate::numeric::logspace::ln_poisson_monomial(t, k) {
        Some(l) => LogValue::positive(l - t),
        None => LogValue::ZERO,
    }
}

/// `ln C_{N,n,x}`, the normalizer of the arrival-time Jacobi density on
/// `(0, 1)^n`.
pub fn ln_arrival_normalizer(params: &ModelParams) -> f64 {
    let (big_n, x) = (u64::from(params.route_len), u64::from(params.site));
    let mut log = 0.0;
    for i in 1..=params.n() as u64 {
        log -= ln_factorial(x + i - 2) + ln_factorial(big_n + 1 - x - i);
    }
    for i in 1..=params.n() as u64 {
        log += ln_factorial(big_n + i - 1) - ln_factorial(i - 1);
    }
    log
}

/// Density of the rescaled arrival times `t_j / T` on the ordered simplex
/// of `(0, 1)^n`:
///
/// `C_{N,n,x} prod_{i<j} (u_j - u_i)^2 prod_j u_j^{x-1} (1 - u_j)^{N-x-n+1}`.
///
/// This is `T^n` times the density of the raw times (the Jacobian of
/// `t -> t/T`). Ties give 0.
pub fn arrival_density(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<f64> {
    Ok(log_arrival_density(params, arrivals)?.value())
}

pub fn log_arrival_density(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<LogValue> {
    arrivals.check(params)?;
    if arrivals.has_ties() {
        return Ok(LogValue::ZERO);
    }
    let us = arrivals.unit_times(params.horizon);
    let (alpha, beta) = params.jacobi_exponents();
    let mut log = ln_arrival_normalizer(params) + 2.0 * ln_vandermonde(&us);
    for &u in &us {
        log += f64::from(beta) * u.ln() + f64::from(alpha) * (1.0 - u).ln();
    }
    Ok(LogValue::positive(log))
}

/// The arrival density assembled from the three Karlin–McGregor factors,
/// `T^n * start_to_arrivals * arrivals_to_end / full_bridge`.
pub fn arrival_density_from_km(params: &ModelParams, arrivals: &ArrivalTimes) -> Result<f64> {
    let first = log_km_start_to_arrivals(params, arrivals)?;
    let second = log_km_arrivals_to_end(params, arrivals)?;
    let third = log_km_full_bridge(params);
    let jacobian = LogValue::positive(params.n() as f64 * params.horizon.ln());
    Ok((jacobian * first * second / third).value())
}

/// Density of the Jacobi coordinates `y_j = 2 t_j / T - 1` on `(-1, 1)^n`
/// (ordered), i.e. `2^{-nN} C_{N,n,x} prod (y_j - y_i)^2 prod (1+y)^{x-1} (1-y)^{N-x-n+1}`.
pub fn jacobi_density(params: &ModelParams, ys: &[f64]) -> Result<f64> {
    if ys.len() != params.n() {
        return Err(Error::domain("wrong number of points"));
    }
    if ys.iter().any(|&y| !(-1.0..=1.0).contains(&y)) {
        return Err(Error::domain("Jacobi points must lie in [-1, 1]"));
    }
    let (alpha, beta) = params.jacobi_exponents();
    let mut log = ln_arrival_normalizer(params)
        - (params.n() as f64) * f64::from(params.route_len) * std::f64::consts::LN_2
        + 2.0 * ln_vandermonde(ys);
    for &y in ys {
        log += f64::from(beta) * (1.0 + y).ln() + f64::from(alpha) * (1.0 - y).ln();
    }
    Ok(if log.is_nan() { 0.0 } else { log.exp() })
}

fn check_time(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < params.horizon) {
        return Err(Error::domain(format!(
            "observation time must lie in (0, T = {}), got {t}",
            params.horizon
        )));
    }
    Ok(t / params.horizon)
}

/// Probability of the bus positions at time `t` (the Krawtchouk ensemble),
/// evaluated from the closed form in the shifted coordinates
/// `y_j = x_j + n - 1` with `p = t / T`. Configurations with coincident or
/// out-of-range positions have probability 0.
pub fn position_pmf(params: &ModelParams, t: f64, config: &PositionConfig) -> Result<f64> {
    Ok(log_position_pmf(params, t, config)?.value())
}

pub fn log_position_pmf(params: &ModelParams, t: f64, config: &PositionConfig) -> Result<LogValue> {
    let p = check_time(params, t)?;
    let n = params.n();
    if config.len() != n {
        return Err(Error::domain(format!("expected {n} positions, got {}", config.len())));
    }
    let top = i64::from(params.krawtchouk_top());
    let ys = config.shifted();
    if ys.iter().any(|&y| y < 0 || y > top) || ys.windows(2).any(|w| w[0] == w[1]) {
        return Ok(LogValue::ZERO);
    }
    let top_u = top as u64;
    let big_n = u64::from(params.route_len);
    let mut log = -(n as f64) * ln_factorial(top_u);
    for i in 1..=n as u64 {
        log += ln_factorial(big_n + i - 1) - ln_factorial(i - 1);
    }
    log -= (n * (n - 1) / 2) as f64 * (p - p * p).ln();
    let yf: Vec<f64> = ys.iter().map(|&y| y as f64).collect();
    log += 2.0 * ln_vandermonde(&yf);
    for &y in &ys {
        let yu = y as u64;
        log += ln_factorial(top_u) - ln_factorial(yu) - ln_factorial(top_u - yu);
        log += (y as f64) * p.ln() + ((top - y) as f64) * (1.0 - p).ln();
    }
    Ok(LogValue::positive(log))
}

/// The position law assembled as the ratio of the three Karlin–McGregor
/// determinants `det(0 -> (t, x_j)) det((t, x_j) -> T) / det(0 -> T)`.
pub fn position_pmf_from_km(params: &ModelParams, t: f64, config: &PositionConfig) -> Result<f64> {
    check_time(params, t)?;
    let n = params.n();
    if config.len() != n {
        return Err(Error::domain(format!("expected {n} positions, got {}", config.len())));
    }
    let big_n = i64::from(params.route_len);
    let xs = config.positions();
    let mut start = Vec::with_capacity(n * n);
    let mut end = Vec::with_capacity(n * n);
    for i in 1..=n as i64 {
        for &x in xs {
            start.push(poisson_entry(t, x + i - 1));
            end.push(poisson_entry(params.horizon - t, big_n + 1 - i - x));
        }
    }
    let ratio = log_det(&start, n) * log_det(&end, n) / log_km_full_bridge(params);
    Ok(ratio.value())
}

//! `k` non-colliding Poisson buses on the cycle `Z_M`.
//!
//! Labels are not tracked: a configuration is the set of occupied sites,
//! stored as its increasing tuple. The one-bus transition wraps the Poisson
//! law around the circle,
//! `p_t(a, b) = e^{-t} sum_l t^{m_l} / m_l!`, `m_l = (b - a) mod M + lM`.
//! The non-collision probability into a target set is
//! `det(p^eps_t(theta_i, theta~_j))`, where each term of the wrapped sum is
//! weighted by `eps^c`, `eps = (-1)^{k-1}`, `c` = number of passes through
//! `M - 1 -> 0`. For odd `k` this is the plain wrapped determinant; for
//! even `k` the twist is what keeps the cyclic relabelling of the buses
//! from contributing with the wrong sign.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{det, k_subsets, ln_factorial};
use crate::par::{map_indexed, Execution};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CircleParams {
    sites: usize,
    buses: usize,
    horizon: f64,
    start: Vec<usize>,
}

impl CircleParams {
    pub fn new(sites: usize, buses: usize, horizon: f64, start: Vec<usize>) -> Result<Self> {
        if sites < 2 {
            return Err(Error::invalid(format!("circle size M must be >= 2, got {sites}")));
        }
        if buses == 0 || buses >= sites {
            return Err(Error::invalid(format!("bus count must satisfy 1 <= k < M = {sites}")));
        }
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon T must be positive"));
        }
        if start.len() != buses || start.windows(2).any(|w| w[1] <= w[0]) || start.iter().any(|&s| s >= sites) {
            return Err(Error::invalid(format!(
                "initial positions must be {buses} strictly increasing sites in 0..{sites}"
            )));
        }
        Ok(CircleParams {
            sites,
            buses,
            horizon,
            start,
        })
    }

    /// Buses starting at `0, 1, .., k - 1`.
    pub fn packed(sites: usize, buses: usize, horizon: f64) -> Result<Self> {
        Self::new(sites, buses, horizon, (0..buses).collect())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn buses(&self) -> usize {
        self.buses
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn start(&self) -> &[usize] {
        &self.start
    }

    fn twist(&self) -> f64 {
        if self.buses % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Occupied sites, given as a cyclic shift of an increasing tuple and
/// stored in canonical increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicConfig(Vec<usize>);

impl CyclicConfig {
    pub fn new(labels: Vec<usize>, sites: usize) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::domain("empty configuration"));
        }
        if labels.iter().any(|&l| l >= sites) {
            return Err(Error::domain(format!("labels must lie in 0..{sites}")));
        }
        let descents = (0..k).filter(|&i| labels[i] >= labels[(i + 1) % k]).count();
        if k > 1 && descents != 1 {
            return Err(Error::domain(format!(
                "{labels:?} is not a cyclic shift of an increasing tuple of distinct sites"
            )));
        }
        let mut sorted = labels;
        sorted.sort_unstable();
        Ok(CyclicConfig(sorted))
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    /// Every configuration of `k` buses on `Z_M`.
    pub fn enumerate(sites: usize, buses: usize) -> Vec<CyclicConfig> {
        k_subsets(sites, buses).into_iter().map(CyclicConfig).collect()
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    }
}

fn wrapped(t: f64, from: usize, to: usize, sites: usize, eps: f64) -> f64 {
    let d = (to + sites - from % sites) % sites;
    if t == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let crossed = usize::from(to < from);
    let lt = t.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    for l in 0.. {
        let m = (d + l * sites) as u64;
        let term = (m as f64 * lt - t - ln_factorial(m)).exp();
        let sign = if (l + crossed) % 2 == 1 { eps } else { 1.0 };
        sum += sign * term;
        abs_sum += term;
        if term < 1e-16 * abs_sum && term <= prev {
            break;
        }
        prev = term;
    }
    sum
}

/// One-bus wrapped Poisson transition probability on `Z_M`.
pub fn wrapped_poisson(t: f64, theta: usize, theta2: usize, sites: usize) -> f64 {
    wrapped(t, theta, theta2, sites, 1.0)
}

/// Wrapped transition with each pass through `M - 1 -> 0` weighted by `eps`.
pub fn wrapped_poisson_twisted(t: f64, theta: usize, theta2: usize, sites: usize, eps: f64) -> f64 {
    wrapped(t, theta, theta2, sites, eps)
}

fn km(from: &[usize], to: &[usize], t: f64, sites: usize, eps: f64) -> f64 {
    let k = from.len();
    let m: Vec<f64> = from
        .iter()
        .flat_map(|&a| to.iter().map(move |&b| wrapped(t, a, b, sites, eps)))
        .collect();
    det(&m, k)
}

/// Probability that the buses occupy `target` at time `t` without any
/// collision on `[0, t]`.
pub fn circle_km(params: &CircleParams, target: &CyclicConfig, t: f64) -> Result<f64> {
    check_target(params, target)?;
    if !(t >= 0.0) {
        return Err(Error::domain("time must be >= 0"));
    }
    Ok(km(&params.start, target.sites(), t, params.sites, params.twist()))
}

/// The plain determinant `det(p_t(theta_i, theta~_j))` without the winding
/// twist. Agrees with [`circle_km`] for odd `k`.
pub fn circle_km_untwisted(params: &CircleParams, target: &CyclicConfig, t: f64) -> Result<f64> {
    check_target(params, target)?;
    Ok(km(&params.start, target.sites(), t, params.sites, 1.0))
}

fn check_target(params: &CircleParams, target: &CyclicConfig) -> Result<()> {
    if target.0.len() != params.buses || target.0.iter().any(|&s| s >= params.sites) {
        return Err(Error::domain(format!(
            "target must hold {} sites in 0..{}",
            params.buses, params.sites
        )));
    }
    Ok(())
}

/// `Q_t(theta~)`: law at time `t` of buses started at `0..k-1` and conditioned
/// to be back there at `T`.
pub fn circle_conditioned_qt(params: &CircleParams, intermediate: &CyclicConfig, t: f64) -> Result<f64> {
    if params.start.iter().enumerate().any(|(i, &s)| s != i) {
        return Err(Error::invalid("the conditioned law assumes initial positions 0..k-1"));
    }
    check_target(params, intermediate)?;
    let horizon = params.horizon;
    if !(t > 0.0 && t < horizon) {
        return Err(Error::domain(format!("time {t} outside (0, T = {horizon})")));
    }
    let eps = params.twist();
    let denom = km(&params.start, &params.start, horizon, params.sites, eps);
    if !(denom > 0.0) {
        return Err(Error::Numerical(format!("degenerate bridge: denominator {denom:e}")));
    }
    let there = km(&params.start, intermediate.sites(), t, params.sites, eps);
    let back = km(intermediate.sites(), &params.start, horizon - t, params.sites, eps);
    Ok(there * back / denom)
}

/// `Q_t` over every configuration, in lexicographic order.
pub fn qt_table(params: &CircleParams, t: f64) -> Result<Vec<(CyclicConfig, f64)>> {
    CyclicConfig::enumerate(params.sites, params.buses)
        .into_iter()
        .map(|c| {
            let q = circle_conditioned_qt(params, &c, t)?;
            Ok((c, q))
        })
        .collect()
}

pub fn write_qt_csv<W: Write>(table: &[(CyclicConfig, f64)], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "config,probability")?;
    for (c, q) in table {
        writeln!(out, "{},{q:.16e}", c.label())?;
    }
    Ok(())
}

/// Outcome of one non-colliding run.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDraw {
    pub config: CyclicConfig,
    /// Total number of jumps made by all buses.
    pub total_jumps: u64,
    pub attempts: u64,
}

/// Superposed event stream: rate-`k` exponential clock, uniformly chosen
/// bus. Returns `None` at the first collision.
fn propose_circle<R: Rng>(rng: &mut R, params: &CircleParams, t: f64) -> Option<(Vec<usize>, u64)> {
    let k = params.buses;
    let mut pos = params.start.clone();
    let mut clock = 0.0;
    let mut jumps = 0;
    loop {
        clock += -(1.0 - rng.random::<f64>()).ln() / k as f64;
        if clock > t {
            break;
        }
        let b = rng.random_range(0..k);
        let next = (pos[b] + 1) % params.sites;
        if pos.contains(&next) {
            return None;
        }
        pos[b] = next;
        jumps += 1;
    }
    pos.sort_unstable();
    Some((pos, jumps))
}

/// Exact draw of the configuration at time `t` given no collision on `[0, t]`.
pub fn sample_circle_rejection(params: &CircleParams, t: f64, seed: Seed, max_attempts: u64) -> Result<CircleDraw> {
    if !(t >= 0.0) {
        return Err(Error::domain("time must be >= 0"));
    }
    let mut rng = seed.rng();
    for attempt in 1..=max_attempts {
        if let Some((pos, total_jumps)) = propose_circle(&mut rng, params, t) {
            return Ok(CircleDraw {
                config: CyclicConfig(pos),
                total_jumps,
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// Counts of accepted end configurations over a fixed number of proposals.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleEstimate {
    pub proposals: u64,
    pub counts: BTreeMap<CyclicConfig, u64>,
}

impl CircleEstimate {
    pub fn accepted(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Fraction of proposals ending in `config` without collision.
    pub fn frequency(&self, config: &CyclicConfig) -> f64 {
        *self.counts.get(config).unwrap_or(&0) as f64 / self.proposals as f64
    }

    /// Binomial standard error of a frequency `p`.
    pub fn std_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.proposals as f64).sqrt()
    }
}

const CHUNK: u64 = 1 << 14;

pub fn estimate_circle(params: &CircleParams, t: f64, proposals: u64, seed: Seed, exec: Execution) -> CircleEstimate {
    let chunks = proposals.div_ceil(CHUNK);
    let parts = map_indexed(chunks as usize, exec, |c| {
        let mut rng = seed.replicate(c as u64).rng();
        let len = CHUNK.min(proposals - c as u64 * CHUNK);
        let mut counts: BTreeMap<CyclicConfig, u64> = BTreeMap::new();
        for _ in 0..len {
            if let Some((pos, _)) = propose_circle(&mut rng, params, t) {
                *counts.entry(CyclicConfig(pos)).or_insert(0) += 1;
            }
        }
        counts
    });
    let mut counts = BTreeMap::new();
    for part in parts {
        for (c, v) in part {
            *counts.entry(c).or_insert(0) += v;
        }
    }
    CircleEstimate { proposals, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapped_rows_sum_to_one() {
        for &(m, t) in &[(2, 0.3), (5, 1.7), (7, 12.0)] {
            for a in 0..m {
                let s: f64 = (0..m).map(|b| wrapped_poisson(t, a, b, m)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(wrapped_poisson(0.0, 2, 2, 5), 1.0);
        assert_eq!(wrapped_poisson(0.0, 2, 3, 5), 0.0);
    }

    #[test]
    fn single_site_keeps_all_mass() {
        // M = 1 is outside CircleParams but the transition itself is defined
        for &t in &[0.5, 3.0, 20.0] {
            assert!((wrapped_poisson(t, 0, 0, 1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_order_validation() {
        assert!(CyclicConfig::new(vec![4, 0, 2], 6).is_ok());
        assert_eq!(CyclicConfig::new(vec![4, 0, 2], 6).unwrap().sites(), &[0, 2, 4]);
        assert!(CyclicConfig::new(vec![0, 4, 2], 6).is_err());
        assert!(CyclicConfig::new(vec![1, 1], 6).is_err());
        assert!(CyclicConfig::new(vec![7], 6).is_err());
    }

    #[test]
    fn single_bus_is_wrapped_poisson() {
        let p = CircleParams::new(5, 1, 1.0, vec![3]).unwrap();
        let c = CyclicConfig::new(vec![1], 5).unwrap();
        assert!((circle_km(&p, &c, 0.8).unwrap() - wrapped_poisson(0.8, 3, 1, 5)).abs() < 1e-15);
    }

    #[test]
    fn time_zero_is_identity() {
        let p = CircleParams::packed(6, 2, 1.0).unwrap();
        for c in CyclicConfig::enumerate(6, 2) {
            let v = circle_km(&p, &c, 0.0).unwrap();
            assert_eq!(v, if c.sites() == [0, 1] { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn odd_k_twist_is_trivial() {
        let p = CircleParams::packed(7, 3, 1.0).unwrap();
        for c in CyclicConfig::enumerate(7, 3) {
            let a = circle_km(&p, &c, 1.3).unwrap();
            let b = circle_km_untwisted(&p, &c, 1.3).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }
}

//! Exact samplers for the line model.
//!
//! * [`sample_bridge_rejection`]: `n` independent Poisson bridges (each with
//!   exactly `N` jumps in `(0, T)`, i.e. sorted uniform jump times) accepted
//!   only if the paths never share a level.
//! * [`sample_bridge_exact`]: the same conditioned law without rejection.
//!   Bus `i` stays strictly above bus `i + 1` iff its `k`-th jump precedes
//!   the `k`-th jump of bus `i + 1` for every `k`, so the relative order of
//!   all `nN` jump times is a uniformly random standard Young tableau of the
//!   `n x N` rectangle, and the times themselves are sorted uniforms.
//! * [`sample_krawtchouk_dpp`]: positions at a fixed time, drawn from the
//!   Krawtchouk projection DPP by the sequential chain rule.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model_line::{ArrivalTimes, ModelParams, PositionConfig};
use crate::orthopoly::KrawtchoukBasis;
use crate::par::{map_indexed, Execution};
use crate::rng::Seed;

/// `n` lattice paths given by their jump times. Bus `i` (0-based) starts at
/// level `-i` and ends at `N - i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    route_len: u32,
    horizon: f64,
    jumps: Vec<Vec<f64>>,
}

impl TrajectorySet {
    pub fn new(route_len: u32, horizon: f64, jumps: Vec<Vec<f64>>) -> Result<Self> {
        if jumps.is_empty() {
            return Err(Error::invalid("trajectory set needs at least one bus"));
        }
        for (b, js) in jumps.iter().enumerate() {
            if js.len() != route_len as usize {
                return Err(Error::invalid(format!(
                    "bus {b} has {} jumps, expected {route_len}",
                    js.len()
                )));
            }
            if js.windows(2).any(|w| w[1] < w[0]) || js.iter().any(|&t| !(t > 0.0 && t < horizon)) {
                return Err(Error::invalid(format!("bus {b} jump times must be sorted in (0, T)")));
            }
        }
        Ok(TrajectorySet {
            route_len,
            horizon,
            jumps,
        })
    }

    pub fn buses(&self) -> usize {
        self.jumps.len()
    }

    pub fn route_len(&self) -> u32 {
        self.route_len
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jumps(&self, bus: usize) -> &[f64] {
        &self.jumps[bus]
    }

    /// Level of `bus` at time `t` (right-continuous).
    pub fn level(&self, bus: usize, t: f64) -> i64 {
        let count = self.jumps[bus].partition_point(|&s| s <= t);
        count as i64 - bus as i64
    }

    /// Sweeps all jump events in time order and checks that no bus ever
    /// reaches the level of the bus ahead. Simultaneous jumps count as a
    /// collision.
    pub fn is_non_intersecting(&self) -> bool {
        let mut events: Vec<(f64, usize)> = self
            .jumps
            .iter()
            .enumerate()
            .flat_map(|(b, js)| js.iter().map(move |&t| (t, b)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        if events.windows(2).any(|w| w[0].0 == w[1].0) {
            return false;
        }
        let mut count = vec![0i64; self.jumps.len()];
        for &(_, b) in &events {
            count[b] += 1;
            if b > 0 && count[b] > count[b - 1] {
                return false;
            }
        }
        true
    }

    /// Arrival times at site `x`: bus `i` (1-based) arrives with its
    /// `(x + i - 1)`-th jump.
    pub fn arrival_times(&self, site: u32) -> Result<ArrivalTimes> {
        let n = self.jumps.len() as u32;
        if site < 1 || site + n > self.route_len + 1 {
            return Err(Error::invalid(format!(
                "site x must satisfy 1 <= x <= N - n + 1 = {}",
                (self.route_len + 1).saturating_sub(n)
            )));
        }
        let times = self
            .jumps
            .iter()
            .enumerate()
            .map(|(b, js)| js[site as usize + b - 1])
            .collect();
        ArrivalTimes::new(times)
    }

    /// Bus levels at time `t`, leader first.
    pub fn positions_at(&self, t: f64) -> PositionConfig {
        let levels = (0..self.jumps.len()).map(|b| self.level(b, t)).collect();
        PositionConfig::new(levels).expect("non-intersecting paths are ordered")
    }

    /// One CSV row per jump event: `replicate,bus,jump_index,time`
    /// (bus and jump index 1-based). No header.
    pub fn write_csv_rows<W: Write>(&self, replicate: u64, out: &mut W) -> std::io::Result<()> {
        for (b, js) in self.jumps.iter().enumerate() {
            for (k, t) in js.iter().enumerate() {
                writeln!(out, "{replicate},{},{},{t:.16e}", b + 1, k + 1)?;
            }
        }
        Ok(())
    }
}

pub const TRAJECTORY_CSV_HEADER: &str = "replicate,bus,jump_index,time";

/// `m` sorted uniforms on `(0, scale)` from normalized exponential spacings.
fn sorted_uniforms<R: Rng>(rng: &mut R, m: usize, scale: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        acc += exp1(rng);
        out.push(acc);
    }
    let total = acc + exp1(rng);
    for v in &mut out {
        *v *= scale / total;
    }
    out
}

fn exp1<R: Rng>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.random::<f64>()).ln()
}

/// Runs one proposal as a merged event sweep. Returns the bus label of each
/// successive event if the proposal is non-intersecting.
///
/// Sorting `nN` iid uniforms and reading off bus labels is the same as
/// picking the next event's bus with probability proportional to its
/// remaining jumps, so the proposal can be rejected at the first collision
/// without drawing any times.
fn propose_order<R: Rng>(rng: &mut R, route_len: u32, buses: usize, keep: bool) -> Option<Vec<u16>> {
    let mut remaining = vec![route_len; buses];
    let mut count = vec![0u32; buses];
    let mut total = route_len * buses as u32;
    let mut order = if keep {
        Vec::with_capacity(total as usize)
    } else {
        Vec::new()
    };
    while total > 0 {
        let mut r = rng.random_range(0..total);
        let mut b = 0;
        while r >= remaining[b] {
            r -= remaining[b];
            b += 1;
        }
        remaining[b] -= 1;
        total -= 1;
        count[b] += 1;
        if b > 0 && count[b] > count[b - 1] {
            return None;
        }
        if keep {
            order.push(b as u16);
        }
    }
    Some(order)
}

/// An accepted rejection draw and the number of proposals it took.
#[derive(Debug, Clone)]
pub struct RejectionDraw {
    pub trajectories: TrajectorySet,
    pub attempts: u64,
}

/// Exact draw of the conditioned bridge by rejection.
pub fn sample_bridge_rejection(params: &ModelParams, seed: Seed, max_attempts: u64) -> Result<RejectionDraw> {
    sample_bridge_rejection_raw(params.route_len(), params.buses() as usize, params.horizon(), seed, max_attempts)
}

/// As [`sample_bridge_rejection`] without the site window (any `n >= 1`, `N >= 1`).
pub fn sample_bridge_rejection_raw(
    route_len: u32,
    buses: usize,
    horizon: f64,
    seed: Seed,
    max_attempts: u64,
) -> Result<RejectionDraw> {
    if buses == 0 || route_len == 0 || !(horizon > 0.0) {
        return Err(Error::invalid("need n >= 1, N >= 1, T > 0"));
    }
    let mut rng = seed.rng();
    for attempt in 1..=max_attempts {
        if let Some(order) = propose_order(&mut rng, route_len, buses, true) {
            let times = sorted_uniforms(&mut rng, order.len(), horizon);
            let mut jumps = vec![Vec::with_capacity(route_len as usize); buses];
            for (&b, t) in order.iter().zip(times) {
                jumps[b as usize].push(t);
            }
            return Ok(RejectionDraw {
                trajectories: TrajectorySet {
                    route_len,
                    horizon,
                    jumps,
                },
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
    })
}

/// Monte Carlo estimate of the acceptance (non-intersection) probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceEstimate {
    pub proposals: u64,
    pub accepted: u64,
}

impl AcceptanceEstimate {
    pub fn rate(&self) -> f64 {
        self.accepted as f64 / self.proposals as f64
    }

    /// Binomial standard error of [`rate`](Self::rate).
    pub fn std_error(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.proposals as f64).sqrt()
    }
}

const CHUNK: u64 = 1 << 14;

/// Runs `proposals` independent proposals, split into fixed chunks with
/// their own streams so the count does not depend on the schedule.
pub fn estimate_acceptance(
    route_len: u32,
    buses: usize,
    proposals: u64,
    seed: Seed,
    exec: Execution,
) -> AcceptanceEstimate {
    let chunks = proposals.div_ceil(CHUNK);
    let counts = map_indexed(chunks as usize, exec, |c| {
        let mut rng = seed.replicate(c as u64).rng();
        let len = CHUNK.min(proposals - c as u64 * CHUNK);
        (0..len)
            .filter(|_| propose_order(&mut rng, route_len, buses, false).is_some())
            .count() as u64
    });
    AcceptanceEstimate {
        proposals,
        accepted: counts.iter().sum(),
    }
}

/// Draws `count` accepted trajectory sets by rejection, replicate `i` using
/// stream `seed.replicate(i)`.
pub fn sample_bridges_rejection(
    params: &ModelParams,
    count: usize,
    seed: Seed,
    max_attempts: u64,
    exec: Execution,
) -> Result<Vec<RejectionDraw>> {
    map_indexed(count, exec, |i| {
        sample_bridge_rejection(params, seed.replicate(i as u64), max_attempts)
    })
    .into_iter()
    .collect()
}

/// Uniform standard Young tableau of the `rows x cols` rectangle by the
/// Greene–Nijenhuis–Wilf hook walk. Entry `(r, c)` (row-major) is the rank,
/// `0..rows*cols`, of that cell.
pub fn random_rectangular_tableau<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<u32> {
    let mut tableau = vec![0u32; rows * cols];
    let mut row_len = vec![cols; rows];
    let mut live_rows = rows;
    let mut cells = rows * cols;
    while cells > 0 {
        // uniform cell of the current shape
        let mut k = rng.random_range(0..cells);
        let mut r = 0;
        while k >= row_len[r] {
            k -= row_len[r];
            r += 1;
        }
        let mut c = k;
        loop {
            let arm = row_len[r] - c - 1;
            // rows below r that still reach column c; row lengths are non-increasing
            let leg = row_len[r + 1..live_rows].partition_point(|&len| len > c);
            if arm + leg == 0 {
                break;
            }
            let step = rng.random_range(0..arm + leg);
            if step < arm {
                c += 1 + step;
            } else {
                r += 1 + (step - arm);
            }
        }
        cells -= 1;
        tableau[r * cols + c] = cells as u32;
        row_len[r] -= 1;
        if row_len[r] == 0 {
            live_rows = r;
        }
    }
    tableau
}

/// Exact draw of the conditioned bridge without rejection.
pub fn sample_bridge_exact(params: &ModelParams, seed: Seed) -> TrajectorySet {
    sample_bridge_exact_raw(params.route_len(), params.buses() as usize, params.horizon(), seed)
}

/// As [`sample_bridge_exact`] without the site window.
pub fn sample_bridge_exact_raw(route_len: u32, buses: usize, horizon: f64, seed: Seed) -> TrajectorySet {
    let mut rng = seed.rng();
    let cols = route_len as usize;
    let tableau = random_rectangular_tableau(&mut rng, buses, cols);
    let times = sorted_uniforms(&mut rng, buses * cols, horizon);
    let jumps = (0..buses)
        .map(|b| tableau[b * cols..(b + 1) * cols].iter().map(|&rank| times[rank as usize]).collect())
        .collect();
    TrajectorySet {
        route_len,
        horizon,
        jumps,
    }
}

/// Sequential sampler for the rank-`n` Krawtchouk projection DPP.
#[derive(Debug, Clone)]
pub struct KrawtchoukDpp {
    basis: KrawtchoukBasis,
}

impl KrawtchoukDpp {
    pub fn new(params: &ModelParams, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < params.horizon()) {
            return Err(Error::domain(format!("time {t} outside (0, T = {})", params.horizon())));
        }
        Ok(KrawtchoukDpp {
            basis: KrawtchoukBasis::for_params(params, t)?,
        })
    }

    pub fn basis(&self) -> &KrawtchoukBasis {
        &self.basis
    }

    /// One draw, as a configuration in unshifted positions.
    ///
    /// Chain rule: pick `y` with probability `|P phi(y)|^2 / (n - j)`, where
    /// `P` projects off the feature directions of the points already chosen.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<PositionConfig> {
        let n = self.basis.size();
        let support = self.basis.top() + 1;
        let mut mass: Vec<f64> = (0..support).map(|y| self.basis.one_point(y)).collect();
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut chosen = Vec::with_capacity(n);
        for step in 0..n {
            let expected = (n - step) as f64;
            let total: f64 = mass.iter().map(|m| m.max(0.0)).sum();
            let mut u = rng.random::<f64>() * total;
            let mut y = support - 1;
            for (i, m) in mass.iter().enumerate() {
                let m = m.max(0.0);
                if u < m {
                    y = i;
                    break;
                }
                u -= m;
            }
            if mass[y] <= 1e-12 * expected || (total - expected).abs() > 1e-6 * expected {
                return Err(Error::RankDeficient {
                    step,
                    mass: mass[y],
                    expected: n - step,
                });
            }
            // new orthonormal direction: residual of phi(y)
            let mut v = self.basis.row(y).to_vec();
            for e in &frame {
                let c: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= c * ei;
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for vi in &mut v {
                *vi /= norm;
            }
            for (z, m) in mass.iter_mut().enumerate() {
                let c: f64 = self.basis.row(z).iter().zip(&v).map(|(a, b)| a * b).sum();
                *m -= c * c;
            }
            mass[y] = 0.0;
            frame.push(v);
            chosen.push(y as i64);
        }
        Ok(PositionConfig::from_shifted(chosen))
    }
}

/// Exact draw from the fixed-time position law.
pub fn sample_krawtchouk_dpp(params: &ModelParams, t: f64, seed: Seed) -> Result<PositionConfig> {
    KrawtchoukDpp::new(params, t)?.sample(&mut seed.rng())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_and_columns_increase() {
        let mut rng = Seed::new(3).rng();
        for &(r, c) in &[(1, 5), (3, 4), (6, 11)] {
            let t = random_rectangular_tableau(&mut rng, r, c);
            let mut seen = t.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..(r * c) as u32).collect::<Vec<_>>());
            for i in 0..r {
                for j in 0..c {
                    if j + 1 < c {
                        assert!(t[i * c + j] < t[i * c + j + 1]);
                    }
                    if i + 1 < r {
                        assert!(t[i * c + j] < t[(i + 1) * c + j]);
                    }
                }
            }
        }
    }

    #[test]
    fn tableau_is_uniform_on_2x3() {
        // five standard Young tableaux of shape (3, 3)
        let mut rng = Seed::new(11).rng();
        let mut counts = std::collections::HashMap::new();
        let draws = 50_000;
        for _ in 0..draws {
            *counts.entry(random_rectangular_tableau(&mut rng, 2, 3)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 5);
        for &c in counts.values() {
            let f = f64::from(c) / draws as f64;
            assert!((f - 0.2).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn exact_and_rejection_draws_are_non_intersecting() {
        let p = ModelParams::new(6, 3, 2, 2.0).unwrap();
        for i in 0..20 {
            let e = sample_bridge_exact(&p, Seed::new(5).replicate(i));
            assert!(e.is_non_intersecting());
            let r = sample_bridge_rejection(&p, Seed::new(6).replicate(i), 1_000_000).unwrap();
            assert!(r.trajectories.is_non_intersecting());
            let a = r.trajectories.arrival_times(4).unwrap();
            assert!(a.times().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sweep_detects_collisions_and_ties() {
        // bus 1 jumps before bus 0 reaches level 1: collision
        let bad = TrajectorySet::new(1, 1.0, vec![vec![0.6], vec![0.3]]).unwrap();
        assert!(!bad.is_non_intersecting());
        let tie = TrajectorySet::new(1, 1.0, vec![vec![0.5], vec![0.5]]).unwrap();
        assert!(!tie.is_non_intersecting());
        let good = TrajectorySet::new(1, 1.0, vec![vec![0.3], vec![0.6]]).unwrap();
        assert!(good.is_non_intersecting());
        assert_eq!(good.positions_at(0.4).positions(), &[1, -1]);
    }

    #[test]
    fn budget_exhaustion_reports_attempts() {
        let p = ModelParams::new(40, 8, 1, 1.0).unwrap();
        match sample_bridge_rejection(&p, Seed::new(1), 10) {
            Err(Error::AttemptsExhausted { attempts }) => assert_eq!(attempts, 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dpp_draws_are_distinct_and_in_range() {
        let p = ModelParams::new(8, 4, 2, 1.0).unwrap();
        let dpp = KrawtchoukDpp::new(&p, 0.4).unwrap();
        let mut rng = Seed::new(2).rng();
        for _ in 0..200 {
            let c = dpp.sample(&mut rng).unwrap();
            let y = c.shifted();
            assert!(y.windows(2).all(|w| w[0] > w[1]));
            assert!(y[0] <= 11 && *y.last().unwrap() >= 0);
        }
    }

    #[test]
    fn acceptance_count_is_schedule_independent() {
        let a = estimate_acceptance(4, 2, 100_000, Seed::new(9), Execution::Parallel);
        let b = estimate_acceptance(4, 2, 100_000, Seed::new(9), Execution::Sequential);
        assert_eq!(a, b);
    }
}

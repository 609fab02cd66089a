//! Adaptive re-ranking: repeated contextual re-ranking rounds where the
//! neighborhood size grows by a constant after every round.
//!
//! With a zero increment this is the plain fixed-k iterative scheme, run
//! through the same code path.

use crate::error::{Error, Result};
use crate::matrix::{DistanceKind, DistanceMatrix};
use crate::ranking::rerank_once;

/// Default initial neighborhood size.
pub const DEFAULT_K0: usize = 15;
/// Default growth per round.
pub const DEFAULT_INCREMENT: usize = 1;
/// Default number of rounds.
pub const DEFAULT_ITERATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrConfig {
    /// Neighborhood size used by the first round.
    pub k0: usize,
    /// Added to `k` after each round; zero gives the fixed-k method.
    pub increment: usize,
    /// Number of re-ranking rounds.
    pub iterations: usize,
    /// Min-max rescale each intermediate iterate before the next round.
    pub renormalize: bool,
}

impl Default for ArrConfig {
    fn default() -> Self {
        Self {
            k0: DEFAULT_K0,
            increment: DEFAULT_INCREMENT,
            iterations: DEFAULT_ITERATIONS,
            renormalize: true,
        }
    }
}

impl ArrConfig {
    pub fn new(k0: usize, increment: usize, iterations: usize) -> Self {
        Self {
            k0,
            increment,
            iterations,
            renormalize: true,
        }
    }

    /// Fixed-k iteration.
    pub fn vanilla(k: usize, iterations: usize) -> Self {
        Self::new(k, 0, iterations)
    }

    /// Checks the configuration against a collection of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k0 == 0 {
            return Err(Error::invalid("initial k must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        let last = self
            .increment
            .checked_mul(self.iterations - 1)
            .and_then(|v| v.checked_add(self.k0));
        match last {
            Some(k) if k <= n => Ok(()),
            _ => Err(Error::invalid(format!(
                "schedule k0 = {} + {} x {} exceeds the {n} available points",
                self.k0,
                self.iterations - 1,
                self.increment
            ))),
        }
    }
}

/// Neighborhood size for each round: `k0, k0 + c, ..., k0 + (iterations - 1) c`.
pub fn arr_schedule(cfg: &ArrConfig, n: usize) -> Result<Vec<usize>> {
    cfg.validate(n)?;
    Ok((0..cfg.iterations)
        .map(|i| cfg.k0 + i * cfg.increment)
        .collect())
}

/// Runs the adaptive schedule and returns every iterate, first round first.
pub fn adaptive_rerank_trace(d0: &DistanceMatrix, cfg: &ArrConfig) -> Result<Vec<DistanceMatrix>> {
    let schedule = arr_schedule(cfg, d0.order())?;
    let mut trace: Vec<DistanceMatrix> = Vec::with_capacity(schedule.len());
    for (round, &k) in schedule.iter().enumerate() {
        let next = match trace.last() {
            None => rerank_once(d0, k)?,
            Some(prev) => {
                if prev.is_degenerate() {
                    return Err(Error::DegenerateMetric { round });
                }
                if cfg.renormalize {
                    rerank_once(&prev.min_max_normalized().0, k)?
                } else {
                    rerank_once(prev, k)?
                }
            }
        };
        log::debug!("round {round}: k = {k}");
        trace.push(next.with_kind(DistanceKind::Composed));
    }
    Ok(trace)
}

/// Applies `cfg.iterations` re-ranking rounds, growing `k` by `cfg.increment`
/// after each, and returns the last iterate.
pub fn adaptive_rerank(d0: &DistanceMatrix, cfg: &ArrConfig) -> Result<DistanceMatrix> {
    Ok(adaptive_rerank_trace(d0, cfg)?
        .pop()
        .expect("at least one round"))
}

/// Fixed-k iterative re-ranking.
pub fn vanilla_rerank(d0: &DistanceMatrix, k: usize, iterations: usize) -> Result<DistanceMatrix> {
    adaptive_rerank(d0, &ArrConfig::vanilla(k, iterations))
}

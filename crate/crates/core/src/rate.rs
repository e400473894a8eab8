//! Closed-form minimum download for the multi-demand side-information problem.
//!
//! With `mbar = floor(M / N)` and `t = M - N * mbar`, the messages are split
//! into `L* = ceil((K - t) / (mbar + N))` coding subspaces: `t` of size
//! `mbar + N + 1`, then subspaces of size `mbar + N`, then a remainder. The
//! first `t` subspaces can absorb `mbar + 1` side-information messages, the
//! others `mbar`, the remainder `(size - N)^+`. The minimum number of
//! transmissions is the sum of `size - m` over the subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An instance: `k` messages, `m` of them held as side information, `n` demanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProblemParams {
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

impl ProblemParams {
    pub fn new(k: usize, m: usize, n: usize) -> Result<Self> {
        let params = Self { k, m, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParams("K must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if self.n + self.m > self.k {
            return Err(Error::InvalidParams(format!(
                "N + M = {} exceeds K = {}",
                self.n + self.m,
                self.k
            )));
        }
        Ok(())
    }

    /// Every valid instance with `k <= k_max`, ordered by (K, M, N).
    pub fn sweep(k_max: usize) -> impl Iterator<Item = ProblemParams> {
        (1..=k_max).flat_map(|k| {
            (0..k).flat_map(move |m| (1..=k - m).map(move |n| ProblemParams { k, m, n }))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatePlan {
    pub params: ProblemParams,
    pub m_bar: usize,
    pub t: usize,
    pub l_star: usize,
    pub size_profile: Vec<usize>,
    pub side_profile: Vec<usize>,
    pub r_star: usize,
    /// Whether the plan downloads `K - M` transmissions.
    pub trivial: bool,
}

impl RatePlan {
    pub fn subspace_count(&self) -> usize {
        self.size_profile.len()
    }

    /// Transmissions carried by subspace `i`.
    pub fn rows(&self, i: usize) -> usize {
        self.size_profile[i] - self.side_profile[i]
    }
}

fn pos(x: i64) -> usize {
    x.max(0) as usize
}

pub fn compute_plan(params: ProblemParams) -> Result<RatePlan> {
    params.validate()?;
    let ProblemParams { k, m, n } = params;
    let m_bar = m / n;
    let t = m - n * m_bar;
    let block = m_bar + n;
    let l_star = (k - t).div_ceil(block);

    if l_star <= n {
        return Ok(RatePlan {
            params,
            m_bar,
            t,
            l_star,
            size_profile: vec![k],
            side_profile: vec![m],
            r_star: k - m,
            trivial: true,
        });
    }

    // L* > N > t, so the t larger subspaces all precede the last one.
    let last = k - (l_star - 1) * block - t;
    let mut size_profile = vec![block + 1; t];
    size_profile.resize(l_star - 1, block);
    size_profile.push(last);
    let mut side_profile = vec![m_bar + 1; t];
    side_profile.resize(l_star - 1, m_bar);
    side_profile.push(last.saturating_sub(n));

    // (L* - N) * V is the integer K - (L* - 1)(mbar + N) - t - N.
    let scaled_v = k as i64 - ((l_star - 1) * block) as i64 - t as i64 - n as i64;
    let r_star = k - m - pos(l_star as i64 - 1 - n as i64) * m_bar - pos(scaled_v);
    debug_assert_eq!(
        r_star,
        size_profile
            .iter()
            .zip(&side_profile)
            .map(|(s, m)| s - m)
            .sum::<usize>()
    );

    Ok(RatePlan {
        params,
        m_bar,
        t,
        l_star,
        size_profile,
        side_profile,
        r_star,
        trivial: r_star == k - m,
    })
}

/// Sufficient conditions under which downloading `K - M` is optimal:
/// `N > M` or `N^2 + N >= K - M`.
pub fn is_trivial_optimal(params: ProblemParams) -> bool {
    let ProblemParams { k, m, n } = params;
    n > m || n * n + n >= k - m
}

//! Exhaustive minimization of the download cost over integer partitions of K
//! and side-information vectors. Independent of the closed form in
//! [`crate::rate`]; only usable at small K.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate::ProblemParams;

pub const DEFAULT_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CandidateSolution {
    /// Subspace sizes, non-increasing.
    pub parts: Vec<usize>,
    /// Side-information count used in each part, aligned with `parts`.
    pub m_vector: Vec<usize>,
    pub cost: usize,
}

/// Transmissions needed by one coding subspace of `size` messages that
/// exploits `m` side-information messages.
pub fn subspace_cost(size: usize, m: usize, n_demands: usize) -> Result<usize> {
    let cap = size.saturating_sub(n_demands);
    if size == 0 || m > cap {
        return Err(Error::InvalidParams(format!(
            "side count {m} outside 0..={cap} for a subspace of size {size}"
        )));
    }
    Ok(if size <= n_demands { size } else { size - m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Budget {
    /// The largest min(L, N) side counts sum to at most M.
    TopN,
    /// No cross-subspace constraint.
    Relaxed,
}

#[derive(Debug, Clone)]
pub struct Oracle {
    cap: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

impl Oracle {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check(&self, params: ProblemParams) -> Result<()> {
        params.validate()?;
        if params.k > self.cap {
            return Err(Error::OverCap {
                k: params.k,
                cap: self.cap,
            });
        }
        Ok(())
    }

    pub fn brute_force_rate(&self, params: ProblemParams) -> Result<usize> {
        self.check(params)?;
        Ok(search(params, Budget::TopN, false).0)
    }

    /// Minimum cost when each subspace may use its full side-information
    /// capacity regardless of the others. A lower bound on the true rate.
    pub fn unbudgeted_rate(&self, params: ProblemParams) -> Result<usize> {
        self.check(params)?;
        Ok(search(params, Budget::Relaxed, false).0)
    }

    /// Every optimal (partition, side vector) pair, deduplicated.
    pub fn argmin_solutions(&self, params: ProblemParams) -> Result<Vec<CandidateSolution>> {
        self.check(params)?;
        let (cost, found) = search(params, Budget::TopN, true);
        let unique: BTreeSet<Vec<(usize, usize)>> = found
            .into_iter()
            .map(|(parts, ms)| {
                let mut pairs: Vec<(usize, usize)> = parts.into_iter().zip(ms).collect();
                pairs.sort_unstable_by(|a, b| b.cmp(a));
                pairs
            })
            .collect();
        Ok(unique
            .into_iter()
            .map(|pairs| {
                let (parts, m_vector) = pairs.into_iter().unzip();
                CandidateSolution {
                    parts,
                    m_vector,
                    cost,
                }
            })
            .collect())
    }
}

type Found = Vec<(Vec<usize>, Vec<usize>)>;

fn search(params: ProblemParams, budget: Budget, collect: bool) -> (usize, Found) {
    let mut memo = HashMap::new();
    let all = partitions(params.k, params.k, &mut memo);
    let mut best = usize::MAX;
    let mut found = Vec::new();
    for parts in all.iter() {
        let mut ms = Vec::with_capacity(parts.len());
        let mut state = Search {
            params,
            budget,
            parts,
            collect,
            best: &mut best,
            found: &mut found,
        };
        state.descend(&mut ms, 0);
    }
    (best, found)
}

struct Search<'a> {
    params: ProblemParams,
    budget: Budget,
    parts: &'a [usize],
    collect: bool,
    best: &'a mut usize,
    found: &'a mut Found,
}

impl Search<'_> {
    fn descend(&mut self, ms: &mut Vec<usize>, cost: usize) {
        let n = self.params.n;
        let i = ms.len();
        if i == self.parts.len() {
            if cost < *self.best {
                *self.best = cost;
                self.found.clear();
            }
            if cost == *self.best && self.collect {
                self.found.push((self.parts.to_vec(), ms.clone()));
            }
            return;
        }
        let size = self.parts[i];
        for m in 0..=size.saturating_sub(n) {
            ms.push(m);
            // Side counts are non-negative, so a prefix over budget stays over.
            if self.within_budget(ms) {
                let c = subspace_cost(size, m, n).expect("m within bounds");
                self.descend(ms, cost + c);
            }
            ms.pop();
        }
    }

    fn within_budget(&self, ms: &[usize]) -> bool {
        match self.budget {
            Budget::Relaxed => true,
            Budget::TopN => {
                let take = self.parts.len().min(self.params.n);
                let mut sorted = ms.to_vec();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                sorted.iter().take(take).sum::<usize>() <= self.params.m
            }
        }
    }
}

/// Partitions of `n` into parts no larger than `max`, in non-increasing order.
fn partitions(
    n: usize,
    max: usize,
    memo: &mut HashMap<(usize, usize), Vec<Vec<usize>>>,
) -> &Vec<Vec<usize>> {
    if !memo.contains_key(&(n, max)) {
        let mut out = Vec::new();
        if n == 0 {
            out.push(Vec::new());
        } else {
            for first in (1..=max.min(n)).rev() {
                let tails = partitions(n - first, first, memo).clone();
                for tail in tails {
                    let mut p = Vec::with_capacity(tail.len() + 1);
                    p.push(first);
                    p.extend(tail);
                    out.push(p);
                }
            }
        }
        memo.insert((n, max), out);
    }
    &memo[&(n, max)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, m: usize, n: usize) -> ProblemParams {
        ProblemParams::new(k, m, n).unwrap()
    }

    #[test]
    fn partition_counts() {
        // p(n) for n = 1..=14
        let expected = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135];
        let mut memo = HashMap::new();
        for (i, &count) in expected.iter().enumerate() {
            let n = i + 1;
            let ps = partitions(n, n, &mut memo).clone();
            assert_eq!(ps.len(), count);
            assert!(ps.iter().all(|p| p.iter().sum::<usize>() == n));
            assert!(ps.iter().all(|p| p.windows(2).all(|w| w[0] >= w[1])));
        }
    }

    #[test]
    fn subspace_costs() {
        assert_eq!(subspace_cost(4, 2, 2), Ok(2));
        assert_eq!(subspace_cost(2, 0, 2), Ok(2));
        assert_eq!(subspace_cost(5, 3, 2), Ok(2));
        assert!(subspace_cost(5, 4, 2).is_err());
        assert!(subspace_cost(2, 1, 2).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let o = Oracle::default();
        assert_eq!(o.brute_force_rate(params(13, 5, 2)), Ok(6));
        assert_eq!(o.brute_force_rate(params(5, 1, 2)), Ok(4));
        assert_eq!(o.brute_force_rate(params(7, 3, 1)), Ok(2));
    }

    #[test]
    fn over_cap() {
        let o = Oracle::default();
        assert_eq!(
            o.brute_force_rate(params(15, 2, 1)),
            Err(Error::OverCap { k: 15, cap: 14 })
        );
        assert!(Oracle::with_cap(15)
            .brute_force_rate(params(15, 2, 1))
            .is_ok());
    }

    #[test]
    fn argmin_examples() {
        let o = Oracle::default();
        let sols = o.argmin_solutions(params(13, 5, 2)).unwrap();
        assert!(sols
            .iter()
            .any(|s| s.parts == [5, 4, 4] && s.m_vector == [3, 2, 2]));
        assert!(sols.iter().all(|s| s.cost == 6));

        let sols = o.argmin_solutions(params(6, 0, 2)).unwrap();
        assert!(sols.iter().any(|s| s.parts == [1; 6] && s.cost == 6));

        let sols = o.argmin_solutions(params(7, 3, 1)).unwrap();
        assert!(sols
            .iter()
            .any(|s| s.parts == [4, 3] && s.m_vector == [3, 2]));
    }

    #[test]
    fn candidates_satisfy_invariants() {
        let o = Oracle::default();
        for p in ProblemParams::sweep(9) {
            for s in o.argmin_solutions(p).unwrap() {
                assert_eq!(s.parts.iter().sum::<usize>(), p.k);
                for (&size, &m) in s.parts.iter().zip(&s.m_vector) {
                    assert!(m <= size.saturating_sub(p.n));
                }
                let mut ms = s.m_vector.clone();
                ms.sort_unstable_by(|a, b| b.cmp(a));
                assert!(ms.iter().take(p.n.min(ms.len())).sum::<usize>() <= p.m);
            }
        }
    }

    #[test]
    fn bounded_by_download_all_but_side() {
        let o = Oracle::default();
        for p in ProblemParams::sweep(11) {
            assert!(o.brute_force_rate(p).unwrap() <= p.k - p.m);
        }
    }

    #[test]
    fn relaxing_budget_never_increases_cost() {
        for p in ProblemParams::sweep(10) {
            let o = Oracle::default();
            let budgeted = o.brute_force_rate(p).unwrap();
            let relaxed = o.unbudgeted_rate(p).unwrap();
            assert!(relaxed <= budgeted, "{p:?}");
        }
    }
}

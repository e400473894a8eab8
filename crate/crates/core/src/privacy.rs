//! Exact and statistical checks that a query reveals nothing about the demands.
//!
//! The server observes the layout (block supports in transmitted order; the
//! coefficients are a function of the block shapes). With a uniform prior on
//! the demand set and a uniform side set given the demands, privacy holds iff
//! the posterior over demand sets given any reachable layout is uniform.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rate::{compute_plan, ProblemParams};
use crate::scheme::{build_layout, construct, DemandSpec, Draws, Layout};

/// A non-negative rational in lowest terms, written `num/den`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(Ratio<BigUint>);

impl ExactProb {
    pub fn new(numer: impl Into<BigUint>, denom: impl Into<BigUint>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        Ok(Self(Ratio::new(numer.into(), denom)))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    }

    pub fn abs_diff(&self, other: &Self) -> Self {
        if self.0 >= other.0 {
            Self(&self.0 - &other.0)
        } else {
            Self(&other.0 - &self.0)
        }
    }

    fn ratio(numer: BigUint, denom: BigUint) -> Self {
        Self(Ratio::new(numer, denom))
    }
}

impl std::ops::Add for &ExactProb {
    type Output = ExactProb;
    fn add(self, rhs: &ExactProb) -> ExactProb {
        ExactProb(&self.0 + &rhs.0)
    }
}

impl std::ops::Mul for &ExactProb {
    type Output = ExactProb;
    fn mul(self, rhs: &ExactProb) -> ExactProb {
        ExactProb(&self.0 * &rhs.0)
    }
}

impl std::ops::Div for &ExactProb {
    type Output = ExactProb;
    fn div(self, rhs: &ExactProb) -> ExactProb {
        assert!(!rhs.is_zero(), "division by zero probability");
        ExactProb(&self.0 / &rhs.0)
    }
}

impl std::iter::Sum for ExactProb {
    fn sum<I: Iterator<Item = ExactProb>>(iter: I) -> Self {
        iter.fold(ExactProb::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for ExactProb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("expected num/den, got {s:?}"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        let n: BigUint = n.parse().map_err(|_| bad())?;
        let d: BigUint = d.parse().map_err(|_| bad())?;
        Self::new(n, d)
    }
}

impl Serialize for ExactProb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactProb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

fn check_sets(params: ProblemParams, w: &BTreeSet<usize>, s: &BTreeSet<usize>) -> Result<()> {
    DemandSpec::new(params, w.iter().copied(), s.iter().copied()).map(|_| ())
}

fn check_layout(layout: &Layout, params: ProblemParams) -> Result<()> {
    let plan = compute_plan(params)?;
    if *layout.plan() != plan {
        return Err(Error::InvalidLayout(format!(
            "layout was built for {:?}, not {:?}",
            layout.plan().params,
            params
        )));
    }
    Ok(())
}

/// Probability that the construction emits `layout` when the demands are
/// placed in the order given by `order` and the side set is `side`.
fn probability_in_order(layout: &Layout, order: &[usize], side: &BTreeSet<usize>) -> ExactProb {
    let plan = layout.plan();
    let count = plan.subspace_count();
    if count == 1 {
        return ExactProb::one();
    }
    let k = plan.params.k;
    let mut num = BigUint::one();
    let mut den = BigUint::one();

    let mut demands_in = vec![0usize; count];
    for (j, &w) in order.iter().enumerate() {
        let u = layout.subspace_of(w).expect("layout covers [1, K]");
        num *= (plan.size_profile[u] - demands_in[u]) as u64;
        den *= (k - j) as u64;
        demands_in[u] += 1;
    }

    let mut remaining = plan.params.m;
    let mut free = Vec::with_capacity(count);
    for (i, members) in layout.subspaces().iter().enumerate() {
        if demands_in[i] == 0 {
            free.push(members.len());
            continue;
        }
        let quota = plan.side_profile[i];
        let held = members.iter().filter(|x| side.contains(x)).count();
        if held < quota {
            return ExactProb::zero();
        }
        num *= binomial(held, quota);
        den *= binomial(remaining, quota);
        remaining -= quota;
        free.push(members.len() - demands_in[i] - quota);
    }

    for &e in &free {
        num *= factorial(e);
    }
    den *= factorial(free.iter().sum());
    ExactProb::ratio(num, den)
}

/// Probability that the construction emits exactly `layout` for demands `w`
/// and side information `s`.
pub fn layout_probability(
    layout: &Layout,
    w: &BTreeSet<usize>,
    s: &BTreeSet<usize>,
    params: ProblemParams,
) -> Result<ExactProb> {
    check_layout(layout, params)?;
    check_sets(params, w, s)?;
    let order: Vec<usize> = w.iter().copied().collect();
    Ok(probability_in_order(layout, &order, s))
}

pub const DEFAULT_BRANCH_CAP: usize = 2_000_000;

/// Replays a fixed prefix of choices, then takes the first admissible branch
/// at every later draw, recording what it saw.
struct Scripted<'a> {
    script: &'a [usize],
    trace: Vec<(usize, Vec<u64>)>,
}

impl Draws for Scripted<'_> {
    fn pick(&mut self, weights: &[u64]) -> usize {
        let at = self.trace.len();
        let choice = match self.script.get(at) {
            Some(&c) => c,
            None => weights
                .iter()
                .position(|&w| w > 0)
                .expect("some branch has weight"),
        };
        self.trace.push((choice, weights.to_vec()));
        choice
    }
}

/// Exhaustively expands every random branch of the construction and returns
/// the exact distribution over emitted layouts.
pub fn enumerate_randomness(
    params: ProblemParams,
    w: &BTreeSet<usize>,
    s: &BTreeSet<usize>,
    branch_cap: usize,
) -> Result<BTreeMap<Layout, ExactProb>> {
    check_sets(params, w, s)?;
    let plan = compute_plan(params)?;
    let spec = DemandSpec::new(params, w.iter().copied(), s.iter().copied())?;
    let mut dist: BTreeMap<Layout, ExactProb> = BTreeMap::new();
    let mut script: Vec<usize> = Vec::new();
    let mut branches = 0usize;
    loop {
        let mut draws = Scripted {
            script: &script,
            trace: Vec::new(),
        };
        let layout = construct(&plan, &spec, &mut draws);
        let trace = draws.trace;

        branches += 1;
        if branches > branch_cap {
            return Err(Error::BranchCapExceeded(branch_cap));
        }
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (c, weights) in &trace {
            num *= weights[*c];
            den *= weights.iter().sum::<u64>();
        }
        let p = ExactProb::ratio(num, den);
        let slot = dist.entry(layout).or_insert_with(ExactProb::zero);
        *slot = &*slot + &p;

        // Advance to the next branch in depth-first order.
        let next = trace
            .iter()
            .enumerate()
            .rev()
            .find_map(|(at, (c, weights))| {
                (c + 1..weights.len())
                    .find(|&i| weights[i] > 0)
                    .map(|i| (at, i))
            });
        match next {
            None => break,
            Some((at, choice)) => {
                script = trace[..at].iter().map(|(c, _)| *c).collect();
                script.push(choice);
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosteriorEntry {
    pub demands: Vec<usize>,
    pub probability: ExactProb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosteriorReport {
    pub params: ProblemParams,
    pub layout: Vec<Vec<usize>>,
    /// One entry per N-subset of `[1, K]`, lexicographic.
    pub entries: Vec<PosteriorEntry>,
    pub prior: ExactProb,
    pub max_deviation: ExactProb,
    pub uniform: bool,
}

impl PosteriorReport {
    pub fn probability_of(&self, demands: &[usize]) -> Option<&ExactProb> {
        self.entries
            .iter()
            .find(|e| e.demands == demands)
            .map(|e| &e.probability)
    }
}

/// Exact server posterior over demand sets after observing `layout`.
pub fn posterior(layout: &Layout, params: ProblemParams) -> Result<PosteriorReport> {
    check_layout(layout, params)?;
    let ProblemParams { k, m, n } = params;
    let prior = ExactProb::ratio(BigUint::one(), binomial(k, n));
    let side_prior = ExactProb::ratio(BigUint::one(), binomial(k - n, m));

    let mut weights = Vec::new();
    for w in (1..=k).combinations(n) {
        let rest: Vec<usize> = (1..=k).filter(|i| !w.contains(i)).collect();
        let likelihood: ExactProb = rest
            .iter()
            .copied()
            .combinations(m)
            .map(|s| probability_in_order(layout, &w, &s.into_iter().collect()))
            .sum();
        let joint = &(&likelihood * &side_prior) * &prior;
        weights.push((w, joint));
    }

    let total: ExactProb = weights.iter().map(|(_, p)| p.clone()).sum();
    if total.is_zero() {
        return Err(Error::Unreachable);
    }
    let entries: Vec<PosteriorEntry> = weights
        .into_iter()
        .map(|(demands, p)| PosteriorEntry {
            demands,
            probability: &p / &total,
        })
        .collect();
    let max_deviation = entries
        .iter()
        .map(|e| e.probability.abs_diff(&prior))
        .max()
        .unwrap_or_else(ExactProb::zero);
    Ok(PosteriorReport {
        params,
        layout: layout.subspaces().to_vec(),
        uniform: max_deviation.is_zero(),
        entries,
        prior,
        max_deviation,
    })
}

/// Permutation resamples used to estimate the null spread of the TVD.
pub const NULL_RESAMPLES: usize = 20;
pub const CONFIDENCE_EPSILON: f64 = 0.05;
pub const CONFIDENCE_DELTA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvdReport {
    pub params: ProblemParams,
    pub w_a: Vec<usize>,
    pub w_b: Vec<usize>,
    pub trials: usize,
    pub distinct_queries: usize,
    /// Total-variation distance between the two empirical query distributions.
    pub tvd: f64,
    /// Mean and standard deviation of the TVD under random relabelling of
    /// the pooled samples (the null of identical distributions).
    pub null_mean: f64,
    pub null_sd: f64,
    /// `null_mean + 3 * null_sd`.
    pub band: f64,
    pub within_band: bool,
    /// Samples per side so that, with probability `1 - delta`, the L1 error of
    /// an empirical distribution over `distinct_queries` outcomes stays below
    /// `epsilon`: `2 (k ln 2 + ln(1/delta)) / epsilon^2`.
    pub trials_for_confidence: u64,
    pub epsilon: f64,
    pub delta: f64,
}

fn empirical_tvd(ids: &[u32], split: usize, support: usize) -> f64 {
    let (a, b) = ids.split_at(split);
    let mut counts = vec![(0u64, 0u64); support];
    for &x in a {
        counts[x as usize].0 += 1;
    }
    for &x in b {
        counts[x as usize].1 += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    0.5 * counts
        .iter()
        .map(|&(x, y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

pub fn trials_for_confidence(support: usize, epsilon: f64, delta: f64) -> u64 {
    let bound =
        2.0 * (support as f64 * std::f64::consts::LN_2 + (1.0 / delta).ln()) / (epsilon * epsilon);
    bound.ceil() as u64
}

/// Runs the construction `trials` times for each of two demand sets (side
/// sets drawn uniformly) and compares the resulting query distributions.
pub fn monte_carlo_tvd<R: Rng + ?Sized>(
    params: ProblemParams,
    w_a: &BTreeSet<usize>,
    w_b: &BTreeSet<usize>,
    trials: usize,
    rng: &mut R,
) -> Result<TvdReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let mut interned: HashMap<Vec<Vec<usize>>, u32> = HashMap::new();
    let mut ids = Vec::with_capacity(2 * trials);
    for w in [w_a, w_b] {
        let rest: Vec<usize> = (1..=params.k).filter(|i| !w.contains(i)).collect();
        for _ in 0..trials {
            let side = sample(rng, rest.len(), params.m)
                .into_iter()
                .map(|i| rest[i]);
            let spec = DemandSpec::new(params, w.iter().copied(), side)?;
            let layout = build_layout(params, &spec, rng)?;
            let next = interned.len() as u32;
            ids.push(*interned.entry(layout.subspaces().to_vec()).or_insert(next));
        }
    }
    let support = interned.len();
    let tvd = empirical_tvd(&ids, trials, support);

    let mut shuffled = ids.clone();
    let null: Vec<f64> = (0..NULL_RESAMPLES)
        .map(|_| {
            shuffled.shuffle(rng);
            empirical_tvd(&shuffled, trials, support)
        })
        .collect();
    let mean = null.iter().sum::<f64>() / null.len() as f64;
    let var = null.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (null.len() as f64 - 1.0);
    let sd = var.sqrt();
    let band = mean + 3.0 * sd;

    Ok(TvdReport {
        params,
        w_a: w_a.iter().copied().collect(),
        w_b: w_b.iter().copied().collect(),
        trials,
        distinct_queries: support,
        tvd,
        null_mean: mean,
        null_sd: sd,
        band,
        within_band: tvd <= band,
        trials_for_confidence: trials_for_confidence(support, CONFIDENCE_EPSILON, CONFIDENCE_DELTA),
        epsilon: CONFIDENCE_EPSILON,
        delta: CONFIDENCE_DELTA,
    })
}

//! Partition-and-MDS-Coding: randomized layout, query, answer and decode.
//!
//! The user splits `[1, K]` into the coding subspaces prescribed by the
//! [`RatePlan`], drops the demands into random slots, tops up every
//! demand-holding subspace with its quota of side information, fills the
//! remaining slots uniformly at random, and asks the server for a Vandermonde
//! code of `size - m` rows on each subspace.
//!
//! Draw order, fixed so transcripts replay bit-for-bit from a seed:
//!
//! 1. one weighted pick per demand, demands in ascending index order;
//! 2. per demand-holding subspace, ascending, `m_i` uniform picks of a
//!    position in the sorted pool of not yet placed side-information indices;
//! 3. a Fisher-Yates shuffle of the remaining indices (ascending before the
//!    shuffle), dealt into the free slots in subspace order.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::mds::CodeMatrix;
use crate::rate::{compute_plan, ProblemParams, RatePlan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    field: PrimeField,
    values: Vec<FieldElement>,
}

impl Database {
    pub fn new(field: PrimeField, values: Vec<FieldElement>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParams(
                "database must hold at least one message".into(),
            ));
        }
        if let Some(x) = values.iter().find(|x| !field.contains(**x)) {
            return Err(Error::IncompatibleModuli {
                left: field.modulus(),
                right: x.field().modulus(),
            });
        }
        Ok(Self { field, values })
    }

    pub fn zeros(field: PrimeField, k: usize) -> Self {
        Self {
            field,
            values: vec![field.zero(); k],
        }
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, k: usize, rng: &mut R) -> Self {
        let values = (0..k)
            .map(|_| field.element(rng.random_range(0..field.modulus())))
            .collect();
        Self { field, values }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    /// Message `index`, counting from 1.
    pub fn get(&self, index: usize) -> Result<FieldElement> {
        index
            .checked_sub(1)
            .and_then(|i| self.values.get(i))
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                k: self.values.len(),
            })
    }
}

/// The user's private state: demanded indices, side-information indices and
/// (when decoding) the side-information values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandSpec {
    demands: Vec<usize>,
    side: BTreeSet<usize>,
    side_values: BTreeMap<usize, FieldElement>,
}

impl DemandSpec {
    pub fn new(
        params: ProblemParams,
        demands: impl IntoIterator<Item = usize>,
        side: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        params.validate()?;
        let demand_set: BTreeSet<usize> = demands.into_iter().collect();
        let side: BTreeSet<usize> = side.into_iter().collect();
        let k = params.k;
        if let Some(&i) = demand_set.iter().chain(&side).find(|&&i| i == 0 || i > k) {
            return Err(Error::IndexOutOfRange { index: i, k });
        }
        if demand_set.len() != params.n {
            return Err(Error::InvalidSpec(format!(
                "expected {} distinct demands, got {}",
                params.n,
                demand_set.len()
            )));
        }
        if side.len() != params.m {
            return Err(Error::InvalidSpec(format!(
                "expected {} distinct side-information indices, got {}",
                params.m,
                side.len()
            )));
        }
        if let Some(i) = demand_set.intersection(&side).next() {
            return Err(Error::InvalidSpec(format!(
                "index {i} is both demanded and held"
            )));
        }
        Ok(Self {
            demands: demand_set.into_iter().collect(),
            side,
            side_values: BTreeMap::new(),
        })
    }

    /// Attaches the side-information values read from `db`.
    pub fn with_values_from(mut self, db: &Database) -> Result<Self> {
        self.side_values = self
            .side
            .iter()
            .map(|&i| db.get(i).map(|x| (i, x)))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn with_values(mut self, values: BTreeMap<usize, FieldElement>) -> Result<Self> {
        if !values.keys().eq(self.side.iter()) {
            return Err(Error::InvalidSpec(
                "side-information values must cover exactly the side set".into(),
            ));
        }
        self.side_values = values;
        Ok(self)
    }

    /// Demanded indices, ascending.
    pub fn demands(&self) -> &[usize] {
        &self.demands
    }

    pub fn side(&self) -> &BTreeSet<usize> {
        &self.side
    }

    pub fn side_values(&self) -> &BTreeMap<usize, FieldElement> {
        &self.side_values
    }
}

/// An ordered partition of `[1, K]` into coding subspaces, each sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Layout {
    subspaces: Vec<Vec<usize>>,
    plan: RatePlan,
}

impl Layout {
    pub fn new(plan: RatePlan, subspaces: Vec<Vec<usize>>) -> Result<Self> {
        if subspaces.len() != plan.subspace_count() {
            return Err(Error::InvalidLayout(format!(
                "{} subspaces, plan has {}",
                subspaces.len(),
                plan.subspace_count()
            )));
        }
        let k = plan.params.k;
        let mut seen = vec![false; k + 1];
        let mut subspaces = subspaces;
        for (i, s) in subspaces.iter_mut().enumerate() {
            if s.len() != plan.size_profile[i] {
                return Err(Error::InvalidLayout(format!(
                    "subspace {} has {} members, plan size is {}",
                    i + 1,
                    s.len(),
                    plan.size_profile[i]
                )));
            }
            for &x in s.iter() {
                if x == 0 || x > k {
                    return Err(Error::IndexOutOfRange { index: x, k });
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidLayout(format!("index {x} appears twice")));
                }
            }
            s.sort_unstable();
        }
        Ok(Self { subspaces, plan })
    }

    pub fn subspaces(&self) -> &[Vec<usize>] {
        &self.subspaces
    }

    pub fn plan(&self) -> &RatePlan {
        &self.plan
    }

    /// Position of the subspace holding `index`.
    pub fn subspace_of(&self, index: usize) -> Option<usize> {
        self.subspaces
            .iter()
            .position(|s| s.binary_search(&index).is_ok())
    }
}

/// Source of the construction's random choices.
pub(crate) trait Draws {
    /// Picks `i` with probability `weights[i] / sum(weights)`.
    fn pick(&mut self, weights: &[u64]) -> usize;

    fn pick_uniform(&mut self, n: usize) -> usize {
        self.pick(&vec![1; n])
    }
}

struct RngDraws<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> Draws for RngDraws<'_, R> {
    fn pick(&mut self, weights: &[u64]) -> usize {
        let total: u64 = weights.iter().sum();
        let mut x = self.0.random_range(0..total);
        for (i, &w) in weights.iter().enumerate() {
            if x < w {
                return i;
            }
            x -= w;
        }
        unreachable!("draw below total weight")
    }

    fn pick_uniform(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }
}

fn check_spec(params: ProblemParams, spec: &DemandSpec) -> Result<()> {
    let k = params.k;
    let in_range = spec
        .demands
        .iter()
        .chain(&spec.side)
        .all(|&i| (1..=k).contains(&i));
    if !in_range || spec.demands.len() != params.n || spec.side.len() != params.m {
        return Err(Error::InvalidSpec(format!(
            "demand specification does not match K = {}, M = {}, N = {}",
            params.k, params.m, params.n
        )));
    }
    Ok(())
}

pub(crate) fn construct(plan: &RatePlan, spec: &DemandSpec, draws: &mut dyn Draws) -> Layout {
    let k = plan.params.k;
    let count = plan.subspace_count();
    if count == 1 {
        return Layout {
            subspaces: vec![(1..=k).collect()],
            plan: plan.clone(),
        };
    }
    let caps = &plan.size_profile;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];

    for &w in &spec.demands {
        let weights: Vec<u64> = (0..count)
            .map(|u| (caps[u] - members[u].len()) as u64)
            .collect();
        members[draws.pick(&weights)].push(w);
    }

    let mut pool: Vec<usize> = spec.side.iter().copied().collect();
    for (held, &quota) in members.iter_mut().zip(&plan.side_profile) {
        if held.is_empty() {
            continue;
        }
        for _ in 0..quota {
            let at = draws.pick_uniform(pool.len());
            held.push(pool.remove(at));
        }
    }

    let placed: BTreeSet<usize> = members.iter().flatten().copied().collect();
    let mut rest: Vec<usize> = (1..=k).filter(|i| !placed.contains(i)).collect();
    for i in (1..rest.len()).rev() {
        let j = draws.pick_uniform(i + 1);
        rest.swap(i, j);
    }
    let mut rest = rest.into_iter();
    for (i, slot) in members.iter_mut().enumerate() {
        slot.extend(rest.by_ref().take(caps[i] - slot.len()));
        slot.sort_unstable();
    }

    Layout {
        subspaces: members,
        plan: plan.clone(),
    }
}

/// Draws a layout for `spec` using `rng` as the only source of randomness.
pub fn build_layout<R: Rng + ?Sized>(
    params: ProblemParams,
    spec: &DemandSpec,
    rng: &mut R,
) -> Result<Layout> {
    check_spec(params, spec)?;
    let plan = compute_plan(params)?;
    Ok(construct(&plan, spec, &mut RngDraws(rng)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBlock {
    /// Message indices, ascending; column `j` of `matrix` is `support[j]`.
    pub support: Vec<usize>,
    pub matrix: CodeMatrix,
}

/// What the server sees: supports and coefficients, nothing else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    field: PrimeField,
    blocks: Vec<QueryBlock>,
}

impl Query {
    pub fn new(field: PrimeField, blocks: Vec<QueryBlock>) -> Result<Self> {
        for b in &blocks {
            if b.matrix.field() != field {
                return Err(Error::IncompatibleModuli {
                    left: field.modulus(),
                    right: b.matrix.field().modulus(),
                });
            }
            if b.support.len() != b.matrix.cols() {
                return Err(Error::LengthMismatch {
                    expected: b.matrix.cols(),
                    actual: b.support.len(),
                });
            }
        }
        Ok(Self { field, blocks })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn blocks(&self) -> &[QueryBlock] {
        &self.blocks
    }

    pub fn transmissions(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.rows()).sum()
    }

    /// Supports in block order. Coefficients depend only on block shapes, so
    /// this identifies the query.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.support.clone()).collect()
    }
}

pub fn make_query(layout: &Layout, field: PrimeField) -> Result<Query> {
    let plan = layout.plan();
    let blocks = layout
        .subspaces()
        .iter()
        .enumerate()
        .map(|(i, support)| {
            Ok(QueryBlock {
                support: support.clone(),
                matrix: CodeMatrix::vandermonde(plan.rows(i), support.len(), field)?,
            })
        })
        .collect::<Result<_>>()?;
    Query::new(field, blocks)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    blocks: Vec<Vec<FieldElement>>,
}

impl Answer {
    pub fn new(blocks: Vec<Vec<FieldElement>>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<FieldElement>] {
        &self.blocks
    }

    /// All coded symbols, concatenated in block order.
    pub fn transmissions(&self) -> Vec<FieldElement> {
        self.blocks.iter().flatten().copied().collect()
    }
}

pub fn server_answer(query: &Query, db: &Database) -> Result<Answer> {
    if query.field() != db.field() {
        return Err(Error::IncompatibleModuli {
            left: query.field().modulus(),
            right: db.field().modulus(),
        });
    }
    let blocks = query
        .blocks()
        .iter()
        .map(|b| {
            let xs: Vec<FieldElement> = b
                .support
                .iter()
                .map(|&i| db.get(i))
                .collect::<Result<_>>()?;
            b.matrix.encode(&xs)
        })
        .collect::<Result<_>>()?;
    Ok(Answer { blocks })
}

pub fn client_decode(
    query: &Query,
    answer: &Answer,
    spec: &DemandSpec,
) -> Result<BTreeMap<usize, FieldElement>> {
    if answer.blocks().len() != query.blocks().len() {
        return Err(Error::LengthMismatch {
            expected: query.blocks().len(),
            actual: answer.blocks().len(),
        });
    }
    let mut decoded = BTreeMap::new();
    for (block, codeword) in query.blocks().iter().zip(answer.blocks()) {
        let wanted: Vec<(usize, usize)> = block
            .support
            .iter()
            .enumerate()
            .filter(|(_, i)| spec.demands.binary_search(i).is_ok())
            .map(|(col, &i)| (col, i))
            .collect();
        if wanted.is_empty() {
            continue;
        }
        let known: BTreeMap<usize, FieldElement> = block
            .support
            .iter()
            .enumerate()
            .filter_map(|(col, i)| spec.side_values.get(i).map(|&x| (col, x)))
            .collect();
        let full = block.matrix.decode(codeword, &known).map_err(|e| match e {
            Error::InsufficientSideInformation { known, needed } => {
                Error::RetrievalViolated(format!(
                    "subspace {:?} has {known} side values, needs {needed}",
                    block.support
                ))
            }
            other => other,
        })?;
        for (col, i) in wanted {
            decoded.insert(i, full[col]);
        }
    }
    if let Some(&missing) = spec.demands.iter().find(|i| !decoded.contains_key(i)) {
        return Err(Error::RetrievalViolated(format!(
            "demand {missing} is not covered by the query"
        )));
    }
    Ok(decoded)
}

/// One full client/server exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub layout: Layout,
    pub query: Query,
    pub answer: Answer,
    pub decoded: BTreeMap<usize, FieldElement>,
}

/// Checks every decoded demand against the database.
pub fn verify_decoded(decoded: &BTreeMap<usize, FieldElement>, db: &Database) -> Result<()> {
    for (&i, &x) in decoded {
        if db.get(i)? != x {
            return Err(Error::DecodeMismatch { index: i });
        }
    }
    Ok(())
}

pub fn simulate_round<R: Rng + ?Sized>(
    params: ProblemParams,
    spec: &DemandSpec,
    db: &Database,
    rng: &mut R,
) -> Result<Round> {
    if db.len() != params.k {
        return Err(Error::LengthMismatch {
            expected: params.k,
            actual: db.len(),
        });
    }
    let layout = build_layout(params, spec, rng)?;
    let query = make_query(&layout, db.field())?;
    let answer = server_answer(&query, db)?;
    let decoded = client_decode(&query, &answer, spec)?;
    verify_decoded(&decoded, db)?;
    Ok(Round {
        layout,
        query,
        answer,
        decoded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(k: usize, m: usize, n: usize) -> ProblemParams {
        ProblemParams::new(k, m, n).unwrap()
    }

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn example_layout() -> Layout {
        let plan = compute_plan(params(13, 5, 2)).unwrap();
        Layout::new(
            plan,
            vec![vec![1, 2, 4, 6, 8], vec![3, 10, 11, 13], vec![5, 7, 9, 12]],
        )
        .unwrap()
    }

    /// Database with X1, X2, X4, X6, X8 = 3, 7, 2, 5, 11 and X_i = i elsewhere.
    fn example_db(f: PrimeField) -> Database {
        let mut v: Vec<u64> = (1..=13).collect();
        for (i, x) in [(1, 3), (2, 7), (4, 2), (6, 5), (8, 11)] {
            v[i - 1] = x;
        }
        Database::new(f, v.into_iter().map(|x| f.element(x)).collect()).unwrap()
    }

    #[test]
    fn spec_validation() {
        let p = params(13, 5, 2);
        assert!(DemandSpec::new(p, [2, 5], [1, 4, 6, 7, 9]).is_ok());
        assert!(DemandSpec::new(p, [2, 2], [1, 4, 6, 7, 9]).is_err());
        assert!(DemandSpec::new(p, [2, 5], [1, 4, 6, 7]).is_err());
        assert!(DemandSpec::new(p, [2, 5], [2, 4, 6, 7, 9]).is_err());
        assert!(DemandSpec::new(p, [2, 14], [1, 4, 6, 7, 9]).is_err());
        assert!(DemandSpec::new(p, [0, 5], [1, 4, 6, 7, 9]).is_err());
    }

    #[test]
    fn layout_validation() {
        let plan = compute_plan(params(13, 5, 2)).unwrap();
        let ok = vec![vec![8, 1, 2, 4, 6], vec![3, 10, 11, 13], vec![5, 7, 9, 12]];
        let l = Layout::new(plan.clone(), ok).unwrap();
        assert_eq!(l.subspaces()[0], [1, 2, 4, 6, 8]);
        assert_eq!(l.subspace_of(12), Some(2));
        assert!(Layout::new(
            plan.clone(),
            vec![vec![1, 2, 4, 6], vec![3, 8, 10, 11, 13], vec![5, 7, 9, 12]]
        )
        .is_err());
        assert!(Layout::new(
            plan.clone(),
            vec![vec![1, 2, 4, 6, 6], vec![3, 10, 11, 13], vec![5, 7, 9, 12]]
        )
        .is_err());
        assert!(Layout::new(plan, vec![(1..=13).collect()]).is_err());
    }

    #[test]
    fn example_query_coefficients() {
        let q = make_query(&example_layout(), gf(13)).unwrap();
        assert_eq!(q.transmissions(), 6);
        let b = &q.blocks()[0];
        assert_eq!(b.support, [1, 2, 4, 6, 8]);
        assert_eq!(b.matrix.row(0), &[1, 1, 1, 1, 1]);
        assert_eq!(b.matrix.row(1), &[1, 2, 3, 4, 5]);
        let b = &q.blocks()[2];
        assert_eq!(b.support, [5, 7, 9, 12]);
        assert_eq!(b.matrix.row(0), &[1, 1, 1, 1]);
        assert_eq!(b.matrix.row(1), &[1, 2, 3, 4]);
    }

    #[test]
    fn field_too_small_for_query() {
        assert!(make_query(&example_layout(), gf(5)).is_err());
    }

    #[test]
    fn example_answer_and_decode() {
        let f = gf(13);
        let db = example_db(f);
        let q = make_query(&example_layout(), f).unwrap();
        let a = server_answer(&q, &db).unwrap();
        let vals: Vec<u64> = a.blocks()[0].iter().map(|x| x.value()).collect();
        assert_eq!(vals, [2, 7]);
        // Independent dot products for the other two blocks.
        let dot = |support: &[usize], coeffs: &[u64]| {
            support
                .iter()
                .zip(coeffs)
                .map(|(&i, &c)| db.get(i).unwrap().value() * c)
                .sum::<u64>()
                % 13
        };
        let expected_t3 = dot(&[3, 10, 11, 13], &[1, 1, 1, 1]);
        let expected_t6 = dot(&[5, 7, 9, 12], &[1, 2, 3, 4]);
        assert_eq!(a.blocks()[1][0].value(), expected_t3);
        assert_eq!(a.blocks()[2][1].value(), expected_t6);

        let spec = DemandSpec::new(params(13, 5, 2), [2, 5], [1, 4, 6, 7, 9])
            .unwrap()
            .with_values_from(&db)
            .unwrap();
        let decoded = client_decode(&q, &a, &spec).unwrap();
        assert_eq!(decoded[&2].value(), 7);
        assert_eq!(decoded[&5], db.get(5).unwrap());
    }

    #[test]
    fn zero_database_gives_zero_answer() {
        let f = gf(13);
        let q = make_query(&example_layout(), f).unwrap();
        let a = server_answer(&q, &Database::zeros(f, 13)).unwrap();
        assert!(a.transmissions().iter().all(FieldElement::is_zero));
    }

    #[test]
    fn server_rejects_out_of_range_support() {
        let f = gf(13);
        let q = make_query(&example_layout(), f).unwrap();
        assert!(matches!(
            server_answer(&q, &Database::zeros(f, 12)),
            Err(Error::IndexOutOfRange { index: 13, .. })
        ));
    }

    #[test]
    fn decode_reports_missing_side_information() {
        let f = gf(13);
        let db = example_db(f);
        let q = make_query(&example_layout(), f).unwrap();
        let a = server_answer(&q, &db).unwrap();
        // Side set that does not match the layout: only X1 sits beside X2.
        let spec = DemandSpec::new(params(13, 5, 2), [2, 5], [1, 3, 7, 9, 10])
            .unwrap()
            .with_values_from(&db)
            .unwrap();
        assert!(matches!(
            client_decode(&q, &a, &spec),
            Err(Error::RetrievalViolated(_))
        ));
    }

    #[test]
    fn trivial_plan_uses_single_subspace() {
        let p = params(5, 1, 2);
        let spec = DemandSpec::new(p, [1, 3], [2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = build_layout(p, &spec, &mut rng).unwrap();
        assert_eq!(l.subspaces(), [vec![1, 2, 3, 4, 5]]);
        // No randomness consumed.
        let mut fresh = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(rng.random::<u64>(), fresh.random::<u64>());
    }

    #[test]
    fn layout_respects_plan_and_side_quota() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for p in ProblemParams::sweep(12) {
            let plan = compute_plan(p).unwrap();
            let demands: Vec<usize> = rand::seq::index::sample(&mut rng, p.k, p.n + p.m)
                .into_iter()
                .map(|i| i + 1)
                .collect();
            let spec =
                DemandSpec::new(p, demands[..p.n].to_vec(), demands[p.n..].to_vec()).unwrap();
            let l = build_layout(p, &spec, &mut rng).unwrap();
            let sizes: Vec<usize> = l.subspaces().iter().map(Vec::len).collect();
            assert_eq!(sizes, plan.size_profile);
            let mut used = 0;
            for (i, s) in l.subspaces().iter().enumerate() {
                if s.iter().any(|x| spec.demands().contains(x)) {
                    let held = s.iter().filter(|x| spec.side().contains(x)).count();
                    assert!(held >= plan.side_profile[i], "{p:?} {l:?}");
                    used += plan.side_profile[i];
                }
            }
            assert!(used <= p.m);
        }
    }

    #[test]
    fn same_seed_same_layout() {
        let p = params(13, 5, 2);
        let spec = DemandSpec::new(p, [2, 5], [1, 4, 6, 7, 9]).unwrap();
        let a = build_layout(p, &spec, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = build_layout(p, &spec, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn example_layout_is_reachable() {
        let p = params(13, 5, 2);
        let spec = DemandSpec::new(p, [2, 5], [1, 4, 6, 7, 9]).unwrap();
        let target = example_layout();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hit = (0..200_000).any(|_| build_layout(p, &spec, &mut rng).unwrap() == target);
        assert!(hit);
    }

    #[test]
    fn simulate_rounds_decode() {
        let f = gf(65537);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (k, m, n) in [(13, 5, 2), (7, 3, 1), (4, 0, 4), (20, 4, 2), (9, 4, 5)] {
            let p = params(k, m, n);
            let r_star = compute_plan(p).unwrap().r_star;
            for _ in 0..50 {
                let db = Database::random(f, k, &mut rng);
                let idx: Vec<usize> = rand::seq::index::sample(&mut rng, k, n + m)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
                let spec = DemandSpec::new(p, idx[..n].to_vec(), idx[n..].to_vec())
                    .unwrap()
                    .with_values_from(&db)
                    .unwrap();
                let round = simulate_round(p, &spec, &db, &mut rng).unwrap();
                assert_eq!(round.query.transmissions(), r_star);
                assert_eq!(round.answer.transmissions().len(), r_star);
                assert_eq!(round.decoded.len(), n);
            }
        }
    }

    #[test]
    fn colocated_demands_decode_together() {
        let f = gf(65537);
        let p = params(13, 5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut colocated = 0;
        for _ in 0..400 {
            let db = Database::random(f, 13, &mut rng);
            let spec = DemandSpec::new(p, [2, 5], [1, 4, 6, 7, 9])
                .unwrap()
                .with_values_from(&db)
                .unwrap();
            let round = simulate_round(p, &spec, &db, &mut rng).unwrap();
            if round.layout.subspace_of(2) == round.layout.subspace_of(5) {
                colocated += 1;
                assert_eq!(round.decoded[&2], db.get(2).unwrap());
                assert_eq!(round.decoded[&5], db.get(5).unwrap());
            }
        }
        assert!(colocated > 0);
    }

    #[test]
    fn full_rank_block_needs_no_side_information() {
        let f = gf(65537);
        let p = params(4, 0, 4);
        let db = Database::random(f, 4, &mut ChaCha8Rng::seed_from_u64(2));
        let spec = DemandSpec::new(p, [1, 2, 3, 4], [])
            .unwrap()
            .with_values_from(&db)
            .unwrap();
        let round = simulate_round(p, &spec, &db, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(round.query.transmissions(), 4);
        assert_eq!(
            round.decoded.values().copied().collect::<Vec<_>>(),
            db.values()
        );
    }
}

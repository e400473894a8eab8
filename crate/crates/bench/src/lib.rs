//! Fixtures shared by the criterion benches.

use pirsi_core::{Database, DemandSpec, Layout, PrimeField, ProblemParams, DEFAULT_MODULUS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn params(k: usize, m: usize, n: usize) -> ProblemParams {
    ProblemParams::new(k, m, n).expect("valid bench instance")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Demands `1..=N`, side information `N+1..=N+M`, random database.
pub fn instance(p: ProblemParams, seed: u64) -> (DemandSpec, Database) {
    let field = PrimeField::new(DEFAULT_MODULUS).expect("prime");
    let db = Database::random(field, p.k, &mut rng(seed));
    let spec = DemandSpec::new(p, 1..=p.n, p.n + 1..=p.n + p.m)
        .and_then(|s| s.with_values_from(&db))
        .expect("valid spec");
    (spec, db)
}

pub fn worked_example_layout() -> Layout {
    let plan = pirsi_core::compute_plan(params(13, 5, 2)).expect("plan");
    Layout::new(
        plan,
        vec![vec![1, 2, 4, 6, 8], vec![3, 10, 11, 13], vec![5, 7, 9, 12]],
    )
    .expect("layout")
}

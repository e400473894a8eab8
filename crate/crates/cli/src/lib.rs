//! `pirsi` command implementations. Each command writes one document to the
//! given writer; exit codes are derived from [`CliError`].

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pirsi_core::codec::{parse_database, to_canonical, RateDoc, Transcript};
use pirsi_core::oracle::DEFAULT_CAP;
use pirsi_core::privacy::{monte_carlo_tvd, posterior};
use pirsi_core::scheme::{build_layout, verify_decoded};
use pirsi_core::transport::{retrieve, InProcess, Server};
use pirsi_core::{
    compute_plan, is_trivial_optimal, Database, DemandSpec, Error, Oracle, PrimeField,
    ProblemParams, DEFAULT_MODULUS,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest K accepted by `privacy-exact`.
pub const EXACT_K_MAX: usize = 13;

#[derive(Debug, Parser)]
#[command(
    name = "pirsi",
    version,
    about = "Multi-message private retrieval with side information"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Instance {
    /// Number of messages in the database.
    #[arg(long)]
    pub k: usize,
    /// Number of side-information messages.
    #[arg(long)]
    pub m: usize,
    /// Number of demanded messages.
    #[arg(long)]
    pub n: usize,
}

impl Instance {
    fn params(&self) -> Result<ProblemParams, CliError> {
        ProblemParams::new(self.k, self.m, self.n).map_err(CliError::usage)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum download and the optimal subspace profile.
    Rate {
        #[command(flatten)]
        instance: Instance,
    },
    /// One full query/answer/decode round against a database file.
    Simulate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_delimiter = ',', required = true)]
        demands: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        side: Vec<usize>,
        /// Database file; a random database is drawn from the seed if absent.
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long, env = "PIR_SEED", default_value_t = 0)]
        seed: u64,
        /// Field modulus; must agree with the database header if both are given.
        #[arg(long)]
        p: Option<u64>,
        /// Include wall-clock time of the round in the transcript.
        #[arg(long)]
        timing: bool,
    },
    /// Exact server posterior for one sampled layout.
    PrivacyExact {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, env = "PIR_SEED", default_value_t = 0)]
        seed: u64,
        /// Demand set; drawn uniformly from the seed if absent.
        #[arg(long, value_delimiter = ',')]
        demands: Option<Vec<usize>>,
        /// Side set; drawn uniformly from the seed if absent.
        #[arg(long, value_delimiter = ',')]
        side: Option<Vec<usize>>,
    },
    /// Monte Carlo distance between query distributions of two demand sets.
    PrivacyMc {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_delimiter = ',', required = true)]
        wa: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        wb: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, env = "PIR_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Closed form against exhaustive search for every instance up to K-max.
    Oracle {
        #[arg(long)]
        k_max: usize,
        /// Also check the closed-form profile against all optimal solutions.
        #[arg(long)]
        exhaustive: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit code 2.
    Usage(String),
    /// Internal failure, decode mismatch or a failed check; exit code 1.
    Failure(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        Self::Usage(e.to_string())
    }

    fn failure(e: impl ToString) -> Self {
        Self::Failure(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Failure(m) => m,
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::failure(e)
}

fn emit(out: &mut dyn Write, doc: &str) -> Result<(), CliError> {
    writeln!(out, "{doc}").map_err(io)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Rate { instance } => rate(instance.params()?, out),
        Command::Simulate {
            instance,
            demands,
            side,
            db,
            seed,
            p,
            timing,
        } => simulate(
            instance.params()?,
            &demands,
            &side,
            db,
            seed,
            p,
            timing,
            out,
        ),
        Command::PrivacyExact {
            instance,
            seed,
            demands,
            side,
        } => privacy_exact(instance.params()?, seed, demands, side, out),
        Command::PrivacyMc {
            instance,
            wa,
            wb,
            trials,
            seed,
        } => privacy_mc(instance.params()?, &wa, &wb, trials, seed, out),
        Command::Oracle { k_max, exhaustive } => oracle(k_max, exhaustive, out),
    }
}

pub fn rate(params: ProblemParams, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = compute_plan(params).map_err(CliError::failure)?;
    let doc = RateDoc {
        plan: &plan,
        trivial_optimal: is_trivial_optimal(params),
    };
    emit(out, &to_canonical(&doc))
}

fn load_database(
    path: &PathBuf,
    params: ProblemParams,
    p: Option<u64>,
) -> Result<Database, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let db =
        parse_database(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(p) = p.filter(|&p| p != db.field().modulus()) {
        return Err(CliError::Usage(format!(
            "--p {p} disagrees with database modulus {}",
            db.field().modulus()
        )));
    }
    if db.len() != params.k {
        return Err(CliError::Usage(format!(
            "database holds {} messages but --k is {}",
            db.len(),
            params.k
        )));
    }
    Ok(db)
}

fn field_for(params: ProblemParams, p: u64) -> Result<PrimeField, CliError> {
    let field = PrimeField::new(p).map_err(CliError::usage)?;
    if p <= params.k as u64 {
        return Err(CliError::usage(Error::NotEnoughPoints {
            needed: params.k,
            modulus: p,
        }));
    }
    Ok(field)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    params: ProblemParams,
    demands: &[usize],
    side: &[usize],
    db_path: Option<PathBuf>,
    seed: u64,
    p: Option<u64>,
    timing: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let db = match &db_path {
        Some(path) => load_database(path, params, p)?,
        None => {
            let field = field_for(params, p.unwrap_or(DEFAULT_MODULUS))?;
            let mut db_rng = ChaCha8Rng::seed_from_u64(seed);
            db_rng.set_stream(1);
            Database::random(field, params.k, &mut db_rng)
        }
    };
    let field = field_for(params, db.field().modulus())?;
    let spec = DemandSpec::new(params, demands.iter().copied(), side.iter().copied())
        .and_then(|s| s.with_values_from(&db))
        .map_err(CliError::usage)?;

    let server = Server::new(db.clone());
    let mut link = InProcess::new(&server);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let round = retrieve(params, &spec, field, &mut link, &mut rng).map_err(CliError::failure)?;
    let elapsed = start.elapsed();
    verify_decoded(&round.decoded, &db).map_err(CliError::failure)?;

    let mut transcript = Transcript::from_round(params, seed, &round);
    if timing {
        transcript.timing_us = Some(elapsed.as_micros());
    }
    emit(out, &to_canonical(&transcript))
}

fn draw_sets(
    params: ProblemParams,
    rng: &mut ChaCha8Rng,
    demands: Option<Vec<usize>>,
    side: Option<Vec<usize>>,
) -> Result<DemandSpec, CliError> {
    let demands = match demands {
        Some(d) => d,
        None => sample(rng, params.k, params.n)
            .into_iter()
            .map(|i| i + 1)
            .collect(),
    };
    let side = match side {
        Some(s) => s,
        None => {
            let rest: Vec<usize> = (1..=params.k).filter(|i| !demands.contains(i)).collect();
            if rest.len() < params.m {
                return Err(CliError::Usage(
                    "not enough indices left for the side set".into(),
                ));
            }
            sample(rng, rest.len(), params.m)
                .into_iter()
                .map(|i| rest[i])
                .collect()
        }
    };
    DemandSpec::new(params, demands, side).map_err(CliError::usage)
}

pub fn privacy_exact(
    params: ProblemParams,
    seed: u64,
    demands: Option<Vec<usize>>,
    side: Option<Vec<usize>>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if params.k > EXACT_K_MAX {
        return Err(CliError::Usage(format!(
            "exact posterior limited to K <= {EXACT_K_MAX}; use privacy-mc"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = draw_sets(params, &mut rng, demands, side)?;
    let layout = build_layout(params, &spec, &mut rng).map_err(CliError::failure)?;
    let report = posterior(&layout, params).map_err(CliError::failure)?;
    emit(out, &to_canonical(&report))?;
    if !report.uniform {
        return Err(CliError::Failure(format!(
            "posterior is not uniform: max deviation {}",
            report.max_deviation
        )));
    }
    Ok(())
}

pub fn privacy_mc(
    params: ProblemParams,
    wa: &[usize],
    wb: &[usize],
    trials: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let wa: BTreeSet<usize> = wa.iter().copied().collect();
    let wb: BTreeSet<usize> = wb.iter().copied().collect();
    for w in [&wa, &wb] {
        if w.len() != params.n || w.iter().any(|&i| i == 0 || i > params.k) {
            return Err(CliError::Usage(format!(
                "demand set {w:?} must hold {} distinct indices in 1..={}",
                params.n, params.k
            )));
        }
    }
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = monte_carlo_tvd(params, &wa, &wb, trials, &mut rng).map_err(CliError::failure)?;
    emit(out, &to_canonical(&report))
}

pub fn oracle(k_max: usize, exhaustive: bool, out: &mut dyn Write) -> Result<(), CliError> {
    if k_max == 0 || k_max > DEFAULT_CAP {
        return Err(CliError::Usage(format!(
            "--k-max must be in 1..={DEFAULT_CAP}"
        )));
    }
    let oracle = Oracle::default();
    let mut mismatches = 0usize;
    if exhaustive {
        writeln!(out, "K\tM\tN\toracle\tclosed\tmatch\tin_argmin\toptima").map_err(io)?;
    } else {
        writeln!(out, "K\tM\tN\toracle\tclosed\tmatch").map_err(io)?;
    }
    for params in ProblemParams::sweep(k_max) {
        let plan = compute_plan(params).map_err(CliError::failure)?;
        let brute = oracle.brute_force_rate(params).map_err(CliError::failure)?;
        let mut ok = brute == plan.r_star;
        let ProblemParams { k, m, n } = params;
        write!(out, "{k}\t{m}\t{n}\t{brute}\t{}\t{ok}", plan.r_star).map_err(io)?;
        if exhaustive {
            let optima = oracle.argmin_solutions(params).map_err(CliError::failure)?;
            let mut pairs: Vec<(usize, usize)> = plan
                .size_profile
                .iter()
                .copied()
                .zip(plan.side_profile.iter().copied())
                .collect();
            pairs.sort_unstable_by(|a, b| b.cmp(a));
            let (parts, ms): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let found = optima.iter().any(|s| s.parts == parts && s.m_vector == ms);
            ok &= found;
            write!(out, "\t{found}\t{}", optima.len()).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
        mismatches += usize::from(!ok);
    }
    if mismatches > 0 {
        return Err(CliError::Failure(format!(
            "{mismatches} mismatching instances"
        )));
    }
    Ok(())
}

//! Single-server private retrieval of several messages when the user already
//! holds some of the database as side information.
//!
//! The crate covers the whole pipeline:
//!
//! - [`rate`]: closed-form minimum number of transmissions and the optimal
//!   subspace/side-information profile;
//! - [`oracle`]: brute-force search over integer partitions that the closed
//!   form is checked against;
//! - [`scheme`]: the randomized partition-and-MDS construction, server
//!   answers and client decoding;
//! - [`privacy`]: exact posterior computation and Monte Carlo comparison of
//!   query distributions;
//! - [`field`], [`mds`]: prime-field arithmetic and Vandermonde codes;
//! - [`codec`], [`transport`]: canonical documents and the byte-stream split
//!   between client and server.
//!
//! ```
//! use pirsi_core::{compute_plan, ProblemParams};
//!
//! let plan = compute_plan(ProblemParams::new(13, 5, 2).unwrap()).unwrap();
//! assert_eq!(plan.r_star, 6);
//! assert_eq!(plan.size_profile, [5, 4, 4]);
//! ```

pub mod codec;
pub mod error;
pub mod field;
pub mod mds;
pub mod oracle;
pub mod privacy;
pub mod rate;
pub mod scheme;
pub mod transport;

pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField, DEFAULT_MODULUS};
pub use mds::CodeMatrix;
pub use oracle::{CandidateSolution, Oracle};
pub use privacy::{ExactProb, PosteriorReport, TvdReport};
pub use rate::{compute_plan, is_trivial_optimal, ProblemParams, RatePlan};
pub use scheme::{Answer, Database, DemandSpec, Layout, Query, Round};

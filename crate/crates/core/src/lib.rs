//! Social-aware cooperative caching for fog radio access networks.
//!
//! The crate builds a seeded world of F-APs and users, scores cache
//! placements by a weighted sum of delivery delay and energy, groups F-APs
//! into clusters through a hedonic coalition game driven by pairwise social
//! ties, and searches placements with a binary firefly algorithm whose
//! capacity repair is guided by local content popularity. Random and greedy
//! baselines plus an exhaustive oracle are included for comparison.
//!
//! The guide in `book/` walks through each piece; its code listings are
//! compiled and run as doctests of this crate.

pub mod baselines;
pub mod cache;
pub mod error;
pub mod experiment;
pub mod firefly;
pub mod hcg;
mod matrix;
pub mod params;
mod partition;
pub mod radio;
pub mod rng;
pub mod scenario;
pub mod social;

pub use baselines::{exhaustive_optimal, greedy_local, random_caching, SchemeId};
pub use cache::{evaluate, feasible, EvalResult, Evaluator};
pub use error::{Error, Result};
pub use firefly::{run_fa, FaConfig, FaOutcome};
pub use hcg::{run_hcg, HcgConfig, HcgOutcome};
pub use matrix::CacheMatrix;
pub use params::SystemParams;
pub use partition::Partition;
pub use radio::LinkRateTable;
pub use scenario::{generate_scenario, zipf_distribution, Point, Scenario};
pub use social::{build_social_graph, SocialGraph};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenario.md")]
    mod scenario {}
    #[doc = include_str!("../../../book/src/radio.md")]
    mod radio {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/social.md")]
    mod social {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/firefly.md")]
    mod firefly {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}

//! Causal ordering estimation for linear non-Gaussian acyclic models that may
//! contain latent confounders.
//!
//! Variables that no confounder touches are found by testing, with HSIC and
//! Fisher's method, whether a candidate is independent of its regression
//! residuals. Exogenous variables are peeled off from the top and sinks from
//! the bottom; whatever is left is handled by repeating the search on every
//! variable subset and merging the subset orderings by plausibility.
//!
//! ```no_run
//! use parcelingam::prelude::*;
//!
//! let spec = builtin_network(&NetworkName::Chain { d: 3 }, 7).unwrap();
//! let (data, truth) = generate(&spec, 1000).unwrap();
//! let result = parce_lingam(&data, &HsicTest::default(), &DiscoveryConfig::default()).unwrap();
//! let score = score_ordering(&result.ordering, &truth, false).unwrap();
//! println!("precision {:?}, recall {}", score.precision, score.recall);
//! ```

pub mod discovery;
pub mod evaluation;
pub mod independence;
pub mod ordering;
pub mod simgen;
pub mod stats;

pub mod prelude {
    pub use crate::discovery::{
        hybrid_search, parce_lingam, parcel_search, plausibility, DiscoveryConfig, DiscoveryError,
        DiscoveryResult, HybridTrace, Strength,
    };
    pub use crate::evaluation::{score_ordering, score_strengths, ScoreReport};
    pub use crate::independence::{fisher_combine, hsic_test, HsicConfig, HsicTest, IndependenceTest};
    pub use crate::ordering::{
        build_ordering_matrix, merge_orderings, CausalOrderingMatrix, OrderedLists, PlausibilityRecord,
    };
    pub use crate::simgen::{builtin_network, generate, NetworkName, NoiseFamily, SemGroundTruth, SemSpec};
    pub use crate::stats::{center, DataMatrix, VariableId};
}

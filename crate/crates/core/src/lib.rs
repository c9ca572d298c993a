//! Tests for whether repeated orderings of a fixed item set were produced
//! by uniform randomization.
//!
//! The battery covers targeted tests (linear concordance against a given
//! score vector, rank compatibility), aggregate untargeted tests (Max LC,
//! Rank Test), disaggregated tests (Equality of Permutations, Cascading
//! Chi-Squared), adaptations for partial draws and shrinking series, and a
//! simulation harness for size and power studies.
//!
//! ```
//! use orderaudit::{cross_tabulate, OrderingSet};
//!
//! let set = OrderingSet::from_labels(&[vec!["A", "B", "C"], vec!["A", "C", "B"]]).unwrap();
//! let tab = cross_tabulate(&set);
//! assert_eq!(tab.counts[0], vec![2, 0, 0]);
//! ```

pub mod adapted;
pub mod aggregate;
pub mod dist;
pub mod error;
pub mod io;
pub mod mc;
pub mod ordering;
pub mod permutation;
pub mod result;
pub mod sim;
pub mod targeted;

pub use adapted::{
    frequency_test, ks_uniformity_test, positionwise_cascading_test, shrinking_max_lc_test,
    ShrinkSpec,
};
pub use aggregate::{
    enumerate_preference_rankings, max_lc_test, optimal_score_vector, rank_test, MaxLcMode,
};
pub use dist::{tail_probability, TailQuery};
pub use error::{Error, Result};
pub use io::{emit_report, parse_orderings, render_report, Input, InputFormat};
pub use mc::{derive_seed, mc_pvalue, McConfig};
pub use ordering::{
    cross_tabulate, remove_item, scores_from_ranking, CrossTab, Draw, ItemId, ItemOrdering,
    OrderingSet, PartialDrawSet, PreferenceRanking, ScoreVector, ShrinkingSeries,
};
pub use permutation::{
    cascading_chi_squared_test, equality_of_permutations_test, CascadeOrder, EqPermsOptions,
};
pub use result::{Method, TestResult};
pub use sim::{
    generate_delta_ordering, generate_general_ordering, run_power_study, GeneratorConfig,
    PowerStudySpec, PreferenceType, TestKind,
};
pub use targeted::{lc_test, rank_compatibility_test};

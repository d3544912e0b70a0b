//! Experiment orchestration: scale partitions and block statistics, the
//! boundary-influence decay sweep, the check suite and report output.

mod blocks;
mod config;
mod decay;
mod partition;
mod report;
mod suite;
mod svg;

pub use blocks::{block_statistics, block_statistics_from, BlockStat, BlockStatistics, PlusMinusSeries};
pub use config::{nested_square, BlockSpec, EngineMode, ExperimentConfig};
pub use decay::{block_csv, decay_csv, decay_experiment, default_block_shift, replica_gaps, write_outputs, BlockRow, DecayOutput, DecayRow, ReplicaGaps};
pub use partition::{largest_integer_below, ScalePartition};
pub use report::{all_pass, CheckReport};
pub use svg::{decay_plot, envelope};
pub use suite::{
    boundary_sup_discrepancy, central_difference, cftp_reruns_identical, cftp_standardized_error, coupling_order_violations, cross_engine_discrepancy,
    cumulant_derivative_error, domain_violation, exhaustive_alpha_spread, first_derivative_error, fkg_sandwich_violation, lemma_suite,
    partition_invariant_failure, shell_oracle_discrepancy, slope_identity_error, surgery_summary, SurgerySummary, SELECTORS,
};

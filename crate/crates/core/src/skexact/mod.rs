//! Exact quenched Gibbs computations for one disorder sample by full
//! enumeration of the `2^N` spin configurations.
//!
//! Replicas are i.i.d. under the Gibbs measure of a fixed disorder sample, so
//! every Gibbs expectation of a truncated-overlap monomial factorises into
//! central spin correlations, one factor per replica. No replica is ever
//! simulated for those; sampling is only needed for the overlap tail
//! statistic.

mod disorder;
mod dump;
mod enumerate;
mod moments;
mod rng;
mod sampling;
mod summary;
mod symmetric;

pub use disorder::{sample_disorder, DisorderSample, MAX_SITES, MAX_SITES_HIGH_ORDER};
pub use dump::{read_summary, write_summary, DUMP_MAGIC, DUMP_VERSION};
pub use moments::{
    empty_key_value, required_order, truncated_monomial_moment, truncated_pair_moment,
    vanishes_identically, CentralTensors, MAX_MONOMIAL_DEGREE,
};
pub use rng::{stream, StreamPurpose};
pub use sampling::{overlap_tail_statistic, sample_replicas, ReplicaSampler};
pub use summary::{gibbs_correlations, FieldMode, GibbsOptions, GibbsSummary};

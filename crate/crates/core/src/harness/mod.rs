//! Run histories, algorithm comparisons and file exports.

mod compare;
mod export;
mod history;

pub use compare::{aggregate, check_shared_budget, compare, compare_csv, mean_std, CompareReport, Curve};
pub use export::{
    dependency_pairs, deps_dot, deps_json, history_csv, pmodel_entries, pmodel_json, solution_json,
    write_run_artifacts, ModeEntry, PairDependency, HISTORY_HEADER,
};
pub use history::{IterationRecord, RunHistory};

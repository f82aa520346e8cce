//! Exact oracle, baselines, reports and checks of the analysis.

mod lemmas;
mod locality;
mod lp;
mod report;

pub use lemmas::{
    corrupt_run, run_lemma_suite, run_lemma_suite_on, tree_shape, Corruption, LemmaOptions,
    LemmaResult, LemmaSuite, Outcome, CHECKS,
};
pub use locality::{
    check_locality, check_locality_with, normalization_consistency, random_cover, Consistency,
    Locality,
};
pub use lp::{
    dense_rows, lp_feasible, maximize, solve_exact, solve_exact_bisection, LpFeasibility, PIVOT_TOL,
};
pub use report::{
    approximation_ratio, compare, compare_with, normalized_ratio_bound, ratio_bound,
    report_for_run, safe_baseline, Report, Timings, FEASIBILITY_TOL, RATIO_SLACK,
};

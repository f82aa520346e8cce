//! Baseline, ratio bound and the comparison report.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use super::lemmas::{run_lemma_suite_on, LemmaOptions, LemmaSuite};
use super::lp::solve_exact;
use crate::algo::Params;
use crate::error::Result;
use crate::instance::{check_feasible, utility, Instance, Node, Solution};
use crate::pipeline::{solve_instance, PipelineRun};

/// Feasibility slack used when checking computed solutions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Slack allowed on top of the ratio bound.
pub const RATIO_SLACK: f64 = 1e-3;

/// `x_v = min_i 1/(a_iv |V_i|)`. Feasible for every instance; agents
/// without constraints get 0. No ratio guarantee is asserted for it.
pub fn safe_baseline(inst: &Instance) -> Solution {
    Solution::new(
        (0..inst.n_agents())
            .map(|v| {
                let x = inst
                    .agent_constraints(v)
                    .map(|e| 1.0 / (e.coef * inst.degree(Node::Constraint(e.node)) as f64))
                    .fold(f64::INFINITY, f64::min);
                if x.is_finite() {
                    x
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// `Δ_I (1 - 1/Δ_K)(1 + 1/(R-1))`, with both degrees taken as at least 2.
pub fn ratio_bound(delta_i: usize, delta_k: usize, period: usize) -> f64 {
    let di = delta_i.max(2) as f64;
    let dk = delta_k.max(2) as f64;
    di * (1.0 - 1.0 / dk) * (1.0 + 1.0 / (period as f64 - 1.0))
}

/// The bound for normalized instances, `2 (1 - 1/Δ_K)(1 + 1/(R-1))`.
pub fn normalized_ratio_bound(delta_k: usize, period: usize) -> f64 {
    ratio_bound(2, delta_k, period)
}

/// `optimum / achieved`; 1 when both are 0 and infinite when only the
/// achieved value is.
pub fn approximation_ratio(optimum: f64, achieved: f64) -> f64 {
    if achieved > 0.0 {
        optimum / achieved
    } else if optimum > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub local: Duration,
    pub exact: Duration,
    pub lemmas: Duration,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub agents: usize,
    pub period: usize,
    pub delta_i: usize,
    pub delta_k: usize,
    pub exact_optimum: f64,
    pub local_utility: f64,
    pub ratio: f64,
    pub ratio_bound: f64,
    pub normalized_bound: f64,
    pub local_feasible: bool,
    pub baseline_utility: f64,
    pub lemmas: Option<LemmaSuite>,
    pub timings: Timings,
    pub local_solution: Solution,
}

impl Report {
    pub fn ratio_ok(&self) -> bool {
        self.ratio <= self.ratio_bound + RATIO_SLACK
    }

    pub fn passed(&self) -> bool {
        self.ratio_ok()
            && self.local_feasible
            && self.lemmas.as_ref().is_none_or(LemmaSuite::passed)
    }

    /// `key value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} {v}").unwrap();
        kv("agents", self.agents.to_string());
        kv("R", self.period.to_string());
        kv("delta_i", self.delta_i.to_string());
        kv("delta_k", self.delta_k.to_string());
        kv("exact_optimum", format!("{:?}", self.exact_optimum));
        kv("local_utility", format!("{:?}", self.local_utility));
        kv("ratio", format!("{:?}", self.ratio));
        kv("ratio_bound", format!("{:?}", self.ratio_bound));
        kv("normalized_bound", format!("{:?}", self.normalized_bound));
        kv("ratio_ok", self.ratio_ok().to_string());
        kv("local_feasible", self.local_feasible.to_string());
        kv(
            "baseline_utility",
            format!(
                "{:?} (baseline, no ratio guarantee asserted)",
                self.baseline_utility
            ),
        );
        kv(
            "time_local_ms",
            format!("{:.3}", self.timings.local.as_secs_f64() * 1e3),
        );
        kv(
            "time_exact_ms",
            format!("{:.3}", self.timings.exact.as_secs_f64() * 1e3),
        );
        kv(
            "time_lemmas_ms",
            format!("{:.3}", self.timings.lemmas.as_secs_f64() * 1e3),
        );
        if let Some(suite) = &self.lemmas {
            for r in &suite.results {
                kv(&format!("check.{}", r.name), r.outcome.to_string());
            }
        }
        kv("passed", self.passed().to_string());
        out
    }

    pub fn tsv_header() -> &'static str {
        "agents\tR\tdelta_i\tdelta_k\texact_optimum\tlocal_utility\tratio\tratio_bound\tlocal_feasible\tbaseline_utility\tlemmas\ttime_local_ms\ttime_exact_ms\tpassed"
    }

    /// One row matching [`Report::tsv_header`].
    pub fn to_tsv_row(&self) -> String {
        let lemmas = match &self.lemmas {
            None => "skipped".to_string(),
            Some(s) if s.passed() => "pass".to_string(),
            Some(s) => format!(
                "fail:{}",
                s.failures().map(|r| r.name).collect::<Vec<_>>().join(",")
            ),
        };
        format!(
            "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}\t{}\t{:?}\t{}\t{:.3}\t{:.3}\t{}",
            self.agents,
            self.period,
            self.delta_i,
            self.delta_k,
            self.exact_optimum,
            self.local_utility,
            self.ratio,
            self.ratio_bound,
            self.local_feasible,
            self.baseline_utility,
            lemmas,
            self.timings.local.as_secs_f64() * 1e3,
            self.timings.exact.as_secs_f64() * 1e3,
            self.passed()
        )
    }
}

/// Runs the pipeline and the exact oracle on `inst` and, when `lemmas` is
/// given, the lemma suite on the normalized instance.
pub fn compare_with(
    inst: &Instance,
    params: &Params,
    lemmas: Option<&LemmaOptions>,
) -> Result<Report> {
    let start = Instant::now();
    let run = solve_instance(inst, params)?;
    let local = start.elapsed();
    let mut report = report_for_run(inst, params, &run, lemmas)?;
    report.timings.local = local;
    Ok(report)
}

/// [`compare_with`] for a run that was computed, and possibly altered,
/// elsewhere. The utility is recomputed from `run.x`.
pub fn report_for_run(
    inst: &Instance,
    params: &Params,
    run: &PipelineRun,
    lemmas: Option<&LemmaOptions>,
) -> Result<Report> {
    let start = Instant::now();
    let (exact_optimum, _) = solve_exact(inst)?;
    let exact = start.elapsed();
    let start = Instant::now();
    let suite = match lemmas {
        Some(opts) => Some(run_lemma_suite_on(
            &run.normalized.instance,
            params,
            &run.local,
            opts,
        )?),
        None => None,
    };
    let lemma_time = start.elapsed();
    let local_utility = utility(inst, &run.x)?;
    let local_feasible = check_feasible(inst, &run.x, FEASIBILITY_TOL)?.feasible;
    let (delta_i, delta_k) = (inst.delta_i(), inst.delta_k());
    Ok(Report {
        agents: inst.n_agents(),
        period: params.period(),
        delta_i,
        delta_k,
        exact_optimum,
        local_utility,
        ratio: approximation_ratio(exact_optimum, local_utility),
        ratio_bound: ratio_bound(delta_i, delta_k, params.period()),
        normalized_bound: normalized_ratio_bound(delta_k, params.period()),
        local_feasible,
        baseline_utility: utility(inst, &safe_baseline(inst))?,
        lemmas: suite,
        timings: Timings {
            local: Duration::ZERO,
            exact,
            lemmas: lemma_time,
        },
        local_solution: run.x.clone(),
    })
}

pub fn compare(inst: &Instance, params: &Params) -> Result<Report> {
    compare_with(inst, params, Some(&LemmaOptions::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{e1, e2};
    use crate::instance::{Edge, Instance};

    #[test]
    fn baseline_examples() {
        assert_eq!(safe_baseline(&e1()).values, vec![0.5, 0.5]);
        assert_eq!(safe_baseline(&e2()).values, vec![0.5, 0.25]);
        // One agent in a 2-agent and a 3-agent constraint.
        let inst = Instance::new(
            4,
            2,
            1,
            vec![
                Edge::new(0, 0, 1.0, 1, 1),
                Edge::new(1, 0, 1.0, 1, 2),
                Edge::new(0, 1, 1.0, 2, 1),
                Edge::new(2, 1, 1.0, 1, 2),
                Edge::new(3, 1, 1.0, 1, 3),
            ],
            (0..4)
                .map(|v| Edge::new(v, 0, 1.0, if v == 0 { 3 } else { 2 }, v as u32 + 1))
                .collect(),
        );
        let x = safe_baseline(&inst);
        assert_eq!(x.get(0), 1.0 / 3.0);
        assert!(check_feasible(&inst, &x, 0.0).unwrap().feasible);
    }

    #[test]
    fn bounds() {
        assert_eq!(ratio_bound(2, 2, 3), 1.5);
        assert_eq!(ratio_bound(2, 2, 2), 2.0);
        assert_eq!(ratio_bound(4, 4, 4), 4.0);
        assert!((normalized_ratio_bound(3, 2) - 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(approximation_ratio(0.0, 0.0), 1.0);
        assert_eq!(approximation_ratio(1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn compare_examples() {
        let p3 = Params::new(3, 1e-9).unwrap();
        let p2 = Params::new(2, 1e-9).unwrap();
        let r = compare(&e1(), &p3).unwrap();
        assert!(
            (r.ratio - 1.0).abs() < 1e-6 && r.ratio_bound == 1.5 && r.passed(),
            "{}",
            r.to_text()
        );
        let r = compare(&e2(), &p2).unwrap();
        assert!(
            (r.ratio - 4.0 / 3.0).abs() < 1e-6 && r.ratio_bound == 2.0 && r.passed(),
            "{}",
            r.to_text()
        );
        let r = compare(&e1(), &p2).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6 && r.ratio_bound == 2.0 && r.passed());
        assert!(r.to_text().contains("ratio 1.0\n"));
        assert_eq!(
            r.to_tsv_row().split('\t').count(),
            Report::tsv_header().split('\t').count()
        );
    }
}

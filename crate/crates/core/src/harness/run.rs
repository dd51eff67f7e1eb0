use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    check_setting1, check_setting2, check_setting3, check_setting4, GapReport, GapReportJson,
};
use crate::error::{Error, Result};
use crate::json::Num;
use crate::scalar::Scalar;

use super::config::{ExperimentConfig, Setting};
use super::gen::{convert_instance, generate_instance, Instance};
use super::indices;

/// Exit status of a run: all checks passed.
pub const EXIT_PASS: i32 = 0;
/// Some inequality or identity failed.
pub const EXIT_VIOLATION: i32 = 1;
/// Bad configuration or an instance beyond a solver cap.
pub const EXIT_CONFIG: i32 = 2;

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Validation(_)
        | Error::Capacity { .. }
        | Error::OutOfRange { .. }
        | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_VIOLATION,
    }
}

/// Run the checker that belongs to the instance's setting.
pub fn check_instance<T: Scalar>(inst: &Instance<T>) -> Result<GapReport<T>> {
    let fs = || {
        inst.fs.as_ref().ok_or_else(|| {
            Error::Validation(format!("instance {} has no feasibility system", inst.id))
        })
    };
    match inst.setting {
        Setting::Independent => check_setting1(&inst.ts, &inst.id),
        Setting::Additive => check_setting2(&inst.ts, &inst.id),
        Setting::Matching => check_setting3(&inst.ts, fs()?, &inst.id),
        Setting::Matroid => check_setting4(&inst.ts, fs()?, &inst.id),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceError {
    pub instance_id: String,
    pub message: String,
    pub exit_code: i32,
}

/// Tightest observation of one inequality across a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate<T> {
    pub instances: usize,
    pub failures: usize,
    pub min_slack: T,
    pub min_slack_instance: String,
    pub max_ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunReport<T> {
    pub config: ExperimentConfig,
    pub reports: Vec<GapReport<T>>,
    pub errors: Vec<InstanceError>,
}

impl<T: Scalar> RunReport<T> {
    pub fn aggregate(&self) -> BTreeMap<String, Aggregate<T>> {
        let mut out: BTreeMap<String, Aggregate<T>> = BTreeMap::new();
        for r in &self.reports {
            for c in &r.checks {
                let slack = c.slack();
                let ratio = c.ratio().map(|x| x.to_f64());
                let a = out.entry(c.id.clone()).or_insert_with(|| Aggregate {
                    instances: 0,
                    failures: 0,
                    min_slack: slack.clone(),
                    min_slack_instance: r.instance_id.clone(),
                    max_ratio: None,
                });
                a.instances += 1;
                a.failures += usize::from(!c.passed());
                if a.min_slack.definitely_gt(&slack) {
                    a.min_slack = slack;
                    a.min_slack_instance = r.instance_id.clone();
                }
                a.max_ratio = match (a.max_ratio, ratio) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                };
            }
        }
        out
    }

    pub fn violations(&self) -> usize {
        self.reports.iter().map(|r| r.failures().count()).sum()
    }

    pub fn exit_code(&self) -> i32 {
        if let Some(code) = self.errors.iter().map(|e| e.exit_code).max() {
            return code.max(if self.violations() > 0 {
                EXIT_VIOLATION
            } else {
                EXIT_PASS
            });
        }
        if self.violations() > 0 {
            EXIT_VIOLATION
        } else {
            EXIT_PASS
        }
    }

    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        self.reports.iter().flat_map(GapReport::csv_rows).collect()
    }

    pub fn to_json(&self) -> RunReportJson<T> {
        RunReportJson {
            config: self.config.clone(),
            passed: self.exit_code() == EXIT_PASS,
            violations: self.violations(),
            aggregate: self
                .aggregate()
                .into_iter()
                .map(|(id, a)| AggregateJson {
                    inequality: id,
                    instances: a.instances,
                    failures: a.failures,
                    min_slack: Num(a.min_slack),
                    min_slack_instance: a.min_slack_instance,
                    max_ratio: a.max_ratio,
                })
                .collect(),
            instances: self.reports.iter().map(GapReport::to_json).collect(),
            errors: self.errors.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct AggregateJson<T: Scalar> {
    pub inequality: String,
    pub instances: usize,
    pub failures: usize,
    pub min_slack: Num<T>,
    pub min_slack_instance: String,
    pub max_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct RunReportJson<T: Scalar> {
    pub config: ExperimentConfig,
    pub passed: bool,
    pub violations: usize,
    pub aggregate: Vec<AggregateJson<T>>,
    pub instances: Vec<GapReportJson<T>>,
    pub errors: Vec<InstanceError>,
}

/// Run `f` on a pool of `workers` threads, or on rayon's default pool when
/// `workers` is 0.
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Without the `parallel` feature everything runs on the calling thread.
#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}

/// Generate and check every instance of the configuration. Reports come
/// back in instance order whatever the number of workers.
pub fn run_check<T: Scalar + Send + Sync>(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<RunReport<T>> {
    cfg.validate()?;
    let outcomes: Vec<std::result::Result<GapReport<T>, InstanceError>> =
        with_workers(workers, || {
            indices(cfg.count)
                .map(|k| {
                    let id = super::gen::instance_id(cfg, k);
                    let run = || -> Result<GapReport<T>> {
                        let inst = convert_instance::<T>(&generate_instance(cfg, k)?)?;
                        check_instance(&inst)
                    };
                    run().map_err(|e| {
                        log::warn!("{id}: {e}");
                        InstanceError {
                            instance_id: id,
                            message: e.to_string(),
                            exit_code: exit_code_for(&e),
                        }
                    })
                })
                .collect()
        })?;
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => reports.push(r),
            Err(e) => errors.push(e),
        }
    }
    Ok(RunReport {
        config: cfg.clone(),
        reports,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn small_run_is_deterministic_across_workers() {
        let cfg = ExperimentConfig {
            count: 6,
            ..Default::default()
        };
        let one = run_check::<Rational>(&cfg, 1).unwrap();
        let four = run_check::<Rational>(&cfg, 4).unwrap();
        let a = serde_json::to_string(&one.to_json()).unwrap();
        let b = serde_json::to_string(&four.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(one.exit_code(), EXIT_PASS, "{:?}", one.errors);
    }

    #[test]
    fn aggregate_counts_every_instance() {
        let cfg = ExperimentConfig {
            count: 3,
            ..Default::default()
        };
        let run = run_check::<Rational>(&cfg, 1).unwrap();
        let agg = run.aggregate();
        let a = &agg["lottery-le-4x-pricing"];
        assert_eq!(a.instances, 3);
        assert_eq!(a.failures, 0);
        assert_eq!(
            run.csv_rows().len(),
            run.reports.iter().map(|r| r.checks.len()).sum::<usize>()
        );
    }

    #[test]
    fn capacity_error_code() {
        let e = Error::Capacity {
            what: "x",
            count: 2,
            cap: 1,
        };
        assert_eq!(exit_code_for(&e), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Invariant("x".into())), EXIT_VIOLATION);
    }
}

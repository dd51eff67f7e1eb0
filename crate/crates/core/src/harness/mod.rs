//! Seeded instance generation, parallel checking, and the two worked
//! examples, shared by the command-line tool and the acceptance tests.

mod config;
mod gen;
mod repro;
mod run;

pub use config::{ExperimentConfig, Mode, Setting, VALUE_MAX};
pub use gen::{convert_instance, generate_instance, instance_id, Instance, InstanceJson};
pub use repro::{repro_appendix, repro_uniform56, AppendixReport, Uniform56Report};
pub use run::{
    check_instance, exit_code_for, run_check, with_workers, Aggregate, AggregateJson,
    InstanceError, RunReport, RunReportJson, EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATION,
};

/// `0..n`, split across the rayon pool when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn indices(n: usize) -> rayon::range::Iter<usize> {
    use rayon::prelude::*;
    (0..n).into_par_iter()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn indices(n: usize) -> std::ops::Range<usize> {
    0..n
}

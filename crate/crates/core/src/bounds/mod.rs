//! Pointwise and expected revenue bounds relating lottery mechanisms to
//! single-parameter benchmarks on the copies instance.

mod copies;
mod multi;
mod report;
mod single;

pub use copies::{
    best_item_per_agent, build_a_l, build_copies, check_copies_bound, derived_menu, ALRecord,
    AlEntry, CopiesInstance,
};
pub use multi::{
    check_claim_a2_bounds, check_setting3, check_setting4, monotonicity_violations, split_sets,
    threshold_outcome, SplitSets,
};
pub use report::{
    GapCheck, GapCheckJson, GapReport, GapReportJson, NamedValue, Pointwise, Relation,
};
pub use single::{additive_lift, check_setting1, check_setting2};

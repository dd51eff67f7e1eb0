//! Optimal mechanisms on small discrete instances: lottery menus and DSIC
//! mechanisms by linear programming, item pricings by vertex enumeration, and
//! Myerson's mechanism for single-parameter agents.

mod dsic;
mod menu;
mod myerson;
mod pricing;

pub use dsic::{dsic_lp, optimal_dsic_lp, DsicOptimum, DSIC_LP_CAP};
pub use menu::{menu_lp, optimal_menu_lp, MenuOptimum, MENU_LP_TYPE_CAP};
pub use myerson::{
    expected_vickrey, monopoly_price, myerson, vickrey, virtual_values, MyersonOutcome,
    VirtualValueJson, VirtualValueTable,
};
pub use pricing::{
    optimal_pricing_by_assignment, optimal_pricing_exact, optimal_symmetric_price,
    pricing_grid_search, PricingOptimum, ASSIGNMENT_CAP, GRID_CAP,
};

//! Exact computation of optimal lottery menus, item pricings and Myerson
//! auctions on small discrete unit-demand instances, together with checkers
//! for the revenue-gap inequalities relating them.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod feas;
pub mod harness;
pub mod json;
pub mod lp;
pub mod mech;
pub mod opt;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

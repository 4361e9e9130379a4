//! LP-based item pricing for profit maximization in limited-supply
//! combinatorial auctions.

pub mod capprofit;
pub mod decomp;
pub mod error;
pub mod gen;
pub mod highway;
pub mod io;
pub mod lpkit;
pub mod model;
pub mod num;
pub mod oracle;
pub mod seeding;
pub mod suite;
pub mod swm;
pub mod treeprice;

pub use error::{PricingError, Result};
pub use model::{
    check_subadditive, demand, evaluate, evaluate_with, Allocation, EvalOptions, Instance, InstanceKind, Interval,
    ItemSet, PriceVector, PricedOutcome, TreeShape, Valuation,
};
pub use num::{Money, Numeric};

//! Exact continued-fraction arithmetic.
//!
//! Everything here works on arbitrary-size integers and rationals; no value
//! in this module passes through floating point except [`CFNumber::to_f64`].

mod interval;
mod number;
mod spec;

pub use interval::RationalInterval;
pub use number::{biased_elements, cf_product, CFNumber, Convergent, Rotation, MAX_TERMS};
pub use spec::CfSpec;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContFracError {
    #[error("refinement needed more than {terms} continued-fraction terms")]
    RefinementLimit { terms: usize },
    #[error("enclosure width bound must be positive")]
    NonPositiveWidth,
    #[error("invalid continued-fraction element {0:?}")]
    InvalidElement(String),
}

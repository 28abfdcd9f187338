// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flights;
pub mod fracpoisson;
pub mod mcbride;
pub mod pdecheck;
pub mod planar;
pub mod quad;
pub mod sampling;
pub mod specfun;
pub mod stats;
pub mod telegraph;

pub use error::{Error, Result};

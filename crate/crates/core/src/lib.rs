//! Superstable parameters of the quadratic family `f_c(x) = 1 - c x^2`.

pub mod counting;
pub mod error;
pub mod exact;
pub mod family;
pub mod ladder;
pub mod numeric;
pub mod par;
pub mod report;
pub mod roots;

pub use error::{Error, Result};
pub use numeric::{Precision, Scalar, Sign, Tolerances};
pub use par::Execution;
pub use family::{Family, Quadratic};
pub use roots::{RootFinder, RootResult};
pub use ladder::Ladder;
pub use counting::CountTable;

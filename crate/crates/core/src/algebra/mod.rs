//! Exact arithmetic: F_{p^r} elements, Laurent/power series in u, and 2x2
//! series matrices.

pub mod field;
pub mod mat2;
pub mod series;

pub use field::{FieldCtor, FieldElem, FieldParams};
pub use mat2::Mat2;
pub use series::{Precision, Series, Valuation};

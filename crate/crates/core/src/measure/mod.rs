//! Exact probability and sub-probability mass functions on finite product
//! spaces. The reference measure is counting measure, so densities and mass
//! functions coincide.

mod mass;
mod sequence;
mod space;

pub use mass::{total_variation, MassFunction};
pub use sequence::{ProcessSequenceSpec, TailRule};
pub use space::{Alphabet, Point, ProductSpace};

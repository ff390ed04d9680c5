pub mod coeff;
pub mod error;
pub mod monomial;
pub mod series;
pub mod matrix;
pub mod parse;
pub mod manifold;
pub mod segre;
pub mod nondegeneracy;
pub mod reflection;
pub mod diagnostic;
pub mod input;
pub mod report;

#[cfg(test)]
mod testutil;

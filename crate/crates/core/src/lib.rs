//! Property testers for Boolean functions over F₂ⁿ, tester combinators for
//! unions, intersections and set differences of properties, and exact
//! brute-force oracles for checking their quantitative guarantees at small n.

pub mod claims;
pub mod cli;
pub mod combinators;
pub mod error;
pub mod gf2;
pub mod hardness;
pub mod patterns;
pub mod properties;
pub mod rational;
pub mod testers;
pub mod tt;

pub use error::{Error, Result};
pub use gf2::{make_disjunction, BoolFn, LinearForm, Point};
pub use patterns::PatternClass;
pub use rational::Rational;

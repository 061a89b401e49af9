pub mod convolution;
pub mod corpus;
pub mod cyclotomic;
pub mod error;
pub mod isogeny;
pub mod katz;
pub mod linalg;
pub mod localdata;

pub use convolution::MonodromyTuple;
pub use cyclotomic::{CyclotomicNumber, RootOfUnity};
pub use error::{Error, Result};
pub use katz::{ConstructionPlan, PlanStep, ProjectionMap, ReductionTrace};
pub use linalg::{FormClassification, GroupSpec, Matrix};
pub use localdata::{FormalLocalSystem, GroupFamily, GroupSpecTag, JordanClass};

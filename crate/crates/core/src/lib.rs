pub mod bv;
pub mod doldkan;
pub mod error;
pub mod fixtures;
pub mod hops;
pub mod linalg;
pub mod nerve;
pub mod operads;
pub mod report;
pub mod trees;

pub use error::{Error, Result};
pub use linalg::{ChainComplex, GradedSpace, LinearMap, Matrix, Q};
pub use operads::{DgColoredOperad, Elem, OperadMorphism, Profile};
pub use report::Report;
pub use trees::{ColoredTree, Tree, TreeMap, TreeMapKind};

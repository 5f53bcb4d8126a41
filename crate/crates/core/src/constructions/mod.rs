//! Explicit admissible deformations: laminates and branched microstructures.

pub mod branch2d;
pub mod cuboid;
pub mod cylinder;
pub mod laminate;
pub mod nested;
pub mod profile;
pub mod transform;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    Domain(String),
}

pub use branch2d::{branch2d_one_dir, branch2d_two_dir, Branch2D, BranchMode, BranchPlan2D, Half};
pub use laminate::simple_laminate;
pub use nested::{nested_from_plan, nested_hat, nested_second_order, NestedPlan};
pub use cuboid::{cuboid3d, Cuboid, CuboidPlan};
pub use cylinder::cylinder3d;
pub use transform::coordinate_transform;

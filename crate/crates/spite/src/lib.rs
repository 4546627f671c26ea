//! Dynamic roadmap validity maintenance for motion planning in modified
//! environments.
//!
//! A roadmap (a geometric graph in configuration space) is built once for a
//! robot and an environment, and this crate keeps its node and edge validity
//! labels correct while obstacles are relocated. The core method approximates
//! the workspace volume swept by every node and edge with one capsule
//! ("cigar") per robot body, stores the capsules in a ternary AABB tree, and
//! on each obstacle move re-checks only the elements whose capsules intersect
//! the obstacle's bounding box plus the elements the obstacle was previously
//! blocking.
//!
//! Alongside the capsule index there are two reference updaters (a uniform
//! workspace grid and a brute-force revalidation) and three query-time
//! planners (label-respecting roadmap search, LazyPRM, RRT) used for
//! head-to-head comparison. All updaters maintain identical label state; they
//! differ only in how candidate elements are retrieved.

pub mod baselines;
pub mod error;
pub mod geom;
pub mod planners;
pub mod roadmap;
pub mod robot;
pub mod stats;
pub mod sweep;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

//! Ultrametric spaces generated by vertex-labeled trees.
//!
//! A labeling `l` of the vertices of a tree induces `d(u, v) = max l(w)` over
//! the path joining `u` and `v`; this is an ultrametric exactly when no edge
//! has both endpoints labeled `0`. The crate provides:
//!
//! * [`tree`]: finite labeled trees, paths, convex hulls, vertex deletion;
//! * [`index`]: logarithmic-time distance queries, balls, covers, clusters;
//! * [`generators`]: lazily described infinite trees, deterministic
//!   truncation, almost-ray classification and adversarial labelings;
//! * [`analysis`]: Cauchy diagnostics and budget-ladder checks of the
//!   characterization of almost rays.

pub mod analysis;
pub mod config;
pub mod generators;
pub mod index;
pub mod io;
pub mod label;
mod parallel;
pub mod tree;
pub mod vertex;

pub use index::{Ball, Cover, UltrametricIndex};
pub use label::{Label, Radius};
pub use tree::{Forest, LabeledTree, Path};
pub use vertex::{Address, VertexId};

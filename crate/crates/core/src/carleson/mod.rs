//! Partial sums, the model Carleson operator, trees and tree boundaries.

mod boundary;
mod choice;
mod model;
mod partial;
mod tree;

pub use boundary::{tree_boundary, BoundaryPiece, CarlesonViolation, TreeBoundary};
pub use choice::ChoiceFunction;
pub use model::{model_adjoint, model_operator, model_operator_naive, ModelVariant};
pub use partial::{maximal_partial_sum, partial_sum, partial_sum_bitile, MaximalPartialSum};
pub use tree::{littlewood_paley_tree, tree_operator, tree_split, Tree, TreeAux, TreeKind};

use thiserror::Error;

use crate::phase_plane::{Bitile, Tile};

#[derive(Debug, Error)]
pub enum Error {
    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: u32, right: u32 },

    #[error("side mismatch: both operands must live on the same side of the transform")]
    SideMismatch,

    #[error("grid of resolution {res} needs {expected} values, got {got}")]
    BadLength { res: u32, expected: usize, got: usize },

    #[error("point {0} lies outside [0, 1)")]
    OutsideUnitInterval(String),

    #[error("value {value} outside the admissible range {range}")]
    OutOfBand { value: u64, range: String },

    #[error("{0} is not a valid phase-plane rectangle at resolution {1}")]
    InvalidRect(String, u32),

    #[error("collection is not convex: {lower:?} <= {middle:?} <= {upper:?} with the middle bitile missing")]
    NotConvex {
        lower: Bitile,
        middle: Bitile,
        upper: Bitile,
    },

    #[error("tiles {0:?} and {1:?} overlap")]
    Overlap(Tile, Tile),

    #[error("tile {0:?} is not contained in the base region")]
    NotContained(Tile),

    #[error("region cannot be written as a disjoint union of tiles")]
    Untileable,

    #[error("tree mixes lacunary and overlapping bitiles")]
    MixedTree,

    #[error("tree is missing a top bitile")]
    MissingTop,

    #[error("bitile {0:?} violates the tree condition")]
    NotATree(Bitile),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Tiles, bitiles, the order on them, convexity, tilings, wave packets and
//! phase-space projections.

mod convex;
mod packet;
mod projection;
pub mod raster;
mod region;
mod tile;

pub use convex::{convex_hull, convexity_witness, ensure_convex, is_convex, ConvexityWitness};
pub use packet::{packet_coefficient, packet_sign, synthesize_scale, wave_packet, PacketTable};
pub use projection::{
    phase_projection, project_bitile, project_bitiles, project_bitiles_with_table, project_tiles, project_with_table,
    ProjectionTarget,
};
pub use region::{
    check_disjoint, refine_tiling, region_tiling, region_tiling_with, tile_in_region,
    SplitPreference,
};
pub use tile::{all_bitiles, all_tiles, le, tiles_at_scale, Bitile, BitileSet, PhaseRect, Tile};

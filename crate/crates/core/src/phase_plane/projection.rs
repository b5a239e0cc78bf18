//! Orthogonal projections onto spans of wave packets.

use std::collections::BTreeMap;

use crate::carleson::Tree;
use crate::error::Result;
use crate::grid::GridFunction;
use crate::scalar::Scalar;

use super::packet::{synthesize_scale, PacketTable};
use super::region::{check_disjoint, region_tiling};
use super::tile::{Bitile, BitileSet, Tile};

/// What to project onto.
#[derive(Clone, Copy, Debug)]
pub enum ProjectionTarget<'a> {
    /// Pairwise disjoint tiles.
    Tiles(&'a [Tile]),
    /// A convex bitile collection, through any tiling of its region.
    Bitiles(&'a BitileSet),
    /// The bitiles of a convex tree.
    Tree(&'a Tree),
}

/// `sum_p ⟨f, W_p⟩ W_p` from precomputed coefficients; tiles are assumed
/// disjoint.
pub fn project_with_table<S: Scalar>(table: &PacketTable<S>, tiles: &[Tile]) -> GridFunction<S> {
    let res = table.res();
    let mut by_scale: BTreeMap<u32, Vec<S>> = BTreeMap::new();
    for p in tiles {
        let k = p.k();
        let row = by_scale.entry(k).or_insert_with(|| vec![S::zero(); 1 << res]);
        let idx = ((p.time.position as usize) << (res - k)) | p.freq.position as usize;
        row[idx] = table.coefficient(p).clone();
    }
    let mut out = GridFunction::zeros(res, crate::grid::Side::Space);
    for (k, coeffs) in by_scale {
        let part = synthesize_scale(res, k, &coeffs);
        for (o, v) in out.values_mut().iter_mut().zip(part.values()) {
            *o += v;
        }
    }
    out
}

/// `Π_p f` for disjoint tiles.
pub fn project_tiles<S: Scalar>(tiles: &[Tile], f: &GridFunction<S>) -> Result<GridFunction<S>> {
    for t in tiles {
        t.validate(f.res())?;
    }
    check_disjoint(tiles)?;
    Ok(project_with_table(&PacketTable::new(f)?, tiles))
}

/// `Π_S f` for a convex bitile collection.
pub fn project_bitiles<S: Scalar>(s: &BitileSet, f: &GridFunction<S>) -> Result<GridFunction<S>> {
    project_bitiles_with_table(&PacketTable::new(f)?, s)
}

/// [`project_bitiles`] from precomputed coefficients.
pub fn project_bitiles_with_table<S: Scalar>(table: &PacketTable<S>, s: &BitileSet) -> Result<GridFunction<S>> {
    let tiles = region_tiling(s, table.res())?;
    Ok(project_with_table(table, &tiles))
}

/// `Π_P f = ⟨f, W_{P_u}⟩ W_{P_u} + ⟨f, W_{P_l}⟩ W_{P_l}`.
pub fn project_bitile<S: Scalar>(table: &PacketTable<S>, p: &Bitile) -> GridFunction<S> {
    project_with_table(table, &[p.lower(), p.upper()])
}

pub fn phase_projection<S: Scalar>(target: ProjectionTarget<'_>, f: &GridFunction<S>) -> Result<GridFunction<S>> {
    match target {
        ProjectionTarget::Tiles(t) => project_tiles(t, f),
        ProjectionTarget::Bitiles(s) => project_bitiles(s, f),
        ProjectionTarget::Tree(t) => project_bitiles(t.bitiles(), f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Side;
    use crate::phase_plane::region::{region_tiling_with, SplitPreference};
    use crate::phase_plane::{all_bitiles, tiles_at_scale};
    use crate::scalar::ExactScalar;

    fn sample(res: u32) -> GridFunction<ExactScalar> {
        GridFunction::from_fn(res, Side::Space, |c| ExactScalar::from_ratio(3 - (c as i64 * 5) % 7, 2))
    }

    #[test]
    fn complete_scale_reconstructs() {
        let f = sample(3);
        for k in 0..=3 {
            let tiles: Vec<Tile> = tiles_at_scale(3, k).collect();
            assert_eq!(project_tiles(&tiles, &f).unwrap(), f);
        }
        assert!(project_tiles(&[], &f).unwrap().is_zero());
    }

    #[test]
    fn both_tilings_of_a_bitile_agree() {
        let f = sample(2);
        let p = BitileSet::singleton(Bitile::at(0, 0, 1));
        let a = region_tiling_with(&p, 2, SplitPreference::FrequencyFirst).unwrap();
        let b = region_tiling_with(&p, 2, SplitPreference::TimeFirst).unwrap();
        assert_ne!(a, b);
        assert_eq!(project_tiles(&a, &f).unwrap(), project_tiles(&b, &f).unwrap());
    }

    #[test]
    fn projection_is_idempotent_and_contracting() {
        let f = sample(3);
        let s = all_bitiles(3).filter(|p| p.k() >= 1);
        let pf = project_bitiles(&s, &f).unwrap();
        assert_eq!(project_bitiles(&s, &pf).unwrap(), pf);
        assert!(pf.norm_sq() <= f.norm_sq());
    }
}

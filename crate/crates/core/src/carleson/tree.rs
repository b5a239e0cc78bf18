//! Trees and single-tree operators.

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::phase_plane::{le, project_bitiles, project_with_table, Bitile, BitileSet, PacketTable, Tile};
use crate::scalar::Scalar;

/// Bitiles under common top data: `I_P ⊆ I_T` and `ξ_T ∈ ω_P` for every
/// member, and `P ≤ P_T` when a top bitile is recorded.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Tree {
    bitiles: BitileSet,
    top_time: DyadicInterval,
    top_freq: u64,
    top_bitile: Option<Bitile>,
}

/// Position of `ξ_T` inside the members' frequency intervals.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreeKind {
    Empty,
    /// `ξ_T ∈ ω_{P_l}` for every member.
    Lacunary,
    /// `ξ_T ∈ ω_{P_u}` for every member.
    Overlapping,
    Mixed,
}

/// Output of [`tree_operator`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum TreeAux {
    /// `O_T f = sum ⟨f, W_{P_u}⟩ W_{P_u}`.
    #[default]
    Plain,
    /// `Π_T f` for overlapping trees, `O_T(Π_T f)` for lacunary ones.
    Projected,
}

impl Tree {
    pub fn new(bitiles: BitileSet, top_time: DyadicInterval, top_freq: u64) -> Result<Self> {
        let t = Self {
            bitiles,
            top_time,
            top_freq,
            top_bitile: None,
        };
        t.validate()?;
        Ok(t)
    }

    /// Tree with top bitile `P_T`, `I_T = I_{P_T}` and `ξ_T` the left
    /// endpoint of `ω_{P_T}`.
    pub fn with_top(bitiles: BitileSet, top: Bitile) -> Result<Self> {
        let t = Self {
            bitiles,
            top_time: top.time,
            top_freq: top.freq.position << top.freq.scale,
            top_bitile: Some(top),
        };
        t.validate()?;
        Ok(t)
    }

    /// Every bitile of `pool` below `top`, with top data from `top`.
    pub fn below(pool: &BitileSet, top: Bitile) -> Self {
        Self::with_top(pool.below(&top), top).expect("order implies tree")
    }

    fn validate(&self) -> Result<()> {
        for p in self.bitiles.iter() {
            let ok = self.top_time.contains(&p.time)
                && p.freq.contains_cell(self.top_freq as usize, 0)
                && self.top_bitile.map_or(true, |t| le(p, &t));
            if !ok {
                return Err(Error::NotATree(*p));
            }
        }
        Ok(())
    }

    pub fn bitiles(&self) -> &BitileSet {
        &self.bitiles
    }

    pub fn into_bitiles(self) -> BitileSet {
        self.bitiles
    }

    pub fn top_time(&self) -> DyadicInterval {
        self.top_time
    }

    /// `ξ_T`.
    pub fn top_freq(&self) -> u64 {
        self.top_freq
    }

    pub fn top_bitile(&self) -> Option<Bitile> {
        self.top_bitile
    }

    pub fn len(&self) -> usize {
        self.bitiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bitiles.is_empty()
    }

    fn in_lower(&self, p: &Bitile) -> bool {
        p.lower().freq.contains_cell(self.top_freq as usize, 0)
    }

    pub fn kind(&self) -> TreeKind {
        let lower = self.bitiles.iter().filter(|p| self.in_lower(p)).count();
        match (lower, self.bitiles.len() - lower) {
            (0, 0) => TreeKind::Empty,
            (_, 0) => TreeKind::Lacunary,
            (0, _) => TreeKind::Overlapping,
            _ => TreeKind::Mixed,
        }
    }

    fn with_bitiles(&self, bitiles: BitileSet) -> Self {
        Self {
            bitiles,
            ..self.clone()
        }
    }
}

/// `(T_l, T_o)`: members with `ξ_T` in the lower, resp. upper, half.
pub fn tree_split(t: &Tree) -> (Tree, Tree) {
    let lower = t.bitiles.filter(|p| t.in_lower(p));
    let upper = t.bitiles.difference(&lower);
    (t.with_bitiles(lower), t.with_bitiles(upper))
}

/// `{P : ω_P = [0, 2|I|^-1)}` over all dyadic `I ⊆ [0, 1)` at resolution
/// `res`, with `ξ_T = 0`; its upper packets are the Haar functions.
pub fn littlewood_paley_tree(res: u32) -> Tree {
    let bitiles = (0..res)
        .flat_map(|k| (0..1u64 << k).map(move |m| Bitile::at(k, m, 0)))
        .collect();
    Tree::new(bitiles, DyadicInterval::unit(), 0).expect("valid tree")
}

fn upper_sum<S: Scalar>(t: &Tree, f: &GridFunction<S>) -> Result<GridFunction<S>> {
    let uppers: Vec<Tile> = t.bitiles.iter().map(|p| p.upper()).collect();
    // members of one scale have disjoint time intervals, so the per-scale
    // coefficient layout holds each upper tile exactly once
    Ok(project_with_table(&PacketTable::new(f)?, &uppers))
}

pub fn tree_operator<S: Scalar>(t: &Tree, f: &GridFunction<S>, aux: TreeAux) -> Result<GridFunction<S>> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch);
    }
    match aux {
        TreeAux::Plain => upper_sum(t, f),
        TreeAux::Projected => match t.kind() {
            TreeKind::Empty => Ok(GridFunction::zeros(f.res(), Side::Space)),
            TreeKind::Overlapping => project_bitiles(&t.bitiles, f),
            TreeKind::Lacunary => upper_sum(t, &project_bitiles(&t.bitiles, f)?),
            TreeKind::Mixed => Err(Error::MixedTree),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{is_convex, wave_packet};
    use crate::scalar::ExactScalar;

    fn sample(res: u32) -> GridFunction<ExactScalar> {
        GridFunction::from_fn(res, Side::Space, |c| ExactScalar::from_ratio((c as i64 * 5) % 11 - 5, 3))
    }

    #[test]
    fn littlewood_paley_is_lacunary_haar_expansion() {
        let res = 4;
        let t = littlewood_paley_tree(res);
        assert_eq!(t.kind(), TreeKind::Lacunary);
        assert!(is_convex(t.bitiles()));
        let (l, o) = tree_split(&t);
        assert_eq!(l, t);
        assert!(o.is_empty());
        let f = sample(res);
        let mean = f.values().iter().fold(ExactScalar::zero(), |a, v| a + v.clone()).mul_pow2(-(res as i32));
        let expect = f.map(|v| v.clone() - mean.clone());
        assert_eq!(tree_operator(&t, &f, TreeAux::Plain).unwrap(), expect);
    }

    #[test]
    fn small_trees() {
        let f = sample(3);
        let empty = Tree::new(BitileSet::new(), DyadicInterval::unit(), 3).unwrap();
        assert!(tree_operator(&empty, &f, TreeAux::Plain).unwrap().is_zero());
        assert!(tree_operator(&empty, &f, TreeAux::Projected).unwrap().is_zero());
        let p = Bitile::at(1, 1, 0);
        let single = Tree::with_top(BitileSet::singleton(p), p).unwrap();
        let wu: GridFunction<ExactScalar> = wave_packet(&p.upper(), 3).unwrap();
        let c = f.inner_product(&wu).unwrap();
        assert_eq!(tree_operator(&single, &f, TreeAux::Plain).unwrap(), wu.scale(&c));
        // ξ_T = 0 lies in the lower half
        assert_eq!(single.kind(), TreeKind::Lacunary);
        let upper = Tree::new(BitileSet::singleton(p), p.time, 2).unwrap();
        assert_eq!(upper.kind(), TreeKind::Overlapping);
        let (l, o) = tree_split(&upper);
        assert!(l.is_empty() && o.len() == 1);
    }

    #[test]
    fn invalid_and_mixed() {
        let p = Bitile::at(1, 1, 0);
        assert!(matches!(
            Tree::new(BitileSet::singleton(p), p.time, 4),
            Err(Error::NotATree(_))
        ));
        let top = Bitile::at(0, 0, 0);
        let mixed = Tree::new(
            [Bitile::at(1, 0, 0), top].into_iter().collect(),
            DyadicInterval::unit(),
            1,
        )
        .unwrap();
        assert_eq!(mixed.kind(), TreeKind::Mixed);
        let f = sample(3);
        assert!(matches!(tree_operator(&mixed, &f, TreeAux::Projected), Err(Error::MixedTree)));
    }
}

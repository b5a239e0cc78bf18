//! Forests: disjoint unions of convex trees.

use serde::{Deserialize, Serialize};

use crate::carleson::Tree;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::phase_plane::{ensure_convex, Bitile, BitileSet, PhaseRect};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn new(trees: Vec<Tree>) -> Self {
        Self { trees }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Union of the member trees.
    pub fn bitiles(&self) -> BitileSet {
        self.trees.iter().flat_map(|t| t.bitiles().iter().copied()).collect()
    }

    /// Total number of bitiles counted with multiplicity.
    pub fn bitile_count(&self) -> usize {
        self.trees.iter().map(Tree::len).sum()
    }

    /// Whether no bitile belongs to two trees.
    pub fn trees_disjoint(&self) -> bool {
        self.bitile_count() == self.bitiles().len()
    }

    /// `N_F(x) = #{T : x ∈ I_T}` per cell.
    pub fn counting(&self, res: u32) -> Vec<u64> {
        let mut out = vec![0u64; 1 << res];
        for t in &self.trees {
            for c in t.top_time().cells(-(res as i32)) {
                out[c] += 1;
            }
        }
        out
    }

    pub fn counting_function<S: Scalar>(&self, res: u32) -> GridFunction<S> {
        let counts = self.counting(res);
        GridFunction::from_fn(res, Side::Space, |c| S::from_i64(counts[c] as i64))
    }

    /// `sum |I_T|` in cells of length `2^-res`.
    pub fn top_cells(&self, res: u32) -> u64 {
        self.trees
            .iter()
            .map(|t| 1u64 << (res as i32 + t.top_time().scale))
            .sum()
    }

    /// A pair of intersecting bitiles from distinct trees, if any.
    pub fn fefferman_violation(&self) -> Option<(Bitile, Bitile)> {
        for (i, a) in self.trees.iter().enumerate() {
            for b in &self.trees[i + 1..] {
                for p in a.bitiles().iter() {
                    for q in b.bitiles().iter() {
                        if p.intersects_rect(q) {
                            return Some((*p, *q));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_fefferman(&self) -> bool {
        self.fefferman_violation().is_none()
    }
}

/// Split a convex collection into trees: repeatedly take the canonically
/// smallest maximal bitile and everything below it.
pub fn forestify(s: &BitileSet) -> Result<Forest> {
    ensure_convex(s)?;
    let mut stock = s.clone();
    let mut trees = Vec::new();
    while let Some(top) = stock.maximal().first().copied() {
        let tree = Tree::below(&stock, top);
        stock = stock.difference(tree.bitiles());
        trees.push(tree);
    }
    Ok(Forest::new(trees))
}

/// `T* = {P ∈ pool : P ≤ P_T}`, keeping the top data of `T`.
pub fn saturation(t: &Tree, pool: &BitileSet) -> Result<Tree> {
    let top = t.top_bitile().ok_or(Error::MissingTop)?;
    Tree::with_top(pool.below(&top).union(t.bitiles()), top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{all_bitiles, is_convex};

    #[test]
    fn forestify_examples() {
        assert!(forestify(&BitileSet::new()).unwrap().is_empty());
        let top = Bitile::at(0, 0, 1);
        let tree = all_bitiles(3).below(&top);
        let f = forestify(&tree).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.trees[0].top_bitile(), Some(top));

        let all = all_bitiles(3);
        let f = forestify(&all).unwrap();
        assert_eq!(f.bitiles(), all);
        assert!(f.trees_disjoint());
        let mut rest = all.clone();
        for t in &f.trees {
            assert!(is_convex(t.bitiles()));
            rest = rest.difference(t.bitiles());
            assert!(is_convex(&rest));
        }
    }

    #[test]
    fn saturation_examples() {
        let all = all_bitiles(3);
        let top = Bitile::at(0, 0, 0);
        let t = Tree::with_top(BitileSet::singleton(top), top).unwrap();
        assert_eq!(saturation(&t, t.bitiles()).unwrap(), t);
        let s = saturation(&t, &all).unwrap();
        assert_eq!(s.bitiles(), &all.below(&top));
        assert_eq!(s.top_time(), t.top_time());
        let bare = Tree::new(BitileSet::new(), top.time, 0).unwrap();
        assert!(matches!(saturation(&bare, &all), Err(Error::MissingTop)));
    }

    #[test]
    fn counting_and_fefferman() {
        let a = Bitile::at(1, 0, 0);
        let b = Bitile::at(1, 0, 1);
        let f = Forest::new(vec![
            Tree::with_top(BitileSet::singleton(a), a).unwrap(),
            Tree::with_top(BitileSet::singleton(b), b).unwrap(),
        ]);
        assert_eq!(f.counting(2), vec![2, 2, 0, 0]);
        assert_eq!(f.top_cells(2), 4);
        assert!(f.is_fefferman());
        let c = Bitile::at(0, 0, 0);
        let g = Forest::new(vec![
            Tree::with_top(BitileSet::singleton(a), a).unwrap(),
            Tree::with_top(BitileSet::singleton(c), c).unwrap(),
        ]);
        assert_eq!(g.fefferman_violation(), Some((a, c)));
    }
}

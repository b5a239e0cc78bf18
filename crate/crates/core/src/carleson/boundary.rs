//! The partition `J_T` of a tree top and the engaged sets `G_J`.

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::grid::{CellSet, Measure};
use crate::phase_plane::{ensure_convex, Bitile};

use super::choice::ChoiceFunction;
use super::tree::Tree;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub interval: DyadicInterval,
    /// `G_J = J ∩ ⋃_{P : J ⊆ I_P} E(P)`.
    pub engaged: CellSet,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TreeBoundary {
    pub res: u32,
    pub pieces: Vec<BoundaryPiece>,
    /// `E(P)` for each member, in canonical order.
    pub engaged_sets: Vec<(Bitile, CellSet)>,
    /// `max |E(P)| / |I_P|` over members.
    pub mass: Measure,
}

/// A failed instance of `|G_J| ≤ 2 mass(T) |J|`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CarlesonViolation {
    pub interval: DyadicInterval,
    pub engaged: Measure,
    pub bound: Measure,
}

impl TreeBoundary {
    /// Union of all `G_J`.
    pub fn engaged_union(&self) -> CellSet {
        self.pieces
            .iter()
            .fold(CellSet::empty(self.res), |acc, p| acc.union(&p.engaged))
    }

    /// Whether the `J` partition the top interval.
    pub fn partitions(&self, top: DyadicInterval) -> bool {
        let unit = -(self.res as i32);
        let mut seen = CellSet::empty(self.res);
        for p in &self.pieces {
            if !top.contains(&p.interval) {
                return false;
            }
            for c in p.interval.cells(unit) {
                if seen.contains(c) {
                    return false;
                }
                seen.insert(c);
            }
        }
        seen == CellSet::from_interval(self.res, top)
    }

    /// Every `J` with `|G_J| > 2 mass(T) |J|`.
    pub fn carleson_violations(&self) -> Vec<CarlesonViolation> {
        self.pieces
            .iter()
            .filter_map(|p| {
                let engaged = p.engaged.measure();
                let bound = self.mass * Measure::from_integer(2) * interval_measure(p.interval);
                (engaged > bound).then_some(CarlesonViolation {
                    interval: p.interval,
                    engaged,
                    bound,
                })
            })
            .collect()
    }
}

fn interval_measure(i: DyadicInterval) -> Measure {
    Measure::new(1, 1i64 << (-i.scale))
}

fn collect_pieces(j: DyadicInterval, members: &[Bitile], out: &mut Vec<DyadicInterval>) {
    if members.iter().any(|p| j.contains(&p.time)) {
        let (l, r) = j.halves();
        collect_pieces(l, members, out);
        collect_pieces(r, members, out);
    } else {
        out.push(j);
    }
}

/// Maximal dyadic `J ⊆ I_T` containing no `I_P`, with their `G_J`.
pub fn tree_boundary(t: &Tree, n: &ChoiceFunction) -> Result<TreeBoundary> {
    ensure_convex(t.bitiles())?;
    let res = n.res();
    for p in t.bitiles().iter() {
        p.validate(res)?;
    }
    let top = t.top_time();
    if top.scale > 0 || top.scale < -(res as i32) {
        return Err(Error::InvalidRect(format!("{top:?}"), res));
    }
    let members: Vec<Bitile> = t.bitiles().iter().copied().collect();
    let engaged_sets: Vec<(Bitile, CellSet)> =
        members.iter().map(|p| (*p, n.engaged_set(p, None))).collect();
    let mass = members
        .iter()
        .map(|p| n.density(p, None))
        .max()
        .unwrap_or_else(|| Measure::from_integer(0));

    let mut intervals = Vec::new();
    collect_pieces(top, &members, &mut intervals);
    let pieces = intervals
        .into_iter()
        .map(|j| {
            let window = CellSet::from_interval(res, j);
            let engaged = engaged_sets
                .iter()
                .filter(|(p, _)| p.time.contains(&j))
                .fold(CellSet::empty(res), |acc, (_, e)| acc.union(e))
                .intersection(&window);
            BoundaryPiece {
                interval: j,
                engaged,
            }
        })
        .collect();
    Ok(TreeBoundary {
        res,
        pieces,
        engaged_sets,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleson::{model_operator, ModelVariant};
    use crate::grid::{GridFunction, Side};
    use crate::phase_plane::BitileSet;
    use crate::scalar::{ExactScalar, Scalar};

    #[test]
    fn singleton_partition() {
        let p = Bitile::at(1, 1, 0);
        let t = Tree::new(BitileSet::singleton(p), DyadicInterval::unit(), 0).unwrap();
        let n = ChoiceFunction::constant(3, 7).unwrap();
        let b = tree_boundary(&t, &n).unwrap();
        let js: Vec<_> = b.pieces.iter().map(|p| p.interval).collect();
        assert_eq!(
            js,
            vec![
                DyadicInterval::new(-1, 0),
                DyadicInterval::new(-2, 2),
                DyadicInterval::new(-2, 3)
            ]
        );
        assert!(b.partitions(DyadicInterval::unit()));
        // N = 7 avoids ω_P = [0, 4)
        assert!(b.pieces.iter().all(|p| p.engaged.is_empty()));
        assert_eq!(b.mass, Measure::from_integer(0));
    }

    #[test]
    fn support_and_carleson_bound() {
        let res = 3;
        let top = Bitile::at(0, 0, 0);
        let pool: BitileSet = crate::phase_plane::all_bitiles(res);
        let t = Tree::below(&pool, top);
        let n = ChoiceFunction::from_fn(res, |c| [0, 1, 3, 2, 0, 5, 1, 1][c]).unwrap();
        let b = tree_boundary(&t, &n).unwrap();
        assert!(b.partitions(top.time));
        assert!(b.carleson_violations().is_empty());
        let f = GridFunction::from_fn(res, Side::Space, |c| ExactScalar::from_ratio(c as i64 - 3, 2));
        let g = b.engaged_union();
        for v in [ModelVariant::UpperCoeff, ModelVariant::LowerCoeff] {
            let cf = model_operator(t.bitiles(), &f, &n, v).unwrap();
            for (x, val) in cf.values().iter().enumerate() {
                assert!(val.is_zero() || g.contains(x));
            }
        }
    }
}

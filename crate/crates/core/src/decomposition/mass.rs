//! The mass functional and the mass decomposition, absolute or relative to
//! a set `F`.

use serde::{Deserialize, Serialize};

use crate::carleson::{ChoiceFunction, Tree};
use crate::error::Result;
use crate::grid::{CellSet, Measure};
use crate::phase_plane::{ensure_convex, is_convex, Bitile, BitileSet, PhaseRect};

use super::forest::Forest;
use super::Audit;

fn mass_in(s: &BitileSet, n: &ChoiceFunction, f: Option<&CellSet>) -> Measure {
    s.iter()
        .map(|p| n.density(p, f))
        .max()
        .unwrap_or_else(|| Measure::from_integer(0))
}

/// `sup_P |E(P)| / |I_P|`, with `E(P)` replaced by `E_F(P) = F ∩ E(P)`
/// when `f` is given.
pub fn mass_of(s: &BitileSet, n: &ChoiceFunction, f: Option<&CellSet>) -> Result<Measure> {
    for p in s.iter() {
        p.validate(n.res())?;
    }
    Ok(mass_in(s, n, f))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MassSplit {
    pub tops: Vec<Bitile>,
    pub trees: Vec<Tree>,
    pub low: BitileSet,
}

/// Repeatedly select a maximal `t` with `mass(t) > bound / 2`, canonically
/// smallest first, and remove `T(t) = {P ∈ stock : P ≤ t}`.
pub fn mass_split(stock: &BitileSet, n: &ChoiceFunction, f: Option<&CellSet>, bound: Measure) -> MassSplit {
    let cut = bound / Measure::from_integer(2);
    let mut low = stock.clone();
    let mut qualifying = stock.filter(|p| n.density(p, f) > cut);
    let mut tops = Vec::new();
    let mut trees = Vec::new();
    while let Some(t) = qualifying.maximal().first().copied() {
        let tree = Tree::below(&low, t);
        low = low.difference(tree.bitiles());
        qualifying = qualifying.difference(tree.bitiles());
        tops.push(t);
        trees.push(Tree::with_top(tree.into_bitiles(), t).expect("members lie below the top"));
    }
    MassSplit { tops, trees, low }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MassLevel {
    /// `mass(P_n) ≤ 2^-n`.
    pub n: u32,
    pub bitiles: BitileSet,
    pub forest: Forest,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct MassDecomposition {
    pub levels: Vec<MassLevel>,
    /// Bitiles with empty (relative) engaged set.
    pub null: BitileSet,
    /// The set `F` of the relative form.
    pub relative_to: Option<CellSet>,
}

fn pow2_inv(n: u32) -> Measure {
    Measure::new(1, 1i64 << n)
}

/// The `n ≥ 0` with `2^(-n-1) < m ≤ 2^-n`, for `0 < m ≤ 1`.
fn mass_level(m: Measure) -> u32 {
    let mut n = 0;
    while m <= pow2_inv(n + 1) {
        n += 1;
    }
    n
}

/// Split a convex collection into levels `P_n` of mass at most `2^-n`, each
/// organised into trees with `sum |I_T| ≤ 2 2^n` (times `|F|` in the
/// relative form), plus the bitiles of mass zero.
pub fn mass_decomposition(s: &BitileSet, n: &ChoiceFunction, f: Option<&CellSet>) -> Result<MassDecomposition> {
    ensure_convex(s)?;
    for p in s.iter() {
        p.validate(n.res())?;
    }
    if let Some(set) = f {
        if set.res() != n.res() {
            return Err(crate::Error::ResolutionMismatch {
                left: set.res(),
                right: n.res(),
            });
        }
    }
    let mut stock = s.clone();
    let mut levels = Vec::new();
    loop {
        let m = mass_in(&stock, n, f);
        if m == Measure::from_integer(0) {
            break;
        }
        let level = mass_level(m);
        let split = mass_split(&stock, n, f, pow2_inv(level));
        let bitiles = stock.difference(&split.low);
        stock = split.low;
        levels.push(MassLevel {
            n: level,
            bitiles,
            forest: Forest::new(split.trees),
        });
    }
    Ok(MassDecomposition {
        levels,
        null: stock,
        relative_to: f.cloned(),
    })
}

/// Re-derive every postcondition of [`mass_decomposition`] from its output.
pub fn audit_mass_decomposition(s: &BitileSet, n: &ChoiceFunction, d: &MassDecomposition) -> Audit {
    let res = n.res();
    let f = d.relative_to.as_ref();
    let f_measure = f.map_or(Measure::from_integer(1), CellSet::measure);
    let mut audit = Audit::new();

    let mut union = d.null.clone();
    let mut count = d.null.len();
    for lvl in &d.levels {
        union = union.union(&lvl.bitiles);
        count += lvl.bitiles.len();
    }
    audit.require("partition", union == *s && count == s.len(), || {
        format!("levels cover {} of {} bitiles with {} memberships", union.len(), s.len(), count)
    });

    let mut stock = s.clone();
    for lvl in &d.levels {
        let level = lvl.n;
        let m = mass_in(&lvl.bitiles, n, f);
        audit.require("mass(P_n) <= 2^-n", m <= pow2_inv(level), || format!("level {level}: mass {m}"));
        audit.require("mass <= 1", m <= Measure::from_integer(1), || format!("level {level}: mass {m}"));
        let total = Measure::new(lvl.forest.top_cells(res) as i64, 1i64 << res);
        let bound = Measure::from_integer(2i64 << level) * f_measure;
        audit.require("sum |I_T| <= 2 2^n |F|", total <= bound, || {
            format!("level {level}: sum |I_T| = {total}, bound {bound}")
        });
        audit.require("forest covers P_n", lvl.forest.bitiles() == lvl.bitiles && lvl.forest.trees_disjoint(), || {
            format!("level {level}")
        });
        for t in &lvl.forest.trees {
            audit.require("trees convex", is_convex(t.bitiles()), || format!("level {level}: tree {:?}", t.top_bitile()));
        }
        let tops: Vec<Bitile> = lvl.forest.trees.iter().filter_map(Tree::top_bitile).collect();
        for (i, a) in tops.iter().enumerate() {
            for b in &tops[i + 1..] {
                audit.require("tops disjoint", !a.intersects_rect(b), || format!("level {level}: {a} and {b}"));
            }
        }
        audit.require("P_n convex", is_convex(&lvl.bitiles), || format!("level {level}"));
        stock = stock.difference(&lvl.bitiles);
        audit.require("remainder convex", is_convex(&stock), || format!("after level {level}"));
    }
    for p in d.null.iter() {
        audit.require("null bitiles unengaged", n.engaged_count(p, f) == 0, || format!("{p}"));
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::all_bitiles;

    #[test]
    fn mass_examples() {
        let p = Bitile::at(1, 0, 1);
        let s = BitileSet::singleton(p);
        // ω_P = [4, 8) at res 3.
        let avoid = ChoiceFunction::constant(3, 0).unwrap();
        assert_eq!(mass_of(&s, &avoid, None).unwrap(), Measure::from_integer(0));
        let hit = ChoiceFunction::constant(3, 5).unwrap();
        assert_eq!(mass_of(&s, &hit, None).unwrap(), Measure::from_integer(1));
        let half = CellSet::from_fn(3, |c| c % 2 == 0);
        assert_eq!(mass_of(&s, &hit, Some(&half)).unwrap(), Measure::new(1, 2));
    }

    #[test]
    fn avoiding_choice_is_all_null() {
        let s = BitileSet::singleton(Bitile::at(1, 0, 1));
        let d = mass_decomposition(&s, &ChoiceFunction::constant(3, 0).unwrap(), None).unwrap();
        assert!(d.levels.is_empty());
        assert_eq!(d.null, s);
    }

    #[test]
    fn full_mass_bitile_at_level_zero() {
        let p = Bitile::at(1, 0, 1);
        let n = ChoiceFunction::constant(3, 5).unwrap();
        let d = mass_decomposition(&BitileSet::singleton(p), &n, None).unwrap();
        assert_eq!(d.levels.len(), 1);
        assert_eq!(d.levels[0].n, 0);
    }

    #[test]
    fn full_set_audits_clean() {
        let res = 3;
        let s = all_bitiles(res);
        let n = ChoiceFunction::from_fn(res, |c| [0, 1, 3, 2, 7, 5, 1, 4][c]).unwrap();
        let d = mass_decomposition(&s, &n, None).unwrap();
        let a = audit_mass_decomposition(&s, &n, &d);
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
        let f = CellSet::from_fn(res, |c| c < 5);
        let d = mass_decomposition(&s, &n, Some(&f)).unwrap();
        let a = audit_mass_decomposition(&s, &n, &d);
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
    }

    #[test]
    fn level_bracket() {
        assert_eq!(mass_level(Measure::from_integer(1)), 0);
        assert_eq!(mass_level(Measure::new(1, 2)), 1);
        assert_eq!(mass_level(Measure::new(3, 4)), 0);
        assert_eq!(mass_level(Measure::new(1, 8)), 3);
        assert_eq!(mass_level(Measure::new(3, 16)), 2);
    }
}

//! The size functional and the size decomposition.
//!
//! Sizes are handled squared so that every threshold test is exact.

use serde::{Deserialize, Serialize};

use crate::carleson::Tree;
use crate::error::Result;
use crate::grid::GridFunction;
use crate::phase_plane::{
    ensure_convex, is_convex, project_bitile, project_bitiles_with_table, Bitile, BitileSet, PacketTable, PhaseRect,
};
use crate::scalar::Scalar;
use crate::walsh::dyadic_maximal;

use super::forest::Forest;
use super::Audit;

/// `||Π_P f||² / |I_P| = (⟨f, W_{P_u}⟩² + ⟨f, W_{P_l}⟩²) / |I_P|`.
pub fn bitile_size_sq<S: Scalar>(table: &PacketTable<S>, p: &Bitile) -> S {
    let u = table.coefficient(&p.upper()).clone();
    let l = table.coefficient(&p.lower()).clone();
    (u.clone() * u + l.clone() * l).mul_pow2(p.k() as i32)
}

fn size_sq_in<S: Scalar>(table: &PacketTable<S>, s: &BitileSet) -> S {
    s.iter().map(|p| bitile_size_sq(table, p)).fold(S::zero(), |a, b| if b > a { b } else { a })
}

/// `size_f(S)²`; zero for the empty collection.
pub fn size_of<S: Scalar>(s: &BitileSet, f: &GridFunction<S>) -> Result<S> {
    for p in s.iter() {
        p.validate(f.res())?;
    }
    Ok(size_sq_in(&PacketTable::new(f)?, s))
}

/// Result of one greedy selection pass.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SizeSplit {
    /// Selected tops, in selection order.
    pub tops: Vec<Bitile>,
    /// `T(t) = {P ∈ stock : P ≤ t}` for each top.
    pub trees: Vec<Tree>,
    /// What remains.
    pub low: BitileSet,
}

/// Repeatedly select a maximal `t` with `size_f(t)² > bound_sq / 4`,
/// canonically smallest first, and remove `T(t)`. When `bound_sq` is at
/// least `size_f(stock)²`, the remainder has size at most half the bound.
pub fn size_split<S: Scalar>(stock: &BitileSet, table: &PacketTable<S>, bound_sq: &S) -> SizeSplit {
    let cut = bound_sq.mul_pow2(-2);
    let mut low = stock.clone();
    let mut qualifying = stock.filter(|p| bitile_size_sq(table, p) > cut);
    let mut tops = Vec::new();
    let mut trees = Vec::new();
    while let Some(t) = qualifying.maximal().first().copied() {
        let tree = Tree::below(&low, t);
        low = low.difference(tree.bitiles());
        qualifying = qualifying.difference(tree.bitiles());
        tops.push(t);
        trees.push(Tree::with_top(tree.into_bitiles(), t).expect("members lie below the top"));
    }
    SizeSplit { tops, trees, low }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SizeLevel {
    /// `size_f(P_n) ≤ 2^-n`.
    pub n: i32,
    pub bitiles: BitileSet,
    pub forest: Forest,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct SizeDecomposition {
    /// Nonempty levels in increasing `n`.
    pub levels: Vec<SizeLevel>,
    /// Bitiles with `Π_P f = 0`.
    pub null: BitileSet,
}

/// The `n` with `2^(-2n-2) < s ≤ 2^(-2n)`, for `s > 0`.
fn size_level<S: Scalar>(s: &S) -> i32 {
    let est = -s.to_f64().log2() / 2.0;
    let mut n = if est.is_finite() { est.floor() as i32 } else { 0 };
    while *s > S::one().mul_pow2(-2 * n) {
        n -= 1;
    }
    while *s <= S::one().mul_pow2(-2 * n - 2) {
        n += 1;
    }
    n
}

/// Split a convex collection into levels `P_n` of size at most `2^-n`, each
/// organised into trees with `sum |I_T| ≤ 4 2^(2n) ||f||²`, plus the
/// bitiles on which `f` has no component.
pub fn size_decomposition<S: Scalar>(s: &BitileSet, f: &GridFunction<S>) -> Result<SizeDecomposition> {
    ensure_convex(s)?;
    for p in s.iter() {
        p.validate(f.res())?;
    }
    let table = PacketTable::new(f)?;
    let mut stock = s.clone();
    let mut levels = Vec::new();
    loop {
        let current = size_sq_in(&table, &stock);
        if current.is_zero() {
            break;
        }
        let n = size_level(&current);
        let split = size_split(&stock, &table, &S::one().mul_pow2(-2 * n));
        let bitiles = stock.difference(&split.low);
        stock = split.low;
        levels.push(SizeLevel {
            n,
            bitiles,
            forest: Forest::new(split.trees),
        });
    }
    Ok(SizeDecomposition { levels, null: stock })
}

fn tops_disjoint(forest: &Forest) -> Option<(Bitile, Bitile)> {
    let tops: Vec<Bitile> = forest.trees.iter().filter_map(Tree::top_bitile).collect();
    for (i, a) in tops.iter().enumerate() {
        if let Some(b) = tops[i + 1..].iter().find(|b| a.intersects_rect(*b)) {
            return Some((*a, *b));
        }
    }
    None
}

/// Re-derive every postcondition of [`size_decomposition`] from its output.
pub fn audit_size_decomposition<S: Scalar>(s: &BitileSet, f: &GridFunction<S>, d: &SizeDecomposition) -> Result<Audit> {
    let res = f.res();
    let table = PacketTable::new(f)?;
    let norm_sq = f.norm_sq();
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
    for w in d.levels.windows(2) {
        audit.require("levels increasing", w[0].n < w[1].n, || format!("{} then {}", w[0].n, w[1].n));
    }
    for lvl in &d.levels {
        let n = lvl.n;
        let size_sq = size_sq_in(&table, &lvl.bitiles);
        audit.require("size(P_n) <= 2^-n", size_sq <= S::one().mul_pow2(-2 * n), || {
            format!("level {n}: size^2 = {size_sq:?}")
        });
        let cells = lvl.forest.top_cells(res);
        let lhs = S::from_i64(cells as i64).mul_pow2(-(res as i32) - 2 * n);
        let rhs = norm_sq.clone().mul_pow2(2);
        audit.require("sum |I_T| <= 4 2^2n ||f||^2", lhs <= rhs, || {
            format!("level {n}: sum |I_T| = {cells}/2^{res}, ||f||^2 = {norm_sq:?}")
        });
        audit.require("forest covers P_n", lvl.forest.bitiles() == lvl.bitiles && lvl.forest.trees_disjoint(), || {
            format!("level {n}")
        });
        for t in &lvl.forest.trees {
            audit.require("trees convex", is_convex(t.bitiles()), || format!("level {n}: tree {:?}", t.top_bitile()));
            audit.require("trees have tops in P_n", t.top_bitile().is_some_and(|p| t.bitiles().contains(&p)), || {
                format!("level {n}")
            });
        }
        let pair = tops_disjoint(&lvl.forest);
        audit.require("tops disjoint", pair.is_none(), || format!("level {n}: {pair:?}"));
        let projections: Vec<_> = lvl
            .forest
            .trees
            .iter()
            .filter_map(Tree::top_bitile)
            .map(|t| project_bitile(&table, &t))
            .collect();
        for (i, a) in projections.iter().enumerate() {
            for b in &projections[i + 1..] {
                let ip = a.inner_product(b)?;
                audit.require("top projections orthogonal", ip.is_zero(), || format!("level {n}: {ip:?}"));
            }
        }
        audit.require("P_n convex", is_convex(&lvl.bitiles), || format!("level {n}"));
        stock = stock.difference(&lvl.bitiles);
        audit.require("remainder convex", is_convex(&stock), || format!("after level {n}"));
    }
    for p in d.null.iter() {
        let zero = table.coefficient(&p.upper()).is_zero() && table.coefficient(&p.lower()).is_zero();
        audit.require("null bitiles carry no energy", zero, || format!("{p}"));
    }
    Ok(audit)
}

/// `||Π_T f||_∞² ≤ 2 size_f(T)²` for each tree of a size decomposition.
pub(crate) fn audit_tree_sup<S: Scalar>(table: &PacketTable<S>, forest: &Forest, audit: &mut Audit) -> Result<()> {
    for t in &forest.trees {
        let proj = project_bitiles_with_table(table, t.bitiles())?;
        let sup = proj.sup_abs();
        let size_sq = size_sq_in(table, t.bitiles());
        audit.require("||Pi_T f||_inf <= sqrt2 size(T)", sup.clone() * sup.clone() <= size_sq.mul_pow2(1), || {
            format!("tree {:?}: sup = {sup:?}, size^2 = {size_sq:?}", t.top_bitile())
        });
    }
    Ok(())
}

/// Tree sup bounds for every level, and `size_f(P) ≤ sqrt2 inf_{I_P} Mf`
/// for every bitile.
pub fn audit_size_bounds<S: Scalar>(s: &BitileSet, f: &GridFunction<S>, d: &SizeDecomposition) -> Result<Audit> {
    let table = PacketTable::new(f)?;
    let mut audit = Audit::new();
    for lvl in &d.levels {
        audit_tree_sup(&table, &lvl.forest, &mut audit)?;
    }
    let mf = dyadic_maximal(f)?;
    let unit = -(f.res() as i32);
    for p in s.iter() {
        let inf = p
            .time
            .cells(unit)
            .map(|c| mf.values()[c].clone())
            .reduce(|a, b| if b < a { b } else { a })
            .unwrap_or_else(S::zero);
        let size_sq = bitile_size_sq(&table, p);
        audit.require("size(P) <= sqrt2 inf Mf", size_sq <= (inf.clone() * inf.clone()).mul_pow2(1), || {
            format!("{p}: size^2 = {size_sq:?}, inf Mf = {inf:?}")
        });
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Side;
    use crate::phase_plane::{all_bitiles, wave_packet};
    use crate::scalar::ExactScalar;

    fn sample(res: u32) -> GridFunction<ExactScalar> {
        GridFunction::from_fn(res, Side::Space, |c| ExactScalar::from_ratio((c as i64 * 5 + 3) % 7 - 3, 2))
    }

    #[test]
    fn size_examples() {
        let p = Bitile::at(1, 1, 0);
        let s = BitileSet::singleton(p);
        let zero = GridFunction::<ExactScalar>::zeros(3, Side::Space);
        assert!(size_of(&s, &zero).unwrap().is_zero());
        let w = wave_packet::<ExactScalar>(&p.upper(), 3).unwrap();
        // |I_P|^-1 = 2
        assert_eq!(size_of(&s, &w).unwrap(), ExactScalar::from_i64(2));
        // W_{P_u} is orthogonal to packets of a disjoint bitile.
        assert!(size_of(&BitileSet::singleton(Bitile::at(1, 0, 0)), &w).unwrap().is_zero());
    }

    #[test]
    fn zero_function_is_all_null() {
        let s = all_bitiles(3);
        let d = size_decomposition(&s, &GridFunction::<ExactScalar>::zeros(3, Side::Space)).unwrap();
        assert!(d.levels.is_empty());
        assert_eq!(d.null, s);
    }

    #[test]
    fn single_packet_lands_on_its_level() {
        // |I_P|^-1/2 = 2 lies in (2^-n-1, 2^-n] for n = -1.
        let p = Bitile::at(2, 1, 0);
        let w = wave_packet::<ExactScalar>(&p.upper(), 3).unwrap();
        let d = size_decomposition(&BitileSet::singleton(p), &w).unwrap();
        assert_eq!(d.levels.len(), 1);
        assert_eq!(d.levels[0].n, -1);
        assert_eq!(d.levels[0].forest.trees[0].top_bitile(), Some(p));
        assert!(d.null.is_empty());
    }

    #[test]
    fn full_set_audits_clean() {
        let res = 3;
        let s = all_bitiles(res);
        let f = sample(res);
        let d = size_decomposition(&s, &f).unwrap();
        assert!(!d.levels.is_empty());
        let a = audit_size_decomposition(&s, &f, &d).unwrap();
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
        let b = audit_size_bounds(&s, &f, &d).unwrap();
        assert!(b.passed(), "{:?}", b.failures().collect::<Vec<_>>());
    }

    #[test]
    fn split_halves_size() {
        let res = 3;
        let s = all_bitiles(res);
        let f = sample(res);
        let table = PacketTable::new(&f).unwrap();
        let bound = size_sq_in(&table, &s);
        let split = size_split(&s, &table, &bound);
        assert!(size_sq_in(&table, &split.low).mul_pow2(2) <= bound);
        let cells: u64 = split.tops.iter().map(|t| 1u64 << (res - t.k())).sum();
        let lhs = bound * ExactScalar::from_i64(cells as i64).mul_pow2(-(res as i32));
        assert!(lhs <= f.norm_sq().mul_pow2(2));
    }

    #[test]
    fn level_bracket() {
        for (v, n) in [(1.0, 0), (0.25, 1), (0.3, 0), (4.0, -1), (5.0, -2), (0.0625, 2)] {
            assert_eq!(size_level(&v), n, "{v}");
        }
    }
}

//! Splitting a forest into Fefferman forests after removing an exceptional
//! set where the counting function is large.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::carleson::Tree;
use crate::error::{Error, Result};
use crate::grid::CellSet;
use crate::phase_plane::{le, Bitile, BitileSet};
use crate::scalar::ExactScalar;

use super::bmo::bmo_norm;
use super::forest::Forest;
use super::Audit;

/// Multiplier in the exceptional-set threshold `C K max(||N_F||_BMO, 1)`.
pub const C_FEFF: i64 = 2;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FeffermanLayer {
    /// Members `P` with `2^l ≤ #{tops above P} < 2^(l+1)`.
    pub l: u32,
    pub forest: Forest,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FeffermanOutcome {
    pub bmo: BigRational,
    /// `C K max(||N_F||_BMO, 1)`.
    pub threshold: BigRational,
    /// `{x : N_F(x) > threshold}`.
    pub exceptional: CellSet,
    /// Indices of the trees with `I_T ⊄ F_exc`.
    pub surviving: Vec<usize>,
    pub layers: Vec<FeffermanLayer>,
}

fn floor_log2(v: usize) -> u32 {
    usize::BITS - 1 - v.leading_zeros()
}

/// Group `bitiles` by `l = floor(log2 #{t ∈ tops : P ≤ t})` and split each
/// group into the trees below its maximal elements. Every bitile must lie
/// below at least one top.
pub fn fefferman_layers(bitiles: &BitileSet, tops: &[Bitile]) -> Result<Vec<FeffermanLayer>> {
    let mut groups: Vec<BitileSet> = Vec::new();
    for p in bitiles.iter() {
        let count = tops.iter().filter(|t| le(p, *t)).count();
        if count == 0 {
            return Err(Error::NotATree(*p));
        }
        let l = floor_log2(count) as usize;
        if groups.len() <= l {
            groups.resize(l + 1, BitileSet::new());
        }
        groups[l].insert(*p);
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(l, g)| {
            let trees = g
                .maximal()
                .into_iter()
                .map(|t| Tree::with_top(g.below(&t), t).expect("members lie below the top"))
                .collect();
            FeffermanLayer {
                l: l as u32,
                forest: Forest::new(trees),
            }
        })
        .collect())
}

/// Remove the trees whose tops sit inside
/// `{N_F > C_FEFF K max(||N_F||_BMO, 1)}` and split what remains into
/// Fefferman forests.
pub fn fefferman_trick(forest: &Forest, k_param: &BigRational, res: u32) -> Result<FeffermanOutcome> {
    if !k_param.is_positive() {
        return Err(Error::Config(format!("K must be positive, got {k_param}")));
    }
    let tops: Vec<Bitile> = forest
        .trees
        .iter()
        .map(|t| t.top_bitile().ok_or(Error::MissingTop))
        .collect::<Result<_>>()?;
    let counts = forest.counting(res);
    let bmo = bmo_norm(&forest.counting_function::<ExactScalar>(res))?
        .as_rational()
        .cloned()
        .expect("integer data has rational oscillation");
    let normalizer = if bmo > BigRational::one() { bmo.clone() } else { BigRational::one() };
    let threshold = BigRational::from_integer(BigInt::from(C_FEFF)) * k_param * normalizer;
    let exceptional = CellSet::from_fn(res, |c| BigRational::from_integer(counts[c].into()) > threshold);
    let surviving: Vec<usize> = forest
        .trees
        .iter()
        .enumerate()
        .filter(|(_, t)| !exceptional.contains_interval(t.top_time()))
        .map(|(i, _)| i)
        .collect();
    let kept: BitileSet = surviving
        .iter()
        .flat_map(|&i| forest.trees[i].bitiles().iter().copied())
        .collect();
    let kept_tops: Vec<Bitile> = surviving.iter().map(|&i| tops[i]).collect();
    let layers = fefferman_layers(&kept, &kept_tops)?;
    Ok(FeffermanOutcome {
        bmo,
        threshold,
        exceptional,
        surviving,
        layers,
    })
}

/// Re-derive the postconditions of [`fefferman_trick`].
pub fn audit_fefferman(forest: &Forest, out: &FeffermanOutcome, res: u32) -> Audit {
    let mut audit = Audit::new();
    let counts = forest.counting(res);
    let exceptional = CellSet::from_fn(res, |c| BigRational::from_integer(counts[c].into()) > out.threshold);
    audit.require("exceptional set", exceptional == out.exceptional, || "mismatch".into());

    let kept: Vec<&Tree> = out.surviving.iter().map(|&i| &forest.trees[i]).collect();
    for (i, t) in forest.trees.iter().enumerate() {
        let survives = !out.exceptional.contains_interval(t.top_time());
        audit.require("survivors are the trees outside F_exc", survives == out.surviving.contains(&i), || {
            format!("tree {i}")
        });
    }
    let mut survivor_count = vec![0u64; 1 << res];
    for t in &kept {
        for c in t.top_time().cells(-(res as i32)) {
            survivor_count[c] += 1;
        }
    }
    let sup = survivor_count.iter().copied().max().unwrap_or(0);
    audit.require(
        "surviving counting function <= threshold",
        BigRational::from_integer(sup.into()) <= out.threshold,
        || format!("sup {sup}, threshold {}", out.threshold),
    );

    let kept_bitiles: BitileSet = kept.iter().flat_map(|t| t.bitiles().iter().copied()).collect();
    let mut union = BitileSet::new();
    let mut total = 0;
    for layer in &out.layers {
        let fef = layer.forest.fefferman_violation();
        audit.require("layers are Fefferman forests", fef.is_none(), || format!("layer {}: {fef:?}", layer.l));
        union = union.union(&layer.forest.bitiles());
        total += layer.forest.bitile_count();
    }
    audit.require("layers partition surviving bitiles", union == kept_bitiles && total == kept_bitiles.len(), || {
        format!("{} of {} bitiles, {} memberships", union.len(), kept_bitiles.len(), total)
    });
    // #layers ≤ log2(threshold) + 1, i.e. 2^(#layers - 1) ≤ threshold.
    let layers = out.layers.len();
    let ok = layers == 0 || BigRational::from_integer(BigInt::one() << (layers - 1)) <= out.threshold;
    audit.require("layer count <= log2(C K ||N_F||) + 1", ok, || {
        format!("{layers} layers, threshold {:.3}", out.threshold.to_f64().unwrap_or(f64::NAN))
    });
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::forestify;
    use crate::phase_plane::{all_bitiles, convex_hull};

    fn single(t: Bitile) -> Tree {
        Tree::with_top(BitileSet::singleton(t), t).unwrap()
    }

    #[test]
    fn disjoint_tops_give_one_layer() {
        let f = Forest::new(vec![single(Bitile::at(1, 0, 0)), single(Bitile::at(1, 1, 3))]);
        let out = fefferman_trick(&f, &BigRational::one(), 3).unwrap();
        assert!(out.exceptional.is_empty());
        assert_eq!(out.layers.len(), 1);
        assert_eq!(out.layers[0].l, 0);
        assert!(audit_fefferman(&f, &out, 3).passed());
    }

    #[test]
    fn empty_forest() {
        let out = fefferman_trick(&Forest::default(), &BigRational::one(), 3).unwrap();
        assert!(out.layers.is_empty() && out.exceptional.is_empty());
    }

    #[test]
    fn missing_top_and_bad_k() {
        let t = Tree::new(BitileSet::new(), crate::dyadic::DyadicInterval::unit(), 0).unwrap();
        let f = Forest::new(vec![t]);
        assert!(matches!(fefferman_trick(&f, &BigRational::one(), 3), Err(Error::MissingTop)));
        let g = Forest::default();
        assert!(fefferman_trick(&g, &BigRational::from_integer(0.into()), 3).is_err());
    }

    #[test]
    fn nested_tops_layers_are_fefferman() {
        let res = 3;
        let all = all_bitiles(res);
        let s = convex_hull(&all.filter(|p| p.freq.position % 3 != 1));
        let f = forestify(&s).unwrap();
        let out = fefferman_trick(&f, &BigRational::one(), res).unwrap();
        let a = audit_fefferman(&f, &out, res);
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
        // Stacked tops over [0, 1) make several layers.
        let nested = Forest::new(vec![
            single(Bitile::at(0, 0, 0)),
            single(Bitile::at(0, 0, 1)),
            single(Bitile::at(2, 0, 1)),
            single(Bitile::at(2, 0, 0)),
        ]);
        let out = fefferman_trick(&nested, &BigRational::from_integer(4.into()), res).unwrap();
        let a = audit_fefferman(&nested, &out, res);
        assert!(a.passed(), "{:?}", a.failures().collect::<Vec<_>>());
    }

    #[test]
    fn layers_by_top_count() {
        let t1 = Bitile::at(0, 0, 0);
        let t2 = Bitile::at(1, 0, 0);
        let p = Bitile::at(2, 0, 0);
        let s: BitileSet = [t1, t2, p].into_iter().collect();
        let layers = fefferman_layers(&s, &[t1, t2]).unwrap();
        // p lies below both tops, t2 below both, t1 below one.
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].forest.bitiles(), BitileSet::singleton(t1));
        assert_eq!(layers[1].forest.bitiles(), [t2, p].into_iter().collect());
        assert!(matches!(fefferman_layers(&s, &[t2]), Err(Error::NotATree(_))));
    }
}

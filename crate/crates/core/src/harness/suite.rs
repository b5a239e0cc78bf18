//! The invariant battery: every identity and decomposition postcondition
//! checked exactly on seeded instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::carleson::{
    littlewood_paley_tree, maximal_partial_sum, model_adjoint, model_operator, model_operator_naive, partial_sum,
    partial_sum_bitile, tree_boundary, tree_operator, tree_split, ModelVariant, Tree, TreeAux,
    TreeKind,
};
use crate::decomposition::{
    audit_fefferman, audit_lie, audit_mass_decomposition, audit_size_bounds, audit_size_decomposition, bmo_norm,
    fefferman_trick, forestify, john_nirenberg_violations, lie_decomposition, mass_decomposition, packing_ratio,
    saturation, size_decomposition, Audit, Forest,
};
use crate::dyadic::{oplus, otimes, DyadicInterval, DyadicRational};
use crate::error::Result;
use crate::grid::{ExactGrid, GridFunction, Side};
use crate::phase_plane::raster::Raster;
use crate::phase_plane::{
    all_bitiles, all_tiles, convex_hull, is_convex, le, project_tiles, refine_tiling, region_tiling_with, tiles_at_scale, wave_packet, Bitile, BitileSet, PacketTable, PhaseRect, SplitPreference, Tile,
};
use crate::scalar::{ExactScalar, Scalar};
use crate::walsh::{dyadic_maximal, walsh_eval, walsh_eval_character, walsh_function, walsh_transform};

use super::config::ExperimentConfig;
use super::instances::{
    random_cell_set, random_choice, random_convex_set, random_dyadic, random_grid, random_indicator_grid, rng, Rng64,
};
use super::report::Report;

type E = ExactScalar;

/// Largest resolution for exhaustive tile-pair and frequency sweeps.
pub const EXHAUSTIVE_RES: u32 = 6;
/// Largest resolution at which the decomposition battery runs.
pub const DECOMPOSITION_RES: u32 = 6;

/// Run every section for each resolution of the configuration.
pub fn run_invariant_suite(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new();
    for res in cfg.resolutions() {
        let mut r = rng(cfg.seed, res as u64);
        report
            .section("dyadic-core")
            .audit(&format!("res {res}: "), &dyadic_core(cfg, res, &mut r)?, "dyadic arithmetic and the Walsh transform");
        report.section("phase-plane").audit(
            &format!("res {res}: "),
            &phase_plane(cfg, res, &mut r)?,
            "wave packets, order, convexity and tilings",
        );
        report.section("carleson-op").audit(
            &format!("res {res}: "),
            &carleson(cfg, res, &mut r)?,
            "partial sums, model operator and trees",
        );
        if res <= DECOMPOSITION_RES {
            report.section("decomposition").audit(
                &format!("res {res}: "),
                &decomposition(cfg, res, &mut r)?,
                "size, mass, Fefferman and Lie decompositions",
            );
        } else {
            report.section("decomposition").info(
                format!("res {res}"),
                format!("skipped above res {DECOMPOSITION_RES}"),
                "runtime limit",
            );
        }
    }
    Ok(report)
}

fn dyadic_core(cfg: &ExperimentConfig, res: u32, r: &mut Rng64) -> Result<Audit> {
    let mut a = Audit::new();
    let one = DyadicRational::from_u64(1);
    for _ in 0..cfg.trials * 10 {
        let x = random_dyadic(r, 4, res as i32 + 2);
        let y = random_dyadic(r, 4, res as i32 + 2);
        let z = random_dyadic(r, 4, res as i32 + 2);
        a.require("oplus commutative, x + x = 0", oplus(&x, &y) == oplus(&y, &x) && oplus(&x, &x).is_zero(), || {
            format!("{x:?}, {y:?}")
        });
        a.require("oplus associative", oplus(&oplus(&x, &y), &z) == oplus(&x, &oplus(&y, &z)), || {
            format!("{x:?}, {y:?}, {z:?}")
        });
        a.require("otimes commutative with unit 1", otimes(&x, &y) == otimes(&y, &x) && otimes(&x, &one) == x, || {
            format!("{x:?}, {y:?}")
        });
        a.require(
            "otimes distributes over oplus",
            otimes(&x, &oplus(&y, &z)) == oplus(&otimes(&x, &y), &otimes(&x, &z)),
            || format!("{x:?}, {y:?}, {z:?}"),
        );
    }

    let len = 1u64 << res;
    let ns: Vec<u64> = if res <= EXHAUSTIVE_RES { (0..len).collect() } else { (0..64).map(|_| r.gen_range(0..len)).collect() };
    for &n in &ns {
        let w: ExactGrid = walsh_function(n as usize, res)?;
        for cell in 0..len {
            let x = DyadicRational::cell_point(cell, res);
            let rec = walsh_eval(n, &x)?;
            let chr = walsh_eval_character(n, &x)?;
            a.require("Walsh recursion = character = grid", rec == chr && E::from_i64(rec as i64) == w.values()[cell as usize], || {
                format!("n = {n}, cell {cell}")
            });
        }
        let hat = walsh_transform(&w);
        let delta = hat.values().iter().enumerate().all(|(m, v)| *v == if m as u64 == n { E::one() } else { E::zero() });
        a.require("Walsh functions orthonormal", delta, || format!("n = {n}"));
    }

    for _ in 0..cfg.trials {
        let f = random_grid(r, res);
        let hat = walsh_transform(&f);
        a.require("transform involution", walsh_transform(&hat) == f, || format!("{f:?}"));
        a.require("transform isometry", hat.norm_sq() == f.norm_sq(), || format!("{f:?}"));
        let m = dyadic_maximal(&f)?;
        let sup = f.sup_abs();
        let ok = m.values().iter().zip(f.values()).all(|(mv, fv)| *mv >= fv.abs() && *mv <= sup);
        a.require("|f| <= Mf <= sup |f|", ok, || format!("{f:?}"));
    }
    Ok(a)
}

/// Tiles whose packets are checked pairwise: all of them at small `res`,
/// a sample otherwise.
fn packet_sample(res: u32, r: &mut Rng64) -> Vec<Tile> {
    let tiles = all_tiles(res);
    if res <= EXHAUSTIVE_RES {
        tiles
    } else {
        tiles.choose_multiple(r, 64).copied().collect()
    }
}

/// `⟨W_p, W_q⟩` against every tile `q`; a failure names the pair.
pub fn check_packet_orthonormality(res: u32, tiles: &[Tile], corrupt: Option<Tile>, a: &mut Audit) -> Result<()> {
    for p in tiles {
        let mut w: ExactGrid = wave_packet(p, res)?;
        if corrupt == Some(*p) {
            let cell = p.time.cells(-(res as i32)).start;
            w.values_mut()[cell] = -w.values()[cell].clone();
        }
        let table = PacketTable::new(&w)?;
        for q in all_tiles(res) {
            let c = table.coefficient(&q);
            if q == *p {
                a.require("packets have unit norm", *c == E::one(), || format!("{p}: {c}"));
            } else if !q.intersects_rect(p) {
                a.require("disjoint packets orthogonal", c.is_zero(), || format!("{p} and {q}: {c}"));
            }
        }
    }
    Ok(())
}

fn phase_plane(cfg: &ExperimentConfig, res: u32, r: &mut Rng64) -> Result<Audit> {
    let mut a = Audit::new();
    let corrupt = (cfg.fault_injection && res >= 1).then(|| Tile::at(0, 0, 0));
    let mut tiles = packet_sample(res, r);
    if let Some(c) = corrupt {
        if !tiles.contains(&c) {
            tiles.push(c);
        }
    }
    check_packet_orthonormality(res, &tiles, corrupt, &mut a)?;
    if res == 0 {
        return Ok(a);
    }

    let bitiles: Vec<Bitile> = all_bitiles(res.min(5)).into_iter().collect();
    for p in &bitiles {
        for q in &bitiles {
            let comparable = le(p, q) || le(q, p);
            a.require("bitiles intersect iff comparable", comparable == p.intersects_rect(q), || format!("{p}, {q}"));
        }
    }

    for k in 0..=res {
        let scale: Vec<Tile> = tiles_at_scale(res, k).collect();
        for _ in 0..cfg.trials {
            let f = random_grid(r, res);
            a.require("complete scale reconstructs f", project_tiles(&scale, &f)? == f, || format!("k = {k}"));
        }
    }

    for _ in 0..cfg.trials * 3 {
        let seeds: BitileSet = (0..3).map(|_| super::instances::random_bitile(r, res)).collect();
        let hull = convex_hull(&seeds);
        a.require("hull convex and contains input", is_convex(&hull) && seeds.is_subset(&hull), || format!("{seeds:?}"));
        if res <= 4 {
            let brute = brute_force_convex(&seeds, res);
            a.require("convexity test matches definition", brute == is_convex(&seeds), || format!("{seeds:?}"));
        }
        let f = random_grid(r, res);
        let t1 = region_tiling_with(&hull, res, SplitPreference::FrequencyFirst)?;
        let t2 = region_tiling_with(&hull, res, SplitPreference::TimeFirst)?;
        let raster = Raster::of_bitiles(&hull, res);
        for t in [&t1, &t2] {
            a.require("tiling covers A(S) once", Raster::of_tiles(t, res) == raster && raster.max_multiplicity() <= 1, || {
                format!("{hull:?}")
            });
        }
        let p1 = project_tiles(&t1, &f)?;
        let p2 = project_tiles(&t2, &f)?;
        a.require("projection independent of tiling", p1 == p2, || format!("{hull:?}"));
        a.require("projection idempotent", project_tiles(&t1, &p1)? == p1, || format!("{hull:?}"));
        let sub: Vec<Tile> = t2.choose(r).copied().into_iter().collect();
        let refined = refine_tiling(&t1, &sub, res)?;
        let ok = sub.iter().all(|q| refined.contains(q)) && Raster::of_tiles(&refined, res) == Raster::of_tiles(&t1, res);
        a.require("refinement contains sub and keeps the region", ok, || format!("{t1:?} by {sub:?}"));
        a.require("refinement keeps the projection", project_tiles(&refined, &f)? == p1, || format!("{t1:?}"));
    }
    Ok(a)
}

fn brute_force_convex(s: &BitileSet, res: u32) -> bool {
    all_bitiles(res).iter().all(|m| {
        s.contains(m) || !s.iter().any(|p| le(p, m) && s.iter().any(|q| le(m, q)))
    })
}

fn carleson(cfg: &ExperimentConfig, res: u32, r: &mut Rng64) -> Result<Audit> {
    let mut a = Audit::new();
    let top = (1u64 << res) - 1;
    for _ in 0..cfg.trials {
        let f = random_grid(r, res);
        a.require("S_{2^res - 1} f = f", partial_sum(&f, top)? == f, || format!("{f:?}"));
        if res == 0 {
            continue;
        }
        let ns: Vec<u64> = if res <= EXHAUSTIVE_RES { (0..top).collect() } else { (0..32).map(|_| r.gen_range(0..top)).collect() };
        let mut banded = vec![E::zero(); f.len()];
        for &n in &ns {
            let direct = partial_sum(&f, n)?;
            a.require("bitile expansion of S_n f", partial_sum_bitile(&f, n)? == direct, || format!("n = {n}"));
            if res <= EXHAUSTIVE_RES {
                for (b, v) in banded.iter_mut().zip(direct.values()) {
                    if v.abs() > *b {
                        *b = v.abs();
                    }
                }
            }
        }
        let max = maximal_partial_sum(&f)?;
        if res <= EXHAUSTIVE_RES {
            a.require("maximal partial sum matches direct maxima", max.banded.values() == banded.as_slice(), || {
                format!("{f:?}")
            });
        }
        let full = all_bitiles(res);
        let cf = model_operator(&full, &f, &max.choice, ModelVariant::LowerCoeff)?;
        let abs: Vec<E> = cf.values().iter().map(Scalar::abs).collect();
        a.require("|C_{N*} f| = max_n |S_n f|", abs == max.banded.values(), || format!("{f:?}"));

        let s = random_convex_set(r, res, 3);
        let n = random_choice(r, res);
        let g = random_grid(r, res);
        for v in [ModelVariant::UpperCoeff, ModelVariant::LowerCoeff] {
            let fast = model_operator(&s, &f, &n, v)?;
            a.require("model operator = defining sum", fast == model_operator_naive(&s, &f, &n, v)?, || {
                format!("{v:?} on {s:?}")
            });
            let lhs = fast.inner_product(&g)?;
            let rhs = f.inner_product(&model_adjoint(&s, &g, &n, v)?)?;
            a.require("adjoint identity", lhs == rhs, || format!("{v:?}: {lhs} vs {rhs}"));
        }

        let lp = littlewood_paley_tree(res);
        let mean = f.values().iter().fold(E::zero(), |acc, v| acc + v.clone()).mul_pow2(-(res as i32));
        let centred = f.map(|v| v.clone() - mean.clone());
        a.require("Littlewood-Paley tree: O_T f = f - mean", tree_operator(&lp, &f, TreeAux::Plain)? == centred, || {
            format!("{f:?}")
        });

        let top_bitile = super::instances::random_bitile(r, res);
        let tree = Tree::below(&s.union(&BitileSet::singleton(top_bitile)), top_bitile);
        let (tl, to) = tree_split(&tree);
        let ok = tl.bitiles().union(to.bitiles()) == *tree.bitiles()
            && tl.bitiles().is_disjoint(to.bitiles())
            && matches!(tl.kind(), TreeKind::Lacunary | TreeKind::Empty)
            && matches!(to.kind(), TreeKind::Overlapping | TreeKind::Empty);
        a.require("tree splits into lacunary and overlapping parts", ok, || format!("{tree:?}"));
        if is_convex(tree.bitiles()) {
            let b = tree_boundary(&tree, &n)?;
            a.require("boundary intervals partition I_T", b.partitions(tree.top_time()), || format!("{tree:?}"));
            let viol = b.carleson_violations();
            a.require("|G_J| <= 2 mass(T) |J|", viol.is_empty(), || format!("{viol:?}"));
            let support = b.engaged_union();
            for v in [ModelVariant::UpperCoeff, ModelVariant::LowerCoeff] {
                let cf = model_operator(tree.bitiles(), &f, &n, v)?;
                let ok = cf.values().iter().enumerate().all(|(x, val)| val.is_zero() || support.contains(x));
                a.require("C_T f supported on the union of G_J", ok, || format!("{tree:?}"));
            }
        }
    }
    Ok(a)
}

/// `|⟨f, g⟩|² ≤ α ||f||² ||g||²` when `|f|` is constant on each interval `J`
/// of a partition and `g` lives on subsets `E_J` with `|E_J| ≤ α |J|`.
pub fn almost_orthogonality_triple(r: &mut Rng64, res: u32) -> (ExactGrid, ExactGrid, E) {
    let mut parts = Vec::new();
    let mut stack = vec![DyadicInterval::unit()];
    while let Some(j) = stack.pop() {
        if j.scale > -(res as i32) && r.gen_bool(0.6) {
            let (x, y) = j.halves();
            stack.push(x);
            stack.push(y);
        } else {
            parts.push(j);
        }
    }
    let unit = -(res as i32);
    let mut f = GridFunction::<E>::zeros(res, Side::Space);
    let mut g = GridFunction::<E>::zeros(res, Side::Space);
    let mut alpha = E::zero();
    for j in parts {
        let level = E::from_ratio(r.gen_range(0..=6), r.gen_range(1..=4));
        let cells = j.cells(unit);
        let len = cells.len();
        let take = r.gen_range(0..=len);
        let mut chosen: Vec<usize> = cells.clone().collect();
        chosen.shuffle(r);
        chosen.truncate(take);
        for c in cells {
            f.values_mut()[c] = if r.gen_bool(0.5) { level.clone() } else { -level.clone() };
        }
        for &c in &chosen {
            g.values_mut()[c] = super::instances::random_rational(r);
        }
        let density = E::from_ratio(take as i64, len as i64);
        if density > alpha {
            alpha = density;
        }
    }
    (f, g, alpha)
}

fn decomposition(cfg: &ExperimentConfig, res: u32, r: &mut Rng64) -> Result<Audit> {
    let mut a = Audit::new();
    if res == 0 {
        return Ok(a);
    }
    let k_param = num_rational::BigRational::from_float(cfg.k_param).expect("finite k_param");
    for trial in 0..cfg.trials {
        let s = if trial == 0 { all_bitiles(res) } else { random_convex_set(r, res, 4) };
        let f = if trial % 2 == 0 { random_grid(r, res) } else { random_indicator_grid(r, res) };
        let n = random_choice(r, res);
        let set = random_cell_set(r, res);

        let sd = size_decomposition(&s, &f)?;
        a.merge(audit_size_decomposition(&s, &f, &sd)?);
        a.merge(audit_size_bounds(&s, &f, &sd)?);
        for lvl in &sd.levels {
            for t in &lvl.forest.trees {
                let sat = saturation(t, &lvl.bitiles)?;
                let ok = t.bitiles().is_subset(sat.bitiles()) && is_convex(sat.bitiles()) && sat.top_time() == t.top_time();
                a.require("saturation contains T, convex, same top", ok, || format!("{t:?}"));
            }
        }

        for rel in [None, Some(&set)] {
            let md = mass_decomposition(&s, &n, rel)?;
            a.merge(audit_mass_decomposition(&s, &n, &md));
            for lvl in &md.levels {
                for t in &lvl.forest.trees {
                    let b = tree_boundary(t, &n)?;
                    let viol = b.carleson_violations();
                    a.require("|G_J| <= 2 mass(T) |J| on decomposition trees", viol.is_empty(), || format!("{viol:?}"));
                }
                if rel.is_none() {
                    check_forest_bounds(&lvl.forest, res, lvl.n, &mut a)?;
                    let out = fefferman_trick(&lvl.forest, &k_param, res)?;
                    a.merge(audit_fefferman(&lvl.forest, &out, res));
                }
            }
        }

        let forest = forestify(&s)?;
        let mut rest = s.clone();
        let mut ok = forest.bitiles() == s && forest.trees_disjoint();
        for t in &forest.trees {
            ok &= is_convex(t.bitiles()) && t.top_bitile().is_some_and(|p| s.contains(&p));
            rest = rest.difference(t.bitiles());
            ok &= is_convex(&rest);
        }
        a.require("forestify partitions with convex remainders", ok, || format!("{s:?}"));
        let out = fefferman_trick(&forest, &k_param, res)?;
        a.merge(audit_fefferman(&forest, &out, res));

        let lie = lie_decomposition(&s, &n)?;
        a.merge(audit_lie(&s, &n, &lie));

        let (f7, g7, alpha) = almost_orthogonality_triple(r, res);
        let ip = f7.inner_product(&g7)?;
        let ok = ip.clone() * ip <= alpha.clone() * f7.norm_sq() * g7.norm_sq();
        a.require("|<f, g>| <= sqrt(alpha) ||f|| ||g||", ok, || format!("alpha = {alpha}"));
    }
    Ok(a)
}

/// BMO against packing and the exponential distribution bound.
fn check_forest_bounds(forest: &Forest, res: u32, level: u32, a: &mut Audit) -> Result<()> {
    let bmo = bmo_norm(&forest.counting_function::<E>(res))?;
    let pack = packing_ratio(forest, res);
    let pack_e = E::from_ratio(*pack.numer(), *pack.denom());
    a.require("||N_F||_BMO <= 2 sup_I packing", bmo <= pack_e.mul_pow2(1), || format!("bmo {bmo}, packing {pack}"));
    a.require(
        "tops pack with constant 2^(n+1)",
        pack <= crate::grid::Measure::from_integer(2i64 << level),
        || format!("level {level}: packing {pack}"),
    );
    let viol = john_nirenberg_violations(forest, res, level, &[1, 2, 3, 4, 5]);
    a.require("John-Nirenberg bound", viol.is_empty(), || format!("level {level}: {:?}", viol.first()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(res: u32) -> ExperimentConfig {
        ExperimentConfig {
            res_min: res,
            res_max: res,
            trials: 2,
            ..Default::default()
        }
    }

    #[test]
    fn degenerate_resolution_passes() {
        let r = run_invariant_suite(&cfg(0)).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let r = run_invariant_suite(&cfg(3)).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r, run_invariant_suite(&cfg(3)).unwrap());
    }

    #[test]
    fn fault_injection_is_caught() {
        let mut c = cfg(3);
        c.fault_injection = true;
        let r = run_invariant_suite(&c).unwrap();
        let fails: Vec<_> = r.failures().collect();
        assert!(!fails.is_empty());
        assert!(fails.iter().any(|(_, row)| row.metric.contains("disjoint packets orthogonal") && row.value.contains(" and ")));
    }
}

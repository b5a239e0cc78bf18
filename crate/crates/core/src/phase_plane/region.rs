//! Tilings of unions of dyadic rectangles.
//!
//! A region is split recursively along the midlines of dyadic rectangles,
//! starting from `[0, 1) x [0, 2^res)`. For disjoint tiles inside a rectangle
//! of area at least two, a tile crossing the time midline spans the full
//! time width and one crossing the frequency midline spans the full height,
//! so the two cannot both occur: some midline is always free. Searching both
//! directions with memoization therefore finds a tiling whenever one exists,
//! including tilings that must contain prescribed tiles.

use std::collections::HashMap;

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};

use super::convex::ensure_convex;
use super::tile::{BitileSet, PhaseRect, Tile};

/// Order in which the two midline cuts are attempted when both cut the same
/// number of input pieces.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SplitPreference {
    #[default]
    FrequencyFirst,
    TimeFirst,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Rect {
    time: DyadicInterval,
    freq: DyadicInterval,
}

impl PhaseRect for Rect {
    fn time(&self) -> DyadicInterval {
        self.time
    }
    fn freq(&self) -> DyadicInterval {
        self.freq
    }
}

impl Rect {
    fn of<R: PhaseRect>(r: &R) -> Self {
        Self {
            time: r.time(),
            freq: r.freq(),
        }
    }

    fn time_halves(&self) -> (Self, Self) {
        let (a, b) = self.time.halves();
        (Self { time: a, ..*self }, Self { time: b, ..*self })
    }

    fn freq_halves(&self) -> (Self, Self) {
        let (a, b) = self.freq.halves();
        (Self { freq: a, ..*self }, Self { freq: b, ..*self })
    }
}

fn interval_covered(target: DyadicInterval, parts: &[DyadicInterval], finest: i32) -> bool {
    if parts.iter().any(|p| p.contains(&target)) {
        return true;
    }
    if target.scale <= finest || !parts.iter().any(|p| target.contains(p)) {
        return false;
    }
    let (l, r) = target.halves();
    interval_covered(l, parts, finest) && interval_covered(r, parts, finest)
}

/// Whether a rectangle of area one lies inside the union of `pieces`
/// (each of area at least one).
fn tile_covered<R: PhaseRect>(target: &R, pieces: &[Rect], res: u32) -> bool {
    let hits: Vec<&Rect> = pieces.iter().filter(|p| p.intersects_rect(target)).collect();
    if hits.iter().any(|p| p.contains_rect(target)) {
        return true;
    }
    // Remaining hits are strips; a point missed by every full-height strip
    // forces the full-width strips to cover the whole frequency range.
    let vertical: Vec<DyadicInterval> = hits
        .iter()
        .filter(|p| p.freq.contains(&target.freq()))
        .map(|p| p.time)
        .collect();
    let horizontal: Vec<DyadicInterval> = hits
        .iter()
        .filter(|p| p.time.contains(&target.time()))
        .map(|p| p.freq)
        .collect();
    interval_covered(target.time(), &vertical, -(res as i32))
        || interval_covered(target.freq(), &horizontal, 0)
}

struct Search<'a> {
    res: u32,
    pieces: &'a [Rect],
    required: &'a [Rect],
    preference: SplitPreference,
    memo: HashMap<Rect, Option<Vec<Tile>>>,
}

impl Search<'_> {
    fn solve(&mut self, r: Rect) -> Option<Vec<Tile>> {
        if let Some(hit) = self.memo.get(&r) {
            return hit.clone();
        }
        let out = self.solve_uncached(r);
        self.memo.insert(r, out.clone());
        out
    }

    fn solve_uncached(&mut self, r: Rect) -> Option<Vec<Tile>> {
        let local: Vec<Rect> = self
            .pieces
            .iter()
            .filter(|p| p.intersects_rect(&r))
            .copied()
            .collect();
        if local.is_empty() {
            return Some(Vec::new());
        }
        if r.area_exp() == 0 {
            return tile_covered(&r, &local, self.res).then(|| {
                vec![Tile {
                    time: r.time,
                    freq: r.freq,
                }]
            });
        }

        let inside = |q: &&Rect| r.contains_rect(*q);
        let time_ok = r.time.scale > -(self.res as i32)
            && !self.required.iter().filter(inside).any(|q| q.time == r.time);
        let freq_ok =
            r.freq.scale > 0 && !self.required.iter().filter(inside).any(|q| q.freq == r.freq);
        let time_cuts = local.iter().filter(inside).filter(|q| q.time == r.time).count();
        let freq_cuts = local.iter().filter(inside).filter(|q| q.freq == r.freq).count();

        let mut order: Vec<(usize, u8, bool)> = Vec::with_capacity(2);
        let (t_rank, f_rank) = match self.preference {
            SplitPreference::FrequencyFirst => (1, 0),
            SplitPreference::TimeFirst => (0, 1),
        };
        if time_ok {
            order.push((time_cuts, t_rank, true));
        }
        if freq_ok {
            order.push((freq_cuts, f_rank, false));
        }
        order.sort();

        for (_, _, by_time) in order {
            let (a, b) = if by_time { r.time_halves() } else { r.freq_halves() };
            let Some(mut left) = self.solve(a) else { continue };
            let Some(right) = self.solve(b) else { continue };
            left.extend(right);
            return Some(left);
        }
        None
    }
}

fn root(res: u32) -> Rect {
    Rect {
        time: DyadicInterval::unit(),
        freq: DyadicInterval::new(res as i32, 0),
    }
}

fn run(pieces: &[Rect], required: &[Rect], res: u32, preference: SplitPreference) -> Result<Vec<Tile>> {
    let mut search = Search {
        res,
        pieces,
        required,
        preference,
        memo: HashMap::new(),
    };
    let mut tiles = search.solve(root(res)).ok_or(Error::Untileable)?;
    tiles.sort();
    Ok(tiles)
}

/// Pairwise disjointness of tiles; reports the first overlapping pair.
pub fn check_disjoint(tiles: &[Tile]) -> Result<()> {
    let mut sorted = tiles.to_vec();
    sorted.sort();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if a.intersects_rect(b) {
                return Err(Error::Overlap(*a, *b));
            }
        }
    }
    Ok(())
}

/// Disjoint tiles whose union is `A(S)`.
pub fn region_tiling(s: &BitileSet, res: u32) -> Result<Vec<Tile>> {
    region_tiling_with(s, res, SplitPreference::default())
}

/// [`region_tiling`] with an explicit cut preference; the two preferences
/// typically give different tilings of the same region.
pub fn region_tiling_with(s: &BitileSet, res: u32, preference: SplitPreference) -> Result<Vec<Tile>> {
    ensure_convex(s)?;
    for p in s.iter() {
        p.validate(res)?;
    }
    let pieces: Vec<Rect> = s.iter().map(Rect::of).collect();
    run(&pieces, &[], res, preference)
}

/// Disjoint tiles covering `A(base)` and including every tile of `sub`.
pub fn refine_tiling(base: &[Tile], sub: &[Tile], res: u32) -> Result<Vec<Tile>> {
    for t in base.iter().chain(sub) {
        t.validate(res)?;
    }
    check_disjoint(base)?;
    check_disjoint(sub)?;
    let pieces: Vec<Rect> = base.iter().map(Rect::of).collect();
    if let Some(q) = sub.iter().find(|q| !tile_covered(*q, &pieces, res)) {
        return Err(Error::NotContained(*q));
    }
    let required: Vec<Rect> = sub.iter().map(Rect::of).collect();
    run(&pieces, &required, res, SplitPreference::default())
}

/// Whether the tile lies in `A(S)`.
pub fn tile_in_region(t: &Tile, s: &BitileSet, res: u32) -> bool {
    let pieces: Vec<Rect> = s.iter().map(Rect::of).collect();
    tile_covered(t, &pieces, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::raster::Raster;
    use crate::phase_plane::{all_tiles, convex_hull, Bitile};

    #[test]
    fn single_bitile_splits_into_halves() {
        let p = Bitile::at(1, 1, 0);
        let t = region_tiling(&BitileSet::singleton(p), 2).unwrap();
        assert_eq!(t, vec![p.lower(), p.upper()]);
        let t = region_tiling_with(&BitileSet::singleton(p), 2, SplitPreference::TimeFirst).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|q| q.time.scale == -2));
    }

    #[test]
    fn disjoint_bitiles_give_constituent_tiles() {
        let a = Bitile::at(1, 0, 0);
        let b = Bitile::at(1, 1, 1);
        let s: BitileSet = [a, b].into_iter().collect();
        let mut expect = vec![a.lower(), a.upper(), b.lower(), b.upper()];
        expect.sort();
        assert_eq!(region_tiling(&s, 3).unwrap(), expect);
    }

    #[test]
    fn tree_tiling_matches_raster() {
        let s = convex_hull(&[Bitile::at(2, 0, 0), Bitile::at(0, 0, 0), Bitile::at(2, 1, 0)].into_iter().collect());
        assert_eq!(s.len(), 4);
        let t = region_tiling(&s, 3).unwrap();
        check_disjoint(&t).unwrap();
        assert_eq!(Raster::of_tiles(&t, 3), Raster::of_bitiles(&s, 3));
    }

    #[test]
    fn non_convex_is_rejected() {
        let s: BitileSet = [Bitile::at(2, 0, 0), Bitile::at(0, 0, 0)].into_iter().collect();
        assert!(matches!(region_tiling(&s, 3), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn refine_examples() {
        let base = vec![Tile::at(0, 0, 0), Tile::at(0, 0, 1)];
        assert_eq!(refine_tiling(&base, &base, 1).unwrap(), base);
        assert_eq!(refine_tiling(&base, &[], 1).unwrap(), base);
        let sub = [Tile::at(1, 0, 0)];
        assert_eq!(
            refine_tiling(&base, &sub, 1).unwrap(),
            vec![Tile::at(1, 0, 0), Tile::at(1, 1, 0)]
        );
        let outside = [Tile::at(0, 0, 2)];
        assert!(matches!(refine_tiling(&base, &outside, 2), Err(Error::NotContained(_))));
        let overlapping = [Tile::at(0, 0, 0), Tile::at(1, 0, 0)];
        assert!(matches!(refine_tiling(&overlapping, &[], 1), Err(Error::Overlap(..))));
    }

    #[test]
    fn every_tile_refines_the_full_plane() {
        let res = 3;
        let base: Vec<Tile> = crate::phase_plane::tiles_at_scale(res, 0).collect();
        for q in all_tiles(res) {
            let out = refine_tiling(&base, &[q], res).unwrap();
            assert!(out.contains(&q));
            check_disjoint(&out).unwrap();
            assert_eq!(Raster::of_tiles(&out, res), Raster::of_tiles(&base, res));
        }
    }
}

//! Pixel model of the phase plane for checking area identities.
//!
//! `[0, 1) x [0, 2^res)` is cut into `4^res` cells of size
//! `2^-res x 1`; each rectangle marks the cells it covers.

use super::tile::{BitileSet, PhaseRect, Tile};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Raster {
    res: u32,
    /// Coverage multiplicity, indexed `time_cell * 2^res + freq_cell`.
    counts: Vec<u32>,
}

impl Raster {
    pub fn empty(res: u32) -> Self {
        Self {
            res,
            counts: vec![0; 1 << (2 * res)],
        }
    }

    pub fn add<R: PhaseRect>(&mut self, r: &R) {
        let side = 1usize << self.res;
        let times = r.time().cells(-(self.res as i32));
        let freqs = r.freq().cells(0);
        for c in times {
            for n in freqs.clone() {
                self.counts[c * side + n] += 1;
            }
        }
    }

    pub fn of_tiles(tiles: &[Tile], res: u32) -> Self {
        let mut r = Self::empty(res);
        tiles.iter().for_each(|t| r.add(t));
        r.flatten()
    }

    pub fn of_bitiles(s: &BitileSet, res: u32) -> Self {
        let mut r = Self::empty(res);
        s.iter().for_each(|p| r.add(p));
        r.flatten()
    }

    /// Multiplicities capped at one.
    pub fn flatten(mut self) -> Self {
        self.counts.iter_mut().for_each(|c| *c = (*c).min(1));
        self
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Covered area, in units of `2^-res`.
    pub fn covered_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{tiles_at_scale, Bitile};

    #[test]
    fn full_scale_tilings_cover_everything_once() {
        let res = 3;
        for k in 0..=res {
            let tiles: Vec<Tile> = tiles_at_scale(res, k).collect();
            let mut r = Raster::empty(res);
            tiles.iter().for_each(|t| r.add(t));
            assert_eq!(r.max_multiplicity(), 1);
            assert_eq!(r.covered_cells(), 1 << (2 * res));
        }
        let r = Raster::of_bitiles(&BitileSet::singleton(Bitile::at(1, 0, 1)), res);
        assert_eq!(r.covered_cells(), 2 << res);
    }
}

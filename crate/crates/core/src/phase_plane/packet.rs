//! Wave packets and their coefficients.
//!
//! For the tile `[m 2^-k, (m+1) 2^-k) x [n 2^k, (n+1) 2^k)` the packet is
//! `2^(k/2) w_n(2^k x - m)`: on local cell `t` of `I` it takes the sign
//! `(-1)^popcount(n & bitrev(t))`, with `t` read on `res - k` bits.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::scalar::Scalar;
use crate::walsh::{bitrev, walsh_parity};

use super::tile::Tile;

/// Sign of `W_p` on grid cell `cell` (`true` for negative), `None` off `I_p`.
#[inline]
pub fn packet_sign(p: &Tile, cell: usize, res: u32) -> Option<bool> {
    let k = p.k();
    let local_bits = res - k;
    if (cell >> local_bits) as u64 != p.time.position {
        return None;
    }
    let t = cell & ((1usize << local_bits) - 1);
    Some(walsh_parity(p.freq.position as usize, t, local_bits))
}

/// `W_p` sampled on the space grid.
pub fn wave_packet<S: Scalar>(p: &Tile, res: u32) -> Result<GridFunction<S>> {
    p.validate(res)?;
    let amp = S::one().mul_sqrt2_pow(p.k() as i32);
    let neg = -amp.clone();
    Ok(GridFunction::from_fn(res, Side::Space, |c| match packet_sign(p, c, res) {
        None => S::zero(),
        Some(false) => amp.clone(),
        Some(true) => neg.clone(),
    }))
}

/// `⟨f, W_p⟩` by direct summation against the sampled packet.
pub fn packet_coefficient<S: Scalar>(f: &GridFunction<S>, p: &Tile) -> Result<S> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch);
    }
    f.inner_product(&wave_packet(p, f.res())?)
}

fn block_transform<S: Scalar>(block: &[S], bits: u32) -> Vec<S> {
    let mut v: Vec<S> = (0..block.len()).map(|i| block[bitrev(i, bits)].clone()).collect();
    S::fwht(&mut v);
    v
}

/// Coefficients `⟨f, W_p⟩` of every tile, computed by one blockwise fast
/// transform per time scale.
#[derive(Clone, Debug)]
pub struct PacketTable<S> {
    res: u32,
    /// `coeffs[k][m * 2^(res-k) + n]` for the tile `(k, m, n)`.
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> PacketTable<S> {
    pub fn new(f: &GridFunction<S>) -> Result<Self> {
        if f.side() != Side::Space {
            return Err(Error::SideMismatch);
        }
        let res = f.res();
        let coeffs = (0..=res)
            .into_par_iter()
            .map(|k| {
                let bits = res - k;
                let mut out = Vec::with_capacity(f.len());
                for block in f.values().chunks(1 << bits) {
                    out.extend(
                        block_transform(block, bits)
                            .into_iter()
                            .map(|v| v.mul_sqrt2_pow(k as i32 - 2 * res as i32)),
                    );
                }
                out
            })
            .collect();
        Ok(Self { res, coeffs })
    }

    pub fn res(&self) -> u32 {
        self.res
    }

    pub fn coefficient(&self, p: &Tile) -> &S {
        let k = p.k();
        &self.coeffs[k as usize][((p.time.position as usize) << (self.res - k)) | p.freq.position as usize]
    }

    /// All coefficients at time scale `2^-k`, indexed `m * 2^(res-k) + n`.
    pub fn scale(&self, k: u32) -> &[S] {
        &self.coeffs[k as usize]
    }
}

/// `sum_p c_p W_p` for tiles of the single time scale `2^-k`, with
/// coefficients laid out as in [`PacketTable::scale`].
pub fn synthesize_scale<S: Scalar>(res: u32, k: u32, coeffs: &[S]) -> GridFunction<S> {
    let bits = res - k;
    let mut out = Vec::with_capacity(coeffs.len());
    for block in coeffs.chunks(1 << bits) {
        if block.iter().all(S::is_zero) {
            out.extend(block.iter().cloned());
            continue;
        }
        out.extend(
            block_transform(block, bits)
                .into_iter()
                .map(|v| v.mul_sqrt2_pow(k as i32)),
        );
    }
    GridFunction::new(res, Side::Space, out).expect("full grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;
    use crate::phase_plane::{all_bitiles, all_tiles};
    use crate::scalar::ExactScalar;
    use crate::walsh::walsh_transform;

    #[test]
    fn packet_examples() {
        let w: GridFunction<ExactScalar> = wave_packet(&Tile::at(0, 0, 0), 3).unwrap();
        assert_eq!(w, GridFunction::indicator(3, Side::Space, DyadicInterval::unit()));
        let w: GridFunction<ExactScalar> = wave_packet(&Tile::at(1, 0, 0), 3).unwrap();
        let expect = GridFunction::indicator(3, Side::Space, DyadicInterval::new(-1, 0))
            .scale(&ExactScalar::sqrt2());
        assert_eq!(w, expect);
    }

    #[test]
    fn support_norm_and_frequency_support() {
        let res = 4;
        for p in all_tiles(res) {
            let w: GridFunction<ExactScalar> = wave_packet(&p, res).unwrap();
            assert_eq!(w.norm_sq(), ExactScalar::one());
            for c in 0..1 << res {
                assert_eq!(w.values()[c].is_zero(), !p.time.contains_cell(c, -(res as i32)));
            }
            let hat = walsh_transform(&w);
            for n in 0..1 << res {
                if !p.freq.contains_cell(n, 0) {
                    assert!(hat.values()[n].is_zero(), "{p:?} leaks at {n}");
                }
            }
        }
    }

    #[test]
    fn lower_is_upper_times_haar_sign() {
        let res = 3;
        for b in all_bitiles(res).iter() {
            let u: GridFunction<ExactScalar> = wave_packet(&b.upper(), res).unwrap();
            let l: GridFunction<ExactScalar> = wave_packet(&b.lower(), res).unwrap();
            let (left, _) = b.time.halves();
            for c in 0..1 << res {
                let e = if left.contains_cell(c, -(res as i32)) { 1 } else { -1 };
                assert_eq!(l.values()[c], u.values()[c].clone() * ExactScalar::from_i64(e));
            }
        }
    }

    #[test]
    fn table_matches_direct_and_synthesis_inverts() {
        let res = 4;
        let f = GridFunction::<ExactScalar>::from_fn(res, Side::Space, |c| {
            ExactScalar::from_ratio((c as i64 * 7) % 5 - 2, 1 + c as i64 % 3)
        });
        let table = PacketTable::new(&f).unwrap();
        for p in all_tiles(res) {
            assert_eq!(*table.coefficient(&p), packet_coefficient(&f, &p).unwrap());
        }
        for k in 0..=res {
            assert_eq!(synthesize_scale(res, k, table.scale(k)), f);
        }
    }
}

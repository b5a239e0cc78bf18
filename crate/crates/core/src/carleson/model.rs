//! The model Carleson operator and its adjoint.
//!
//! At a cell `x` and time scale `2^-k` at most one bitile can contribute:
//! the one with `x ∈ I_P` and `N(x) ∈ ω_P`, gated further by which half of
//! `ω_P` holds `N(x)`. Evaluation therefore costs `res` lookups per cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::phase_plane::{synthesize_scale, Bitile, BitileSet, PacketTable, Tile};
use crate::scalar::Scalar;
use crate::walsh::walsh_parity;

use super::choice::ChoiceFunction;

/// Which tile carries the coefficient; the other one gates on `N(x)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// `⟨f, W_{P_u}⟩ W_{P_u}(x) 1_{ω_{P_l}}(N(x))`.
    #[default]
    UpperCoeff,
    /// `⟨f, W_{P_l}⟩ W_{P_l}(x) 1_{ω_{P_u}}(N(x))`.
    LowerCoeff,
}

impl ModelVariant {
    fn coeff_tile(self, p: &Bitile) -> Tile {
        match self {
            ModelVariant::UpperCoeff => p.upper(),
            ModelVariant::LowerCoeff => p.lower(),
        }
    }

    /// Digit `k` of `N(x)` that selects the gating half at scale `k`.
    fn gate_bit(self) -> u64 {
        match self {
            ModelVariant::UpperCoeff => 0,
            ModelVariant::LowerCoeff => 1,
        }
    }
}

/// Membership test specialised for the complete collection.
enum Members<'a> {
    All,
    Some(&'a BitileSet),
}

impl Members<'_> {
    fn of(s: &BitileSet, res: u32) -> Members<'_> {
        let full = if res == 0 { 0 } else { (res as usize) << (res - 1) };
        if s.len() == full && s.iter().all(|p| p.validate(res).is_ok()) {
            Members::All
        } else {
            Members::Some(s)
        }
    }

    fn contains(&self, p: &Bitile) -> bool {
        match self {
            Members::All => true,
            Members::Some(s) => s.contains(p),
        }
    }
}

/// For each cell, the contributing `(bitile, coefficient tile, negative sign)`.
fn contributions<'a>(
    res: u32,
    n: &'a ChoiceFunction,
    variant: ModelVariant,
    members: &'a Members<'a>,
) -> impl Iterator<Item = (usize, Tile, bool)> + 'a {
    (0..1usize << res).flat_map(move |x| {
        let xi = n.at(x);
        (0..res).filter_map(move |k| {
            if xi >> k & 1 != variant.gate_bit() {
                return None;
            }
            let p = Bitile::at(k, (x >> (res - k)) as u64, xi >> (k + 1));
            if !members.contains(&p) {
                return None;
            }
            let tile = variant.coeff_tile(&p);
            let local = x & ((1usize << (res - k)) - 1);
            Some((x, tile, walsh_parity(tile.freq.position as usize, local, res - k)))
        })
    })
}

fn check<S: Scalar>(f: &GridFunction<S>, n: &ChoiceFunction) -> Result<()> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch);
    }
    if f.res() != n.res() {
        return Err(Error::ResolutionMismatch {
            left: f.res(),
            right: n.res(),
        });
    }
    Ok(())
}

/// `C_S f` for the given choice function and variant.
pub fn model_operator<S: Scalar>(
    s: &BitileSet,
    f: &GridFunction<S>,
    n: &ChoiceFunction,
    variant: ModelVariant,
) -> Result<GridFunction<S>> {
    check(f, n)?;
    let res = f.res();
    let table = PacketTable::new(f)?;
    let members = Members::of(s, res);
    let mut out = GridFunction::zeros(res, Side::Space);
    for (x, tile, neg) in contributions(res, n, variant, &members) {
        let c = table.coefficient(&tile);
        if c.is_zero() {
            continue;
        }
        let term = c.mul_sqrt2_pow(tile.k() as i32);
        if neg {
            out.values_mut()[x] -= &term;
        } else {
            out.values_mut()[x] += &term;
        }
    }
    Ok(out)
}

/// Adjoint of [`model_operator`] for fixed `S`, `N` and variant.
pub fn model_adjoint<S: Scalar>(
    s: &BitileSet,
    g: &GridFunction<S>,
    n: &ChoiceFunction,
    variant: ModelVariant,
) -> Result<GridFunction<S>> {
    check(g, n)?;
    let res = g.res();
    let members = Members::of(s, res);
    // coefficient arrays per scale, laid out like PacketTable::scale
    let mut coeffs: Vec<Vec<S>> = (0..=res).map(|_| vec![S::zero(); 1 << res]).collect();
    let mut used = vec![false; res as usize + 1];
    for (x, tile, neg) in contributions(res, n, variant, &members) {
        let v = &g.values()[x];
        if v.is_zero() {
            continue;
        }
        let k = tile.k();
        let idx = ((tile.time.position as usize) << (res - k)) | tile.freq.position as usize;
        let term = v.mul_sqrt2_pow(k as i32 - 2 * res as i32);
        if neg {
            coeffs[k as usize][idx] -= &term;
        } else {
            coeffs[k as usize][idx] += &term;
        }
        used[k as usize] = true;
    }
    let mut out = GridFunction::zeros(res, Side::Space);
    for k in (0..=res).filter(|&k| used[k as usize]) {
        let part = synthesize_scale(res, k, &coeffs[k as usize]);
        for (o, v) in out.values_mut().iter_mut().zip(part.values()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Direct evaluation from the defining sum over bitiles; independent of
/// the per-cell lookup used by [`model_operator`].
pub fn model_operator_naive<S: Scalar>(
    s: &BitileSet,
    f: &GridFunction<S>,
    n: &ChoiceFunction,
    variant: ModelVariant,
) -> Result<GridFunction<S>> {
    use crate::phase_plane::{packet_coefficient, wave_packet};
    check(f, n)?;
    let res = f.res();
    let mut out = GridFunction::zeros(res, Side::Space);
    for p in s.iter() {
        let (coeff_tile, gate) = match variant {
            ModelVariant::UpperCoeff => (p.upper(), p.lower()),
            ModelVariant::LowerCoeff => (p.lower(), p.upper()),
        };
        let c = packet_coefficient(f, &coeff_tile)?;
        if c.is_zero() {
            continue;
        }
        let w: GridFunction<S> = wave_packet(&coeff_tile, res)?;
        for x in p.time.cells(-(res as i32)) {
            if n.lands_in(x, gate.freq) {
                let term = c.clone() * w.values()[x].clone();
                out.values_mut()[x] += &term;
            }
        }
    }
    Ok(out)
}

//! Walsh partial sums and their maximal function.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::phase_plane::{project_with_table, PacketTable, Tile};
use crate::scalar::Scalar;
use crate::walsh::{walsh_parity, walsh_transform};

use super::choice::ChoiceFunction;

fn require_space<S: Scalar>(f: &GridFunction<S>) -> Result<()> {
    if f.side() == Side::Space {
        Ok(())
    } else {
        Err(Error::SideMismatch)
    }
}

fn out_of_band(n: u64, hi: u64) -> Error {
    Error::OutOfBand {
        value: n,
        range: format!("[0, {hi}]"),
    }
}

/// `S_n f = sum_{k ≤ n} ⟨f, w_k⟩ w_k`, by truncating the transform.
pub fn partial_sum<S: Scalar>(f: &GridFunction<S>, n: u64) -> Result<GridFunction<S>> {
    require_space(f)?;
    let top = (1u64 << f.res()) - 1;
    if n > top {
        return Err(out_of_band(n, top));
    }
    let mut hat = walsh_transform(f);
    for v in &mut hat.values_mut()[n as usize + 1..] {
        *v = S::zero();
    }
    Ok(walsh_transform(&hat))
}

/// `S_n f` as the sum of `⟨f, W_{P_l}⟩ W_{P_l}` over bitiles with
/// `n + 1 ∈ ω_{P_u}`; valid for `n ≤ 2^res - 2`.
pub fn partial_sum_bitile<S: Scalar>(f: &GridFunction<S>, n: u64) -> Result<GridFunction<S>> {
    require_space(f)?;
    let res = f.res();
    if res == 0 || n + 2 > 1u64 << res {
        return Err(out_of_band(n, (1u64 << res).saturating_sub(2)));
    }
    let table = PacketTable::new(f)?;
    Ok(project_with_table(&table, &bitile_terms(res, n + 1)))
}

/// Lower tiles `P_l` of the bitiles with `xi ∈ ω_{P_u}`.
fn bitile_terms(res: u32, xi: u64) -> Vec<Tile> {
    (0..res)
        .filter(|k| xi >> k & 1 == 1)
        .flat_map(|k| {
            let n = (xi >> k) - 1;
            (0..1u64 << k).map(move |m| Tile::at(k, m, n))
        })
        .collect()
}

/// Pointwise maxima of `|S_n f|` and the frequency choice attaining them.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalPartialSum<S> {
    /// `max_{0 ≤ n < 2^res} |S_n f(x)|`.
    pub value: GridFunction<S>,
    /// The same maximum restricted to `n ≤ 2^res - 2`.
    pub banded: GridFunction<S>,
    /// `N*(x) = n*(x) + 1` for the smallest `n*` attaining `banded`; zero
    /// when the band is empty.
    pub choice: ChoiceFunction,
}

/// All partial sums at once, accumulated term by term.
pub fn maximal_partial_sum<S: Scalar>(f: &GridFunction<S>) -> Result<MaximalPartialSum<S>> {
    require_space(f)?;
    let res = f.res();
    let len = f.len();
    let hat = walsh_transform(f);
    let mut partial = vec![S::zero(); len];
    let mut banded = vec![S::zero(); len];
    let mut best_n = vec![0u64; len];
    let mut value = vec![S::zero(); len];
    for n in 0..len {
        let c = &hat.values()[n];
        if !c.is_zero() {
            for (x, s) in partial.iter_mut().enumerate() {
                if walsh_parity(n, x, res) {
                    *s -= c;
                } else {
                    *s += c;
                }
            }
        }
        let in_band = n + 1 < len;
        for x in 0..len {
            let a = partial[x].abs();
            if n == 0 || a > value[x] {
                value[x] = a.clone();
            }
            if in_band && (n == 0 || a > banded[x]) {
                banded[x] = a;
                best_n[x] = n as u64;
            }
        }
    }
    let choice = if len > 1 {
        ChoiceFunction::new(res, best_n.iter().map(|n| n + 1).collect())?
    } else {
        ChoiceFunction::constant(res, 0)?
    };
    Ok(MaximalPartialSum {
        value: GridFunction::new(res, Side::Space, value)?,
        banded: GridFunction::new(res, Side::Space, banded)?,
        choice,
    })
}

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::grid::{CellSet, Measure};
use crate::phase_plane::Bitile;

/// A frequency value `N(x) ∈ [0, 2^res)` for each space cell.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct ChoiceFunction {
    res: u32,
    values: Vec<u64>,
}

#[derive(Deserialize)]
struct ChoiceRepr {
    res: u32,
    values: Vec<u64>,
}

impl<'de> Deserialize<'de> for ChoiceFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ChoiceRepr::deserialize(d)?;
        ChoiceFunction::new(r.res, r.values).map_err(serde::de::Error::custom)
    }
}

impl ChoiceFunction {
    pub fn new(res: u32, values: Vec<u64>) -> Result<Self> {
        let expected = 1usize << res;
        if values.len() != expected {
            return Err(Error::BadLength {
                res,
                expected,
                got: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|&&v| v >> res != 0) {
            return Err(Error::OutOfBand {
                value: v,
                range: format!("[0, {})", 1u64 << res),
            });
        }
        Ok(Self { res, values })
    }

    pub fn constant(res: u32, value: u64) -> Result<Self> {
        Self::new(res, vec![value; 1 << res])
    }

    pub fn from_fn(res: u32, f: impl FnMut(usize) -> u64) -> Result<Self> {
        Self::new(res, (0..1usize << res).map(f).collect())
    }

    pub fn res(&self) -> u32 {
        self.res
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn at(&self, cell: usize) -> u64 {
        self.values[cell]
    }

    /// `N(x) ∈ ω` for `x` in grid cell `cell`.
    pub fn lands_in(&self, cell: usize, omega: DyadicInterval) -> bool {
        omega.contains_cell(self.values[cell] as usize, 0)
    }

    /// `E(P) = I_P ∩ N^-1(ω_P)`, further intersected with `restrict`.
    pub fn engaged_set(&self, p: &Bitile, restrict: Option<&CellSet>) -> CellSet {
        let mut out = CellSet::empty(self.res);
        for c in p.time.cells(-(self.res as i32)) {
            if self.lands_in(c, p.freq) && restrict.map_or(true, |f| f.contains(c)) {
                out.insert(c);
            }
        }
        out
    }

    /// `|E(P)|` in cells.
    pub fn engaged_count(&self, p: &Bitile, restrict: Option<&CellSet>) -> usize {
        p.time
            .cells(-(self.res as i32))
            .filter(|&c| self.lands_in(c, p.freq) && restrict.map_or(true, |f| f.contains(c)))
            .count()
    }

    /// `|E(P)| / |I_P|`.
    pub fn density(&self, p: &Bitile, restrict: Option<&CellSet>) -> Measure {
        Measure::new(
            self.engaged_count(p, restrict) as i64,
            1i64 << (self.res - p.k()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_json() {
        assert!(ChoiceFunction::constant(2, 4).is_err());
        assert!(ChoiceFunction::new(2, vec![0; 3]).is_err());
        let n = ChoiceFunction::from_fn(2, |c| c as u64).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        assert_eq!(s, r#"{"res":2,"values":[0,1,2,3]}"#);
        assert_eq!(serde_json::from_str::<ChoiceFunction>(&s).unwrap(), n);
        assert!(serde_json::from_str::<ChoiceFunction>(r#"{"res":1,"values":[0,2]}"#).is_err());
    }

    #[test]
    fn engaged_set_of_a_bitile() {
        let n = ChoiceFunction::from_fn(2, |c| c as u64).unwrap();
        let p = Bitile::at(0, 0, 0); // [0,1) x [0,2)
        let e = n.engaged_set(&p, None);
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(n.density(&p, None), Measure::new(1, 2));
        let f = CellSet::from_fn(2, |c| c == 1);
        assert_eq!(n.engaged_count(&p, Some(&f)), 1);
    }
}

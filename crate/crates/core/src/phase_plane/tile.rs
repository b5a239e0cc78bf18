use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};

/// A dyadic rectangle `I x ω` in the phase plane.
pub trait PhaseRect: Copy {
    fn time(&self) -> DyadicInterval;
    fn freq(&self) -> DyadicInterval;

    /// Rectangle containment `other ⊆ self`.
    fn contains_rect<R: PhaseRect>(&self, other: &R) -> bool {
        self.time().contains(&other.time()) && self.freq().contains(&other.freq())
    }

    /// Whether the rectangles share a point.
    fn intersects_rect<R: PhaseRect>(&self, other: &R) -> bool {
        self.time().intersects(&other.time()) && self.freq().intersects(&other.freq())
    }

    /// `log2` of the area.
    fn area_exp(&self) -> i32 {
        self.time().scale + self.freq().scale
    }
}

/// `a ≤ b`: `I_a ⊆ I_b` and `ω_b ⊆ ω_a`.
pub fn le<R: PhaseRect>(a: &R, b: &R) -> bool {
    b.time().contains(&a.time()) && a.freq().contains(&b.freq())
}

/// Rectangle of area one. Ordered by `(|I|, l(I), l(ω))`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    #[serde(rename = "I")]
    pub time: DyadicInterval,
    #[serde(rename = "w")]
    pub freq: DyadicInterval,
}

/// Rectangle of area two. Ordered by `(|I|, l(I), l(ω))`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bitile {
    #[serde(rename = "I")]
    pub time: DyadicInterval,
    #[serde(rename = "w")]
    pub freq: DyadicInterval,
}

impl PhaseRect for Tile {
    fn time(&self) -> DyadicInterval {
        self.time
    }
    fn freq(&self) -> DyadicInterval {
        self.freq
    }
}

impl PhaseRect for Bitile {
    fn time(&self) -> DyadicInterval {
        self.time
    }
    fn freq(&self) -> DyadicInterval {
        self.freq
    }
}

fn check_time(time: DyadicInterval, min_scale: i32) -> bool {
    time.scale <= 0 && time.scale >= min_scale && time.position >> (-time.scale) as u32 == 0
}

fn check_freq(freq: DyadicInterval, res: u32) -> bool {
    freq.scale >= 0 && freq.scale <= res as i32 && freq.position >> (res as i32 - freq.scale) as u32 == 0
}

impl Tile {
    /// Tile with `|I| = 2^-k`, `I = [m 2^-k, (m+1) 2^-k)`, `ω = [n 2^k, (n+1) 2^k)`.
    pub const fn at(k: u32, m: u64, n: u64) -> Self {
        Self {
            time: DyadicInterval::new(-(k as i32), m),
            freq: DyadicInterval::new(k as i32, n),
        }
    }

    /// Validated constructor.
    pub fn new(time: DyadicInterval, freq: DyadicInterval, res: u32) -> Result<Self> {
        let t = Self { time, freq };
        t.validate(res)?;
        Ok(t)
    }

    pub fn validate(&self, res: u32) -> Result<()> {
        if self.area_exp() == 0 && check_time(self.time, -(res as i32)) && check_freq(self.freq, res) {
            Ok(())
        } else {
            Err(Error::InvalidRect(format!("{self:?}"), res))
        }
    }

    /// `k` with `|I| = 2^-k`.
    pub fn k(&self) -> u32 {
        (-self.time.scale) as u32
    }
}

impl Bitile {
    /// Bitile with `|I| = 2^-k`, `I = [m 2^-k, ...)`, `ω = [n 2^(k+1), ...)`.
    pub const fn at(k: u32, m: u64, n: u64) -> Self {
        Self {
            time: DyadicInterval::new(-(k as i32), m),
            freq: DyadicInterval::new(k as i32 + 1, n),
        }
    }

    pub fn new(time: DyadicInterval, freq: DyadicInterval, res: u32) -> Result<Self> {
        let b = Self { time, freq };
        b.validate(res)?;
        Ok(b)
    }

    pub fn validate(&self, res: u32) -> Result<()> {
        let ok = res >= 1
            && self.area_exp() == 1
            && check_time(self.time, 1 - res as i32)
            && check_freq(self.freq, res);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRect(format!("{self:?}"), res))
        }
    }

    pub fn k(&self) -> u32 {
        (-self.time.scale) as u32
    }

    /// `P_l = I_P x (left half of ω_P)`.
    pub fn lower(&self) -> Tile {
        Tile {
            time: self.time,
            freq: self.freq.halves().0,
        }
    }

    /// `P_u = I_P x (right half of ω_P)`.
    pub fn upper(&self) -> Tile {
        Tile {
            time: self.time,
            freq: self.freq.halves().1,
        }
    }

    /// The bitile with time interval `time` whose frequency interval
    /// contains `anchor`.
    pub(crate) fn between(time: DyadicInterval, anchor: DyadicInterval) -> Self {
        let freq = anchor
            .ancestor(1 - time.scale)
            .expect("anchor finer than target");
        Self { time, freq }
    }
}

impl fmt::Debug for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tile{}", RectFmt(self))
    }
}

impl fmt::Debug for Bitile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitile{}", RectFmt(self))
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", RectFmt(self))
    }
}

impl fmt::Display for Bitile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", RectFmt(self))
    }
}

struct RectFmt<'a, R>(&'a R);

fn fmt_interval(f: &mut fmt::Formatter<'_>, i: DyadicInterval) -> fmt::Result {
    let (lo, hi) = (i.position, i.position + 1);
    if i.scale >= 0 {
        write!(f, "[{}, {})", lo << i.scale, hi << i.scale)
    } else {
        let d = 1u64 << (-i.scale);
        write!(f, "[{lo}/{d}, {hi}/{d})")
    }
}

impl<R: PhaseRect> fmt::Display for RectFmt<'_, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_interval(f, self.0.time())?;
        write!(f, "x")?;
        fmt_interval(f, self.0.freq())
    }
}

/// All tiles at resolution `res` with `|I| = 2^-k`.
pub fn tiles_at_scale(res: u32, k: u32) -> impl Iterator<Item = Tile> {
    (0..1u64 << k).flat_map(move |m| (0..1u64 << (res - k)).map(move |n| Tile::at(k, m, n)))
}

/// All `(res + 1) 2^res` tiles at resolution `res`, in canonical order.
pub fn all_tiles(res: u32) -> Vec<Tile> {
    (0..=res).rev().flat_map(|k| tiles_at_scale(res, k)).collect()
}

/// All `res 2^(res-1)` bitiles at resolution `res`, in canonical order.
pub fn all_bitiles(res: u32) -> BitileSet {
    (0..res)
        .rev()
        .flat_map(|k| {
            (0..1u64 << k).flat_map(move |m| (0..1u64 << (res - k - 1)).map(move |n| Bitile::at(k, m, n)))
        })
        .collect()
}

/// A finite collection of bitiles, iterated in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitileSet(BTreeSet<Bitile>);

impl BitileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(p: Bitile) -> Self {
        [p].into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: &Bitile) -> bool {
        self.0.contains(p)
    }

    pub fn insert(&mut self, p: Bitile) -> bool {
        self.0.insert(p)
    }

    pub fn remove(&mut self, p: &Bitile) -> bool {
        self.0.remove(p)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Bitile> + ExactSizeIterator + Clone {
        self.0.iter()
    }

    pub fn first(&self) -> Option<&Bitile> {
        self.0.iter().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.0.union(&other.0).copied().collect()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.0.difference(&other.0).copied().collect()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn retain(&mut self, f: impl FnMut(&Bitile) -> bool) {
        self.0.retain(f)
    }

    pub fn filter(&self, mut f: impl FnMut(&Bitile) -> bool) -> Self {
        self.iter().filter(|p| f(p)).copied().collect()
    }

    /// Members `P ≤ top`.
    pub fn below(&self, top: &Bitile) -> Self {
        self.filter(|p| le(p, top))
    }

    /// Members with no strictly larger member, in canonical order.
    pub fn maximal(&self) -> Vec<Bitile> {
        self.iter()
            .filter(|p| !self.iter().any(|q| q != *p && le(*p, q)))
            .copied()
            .collect()
    }

    /// Members with no strictly smaller member, in canonical order.
    pub fn minimal(&self) -> Vec<Bitile> {
        self.iter()
            .filter(|p| !self.iter().any(|q| q != *p && le(q, *p)))
            .copied()
            .collect()
    }

    /// `sum |I_P|` over members, as a count of cells at resolution `res`.
    pub fn time_cells(&self, res: u32) -> u64 {
        self.iter().map(|p| 1u64 << (res - p.k())).sum()
    }
}

impl FromIterator<Bitile> for BitileSet {
    fn from_iter<T: IntoIterator<Item = Bitile>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Extend<Bitile> for BitileSet {
    fn extend<T: IntoIterator<Item = Bitile>>(&mut self, iter: T) {
        self.0.extend(iter)
    }
}

impl IntoIterator for BitileSet {
    type Item = Bitile;
    type IntoIter = std::collections::btree_set::IntoIter<Bitile>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a BitileSet {
    type Item = &'a Bitile;
    type IntoIter = std::collections::btree_set::Iter<'a, Bitile>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for BitileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_validity() {
        for res in 0..=6u32 {
            let tiles = all_tiles(res);
            assert_eq!(tiles.len(), (res as usize + 1) << res);
            assert!(tiles.iter().all(|t| t.validate(res).is_ok()));
            assert!(tiles.windows(2).all(|w| w[0] < w[1]));
            let bitiles = all_bitiles(res);
            let expected = if res == 0 { 0 } else { (res as usize) << (res - 1) };
            assert_eq!(bitiles.len(), expected);
            assert!(bitiles.iter().all(|b| b.validate(res).is_ok()));
        }
        assert!(Tile::new(DyadicInterval::new(-1, 0), DyadicInterval::new(0, 0), 2).is_err());
        assert!(Bitile::new(DyadicInterval::new(-2, 0), DyadicInterval::new(-1, 0), 2).is_err());
        assert!(Bitile::at(0, 0, 0).validate(1).is_ok());
        assert!(Bitile::at(1, 0, 0).validate(1).is_err());
    }

    #[test]
    fn order_examples() {
        let a = Tile::new(DyadicInterval::new(-1, 0), DyadicInterval::new(1, 0), 1).unwrap();
        let b = Tile::at(0, 0, 0);
        assert!(le(&a, &b) && !le(&b, &a));
        let c = Tile::at(1, 1, 0);
        assert!(!le(&a, &c) && !le(&c, &a) && !a.intersects_rect(&c));
        let p = Bitile::at(1, 0, 0);
        assert!(le(&p, &p));
    }

    #[test]
    fn comparability_is_intersection() {
        for res in 0..=4 {
            let tiles = all_tiles(res);
            for a in &tiles {
                for b in &tiles {
                    assert_eq!(le(a, b) || le(b, a), a.intersects_rect(b));
                }
            }
            let bitiles: Vec<_> = all_bitiles(res).into_iter().collect();
            for a in &bitiles {
                for b in &bitiles {
                    assert_eq!(le(a, b) || le(b, a), a.intersects_rect(b));
                }
            }
        }
    }

    #[test]
    fn halves_and_json() {
        let p = Bitile::at(1, 1, 2);
        assert_eq!(p.lower(), Tile::at(1, 1, 4));
        assert_eq!(p.upper(), Tile::at(1, 1, 5));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"I":{"j":-1,"m":1},"w":{"j":2,"m":2}}"#);
        let set = BitileSet::singleton(p);
        let back: BitileSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(back, set);
        assert_eq!(format!("{p}"), "[1/2, 2/2)x[8, 12)");
    }
}

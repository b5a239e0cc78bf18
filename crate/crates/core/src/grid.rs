//! Piecewise-constant functions on the dyadic grid and subsets of it.

use num_rational::{BigRational, Ratio};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Scalar};

/// Exact measure of a union of grid cells.
pub type Measure = Ratio<i64>;

/// Space side is `[0, 1)` with cells of length `2^-res`; frequency side is
/// `[0, 2^res)` with unit cells.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "space")]
    Space,
    #[serde(rename = "freq")]
    Frequency,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Space => Side::Frequency,
            Side::Frequency => Side::Space,
        }
    }
}

/// JSON representation of scalars: floats as numbers, exact values as
/// strings `"p/q"` or `"p/q+r/s*sqrt2"`.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => Ok(s.parse::<ExactScalar>()?.to_f64()),
            other => Err(Error::Parse(format!("expected scalar, got {other}"))),
        }
    }
}

impl JsonScalar for ExactScalar {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => s.parse(),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(ExactScalar::from_i64(i))
                } else {
                    let f = n.as_f64().unwrap_or(f64::NAN);
                    BigRational::from_float(f)
                        .map(ExactScalar::rational)
                        .ok_or_else(|| Error::Parse(format!("bad number {n}")))
                }
            }
            other => Err(Error::Parse(format!("expected scalar, got {other}"))),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct GridFunction<S> {
    res: u32,
    side: Side,
    values: Vec<S>,
}

pub type ExactGrid = GridFunction<ExactScalar>;
pub type FloatGrid = GridFunction<f64>;

impl<S: Scalar> GridFunction<S> {
    pub fn new(res: u32, side: Side, values: Vec<S>) -> Result<Self> {
        let expected = 1usize << res;
        if values.len() != expected {
            return Err(Error::BadLength {
                res,
                expected,
                got: values.len(),
            });
        }
        Ok(Self { res, side, values })
    }

    pub fn zeros(res: u32, side: Side) -> Self {
        Self {
            res,
            side,
            values: vec![S::zero(); 1 << res],
        }
    }

    pub fn from_fn(res: u32, side: Side, f: impl FnMut(usize) -> S) -> Self {
        Self {
            res,
            side,
            values: (0..1usize << res).map(f).collect(),
        }
    }

    /// Indicator of a dyadic interval on the given side.
    pub fn indicator(res: u32, side: Side, interval: DyadicInterval) -> Self {
        let unit = Self::unit_for(res, side);
        Self::from_fn(res, side, |c| {
            if interval.contains_cell(c, unit) {
                S::one()
            } else {
                S::zero()
            }
        })
    }

    fn unit_for(res: u32, side: Side) -> i32 {
        match side {
            Side::Space => -(res as i32),
            Side::Frequency => 0,
        }
    }

    pub fn res(&self) -> u32 {
        self.res
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exponent `e` of the cell length `2^e`.
    pub fn unit(&self) -> i32 {
        Self::unit_for(self.res, self.side)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GridFunction<T> {
        GridFunction {
            res: self.res,
            side: self.side,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn to_float(&self) -> FloatGrid {
        self.map(|v| v.to_f64())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.res != other.res {
            return Err(Error::ResolutionMismatch {
                left: self.res,
                right: other.res,
            });
        }
        if self.side != other.side {
            return Err(Error::SideMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            res: self.res,
            side: self.side,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            res: self.res,
            side: self.side,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(S::is_zero)
    }

    /// `⟨f, g⟩ = |cell| * sum f g` (real scalars, so no conjugation).
    pub fn inner_product(&self, other: &Self) -> Result<S> {
        self.check_compatible(other)?;
        let mut acc = S::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            if !a.is_zero() && !b.is_zero() {
                acc += &(a.clone() * b.clone());
            }
        }
        Ok(acc.mul_pow2(self.unit()))
    }

    /// `‖f‖₂²`, exact on the exact path.
    pub fn norm_sq(&self) -> S {
        self.inner_product(self).expect("self-compatible")
    }

    /// `max |f|`.
    pub fn sup_abs(&self) -> S {
        self.values
            .iter()
            .map(S::abs)
            .fold(S::zero(), |m, v| if v > m { v } else { m })
    }

    /// `‖f‖_p` for `p ≥ 1`; pass `f64::INFINITY` for the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Config(format!("L^p exponent must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_abs().to_f64());
        }
        let cell = 2f64.powi(self.unit());
        let sum: f64 = self.values.iter().map(|v| v.to_f64().abs().powf(p)).sum();
        Ok((sum * cell).powf(1.0 / p))
    }
}

pub fn inner_product<S: Scalar>(f: &GridFunction<S>, g: &GridFunction<S>) -> Result<S> {
    f.inner_product(g)
}

pub fn lp_norm<S: Scalar>(f: &GridFunction<S>, p: f64) -> Result<f64> {
    f.lp_norm(p)
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    res: u32,
    side: Side,
    values: Vec<Value>,
}

impl<S: JsonScalar> GridFunction<S> {
    fn to_repr(&self) -> GridJson {
        GridJson {
            res: self.res,
            side: self.side,
            values: self.values.iter().map(S::to_json).collect(),
        }
    }

    fn from_repr(repr: GridJson) -> Result<Self> {
        let values = repr
            .values
            .iter()
            .map(S::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(repr.res, repr.side, values)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_repr())?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_repr(serde_json::from_str(s)?)
    }
}

impl<S: JsonScalar> Serialize for GridFunction<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.to_repr().serialize(serializer)
    }
}

impl<'de, S: JsonScalar> Deserialize<'de> for GridFunction<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GridJson::deserialize(deserializer)?;
        Self::from_repr(repr).map_err(D::Error::custom)
    }
}

/// A grid function read from JSON, tagged by its scalar kind: exact when
/// every value is a string or an integer, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGrid {
    Exact(ExactGrid),
    Float(FloatGrid),
}

impl AnyGrid {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let repr: GridJson = serde_json::from_str(s)?;
        let exact = repr
            .values
            .iter()
            .all(|v| v.is_string() || v.as_i64().is_some());
        if exact {
            Ok(AnyGrid::Exact(ExactGrid::from_repr(repr)?))
        } else {
            Ok(AnyGrid::Float(FloatGrid::from_repr(repr)?))
        }
    }

    pub fn to_float(&self) -> FloatGrid {
        match self {
            AnyGrid::Exact(g) => g.to_float(),
            AnyGrid::Float(g) => g.clone(),
        }
    }
}

/// A union of space-side grid cells.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CellSet {
    res: u32,
    cells: Vec<bool>,
}

impl CellSet {
    pub fn empty(res: u32) -> Self {
        Self {
            res,
            cells: vec![false; 1 << res],
        }
    }

    pub fn full(res: u32) -> Self {
        Self {
            res,
            cells: vec![true; 1 << res],
        }
    }

    pub fn from_fn(res: u32, f: impl FnMut(usize) -> bool) -> Self {
        Self {
            res,
            cells: (0..1usize << res).map(f).collect(),
        }
    }

    pub fn from_interval(res: u32, interval: DyadicInterval) -> Self {
        let mut s = Self::empty(res);
        s.insert_interval(interval);
        s
    }

    pub fn res(&self) -> u32 {
        self.res
    }

    fn unit(&self) -> i32 {
        -(self.res as i32)
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells[cell]
    }

    pub fn insert(&mut self, cell: usize) {
        self.cells[cell] = true;
    }

    pub fn insert_interval(&mut self, interval: DyadicInterval) {
        for c in interval.cells(self.unit()) {
            self.cells[c] = true;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Measure {
        Measure::new(self.count() as i64, 1i64 << self.res)
    }

    /// Number of cells of `interval` inside the set.
    pub fn count_in(&self, interval: DyadicInterval) -> usize {
        interval
            .cells(self.unit())
            .filter(|&c| self.cells[c])
            .count()
    }

    pub fn measure_in(&self, interval: DyadicInterval) -> Measure {
        Measure::new(self.count_in(interval) as i64, 1i64 << self.res)
    }

    pub fn contains_interval(&self, interval: DyadicInterval) -> bool {
        interval.cells(self.unit()).all(|c| self.cells[c])
    }

    pub fn intersects_interval(&self, interval: DyadicInterval) -> bool {
        interval.cells(self.unit()).any(|c| self.cells[c])
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            res: self.res,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            res: self.res,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            res: self.res,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a && !*b).collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }

    /// The maximal dyadic intervals contained in the set; they partition it.
    pub fn maximal_intervals(&self) -> Vec<DyadicInterval> {
        let mut out = Vec::new();
        let mut stack = vec![DyadicInterval::unit()];
        while let Some(j) = stack.pop() {
            if self.contains_interval(j) {
                out.push(j);
            } else if self.intersects_interval(j) {
                let (l, r) = j.halves();
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    #[test]
    fn length_is_checked() {
        assert!(ExactGrid::new(2, Side::Space, vec![q(1, 1); 3]).is_err());
        assert!(ExactGrid::new(2, Side::Space, vec![q(1, 1); 4]).is_ok());
    }

    #[test]
    fn normalization_and_mismatch() {
        let one = ExactGrid::indicator(3, Side::Space, DyadicInterval::unit());
        assert_eq!(one.inner_product(&one).unwrap(), q(1, 1));
        let other = ExactGrid::zeros(2, Side::Space);
        assert!(matches!(
            one.inner_product(&other),
            Err(Error::ResolutionMismatch { .. })
        ));
        let freq = ExactGrid::zeros(3, Side::Frequency);
        assert!(one.inner_product(&freq).is_err());
    }

    #[test]
    fn lp_norms() {
        let f = FloatGrid::new(1, Side::Space, vec![2.0, 0.0]).unwrap();
        assert!((f.lp_norm(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 2.0);
        assert!(f.lp_norm(0.5).is_err());
    }

    #[test]
    fn json_round_trip_and_tagging() {
        let f = ExactGrid::new(
            1,
            Side::Space,
            vec![q(1, 3), q(1, 2) + ExactScalar::sqrt2()],
        )
        .unwrap();
        let s = f.to_json_string().unwrap();
        assert!(s.contains("\"side\":\"space\""));
        assert_eq!(ExactGrid::from_json_str(&s).unwrap(), f);
        assert!(matches!(AnyGrid::from_json_str(&s).unwrap(), AnyGrid::Exact(_)));
        let g = r#"{"res":1,"side":"freq","values":[0.5, 1]}"#;
        match AnyGrid::from_json_str(g).unwrap() {
            AnyGrid::Float(g) => assert_eq!(g.values(), &[0.5, 1.0]),
            other => panic!("{other:?}"),
        }
        assert!(ExactGrid::from_json_str(r#"{"res":1,"side":"space","values":["1"]}"#).is_err());
    }

    #[test]
    fn maximal_intervals_partition() {
        let s = CellSet::from_fn(3, |c| matches!(c, 0 | 1 | 2 | 3 | 5 | 6));
        let parts = s.maximal_intervals();
        assert_eq!(
            parts,
            vec![
                DyadicInterval::new(-1, 0),
                DyadicInterval::new(-3, 5),
                DyadicInterval::new(-3, 6)
            ]
        );
        assert_eq!(s.measure(), Measure::new(3, 4));
    }
}

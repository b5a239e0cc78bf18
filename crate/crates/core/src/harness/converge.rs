//! Pointwise convergence of Walsh partial sums on sampled functions.

use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::carleson::partial_sum;
use crate::error::{Error, Result};
use crate::grid::{AnyGrid, GridFunction, Measure, Side};
use crate::scalar::{ExactScalar, Scalar};
use crate::walsh::{walsh_function, walsh_parity, walsh_transform};

use super::config::ExperimentConfig;
use super::report::Report;

/// Where the sampled function comes from.
#[derive(Clone, PartialEq, Debug)]
pub enum Source {
    /// `1_[a, b)` averaged over each grid cell.
    Indicator(BigRational, BigRational),
    /// `w_n`.
    Walsh(u64),
    /// A serialized grid function; used at its own resolution only.
    File(PathBuf),
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    decimal_to_rational(s).ok_or_else(bad)
}

/// Exact value of a decimal literal such as `0.1` or `-2.5e-3`.
pub fn decimal_to_rational(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if shift >= 0 {
        BigRational::from_integer(num * ten.pow(shift as u32))
    } else {
        BigRational::new(num, ten.pow((-shift) as u32))
    })
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("unknown source {s:?}; use indicator(a,b), walsh(n) or file(path)"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        match name.trim() {
            "indicator" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                let (a, b) = (parse_rational(a)?, parse_rational(b)?);
                if a < BigRational::zero() || b > BigRational::one() || a > b {
                    return Err(Error::Config(format!("indicator bounds must satisfy 0 <= a <= b <= 1, got {s}")));
                }
                Ok(Source::Indicator(a, b))
            }
            "walsh" => Ok(Source::Walsh(args.trim().parse().map_err(|_| bad())?)),
            "file" => Ok(Source::File(PathBuf::from(args.trim()))),
            _ => Err(bad()),
        }
    }
}

impl Source {
    /// The sampled function at `res`; `None` when the source has no sample
    /// there.
    pub fn sample<S: Scalar>(&self, res: u32) -> Result<Option<GridFunction<S>>> {
        match self {
            Source::Indicator(a, b) => {
                let len = BigRational::from_integer(BigInt::one() << res);
                let cells = 1usize << res;
                Ok(Some(GridFunction::from_fn(res, Side::Space, |c| {
                    let lo = BigRational::from_integer(c.into()) / &len;
                    let hi = BigRational::from_integer((c + 1).into()) / &len;
                    let overlap = hi.clone().min(b.clone()) - lo.clone().max(a.clone());
                    let overlap = if overlap.is_negative() { BigRational::zero() } else { overlap };
                    S::from_rational(&(overlap * BigRational::from_integer(cells.into())))
                })))
            }
            Source::Walsh(n) => {
                if *n >> res != 0 {
                    return Ok(None);
                }
                Ok(Some(walsh_function(*n as usize, res)?))
            }
            Source::File(path) => {
                let grid = AnyGrid::from_json_str(&std::fs::read_to_string(path)?)?;
                let g = match grid {
                    AnyGrid::Exact(g) => g,
                    AnyGrid::Float(g) => g.map(|v| ExactScalar::from_rational(&BigRational::from_float(*v).unwrap_or_default())),
                };
                if g.side() != Side::Space {
                    return Err(Error::SideMismatch);
                }
                if g.res() != res {
                    return Ok(None);
                }
                if g.values().iter().any(|v| v.as_rational().is_none()) {
                    return Err(Error::Config(format!("{}: values must be rational", path.display())));
                }
                Ok(Some(g.map(|v| S::from_rational(v.as_rational().expect("checked rational")))))
            }
        }
    }
}

/// `max_{n ≥ n_0} |S_n f(x) - f(x)|` for each requested `n_0`, built from
/// the top down; `n_0 ≥ 2^res` gives zero.
pub fn deviation_at<S: Scalar>(f: &GridFunction<S>, n0s: &[u64]) -> Vec<Vec<S>> {
    let res = f.res();
    let len = f.len();
    let hat = walsh_transform(f);
    let mut partial = f.values().to_vec();
    let mut running = vec![S::zero(); len];
    let mut out = vec![vec![S::zero(); len]; n0s.len()];
    for n in (0..len).rev() {
        for x in 0..len {
            let d = (partial[x].clone() - f.values()[x].clone()).abs();
            if d > running[x] {
                running[x] = d;
            }
        }
        for (i, _) in n0s.iter().enumerate().filter(|(_, &m)| m == n as u64) {
            out[i] = running.clone();
        }
        // S_{n-1} = S_n - \hat f(n) w_n
        let c = &hat.values()[n];
        if !c.is_zero() {
            for (x, s) in partial.iter_mut().enumerate() {
                if walsh_parity(n, x, res) {
                    *s += c;
                } else {
                    *s -= c;
                }
            }
        }
    }
    out
}

/// [`deviation_at`] for every `n_0 ∈ 0..2^res`.
pub fn suffix_deviation<S: Scalar>(f: &GridFunction<S>) -> Vec<Vec<S>> {
    let all: Vec<u64> = (0..f.len() as u64).collect();
    deviation_at(f, &all)
}

/// `|{x : dev(x) > eps}|`.
fn exceed_measure<S: Scalar>(dev: &[S], eps: &S) -> Measure {
    let count = dev.iter().filter(|d| *d > eps).count();
    Measure::new(count as i64, dev.len() as i64)
}

fn default_n0(res: u32) -> Vec<u64> {
    std::iter::once(0).chain((0..res).map(|j| 1u64 << j)).collect()
}

fn measure_str(m: &Measure) -> String {
    format!("{m} ({:.6})", *m.numer() as f64 / *m.denom() as f64)
}

/// Exceedance measures `|{max_{n ≥ n_0} |S_n f - f| > eps}|` over the
/// configured grids of `n_0` and `eps`, one table per resolution.
pub fn convergence_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let source: Source = cfg.source.parse()?;
    let mut report = Report::new();
    for res in cfg.resolutions() {
        if cfg.exact {
            run_res::<ExactScalar>(&mut report, cfg, &source, res, |e| {
                ExactScalar::from_rational(&decimal_to_rational(&e.to_string()).expect("finite eps"))
            })?;
        } else {
            run_res::<f64>(&mut report, cfg, &source, res, |e| e)?;
        }
    }
    Ok(report)
}

fn run_res<S: Scalar>(
    report: &mut Report,
    cfg: &ExperimentConfig,
    source: &Source,
    res: u32,
    eps_of: impl Fn(f64) -> S,
) -> Result<()> {
    let sec = report.section("converge");
    let Some(f) = source.sample::<S>(res)? else {
        sec.info(format!("res {res}"), "source has no sample at this resolution", "input");
        return Ok(());
    };
    let top = (1u64 << res) - 1;
    let recon = partial_sum(&f, top)? == f;
    sec.check(format!("res {res}: S_(2^res - 1) f = f"), recon, format!("{recon}"), "exact", "exact reconstruction");
    let n0s: Vec<u64> = if cfg.n0.is_empty() { default_n0(res) } else { cfg.n0.clone() };
    let mut wanted = n0s.clone();
    wanted.push(0);
    let dev = deviation_at(&f, &wanted);
    let sup = f.sup_abs().to_f64();
    for &eps in &cfg.eps {
        let e = eps_of(eps);
        let mut last: Option<Measure> = None;
        let mut monotone = true;
        for (i, &n0) in n0s.iter().enumerate() {
            let m = exceed_measure(&dev[i], &e);
            monotone &= last.map_or(true, |l| m <= l);
            sec.info(format!("res {res}: eps {eps}, n0 {n0}"), measure_str(&m), "exceedance measure");
            last = Some(m);
        }
        if n0s.windows(2).all(|w| w[0] <= w[1]) {
            sec.check(
                format!("res {res}: eps {eps}: measure non-increasing in n0"),
                monotone,
                format!("{monotone}"),
                "non-increasing",
                "suffix maxima shrink as n0 grows",
            );
        }
        if eps > 2.0 * sup {
            let m = exceed_measure(&dev[n0s.len()], &e);
            sec.info(format!("res {res}: eps {eps} > 2 sup|f|"), measure_str(&m), "exceedance measure");
        }
    }
    Ok(())
}

/// Exceedance measure for one `(res, n_0, eps)` on the exact path.
pub fn exceedance(source: &Source, res: u32, n0: u64, eps: &BigRational) -> Result<Option<Measure>> {
    let Some(f) = source.sample::<ExactScalar>(res)? else {
        return Ok(None);
    };
    let dev = deviation_at(&f, &[n0]);
    Ok(Some(exceed_measure(&dev[0], &ExactScalar::from_rational(eps))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::report::Status;

    fn cfg(source: &str, res: u32) -> ExperimentConfig {
        ExperimentConfig {
            res_min: res,
            res_max: res,
            source: source.into(),
            ..Default::default()
        }
    }

    #[test]
    fn parses_sources() {
        assert_eq!(
            "indicator(0, 1/3)".parse::<Source>().unwrap(),
            Source::Indicator(BigRational::zero(), BigRational::new(1.into(), 3.into()))
        );
        assert_eq!("walsh(5)".parse::<Source>().unwrap(), Source::Walsh(5));
        assert!("indicator(0.5, 0.25)".parse::<Source>().is_err());
        assert!("sine(1)".parse::<Source>().is_err());
        assert_eq!(decimal_to_rational("0.1").unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(decimal_to_rational("2.5e-1").unwrap(), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn indicator_is_cell_average() {
        let f: GridFunction<ExactScalar> = "indicator(0,1/3)".parse::<Source>().unwrap().sample(2).unwrap().unwrap();
        let q = |n, d| ExactScalar::from_ratio(n, d);
        assert_eq!(f.values(), &[q(1, 1), q(1, 3), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn walsh_polynomial_has_no_tail() {
        let src: Source = "walsh(5)".parse().unwrap();
        for n0 in 5..8 {
            let m = exceedance(&src, 3, n0 + 1, &BigRational::new(1.into(), 100.into())).unwrap().unwrap();
            assert_eq!(m, Measure::new(0, 1));
        }
        let r = convergence_experiment(&cfg("walsh(5)", 3)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn suffix_deviation_matches_direct_partial_sums() {
        let src: Source = "indicator(1/5, 7/9)".parse().unwrap();
        let f: GridFunction<ExactScalar> = src.sample(4).unwrap().unwrap();
        let dev = suffix_deviation(&f);
        for n0 in 0..16u64 {
            let direct: Vec<ExactScalar> = (0..16)
                .map(|x| {
                    (n0..16)
                        .map(|n| (partial_sum(&f, n).unwrap().values()[x].clone() - f.values()[x].clone()).abs())
                        .fold(ExactScalar::zero(), |a, b| if b > a { b } else { a })
                })
                .collect();
            assert_eq!(dev[n0 as usize], direct, "n0 = {n0}");
        }
    }

    #[test]
    fn indicator_table_decreases_and_large_eps_vanishes() {
        let mut c = cfg("indicator(0,1/3)", 8);
        c.eps = vec![0.1, 10.0];
        let r = convergence_experiment(&c).unwrap();
        assert!(r.passed(), "{r}");
        let zero = r.rows().find(|(_, row)| row.metric.contains("> 2 sup")).unwrap();
        assert!(zero.1.value.starts_with("0 "));
        let mut f = c.clone();
        f.exact = false;
        let rf = convergence_experiment(&f).unwrap();
        let values = |r: &Report| -> Vec<String> {
            r.rows().filter(|(_, row)| row.status == Status::Info).map(|(_, row)| row.value.clone()).collect()
        };
        assert_eq!(values(&r), values(&rf));
    }
}

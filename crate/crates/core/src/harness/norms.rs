//! Empirical operator norms: certified power iteration for a fixed choice
//! function and an alternating-maximization lower bound for the maximal
//! partial-sum operator.

use crate::carleson::{maximal_partial_sum, model_adjoint, model_operator, ChoiceFunction, ModelVariant};
use crate::error::Result;
use crate::grid::{FloatGrid, GridFunction, Side};
use crate::phase_plane::{all_bitiles, wave_packet, Bitile, BitileSet};
use crate::scalar::ExactScalar;

use super::config::ExperimentConfig;
use super::instances::{random_float_grid, rng};
use super::report::Report;

/// Artifact-chosen bound on `estimate(res + 1) / estimate(res)` for `res ≥ 6`.
pub const RATIO_BOUND: f64 = 1.25;
/// Resolution from which [`RATIO_BOUND`] is asserted.
pub const RATIO_FROM: u32 = 6;
/// Outer rounds of alternating maximization.
pub const ALTERNATING_ROUNDS: u32 = 12;
/// Inner power steps per round.
pub const INNER_STEPS: u32 = 25;

/// Result of power iteration on `C^* C`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerIteration {
    /// `||C||` estimate, `sqrt(||C^* C v|| / ||v||)`.
    pub sigma: f64,
    /// `||C v||^2 / ||v||^2` at the returned vector.
    pub rayleigh: f64,
    pub iterations: u32,
    pub converged: bool,
    pub vector: FloatGrid,
}

impl PowerIteration {
    /// `|σ² − Rayleigh quotient| ≤ tol σ²`.
    pub fn certified(&self, tol: f64) -> bool {
        (self.sigma * self.sigma - self.rayleigh).abs() <= tol * self.sigma * self.sigma
    }
}

fn normalize(v: &FloatGrid) -> Option<FloatGrid> {
    let n = v.norm_sq().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.scale(&(1.0 / n)))
}

/// Power iteration on `C^* C` for `C = C_{S, N}` with the given variant,
/// started from `start`; stops when `σ²` and the Rayleigh quotient agree
/// to `tol` relative.
pub fn power_iteration(
    s: &BitileSet,
    n: &ChoiceFunction,
    variant: ModelVariant,
    start: &FloatGrid,
    tol: f64,
    max_iterations: u32,
) -> Result<PowerIteration> {
    let res = n.res();
    let Some(mut v) = normalize(start) else {
        return Ok(PowerIteration {
            sigma: 0.0,
            rayleigh: 0.0,
            iterations: 0,
            converged: true,
            vector: GridFunction::zeros(res, Side::Space),
        });
    };
    let mut out = PowerIteration {
        sigma: 0.0,
        rayleigh: 0.0,
        iterations: 0,
        converged: false,
        vector: v.clone(),
    };
    for it in 1..=max_iterations {
        let cv = model_operator(s, &v, n, variant)?;
        let rayleigh = cv.norm_sq();
        let w = model_adjoint(s, &cv, n, variant)?;
        let sigma_sq = w.norm_sq().sqrt();
        out = PowerIteration {
            sigma: sigma_sq.sqrt(),
            rayleigh,
            iterations: it,
            converged: false,
            vector: v.clone(),
        };
        if out.certified(tol) {
            out.converged = true;
            return Ok(out);
        }
        match normalize(&w) {
            Some(next) => v = next,
            None => {
                // C v = 0 on a unit vector: the operator vanishes on the orbit.
                out.sigma = 0.0;
                out.converged = rayleigh == 0.0;
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// `||M f|| / ||f||` with `M f = max_n |S_n f|`.
pub fn maximal_ratio(f: &FloatGrid) -> Result<f64> {
    let nf = f.norm_sq();
    if nf == 0.0 {
        return Ok(0.0);
    }
    Ok((maximal_partial_sum(f)?.value.norm_sq() / nf).sqrt())
}

fn upsample(f: &FloatGrid) -> FloatGrid {
    GridFunction::from_fn(f.res() + 1, Side::Space, |c| f.values()[c >> 1])
}

/// Lower bound on `||M||_{2→2}` at one resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalEstimate {
    pub res: u32,
    pub lower_bound: f64,
    /// Certified `||C_{N*}||` for the final choice function.
    pub fixed: PowerIteration,
    pub maximizer: FloatGrid,
    pub choice: ChoiceFunction,
}

/// Alternate `N ← argmax_n |S_n f|` with power steps on `C_N^* C_N`, then
/// certify the final `C_{N*}` and keep the better of the two ratios.
pub fn alternating_maximization(starts: &[FloatGrid], tol: f64, max_iterations: u32) -> Result<MaximalEstimate> {
    let res = starts[0].res();
    let full = all_bitiles(res);
    let mut best: Option<(f64, FloatGrid)> = None;
    for start in starts {
        let mut f = start.clone();
        for _ in 0..ALTERNATING_ROUNDS {
            let choice = maximal_partial_sum(&f)?.choice;
            let step = power_iteration(&full, &choice, ModelVariant::LowerCoeff, &f, tol, INNER_STEPS)?;
            if step.vector.norm_sq() == 0.0 {
                break;
            }
            f = step.vector;
        }
        let ratio = maximal_ratio(&f)?;
        if best.as_ref().map_or(true, |(b, _)| ratio > *b) {
            best = Some((ratio, f));
        }
    }
    let (_, f) = best.expect("at least one start");
    let choice = maximal_partial_sum(&f)?.choice;
    let fixed = power_iteration(&full, &choice, ModelVariant::LowerCoeff, &f, tol, max_iterations)?;
    let from_fixed = maximal_ratio(&fixed.vector)?;
    let (lower_bound, maximizer) = if from_fixed >= maximal_ratio(&f)? {
        (from_fixed, fixed.vector.clone())
    } else {
        (maximal_ratio(&f)?, f)
    };
    Ok(MaximalEstimate {
        res,
        lower_bound,
        fixed,
        maximizer,
        choice,
    })
}

/// `C` restricted to one bitile with `N` inside its lower half: the
/// rank-one projection onto the upper packet, exact and by power iteration.
fn rank_one_example(report: &mut Report, res: u32, tol: f64, max_iterations: u32) -> Result<()> {
    let p = Bitile::at(0, 0, 0);
    let s = BitileSet::singleton(p);
    let n = ChoiceFunction::constant(res, 0)?;
    let w: GridFunction<ExactScalar> = wave_packet(&p.upper(), res)?;
    let image = model_operator(&s, &w, &n, ModelVariant::UpperCoeff)?;
    let sec = report.section("norms");
    sec.check(
        format!("res {res}: rank-one tree, C W_(P_u) = W_(P_u)"),
        image == w,
        format!("{}", image == w),
        "exact",
        "single bitile with N in the lower half is a rank-one projection",
    );
    let start = GridFunction::from_fn(res, Side::Space, |c| 1.0 + (c % 3) as f64);
    let it = power_iteration(&s, &n, ModelVariant::UpperCoeff, &start, tol, max_iterations)?;
    sec.check(
        format!("res {res}: rank-one tree norm"),
        (it.sigma - 1.0).abs() <= 1e-9 && it.converged,
        format!("{:.12}", it.sigma),
        "1 +- 1e-9",
        "single bitile with N in the lower half is a rank-one projection",
    );
    let empty = power_iteration(&BitileSet::new(), &n, ModelVariant::UpperCoeff, &start, tol, max_iterations)?;
    sec.check(
        format!("res {res}: empty collection norm"),
        empty.sigma == 0.0,
        format!("{}", empty.sigma),
        "0",
        "C over no bitiles vanishes",
    );
    Ok(())
}

/// Norm table over the configured resolutions.
pub fn estimate_operator_norm(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new();
    let mut previous: Option<MaximalEstimate> = None;
    for res in cfg.resolutions() {
        if res == 0 {
            report.section("norms").info("res 0", "single cell: every S_n f = f, ratio 1", "degenerate grid");
            continue;
        }
        rank_one_example(&mut report, res, cfg.tolerance, cfg.max_iterations)?;
        let mut r = rng(cfg.seed, 1000 + res as u64);
        let mut starts: Vec<FloatGrid> = (0..cfg.trials.max(1)).map(|_| random_float_grid(&mut r, res)).collect();
        if let Some(prev) = &previous {
            starts.insert(0, upsample(&prev.maximizer));
        }
        let est = alternating_maximization(&starts, cfg.tolerance, cfg.max_iterations)?;
        let sec = report.section("norms");
        sec.check(
            format!("res {res}: power iteration converged"),
            est.fixed.converged,
            format!("{} iterations", est.fixed.iterations),
            format!("<= {}", cfg.max_iterations),
            "iteration cap",
        );
        sec.check(
            format!("res {res}: power iteration certificate"),
            est.fixed.certified(cfg.tolerance),
            format!("sigma^2 {:.12}, rayleigh {:.12}", est.fixed.sigma.powi(2), est.fixed.rayleigh),
            format!("|sigma^2 - rayleigh| <= {:e} sigma^2", cfg.tolerance),
            "two-sided Rayleigh certificate",
        );
        sec.info(
            format!("res {res}: ||C_N*|| for the final choice"),
            format!("{:.9}", est.fixed.sigma),
            "fixed-N operator norm",
        );
        sec.info(
            format!("res {res}: maximal operator lower bound"),
            format!("{:.9}", est.lower_bound),
            "lower bound by alternating maximization",
        );
        for &p in &cfg.p {
            if p == 2.0 {
                continue;
            }
            let f = &est.maximizer;
            let mf = maximal_partial_sum(f)?.value;
            let ratio = mf.lp_norm(p)? / f.lp_norm(p)?;
            sec.info(format!("res {res}: L^{p} ratio at the L^2 maximizer"), format!("{ratio:.9}"), "lower bound");
        }
        if let Some(prev) = &previous {
            let ratio = est.lower_bound / prev.lower_bound;
            let metric = format!("res {res}: estimate(res) / estimate(res - 1)");
            if prev.res >= RATIO_FROM {
                sec.check(
                    metric,
                    ratio <= RATIO_BOUND,
                    format!("{ratio:.6}"),
                    format!("<= {RATIO_BOUND}"),
                    "artifact-chosen boundedness threshold",
                );
            } else {
                sec.info(metric, format!("{ratio:.6}"), "boundedness across resolutions");
            }
        }
        previous = Some(est);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::report::Status;

    #[test]
    fn rank_one_and_empty() {
        let mut r = Report::new();
        rank_one_example(&mut r, 3, 1e-9, 1000).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn maximal_lower_bound_is_at_least_one_and_monotone() {
        let cfg = ExperimentConfig {
            res_min: 2,
            res_max: 5,
            trials: 2,
            ..Default::default()
        };
        let r = estimate_operator_norm(&cfg).unwrap();
        assert!(r.passed(), "{r}");
        let bounds: Vec<f64> = r
            .rows()
            .filter(|(_, row)| row.metric.ends_with("maximal operator lower bound"))
            .map(|(_, row)| row.value.parse().unwrap())
            .collect();
        assert_eq!(bounds.len(), 4);
        assert!(bounds[0] >= 1.0);
        assert!(bounds.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{bounds:?}");
        assert!(r.rows().all(|(_, row)| row.status != Status::Fail));
    }

    #[test]
    fn power_iteration_is_certified_on_full_set() {
        let res = 4;
        let mut r = rng(7, 0);
        let f = random_float_grid(&mut r, res);
        let n = maximal_partial_sum(&f).unwrap().choice;
        let it = power_iteration(&all_bitiles(res), &n, ModelVariant::LowerCoeff, &f, 1e-9, 20_000).unwrap();
        assert!(it.converged && it.certified(1e-9));
        // C_N f = ± S_{N-1} f pointwise, so ||C_N|| ≥ the ratio at f.
        assert!(it.sigma + 1e-12 >= maximal_partial_sum(&f).unwrap().banded.norm_sq().sqrt() / f.norm_sq().sqrt());
    }
}

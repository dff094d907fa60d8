//! SSIM gradient ascent restricted to images with a given histogram.
//!
//! Each iteration re-projects the current iterate onto the target
//! histogram with EHS, evaluates SSIM against the original and its
//! gradient, and takes a fixed step `X = Y + μ M ∇`. The iterate stays
//! real-valued and unclamped between projections; only the sort order
//! matters to EHS.

use std::time::Instant;

use rayon::prelude::*;

use crate::ehs::{self, EhsVariant};
use crate::error::{Error, Result};
use crate::image::{GrayImage, Histogram, RealImage};
use crate::ssim::{SsimEvaluator, SsimParams};

/// Step size used for the probing run of [`estimate_mu0`].
pub const DEFAULT_MU_PROBE: f64 = 67.0;
pub const DEFAULT_MAX_ITERATIONS: usize = 180;
pub const DEFAULT_PLATEAU_EPSILON: f64 = 1e-5;
pub const DEFAULT_GRID_POINTS: usize = 8;
/// Iterations per candidate in [`search_mu`].
pub const SEARCH_ITERATIONS: usize = 5;

#[derive(Debug, Clone)]
pub struct AscentConfig {
    pub mu: f64,
    pub max_iterations: usize,
    /// Stop once SSIM reaches this value.
    pub ssim_threshold: Option<f64>,
    /// Stop when one iteration changes SSIM by less than this in absolute
    /// value. Zero disables the test.
    pub plateau_epsilon: f64,
    pub ehs_variant: EhsVariant,
    pub ssim: SsimParams,
}

impl AscentConfig {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            ssim_threshold: None,
            plateau_epsilon: DEFAULT_PLATEAU_EPSILON,
            ehs_variant: EhsVariant::Classic,
            ssim: SsimParams::default(),
        }
    }

    pub fn iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn plateau(mut self, eps: f64) -> Self {
        self.plateau_epsilon = eps;
        self
    }

    pub fn threshold(mut self, t: f64) -> Self {
        self.ssim_threshold = Some(t);
        self
    }

    pub fn variant(mut self, v: EhsVariant) -> Self {
        self.ehs_variant = v;
        self
    }

    pub fn ssim_params(mut self, p: SsimParams) -> Self {
        self.ssim = p;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::InvalidParameter(format!("step size {} must be >= 0", self.mu)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if self.plateau_epsilon.is_nan() || self.plateau_epsilon < 0.0 {
            return Err(Error::InvalidParameter("plateau epsilon must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Threshold,
    Plateau,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based; iteration 1 is plain EHS of the input.
    pub iteration: usize,
    pub ssim: f64,
    /// First-order prediction of the gain from the step taken after this
    /// iteration: `μ M Σ ∇²`.
    pub predicted_delta: f64,
    /// Measured `SSIM(n) - SSIM(n-1)`; zero for the first iteration.
    pub actual_delta: f64,
    /// Seconds since the run started, at the end of this iteration.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AscentTrace {
    pub records: Vec<IterationRecord>,
    pub best_iteration: usize,
    pub best_ssim: f64,
    pub stop: Option<StopReason>,
}

impl AscentTrace {
    pub fn ssim_at(&self, iteration: usize) -> Option<f64> {
        self.records.get(iteration.checked_sub(1)?).map(|r| r.ssim)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Output of [`ascend`].
#[derive(Debug, Clone)]
pub struct Ascent {
    /// Best iterate seen; the raw sequence can dip after re-projection.
    pub image: GrayImage,
    pub trace: AscentTrace,
    /// Sum of squared gradient components at each iteration.
    pub gradient_energy: Vec<f64>,
}

/// Estimated SSIM gain of the step `μ M ∇`: `μ M Σ ∇²`.
pub fn predict_delta_ssim(grad: &RealImage, mu: f64) -> f64 {
    mu * grad.len() as f64 * squared_norm(grad)
}

fn squared_norm(grad: &RealImage) -> f64 {
    grad.data().iter().map(|g| g * g).sum()
}

pub fn ascend(original: &GrayImage, h: &Histogram, cfg: &AscentConfig) -> Result<Ascent> {
    cfg.validate()?;
    if h.levels() != original.levels() {
        return Err(Error::LevelMismatch {
            histogram: h.levels(),
            image: original.levels(),
        });
    }
    let start = Instant::now();
    let reference = original.to_real();
    let m = reference.len() as f64;
    let mut evaluator = SsimEvaluator::new(&reference, &cfg.ssim)?;
    let mut x = reference.clone();
    let mut trace = AscentTrace::default();
    let mut best: Option<GrayImage> = None;
    let mut energy = Vec::new();
    let mut prev_ssim = None;

    for n in 1..=cfg.max_iterations {
        let y = ehs::specify(&x, h, cfg.ehs_variant)?.output;
        let y_real = y.to_real();
        let (ssim, grad) = evaluator.with_gradient(&y_real)?;
        if !grad.all_finite() || !ssim.is_finite() {
            return Err(Error::NonFiniteGradient(n));
        }
        let norm = squared_norm(&grad);
        energy.push(norm);
        let actual_delta = prev_ssim.map_or(0.0, |p| ssim - p);
        trace.records.push(IterationRecord {
            iteration: n,
            ssim,
            predicted_delta: cfg.mu * m * norm,
            actual_delta,
            elapsed: start.elapsed().as_secs_f64(),
        });
        if best.is_none() || ssim > trace.best_ssim {
            trace.best_ssim = ssim;
            trace.best_iteration = n;
            best = Some(y);
        }

        if cfg.ssim_threshold.is_some_and(|t| ssim >= t) {
            trace.stop = Some(StopReason::Threshold);
            break;
        }
        if prev_ssim.is_some() && actual_delta.abs() < cfg.plateau_epsilon {
            trace.stop = Some(StopReason::Plateau);
            break;
        }
        if n == cfg.max_iterations {
            trace.stop = Some(StopReason::MaxIterations);
            break;
        }
        prev_ssim = Some(ssim);
        x = y_real.add_scaled(&grad, cfg.mu * m)?;
    }

    Ok(Ascent {
        image: best.expect("at least one iteration runs"),
        trace,
        gradient_energy: energy,
    })
}

/// Parameters of the geometric model of SSIM growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEstimate {
    /// `Σ ∇²` at iteration 1.
    pub p: f64,
    /// Ratio of the second measured gain to the first.
    pub q: f64,
    /// SSIM after iteration 1.
    pub ssim_init: f64,
    /// Approximate upper bound on a good step size.
    pub mu0: f64,
}

/// `μ0 = (1 - q)(1 - SSIM_init) / (p M)`.
pub fn mu0_from_model(p: f64, q: f64, ssim_init: f64, pixels: usize) -> Result<f64> {
    if ssim_init >= 1.0 {
        return Ok(0.0);
    }
    if p.is_nan() || p <= 0.0 {
        return Err(Error::StepModel(format!(
            "zero gradient energy with SSIM {ssim_init} below 1"
        )));
    }
    if q.is_nan() || q >= 1.0 {
        return Err(Error::StepModel(format!("gain ratio q = {q} is not below 1")));
    }
    Ok((1.0 - q) * (1.0 - ssim_init) / (p * pixels as f64))
}

/// SSIM after unbounded iterations when the n-th gain is `μ M p q^(n-1)`.
pub fn predicted_final_ssim(ssim_init: f64, p: f64, q: f64, mu: f64, pixels: usize) -> f64 {
    ssim_init + p * mu * pixels as f64 / (1.0 - q)
}

/// Runs three iterations at `mu_probe` and fits the geometric gain model.
///
/// Fails when the model does not apply (no initial gain, or gains that do
/// not shrink); callers usually fall back to `mu_probe` then.
pub fn estimate_mu0(
    original: &GrayImage,
    h: &Histogram,
    mu_probe: f64,
    variant: EhsVariant,
    ssim: &SsimParams,
) -> Result<StepEstimate> {
    if mu_probe.is_nan() || mu_probe <= 0.0 {
        return Err(Error::InvalidParameter(format!("probe step {mu_probe} must be > 0")));
    }
    let cfg = AscentConfig::new(mu_probe)
        .iterations(3)
        .plateau(0.0)
        .variant(variant)
        .ssim_params(ssim.clone());
    let run = ascend(original, h, &cfg)?;
    let s: Vec<f64> = run.trace.records.iter().map(|r| r.ssim).collect();
    let p = run.gradient_energy[0];
    let ssim_init = s[0];
    if ssim_init >= 1.0 {
        return Ok(StepEstimate {
            p,
            q: 0.0,
            ssim_init,
            mu0: 0.0,
        });
    }
    let gain1 = s[1] - s[0];
    let gain2 = s[2] - s[1];
    if gain1.is_nan() || gain1 <= 0.0 {
        return Err(Error::StepModel(format!("first step did not raise SSIM ({gain1:e})")));
    }
    let q = gain2 / gain1;
    let mu0 = mu0_from_model(p, q, ssim_init, original.len())?;
    Ok(StepEstimate { p, q, ssim_init, mu0 })
}

/// `points` step sizes spaced logarithmically over `[0.1 μ0, μ0]`; a single
/// point sits at the geometric midpoint.
pub fn mu_grid(mu0: f64, points: usize) -> Vec<f64> {
    let lo = 0.1 * mu0;
    match points {
        0 => Vec::new(),
        1 => vec![(lo * mu0).sqrt()],
        _ => (0..points)
            .map(|i| lo * 10f64.powf(i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// Picks the step size with the highest SSIM after five iterations.
///
/// Candidates run in parallel; ties go to the smaller step.
pub fn search_mu(
    original: &GrayImage,
    h: &Histogram,
    mu0: f64,
    grid_points: usize,
    base: &AscentConfig,
) -> Result<(f64, AscentTrace)> {
    if !mu0.is_finite() || mu0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu0 {mu0} must be > 0")));
    }
    if grid_points == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point".into()));
    }
    let runs: Vec<(f64, AscentTrace)> = mu_grid(mu0, grid_points)
        .into_par_iter()
        .map(|mu| {
            let cfg = AscentConfig {
                mu,
                max_iterations: SEARCH_ITERATIONS,
                ssim_threshold: None,
                plateau_epsilon: 0.0,
                ..base.clone()
            };
            ascend(original, h, &cfg).map(|r| (mu, r.trace))
        })
        .collect::<Result<_>>()?;
    let score = |t: &AscentTrace| t.records.last().map_or(f64::NEG_INFINITY, |r| r.ssim);
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if score(&run.1) > score(&runs[best].1) {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("grid is non-empty"))
}

/// Step size picked by [`auto_mu`].
#[derive(Debug, Clone)]
pub struct AutoMu {
    pub mu: f64,
    /// `None` when the probe run did not fit the gain model and the probe
    /// step was used instead.
    pub estimate: Option<StepEstimate>,
    /// Why the estimate was not used, if it was not.
    pub fallback: Option<String>,
}

/// Probe-run estimate of `μ0` followed by [`search_mu`] over
/// `[0.1 μ0, μ0]`. Falls back to `mu_probe` when the gain model does not
/// apply or the input already has the target histogram.
pub fn auto_mu(
    original: &GrayImage,
    h: &Histogram,
    mu_probe: f64,
    grid_points: usize,
    base: &AscentConfig,
) -> Result<AutoMu> {
    let estimate = match estimate_mu0(original, h, mu_probe, base.ehs_variant, &base.ssim) {
        Ok(e) => e,
        Err(Error::StepModel(why)) => {
            return Ok(AutoMu {
                mu: mu_probe,
                estimate: None,
                fallback: Some(why),
            })
        }
        Err(e) => return Err(e),
    };
    if estimate.mu0.is_nan() || estimate.mu0 <= 0.0 {
        return Ok(AutoMu {
            mu: mu_probe,
            estimate: Some(estimate),
            fallback: Some("input already matches the target".into()),
        });
    }
    let (mu, _) = search_mu(original, h, estimate.mu0, grid_points, base)?;
    Ok(AutoMu {
        mu,
        estimate: Some(estimate),
        fallback: None,
    })
}

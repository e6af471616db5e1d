//! Warmup schedules, the RAdam rectifier terms, and the effective warmup period.
//!
//! A warmup schedule is a sequence of factors `ω_t ∈ [0, 1]` that dampen the
//! global learning rate early in training: iteration `t` uses `α·ω_t` instead
//! of `α`. This module provides the schedule algebra as pure functions:
//!
//! * linear warmup `ω_t = min(1, t/τ)`,
//! * exponential warmup `ω_t = 1 − exp(−t/τ)`,
//! * the untuned rules of thumb `τ = 1/(1−β₂)` (exponential) and
//!   `τ = 2/(1−β₂)` (linear),
//! * RAdam's deterministic rectifier factor and its `ρ` terms,
//! * the effective warmup period `Σ_{t≥1} (1 − ω_t)`.
//!
//! Everything here is a pure function of its arguments and safe to call from
//! any number of threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest iteration count the effective-period summation will walk before
/// giving up. All supported schedules converge orders of magnitude sooner.
const EFFECTIVE_PERIOD_MAX_TERMS: u64 = 100_000_000;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "warmup period tau must be positive and finite, got {tau}"
        )));
    }
    Ok(())
}

fn check_beta2(beta2: f64) -> Result<()> {
    if !(beta2 > 0.0 && beta2 < 1.0) {
        return Err(Error::invalid(format!(
            "beta2 must lie strictly inside (0, 1), got {beta2}"
        )));
    }
    Ok(())
}

/// `beta^t` for integer `t`, evaluated as `exp(t·ln beta)` so large `t`
/// stays O(1) and underflows cleanly to zero.
#[inline]
pub(crate) fn beta_pow(beta: f64, t: u64) -> f64 {
    if t == 1 {
        // exp(ln x) is not exactly x; the t = 1 case must be.
        return beta;
    }
    (t as f64 * beta.ln()).exp()
}

/// Linear warmup factor `min(1, t/τ)`.
///
/// Reaches exactly 1 for every `t ≥ τ`.
pub fn linear_warmup(t: u64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok((t as f64 / tau).min(1.0))
}

/// Exponential warmup factor `1 − exp(−t/τ)`.
///
/// Approaches 1 monotonically but never reaches it for finite `t`.
pub fn exponential_warmup(t: u64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(1.0 - (-(t as f64) / tau).exp())
}

/// The untuned exponential warmup period `τ = 1/(1−β₂)`.
pub fn untuned_exponential_tau(beta2: f64) -> Result<f64> {
    check_beta2(beta2)?;
    Ok(1.0 / (1.0 - beta2))
}

/// The untuned linear warmup period `τ = 2/(1−β₂)`.
///
/// Twice the exponential rule so both schedules impose the same total
/// dampening: exponential warmup decelerates over time, linear does not.
pub fn untuned_linear_tau(beta2: f64) -> Result<f64> {
    check_beta2(beta2)?;
    Ok(2.0 / (1.0 - beta2))
}

/// The pair `(ρ_∞, ρ_t)` driving RAdam's rectifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoTerms {
    /// `ρ_∞ = 2/(1−β₂) − 1`, the limit of `ρ_t`.
    pub rho_inf: f64,
    /// `ρ_t = ρ_∞ − 2t·β₂^t/(1−β₂^t)`, strictly increasing in `t`.
    pub rho_t: f64,
}

/// Computes RAdam's `ρ_∞` and `ρ_t`.
pub fn radam_rho(t: u64, beta2: f64) -> Result<RhoTerms> {
    check_beta2(beta2)?;
    if t == 0 {
        return Err(Error::invalid("rho_t requires t >= 1"));
    }
    let rho_inf = 2.0 / (1.0 - beta2) - 1.0;
    let b2t = beta_pow(beta2, t);
    let rho_t = rho_inf - 2.0 * t as f64 * b2t / (1.0 - b2t);
    Ok(RhoTerms { rho_inf, rho_t })
}

/// Outcome of evaluating RAdam's rectifier at iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadamPhase {
    /// `ρ_t ≤ 4`: the rectifier is inactive and RAdam takes a bias-corrected
    /// momentum step instead of an adaptive one.
    Momentum,
    /// `ρ_t > 4`: the rectified warmup factor
    /// `ω_t = sqrt(((ρ_t−4)(ρ_t−2)ρ_∞) / ((ρ_∞−4)(ρ_∞−2)ρ_t))`, in `(0, 1]`.
    Rectified(f64),
}

impl RadamPhase {
    /// The factor as a plain number, taking the momentum phase as zero.
    ///
    /// This is the convention used when RAdam's rectifier is treated as an
    /// ordinary warmup schedule (for effective-period comparisons and for
    /// running Adam against the rectifier schedule).
    pub fn factor_or_zero(self) -> f64 {
        match self {
            RadamPhase::Momentum => 0.0,
            RadamPhase::Rectified(w) => w,
        }
    }
}

/// Evaluates RAdam's rectifier at iteration `t`.
///
/// Returns [`RadamPhase::Momentum`] exactly when `ρ_t ≤ 4`; for every
/// `β₂ ∈ [0.8, 1)` that happens precisely for `t ≤ 4`.
pub fn radam_warmup_factor(t: u64, beta2: f64) -> Result<RadamPhase> {
    let RhoTerms { rho_inf, rho_t } = radam_rho(t, beta2)?;
    if rho_t <= 4.0 {
        return Ok(RadamPhase::Momentum);
    }
    let num = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
    let den = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
    Ok(RadamPhase::Rectified((num / den).sqrt()))
}

/// A named warmup schedule: a mapping `t ↦ ω_t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WarmupSchedule {
    /// No warmup: `ω_t ≡ 1`.
    ConstantOne,
    /// `ω_t = min(1, t/τ)`.
    Linear { tau: f64 },
    /// `ω_t = 1 − exp(−t/τ)`.
    Exponential { tau: f64 },
    /// RAdam's rectifier factor, with the momentum phase (`ρ_t ≤ 4`) taken
    /// as `ω_t = 0`.
    RadamRectifier { beta2: f64 },
}

impl WarmupSchedule {
    /// Linear warmup over `tau` iterations.
    pub fn linear(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(WarmupSchedule::Linear { tau })
    }

    /// Exponential warmup with time constant `tau`.
    pub fn exponential(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(WarmupSchedule::Exponential { tau })
    }

    /// Untuned linear warmup: `τ = 2/(1−β₂)`.
    pub fn linear_untuned(beta2: f64) -> Result<Self> {
        Ok(WarmupSchedule::Linear {
            tau: untuned_linear_tau(beta2)?,
        })
    }

    /// Untuned exponential warmup: `τ = 1/(1−β₂)`.
    pub fn exponential_untuned(beta2: f64) -> Result<Self> {
        Ok(WarmupSchedule::Exponential {
            tau: untuned_exponential_tau(beta2)?,
        })
    }

    /// RAdam's rectifier as a fixed schedule.
    pub fn radam_rectifier(beta2: f64) -> Result<Self> {
        check_beta2(beta2)?;
        Ok(WarmupSchedule::RadamRectifier { beta2 })
    }

    /// The warmup factor `ω_t` for iteration `t ≥ 1`.
    pub fn factor(&self, t: u64) -> f64 {
        match *self {
            WarmupSchedule::ConstantOne => 1.0,
            WarmupSchedule::Linear { tau } => (t as f64 / tau).min(1.0),
            WarmupSchedule::Exponential { tau } => 1.0 - (-(t as f64) / tau).exp(),
            WarmupSchedule::RadamRectifier { beta2 } => radam_warmup_factor(t, beta2)
                .expect("beta2 validated at construction")
                .factor_or_zero(),
        }
    }

    /// Short machine-readable name, used in CSV output and manifests.
    pub fn name(&self) -> &'static str {
        match self {
            WarmupSchedule::ConstantOne => "constant-one",
            WarmupSchedule::Linear { .. } => "linear",
            WarmupSchedule::Exponential { .. } => "exponential",
            WarmupSchedule::RadamRectifier { .. } => "radam-rectifier",
        }
    }
}

/// The effective warmup period `𝒯(ω) = Σ_{t=1}^∞ (1 − ω_t)`: the total
/// dampening a schedule imposes across all of training.
///
/// The infinite sum is truncated once the current term drops below
/// `tolerance` *and* an analytic bound on the remaining tail does too.
/// Linear warmup terminates exactly at `t = ⌈τ⌉ − 1`; constant-one returns 0.
pub fn effective_warmup_period(schedule: &WarmupSchedule, tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(Error::invalid(format!(
            "tolerance must be positive and finite, got {tolerance}"
        )));
    }
    match *schedule {
        WarmupSchedule::ConstantOne => Ok(0.0),
        WarmupSchedule::Linear { tau } => {
            // Finite sum: 1 − ω_t vanishes for t ≥ τ. With an integer period
            // this collapses to the closed form (τ−1)/2.
            if tau == tau.trunc() {
                return Ok((tau - 1.0) / 2.0);
            }
            let last = tau.ceil() as u64 - 1;
            let n = last as f64;
            Ok(n - n * (n + 1.0) / (2.0 * tau))
        }
        WarmupSchedule::Exponential { tau } => {
            // Terms exp(−t/τ) are geometric with ratio r = exp(−1/τ); the
            // tail after T is term_T · r / (1 − r).
            let r = (-1.0 / tau).exp();
            let mut sum = 0.0;
            let mut term = r; // t = 1
            let mut t = 1u64;
            loop {
                sum += term;
                let tail = term * r / (1.0 - r);
                if term < tolerance && tail < tolerance {
                    return Ok(sum);
                }
                if t >= EFFECTIVE_PERIOD_MAX_TERMS {
                    return Err(Error::NumericFailure(format!(
                        "effective warmup period did not converge within {t} terms"
                    )));
                }
                t += 1;
                term *= r;
            }
        }
        WarmupSchedule::RadamRectifier { beta2 } => {
            // The momentum phase counts as fully dampened (ω = 0).
            let mut sum = 0.0;
            let mut t = 1u64;
            loop {
                let term = 1.0 - radam_warmup_factor(t, beta2)?.factor_or_zero();
                sum += term;
                if term < tolerance && radam_tail_bound(t, beta2) < tolerance {
                    return Ok(sum);
                }
                if t >= EFFECTIVE_PERIOD_MAX_TERMS {
                    return Err(Error::NumericFailure(format!(
                        "effective warmup period did not converge within {t} terms"
                    )));
                }
                t += 1;
            }
        }
    }
}

/// Upper bound on `Σ_{s>t} (1 − ω_s)` for the rectifier schedule.
///
/// With g(ρ) = (ρ−4)(ρ−2)/ρ increasing on (4, ρ_∞) and sqrt(x) ≥ x on [0,1]:
///   1 − ω_s = 1 − sqrt(g(ρ_s)/g(ρ_∞)) ≤ (g(ρ_∞) − g(ρ_s))/g(ρ_∞)
///           ≤ (ρ_∞ − ρ_s)/g(ρ_∞)            (g′ ≤ 1 there)
///           ≤ 2·s·β₂^s / ((1−β₂)·g(ρ_∞)),
/// and Σ_{s>t} s·β₂^s = β₂^{t+1}·((t+1) − t·β₂)/(1−β₂)² in closed form.
fn radam_tail_bound(t: u64, beta2: f64) -> f64 {
    let rho_inf = 2.0 / (1.0 - beta2) - 1.0;
    if rho_inf <= 4.0 {
        return f64::INFINITY;
    }
    let g_inf = (rho_inf - 4.0) * (rho_inf - 2.0) / rho_inf;
    let b = beta2;
    let tf = t as f64;
    let series = beta_pow(b, t + 1) * ((tf + 1.0) - tf * b) / ((1.0 - b) * (1.0 - b));
    2.0 * series / ((1.0 - b) * g_inf)
}

/// One counterexample to the claim `ρ_t ≤ 4 ⟺ t ≤ 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fact1Counterexample {
    pub beta2: f64,
    pub t: u64,
    pub rho_t: f64,
}

/// Report from an exhaustive sweep of the momentum-phase boundary.
#[derive(Debug, Clone)]
pub struct Fact1Report {
    /// Number of `β₂` grid points checked.
    pub grid_len: usize,
    /// Largest iteration checked for each grid point.
    pub t_max: u64,
    /// First violation found, if any.
    pub counterexample: Option<Fact1Counterexample>,
}

impl Fact1Report {
    pub fn verified(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// The default sweep grid: `β₂ ∈ {0.800, 0.801, …, 0.999} ∪ {0.9995, 0.9999}`.
pub fn fact1_default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..200).map(|i| 0.8 + i as f64 * 1e-3).collect();
    grid.push(0.9995);
    grid.push(0.9999);
    grid
}

/// Exhaustively checks `ρ_t ≤ 4 ⟺ t ≤ 4` over a `β₂` grid and `t ∈ [1, t_max]`.
///
/// Every grid point must lie in `[0.8, 1)`, the hypothesis under which the
/// equivalence holds.
pub fn verify_fact1(beta2_grid: &[f64], t_max: u64) -> Result<Fact1Report> {
    if beta2_grid.is_empty() {
        return Err(Error::invalid("fact1 sweep needs a non-empty beta2 grid"));
    }
    for &b2 in beta2_grid {
        if !(0.8..1.0).contains(&b2) {
            return Err(Error::invalid(format!(
                "fact1 hypothesis requires beta2 in [0.8, 1), got {b2}"
            )));
        }
    }
    let mut counterexample = None;
    'outer: for &b2 in beta2_grid {
        for t in 1..=t_max {
            let rho_t = radam_rho(t, b2)?.rho_t;
            if (rho_t <= 4.0) != (t <= 4) {
                counterexample = Some(Fact1Counterexample { beta2: b2, t, rho_t });
                break 'outer;
            }
        }
    }
    Ok(Fact1Report {
        grid_len: beta2_grid.len(),
        t_max,
        counterexample,
    })
}

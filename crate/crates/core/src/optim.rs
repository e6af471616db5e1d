//! Per-iteration update rules: SGD, Adam, RAdam, and warmup-scheduled
//! variants of each.
//!
//! All rules share the state convention `m_0 = v_0 = 0` and the Adam moment
//! recurrences
//!
//! ```text
//! m_t = β₁·m_{t−1} + (1−β₁)·g_t
//! v_t = β₂·v_{t−1} + (1−β₂)·g_t²
//! ```
//!
//! with bias corrections `(1−β₁^t)⁻¹` and `(1−β₂^t)⁻¹`. The corrected
//! estimates are evaluated incrementally (see [`BiasCorrection`]) rather than
//! by multiplying and re-dividing by `1−β^t`, which keeps the first-step
//! identity `|update| = α·ω` exact in floating point whenever the gradient is
//! nonzero — the property the update-magnitude analyses rest on.
//!
//! Weight decay is decoupled: the shrinkage term `α·ω_t·wd·θ` is applied
//! alongside the adaptive step and never enters `m` or `v`, and the
//! [`StepResult::update`] field deliberately excludes it so instrumentation
//! sees exactly the adaptive update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::{beta_pow, radam_warmup_factor, RadamPhase, WarmupSchedule};

/// Adam's scalar hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyperparams {
    /// Global learning rate `α > 0`.
    pub alpha: f64,
    /// First-moment discount factor `β₁ ∈ (0, 1)`.
    pub beta1: f64,
    /// Second-moment discount factor `β₂ ∈ (0, 1)`.
    pub beta2: f64,
    /// Stability constant `ε ≥ 0`. Zero is allowed; a coordinate whose whole
    /// gradient history is zero then takes a zero update (0/0 guard).
    pub epsilon: f64,
    /// Decoupled weight-decay coefficient, `≥ 0`.
    pub weight_decay: f64,
}

impl Default for AdamHyperparams {
    fn default() -> Self {
        AdamHyperparams {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl AdamHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::invalid(format!("beta1 must lie in (0, 1), got {}", self.beta1)));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::invalid(format!("beta2 must lie in (0, 1), got {}", self.beta2)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::invalid(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Iteration counter and moment estimates, one slot per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Completed iterations; 0 before the first step.
    pub t: u64,
    /// First-moment estimate `m`.
    pub m: Vec<f64>,
    /// Second-moment estimate `v`; every entry stays `≥ 0`.
    pub v: Vec<f64>,
}

impl OptimizerState {
    /// Fresh state for `p` parameters: `t = 0`, `m = v = 0`.
    pub fn zeros(p: usize) -> Self {
        OptimizerState {
            t: 0,
            m: vec![0.0; p],
            v: vec![0.0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// Outcome of one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Parameters after the step.
    pub new_params: Vec<f64>,
    /// The quantity subtracted from the parameters, including `α` and `ω_t`
    /// but excluding the decoupled weight-decay term.
    pub update: Vec<f64>,
    /// The warmup factor this step applied.
    pub warmup_factor_applied: f64,
}

/// How RAdam behaves during its momentum phase (`ρ_t ≤ 4`). The variants
/// differ only there; once the rectifier activates they are all identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadamAblationMode {
    /// Bias-corrected heavy-ball momentum, `α·(1−β₁^t)⁻¹·m_t`.
    Standard,
    /// Skip the parameter update entirely (state still advances).
    DoNothing,
    /// Adam with the fixed factor `ω₅` the rectifier will use at `t = 5`.
    JumpToOmega5,
    /// Adam with `ω = (t/5)·ω₅`, warming up linearly to the `t = 5` factor.
    LinearToOmega5,
}

/// Precomputed bias-correction coefficients for one iteration `t ≥ 1`.
///
/// The corrected estimates are evaluated by the equivalent incremental form
///
/// ```text
/// m̂_t = m̂_{t−1} + κ₁·(g − m̂_{t−1}),   κ₁ = (1−β₁)/(1−β₁^t)
/// v̂_t = v̂_{t−1} + κ₂·(g² − v̂_{t−1}),  κ₂ = (1−β₂)/(1−β₂^t)
/// ```
///
/// with `m̂_0 = v̂_0 = 0`. At `t = 1` this yields `m̂₁ = g` and `v̂₁ = g²`
/// exactly (κ = 1 bit-for-bit), so the first update magnitude is exactly
/// `α·ω` — multiplying by `1−β` and dividing back loses that on roughly one
/// gradient in seven.
#[derive(Debug, Clone, Copy)]
pub struct BiasCorrection {
    k1: f64,
    k2: f64,
    bc1_prev: f64,
    bc2_prev: f64,
}

impl BiasCorrection {
    /// Coefficients for step `t` (the step that consumes gradient `g_t`).
    pub fn at(t: u64, beta1: f64, beta2: f64) -> Self {
        debug_assert!(t >= 1);
        let bc1 = 1.0 - beta_pow(beta1, t);
        let bc2 = 1.0 - beta_pow(beta2, t);
        BiasCorrection {
            k1: (1.0 - beta1) / bc1,
            k2: (1.0 - beta2) / bc2,
            // 1 − β^0 = 0 at t = 1; the corrected previous estimate is then 0
            // by the m_0 = v_0 = 0 convention.
            bc1_prev: 1.0 - beta_pow(beta1, t - 1),
            bc2_prev: 1.0 - beta_pow(beta2, t - 1),
        }
    }

    /// Bias-corrected `(m̂_t, v̂_t)` given the *previous* raw moments and the
    /// current gradient.
    #[inline]
    pub fn corrected_moments(&self, m_prev: f64, v_prev: f64, g: f64) -> (f64, f64) {
        let m_hat_prev = if self.bc1_prev == 0.0 { 0.0 } else { m_prev / self.bc1_prev };
        let v_hat_prev = if self.bc2_prev == 0.0 { 0.0 } else { v_prev / self.bc2_prev };
        let m_hat = m_hat_prev + self.k1 * (g - m_hat_prev);
        let v_hat = v_hat_prev + self.k2 * (g * g - v_hat_prev);
        (m_hat, v_hat)
    }
}

fn check_lengths(params: &[f64], grad: &[f64], state: Option<&OptimizerState>) -> Result<()> {
    if params.len() != grad.len() {
        return Err(Error::ShapeMismatch {
            context: "params vs grad",
            expected: params.len(),
            got: grad.len(),
        });
    }
    if let Some(state) = state {
        if state.m.len() != state.v.len() {
            return Err(Error::ShapeMismatch {
                context: "state m vs v",
                expected: state.m.len(),
                got: state.v.len(),
            });
        }
        if state.m.len() != params.len() {
            return Err(Error::ShapeMismatch {
                context: "params vs optimizer state",
                expected: state.m.len(),
                got: params.len(),
            });
        }
    }
    Ok(())
}

fn check_warmup_factor(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(format!("warmup factor must lie in [0, 1], got {w}")));
    }
    Ok(())
}

/// One SGD step: `θ ← θ − α·g`.
pub fn sgd_step(params: &[f64], grad: &[f64], alpha: f64) -> Result<StepResult> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    check_lengths(params, grad, None)?;
    let update: Vec<f64> = grad.iter().map(|&g| alpha * g).collect();
    let new_params: Vec<f64> = params.iter().zip(&update).map(|(&p, &u)| p - u).collect();
    Ok(StepResult {
        new_params,
        update,
        warmup_factor_applied: 1.0,
    })
}

/// One Adam step with an explicit warmup factor; advances `state` to `t+1`.
///
/// The update for coordinate `i` is `α·ω·m̂/(√v̂ + ε)`, with bias corrections
/// taken at the new `t`. A coordinate whose denominator is exactly zero
/// (possible only when `ε = 0` and its entire gradient history is zero)
/// takes a zero update. When `weight_decay > 0`, the decoupled term
/// `α·ω·wd·θ` is subtracted as well but excluded from
/// [`StepResult::update`].
pub fn adam_step(
    params: &[f64],
    grad: &[f64],
    state: &mut OptimizerState,
    hp: &AdamHyperparams,
    warmup_factor: f64,
) -> Result<StepResult> {
    hp.validate()?;
    check_warmup_factor(warmup_factor)?;
    check_lengths(params, grad, Some(state))?;

    let t = state.t + 1;
    let bc = BiasCorrection::at(t, hp.beta1, hp.beta2);
    let alpha_omega = hp.alpha * warmup_factor;
    let decay = alpha_omega * hp.weight_decay;

    let mut update = vec![0.0; params.len()];
    let mut new_params = vec![0.0; params.len()];
    for i in 0..params.len() {
        let g = grad[i];
        let (m_hat, v_hat) = bc.corrected_moments(state.m[i], state.v[i], g);
        state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
        state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * (g * g);
        let den = v_hat.sqrt() + hp.epsilon;
        let u = if den == 0.0 { 0.0 } else { alpha_omega * (m_hat / den) };
        update[i] = u;
        new_params[i] = params[i] - u - decay * params[i];
    }
    state.t = t;
    Ok(StepResult {
        new_params,
        update,
        warmup_factor_applied: warmup_factor,
    })
}

/// One RAdam step; advances `state` to `t+1`.
///
/// While `ρ_t > 4` this is exactly [`adam_step`] with the rectifier factor as
/// the warmup factor. While `ρ_t ≤ 4` the behavior is chosen by `ablation`;
/// [`RadamAblationMode::Standard`] takes the bias-corrected momentum step
/// `α·(1−β₁^t)⁻¹·m_t` (note `v` still accumulates).
pub fn radam_step(
    params: &[f64],
    grad: &[f64],
    state: &mut OptimizerState,
    hp: &AdamHyperparams,
    ablation: RadamAblationMode,
) -> Result<StepResult> {
    hp.validate()?;
    check_lengths(params, grad, Some(state))?;

    let t = state.t + 1;
    match radam_warmup_factor(t, hp.beta2)? {
        RadamPhase::Rectified(w) => adam_step(params, grad, state, hp, w),
        RadamPhase::Momentum => match ablation {
            RadamAblationMode::Standard => {
                let bc = BiasCorrection::at(t, hp.beta1, hp.beta2);
                let decay = hp.alpha * hp.weight_decay;
                let mut update = vec![0.0; params.len()];
                let mut new_params = vec![0.0; params.len()];
                for i in 0..params.len() {
                    let g = grad[i];
                    let (m_hat, _) = bc.corrected_moments(state.m[i], state.v[i], g);
                    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
                    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * (g * g);
                    let u = hp.alpha * m_hat;
                    update[i] = u;
                    new_params[i] = params[i] - u - decay * params[i];
                }
                state.t = t;
                Ok(StepResult {
                    new_params,
                    update,
                    warmup_factor_applied: 1.0,
                })
            }
            RadamAblationMode::DoNothing => {
                for i in 0..params.len() {
                    let g = grad[i];
                    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
                    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * (g * g);
                }
                check_lengths(params, grad, Some(state))?;
                state.t = t;
                Ok(StepResult {
                    new_params: params.to_vec(),
                    update: vec![0.0; params.len()],
                    warmup_factor_applied: 0.0,
                })
            }
            RadamAblationMode::JumpToOmega5 => {
                adam_step(params, grad, state, hp, omega5(hp.beta2)?)
            }
            RadamAblationMode::LinearToOmega5 => {
                let w = (t as f64 / 5.0) * omega5(hp.beta2)?;
                adam_step(params, grad, state, hp, w)
            }
        },
    }
}

/// The rectifier factor at `t = 5`, the target of the ablation ramps.
fn omega5(beta2: f64) -> Result<f64> {
    match radam_warmup_factor(5, beta2)? {
        RadamPhase::Rectified(w) => Ok(w),
        RadamPhase::Momentum => Err(Error::InvalidConfiguration(format!(
            "omega_5 is undefined for beta2 = {beta2}: the rectifier is still \
             inactive at t = 5 (requires beta2 >= 0.8)"
        ))),
    }
}

/// Which update rule a [`Optimizer`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Radam,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Radam => "radam",
        }
    }
}

/// A stateful stepper combining an update rule with a warmup schedule.
///
/// The iteration counter starts at 0; the `t`-th call to [`Optimizer::step`]
/// applies `ω_t`. RAdam's rectifier *is* its schedule, so `Radam` requires
/// [`WarmupSchedule::ConstantOne`]. SGD follows the plain first-order rule
/// and ignores `weight_decay`.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    hp: AdamHyperparams,
    schedule: WarmupSchedule,
    state: OptimizerState,
}

impl Optimizer {
    pub fn new(
        kind: OptimizerKind,
        hp: AdamHyperparams,
        schedule: WarmupSchedule,
        n_params: usize,
    ) -> Result<Self> {
        hp.validate()?;
        if kind == OptimizerKind::Radam && schedule != WarmupSchedule::ConstantOne {
            return Err(Error::InvalidConfiguration(
                "RAdam embeds its own warmup schedule; combine it only with the \
                 constant-one schedule"
                    .into(),
            ));
        }
        Ok(Optimizer {
            kind,
            hp,
            schedule,
            state: OptimizerState::zeros(n_params),
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyperparams(&self) -> &AdamHyperparams {
        &self.hp
    }

    pub fn schedule(&self) -> &WarmupSchedule {
        &self.schedule
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    /// The warmup factor the *next* call to [`Optimizer::step`] will apply.
    pub fn next_warmup_factor(&self) -> f64 {
        match self.kind {
            OptimizerKind::Radam => radam_warmup_factor(self.state.t + 1, self.hp.beta2)
                .expect("hyperparams validated at construction")
                .factor_or_zero(),
            _ => self.schedule.factor(self.state.t + 1),
        }
    }

    /// Applies one update step and advances the iteration counter.
    pub fn step(&mut self, params: &[f64], grad: &[f64]) -> Result<StepResult> {
        let t = self.state.t + 1;
        match self.kind {
            OptimizerKind::Sgd => {
                check_lengths(params, grad, Some(&self.state))?;
                let w = self.schedule.factor(t);
                let alpha_omega = self.hp.alpha * w;
                let update: Vec<f64> = grad.iter().map(|&g| alpha_omega * g).collect();
                let new_params: Vec<f64> =
                    params.iter().zip(&update).map(|(&p, &u)| p - u).collect();
                self.state.t = t;
                Ok(StepResult {
                    new_params,
                    update,
                    warmup_factor_applied: w,
                })
            }
            OptimizerKind::Adam => {
                let w = self.schedule.factor(t);
                adam_step(params, grad, &mut self.state, &self.hp, w)
            }
            OptimizerKind::Radam => {
                radam_step(params, grad, &mut self.state, &self.hp, RadamAblationMode::Standard)
            }
        }
    }
}

/// Current checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Serializable optimizer snapshot. JSON round-trips `f64` values exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub kind: OptimizerKind,
    pub hyperparams: AdamHyperparams,
    pub schedule: WarmupSchedule,
    pub state: OptimizerState,
}

impl Optimizer {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            kind: self.kind,
            hyperparams: self.hp,
            schedule: self.schedule,
            state: self.state.clone(),
        }
    }

    /// Restores an optimizer from a checkpoint, validating version and shape.
    pub fn from_checkpoint(c: Checkpoint) -> Result<Self> {
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfiguration(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                c.version
            )));
        }
        c.hyperparams.validate()?;
        if c.state.m.len() != c.state.v.len() {
            return Err(Error::ShapeMismatch {
                context: "checkpoint m vs v",
                expected: c.state.m.len(),
                got: c.state.v.len(),
            });
        }
        if c.kind == OptimizerKind::Radam && c.schedule != WarmupSchedule::ConstantOne {
            return Err(Error::InvalidConfiguration(
                "checkpoint pairs RAdam with a non-constant schedule".into(),
            ));
        }
        Ok(Optimizer {
            kind: c.kind,
            hp: c.hyperparams,
            schedule: c.schedule,
            state: c.state,
        })
    }
}

/// Writes a checkpoint as pretty-printed JSON.
pub fn save_checkpoint(path: &std::path::Path, checkpoint: &Checkpoint) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), checkpoint)
        .map_err(|e| Error::NumericFailure(format!("checkpoint serialization failed: {e}")))
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &std::path::Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::invalid(format!("{}: invalid checkpoint: {e}", path.display())))
}

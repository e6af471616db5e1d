//! Monte-Carlo analysis of Adam's update magnitudes at a simulated local
//! minimum.
//!
//! Gradients are drawn i.i.d. from `N(0, σ²)` for every parameter and
//! iteration — the sampling distribution of minibatch gradients for a model
//! sitting exactly at a local minimum. Each parameter runs its own Adam
//! recurrence; the per-iteration output is the cross-parameter quantiles of
//! the update magnitude in units of the global learning rate (the simulation
//! runs with `α = 1`, so no division is needed and the `t = 1` magnitudes
//! are exactly 1 when `ε = 0`).
//!
//! Every parameter draws from its own counter-based RNG substream, so the
//! trajectory is a pure function of the seed no matter how the parameter
//! loop is chunked. Memory stays O(n_params): one row of quantiles is
//! emitted per iteration, never an n_params × n_iters matrix.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::optim::{AdamHyperparams, BiasCorrection};
use crate::stats;

/// Configuration of the local-minimum simulation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    /// Number of independent parameters (gradient trajectories).
    pub n_params: usize,
    /// Trajectory length in iterations.
    pub n_iters: usize,
    /// Gradient variance σ². With `ε = 0` the trajectory is invariant to
    /// this choice up to floating-point rounding.
    pub grad_variance: f64,
    /// Adam configuration. `alpha` is ignored: magnitudes are reported in
    /// units of `α` by construction.
    pub hp: AdamHyperparams,
    /// Quantile levels reported per iteration, strictly ascending in (0, 1).
    pub quantiles: Vec<f64>,
    /// RNG seed; parameter `i` draws from substream `i`.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_params: 25_000,
            n_iters: 1_000,
            grad_variance: 1e-9,
            hp: AdamHyperparams {
                alpha: 1.0,
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 0.0,
                weight_decay: 0.0,
            },
            quantiles: vec![0.025, 0.25, 0.5, 0.75, 0.975],
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_params == 0 {
            return Err(Error::invalid("n_params must be at least 1"));
        }
        if self.n_iters == 0 {
            return Err(Error::invalid("n_iters must be at least 1"));
        }
        if !(self.grad_variance > 0.0) || !self.grad_variance.is_finite() {
            return Err(Error::invalid(format!(
                "grad_variance must be positive, got {}",
                self.grad_variance
            )));
        }
        self.hp.validate()?;
        stats::check_quantile_levels(&self.quantiles)
    }
}

/// One row of the simulated trajectory: quantiles of `|update|/α` at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub t: u64,
    pub quantile_values: Vec<f64>,
}

/// Per-iteration quantiles of the update magnitude distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrajectory {
    /// The quantile levels each row reports, as configured.
    pub quantile_levels: Vec<f64>,
    /// One row per iteration, `t` running from 1 to `n_iters`.
    pub rows: Vec<SimRow>,
}

impl SimTrajectory {
    /// The value of quantile `q` at iteration `t`, if both were recorded.
    pub fn value_at(&self, t: u64, q: f64) -> Option<f64> {
        let qi = self.quantile_levels.iter().position(|&l| l == q)?;
        let row = self.rows.iter().find(|r| r.t == t)?;
        row.quantile_values.get(qi).copied()
    }
}

/// Runs the local-minimum simulation and returns the quantile trajectory.
pub fn run_local_minimum_sim(config: &SimConfig) -> Result<SimTrajectory> {
    config.validate()?;
    let n = config.n_params;
    let sigma = config.grad_variance.sqrt();
    let hp = &config.hp;

    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            rng
        })
        .collect();

    let mut m = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut magnitudes = vec![0.0f64; n];
    let mut rows = Vec::with_capacity(config.n_iters);

    for t in 1..=config.n_iters as u64 {
        let bc = BiasCorrection::at(t, hp.beta1, hp.beta2);
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rngs[i]);
            let g = sigma * z;
            let (m_hat, v_hat) = bc.corrected_moments(m[i], v[i], g);
            m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
            v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * (g * g);
            let den = v_hat.sqrt() + hp.epsilon;
            magnitudes[i] = if den == 0.0 { 0.0 } else { (m_hat / den).abs() };
        }
        magnitudes.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite magnitudes"));
        let quantile_values = config
            .quantiles
            .iter()
            .map(|&q| stats::quantile_of_sorted(&magnitudes, q))
            .collect();
        rows.push(SimRow { t, quantile_values });
    }

    Ok(SimTrajectory {
        quantile_levels: config.quantiles.clone(),
        rows,
    })
}

/// The cross-parameter median `|update|/α` at the final iteration.
///
/// Run with `n_iters` of at least a few thousand for the long-run value; the
/// distribution has mostly settled after a few dozen iterations.
pub fn stationary_median(config: &SimConfig) -> Result<f64> {
    let mut cfg = config.clone();
    if !cfg.quantiles.contains(&0.5) {
        cfg.quantiles.push(0.5);
        cfg.quantiles.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    }
    let traj = run_local_minimum_sim(&cfg)?;
    let last = traj.rows.last().expect("n_iters >= 1 validated");
    Ok(traj
        .value_at(last.t, 0.5)
        .expect("median level inserted above"))
}

/// Formats a quantile level as a percentage column label: 0.025 → "2.5".
fn quantile_label(q: f64) -> String {
    format!("{}", q * 100.0)
}

/// Writes the trajectory as CSV: header `t,q2.5,q25,...`, one row per
/// iteration, values with 9 significant digits.
pub fn write_trajectory_csv<W: Write>(traj: &SimTrajectory, out: &mut W) -> std::io::Result<()> {
    write!(out, "t")?;
    for &q in &traj.quantile_levels {
        write!(out, ",q{}", quantile_label(q))?;
    }
    writeln!(out)?;
    for row in &traj.rows {
        write!(out, "{}", row.t)?;
        for &val in &row.quantile_values {
            write!(out, ",{val:.8e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

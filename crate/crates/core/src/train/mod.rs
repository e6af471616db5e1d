//! Desk-scale training stack: IDX data, a small MLP classifier, seeded
//! minibatch sampling, the training loop, and the gradient-statistics probe.
//!
//! Determinism contract: model initialization and the minibatch drawn for
//! ordinary step `t` depend only on the seed (each consumes its own RNG
//! substream), so two runs that share a seed see identical data order no
//! matter which optimizer, warmup schedule, or probe settings they use. The
//! probe's extra backward passes draw from disjoint substreams and never
//! touch the parameters.

pub mod idx;
pub mod mlp;
pub mod synth;

use std::io::Write;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::{
    AdamHyperparams, BiasCorrection, Checkpoint, Optimizer, OptimizerKind, StepResult,
};
use crate::schedules::{radam_warmup_factor, RadamPhase, WarmupSchedule};
use crate::stats;

pub use idx::{encode_idx_images, encode_idx_labels, load_idx, IdxDataset};
pub use mlp::{load_model, save_model, MlpModel, ModelCheckpoint};
pub use synth::synthetic_digits;

const STREAM_INIT: u64 = 0;
const STREAM_PROBE_POSITIONS: u64 = 1;

fn batch_stream(t: u64) -> u64 {
    2 * t
}

fn probe_stream(t: u64, pass: u64) -> u64 {
    2 * (t * (1 << 20) + pass) + 1
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gradient-probe settings.
///
/// Defaults are desk-scale (probe every 10 iterations with 64 gradient
/// samples); [`ProbeConfig::full_fidelity`] restores the full protocol of
/// 256 samples at every iteration.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ProbeConfig {
    /// Probe at iterations `t = 1, 1+every, 1+2·every, …`.
    pub every: usize,
    /// Independent backward passes per probed iteration.
    pub grad_samples: usize,
    /// Parameters sampled uniformly without replacement from each weight
    /// matrix (biases excluded), fixed once at the start of training.
    pub params_per_matrix: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            every: 10,
            grad_samples: 64,
            params_per_matrix: 500,
        }
    }
}

impl ProbeConfig {
    /// The full probe protocol: 256 gradient samples at every iteration.
    pub fn full_fidelity() -> Self {
        ProbeConfig {
            every: 1,
            grad_samples: 256,
            params_per_matrix: 500,
        }
    }
}

/// Training-run configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub hp: AdamHyperparams,
    pub optimizer: OptimizerKind,
    pub warmup: WarmupSchedule,
    pub batch_size: usize,
    pub n_iters: usize,
    /// `None` disables probing.
    pub probe: Option<ProbeConfig>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hp: AdamHyperparams {
                weight_decay: 1e-4,
                ..AdamHyperparams::default()
            },
            optimizer: OptimizerKind::Adam,
            warmup: WarmupSchedule::ConstantOne,
            batch_size: 256,
            n_iters: 2000,
            probe: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, dataset: &IdxDataset) -> Result<()> {
        self.hp.validate()?;
        if self.n_iters == 0 {
            return Err(Error::invalid("n_iters must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.batch_size > dataset.n_images {
            return Err(Error::invalid(format!(
                "batch_size {} exceeds dataset size {}",
                self.batch_size, dataset.n_images
            )));
        }
        if dataset.n_classes < 2 {
            return Err(Error::invalid("dataset must contain at least 2 classes"));
        }
        if let Some(p) = &self.probe {
            if p.every == 0 || p.grad_samples < 2 || p.params_per_matrix == 0 {
                return Err(Error::invalid(
                    "probe settings must be positive (and grad_samples at least 2)",
                ));
            }
            if self.optimizer == OptimizerKind::Sgd {
                return Err(Error::InvalidConfiguration(
                    "the gradient probe reports Adam moment statistics; use the adam or \
                     radam optimizer"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-probed-iteration statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub t: u64,
    /// Median coefficient of variation of the per-parameter gradient samples.
    pub median_cv: f64,
    /// Pearson correlation between the bias-corrected `|m_t|` and `√v_t`
    /// over the sampled parameters.
    pub moment_correlation: f64,
    /// Median update magnitude in units of `α`, with `ε` treated as zero.
    pub median_update_magnitude: f64,
    /// Sampled parameters skipped by the CV panel because their gradient
    /// sample mean was exactly zero.
    pub cv_skipped: usize,
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// The trained model.
    pub model: MlpModel,
    /// Minibatch loss at each iteration, in step order.
    pub loss_curve: Vec<f64>,
    /// Probe records, if probing was enabled.
    pub probes: Vec<ProbeRecord>,
    /// Mean cross-entropy over the whole dataset before training.
    pub initial_loss: f64,
    /// Mean cross-entropy over the whole dataset after training.
    pub final_loss: f64,
    /// Final optimizer state, restorable via [`Optimizer::from_checkpoint`].
    pub optimizer_checkpoint: Checkpoint,
}

/// Builds the `batch × input_dim` matrix (pixels scaled to [0, 1]) and label
/// vector for the given example indices.
pub fn batch_matrix(dataset: &IdxDataset, indices: &[usize]) -> (Array2<f64>, Vec<u8>) {
    let dim = dataset.input_dim();
    let mut data = Vec::with_capacity(indices.len() * dim);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        data.extend(dataset.image(i).iter().map(|&p| p as f64 / 255.0));
        labels.push(dataset.labels[i]);
    }
    let x = Array2::from_shape_vec((indices.len(), dim), data).expect("shape matches");
    (x, labels)
}

fn sample_batch(
    dataset: &IdxDataset,
    batch_size: usize,
    seed: u64,
    stream: u64,
) -> (Array2<f64>, Vec<u8>) {
    let mut rng = rng_for(seed, stream);
    let indices = rand::seq::index::sample(&mut rng, dataset.n_images, batch_size).into_vec();
    batch_matrix(dataset, &indices)
}

/// Mean cross-entropy over the full dataset, evaluated in chunks.
pub fn dataset_loss(model: &MlpModel, dataset: &IdxDataset) -> Result<f64> {
    let chunk = 1024;
    let mut total = 0.0;
    let mut start = 0;
    while start < dataset.n_images {
        let end = (start + chunk).min(dataset.n_images);
        let indices: Vec<usize> = (start..end).collect();
        let (x, y) = batch_matrix(dataset, &indices);
        total += model.loss(&x, &y)? * (end - start) as f64;
        start = end;
    }
    Ok(total / dataset.n_images as f64)
}

/// Chooses the probed flat parameter positions: uniform without replacement
/// from each weight matrix, biases excluded.
fn sample_probe_positions(model: &MlpModel, per_matrix: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_for(seed, STREAM_PROBE_POSITIONS);
    let mut positions = Vec::new();
    for l in 0..model.n_layers() {
        let range = model.weight_range(l);
        let k = per_matrix.min(range.len());
        let mut picks = rand::seq::index::sample(&mut rng, range.len(), k).into_vec();
        picks.sort_unstable();
        positions.extend(picks.into_iter().map(|p| p + range.start));
    }
    positions
}

struct ProbePanelInput<'a> {
    t: u64,
    hp: &'a AdamHyperparams,
    optimizer: OptimizerKind,
    positions: &'a [usize],
    /// `grad_samples` gradient draws per position.
    samples: &'a [Vec<f64>],
    /// `(m, v)` at the sampled positions *before* the ordinary step.
    moments_before: &'a [(f64, f64)],
    /// Gradient of the ordinary step at the sampled positions.
    step_grad: &'a [f64],
    step: &'a StepResult,
}

fn assemble_probe_record(input: ProbePanelInput<'_>) -> Result<ProbeRecord> {
    // Panel 1: coefficient of variation of the gradient samples.
    let mut cvs = Vec::with_capacity(input.positions.len());
    let mut skipped = 0usize;
    for sample in input.samples {
        match stats::coefficient_of_variation(sample) {
            Ok(cv) => cvs.push(cv),
            Err(Error::UndefinedCv) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if cvs.is_empty() {
        return Err(Error::NumericFailure(format!(
            "all {} probed parameters had zero-mean gradient samples at t = {}",
            input.positions.len(),
            input.t
        )));
    }
    let median_cv = stats::median(&cvs)?;

    // Panels 2 and 3 read the optimizer's own moments, bias-corrected with
    // the same kernel the update rule uses. Correlation is invariant to the
    // (positive) correction factors, and at t = 1 the corrected pair is
    // exactly (|g|, |g|).
    let bc = BiasCorrection::at(input.t, input.hp.beta1, input.hp.beta2);
    let momentum_phase = input.optimizer == OptimizerKind::Radam
        && matches!(
            radam_warmup_factor(input.t, input.hp.beta2)?,
            RadamPhase::Momentum
        );
    let omega = input.step.warmup_factor_applied;
    let mut abs_m = Vec::with_capacity(input.positions.len());
    let mut sqrt_v = Vec::with_capacity(input.positions.len());
    let mut magnitudes = Vec::with_capacity(input.positions.len());
    for (&(m_prev, v_prev), &g) in input.moments_before.iter().zip(input.step_grad) {
        let (m_hat, v_hat) = bc.corrected_moments(m_prev, v_prev, g);
        abs_m.push(m_hat.abs());
        sqrt_v.push(v_hat.sqrt());
        let mag = if momentum_phase {
            m_hat.abs()
        } else {
            let den = v_hat.sqrt();
            if den == 0.0 {
                0.0
            } else {
                omega * (m_hat / den).abs()
            }
        };
        magnitudes.push(mag);
    }
    let moment_correlation = stats::pearson_correlation(&abs_m, &sqrt_v)?;
    let median_update_magnitude = stats::median(&magnitudes)?;

    Ok(ProbeRecord {
        t: input.t,
        median_cv,
        moment_correlation,
        median_update_magnitude,
        cv_skipped: skipped,
    })
}

/// Trains a classifier on `dataset` per `config`.
///
/// At a probed iteration the probe first runs `grad_samples` backward passes
/// on independently sampled batches without touching the parameters, then
/// the ordinary optimization step runs and the probe panels are computed
/// from the optimizer's own state at the new `t`.
pub fn train(config: &TrainConfig, dataset: &IdxDataset) -> Result<TrainOutcome> {
    config.validate(dataset)?;
    let mut init_rng = rng_for(config.seed, STREAM_INIT);
    let mut model = MlpModel::init_classifier(dataset.input_dim(), dataset.n_classes, &mut init_rng)?;
    let mut opt = Optimizer::new(config.optimizer, config.hp, config.warmup, model.n_params())?;

    let probe_positions = config
        .probe
        .as_ref()
        .map(|p| sample_probe_positions(&model, p.params_per_matrix, config.seed));

    let initial_loss = dataset_loss(&model, dataset)?;
    let mut loss_curve = Vec::with_capacity(config.n_iters);
    let mut probes = Vec::new();

    for t in 1..=config.n_iters as u64 {
        let probing = config
            .probe
            .as_ref()
            .filter(|p| (t - 1) % p.every as u64 == 0);

        let mut grad_sample_buf: Option<Vec<Vec<f64>>> = None;
        if let (Some(pcfg), Some(positions)) = (probing, probe_positions.as_deref()) {
            let mut samples = vec![Vec::with_capacity(pcfg.grad_samples); positions.len()];
            for pass in 1..=pcfg.grad_samples as u64 {
                let (x, y) = sample_batch(dataset, config.batch_size, config.seed, probe_stream(t, pass));
                let (_, g) = model.forward_backward(&x, &y)?;
                for (slot, &pos) in samples.iter_mut().zip(positions) {
                    slot.push(g[pos]);
                }
            }
            grad_sample_buf = Some(samples);
        }

        let (x, y) = sample_batch(dataset, config.batch_size, config.seed, batch_stream(t));
        let (loss, grad) = model.forward_backward(&x, &y)?;
        loss_curve.push(loss);

        let moments_before: Option<Vec<(f64, f64)>> = match (probing, probe_positions.as_deref()) {
            (Some(_), Some(positions)) => Some(
                positions
                    .iter()
                    .map(|&p| (opt.state().m[p], opt.state().v[p]))
                    .collect(),
            ),
            _ => None,
        };

        let step = opt.step(model.params(), &grad)?;
        model.set_params(&step.new_params)?;

        if let (Some(_), Some(positions), Some(samples), Some(before)) = (
            probing,
            probe_positions.as_deref(),
            grad_sample_buf,
            moments_before,
        ) {
            let step_grad: Vec<f64> = positions.iter().map(|&p| grad[p]).collect();
            probes.push(assemble_probe_record(ProbePanelInput {
                t,
                hp: &config.hp,
                optimizer: config.optimizer,
                positions,
                samples: &samples,
                moments_before: &before,
                step_grad: &step_grad,
                step: &step,
            })?);
        }
    }

    let final_loss = dataset_loss(&model, dataset)?;
    Ok(TrainOutcome {
        model,
        loss_curve,
        probes,
        initial_loss,
        final_loss,
        optimizer_checkpoint: opt.checkpoint(),
    })
}

/// One warmup method in a comparison run.
#[derive(Debug, Clone)]
pub struct WarmupMethod {
    pub name: &'static str,
    pub optimizer: OptimizerKind,
    pub schedule: WarmupSchedule,
}

/// The three methods under comparison: the two untuned rules of thumb and
/// RAdam's built-in rectifier.
pub fn standard_warmup_methods(beta2: f64) -> Result<Vec<WarmupMethod>> {
    Ok(vec![
        WarmupMethod {
            name: "expo-untuned",
            optimizer: OptimizerKind::Adam,
            schedule: WarmupSchedule::exponential_untuned(beta2)?,
        },
        WarmupMethod {
            name: "linear-untuned",
            optimizer: OptimizerKind::Adam,
            schedule: WarmupSchedule::linear_untuned(beta2)?,
        },
        WarmupMethod {
            name: "radam",
            optimizer: OptimizerKind::Radam,
            schedule: WarmupSchedule::ConstantOne,
        },
    ])
}

/// One (method, seed) cell of a comparison run.
#[derive(Debug, Clone)]
pub struct CompareCell {
    pub method: &'static str,
    pub seed: u64,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// Outcome of a warmup-method comparison.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub cells: Vec<CompareCell>,
    pub method_names: Vec<&'static str>,
    /// Mean final loss per method, across seeds.
    pub mean_final: Vec<f64>,
    /// Sample standard deviation (n−1) of final loss per method.
    pub std_final: Vec<f64>,
    /// Largest pairwise difference between method means.
    pub cross_method_spread: f64,
    /// Largest per-method cross-seed standard deviation.
    pub max_seed_std: f64,
}

impl CompareReport {
    /// Did every run at least halve its initial full-dataset loss?
    pub fn all_runs_halved_loss(&self) -> bool {
        self.cells.iter().all(|c| c.final_loss < 0.5 * c.initial_loss)
    }
}

/// Trains every standard warmup method on every seed with shared data order
/// (seed-matched initialization and batch sequence) and summarizes final
/// full-dataset losses.
pub fn compare_warmups(
    dataset: &IdxDataset,
    base: &TrainConfig,
    seeds: &[u64],
) -> Result<CompareReport> {
    if seeds.is_empty() {
        return Err(Error::invalid("comparison needs at least one seed"));
    }
    if seeds.len() < 2 {
        // std over one seed is undefined; allowed for smoke runs, reported as 0
    }
    let methods = standard_warmup_methods(base.hp.beta2)?;
    let mut cells = Vec::new();
    for method in &methods {
        for &seed in seeds {
            let config = TrainConfig {
                optimizer: method.optimizer,
                warmup: method.schedule,
                seed,
                probe: None,
                ..base.clone()
            };
            let outcome = train(&config, dataset)?;
            cells.push(CompareCell {
                method: method.name,
                seed,
                initial_loss: outcome.initial_loss,
                final_loss: outcome.final_loss,
            });
        }
    }

    let method_names: Vec<&'static str> = methods.iter().map(|m| m.name).collect();
    let mut mean_final = Vec::new();
    let mut std_final = Vec::new();
    for name in &method_names {
        let finals: Vec<f64> = cells
            .iter()
            .filter(|c| c.method == *name)
            .map(|c| c.final_loss)
            .collect();
        let n = finals.len() as f64;
        let mean = finals.iter().sum::<f64>() / n;
        let std = if finals.len() > 1 {
            (finals.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        mean_final.push(mean);
        std_final.push(std);
    }
    let mut cross_method_spread = 0.0f64;
    for i in 0..mean_final.len() {
        for j in i + 1..mean_final.len() {
            cross_method_spread = cross_method_spread.max((mean_final[i] - mean_final[j]).abs());
        }
    }
    let max_seed_std = std_final.iter().cloned().fold(0.0f64, f64::max);
    Ok(CompareReport {
        cells,
        method_names,
        mean_final,
        std_final,
        cross_method_spread,
        max_seed_std,
    })
}

/// Writes the loss curve as CSV: `t,loss`.
pub fn write_loss_csv<W: Write>(losses: &[f64], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,loss")?;
    for (i, loss) in losses.iter().enumerate() {
        writeln!(out, "{},{loss:.8e}", i + 1)?;
    }
    Ok(())
}

/// Writes probe records as CSV: `t,median_cv,moment_corr,median_update_mag`.
pub fn write_probe_csv<W: Write>(probes: &[ProbeRecord], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,median_cv,moment_corr,median_update_mag")?;
    for p in probes {
        writeln!(
            out,
            "{},{:.8e},{:.8e},{:.8e}",
            p.t, p.median_cv, p.moment_correlation, p.median_update_magnitude
        )?;
    }
    Ok(())
}

/// Writes a comparison table as CSV: `method,seed,initial_loss,final_loss`.
pub fn write_compare_csv<W: Write>(report: &CompareReport, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "method,seed,initial_loss,final_loss")?;
    for c in &report.cells {
        writeln!(
            out,
            "{},{},{:.8e},{:.8e}",
            c.method, c.seed, c.initial_loss, c.final_loss
        )?;
    }
    Ok(())
}

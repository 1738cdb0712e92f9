//! The 10-3-1 back-propagation network that scores candidate bands.
//!
//! Logistic units on both layers, squared-error loss, plain per-example
//! SGD. Inputs are z-scored with statistics stored alongside the weights.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INPUT_DIM: usize = 10;
pub const HIDDEN_DIM: usize = 3;
pub const MODEL_VERSION: u32 = 1;
/// Number of trainable parameters: `w1`, `b1`, `w2`, `b2`.
pub const PARAM_COUNT: usize = INPUT_DIM * HIDDEN_DIM + HIDDEN_DIM + HIDDEN_DIM + 1;

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardization {
    pub mean: [f64; INPUT_DIM],
    pub std: [f64; INPUT_DIM],
}

impl Standardization {
    pub fn identity() -> Self {
        Standardization {
            mean: [0.0; INPUT_DIM],
            std: [1.0; INPUT_DIM],
        }
    }

    /// Population mean and standard deviation per feature; a constant
    /// feature gets std 1 so it maps to zero.
    pub fn fit(rows: &[[f64; INPUT_DIM]]) -> Self {
        let n = rows.len() as f64;
        let mut mean = [0.0; INPUT_DIM];
        let mut std = [0.0; INPUT_DIM];
        for r in rows {
            for i in 0..INPUT_DIM {
                mean[i] += r[i] / n;
            }
        }
        for r in rows {
            for i in 0..INPUT_DIM {
                std[i] += (r[i] - mean[i]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Standardization { mean, std }
    }

    pub fn apply(&self, x: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        std::array::from_fn(|i| (x[i] - self.mean[i]) / self.std[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpModel {
    pub version: u32,
    pub standardization: Standardization,
    /// `w1[i][j]` connects input `i` to hidden unit `j`.
    pub w1: [[f64; HIDDEN_DIM]; INPUT_DIM],
    pub b1: [f64; HIDDEN_DIM],
    pub w2: [f64; HIDDEN_DIM],
    pub b2: f64,
}

/// Activations of one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct Activations {
    pub hidden: [f64; HIDDEN_DIM],
    pub output: f64,
}

impl MlpModel {
    pub fn zeros() -> Self {
        MlpModel {
            version: MODEL_VERSION,
            standardization: Standardization::identity(),
            w1: [[0.0; HIDDEN_DIM]; INPUT_DIM],
            b1: [0.0; HIDDEN_DIM],
            w2: [0.0; HIDDEN_DIM],
            b2: 0.0,
        }
    }

    /// Weights drawn uniformly from `[-0.5, 0.5]`.
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut model = MlpModel::zeros();
        let params: Vec<f64> = (0..PARAM_COUNT).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        model.set_params(&params);
        model
    }

    /// Flattened parameters in the order `w1` (row-major), `b1`, `w2`, `b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(PARAM_COUNT);
        self.w1.iter().for_each(|row| p.extend_from_slice(row));
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), PARAM_COUNT);
        let mut it = p.iter().copied();
        for row in &mut self.w1 {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in &mut self.b1 {
            *b = it.next().unwrap();
        }
        for w in &mut self.w2 {
            *w = it.next().unwrap();
        }
        self.b2 = it.next().unwrap();
    }

    /// Forward pass on an input that is already standardized.
    pub fn activations(&self, x: &[f64; INPUT_DIM]) -> Activations {
        let hidden: [f64; HIDDEN_DIM] = std::array::from_fn(|j| {
            let z = self.b1[j] + (0..INPUT_DIM).map(|i| self.w1[i][j] * x[i]).sum::<f64>();
            sigmoid(z)
        });
        let z = self.b2 + (0..HIDDEN_DIM).map(|j| self.w2[j] * hidden[j]).sum::<f64>();
        Activations {
            hidden,
            output: sigmoid(z),
        }
    }

    /// `0.5 * (output - target)^2` on a standardized input.
    pub fn loss(&self, x: &[f64; INPUT_DIM], target: f64) -> f64 {
        let o = self.activations(x).output;
        0.5 * (o - target).powi(2)
    }

    /// Back-propagated gradient of [`MlpModel::loss`], in [`MlpModel::params`] order.
    pub fn loss_gradient(&self, x: &[f64; INPUT_DIM], target: f64) -> Vec<f64> {
        let a = self.activations(x);
        let delta_out = (a.output - target) * a.output * (1.0 - a.output);
        let delta_hidden: [f64; HIDDEN_DIM] =
            std::array::from_fn(|j| delta_out * self.w2[j] * a.hidden[j] * (1.0 - a.hidden[j]));
        let mut g = Vec::with_capacity(PARAM_COUNT);
        for &xi in x.iter() {
            g.extend(delta_hidden.iter().map(|d| d * xi));
        }
        g.extend_from_slice(&delta_hidden);
        g.extend(a.hidden.iter().map(|h| delta_out * h));
        g.push(delta_out);
        g
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: MlpModel = serde_json::from_str(text)?;
        if model.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "localizer model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        let all = model.params().into_iter().chain(model.standardization.mean).chain(model.standardization.std);
        if all.into_iter().any(|v| !v.is_finite()) || model.standardization.std.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config("localizer model has non-finite weights or non-positive std".into()));
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MlpModel::from_json(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Text score of a raw 10-feature vector.
pub fn mlp_forward(model: &MlpModel, features: &[f64; INPUT_DIM]) -> Result<f64> {
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("non-finite band feature"));
    }
    Ok(model.activations(&model.standardization.apply(features)).output)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            epochs: 500,
            learning_rate: 0.1,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Mean training loss measured after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Fraction of training rows classified correctly at threshold 0.5.
    pub accuracy: f64,
}

pub fn mlp_train(dataset: &[([f64; INPUT_DIM], bool)], params: &TrainParams) -> Result<MlpModel> {
    mlp_train_with_report(dataset, params).map(|(m, _)| m)
}

pub fn mlp_train_with_report(
    dataset: &[([f64; INPUT_DIM], bool)],
    params: &TrainParams,
) -> Result<(MlpModel, TrainReport)> {
    if dataset.is_empty() {
        return Err(Error::argument("empty training set"));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::argument("learning rate must be positive"));
    }
    if dataset.iter().any(|(x, _)| x.iter().any(|v| !v.is_finite())) {
        return Err(Error::argument("non-finite training feature"));
    }
    let raw: Vec<[f64; INPUT_DIM]> = dataset.iter().map(|(x, _)| *x).collect();
    let standardization = Standardization::fit(&raw);
    let inputs: Vec<([f64; INPUT_DIM], f64)> = dataset
        .iter()
        .map(|(x, label)| (standardization.apply(x), if *label { 1.0 } else { 0.0 }))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut model = MlpModel::random(&mut rng);
    model.standardization = standardization;

    let mean_loss = |m: &MlpModel| inputs.iter().map(|(x, t)| m.loss(x, *t)).sum::<f64>() / inputs.len() as f64;
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(params.epochs);
    let mut p = model.params();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, t) = &inputs[i];
            let g = model.loss_gradient(x, *t);
            for (w, gw) in p.iter_mut().zip(&g) {
                *w -= params.learning_rate * gw;
            }
            model.set_params(&p);
        }
        epoch_losses.push(mean_loss(&model));
    }

    let correct = inputs
        .iter()
        .filter(|(x, t)| (model.activations(x).output >= 0.5) == (*t == 1.0))
        .count();
    let report = TrainReport {
        epoch_losses,
        accuracy: correct as f64 / inputs.len() as f64,
    };
    Ok((model, report))
}

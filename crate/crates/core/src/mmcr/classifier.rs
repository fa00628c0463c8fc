use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::fusion::Dataset;
use super::metrics::{evaluate, Metrics};
use crate::autograd::{Adam, AdamConfig};
use crate::rng::SeededRng;
use crate::{math, Error, Result};

pub const THRESHOLD: f64 = 0.5;

/// Logistic regression over fused rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl FusionClassifier {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, row: &[f32]) -> f64 {
        let mut z = self.bias;
        for (w, &x) in self.weights.iter().zip(row) {
            z += w * f64::from(x);
        }
        z
    }

    pub fn probability(&self, row: &[f32]) -> f64 {
        math::sigmoid(self.logit(row))
    }

    pub fn probabilities(&self, data: &Dataset) -> Vec<f64> {
        (0..data.len()).map(|i| self.probability(data.row(i))).collect()
    }

    /// Mean cross-entropy over `idx` (all rows when `None`) and its gradient
    /// as `(weights, bias)`.
    pub fn loss_and_gradient(&self, data: &Dataset, idx: Option<&[usize]>) -> (f64, Vec<f64>, f64) {
        let all: Vec<usize>;
        let idx = match idx {
            Some(i) => i,
            None => {
                all = (0..data.len()).collect();
                &all
            }
        };
        let mut gw = vec![0.0; self.dim()];
        let (mut gb, mut loss) = (0.0, 0.0);
        let n = idx.len().max(1) as f64;
        for &i in idx {
            let row = data.row(i);
            let z = self.logit(row);
            let y = if data.labels()[i] { 1.0 } else { 0.0 };
            loss += math::softplus(z) - y * z;
            let r = (math::sigmoid(z) - y) / n;
            gb += r;
            for (g, &x) in gw.iter_mut().zip(row) {
                *g += r * f64::from(x);
            }
        }
        (loss / n, gw, gb)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rates: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_size: usize,
    pub seed: u64,
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rates: vec![2e-4, 4e-4, 6e-4, 8e-4],
            epochs: vec![3, 4, 5, 6],
            batch_size: 128,
            seed: 0,
            standardize: true,
        }
    }
}

impl TrainConfig {
    /// Single grid point.
    pub fn fixed(lr: f64, epochs: usize, seed: u64) -> Self {
        Self {
            learning_rates: vec![lr],
            epochs: vec![epochs],
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty() || self.epochs.is_empty() {
            return Err(Error::Config("learning-rate and epoch grids must be nonempty".into()));
        }
        if self.learning_rates.iter().any(|&lr| !(lr > 0.0)) || self.epochs.contains(&0) || self.batch_size == 0 {
            return Err(Error::Config("grid values and batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Minibatch Adam from zero weights; rows are visited in a fresh seeded
/// order each epoch. Returns the model and mean loss per epoch.
pub fn train_run(data: &Dataset, lr: f64, epochs: usize, batch: usize, seed: u64) -> (FusionClassifier, Vec<f64>) {
    let mut model = FusionClassifier::zeros(data.dim());
    let mut opt = Adam::new(AdamConfig::with_lr(lr), &[data.dim(), 1]);
    let mut rng = SeededRng::derive(seed, 0x10c);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for chunk in order.chunks(batch) {
            let (loss, gw, gb) = model.loss_and_gradient(data, Some(chunk));
            total += loss * chunk.len() as f64;
            opt.begin_step();
            opt.update(0, &mut model.weights, &gw);
            let mut b = [model.bias];
            opt.update(1, &mut b, &[gb]);
            model.bias = b[0];
        }
        losses.push(total / data.len().max(1) as f64);
    }
    (model, losses)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub validation: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub model: FusionClassifier,
    pub lr: f64,
    pub epochs: usize,
    pub runs: Vec<GridRun>,
    /// Set when a split lacks one of the classes.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

pub fn hard_labels(probs: &[f64]) -> Vec<bool> {
    probs.iter().map(|&p| p >= THRESHOLD).collect()
}

/// Trains every `(lr, epochs)` pair with seed `seed + index` and keeps the
/// best validation F1; ties prefer the lower rate, then fewer epochs.
pub fn grid_search(train: &Dataset, validation: &Dataset, cfg: &TrainConfig) -> Result<GridResult> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Insufficient("train and validation splits must be nonempty".into()));
    }
    if train.dim() != validation.dim() {
        return Err(Error::LengthMismatch {
            left: train.dim(),
            right: validation.dim(),
        });
    }
    let mut warnings = Vec::new();
    for (name, d) in [("train", train), ("validation", validation)] {
        if !d.has_both_classes() {
            warnings.push(format!("{name} split has a single class; metrics are degenerate"));
        }
    }
    let mut points: Vec<(f64, usize)> = Vec::new();
    for &lr in &cfg.learning_rates {
        for &e in &cfg.epochs {
            points.push((lr, e));
        }
    }
    let mut best: Option<(usize, FusionClassifier)> = None;
    let mut runs: Vec<GridRun> = Vec::with_capacity(points.len());
    for (i, &(lr, epochs)) in points.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let (model, _) = train_run(train, lr, epochs, cfg.batch_size, seed);
        let m = evaluate(&hard_labels(&model.probabilities(validation)), validation.labels())?;
        let better = match &best {
            None => true,
            Some((b, _)) => {
                let (bl, be) = points[*b];
                let bf = runs[*b].validation.f1;
                m.f1 > bf || (m.f1 == bf && (lr < bl || (lr == bl && epochs < be)))
            }
        };
        runs.push(GridRun {
            lr,
            epochs,
            seed,
            validation: m,
        });
        if better {
            best = Some((i, model));
        }
    }
    let (bi, model) = best.expect("grid is nonempty");
    Ok(GridResult {
        model,
        lr: points[bi].0,
        epochs: points[bi].1,
        runs,
        degenerate: !warnings.is_empty(),
        warnings,
    })
}

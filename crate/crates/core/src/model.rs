//! Feed-forward candidate scorer with a softmax over candidates, soft-target
//! cross-entropy, backpropagation and the ADAM and LAMB optimizers.
//!
//! Checkpoints are JSON objects:
//!
//! ```text
//! {"format": "kinmorph-mlp", "version": 1,
//!  "sizes": [64, 32, 8, 1],
//!  "tensors": [[w0...], [b0...], [w1...], [b1...], ...],
//!  "optimizer": null | {"kind": "adam"|"lamb", "lr": .., "t": .., "m": [...], "v": [...]}}
//! ```
//!
//! `w_l` is row-major with shape `sizes[l+1] x sizes[l]`. Hidden layers use
//! ReLU; the last layer is linear and emits one score per candidate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};

pub const CHECKPOINT_FORMAT: &str = "kinmorph-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Parameter or gradient tensors, in `[w0, b0, w1, b1, ...]` order.
pub type Tensors = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: vec![32, 16, 8],
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Parses `32,16,8` or `64-32-16-8` (a leading 64 is the input width).
    pub fn parse_hidden(text: &str) -> Result<Vec<usize>> {
        let mut sizes = text
            .split([',', '-'])
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::validation(format!("bad layer sizes {text:?}: {e}")))?;
        if text.contains('-') && sizes.first() == Some(&FEATURE_COUNT) {
            sizes.remove(0);
        }
        if sizes.contains(&0) {
            return Err(Error::validation("layer sizes must be positive"));
        }
        Ok(sizes)
    }
}

/// Candidate probabilities and their entropy in nats.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub probs: Vec<f64>,
    pub entropy: f64,
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|s| s - lse).collect()
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

/// Uniform target over the candidates whose stem is `gold`.
pub fn targets<S: AsRef<str>>(gold: &str, stems: &[S]) -> Result<Vec<f64>> {
    let n = stems.iter().filter(|s| s.as_ref() == gold).count();
    if n == 0 {
        return Err(Error::domain(format!("gold stem {gold:?} is not among the candidates")));
    }
    Ok(stems
        .iter()
        .map(|s| if s.as_ref() == gold { 1.0 / n as f64 } else { 0.0 })
        .collect())
}

/// `-sum p_j ln q_j` for target `p` and prediction `q`.
pub fn cross_entropy(pred: &[f64], target: &[f64]) -> f64 {
    -pred
        .iter()
        .zip(target)
        .filter(|(_, &p)| p > 0.0)
        .map(|(q, p)| p * q.ln())
        .sum::<f64>()
}

/// One training example: candidate vectors and target distribution.
#[derive(Clone, Copy, Debug)]
pub struct Example<'a> {
    pub candidates: &'a [FeatureVector],
    pub target: &'a [f64],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    tensors: Tensors,
}

impl Mlp {
    /// He-uniform weights drawn from a ChaCha stream seeded by `cfg.seed`;
    /// zero biases.
    pub fn new(cfg: &ModelConfig) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sizes = Self::layer_sizes(&cfg.hidden);
        let mut tensors = Vec::new();
        for w in sizes.windows(2) {
            let limit = (6.0 / w[0] as f64).sqrt();
            tensors.push((0..w[0] * w[1]).map(|_| rng.random_range(-limit..limit)).collect());
            tensors.push(vec![0.0; w[1]]);
        }
        Mlp { sizes, tensors }
    }

    pub fn zeros(hidden: &[usize]) -> Mlp {
        let sizes = Self::layer_sizes(hidden);
        let tensors = sizes
            .windows(2)
            .flat_map(|w| [vec![0.0; w[0] * w[1]], vec![0.0; w[1]]])
            .collect();
        Mlp { sizes, tensors }
    }

    fn layer_sizes(hidden: &[usize]) -> Vec<usize> {
        let mut sizes = vec![FEATURE_COUNT];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        sizes
    }

    /// `[64, hidden..., 1]`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn tensors(&self) -> &Tensors {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut Tensors {
        &mut self.tensors
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Vec::len).sum()
    }

    /// Activations of every layer; the last holds the score.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        for l in 0..layers {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = (&self.tensors[2 * l], &self.tensors[2 * l + 1]);
            let input = &acts[l];
            let out: Vec<f64> = (0..nout)
                .map(|o| {
                    let z = b[o] + w[o * nin..(o + 1) * nin].iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if l + 1 < layers { z.max(0.0) } else { z }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        self.forward(x.values()).last().map_or(0.0, |o| o[0])
    }

    pub fn predict(&self, candidates: &[FeatureVector]) -> Prediction {
        let scores: Vec<f64> = candidates.iter().map(|c| self.score(c)).collect();
        let probs = softmax(&scores);
        let entropy = entropy(&probs);
        Prediction { probs, entropy }
    }

    /// Loss of one example.
    pub fn loss(&self, ex: Example<'_>) -> f64 {
        let scores: Vec<f64> = ex.candidates.iter().map(|c| self.score(c)).collect();
        -log_softmax(&scores)
            .iter()
            .zip(ex.target)
            .map(|(lq, p)| p * lq)
            .sum::<f64>()
    }

    pub fn mean_loss(&self, batch: &[Example<'_>]) -> f64 {
        batch.iter().map(|e| self.loss(*e)).sum::<f64>() / batch.len() as f64
    }

    fn zero_tensors(&self) -> Tensors {
        self.tensors.iter().map(|t| vec![0.0; t.len()]).collect()
    }

    /// Loss and gradient of one example, accumulated into `grad`.
    fn example_grad(&self, ex: Example<'_>, grad: &mut Tensors) -> f64 {
        let acts: Vec<Vec<Vec<f64>>> = ex.candidates.iter().map(|c| self.forward(c.values())).collect();
        let scores: Vec<f64> = acts.iter().map(|a| a.last().map_or(0.0, |o| o[0])).collect();
        let lq = log_softmax(&scores);
        let loss = -lq.iter().zip(ex.target).map(|(l, p)| p * l).sum::<f64>();
        let layers = self.sizes.len() - 1;
        for (a, (l, p)) in acts.iter().zip(lq.iter().zip(ex.target)) {
            let mut delta = vec![l.exp() - p];
            for layer in (0..layers).rev() {
                let nin = self.sizes[layer];
                let input = &a[layer];
                let w = &self.tensors[2 * layer];
                for (o, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    let gw = &mut grad[2 * layer][o * nin..(o + 1) * nin];
                    for (g, x) in gw.iter_mut().zip(input) {
                        *g += d * x;
                    }
                    grad[2 * layer + 1][o] += d;
                }
                if layer == 0 {
                    break;
                }
                delta = (0..nin)
                    .map(|i| {
                        if input[i] <= 0.0 {
                            return 0.0;
                        }
                        delta.iter().enumerate().map(|(o, d)| w[o * nin + i] * d).sum()
                    })
                    .collect();
            }
        }
        loss
    }

    /// Mean loss and its gradient over a batch. Examples are processed in
    /// parallel and reduced in batch order, so the result does not depend
    /// on the thread count.
    pub fn loss_and_grad(&self, batch: &[Example<'_>]) -> (f64, Tensors) {
        const CHUNK: usize = 16;
        let partial: Vec<(f64, Tensors)> = batch
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut g = self.zero_tensors();
                let loss = chunk.iter().map(|e| self.example_grad(*e, &mut g)).sum::<f64>();
                (loss, g)
            })
            .collect();
        let mut grad = self.zero_tensors();
        let mut loss = 0.0;
        for (l, g) in partial {
            loss += l;
            for (t, s) in grad.iter_mut().zip(&g) {
                for (a, b) in t.iter_mut().zip(s) {
                    *a += b;
                }
            }
        }
        let n = batch.len().max(1) as f64;
        for t in &mut grad {
            for v in t.iter_mut() {
                *v /= n;
            }
        }
        (loss / n, grad)
    }

    /// Largest relative error between the analytic gradient and central
    /// differences with step `h`, measured per tensor as
    /// `||a - n|| / max(||a|| + ||n||, 1e-6)`. The floor covers the output
    /// bias, whose gradient is zero because softmax ignores a shared offset.
    pub fn gradient_check(&self, batch: &[Example<'_>], h: f64) -> f64 {
        let (_, analytic) = self.loss_and_grad(batch);
        let mut probe = self.clone();
        let mut worst: f64 = 0.0;
        for (ti, tensor) in analytic.iter().enumerate() {
            let mut diff = 0.0;
            let (mut na, mut nn) = (0.0, 0.0);
            for (i, a) in tensor.iter().enumerate() {
                let orig = probe.tensors[ti][i];
                probe.tensors[ti][i] = orig + h;
                let up = probe.mean_loss(batch);
                probe.tensors[ti][i] = orig - h;
                let down = probe.mean_loss(batch);
                probe.tensors[ti][i] = orig;
                let numeric = (up - down) / (2.0 * h);
                diff += (a - numeric).powi(2);
                na += a * a;
                nn += numeric * numeric;
            }
            let rel = diff.sqrt() / (na.sqrt() + nn.sqrt()).max(1e-6);
            worst = worst.max(rel);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Lamb,
}

/// First and second moment state shared by ADAM and LAMB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Tensors,
    v: Tensors,
}

pub const TRUST_MIN: f64 = 0.01;
pub const TRUST_MAX: f64 = 10.0;

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, shapes: &Tensors) -> Optimizer {
        let zeros: Tensors = shapes.iter().map(|t| vec![0.0; t.len()]).collect();
        Optimizer {
            kind,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn adam(lr: f64, shapes: &Tensors) -> Optimizer {
        Optimizer::new(OptimizerKind::Adam, lr, shapes)
    }

    pub fn lamb(lr: f64, shapes: &Tensors) -> Optimizer {
        Optimizer::new(OptimizerKind::Lamb, lr, shapes)
    }

    /// One update. LAMB rescales each tensor's ADAM direction by
    /// `||theta|| / ||update||`, clamped to [0.01, 10], or 1 when either norm
    /// is zero.
    pub fn step(&mut self, params: &mut Tensors, grads: &Tensors) {
        self.t += 1;
        let t = self.t as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for (k, (theta, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            let mut update = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                update.push((m[i] / c1) / ((v[i] / c2).sqrt() + self.eps));
            }
            let scale = match self.kind {
                OptimizerKind::Adam => 1.0,
                OptimizerKind::Lamb => {
                    let pn = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let un = update.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if pn == 0.0 || un == 0.0 {
                        1.0
                    } else {
                        (pn / un).clamp(TRUST_MIN, TRUST_MAX)
                    }
                }
            };
            for (x, u) in theta.iter_mut().zip(&update) {
                *x -= self.lr * scale * u;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub sizes: Vec<usize>,
    pub tensors: Tensors,
    pub optimizer: Option<Optimizer>,
}

impl Checkpoint {
    pub fn new(model: &Mlp, optimizer: Option<&Optimizer>) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            sizes: model.sizes.clone(),
            tensors: model.tensors.clone(),
            optimizer: optimizer.cloned(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Checkpoint> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(Error::validation(format!(
                "unsupported checkpoint {} v{}",
                c.format, c.version
            )));
        }
        c.model()?;
        Ok(c)
    }

    pub fn model(&self) -> Result<Mlp> {
        let s = &self.sizes;
        if s.len() < 2 || s[0] != FEATURE_COUNT || s[s.len() - 1] != 1 {
            return Err(Error::validation("checkpoint layer sizes must run from 64 to 1"));
        }
        let expected: Vec<usize> = s.windows(2).flat_map(|w| [w[0] * w[1], w[1]]).collect();
        let actual: Vec<usize> = self.tensors.iter().map(Vec::len).collect();
        if expected != actual {
            return Err(Error::validation("checkpoint tensor shapes do not match layer sizes"));
        }
        Ok(Mlp {
            sizes: s.clone(),
            tensors: self.tensors.clone(),
        })
    }
}

//! Variational graph autoencoder over the class graph.
//!
//! Encoder: a shared GCN layer `H = relu(Â X W0)` followed by two GCN heads
//! `μ = Â H Wμ` and `log σ² = Â H Wσ`. Decoder: `sigmoid(Z Zᵀ)`. Training is
//! full-batch Adam with hand-derived gradients; inference returns `μ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct VgaeConfig {
    pub hidden_dim: usize,
    pub latent_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Multiplier on the Xavier-uniform init range.
    pub weight_init_scale: f64,
}

impl Default for VgaeConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 32,
            latent_dim: 16,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
            weight_init_scale: 1.0,
        }
    }
}

impl VgaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim < 2 || self.hidden_dim < self.latent_dim {
            return Err(Error::Config(format!(
                "need hidden_dim >= latent_dim >= 2, got {} and {}",
                self.hidden_dim, self.latent_dim
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config(String::from("epochs must be >= 1")));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(String::from("learning_rate must be > 0")));
        }
        if !(self.weight_init_scale > 0.0) {
            return Err(Error::Config(String::from("weight_init_scale must be > 0")));
        }
        Ok(())
    }
}

/// Encoder weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    /// d × hidden, shared first layer.
    pub w0: Matrix,
    /// hidden × latent
    pub w_mu: Matrix,
    /// hidden × latent
    pub w_logvar: Matrix,
}

impl Weights {
    /// Xavier-uniform initialization.
    pub fn init(input_dim: usize, config: &VgaeConfig, rng: &mut impl Rng) -> Self {
        let mut xavier = |rows: usize, cols: usize| {
            let limit = config.weight_init_scale * math::sqrt(6.0 / (rows + cols) as f64);
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..=limit))
        };
        let w0 = xavier(input_dim, config.hidden_dim);
        let w_mu = xavier(config.hidden_dim, config.latent_dim);
        let w_logvar = xavier(config.hidden_dim, config.latent_dim);
        Self { w0, w_mu, w_logvar }
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w_mu.is_finite() && self.w_logvar.is_finite()
    }

    fn parts_mut(&mut self) -> [&mut Matrix; 3] {
        [&mut self.w0, &mut self.w_mu, &mut self.w_logvar]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub epoch: usize,
    pub loss: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VgaeModel {
    pub weights: Weights,
    pub training_trace: Vec<TraceEntry>,
    /// True when the graph had no edges (the loss falls back to unit
    /// positive weight).
    pub degenerate_graph: bool,
}

/// Posterior means, one row per method.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    pub z: Matrix,
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}`.
pub fn normalize_adjacency(adjacency: &Matrix) -> Matrix {
    let n = adjacency.rows();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| 1.0 / math::sqrt(1.0 + adjacency.row(i).iter().sum::<f64>()))
        .collect();
    Matrix::from_fn(n, n, |i, j| {
        let a = if i == j { 1.0 } else { adjacency[(i, j)] };
        a * inv_sqrt_deg[i] * inv_sqrt_deg[j]
    })
}

fn check_rows(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Returns `(μ, log σ²)`.
pub fn encode(a_hat: &Matrix, features: &Matrix, weights: &Weights) -> Result<(Matrix, Matrix)> {
    check_rows(a_hat.cols(), features.rows())?;
    check_rows(features.cols(), weights.w0.rows())?;
    check_rows(weights.w0.cols(), weights.w_mu.rows())?;
    check_rows(weights.w0.cols(), weights.w_logvar.rows())?;
    let fwd = Forward::run(a_hat, &a_hat.matmul(features), weights);
    Ok((fwd.mu, fwd.logvar))
}

pub fn standard_normal(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `μ + exp(½ log σ²) ⊙ ε`, ε drawn from `rng`.
pub fn reparameterize(mu: &Matrix, logvar: &Matrix, rng: &mut impl Rng) -> Matrix {
    let eps = standard_normal(mu.rows(), mu.cols(), rng);
    reparameterize_with(mu, logvar, &eps)
}

pub fn reparameterize_with(mu: &Matrix, logvar: &Matrix, eps: &Matrix) -> Matrix {
    Matrix::from_fn(mu.rows(), mu.cols(), |i, k| {
        mu[(i, k)] + math::exp(0.5 * logvar[(i, k)]) * eps[(i, k)]
    })
}

/// Inner-product decoder `sigmoid(Z Zᵀ)`.
pub fn decode(z: &Matrix) -> Matrix {
    z.matmul_t(z).map(math::sigmoid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    /// Weighted mean binary cross-entropy, already multiplied by `norm`.
    pub reconstruction: f64,
    /// `−½ Σ (1 + log σ² − μ² − σ²)`, before division by `n`.
    pub kl: f64,
    pub degenerate_graph: bool,
}

/// Positive-class weight and overall normalizer for the reconstruction term.
fn balance(adjacency: &Matrix) -> (f64, f64, bool) {
    let n2 = (adjacency.rows() * adjacency.cols()) as f64;
    let edges = adjacency.sum();
    if edges == 0.0 {
        return (1.0, 0.5, true);
    }
    ((n2 - edges) / edges, n2 / (2.0 * (n2 - edges)), false)
}

fn kl_divergence(mu: &Matrix, logvar: &Matrix) -> f64 {
    -0.5 * mu
        .as_slice()
        .iter()
        .zip(logvar.as_slice())
        .map(|(&m, &lv)| 1.0 + lv - m * m - math::exp(lv))
        .sum::<f64>()
}

/// `norm · BCE_w(A, R) + KL / n` evaluated on reconstruction probabilities.
///
/// The target diagonal is 0; self-loops only enter through `Â`.
pub fn loss(adjacency: &Matrix, reconstruction: &Matrix, mu: &Matrix, logvar: &Matrix) -> LossBreakdown {
    let n = adjacency.rows();
    let (pos_weight, norm, degenerate) = balance(adjacency);
    let mut bce = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = reconstruction[(i, j)];
            bce += if i != j && adjacency[(i, j)] != 0.0 {
                -pos_weight * math::ln(p)
            } else {
                -math::ln(1.0 - p)
            };
        }
    }
    let reconstruction_term = norm * bce / (n * n) as f64;
    let kl = kl_divergence(mu, logvar);
    LossBreakdown {
        total: reconstruction_term + kl / n as f64,
        reconstruction: reconstruction_term,
        kl,
        degenerate_graph: degenerate,
    }
}

struct Forward {
    pre_hidden: Matrix,
    a_hidden: Matrix,
    mu: Matrix,
    logvar: Matrix,
}

impl Forward {
    fn run(a_hat: &Matrix, a_x: &Matrix, w: &Weights) -> Self {
        let pre_hidden = a_x.matmul(&w.w0);
        let hidden = pre_hidden.map(|x| x.max(0.0));
        let a_hidden = a_hat.matmul(&hidden);
        let mu = a_hidden.matmul(&w.w_mu);
        let logvar = a_hidden.matmul(&w.w_logvar);
        Self {
            pre_hidden,
            a_hidden,
            mu,
            logvar,
        }
    }
}

/// Precomputed graph quantities for repeated loss/gradient evaluation.
#[derive(Debug, Clone)]
pub struct Problem {
    adjacency: Matrix,
    a_hat: Matrix,
    a_x: Matrix,
}

impl Problem {
    /// `features` are used as given; [`train`] L2-normalizes rows first.
    pub fn new(adjacency: &Matrix, features: &Matrix) -> Result<Self> {
        check_rows(adjacency.rows(), adjacency.cols())?;
        check_rows(adjacency.rows(), features.rows())?;
        let a_hat = normalize_adjacency(adjacency);
        let a_x = a_hat.matmul(features);
        Ok(Self {
            adjacency: adjacency.clone(),
            a_hat,
            a_x,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.a_x.cols()
    }

    /// Loss for a fixed noise sample `eps`, evaluated from logits.
    pub fn loss(&self, w: &Weights, eps: &Matrix) -> LossBreakdown {
        self.evaluate(w, eps, false).0
    }

    /// Loss and its analytic gradient w.r.t. every weight for a fixed noise
    /// sample.
    pub fn loss_and_gradients(&self, w: &Weights, eps: &Matrix) -> (LossBreakdown, Weights) {
        let (l, g) = self.evaluate(w, eps, true);
        (l, g.expect("gradients requested"))
    }

    fn evaluate(&self, w: &Weights, eps: &Matrix, want_grad: bool) -> (LossBreakdown, Option<Weights>) {
        let n = self.n();
        let nf = n as f64;
        let fwd = Forward::run(&self.a_hat, &self.a_x, w);
        let std = fwd.logvar.map(|lv| math::exp(0.5 * lv));
        let z = Matrix::from_fn(n, fwd.mu.cols(), |i, k| fwd.mu[(i, k)] + std[(i, k)] * eps[(i, k)]);
        let logits = z.matmul_t(&z);

        let (pos_weight, norm, degenerate) = balance(&self.adjacency);
        let scale = norm / (nf * nf);
        let mut bce = 0.0;
        // dL/dlogits
        let mut g_logits = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let s = logits[(i, j)];
                let positive = i != j && self.adjacency[(i, j)] != 0.0;
                if positive {
                    bce += pos_weight * math::softplus(-s);
                    g_logits[(i, j)] = scale * pos_weight * (math::sigmoid(s) - 1.0);
                } else {
                    bce += math::softplus(s);
                    g_logits[(i, j)] = scale * math::sigmoid(s);
                }
            }
        }
        let kl = kl_divergence(&fwd.mu, &fwd.logvar);
        let reconstruction = scale * bce;
        let breakdown = LossBreakdown {
            total: reconstruction + kl / nf,
            reconstruction,
            kl,
            degenerate_graph: degenerate,
        };
        if !want_grad {
            return (breakdown, None);
        }

        // logits = Z Zᵀ with symmetric g_logits → dZ = 2 G Z
        let mut g_z = g_logits.matmul(&z);
        g_z.as_mut_slice().iter_mut().for_each(|x| *x *= 2.0);

        let g_mu = Matrix::from_fn(n, z.cols(), |i, k| g_z[(i, k)] + fwd.mu[(i, k)] / nf);
        let g_logvar = Matrix::from_fn(n, z.cols(), |i, k| {
            let s = std[(i, k)];
            g_z[(i, k)] * eps[(i, k)] * 0.5 * s + 0.5 * (s * s - 1.0) / nf
        });

        let g_w_mu = fwd.a_hidden.t_matmul(&g_mu);
        let g_w_logvar = fwd.a_hidden.t_matmul(&g_logvar);
        let g_a_hidden = g_mu.matmul_t(&w.w_mu);
        let mut g_a_hidden = g_a_hidden;
        let extra = g_logvar.matmul_t(&w.w_logvar);
        for (a, b) in g_a_hidden.as_mut_slice().iter_mut().zip(extra.as_slice()) {
            *a += b;
        }
        // Â is symmetric
        let g_hidden = self.a_hat.t_matmul(&g_a_hidden);
        let g_pre = Matrix::from_fn(n, g_hidden.cols(), |i, h| {
            if fwd.pre_hidden[(i, h)] > 0.0 {
                g_hidden[(i, h)]
            } else {
                0.0
            }
        });
        let g_w0 = self.a_x.t_matmul(&g_pre);
        (
            breakdown,
            Some(Weights {
                w0: g_w0,
                w_mu: g_w_mu,
                w_logvar: g_w_logvar,
            }),
        )
    }

    pub fn posterior_mean(&self, w: &Weights) -> Matrix {
        Forward::run(&self.a_hat, &self.a_x, w).mu
    }
}

struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr: f64,
    step: i32,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    fn new(lr: f64, w: &Weights) -> Self {
        let zeros = || {
            [&w.w0, &w.w_mu, &w.w_logvar]
                .iter()
                .map(|m| Matrix::zeros(m.rows(), m.cols()))
                .collect::<Vec<_>>()
        };
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            lr,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    fn update(&mut self, w: &mut Weights, g: &Weights) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(self.beta1, f64::from(self.step));
        let c2 = 1.0 - libm::pow(self.beta2, f64::from(self.step));
        let grads = [&g.w0, &g.w_mu, &g.w_logvar];
        for (k, param) in w.parts_mut().into_iter().enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for (((p, &gr), mi), vi) in param
                .as_mut_slice()
                .iter_mut()
                .zip(grads[k].as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gr;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gr * gr;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *p -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
            }
        }
    }
}

/// Trains on `(adjacency, features)`. Noise and weight initialization come
/// from two ChaCha streams derived from `config.seed`.
pub fn train(adjacency: &Matrix, features: &Matrix, config: &VgaeConfig) -> Result<(VgaeModel, LatentMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_1417_a11c_e000);
    let n = adjacency.rows();
    let latent = config.latent_dim;
    train_with_noise(adjacency, features, config, &mut init_rng, |_epoch| {
        standard_normal(n, latent, &mut rng)
    })
}

/// Like [`train`], with the per-epoch noise matrix supplied by the caller.
pub fn train_with_noise(
    adjacency: &Matrix,
    features: &Matrix,
    config: &VgaeConfig,
    init_rng: &mut impl Rng,
    mut noise: impl FnMut(usize) -> Matrix,
) -> Result<(VgaeModel, LatentMatrix)> {
    config.validate()?;
    if adjacency.rows() < 2 {
        return Err(Error::Config(format!(
            "autoencoder needs at least 2 methods, got {}",
            adjacency.rows()
        )));
    }
    let x = features.l2_normalize_rows();
    let problem = Problem::new(adjacency, &x)?;
    let mut weights = Weights::init(problem.input_dim(), config, init_rng);
    let mut adam = Adam::new(config.learning_rate, &weights);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut degenerate = false;

    for epoch in 0..config.epochs {
        let eps = noise(epoch);
        check_rows(problem.n(), eps.rows())?;
        check_rows(config.latent_dim, eps.cols())?;
        let (l, grads) = problem.loss_and_gradients(&weights, &eps);
        degenerate = l.degenerate_graph;
        if !l.total.is_finite() || !grads.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.push(TraceEntry {
            epoch,
            loss: l.total,
            kl: l.kl,
        });
        adam.update(&mut weights, &grads);
    }

    let z = problem.posterior_mean(&weights);
    if !z.is_finite() {
        return Err(Error::NonFiniteLoss {
            epoch: config.epochs,
        });
    }
    Ok((
        VgaeModel {
            weights,
            training_trace: trace,
            degenerate_graph: degenerate,
        },
        LatentMatrix { z },
    ))
}

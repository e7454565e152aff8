//! Semantic method vectors: TF-IDF + LSI, LDA topic mixtures, or vectors
//! produced elsewhere (sentence BERT, CodeBERT), and their cosine matrix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::facts::MethodId;
use crate::linalg::{dot, norm, Matrix, Svd};
use crate::math;
use crate::structsim::{SimilarityKind, SimilarityMatrix};
use crate::textprep::BagOfWords;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureSource {
    Lsi,
    Lda,
    Bert,
    CodeBert,
    External,
}

/// Per-method feature rows, aligned to method ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub source: FeatureSource,
    pub rows: Matrix,
}

impl FeatureMatrix {
    pub fn new(source: FeatureSource, rows: Matrix) -> Result<Self> {
        if !rows.is_finite() {
            return Err(Error::Config(String::from("feature matrix contains NaN or Inf")));
        }
        Ok(Self { source, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    /// Aligns vectors keyed by method id to `0..n`.
    ///
    /// Fails with `MissingMethod` for the first absent id and
    /// `DimensionMismatch` when rows differ in length.
    pub fn from_id_map(
        source: FeatureSource,
        n: usize,
        vectors: &BTreeMap<MethodId, Vec<f64>>,
        declared_dim: Option<usize>,
    ) -> Result<Self> {
        let dim = match declared_dim {
            Some(d) => d,
            None => vectors.values().next().map_or(0, Vec::len),
        };
        let mut data = Vec::with_capacity(n * dim);
        for id in 0..n {
            let row = vectors.get(&id).ok_or(Error::MissingMethod(id))?;
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if let Some(row) = vectors.values().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        Self::new(source, Matrix::from_vec(n, dim, data)?)
    }
}

/// Methods × vocabulary TF-IDF weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    pub vocabulary: Vec<String>,
    pub weights: Matrix,
}

/// `tf(t, m) · ln(n / df(t))` with raw counts and a sorted vocabulary.
pub fn tfidf(bags: &[BagOfWords]) -> Result<TfIdf> {
    if bags.iter().all(BagOfWords::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let vocabulary: Vec<String> = bags
        .iter()
        .flat_map(|b| b.counts.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut df = vec![0usize; vocabulary.len()];
    for bag in bags {
        for t in bag.counts.keys() {
            df[index[t.as_str()]] += 1;
        }
    }
    let n = bags.len() as f64;
    let mut weights = Matrix::zeros(bags.len(), vocabulary.len());
    for (i, bag) in bags.iter().enumerate() {
        for (t, &count) in &bag.counts {
            let j = index[t.as_str()];
            weights[(i, j)] = f64::from(count) * math::ln(n / df[j] as f64);
        }
    }
    Ok(TfIdf {
        vocabulary,
        weights,
    })
}

pub const DEFAULT_LSI_RANK: usize = 32;

/// Effective LSI rank `min(k, n − 1, |V|)`, at least 1.
pub fn lsi_rank(k: usize, n: usize, vocab: usize) -> usize {
    k.min(n.saturating_sub(1)).min(vocab).max(1)
}

/// Document coordinates `U_r · Σ_r` of a truncated SVD.
///
/// Each singular vector is sign-flipped so that its largest-magnitude entry
/// is positive.
pub fn lsi_embed(tfidf: &TfIdf, k: usize) -> Result<FeatureMatrix> {
    if k == 0 {
        return Err(Error::Config(String::from("LSI rank must be >= 1")));
    }
    let w = &tfidf.weights;
    if w.cols() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let r = lsi_rank(k, w.rows(), w.cols());
    let svd = Svd::compute(w);
    let n = w.rows();
    let mut rows = Matrix::zeros(n, r);
    for c in 0..r {
        let col: Vec<f64> = (0..n).map(|i| svd.u[(i, c)]).collect();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        let s = svd.singular_values[c];
        for i in 0..n {
            rows[(i, c)] = sign * col[i] * s;
        }
    }
    FeatureMatrix::new(FeatureSource::Lsi, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub iterations: usize,
    /// Document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: 10,
            iterations: 1000,
            alpha: None,
            beta: 0.01,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics < 2 {
            return Err(Error::Config(format!("LDA needs >= 2 topics, got {}", self.topics)));
        }
        if self.iterations == 0 {
            return Err(Error::Config(String::from("LDA needs >= 1 iteration")));
        }
        if !(self.alpha() > 0.0) || !(self.beta > 0.0) {
            return Err(Error::Config(String::from("LDA priors must be positive")));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler state, one document per method.
#[derive(Debug, Clone)]
pub struct LdaSampler {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
}

impl LdaSampler {
    pub fn new(bags: &[BagOfWords], config: &LdaConfig) -> Result<Self> {
        config.validate()?;
        if bags.iter().all(BagOfWords::is_empty) {
            return Err(Error::EmptyCorpus);
        }
        let vocabulary: BTreeMap<&str, usize> = bags
            .iter()
            .flat_map(|b| b.counts.keys().map(String::as_str))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        let docs: Vec<Vec<usize>> = bags
            .iter()
            .map(|b| {
                b.counts
                    .iter()
                    .flat_map(|(t, &c)| core::iter::repeat_n(vocabulary[t.as_str()], c as usize))
                    .collect()
            })
            .collect();

        let t = config.topics;
        let v = vocabulary.len();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut doc_topic = vec![0u32; docs.len() * t];
        let mut topic_word = vec![0u32; t * v];
        let mut topic_total = vec![0u32; t];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.random_range(0..t);
                        doc_topic[d * t + z] += 1;
                        topic_word[z * v + w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            topics: t,
            vocab_size: v,
            alpha: config.alpha(),
            beta: config.beta,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
        })
    }

    /// One full pass resampling every token's topic.
    pub fn sweep(&mut self) {
        let t = self.topics;
        let v = self.vocab_size;
        let vbeta = v as f64 * self.beta;
        let mut weights = vec![0.0; t];
        for d in 0..self.docs.len() {
            for pos in 0..self.docs[d].len() {
                let w = self.docs[d][pos];
                let old = self.assignments[d][pos];
                self.doc_topic[d * t + old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for (k, slot) in weights.iter_mut().enumerate() {
                    let p = (f64::from(self.doc_topic[d * t + k]) + self.alpha)
                        * (f64::from(self.topic_word[k * v + w]) + self.beta)
                        / (f64::from(self.topic_total[k]) + vbeta);
                    total += p;
                    *slot = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(t - 1);

                self.assignments[d][pos] = new;
                self.doc_topic[d * t + new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Checks that all three count tables agree with the assignments.
    pub fn counts_consistent(&self) -> bool {
        let total = self.token_count() as u64;
        let sum = |xs: &[u32]| xs.iter().map(|&x| u64::from(x)).sum::<u64>();
        let doc_ok = self.docs.iter().enumerate().all(|(d, words)| {
            sum(&self.doc_topic[d * self.topics..(d + 1) * self.topics]) == words.len() as u64
        });
        doc_ok
            && sum(&self.doc_topic) == total
            && sum(&self.topic_word) == total
            && sum(&self.topic_total) == total
    }

    /// Smoothed topic mixture per document.
    pub fn theta(&self) -> Matrix {
        let t = self.topics;
        Matrix::from_fn(self.docs.len(), t, |d, k| {
            (f64::from(self.doc_topic[d * t + k]) + self.alpha)
                / (self.docs[d].len() as f64 + t as f64 * self.alpha)
        })
    }
}

/// Runs the sampler for `config.iterations` sweeps and returns the final
/// smoothed document-topic distributions.
pub fn lda_embed(bags: &[BagOfWords], config: &LdaConfig) -> Result<FeatureMatrix> {
    let mut sampler = LdaSampler::new(bags, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    FeatureMatrix::new(FeatureSource::Lda, sampler.theta())
}

/// Cosine similarity of feature rows. Pairs involving a zero row score 0;
/// the diagonal is 1.
pub fn cosine_matrix(features: &Matrix, kind: SimilarityKind) -> SimilarityMatrix {
    let n = features.rows();
    let norms: Vec<f64> = features.iter_rows().map(norm).collect();
    let mut values = Matrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                (dot(features.row(i), features.row(j)) / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[(i, j)] = c;
            values[(j, i)] = c;
        }
    }
    SimilarityMatrix { kind, values }
}

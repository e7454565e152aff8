//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! specs = ["WC+LSI", "VGAE+LSI"]
//! rq3_spec = "VGAE+LSI"
//!
//! [weights]          # WC combiner
//! ssm = 0.3333333333333333
//! [structure]        # VGAE graph
//! threshold = 0.0
//! [cluster]
//! min_methods = 3
//! xi = 0.05
//! [model.vgae]
//! epochs = 200
//! [model.lda]
//! topics = 10
//! [vectors]          # directories holding <ClassName>.json vector files
//! bert = "vectors/bert"
//! ```
//!
//! Every key is optional; missing keys keep the library defaults.

use std::path::{Path, PathBuf};

use classplit_core::pipeline::{Combiner, Embedding, ModelSpec};
use serde::Deserialize;

use crate::formats::{read_file, FormatError};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Seed for every stochastic step unless a section sets its own.
    pub seed: Option<u64>,
    #[serde(default)]
    pub specs: Vec<String>,
    pub rq3_spec: Option<String>,
    #[serde(default)]
    pub weights: WeightsSection,
    #[serde(default)]
    pub structure: StructureSection,
    #[serde(default)]
    pub cluster: ClusterSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub text: TextSection,
    #[serde(default)]
    pub vectors: VectorsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub ssm: Option<f64>,
    pub cdm: Option<f64>,
    pub csm: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    pub ssm: Option<f64>,
    pub cdm: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub min_methods: Option<usize>,
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub vgae: VgaeSection,
    #[serde(default)]
    pub lsi: LsiSection,
    #[serde(default)]
    pub lda: LdaSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VgaeSection {
    pub hidden_dim: Option<usize>,
    pub latent_dim: Option<usize>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub weight_init_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsiSection {
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaSection {
    pub topics: Option<usize>,
    pub iterations: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSection {
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub exclude_accessors: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorsSection {
    pub bert: Option<PathBuf>,
    pub codebert: Option<PathBuf>,
}

/// The four models that need no external vectors.
pub const NATIVE_SPECS: [&str; 4] = ["WC+LSI", "WC+LDA", "VGAE+LSI", "VGAE+LDA"];

/// Parses `WC+LSI`, `vgae+codebert` and similar labels.
pub fn parse_spec_label(label: &str) -> Option<(Combiner, Embedding)> {
    let (c, e) = label.split_once('+')?;
    let combiner = match c.trim().to_ascii_lowercase().as_str() {
        "wc" => Combiner::Wc,
        "vgae" => Combiner::Vgae,
        _ => return None,
    };
    let embedding = parse_embedding(e)?;
    Some((combiner, embedding))
}

pub fn parse_embedding(name: &str) -> Option<Embedding> {
    Some(match name.trim().to_ascii_lowercase().as_str() {
        "lsi" => Embedding::Lsi,
        "lda" => Embedding::Lda,
        "bert" => Embedding::Bert,
        "codebert" => Embedding::CodeBert,
        _ => return None,
    })
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, FormatError> {
        toml::from_str(text).map_err(|e| FormatError::Schema(e.message().to_string()))
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let mut cfg = Self::from_toml(&read_file(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        rebase(&mut cfg.text.stopwords);
        rebase(&mut cfg.vectors.bert);
        rebase(&mut cfg.vectors.codebert);
        Ok(cfg)
    }

    /// A spec with every configured override applied.
    pub fn spec(&self, combiner: Combiner, embedding: Embedding) -> ModelSpec {
        let mut s = ModelSpec::new(combiner, embedding);
        let w = &self.weights;
        s.wc_weights.ssm = w.ssm.unwrap_or(s.wc_weights.ssm);
        s.wc_weights.cdm = w.cdm.unwrap_or(s.wc_weights.cdm);
        s.wc_weights.csm = w.csm.unwrap_or(s.wc_weights.csm);
        let st = &self.structure;
        s.structural_weights.ssm = st.ssm.unwrap_or(s.structural_weights.ssm);
        s.structural_weights.cdm = st.cdm.unwrap_or(s.structural_weights.cdm);
        s.edge_threshold = st.threshold.unwrap_or(s.edge_threshold);
        s.cluster.min_methods = self.cluster.min_methods.unwrap_or(s.cluster.min_methods);
        s.cluster.xi = self.cluster.xi.unwrap_or(s.cluster.xi);

        let v = &self.model.vgae;
        s.vgae.hidden_dim = v.hidden_dim.unwrap_or(s.vgae.hidden_dim);
        s.vgae.latent_dim = v.latent_dim.unwrap_or(s.vgae.latent_dim);
        s.vgae.learning_rate = v.learning_rate.unwrap_or(s.vgae.learning_rate);
        s.vgae.epochs = v.epochs.unwrap_or(s.vgae.epochs);
        s.vgae.weight_init_scale = v.weight_init_scale.unwrap_or(s.vgae.weight_init_scale);
        s.vgae.seed = v.seed.or(self.seed).unwrap_or(s.vgae.seed);

        s.lsi_rank = self.model.lsi.rank.unwrap_or(s.lsi_rank);
        let l = &self.model.lda;
        s.lda.topics = l.topics.unwrap_or(s.lda.topics);
        s.lda.iterations = l.iterations.unwrap_or(s.lda.iterations);
        s.lda.alpha = l.alpha.or(s.lda.alpha);
        s.lda.beta = l.beta.unwrap_or(s.lda.beta);
        s.lda.seed = l.seed.or(self.seed).unwrap_or(s.lda.seed);
        s
    }

    /// Specs in the configured order; the four native models when none are
    /// listed.
    pub fn specs(&self) -> Result<Vec<ModelSpec>, FormatError> {
        let labels: Vec<&str> = if self.specs.is_empty() {
            NATIVE_SPECS.to_vec()
        } else {
            self.specs.iter().map(String::as_str).collect()
        };
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let (c, e) = parse_spec_label(l).ok_or_else(|| FormatError::Schema(format!("specs[{i}]")))?;
                let spec = self.spec(c, e);
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }

    /// Index into [`Config::specs`] of the before/after table's model.
    pub fn rq3_index(&self, specs: &[ModelSpec]) -> Result<usize, FormatError> {
        match &self.rq3_spec {
            None => Ok(specs
                .iter()
                .position(|s| s.combiner == Combiner::Vgae)
                .unwrap_or(0)),
            Some(label) => {
                let (c, e) = parse_spec_label(label).ok_or_else(|| FormatError::Schema("rq3_spec".into()))?;
                specs
                    .iter()
                    .position(|s| s.combiner == c && s.embedding == e)
                    .ok_or_else(|| FormatError::Schema("rq3_spec".into()))
            }
        }
    }

    pub fn vector_dir(&self, embedding: Embedding) -> Option<&Path> {
        match embedding {
            Embedding::Bert => self.vectors.bert.as_deref(),
            Embedding::CodeBert => self.vectors.codebert.as_deref(),
            _ => None,
        }
    }
}

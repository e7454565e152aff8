//! End-to-end model runs: facts → similarity → partition → metrics.

use alloc::format;
use alloc::string::String;

use crate::cluster::{self, ClusterConfig, Partition};
use crate::error::{Error, Result};
use crate::facts::ClassFacts;
use crate::linalg::Matrix;
use crate::metrics::{self, MetricsReport};
use crate::semvec::{self, FeatureMatrix, FeatureSource, LdaConfig, DEFAULT_LSI_RANK};
use crate::structsim::{self, check_convex, SimilarityKind, SimilarityMatrix, StructuralWeights};
use crate::textprep::{self, BagOfWords, Stopwords};
use crate::vgae::{self, VgaeConfig, VgaeModel};

/// How structural and semantic evidence are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combiner {
    /// Weighted sum of SSM, CDM and CSM.
    Wc,
    /// Latent vectors from the graph autoencoder.
    Vgae,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Embedding {
    Lsi,
    Lda,
    Bert,
    CodeBert,
}

impl Embedding {
    /// Embeddings that need vectors computed outside this crate.
    pub fn is_external(self) -> bool {
        matches!(self, Self::Bert | Self::CodeBert)
    }

    pub fn source(self) -> FeatureSource {
        match self {
            Self::Lsi => FeatureSource::Lsi,
            Self::Lda => FeatureSource::Lda,
            Self::Bert => FeatureSource::Bert,
            Self::CodeBert => FeatureSource::CodeBert,
        }
    }
}

/// Weights of the SSM, CDM and CSM terms in the WC combiner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcWeights {
    pub ssm: f64,
    pub cdm: f64,
    pub csm: f64,
}

impl Default for WcWeights {
    fn default() -> Self {
        Self {
            ssm: 1.0 / 3.0,
            cdm: 1.0 / 3.0,
            csm: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub combiner: Combiner,
    pub embedding: Embedding,
    pub wc_weights: WcWeights,
    pub structural_weights: StructuralWeights,
    pub edge_threshold: f64,
    pub vgae: VgaeConfig,
    pub cluster: ClusterConfig,
    pub lsi_rank: usize,
    pub lda: LdaConfig,
}

impl ModelSpec {
    pub fn new(combiner: Combiner, embedding: Embedding) -> Self {
        Self {
            combiner,
            embedding,
            wc_weights: WcWeights::default(),
            structural_weights: StructuralWeights::default(),
            edge_threshold: 0.0,
            vgae: VgaeConfig::default(),
            cluster: ClusterConfig::default(),
            lsi_rank: DEFAULT_LSI_RANK,
            lda: LdaConfig::default(),
        }
    }

    /// Short name such as `VGAE+LSI`.
    pub fn label(&self) -> String {
        let c = match self.combiner {
            Combiner::Wc => "WC",
            Combiner::Vgae => "VGAE",
        };
        let e = match self.embedding {
            Embedding::Lsi => "LSI",
            Embedding::Lda => "LDA",
            Embedding::Bert => "BERT",
            Embedding::CodeBert => "CodeBERT",
        };
        format!("{c}+{e}")
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.wc_weights;
        check_convex(&[w.ssm, w.cdm, w.csm])?;
        check_convex(&[self.structural_weights.ssm, self.structural_weights.cdm])?;
        if !(self.edge_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "edge threshold {} must be >= 0",
                self.edge_threshold
            )));
        }
        if self.lsi_rank == 0 {
            return Err(Error::Config(String::from("LSI rank must be >= 1")));
        }
        self.vgae.validate()?;
        self.cluster.validate()?;
        self.lda.validate()
    }
}

/// Optional inputs that come from files rather than from the facts.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelInputs<'a> {
    /// Required for BERT and CodeBERT.
    pub external_vectors: Option<&'a FeatureMatrix>,
    pub stopwords: Option<&'a Stopwords>,
}

/// Everything a run produced, for reporting.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub partition: Partition,
    pub report: MetricsReport,
    pub similarity: SimilarityMatrix,
    pub features: FeatureMatrix,
    /// Present for VGAE runs.
    pub vgae: Option<VgaeModel>,
}

/// `w_ssm·SSM + w_cdm·CDM + w_csm·CSM` off the diagonal, 1 on it.
pub fn wc_similarity(
    ssm: &SimilarityMatrix,
    cdm: &SimilarityMatrix,
    csm: &SimilarityMatrix,
    weights: WcWeights,
) -> Result<SimilarityMatrix> {
    check_convex(&[weights.ssm, weights.cdm, weights.csm])?;
    let n = ssm.n();
    for m in [cdm, csm] {
        if m.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.n(),
            });
        }
    }
    let values = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            weights.ssm * ssm.get(i, j) + weights.cdm * cdm.get(i, j) + weights.csm * csm.get(i, j)
        }
    });
    SimilarityMatrix::new(SimilarityKind::Combined, values)
}

pub fn bags(facts: &ClassFacts, stopwords: Option<&Stopwords>) -> alloc::vec::Vec<BagOfWords> {
    let default;
    let sw = match stopwords {
        Some(s) => s,
        None => {
            default = Stopwords::default();
            &default
        }
    };
    facts
        .methods
        .iter()
        .map(|m| textprep::bag_of_words_with(m, sw))
        .collect()
}

/// Semantic features for the spec's embedding. A class whose methods carry
/// no usable text gets all-zero features, so only structure drives it.
pub fn semantic_features(facts: &ClassFacts, spec: &ModelSpec, inputs: &ModelInputs<'_>) -> Result<FeatureMatrix> {
    let n = facts.len();
    if spec.embedding.is_external() {
        let f = inputs.external_vectors.ok_or_else(|| missing_vectors(spec))?;
        if f.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.n(),
            });
        }
        return Ok(f.clone());
    }
    let bags = bags(facts, inputs.stopwords);
    let result = match spec.embedding {
        Embedding::Lsi => semvec::tfidf(&bags).and_then(|t| semvec::lsi_embed(&t, spec.lsi_rank)),
        _ => {
            if bags.iter().all(BagOfWords::is_empty) {
                Err(Error::EmptyCorpus)
            } else {
                semvec::lda_embed(&bags, &spec.lda)
            }
        }
    };
    match result {
        Err(Error::EmptyCorpus) => FeatureMatrix::new(spec.embedding.source(), Matrix::zeros(n, 1)),
        other => other,
    }
}

fn missing_vectors(spec: &ModelSpec) -> Error {
    Error::Config(format!("{} needs an external vector file", spec.label()))
}

/// Runs one model on one class.
pub fn run_model_detailed(facts: &ClassFacts, spec: &ModelSpec, inputs: &ModelInputs<'_>) -> Result<ModelRun> {
    spec.validate()?;
    if spec.embedding.is_external() && inputs.external_vectors.is_none() {
        return Err(missing_vectors(spec));
    }
    facts.validate()?;
    if facts.len() < spec.cluster.min_methods {
        return Err(Error::TooFewMethods {
            n: facts.len(),
            min: spec.cluster.min_methods,
        });
    }
    let features = semantic_features(facts, spec, inputs)?;

    let (similarity, vgae) = match spec.combiner {
        Combiner::Wc => {
            let ssm = structsim::ssm_matrix(facts);
            let cdm = structsim::cdm_matrix(facts);
            let csm = semvec::cosine_matrix(&features.rows, SimilarityKind::Csm);
            (wc_similarity(&ssm, &cdm, &csm, spec.wc_weights)?, None)
        }
        Combiner::Vgae => {
            let combined = structsim::structural_matrix(facts, spec.structural_weights)?;
            let adjacency = structsim::build_adjacency(&combined, spec.edge_threshold)?;
            let (model, latent) = vgae::train(&adjacency, &features.rows, &spec.vgae)?;
            (semvec::cosine_matrix(&latent.z, SimilarityKind::Latent), Some(model))
        }
    };

    let partition = cluster::refactor(&similarity, &spec.cluster)?;
    let report = metrics::evaluate(facts, &partition)?;
    Ok(ModelRun {
        partition,
        report,
        similarity,
        features,
        vgae,
    })
}

pub fn run_model(facts: &ClassFacts, spec: &ModelSpec, inputs: &ModelInputs<'_>) -> Result<(Partition, MetricsReport)> {
    run_model_detailed(facts, spec, inputs).map(|r| (r.partition, r.report))
}

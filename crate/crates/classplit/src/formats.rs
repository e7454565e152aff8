//! JSON and text file formats: facts, external vectors, partitions,
//! stopword overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use classplit_core::cluster::PartitionWarning;
use classplit_core::semvec::{FeatureMatrix, FeatureSource};
use classplit_core::textprep::Stopwords;
use classplit_core::{ClassFacts, MethodFacts, Partition};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    /// Names the offending field path, e.g. `methods[2].arity`.
    #[error("schema error at {0}")]
    Schema(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] classplit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FormatError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), FormatError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| FormatError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| FormatError::io(path, e))
}

fn schema(path: impl Into<String>) -> FormatError {
    FormatError::Schema(path.into())
}

fn field<'v>(obj: &'v Map<String, Value>, key: &str, prefix: &str) -> Result<&'v Value, FormatError> {
    obj.get(key).ok_or_else(|| schema(format!("{prefix}{key}")))
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str, FormatError> {
    v.as_str().ok_or_else(|| schema(path))
}

fn as_u64(v: &Value, path: &str) -> Result<u64, FormatError> {
    v.as_u64().ok_or_else(|| schema(path))
}

fn string_set(v: &Value, path: &str) -> Result<BTreeSet<String>, FormatError> {
    let arr = v.as_array().ok_or_else(|| schema(path))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| as_str(s, &format!("{path}[{i}]")).map(str::to_string))
        .collect()
}

pub fn facts_to_json(facts: &ClassFacts) -> String {
    let methods: Vec<Value> = facts
        .methods
        .iter()
        .map(|m| {
            let calls: Map<String, Value> = m
                .internal_calls
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            json!({
                "id": m.id,
                "name": m.name,
                "arity": m.arity,
                "accessed_vars": m.accessed_vars,
                "internal_calls": calls,
                "external_call_count": m.external_call_count,
                "text_blob": m.text_blob,
            })
        })
        .collect();
    let doc = json!({
        "class_name": facts.class_name,
        "source_id": facts.source_id,
        "instance_vars": facts.instance_vars,
        "methods": methods,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("facts serialize");
    s.push('\n');
    s
}

pub fn facts_from_json(text: &str) -> Result<ClassFacts, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| schema("$"))?;
    let class_name = as_str(field(obj, "class_name", "")?, "class_name")?.to_string();
    let source_id = as_str(field(obj, "source_id", "")?, "source_id")?.to_string();
    let instance_vars = string_set(field(obj, "instance_vars", "")?, "instance_vars")?;
    let raw_methods = field(obj, "methods", "")?.as_array().ok_or_else(|| schema("methods"))?;

    let mut methods = Vec::with_capacity(raw_methods.len());
    for (pos, raw) in raw_methods.iter().enumerate() {
        let p = format!("methods[{pos}].");
        let m = raw.as_object().ok_or_else(|| schema(format!("methods[{pos}]")))?;
        let id = as_u64(field(m, "id", &p)?, &format!("{p}id"))? as usize;
        if id != pos {
            return Err(schema(format!("{p}id")));
        }
        let mut facts = MethodFacts::new(
            id,
            as_str(field(m, "name", &p)?, &format!("{p}name"))?,
            as_u64(field(m, "arity", &p)?, &format!("{p}arity"))? as usize,
        );
        facts.accessed_vars = string_set(field(m, "accessed_vars", &p)?, &format!("{p}accessed_vars"))?;
        let calls = field(m, "internal_calls", &p)?
            .as_object()
            .ok_or_else(|| schema(format!("{p}internal_calls")))?;
        for (k, v) in calls {
            let path = format!("{p}internal_calls.{k}");
            let callee: usize = k.parse().map_err(|_| schema(path.clone()))?;
            facts.internal_calls.insert(callee, as_u64(v, &path)?);
        }
        facts.external_call_count = as_u64(field(m, "external_call_count", &p)?, &format!("{p}external_call_count"))?;
        facts.text_blob = as_str(field(m, "text_blob", &p)?, &format!("{p}text_blob"))?.to_string();
        methods.push(facts);
    }
    let facts = ClassFacts {
        class_name,
        source_id,
        instance_vars,
        methods,
    };
    facts.validate()?;
    Ok(facts)
}

pub fn save_facts(path: &Path, facts: &ClassFacts) -> Result<(), FormatError> {
    write_file(path, &facts_to_json(facts))
}

pub fn load_facts(path: &Path) -> Result<ClassFacts, FormatError> {
    facts_from_json(&read_file(path)?)
}

/// Parsed vector file: `{"model", "dim", "vectors": {"<id>": [..]}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFile {
    pub model: String,
    pub dim: usize,
    pub vectors: BTreeMap<usize, Vec<f64>>,
}

impl VectorFile {
    pub fn source(&self) -> FeatureSource {
        match self.model.to_ascii_lowercase().as_str() {
            m if m.contains("codebert") => FeatureSource::CodeBert,
            m if m.contains("bert") => FeatureSource::Bert,
            _ => FeatureSource::External,
        }
    }

    /// Rows aligned to method ids `0..n`.
    pub fn features(&self, n: usize) -> Result<FeatureMatrix, FormatError> {
        if let Some(&extra) = self.vectors.keys().find(|&&id| id >= n) {
            return Err(schema(format!("vectors.{extra}")));
        }
        Ok(FeatureMatrix::from_id_map(self.source(), n, &self.vectors, Some(self.dim))?)
    }

    pub fn to_json(&self) -> String {
        let vectors: Map<String, Value> = self
            .vectors
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        let mut s = serde_json::to_string(&json!({"model": self.model, "dim": self.dim, "vectors": vectors}))
            .expect("vectors serialize");
        s.push('\n');
        s
    }
}

pub fn vectors_from_json(text: &str) -> Result<VectorFile, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| schema("$"))?;
    let model = as_str(field(obj, "model", "")?, "model")?.to_string();
    let dim = as_u64(field(obj, "dim", "")?, "dim")? as usize;
    let raw = field(obj, "vectors", "")?.as_object().ok_or_else(|| schema("vectors"))?;
    let mut vectors = BTreeMap::new();
    for (k, v) in raw {
        let path = format!("vectors.{k}");
        let id: usize = k.parse().map_err(|_| schema(path.clone()))?;
        let arr = v.as_array().ok_or_else(|| schema(path.clone()))?;
        let row = arr
            .iter()
            .enumerate()
            .map(|(i, x)| x.as_f64().ok_or_else(|| schema(format!("{path}[{i}]"))))
            .collect::<Result<Vec<f64>, _>>()?;
        vectors.insert(id, row);
    }
    Ok(VectorFile { model, dim, vectors })
}

pub fn load_vectors(path: &Path, n: usize) -> Result<FeatureMatrix, FormatError> {
    vectors_from_json(&read_file(path)?)?.features(n)
}

pub fn load_stopwords(path: &Path) -> Result<Stopwords, FormatError> {
    Ok(Stopwords::parse_override(&read_file(path)?))
}

fn warning_code(w: &PartitionWarning) -> &'static str {
    match w {
        PartitionWarning::NoClusters => "no_clusters",
    }
}

pub fn partition_to_json(p: &Partition) -> String {
    let warnings: Vec<&str> = p.warnings.iter().map(warning_code).collect();
    let mut s = serde_json::to_string_pretty(&json!({
        "k": p.k,
        "labels": p.labels,
        "noise_assigned": p.noise_assigned,
        "warnings": warnings,
    }))
    .expect("partition serialize");
    s.push('\n');
    s
}

pub fn partition_from_json(text: &str) -> Result<Partition, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| schema("$"))?;
    let k = as_u64(field(obj, "k", "")?, "k")? as usize;
    let labels = field(obj, "labels", "")?
        .as_array()
        .ok_or_else(|| schema("labels"))?
        .iter()
        .enumerate()
        .map(|(i, v)| as_u64(v, &format!("labels[{i}]")).map(|x| x as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let noise_assigned = match obj.get("noise_assigned") {
        None => BTreeSet::new(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| schema("noise_assigned"))?
            .iter()
            .enumerate()
            .map(|(i, v)| as_u64(v, &format!("noise_assigned[{i}]")).map(|x| x as usize))
            .collect::<Result<_, _>>()?,
    };
    let mut warnings = Vec::new();
    if let Some(v) = obj.get("warnings") {
        for (i, w) in v.as_array().ok_or_else(|| schema("warnings"))?.iter().enumerate() {
            match w.as_str() {
                Some("no_clusters") => warnings.push(PartitionWarning::NoClusters),
                _ => return Err(schema(format!("warnings[{i}]"))),
            }
        }
    }
    let p = Partition {
        labels,
        k,
        noise_assigned,
        warnings,
    };
    if !p.is_well_formed() {
        return Err(schema("labels"));
    }
    Ok(p)
}

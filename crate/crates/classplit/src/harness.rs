//! Corpus loading and the class × model comparison.

use std::path::{Path, PathBuf};

use classplit_core::pipeline::{run_model, ModelInputs, ModelSpec};
use classplit_core::textprep::Stopwords;
use classplit_core::{ClassFacts, MetricsReport, Partition};
use rayon::prelude::*;

use crate::config::Config;
use crate::formats::{load_facts, load_vectors, read_file, write_file, FormatError};
use crate::java::{parse_class_with, JavaError, ParseOptions};
use crate::report::{before_after_csv, before_after_markdown, MetricTable};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Java { path: String, source: JavaError },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusClass {
    /// File stem; also the key for per-class vector files.
    pub name: String,
    pub facts: ClassFacts,
    /// Known responsibilities, from a `<name>.planted.json` sidecar.
    pub planted: Option<Vec<usize>>,
}

fn planted_labels(path: &Path) -> Result<Option<Vec<usize>>, FormatError> {
    if !path.exists() {
        return Ok(None);
    }
    let v: serde_json::Value = serde_json::from_str(&read_file(path)?)?;
    let labels = v["labels"]
        .as_array()
        .ok_or_else(|| FormatError::Schema("labels".into()))?
        .iter()
        .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| FormatError::Schema("labels".into())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(labels))
}

/// Reads every `*.java` (parsed) and `*.facts.json` (loaded) file in `dir`,
/// sorted by file name.
pub fn load_corpus(dir: &Path, options: &ParseOptions) -> Result<Vec<CorpusClass>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| FormatError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("").to_string();
        let (name, facts) = if let Some(stem) = file.strip_suffix(".java") {
            let source = read_file(&path)?;
            let parsed = parse_class_with(&source, &path.display().to_string(), options).map_err(|source| {
                HarnessError::Java {
                    path: path.display().to_string(),
                    source,
                }
            })?;
            (stem.to_string(), parsed.facts)
        } else if let Some(stem) = file.strip_suffix(".facts.json") {
            (stem.to_string(), load_facts(&path)?)
        } else {
            continue;
        };
        let planted = planted_labels(&dir.join(format!("{name}.planted.json")))?;
        out.push(CorpusClass { name, facts, planted });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub partition: Partition,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub classes: Vec<String>,
    pub specs: Vec<String>,
    /// `cells[class][spec]`; `Err` holds the failure message.
    pub cells: Vec<Vec<Result<Cell, String>>>,
    pub rq3_spec: usize,
}

/// Runs every spec on every class. Cells are independent and run in
/// parallel; a failing cell is recorded and the rest are unaffected.
pub fn compare(corpus: &[CorpusClass], specs: &[ModelSpec], config: &Config) -> Result<Comparison, HarnessError> {
    if corpus.is_empty() || specs.is_empty() {
        return Err(HarnessError::Usage("compare needs at least one class and one spec".into()));
    }
    let rq3_spec = config.rq3_index(specs)?;
    let stopwords = match &config.text.stopwords {
        Some(p) => Some(Stopwords::parse_override(&read_file(p)?)),
        None => None,
    };
    let jobs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|c| (0..specs.len()).map(move |s| (c, s)))
        .collect();
    let results: Vec<Result<Cell, String>> = jobs
        .par_iter()
        .map(|&(c, s)| run_cell(&corpus[c], &specs[s], config, stopwords.as_ref()))
        .collect();
    let mut it = results.into_iter();
    let cells = (0..corpus.len())
        .map(|_| it.by_ref().take(specs.len()).collect())
        .collect();
    Ok(Comparison {
        classes: corpus.iter().map(|c| c.name.clone()).collect(),
        specs: specs.iter().map(ModelSpec::label).collect(),
        cells,
        rq3_spec,
    })
}

fn run_cell(class: &CorpusClass, spec: &ModelSpec, config: &Config, stopwords: Option<&Stopwords>) -> Result<Cell, String> {
    let vectors = match config.vector_dir(spec.embedding) {
        Some(dir) if spec.embedding.is_external() => {
            let path = dir.join(format!("{}.json", class.name));
            Some(load_vectors(&path, class.facts.len()).map_err(|e| e.to_string())?)
        }
        _ => None,
    };
    let inputs = ModelInputs {
        external_vectors: vectors.as_ref(),
        stopwords,
    };
    run_model(&class.facts, spec, &inputs)
        .map(|(partition, report)| Cell { partition, report })
        .map_err(|e| e.to_string())
}

impl Comparison {
    pub fn table(&self, metric: &str) -> MetricTable {
        let pick = |r: &MetricsReport| if metric == "lcom" { r.averages.0 } else { r.averages.1 };
        MetricTable {
            metric: metric.to_string(),
            classes: self.classes.clone(),
            specs: self.specs.clone(),
            cells: self
                .cells
                .iter()
                .map(|row| row.iter().map(|c| c.as_ref().ok().map(|c| pick(&c.report))).collect())
                .collect(),
        }
    }

    fn rq3_rows(&self) -> Vec<(String, &MetricsReport)> {
        self.classes
            .iter()
            .zip(&self.cells)
            .filter_map(|(name, row)| row[self.rq3_spec].as_ref().ok().map(|c| (name.clone(), &c.report)))
            .collect()
    }

    pub fn failures_csv(&self) -> String {
        let mut out = String::from("class,spec,error\n");
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if let Err(e) = c {
                    out.push_str(&format!("{},{},\"{}\"\n", self.classes[i], self.specs[j], e.replace('"', "'")));
                }
            }
        }
        out
    }

    /// Writes `lcom.{csv,md}`, `mpc.{csv,md}`, `before_after.{csv,md}` and
    /// `failures.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, FormatError> {
        let rq3 = self.rq3_rows();
        let rq3_title = format!("Before/after refactoring with {}\n\n", self.specs[self.rq3_spec]);
        let files = [
            ("lcom.csv", self.table("lcom").to_csv()),
            ("lcom.md", format!("Average LCOM after refactoring\n\n{}", self.table("lcom").to_markdown())),
            ("mpc.csv", self.table("mpc").to_csv()),
            ("mpc.md", format!("Average MPC after refactoring\n\n{}", self.table("mpc").to_markdown())),
            ("before_after.csv", before_after_csv(&rq3)),
            ("before_after.md", rq3_title + &before_after_markdown(&rq3)),
            ("failures.csv", self.failures_csv()),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            write_file(&p, &body)?;
            written.push(p);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_corpus, write_corpus};
    use classplit_core::pipeline::{Combiner, Embedding};

    fn quick_specs() -> Vec<ModelSpec> {
        let cfg = Config::from_toml("[model.vgae]\nepochs = 40\n[model.lda]\niterations = 50").unwrap();
        cfg.specs().unwrap()
    }

    #[test]
    fn corpus_loading_and_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &generate_corpus(2, 5)).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let corpus = load_corpus(dir.path(), &ParseOptions::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].name, "Synth00");
        assert_eq!(corpus[0].planted.as_ref().unwrap().len(), corpus[0].facts.len());

        let mut specs = quick_specs();
        specs.push(Config::default().spec(Combiner::Wc, Embedding::Bert));
        let cmp = compare(&corpus, &specs, &Config::default()).unwrap();
        assert_eq!(cmp.cells.len(), 2);
        for row in &cmp.cells {
            assert_eq!(row.len(), 5);
            assert!(row[..4].iter().all(Result::is_ok));
            assert!(row[4].is_err());
        }
        let out = tempfile::tempdir().unwrap();
        let files = cmp.write(out.path()).unwrap();
        assert_eq!(files.len(), 7);
        let lcom = std::fs::read_to_string(out.path().join("lcom.csv")).unwrap();
        assert_eq!(lcom.lines().next().unwrap(), "class,WC+LSI,WC+LDA,VGAE+LSI,VGAE+LDA,WC+BERT,best");
        assert_eq!(std::fs::read_to_string(out.path().join("failures.csv")).unwrap().lines().count(), 3);
    }

    #[test]
    fn one_by_one() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &generate_corpus(1, 8)).unwrap();
        let corpus = load_corpus(dir.path(), &ParseOptions::default()).unwrap();
        let specs = vec![Config::default().spec(Combiner::Wc, Embedding::Lsi)];
        let cmp = compare(&corpus, &specs, &Config::default()).unwrap();
        let t = cmp.table("lcom");
        assert_eq!((t.cells.len(), t.cells[0].len()), (1, 1));
    }
}

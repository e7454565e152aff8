//! Real-world corpus manifest and fetching.

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formats::{read_file, write_file, FormatError};
use crate::java::{parse_class_with, ParseOptions};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub class: String,
    pub system: String,
    /// May contain `{revision}`, substituted before fetching.
    pub url: String,
    pub revision: String,
    pub expected_methods: usize,
    /// Hex SHA-256 of the file at `revision`; unchecked when absent.
    pub sha256: Option<String>,
}

impl ManifestEntry {
    pub fn resolved_url(&self) -> String {
        self.url.replace("{revision}", &self.revision)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, rename = "entry")]
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Self, FormatError> {
        let m: Self = toml::from_str(text).map_err(|e| FormatError::Schema(e.message().to_string()))?;
        if let Some(i) = m.entries.iter().position(|e| e.expected_methods == 0) {
            return Err(FormatError::Schema(format!("entry[{i}].expected_methods")));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::from_toml(&read_file(path)?)
    }
}

/// Xerces and GanttProject god classes with their expected method counts.
pub const DEFAULT_MANIFEST: &str = include_str!("../corpus/manifest.toml");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{entry}: network error: {message}")]
    Network { entry: String, message: String },
    #[error("{entry}: checksum mismatch (expected {expected}, got {found})")]
    ChecksumMismatch { entry: String, expected: String, found: String },
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Source of bytes for a URL. Swappable so tests need no network.
pub trait Fetch {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, String>;
}

/// `http(s)://` through ureq, `file://` from disk.
#[derive(Debug, Clone, Copy, Default)]
pub struct HttpFetch;

impl Fetch for HttpFetch {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, String> {
        if let Some(path) = url.strip_prefix("file://") {
            return std::fs::read(path).map_err(|e| e.to_string());
        }
        let resp = ureq::get(url)
            .timeout(std::time::Duration::from_secs(30))
            .call()
            .map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        resp.into_reader()
            .take(64 << 20)
            .read_to_end(&mut buf)
            .map_err(|e| e.to_string())?;
        Ok(buf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchOutcome {
    pub class: String,
    pub path: PathBuf,
    pub expected_methods: usize,
    /// `None` when the file did not parse.
    pub parsed_methods: Option<usize>,
    pub lcom_mpc: Option<(u64, u64)>,
    pub warnings: Vec<String>,
}

/// Downloads each entry into `out_dir/<System>/<Class>.java`, verifies its
/// checksum, parses it and compares the method count to the manifest.
/// Parse problems become warnings; network and checksum failures are
/// reported per entry.
pub fn fetch_corpus(
    manifest: &Manifest,
    out_dir: &Path,
    fetcher: &dyn Fetch,
) -> Vec<Result<FetchOutcome, CorpusError>> {
    manifest
        .entries
        .iter()
        .map(|e| fetch_entry(e, out_dir, fetcher))
        .collect()
}

fn fetch_entry(entry: &ManifestEntry, out_dir: &Path, fetcher: &dyn Fetch) -> Result<FetchOutcome, CorpusError> {
    let bytes = fetcher.fetch(&entry.resolved_url()).map_err(|message| CorpusError::Network {
        entry: entry.class.clone(),
        message,
    })?;
    if let Some(expected) = &entry.sha256 {
        let found = hex::encode(Sha256::digest(&bytes));
        if !found.eq_ignore_ascii_case(expected) {
            return Err(CorpusError::ChecksumMismatch {
                entry: entry.class.clone(),
                expected: expected.clone(),
                found,
            });
        }
    }
    let path = out_dir.join(&entry.system).join(format!("{}.java", entry.class));
    let source = String::from_utf8_lossy(&bytes).into_owned();
    write_file(&path, &source)?;

    let mut outcome = FetchOutcome {
        class: entry.class.clone(),
        path,
        expected_methods: entry.expected_methods,
        parsed_methods: None,
        lcom_mpc: None,
        warnings: Vec::new(),
    };
    match parse_class_with(&source, &entry.resolved_url(), &ParseOptions::default()) {
        Ok(parsed) => {
            let n = parsed.facts.len();
            outcome.parsed_methods = Some(n);
            if n != entry.expected_methods {
                outcome
                    .warnings
                    .push(format!("parsed {n} methods, manifest expects {}", entry.expected_methods));
            }
            if !parsed.report.is_clean() {
                outcome.warnings.push(format!(
                    "{} method bodies parsed heuristically",
                    parsed.report.degraded.len()
                ));
            }
            let all: Vec<_> = parsed.facts.methods.iter().collect();
            let ids: Vec<usize> = (0..n).collect();
            let mpc = classplit_core::metrics::mpc(&ids, &parsed.facts).unwrap_or(0);
            outcome.lcom_mpc = Some((classplit_core::metrics::lcom(&all), mpc));
        }
        Err(e) => outcome.warnings.push(format!("parse failed: {e}")),
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    struct MapFetch(BTreeMap<String, Vec<u8>>);

    impl Fetch for MapFetch {
        fn fetch(&self, url: &str) -> Result<Vec<u8>, String> {
            self.0.get(url).cloned().ok_or_else(|| format!("unreachable: {url}"))
        }
    }

    fn entry(class: &str, expected: usize, sha: Option<String>) -> ManifestEntry {
        ManifestEntry {
            class: class.into(),
            system: "Demo".into(),
            url: format!("mem://{{revision}}/{class}.java"),
            revision: "v1".into(),
            expected_methods: expected,
            sha256: sha,
        }
    }

    #[test]
    fn default_manifest_lists_sixteen_classes() {
        let m = Manifest::from_toml(DEFAULT_MANIFEST).unwrap();
        assert_eq!(m.entries.len(), 16);
        let count = |c: &str| m.entries.iter().find(|e| e.class == c).unwrap().expected_methods;
        assert_eq!(count("DOMParserImpl"), 17);
        assert_eq!(count("CoreDocumentImpl"), 119);
        assert_eq!(count("GanttGraphicArea"), 43);
        assert_eq!(m.entries.iter().map(|e| e.expected_methods).sum::<usize>(), 881);
    }

    #[test]
    fn empty_manifest_is_noop() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::from_toml("").unwrap();
        assert!(fetch_corpus(&m, dir.path(), &HttpFetch).is_empty());
    }

    #[test]
    fn fetch_verifies_and_warns() {
        let src = b"class A { void a(){} void b(){} }".to_vec();
        let sha = hex::encode(Sha256::digest(&src));
        let fetch = MapFetch(BTreeMap::from([("mem://v1/A.java".to_string(), src)]));
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            entries: vec![
                entry("A", 2, Some(sha)),
                entry("A", 3, None),
                entry("A", 2, Some("00".into())),
                entry("Gone", 1, None),
            ],
        };
        let out = fetch_corpus(&m, dir.path(), &fetch);
        let ok = out[0].as_ref().unwrap();
        assert_eq!(ok.parsed_methods, Some(2));
        assert!(ok.warnings.is_empty());
        assert!(ok.path.exists());
        assert_eq!(out[1].as_ref().unwrap().warnings.len(), 1);
        assert!(matches!(out[2], Err(CorpusError::ChecksumMismatch { .. })));
        assert!(matches!(&out[3], Err(CorpusError::Network { entry, .. }) if entry == "Gone"));
    }

    #[test]
    fn file_urls_are_read_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        std::fs::write(&p, "hello").unwrap();
        assert_eq!(HttpFetch.fetch(&format!("file://{}", p.display())).unwrap(), b"hello");
        assert!(HttpFetch.fetch("file:///definitely/missing").is_err());
    }
}

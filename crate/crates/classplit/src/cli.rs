//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use classplit_core::pipeline::{run_model_detailed, Combiner, Embedding, ModelInputs};
use classplit_core::metrics::evaluate;

use crate::config::Config;
use crate::corpus::{fetch_corpus, HttpFetch, Manifest, DEFAULT_MANIFEST};
use crate::formats::{
    load_facts, load_stopwords, load_vectors, partition_from_json, partition_to_json, read_file, save_facts,
    write_file, FormatError,
};
use crate::harness::{compare, load_corpus, HarnessError};
use crate::java::{parse_class_with, ParseOptions};
use crate::report::{matrix_csv, metrics_csv, metrics_markdown, trace_csv};
use crate::synthetic::{generate_corpus, write_corpus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "classplit", version, about = "Recommend extract-class refactorings for Java god classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Wc,
    Vgae,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Lsi,
    Lda,
    Bert,
    Codebert,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Md,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse one Java class into a facts file.
    Extract {
        java_file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Leave trivial getters and setters out of the model.
        #[arg(long)]
        exclude_accessors: bool,
    },
    /// Propose a split of one class.
    Refactor {
        facts: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        embedding: EmbeddingArg,
        /// Vector file for bert/codebert.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional TOML config with model and cluster settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the VGAE training loss per epoch.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the method similarity matrix used for clustering.
        #[arg(long)]
        similarity: Option<PathBuf>,
    },
    /// LCOM and MPC of a class and a proposed split.
    Evaluate {
        facts: PathBuf,
        partition: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run several models over a corpus directory and tabulate the metrics.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Download the god-class corpus and check method counts.
    FetchCorpus {
        /// Manifest TOML; the bundled Xerces/GanttProject list when omitted.
        manifest: Option<PathBuf>,
        #[arg(short, long, default_value = "corpus")]
        output: PathBuf,
    },
    /// Write synthetic god classes with planted responsibilities.
    GenSynthetic {
        #[arg(long)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Data(String),
    Internal(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(m) => m.into(),
            other => Self::Data(other.to_string()),
        }
    }
}

impl From<classplit_core::Error> for Failure {
    fn from(e: classplit_core::Error) -> Self {
        match e {
            classplit_core::Error::NonFiniteLoss { .. } => Self::Internal(e.to_string()),
            other => Self::Data(other.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Format(f) => f.into(),
            other => Self::Data(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match std::panic::catch_unwind(|| execute(cli.command)) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(Failure::Data(msg))) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
        Err(_) => EXIT_INTERNAL,
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Extract {
            java_file,
            output,
            exclude_accessors,
        } => extract(&java_file, &output, exclude_accessors),
        Command::Refactor {
            facts,
            model,
            embedding,
            vectors,
            seed,
            config,
            stopwords,
            output,
            trace,
            similarity,
        } => {
            let cfg = match &config {
                Some(p) => Config::load(p)?,
                None => Config::default(),
            };
            let facts = load_facts(&facts)?;
            let combiner = match model {
                ModelArg::Wc => Combiner::Wc,
                ModelArg::Vgae => Combiner::Vgae,
            };
            let embedding = match embedding {
                EmbeddingArg::Lsi => Embedding::Lsi,
                EmbeddingArg::Lda => Embedding::Lda,
                EmbeddingArg::Bert => Embedding::Bert,
                EmbeddingArg::Codebert => Embedding::CodeBert,
            };
            let mut spec = cfg.spec(combiner, embedding);
            if let Some(s) = seed {
                spec.vgae.seed = s;
                spec.lda.seed = s;
            }
            let vectors = vectors.map(|p| load_vectors(&p, facts.len())).transpose()?;
            let stopwords = match stopwords.as_ref().or(cfg.text.stopwords.as_ref()) {
                Some(p) => Some(load_stopwords(p)?),
                None => None,
            };
            let inputs = ModelInputs {
                external_vectors: vectors.as_ref(),
                stopwords: stopwords.as_ref(),
            };
            let run = run_model_detailed(&facts, &spec, &inputs)?;
            for w in &run.partition.warnings {
                eprintln!("warning: {w}");
            }
            write_file(&output, &partition_to_json(&run.partition))?;
            if let (Some(path), Some(model)) = (&trace, &run.vgae) {
                write_file(path, &trace_csv(model))?;
            }
            if let Some(path) = &similarity {
                write_file(path, &matrix_csv(&run.similarity.values))?;
            }
            Ok(())
        }
        Command::Evaluate {
            facts,
            partition,
            format,
            output,
        } => {
            let facts = load_facts(&facts)?;
            let partition = partition_from_json(&read_file(&partition)?)?;
            let report = evaluate(&facts, &partition)?;
            let text = match format {
                ReportFormat::Csv => metrics_csv(&report),
                ReportFormat::Md => metrics_markdown(&facts.class_name, &report),
            };
            match output {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Compare { config, corpus, output } => {
            let cfg = Config::load(&config)?;
            let options = ParseOptions {
                exclude_accessors: cfg.text.exclude_accessors,
            };
            let classes = load_corpus(&corpus, &options)?;
            let specs = cfg.specs()?;
            let cmp = compare(&classes, &specs, &cfg)?;
            for p in cmp.write(&output)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::FetchCorpus { manifest, output } => {
            let manifest = match manifest {
                Some(p) => Manifest::load(&p)?,
                None => Manifest::from_toml(DEFAULT_MANIFEST)?,
            };
            let mut failed = 0;
            for outcome in fetch_corpus(&manifest, &output, &HttpFetch) {
                match outcome {
                    Ok(o) => {
                        let parsed = o.parsed_methods.map_or("-".to_string(), |n| n.to_string());
                        println!("{}: {} methods (expected {})", o.class, parsed, o.expected_methods);
                        for w in o.warnings {
                            eprintln!("warning: {}: {w}", o.class);
                        }
                    }
                    Err(e) => {
                        failed += 1;
                        eprintln!("error: {e}");
                    }
                }
            }
            if failed > 0 {
                return Err(Failure::Data(format!("{failed} corpus entries could not be fetched")));
            }
            Ok(())
        }
        Command::GenSynthetic { classes, seed, output } => {
            write_corpus(&output, &generate_corpus(classes, seed))?;
            Ok(())
        }
    }
}

fn extract(java_file: &Path, output: &Path, exclude_accessors: bool) -> Result<(), Failure> {
    let source = read_file(java_file)?;
    let parsed = parse_class_with(&source, &java_file.display().to_string(), &ParseOptions { exclude_accessors })
        .map_err(|e| Failure::Data(format!("{}: {e}", java_file.display())))?;
    for (id, line) in &parsed.report.degraded {
        eprintln!("warning: method {id} (line {line}) parsed heuristically");
    }
    save_facts(output, &parsed.facts)?;
    Ok(())
}

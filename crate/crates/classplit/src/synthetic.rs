//! Generated god classes with known responsibilities.
//!
//! Each responsibility owns a field set, a vocabulary and a group of
//! methods that call each other; methods of all groups are interleaved in
//! the source. The planted label of every method is returned alongside the
//! Java text.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::formats::{write_file, FormatError};

const POOLS: [[&str; 6]; 8] = [
    ["invoice", "ledger", "payment", "tax", "budget", "refund"],
    ["pixel", "canvas", "shade", "sprite", "texture", "palette"],
    ["socket", "packet", "router", "bandwidth", "proxy", "latency"],
    ["disk", "sector", "cache", "journal", "volume", "block"],
    ["calendar", "holiday", "weekday", "deadline", "milestone", "schedule"],
    ["employee", "salary", "manager", "vacation", "badge", "payroll"],
    ["lexer", "grammar", "symbol", "token", "syntax", "parser"],
    ["audio", "melody", "rhythm", "tempo", "chord", "timbre"],
];

const VERBS: [&str; 8] = ["compute", "update", "validate", "load", "store", "apply", "merge", "reset"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub responsibilities: usize,
    pub methods_per_responsibility: usize,
    pub fields_per_responsibility: usize,
    /// Probability of an extra call to a random sibling in the same group.
    pub extra_call_prob: f64,
    /// Probability of one call into another group.
    pub cross_call_prob: f64,
    /// Probability of each of up to two external calls.
    pub external_call_prob: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            responsibilities: 2,
            methods_per_responsibility: 8,
            fields_per_responsibility: 4,
            extra_call_prob: 0.3,
            cross_call_prob: 0.0,
            external_call_prob: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticClass {
    pub name: String,
    pub source: String,
    /// Responsibility of each method, in declaration order.
    pub planted: Vec<usize>,
}

fn cap(w: &str) -> String {
    let mut c = w.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

struct PlannedMethod {
    group: usize,
    index: usize,
    name: String,
}

pub fn generate(name: &str, params: &SyntheticParams, rng: &mut impl Rng) -> SyntheticClass {
    assert!(params.responsibilities >= 1 && params.responsibilities <= POOLS.len());
    assert!(params.methods_per_responsibility >= 1 && params.fields_per_responsibility >= 1);
    let mut pools: Vec<usize> = (0..POOLS.len()).collect();
    pools.shuffle(rng);
    pools.truncate(params.responsibilities);

    let m = params.methods_per_responsibility;
    let f = params.fields_per_responsibility;
    let field_name = |g: usize, i: usize| {
        let p = POOLS[pools[g]];
        format!("{}{}", p[i % 6], cap(p[(i + 1) % 6]))
    };

    let mut planned: Vec<PlannedMethod> = Vec::new();
    for g in 0..params.responsibilities {
        let p = POOLS[pools[g]];
        for k in 0..m {
            let verb = VERBS[rng.random_range(0..VERBS.len())];
            planned.push(PlannedMethod {
                group: g,
                index: k,
                name: format!("{verb}{}{}{k}", cap(p[k % 6]), cap(p[(k + 2) % 6])),
            });
        }
    }
    planned.shuffle(rng);
    let method_name = |g: usize, k: usize| {
        planned
            .iter()
            .find(|pm| pm.group == g && pm.index == k)
            .map(|pm| pm.name.clone())
            .expect("planned method exists")
    };

    let mut src = format!("package synthetic;\n\npublic class {name} {{\n");
    for g in 0..params.responsibilities {
        for i in 0..f {
            src.push_str(&format!("    private int {};\n", field_name(g, i)));
        }
    }
    src.push_str("    private static final java.util.logging.Logger logger = java.util.logging.Logger.getAnonymousLogger();\n");

    for pm in &planned {
        let (g, k) = (pm.group, pm.index);
        let p = POOLS[pools[g]];
        src.push_str(&format!(
            "\n    /** Handles the {} {} of the {}. */\n    public int {}(int {}) {{\n",
            p[k % 6],
            p[(k + 3) % 6],
            p[(k + 4) % 6],
            pm.name,
            p[(k + 5) % 6]
        ));
        let a = field_name(g, k % f);
        let b = field_name(g, (k + 1) % f);
        src.push_str(&format!("        {a} = {a} + {};\n", p[(k + 5) % 6]));
        src.push_str(&format!("        int {}Total = {b} * 2;\n", p[k % 6]));
        if m > 1 {
            src.push_str(&format!("        {}(0);\n", method_name(g, (k + 1) % m)));
            if rng.random_bool(params.extra_call_prob) {
                src.push_str(&format!("        {}(1);\n", method_name(g, rng.random_range(0..m))));
            }
        }
        if params.responsibilities > 1 && rng.random_bool(params.cross_call_prob) {
            let other = (g + rng.random_range(1..params.responsibilities)) % params.responsibilities;
            src.push_str(&format!("        {}(2);\n", method_name(other, rng.random_range(0..m))));
        }
        if rng.random_bool(params.external_call_prob) {
            src.push_str(&format!("        logger.fine(\"{} {}\");\n", p[k % 6], p[(k + 1) % 6]));
        }
        if rng.random_bool(params.external_call_prob) {
            src.push_str(&format!("        {b} = Math.max({b}, {}Total);\n", p[k % 6]));
        }
        src.push_str(&format!("        return {a};\n    }}\n"));
    }
    src.push_str("}\n");

    SyntheticClass {
        name: name.to_string(),
        source: src,
        planted: planned.iter().map(|pm| pm.group).collect(),
    }
}

/// `count` classes named `Synth00`, `Synth01`, … with 2–4 responsibilities
/// of 4–8 methods each.
pub fn generate_corpus(count: usize, seed: u64) -> Vec<SyntheticClass> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let params = SyntheticParams {
                responsibilities: rng.random_range(2..=4),
                methods_per_responsibility: rng.random_range(4..=8),
                fields_per_responsibility: rng.random_range(3..=5),
                ..SyntheticParams::default()
            };
            generate(&format!("Synth{i:02}"), &params, &mut rng)
        })
        .collect()
}

/// Writes `<name>.java` and `<name>.planted.json` for each class.
pub fn write_corpus(dir: &Path, classes: &[SyntheticClass]) -> Result<(), FormatError> {
    for c in classes {
        write_file(&dir.join(format!("{}.java", c.name)), &c.source)?;
        let labels = serde_json::to_string(&json!({"class": c.name, "labels": c.planted})).expect("labels serialize");
        write_file(&dir.join(format!("{}.planted.json", c.name)), &(labels + "\n"))?;
    }
    Ok(())
}

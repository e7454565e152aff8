//! Turning method source text into a normalized bag of words.
//!
//! Pipeline: [`tokenize`] → [`filter_tokens`] → [`normalize`] → filter again
//! (a lemma can itself be a stopword, e.g. "doing" → "do").

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::facts::{MethodFacts, MethodId};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagOfWords {
    pub method_id: MethodId,
    pub counts: BTreeMap<String, u32>,
}

impl BagOfWords {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }
}

/// Bundled English stopword list (v1).
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
    "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
    "don", "down", "during", "each", "few", "from", "further", "hadn", "has", "hasn", "have",
    "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "i", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "m", "ma", "me",
    "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not", "now", "o",
    "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
    "own", "re", "s", "same", "shan", "she", "should", "shouldn", "so", "some", "such", "t",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was",
    "wasn", "we", "were", "weren", "what", "when", "where", "which", "while", "who", "whom",
    "why", "will", "with", "won", "wouldn", "y", "you", "your", "yours", "yourself",
    "yourselves", "had", "if", "would", "could", "might", "must", "shall", "may", "also",
];

/// The 50 Java reserved words plus the literals `true`, `false`, `null`.
pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "true", "false", "null",
];

/// The set of words removed by [`filter_tokens_with`]. Java keywords are
/// always part of it; the English part can be replaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: BTreeSet<String>,
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::from_english(ENGLISH_STOPWORDS.iter().copied())
    }
}

impl Stopwords {
    pub fn from_english<'a>(english: impl IntoIterator<Item = &'a str>) -> Self {
        let words = english
            .into_iter()
            .chain(JAVA_KEYWORDS.iter().copied())
            .map(|w| w.to_lowercase())
            .collect();
        Self { words }
    }

    /// Parses an override list: one token per line, `#` starts a comment.
    pub fn parse_override(text: &str) -> Self {
        let english = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        Self::from_english(english)
    }

    pub fn contains(&self, token: &str) -> bool {
        if token.chars().any(char::is_uppercase) {
            self.words.contains(&token.to_lowercase())
        } else {
            self.words.contains(token)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Lower,
    Upper,
    Digit,
    Other,
}

fn class_of(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_alphabetic() {
        CharClass::Lower
    } else {
        CharClass::Other
    }
}

/// Splits source text on whitespace, underscores, punctuation, digit/letter
/// boundaries and camel-case boundaries (`XMLParser` → `XML`, `Parser`).
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;

    for i in 0..chars.len() {
        let cur = class_of(chars[i]);
        if cur == CharClass::Other {
            if let Some(s) = start.take() {
                tokens.push(chars[s..i].iter().collect());
            }
            continue;
        }
        let Some(s) = start else {
            start = Some(i);
            continue;
        };
        let prev = class_of(chars[i - 1]);
        let next = chars.get(i + 1).map(|&c| class_of(c));
        let boundary = match (prev, cur) {
            (CharClass::Digit, CharClass::Lower | CharClass::Upper)
            | (CharClass::Lower | CharClass::Upper, CharClass::Digit)
            | (CharClass::Lower, CharClass::Upper) => true,
            // the last capital of a run starts the next word: "XMLParser"
            (CharClass::Upper, CharClass::Upper) => next == Some(CharClass::Lower),
            _ => false,
        };
        if boundary {
            tokens.push(chars[s..i].iter().collect());
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(chars[s..].iter().collect());
    }
    tokens
}

/// Drops stopwords, Java keywords, pure numbers and single characters,
/// using the bundled stopword list.
pub fn filter_tokens(tokens: Vec<String>) -> Vec<String> {
    filter_tokens_with(tokens, &Stopwords::default())
}

pub fn filter_tokens_with(tokens: Vec<String>, stopwords: &Stopwords) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| {
            t.chars().count() > 1 && !t.chars().all(char::is_numeric) && !stopwords.contains(t)
        })
        .collect()
}

/// Lemmatizes then lowercases each token.
pub fn normalize(tokens: Vec<String>) -> Vec<String> {
    tokens.into_iter().map(|t| normalize_token(&t)).collect()
}

pub fn normalize_token(token: &str) -> String {
    let mut word = token.to_lowercase();
    // Iterate to a fixpoint so normalization is idempotent by construction.
    for _ in 0..4 {
        let next = lemmatize(&word);
        if next == word {
            break;
        }
        word = next;
    }
    word
}

pub fn bag_of_words(method: &MethodFacts) -> BagOfWords {
    bag_of_words_with(method, &Stopwords::default())
}

pub fn bag_of_words_with(method: &MethodFacts, stopwords: &Stopwords) -> BagOfWords {
    let tokens = normalize(filter_tokens_with(tokenize(&method.text_blob), stopwords));
    let mut counts = BTreeMap::new();
    for t in filter_tokens_with(tokens, stopwords) {
        *counts.entry(t).or_insert(0) += 1;
    }
    BagOfWords {
        method_id: method.id,
        counts,
    }
}

// ---------------------------------------------------------------------------
// Rule-based lemmatizer

fn irregular(word: &str) -> Option<&'static str> {
    Some(match word {
        "children" => "child",
        "men" => "man",
        "women" => "woman",
        "feet" => "foot",
        "teeth" => "tooth",
        "mice" => "mouse",
        "people" => "person",
        "indices" => "index",
        "vertices" => "vertex",
        "matrices" => "matrix",
        "criteria" => "criterion",
        "leaves" => "leaf",
        "was" | "were" | "been" | "being" | "is" | "are" | "am" => "be",
        "has" | "had" | "having" => "have",
        "did" | "does" | "done" | "doing" => "do",
        "made" | "making" => "make",
        "found" => "find",
        "got" | "gotten" => "get",
        "built" => "build",
        "sent" => "send",
        "written" | "wrote" | "writing" => "write",
        "ran" => "run",
        "began" | "begun" => "begin",
        "chose" | "chosen" => "choose",
        "gave" | "given" => "give",
        "took" | "taken" => "take",
        "went" | "gone" => "go",
        "left" => "leave",
        "kept" => "keep",
        "held" => "hold",
        "brought" => "bring",
        "thought" => "think",
        "bought" => "buy",
        "caught" => "catch",
        "taught" => "teach",
        "told" => "tell",
        "sold" => "sell",
        "lost" => "lose",
        "meant" => "mean",
        "paid" => "pay",
        "said" => "say",
        "saw" | "seen" => "see",
        "knew" | "known" => "know",
        "threw" | "thrown" => "throw",
        "became" => "become",
        "came" => "come",
        "using" | "used" | "uses" => "use",
        "creating" | "created" | "creates" => "create",
        "changing" | "changed" | "changes" => "change",
        "causing" | "caused" | "causes" => "cause",
        _ => return None,
    })
}

/// Words whose surface form already is the lemma despite a suffix match.
const PROTECTED: &[&str] = &[
    "always", "anything", "bed", "bias", "bring", "ceiling", "embed", "everything", "evening",
    "feed", "hundred", "indeed", "king", "morning", "naked", "need", "news", "nothing", "perhaps",
    "ping", "red", "ring", "sacred", "seed", "series", "shed", "sing", "something", "species",
    "speed", "spring", "sting", "string", "swing", "sync", "thing", "this", "wing", "yes",
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn lemmatize(word: &str) -> String {
    if let Some(lemma) = irregular(word) {
        return lemma.to_string();
    }
    if word.len() <= 3 || !word.is_ascii() || PROTECTED.contains(&word) {
        return word.to_string();
    }
    let b = word.as_bytes();
    let n = b.len();

    if word.ends_with("ies") && n > 4 {
        return [&word[..n - 3], "y"].concat();
    }
    if word.ends_with("sses") {
        return word[..n - 2].to_string();
    }
    if ["xes", "ches", "shes", "zzes"].iter().any(|s| word.ends_with(s)) {
        return word[..n - 2].to_string();
    }
    if word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return word[..n - 1].to_string();
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 3 && stem.bytes().any(|c| is_vowel(c) || c == b'y') {
            return restore_stem(stem);
        }
    }
    if !word.ends_with("eed") {
        if let Some(stem) = word.strip_suffix("ed") {
            if stem.len() >= 3 && stem.bytes().any(is_vowel) {
                return restore_stem(stem);
            }
        }
    }
    word.to_string()
}

/// Undoes consonant doubling or restores a dropped final `e` after an
/// `-ing`/`-ed` suffix was removed.
fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    let (last, prev) = (b[n - 1], b[n - 2]);
    let consonant = |c: u8| c.is_ascii_alphabetic() && !is_vowel(c);

    if n >= 4 && last == prev && consonant(last) && !matches!(last, b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if needs_final_e(b) {
        return [stem, "e"].concat();
    }
    stem.to_string()
}

fn needs_final_e(b: &[u8]) -> bool {
    let n = b.len();
    let consonant = |c: u8| c.is_ascii_alphabetic() && !is_vowel(c) && c != b'y';
    let last = b[n - 1];
    let prev = b[n - 2];
    let before = if n >= 3 { b[n - 3] } else { b'a' };
    let tail = &b[n - 2..];

    if last == b'v' {
        return true;
    }
    // creat-e, comput-e, provid-e, encod-e, configur-e, initializ-e
    if matches!(tail, b"at" | b"ut" | b"id" | b"od" | b"ur" | b"iz" | b"yz") && consonant(before) {
        return true;
    }
    if matches!(tail, b"rs" | b"ns" | b"rg" | b"dg" | b"ag" | b"ac" | b"uc" | b"os") {
        return true;
    }
    if tail == b"nc" && is_vowel(before) {
        return true;
    }
    if n >= 3 && &b[n - 3..] == b"uir" {
        return true;
    }
    if last == b'l' && matches!(prev, b'b' | b'p' | b't' | b'k' | b'g' | b'd' | b'f' | b'z') {
        return true;
    }
    // short consonant-vowel-consonant stems: mak-e, sav-e, shar-e, stor-e
    let cvc = consonant(before) && is_vowel(prev) && consonant(last) && !matches!(last, b'w' | b'x');
    cvc && (n == 3 || (n == 4 && consonant(b[0])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("getXMLNode2_fast"), strs(&["get", "XML", "Node", "2", "fast"]));
        assert_eq!(tokenize("parse_document"), strs(&["parse", "document"]));
        assert_eq!(
            tokenize("/** Parses an XMLParser. */ int x2y = a.b(3);"),
            strs(&["Parses", "an", "XML", "Parser", "int", "x", "2", "y", "a", "b", "3"])
        );
        assert_eq!(tokenize("HTTP"), strs(&["HTTP"]));
    }

    #[test]
    fn filter_examples() {
        assert_eq!(filter_tokens(strs(&["the", "return", "parse"])), strs(&["parse"]));
        assert!(filter_tokens(strs(&["2", "x"])).is_empty());
        assert!(filter_tokens(vec![]).is_empty());
        assert!(filter_tokens(strs(&["The", "NULL", "True"])).is_empty());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(strs(&["Parsing"])), strs(&["parse"]));
        assert_eq!(normalize(strs(&["nodes"])), strs(&["node"]));
        assert_eq!(normalize(strs(&["xml"])), strs(&["xml"]));
    }

    #[test]
    fn lemmatizer_rules() {
        let cases = [
            ("entries", "entry"),
            ("boxes", "box"),
            ("classes", "class"),
            ("status", "status"),
            ("running", "run"),
            ("stopped", "stop"),
            ("added", "add"),
            ("loaded", "load"),
            ("computing", "compute"),
            ("removing", "remove"),
            ("initialized", "initialize"),
            ("calling", "call"),
            ("string", "string"),
            ("shared", "share"),
            ("opening", "open"),
            ("embedded", "embed"),
            ("children", "child"),
        ];
        for (input, expected) in cases {
            assert_eq!(normalize_token(input), expected, "{input}");
        }
    }

    #[test]
    fn bag_examples() {
        let mut m = MethodFacts::new(3, "m", 0);
        m.text_blob = "return nodes;".into();
        let bag = bag_of_words(&m);
        assert_eq!(bag.method_id, 3);
        assert_eq!(bag.counts, [("node".to_string(), 1)].into_iter().collect());

        m.text_blob = String::new();
        assert!(bag_of_words(&m).is_empty());

        m.text_blob = "parse parse".into();
        assert_eq!(bag_of_words(&m).counts.get("parse"), Some(&2));
    }

    #[test]
    fn lemma_that_is_a_stopword_is_dropped() {
        let mut m = MethodFacts::new(0, "m", 0);
        m.text_blob = "doing having parsing".into();
        assert_eq!(bag_of_words(&m).counts.keys().collect::<Vec<_>>(), ["parse"]);
    }

    #[test]
    fn stopword_override() {
        let sw = Stopwords::parse_override("# custom\nfoo\n  bar  # trailing\n\n");
        assert!(sw.contains("foo") && sw.contains("bar") && sw.contains("return"));
        assert!(!sw.contains("the"));
        assert_eq!(
            filter_tokens_with(strs(&["the", "foo", "parse"]), &sw),
            strs(&["the", "parse"])
        );
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in "[a-zA-Z_0-9 .(){}]{0,60}") {
            for t in normalize(filter_tokens(tokenize(&text))) {
                prop_assert_eq!(normalize_token(&t), t.clone());
            }
        }

        #[test]
        fn bag_tokens_are_clean(text in "[a-zA-Z_0-9 ]{0,80}") {
            let mut m = MethodFacts::new(0, "m", 0);
            m.text_blob = text.clone();
            let bag = bag_of_words(&m);
            let sw = Stopwords::default();
            for (tok, &c) in &bag.counts {
                prop_assert!(c >= 1);
                prop_assert!(!sw.contains(tok));
                prop_assert!(!tok.chars().all(char::is_numeric));
                prop_assert_eq!(tok.to_lowercase(), tok.clone());
            }
            prop_assert_eq!(bag, bag_of_words(&m));
        }
    }
}

//! Java source → [`ClassFacts`], resolved by name within one class.

use std::collections::{BTreeMap, BTreeSet};

use classplit_core::{ClassFacts, MethodFacts, MethodId};
use thiserror::Error;
use tree_sitter::{Node, Parser, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JavaError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Drop trivial getters and setters. Calls to them then count as
    /// external.
    pub exclude_accessors: bool,
}

/// Where extraction fell back to heuristics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Methods whose bodies contained syntax the grammar could not parse;
    /// `(method id, 1-based line)`.
    pub degraded: Vec<(MethodId, usize)>,
    /// Invocations found by the `identifier (` fallback scan.
    pub heuristic_calls: usize,
    pub excluded_accessors: Vec<String>,
}

impl ParseReport {
    pub fn is_clean(&self) -> bool {
        self.degraded.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedClass {
    pub facts: ClassFacts,
    pub report: ParseReport,
    pub loc: usize,
}

pub fn parse_class(source: &str) -> Result<ClassFacts, JavaError> {
    parse_class_with(source, "", &ParseOptions::default()).map(|p| p.facts)
}

pub fn parse_class_with(source: &str, source_id: &str, options: &ParseOptions) -> Result<ParsedClass, JavaError> {
    let tree = parse_tree(source)?;
    let src = source.as_bytes();
    let class = top_level_class(&tree, src)?;
    let decls = collect_declarations(class, src)?;

    let mut signatures: Vec<Signature> = decls.methods.iter().map(|m| m.signature.clone()).collect();
    let mut report = ParseReport::default();
    if options.exclude_accessors {
        for (sig, decl) in signatures.iter_mut().zip(&decls.methods) {
            if is_accessor(decl, &decls.fields, src) {
                sig.excluded = true;
                report.excluded_accessors.push(sig.name.clone());
            }
        }
    }
    let mut new_id = Vec::with_capacity(signatures.len());
    let mut next = 0;
    for sig in &signatures {
        new_id.push((!sig.excluded).then(|| {
            next += 1;
            next - 1
        }));
    }

    let mut methods = Vec::new();
    for (old, decl) in decls.methods.iter().enumerate() {
        let Some(id) = new_id[old] else { continue };
        let mut walker = BodyWalker::new(src, &decls.fields, &signatures);
        walker.declare_parameters(decl.node);
        if let Some(body) = decl.node.child_by_field_name("body") {
            walker.visit(body);
        }
        if walker.degraded {
            report.degraded.push((id, decl.node.start_position().row + 1));
        }
        report.heuristic_calls += walker.heuristic_calls;

        let mut m = MethodFacts::new(id, decl.signature.name.clone(), decl.signature.arity);
        m.accessed_vars = walker.accessed;
        for (callee, count) in walker.internal {
            match new_id[callee] {
                Some(target) => *m.internal_calls.entry(target).or_default() += count,
                None => walker.external += count,
            }
        }
        m.external_call_count = walker.external;
        m.text_blob = decl.text_blob.clone();
        methods.push(m);
    }

    let facts = ClassFacts {
        class_name: text(class.child_by_field_name("name").expect("class has a name"), src).to_string(),
        source_id: source_id.to_string(),
        instance_vars: decls.fields,
        methods,
    };
    Ok(ParsedClass {
        facts,
        report,
        loc: source.lines().count(),
    })
}

/// Invocation expressions (`f(..)`, `x.f(..)`, `this(..)`, `super(..)`)
/// inside each method of the top-level class, in declaration order.
///
/// Counts syntax nodes only; it does no resolution, so it serves as a check
/// on the extractor's call bookkeeping.
pub fn count_invocation_sites(source: &str) -> Result<Vec<u64>, JavaError> {
    let tree = parse_tree(source)?;
    let src = source.as_bytes();
    let class = top_level_class(&tree, src)?;
    let body = class.child_by_field_name("body").expect("class has a body");
    let mut counts = Vec::new();
    let mut cursor = body.walk();
    for member in body.named_children(&mut cursor) {
        if matches!(member.kind(), "method_declaration" | "constructor_declaration") {
            let mut n = 0;
            let mut stack = vec![member];
            while let Some(node) = stack.pop() {
                if matches!(node.kind(), "method_invocation" | "explicit_constructor_invocation") {
                    n += 1;
                }
                let mut c = node.walk();
                stack.extend(node.children(&mut c));
            }
            counts.push(n);
        }
    }
    Ok(counts)
}

fn parse_tree(source: &str) -> Result<Tree, JavaError> {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled Java grammar matches the tree-sitter ABI");
    parser.parse(source, None).ok_or_else(|| JavaError::Parse {
        line: 1,
        column: 1,
        message: "parser produced no tree".into(),
    })
}

fn text<'a>(node: Node<'_>, src: &'a [u8]) -> &'a str {
    node.utf8_text(src).unwrap_or("")
}

fn has_modifier(node: Node<'_>, src: &[u8], modifier: &str) -> bool {
    let mut cursor = node.walk();
    let found = node
        .children(&mut cursor)
        .find(|c| c.kind() == "modifiers")
        .is_some_and(|m| {
            let mut c2 = m.walk();
            let hit = m.children(&mut c2).any(|t| text(t, src) == modifier);
            hit
        });
    found
}

fn top_level_class<'t>(tree: &'t Tree, src: &[u8]) -> Result<Node<'t>, JavaError> {
    let root = tree.root_node();
    let mut cursor = root.walk();
    let classes: Vec<Node<'t>> = root
        .named_children(&mut cursor)
        .filter(|n| n.kind() == "class_declaration")
        .collect();
    let chosen = classes
        .iter()
        .find(|c| has_modifier(**c, src, "public"))
        .or(classes.first())
        .copied();
    match chosen {
        Some(c) => {
            check_structure(root, c)?;
            Ok(c)
        }
        None if root.has_error() => Err(first_error(root).map_or(
            JavaError::Parse {
                line: 1,
                column: 1,
                message: "malformed source".into(),
            },
            |n| parse_error_at(n),
        )),
        None => {
            let mut cursor = root.walk();
            let other = root
                .named_children(&mut cursor)
                .find(|n| n.kind().ends_with("_declaration") && n.kind() != "package_declaration" && n.kind() != "import_declaration")
                .map(|n| n.kind().trim_end_matches("_declaration").replace('_', " "));
            Err(JavaError::UnsupportedConstruct(match other {
                Some(k) => format!("top-level {k} is not a class"),
                None => "no top-level class".into(),
            }))
        }
    }
}

fn parse_error_at(node: Node<'_>) -> JavaError {
    let p = node.start_position();
    JavaError::Parse {
        line: p.row + 1,
        column: p.column + 1,
        message: if node.is_missing() {
            format!("missing {}", node.kind())
        } else {
            "unexpected syntax".into()
        },
    }
}

fn first_error(node: Node<'_>) -> Option<Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    if !node.has_error() {
        return None;
    }
    let mut cursor = node.walk();
    let children: Vec<Node<'_>> = node.children(&mut cursor).collect();
    children.into_iter().find_map(first_error)
}

/// Errors inside method bodies are tolerated (handled per method); any
/// other error is fatal.
fn check_structure(root: Node<'_>, class: Node<'_>) -> Result<(), JavaError> {
    if !root.has_error() {
        return Ok(());
    }
    let mut bodies = Vec::new();
    if let Some(body) = class.child_by_field_name("body") {
        let mut cursor = body.walk();
        for m in body.named_children(&mut cursor) {
            if matches!(m.kind(), "method_declaration" | "constructor_declaration") {
                if let Some(b) = m.child_by_field_name("body") {
                    bodies.push(b.byte_range());
                }
            }
        }
    }
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if !node.has_error() {
            continue;
        }
        let r = node.byte_range();
        if bodies.iter().any(|b| b.start <= r.start && r.end <= b.end) {
            continue;
        }
        if node.is_error() || node.is_missing() {
            return Err(parse_error_at(node));
        }
        let mut cursor = node.walk();
        stack.extend(node.children(&mut cursor));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Signature {
    name: String,
    arity: usize,
    varargs: bool,
    constructor: bool,
    excluded: bool,
}

struct MethodDecl<'t> {
    node: Node<'t>,
    signature: Signature,
    text_blob: String,
}

struct Declarations<'t> {
    fields: BTreeSet<String>,
    methods: Vec<MethodDecl<'t>>,
}

fn collect_declarations<'t>(class: Node<'t>, src: &[u8]) -> Result<Declarations<'t>, JavaError> {
    let body = class.child_by_field_name("body").ok_or_else(|| JavaError::Parse {
        line: class.start_position().row + 1,
        column: class.start_position().column + 1,
        message: "class without body".into(),
    })?;
    let mut fields = BTreeSet::new();
    let mut methods = Vec::new();
    let mut comments: Vec<Node<'t>> = Vec::new();
    let mut cursor = body.walk();
    for member in body.named_children(&mut cursor) {
        match member.kind() {
            "line_comment" | "block_comment" => {
                comments.push(member);
                continue;
            }
            "field_declaration" if !has_modifier(member, src, "static") => {
                let mut c = member.walk();
                for d in member.children_by_field_name("declarator", &mut c) {
                    if let Some(name) = d.child_by_field_name("name") {
                        fields.insert(text(name, src).to_string());
                    }
                }
            }
            "method_declaration" | "constructor_declaration" => {
                let mut blob = String::new();
                for c in &comments {
                    blob.push_str(text(*c, src));
                    blob.push('\n');
                }
                blob.push_str(text(member, src));
                methods.push(MethodDecl {
                    node: member,
                    signature: signature(member, src),
                    text_blob: blob,
                });
            }
            _ => {}
        }
        comments.clear();
    }
    Ok(Declarations { fields, methods })
}

fn signature(node: Node<'_>, src: &[u8]) -> Signature {
    let name = node.child_by_field_name("name").map(|n| text(n, src)).unwrap_or("").to_string();
    let mut arity = 0;
    let mut varargs = false;
    if let Some(params) = node.child_by_field_name("parameters") {
        let mut cursor = params.walk();
        for p in params.named_children(&mut cursor) {
            match p.kind() {
                "formal_parameter" => arity += 1,
                "spread_parameter" => {
                    arity += 1;
                    varargs = true;
                }
                _ => {}
            }
        }
    }
    Signature {
        name,
        arity,
        varargs,
        constructor: node.kind() == "constructor_declaration",
        excluded: false,
    }
}

/// `T getX() { return x; }`, `boolean isX() { return this.x; }` or
/// `void setX(T v) { x = v; }` over an instance field.
fn is_accessor(decl: &MethodDecl<'_>, fields: &BTreeSet<String>, src: &[u8]) -> bool {
    let sig = &decl.signature;
    if sig.constructor {
        return false;
    }
    let Some(body) = decl.node.child_by_field_name("body") else {
        return false;
    };
    let mut cursor = body.walk();
    let stmts: Vec<Node<'_>> = body
        .named_children(&mut cursor)
        .filter(|n| !n.kind().ends_with("comment"))
        .collect();
    let [stmt] = stmts.as_slice() else {
        return false;
    };
    let field_ref = |n: Node<'_>| match n.kind() {
        "identifier" => fields.contains(text(n, src)),
        "field_access" => {
            n.child_by_field_name("object").is_some_and(|o| o.kind() == "this")
                && n.child_by_field_name("field").is_some_and(|f| fields.contains(text(f, src)))
        }
        _ => false,
    };
    let getter = (sig.name.starts_with("get") || sig.name.starts_with("is"))
        && sig.arity == 0
        && stmt.kind() == "return_statement"
        && stmt.named_child(0).is_some_and(field_ref);
    let setter = sig.name.starts_with("set")
        && sig.arity == 1
        && stmt.kind() == "expression_statement"
        && stmt.named_child(0).is_some_and(|e| {
            e.kind() == "assignment_expression" && e.child_by_field_name("left").is_some_and(field_ref)
        });
    getter || setter
}

struct BodyWalker<'a> {
    src: &'a [u8],
    fields: &'a BTreeSet<String>,
    methods: &'a [Signature],
    scopes: Vec<BTreeSet<String>>,
    accessed: BTreeSet<String>,
    /// Keyed by declaration index, before accessor exclusion.
    internal: BTreeMap<usize, u64>,
    external: u64,
    degraded: bool,
    heuristic_calls: usize,
}

impl<'a> BodyWalker<'a> {
    fn new(src: &'a [u8], fields: &'a BTreeSet<String>, methods: &'a [Signature]) -> Self {
        Self {
            src,
            fields,
            methods,
            scopes: vec![BTreeSet::new()],
            accessed: BTreeSet::new(),
            internal: BTreeMap::new(),
            external: 0,
            degraded: false,
            heuristic_calls: 0,
        }
    }

    fn declare(&mut self, name: Node<'_>) {
        let s = text(name, self.src).to_string();
        self.scopes.last_mut().expect("scope stack never empty").insert(s);
    }

    fn shadowed(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(name))
    }

    fn declare_parameters(&mut self, method: Node<'_>) {
        if let Some(params) = method.child_by_field_name("parameters") {
            self.visit(params);
        }
    }

    fn scoped(&mut self, node: Node<'_>) {
        self.scopes.push(BTreeSet::new());
        self.visit_children(node);
        self.scopes.pop();
    }

    fn visit_children(&mut self, node: Node<'_>) {
        let mut cursor = node.walk();
        let children: Vec<Node<'_>> = node.named_children(&mut cursor).collect();
        for c in children {
            self.visit(c);
        }
    }

    fn field_use(&mut self, name: &str) {
        if self.fields.contains(name) && !self.shadowed(name) {
            self.accessed.insert(name.to_string());
        }
    }

    fn visit(&mut self, node: Node<'_>) {
        match node.kind() {
            "block" | "constructor_body" | "switch_block" | "switch_block_statement_group" | "switch_rule"
            | "for_statement" | "enhanced_for_statement" | "catch_clause" | "try_with_resources_statement"
            | "class_body" | "method_declaration" | "constructor_declaration" => self.scoped(node),
            "lambda_expression" => {
                self.scopes.push(BTreeSet::new());
                if let Some(p) = node.child_by_field_name("parameters") {
                    if p.kind() == "identifier" {
                        self.declare(p);
                    } else {
                        self.visit(p);
                    }
                }
                if let Some(b) = node.child_by_field_name("body") {
                    self.visit(b);
                }
                self.scopes.pop();
            }
            "inferred_parameters" => {
                let mut cursor = node.walk();
                let ids: Vec<Node<'_>> = node.named_children(&mut cursor).collect();
                for id in ids {
                    self.declare(id);
                }
            }
            "variable_declarator" => {
                if let Some(v) = node.child_by_field_name("value") {
                    self.visit(v);
                }
                if let Some(name) = node.child_by_field_name("name") {
                    self.declare(name);
                }
            }
            "formal_parameter" | "catch_formal_parameter" | "resource" => {
                if let Some(v) = node.child_by_field_name("value") {
                    self.visit(v);
                }
                if let Some(name) = node.child_by_field_name("name") {
                    self.declare(name);
                } else {
                    self.visit_children(node);
                }
            }
            "method_invocation" => {
                let object = node.child_by_field_name("object");
                let argc = node.child_by_field_name("arguments").map_or(0, count_arguments);
                let name = node.child_by_field_name("name").map(|n| text(n, self.src)).unwrap_or("");
                let target = match object {
                    None => self.resolve(name, Some(argc), false),
                    Some(o) if o.kind() == "this" => self.resolve(name, Some(argc), false),
                    Some(_) => None,
                };
                self.record(target);
                if let Some(o) = object {
                    self.visit(o);
                }
                if let Some(a) = node.child_by_field_name("arguments") {
                    self.visit(a);
                }
            }
            "explicit_constructor_invocation" => {
                let argc = node.child_by_field_name("arguments").map_or(0, count_arguments);
                let own = node.child_by_field_name("object").is_none()
                    && node.child_by_field_name("constructor").is_some_and(|c| c.kind() == "this");
                let target = if own { self.resolve("", Some(argc), true) } else { None };
                self.record(target);
                if let Some(o) = node.child_by_field_name("object") {
                    self.visit(o);
                }
                if let Some(a) = node.child_by_field_name("arguments") {
                    self.visit(a);
                }
            }
            "field_access" => {
                let object = node.child_by_field_name("object");
                match object {
                    Some(o) if o.kind() == "this" => {
                        if let Some(f) = node.child_by_field_name("field") {
                            let name = text(f, self.src);
                            if self.fields.contains(name) {
                                self.accessed.insert(name.to_string());
                            }
                        }
                    }
                    Some(o) => self.visit(o),
                    None => {}
                }
            }
            "identifier" => {
                let name = text(node, self.src).to_string();
                self.field_use(&name);
            }
            "method_reference" => {
                if let Some(first) = node.named_child(0) {
                    if first.kind() != "this" && first.kind() != "super" {
                        self.visit(first);
                    }
                }
            }
            "labeled_statement" | "break_statement" | "continue_statement" => {
                let mut cursor = node.walk();
                let children: Vec<Node<'_>> = node.named_children(&mut cursor).filter(|c| c.kind() != "identifier").collect();
                for c in children {
                    self.visit(c);
                }
            }
            "marker_annotation" | "annotation" | "type_identifier" | "scoped_type_identifier" | "generic_type"
            | "line_comment" | "block_comment" => {}
            "ERROR" => {
                self.degraded = true;
                self.scan_error(node);
                self.visit_children(node);
            }
            _ => {
                if node.is_missing() {
                    self.degraded = true;
                }
                self.visit_children(node);
            }
        }
    }

    /// Fallback inside unparsed regions: a bare identifier followed by `(`.
    fn scan_error(&mut self, node: Node<'_>) {
        let mut cursor = node.walk();
        let children: Vec<Node<'_>> = node.children(&mut cursor).collect();
        for (i, c) in children.iter().enumerate() {
            let next_is_paren = children.get(i + 1).is_some_and(|n| n.kind() == "(");
            let after_new = i > 0 && children[i - 1].kind() == "new";
            if c.kind() == "identifier" && next_is_paren && !after_new {
                let name = text(*c, self.src);
                let qualified = i > 0 && children[i - 1].kind() == ".";
                let target = if qualified { None } else { self.resolve(name, None, false) };
                self.record(target);
                self.heuristic_calls += 1;
            }
        }
    }

    fn record(&mut self, target: Option<usize>) {
        match target {
            Some(t) => *self.internal.entry(t).or_default() += 1,
            None => self.external += 1,
        }
    }

    /// Lowest-index method with this name (or any constructor when
    /// `constructor` is set) and a compatible argument count. Exact arity
    /// wins over a varargs match; `argc = None` matches any arity.
    fn resolve(&self, name: &str, argc: Option<usize>, constructor: bool) -> Option<usize> {
        let named = |s: &Signature| s.constructor == constructor && (constructor || s.name == name);
        let exact = self
            .methods
            .iter()
            .position(|s| named(s) && argc.is_none_or(|a| a == s.arity));
        exact.or_else(|| {
            let a = argc?;
            self.methods
                .iter()
                .position(|s| named(s) && s.varargs && a + 1 >= s.arity)
        })
    }
}

fn count_arguments(args: Node<'_>) -> usize {
    let mut cursor = args.walk();
    let n = args
        .named_children(&mut cursor)
        .filter(|c| !c.kind().ends_with("comment"))
        .count();
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_two_method_example() {
        let f = parse_class("class C { int x; void a(){x=1; b();} void b(){} }").unwrap();
        assert_eq!(f.class_name, "C");
        assert_eq!(f.len(), 2);
        let a = &f.methods[0];
        assert_eq!(a.accessed_vars.iter().collect::<Vec<_>>(), ["x"]);
        assert_eq!(a.internal_calls, BTreeMap::from([(1, 1)]));
        assert_eq!(a.external_call_count, 0);
        let b = &f.methods[1];
        assert!(b.accessed_vars.is_empty() && b.internal_calls.is_empty());
        assert_eq!(b.external_call_count, 0);
    }

    #[test]
    fn println_is_external() {
        let f = parse_class(r#"class C { void a(){ System.out.println("hi"); } }"#).unwrap();
        assert!(f.methods[0].internal_calls.is_empty());
        assert_eq!(f.methods[0].external_call_count, 1);
    }

    #[test]
    fn empty_class() {
        let f = parse_class("public class Empty { }").unwrap();
        assert!(f.methods.is_empty());
    }

    #[test]
    fn shadowing_this_and_static() {
        let src = r#"
            class C {
                int x; int y; static int COUNT;
                C(int x) { this.x = x; COUNT++; }
                void a(int y) { int x = 2; y++; }
                void b() { for (int y = 0; y < 3; y++) {} x = y; }
                int c() { return other.x + x; }
            }"#;
        let f = parse_class(src).unwrap();
        assert_eq!(f.instance_vars.iter().collect::<Vec<_>>(), ["x", "y"]);
        let vars = |i: usize| f.methods[i].accessed_vars.iter().cloned().collect::<Vec<_>>();
        assert_eq!(vars(0), ["x"]);
        assert!(vars(1).is_empty());
        assert_eq!(vars(2), ["x", "y"]);
        assert_eq!(vars(3), ["x"]);
    }

    #[test]
    fn resolution_by_arity_receiver_and_varargs() {
        let src = r#"
            class C {
                C() { this(1); }
                C(int a) { super(); }
                void f() {}
                void f(int a) {}
                void g(String... xs) {}
                void h() { f(); f(2); this.f(); other.f(); g(); g("a", "b"); h(); super.f(); }
            }"#;
        let f = parse_class(src).unwrap();
        assert_eq!(f.methods[0].internal_calls, BTreeMap::from([(1, 1)]));
        assert_eq!(f.methods[1].external_call_count, 1);
        let h = &f.methods[5];
        assert_eq!(h.internal_calls, BTreeMap::from([(2, 2), (3, 1), (4, 2), (5, 1)]));
        assert_eq!(h.external_call_count, 2);
    }

    #[test]
    fn anonymous_class_and_lambda_are_folded() {
        let src = r#"
            class C {
                int x;
                void run() {}
                void a() {
                    Runnable r = new Runnable() { public void run() { x++; log(); } };
                    java.util.function.IntUnaryOperator g = x -> x + 1;
                    run();
                }
            }"#;
        let f = parse_class(src).unwrap();
        let a = &f.methods[1];
        assert!(a.accessed_vars.contains("x"));
        assert_eq!(a.internal_calls, BTreeMap::from([(0, 1)]));
        assert_eq!(a.external_call_count, 1);
        assert!(a.text_blob.contains("log()"));
    }

    #[test]
    fn comments_land_in_text_blob() {
        let src = "class C {\n int z;\n /** Parses the header. */\n void a() { /* inner */ }\n void b() {} }";
        let f = parse_class(src).unwrap();
        assert!(f.methods[0].text_blob.starts_with("/** Parses the header. */"));
        assert!(f.methods[0].text_blob.contains("inner"));
        assert!(!f.methods[1].text_blob.contains("Parses"));
    }

    #[test]
    fn rejects_non_classes_and_garbage() {
        assert!(matches!(
            parse_class("interface I { void a(); }"),
            Err(JavaError::UnsupportedConstruct(_))
        ));
        assert!(matches!(parse_class("enum E { A, B }"), Err(JavaError::UnsupportedConstruct(_))));
        match parse_class("class C {\n  void a( {\n}") {
            Err(JavaError::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn prefers_public_class() {
        let f = parse_class("class Helper { void h(){} }\npublic class Main { void m(){} void n(){} }").unwrap();
        assert_eq!(f.class_name, "Main");
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn accessor_exclusion() {
        let src = r#"
            class C {
                int x;
                int getX() { return x; }
                void setX(int v) { this.x = v; }
                void work() { setX(getX() + 1); }
            }"#;
        let all = parse_class(src).unwrap();
        assert_eq!(all.len(), 3);
        let p = parse_class_with(src, "C.java", &ParseOptions { exclude_accessors: true }).unwrap();
        assert_eq!(p.facts.len(), 1);
        assert_eq!(p.report.excluded_accessors, ["getX", "setX"]);
        assert_eq!(p.facts.methods[0].external_call_count, 2);
        assert_eq!(p.facts.methods[0].id, 0);
        p.facts.validate().unwrap();
    }

    #[test]
    fn conservation_against_independent_counter() {
        let src = r#"
            class C {
                int a, b;
                C() { this(0); }
                C(int v) { super(); a = v; }
                void p() { q(); q(); r(1); System.out.println(a); list().size(); }
                void q() { p(); new Object().hashCode(); }
                int r(int k) { return k > 0 ? r(k - 1) : Math.max(a, b); }
                java.util.List<Integer> list() { return java.util.Collections.emptyList(); }
            }"#;
        let f = parse_class(src).unwrap();
        let counts = count_invocation_sites(src).unwrap();
        assert_eq!(counts.len(), f.len());
        for (m, &n) in f.methods.iter().zip(&counts) {
            assert_eq!(m.call_site_total(), n, "method {}", m.name);
        }
    }

    #[test]
    fn deterministic() {
        let src = "class C { int x; void a(){ x++; b(); } void b(){ a(); } }";
        assert_eq!(parse_class(src).unwrap(), parse_class(src).unwrap());
    }
}

//! Language-neutral facts about one class: its methods, the instance
//! variables each method touches, and intra/extra-class call counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Index of a method within its class, equal to its declaration position.
pub type MethodId = usize;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MethodFacts {
    pub id: MethodId,
    pub name: String,
    pub arity: usize,
    /// Instance variables read or written by the body.
    pub accessed_vars: BTreeSet<String>,
    /// Callee id → number of call sites. Recursive self-calls are recorded.
    pub internal_calls: BTreeMap<MethodId, u64>,
    /// Call sites whose target is not a method of this class.
    pub external_call_count: u64,
    /// Method source including its comments and doc comment.
    pub text_blob: String,
}

impl MethodFacts {
    pub fn new(id: MethodId, name: impl Into<String>, arity: usize) -> Self {
        Self {
            id,
            name: name.into(),
            arity,
            ..Self::default()
        }
    }

    pub fn internal_call_total(&self) -> u64 {
        self.internal_calls.values().sum()
    }

    pub fn call_site_total(&self) -> u64 {
        self.internal_call_total() + self.external_call_count
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassFacts {
    pub class_name: String,
    /// File path or URL plus revision.
    pub source_id: String,
    pub instance_vars: BTreeSet<String>,
    pub methods: Vec<MethodFacts>,
}

impl ClassFacts {
    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn method(&self, id: MethodId) -> Result<&MethodFacts> {
        self.methods.get(id).ok_or(Error::Index {
            id,
            len: self.methods.len(),
        })
    }

    pub fn check_id(&self, id: MethodId) -> Result<()> {
        self.method(id).map(|_| ())
    }

    /// Call sites in `from` that target `to`.
    pub fn calls(&self, from: MethodId, to: MethodId) -> u64 {
        self.methods
            .get(from)
            .and_then(|m| m.internal_calls.get(&to))
            .copied()
            .unwrap_or(0)
    }

    /// Incoming call sites per method, summed over every caller including
    /// the method itself.
    pub fn incoming_calls(&self) -> Vec<u64> {
        let mut incoming = vec![0u64; self.methods.len()];
        for m in &self.methods {
            for (&callee, &count) in &m.internal_calls {
                if let Some(slot) = incoming.get_mut(callee) {
                    *slot += count;
                }
            }
        }
        incoming
    }

    /// Checks the structural invariants: ids equal positions, accessed
    /// variables are declared, callee ids exist.
    pub fn validate(&self) -> Result<()> {
        let n = self.methods.len();
        for (pos, m) in self.methods.iter().enumerate() {
            if m.id != pos {
                return Err(Error::Facts(format!(
                    "methods[{pos}] has id {} (ids must equal array position)",
                    m.id
                )));
            }
            if let Some(v) = m.accessed_vars.iter().find(|v| !self.instance_vars.contains(*v)) {
                return Err(Error::Facts(format!(
                    "methods[{pos}] accesses undeclared instance variable `{v}`"
                )));
            }
            if let Some(&callee) = m.internal_calls.keys().find(|&&c| c >= n) {
                return Err(Error::Facts(format!(
                    "methods[{pos}] calls unknown method id {callee}"
                )));
            }
        }
        Ok(())
    }

    /// Returns the facts with methods reordered so that new method `i` is
    /// old method `perm[i]`; ids and call maps are rewritten accordingly.
    pub fn permuted(&self, perm: &[MethodId]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let methods = perm
            .iter()
            .enumerate()
            .map(|(new, &old)| {
                let m = &self.methods[old];
                MethodFacts {
                    id: new,
                    internal_calls: m
                        .internal_calls
                        .iter()
                        .map(|(&callee, &c)| (inverse[callee], c))
                        .collect(),
                    ..m.clone()
                }
            })
            .collect();
        Self {
            methods,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_method_class() -> ClassFacts {
        let mut a = MethodFacts::new(0, "a", 0);
        a.accessed_vars.insert("x".into());
        a.internal_calls.insert(1, 1);
        let b = MethodFacts::new(1, "b", 0);
        ClassFacts {
            class_name: "C".into(),
            source_id: "C.java".into(),
            instance_vars: ["x".into()].into_iter().collect(),
            methods: vec![a, b],
        }
    }

    #[test]
    fn incoming_includes_self_calls() {
        let mut f = two_method_class();
        f.methods[1].internal_calls.insert(1, 2);
        assert_eq!(f.incoming_calls(), vec![0, 3]);
        assert_eq!(f.calls(0, 1), 1);
        assert_eq!(f.calls(1, 0), 0);
    }

    #[test]
    fn validate_catches_bad_ids_and_vars() {
        let mut f = two_method_class();
        assert!(f.validate().is_ok());
        f.methods[1].id = 5;
        assert!(matches!(f.validate(), Err(Error::Facts(_))));
        let mut f = two_method_class();
        f.methods[0].accessed_vars.insert("ghost".into());
        assert!(matches!(f.validate(), Err(Error::Facts(_))));
        let mut f = two_method_class();
        f.methods[0].internal_calls.insert(9, 1);
        assert!(matches!(f.validate(), Err(Error::Facts(_))));
    }

    #[test]
    fn invalid_id_is_index_error() {
        let f = two_method_class();
        assert_eq!(f.method(2).unwrap_err(), Error::Index { id: 2, len: 2 });
    }

    #[test]
    fn permutation_rewrites_callees() {
        let f = two_method_class();
        let p = f.permuted(&[1, 0]);
        assert_eq!(p.methods[0].name, "b");
        assert_eq!(p.methods[1].internal_calls.get(&0), Some(&1));
        assert!(p.validate().is_ok());
    }
}

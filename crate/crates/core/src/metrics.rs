//! Cohesion (LCOM) and coupling (MPC) for a class and its proposed split.

use alloc::vec::Vec;

use crate::cluster::Partition;
use crate::error::{Error, Result};
use crate::facts::{ClassFacts, MethodFacts, MethodId};

/// `max(P − Q, 0)` where P counts method pairs sharing no instance variable
/// and Q counts pairs sharing at least one.
pub fn lcom(methods: &[&MethodFacts]) -> u64 {
    let mut disjoint = 0u64;
    let mut sharing = 0u64;
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            if a.accessed_vars.is_disjoint(&b.accessed_vars) {
                disjoint += 1;
            } else {
                sharing += 1;
            }
        }
    }
    disjoint.saturating_sub(sharing)
}

/// Call sites leaving the member set: every external call plus every
/// internal call whose callee is not a member.
pub fn mpc(members: &[MethodId], facts: &ClassFacts) -> Result<u64> {
    let mut inside = alloc::vec![false; facts.len()];
    for &m in members {
        facts.check_id(m)?;
        inside[m] = true;
    }
    let mut total = 0;
    for &m in members {
        let method = &facts.methods[m];
        total += method.external_call_count;
        total += method
            .internal_calls
            .iter()
            .filter(|(&callee, _)| !inside.get(callee).copied().unwrap_or(false))
            .map(|(_, &c)| c)
            .sum::<u64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubClassMetrics {
    pub index: usize,
    pub methods: Vec<MethodId>,
    pub lcom: u64,
    pub mpc: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_class: Vec<SubClassMetrics>,
    /// `(lcom, mpc)` of the unsplit class.
    pub original: (u64, u64),
    /// Arithmetic means of `(lcom, mpc)` over the sub-classes.
    pub averages: (f64, f64),
}

impl MetricsReport {
    pub fn k(&self) -> usize {
        self.per_class.len()
    }
}

pub fn evaluate(facts: &ClassFacts, partition: &Partition) -> Result<MetricsReport> {
    if partition.labels.len() != facts.len() {
        return Err(Error::DimensionMismatch {
            expected: facts.len(),
            found: partition.labels.len(),
        });
    }
    if !partition.is_well_formed() {
        return Err(Error::Config(alloc::string::String::from(
            "partition labels are not contiguous from 0",
        )));
    }
    let all: Vec<&MethodFacts> = facts.methods.iter().collect();
    let all_ids: Vec<MethodId> = (0..facts.len()).collect();
    let original = (lcom(&all), mpc(&all_ids, facts)?);

    let mut per_class = Vec::with_capacity(partition.k);
    for c in 0..partition.k {
        let ids = partition.members(c);
        let ms: Vec<&MethodFacts> = ids.iter().map(|&i| &facts.methods[i]).collect();
        per_class.push(SubClassMetrics {
            index: c,
            lcom: lcom(&ms),
            mpc: mpc(&ids, facts)?,
            methods: ids,
        });
    }
    let k = per_class.len().max(1) as f64;
    let averages = (
        per_class.iter().map(|s| s.lcom as f64).sum::<f64>() / k,
        per_class.iter().map(|s| s.mpc as f64).sum::<f64>() / k,
    );
    Ok(MetricsReport {
        per_class,
        original,
        averages,
    })
}

/// Internal call sites whose caller and callee land in different sub-classes.
pub fn severed_calls(facts: &ClassFacts, labels: &[usize]) -> u64 {
    facts
        .methods
        .iter()
        .flat_map(|m| m.internal_calls.iter().map(move |(&to, &c)| (m.id, to, c)))
        .filter(|&(from, to, _)| labels[from] != labels[to])
        .map(|(_, _, c)| c)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn method(id: usize, vars: &[&str]) -> MethodFacts {
        let mut m = MethodFacts::new(id, alloc::format!("m{id}"), 0);
        m.accessed_vars = vars.iter().map(|v| v.to_string()).collect();
        m
    }

    fn class(methods: Vec<MethodFacts>) -> ClassFacts {
        ClassFacts {
            class_name: "C".into(),
            source_id: "C.java".into(),
            instance_vars: methods.iter().flat_map(|m| m.accessed_vars.iter().cloned()).collect(),
            methods,
        }
    }

    #[test]
    fn lcom_examples() {
        let a = method(0, &["x", "y"]);
        let b = method(1, &["y", "z"]);
        let c = method(2, &["w"]);
        assert_eq!(lcom(&[&a]), 0);
        assert_eq!(lcom(&[]), 0);
        assert_eq!(lcom(&[&a, &b, &c]), 1);
        let x: Vec<MethodFacts> = (0..3).map(|i| method(i, &["x"])).collect();
        assert_eq!(lcom(&[&x[0], &x[1], &x[2]]), 0);
    }

    #[test]
    fn mpc_examples() {
        let mut m1 = method(0, &[]);
        m1.external_call_count = 2;
        m1.internal_calls.insert(1, 1);
        let facts = class(vec![m1, method(1, &[])]);
        assert_eq!(mpc(&[0], &facts).unwrap(), 3);
        assert_eq!(mpc(&[1], &facts).unwrap(), 0);
        assert_eq!(mpc(&[0, 1], &facts).unwrap(), 2);
        assert_eq!(mpc(&[5], &facts).unwrap_err(), Error::Index { id: 5, len: 2 });

        let quiet = class(vec![method(0, &[]), method(1, &[])]);
        assert_eq!(mpc(&[0, 1], &quiet).unwrap(), 0);
    }

    #[test]
    fn original_mpc_is_external_total() {
        let methods: Vec<MethodFacts> = (0..34)
            .map(|i| {
                let mut m = method(i, &[]);
                m.external_call_count = 1;
                m.internal_calls.insert((i + 1) % 34, 3);
                m
            })
            .collect();
        let facts = class(methods);
        let ids: Vec<usize> = (0..34).collect();
        assert_eq!(mpc(&ids, &facts).unwrap(), 34);
    }

    #[test]
    fn evaluate_examples() {
        let facts = class(vec![method(0, &["x", "y"]), method(1, &["y", "z"]), method(2, &["w"])]);
        let single = evaluate(&facts, &Partition::single(3)).unwrap();
        assert_eq!(single.k(), 1);
        assert_eq!(single.original, (1, 0));
        assert_eq!(single.averages, (1.0, 0.0));

        let split = evaluate(&facts, &Partition::from_labels(&[0, 0, 1])).unwrap();
        assert_eq!(split.k(), 2);
        assert_eq!(split.per_class[0].lcom, 0);
        assert_eq!(split.per_class[1].lcom, 0);
        assert_eq!(split.per_class[0].methods, [0, 1]);
        assert_eq!(split.averages, (0.0, 0.0));
    }

    fn lcom_oracle(facts: &ClassFacts, ids: &[usize]) -> i64 {
        let mut p = 0i64;
        let mut q = 0i64;
        for &i in ids {
            for &j in ids {
                if i < j {
                    let shared = facts.methods[i]
                        .accessed_vars
                        .iter()
                        .any(|v| facts.methods[j].accessed_vars.contains(v));
                    if shared {
                        q += 1
                    } else {
                        p += 1
                    }
                }
            }
        }
        (p - q).max(0)
    }

    fn arb_facts() -> impl Strategy<Value = (ClassFacts, Vec<usize>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::btree_set(0u8..6, 0..4), n),
                proptest::collection::vec(proptest::collection::vec((0..n, 1u64..4), 0..4), n),
                proptest::collection::vec(0u64..5, n),
                proptest::collection::vec(0usize..3, n),
            )
                .prop_map(move |(vars, calls, ext, labels)| {
                    let methods = (0..n)
                        .map(|i| {
                            let mut m = MethodFacts::new(i, alloc::format!("m{i}"), 0);
                            m.accessed_vars = vars[i].iter().map(|v| alloc::format!("f{v}")).collect();
                            for &(to, c) in &calls[i] {
                                *m.internal_calls.entry(to).or_default() += c;
                            }
                            m.external_call_count = ext[i];
                            m
                        })
                        .collect();
                    (class(methods), labels)
                })
        })
    }

    proptest! {
        #[test]
        fn lcom_matches_oracle((facts, labels) in arb_facts()) {
            for c in 0..3 {
                let ids: Vec<usize> = (0..facts.len()).filter(|&i| labels[i] == c).collect();
                let ms: Vec<&MethodFacts> = ids.iter().map(|&i| &facts.methods[i]).collect();
                prop_assert_eq!(lcom(&ms) as i64, lcom_oracle(&facts, &ids));
            }
        }

        #[test]
        fn call_conservation((facts, labels) in arb_facts()) {
            let p = Partition::from_labels(&labels);
            let report = evaluate(&facts, &p).unwrap();
            let summed: u64 = report.per_class.iter().map(|s| s.mpc).sum();
            prop_assert_eq!(summed, report.original.1 + severed_calls(&facts, &p.labels));
        }

        #[test]
        fn full_class_mpc_relabel_invariant((facts, _) in arb_facts(), seed in any::<u64>()) {
            let n = facts.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let all: Vec<usize> = (0..n).collect();
            prop_assert_eq!(mpc(&all, &facts).unwrap(), mpc(&all, &facts.permuted(&perm)).unwrap());
        }
    }
}

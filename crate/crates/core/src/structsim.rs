//! Structural similarity between methods of one class.
//!
//! * SSM: Jaccard overlap of the instance variables two methods access.
//! * CDM: call-based dependence, `calls(i, j) / calls_in(j)`, maximized over
//!   both directions.
//!
//! Their weighted combination decides the edges of the class graph.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::facts::{ClassFacts, MethodId};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityKind {
    Ssm,
    Cdm,
    Csm,
    Combined,
    Latent,
}

impl SimilarityKind {
    /// Diagonal value by convention: 1 for cosine-based kinds, 0 otherwise.
    pub fn diagonal(self) -> f64 {
        match self {
            Self::Csm | Self::Latent => 1.0,
            Self::Ssm | Self::Cdm | Self::Combined => 0.0,
        }
    }
}

/// Symmetric method × method score matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub kind: SimilarityKind,
    pub values: Matrix,
}

impl SimilarityMatrix {
    pub fn new(kind: SimilarityKind, values: Matrix) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::DimensionMismatch {
                expected: values.rows(),
                found: values.cols(),
            });
        }
        Ok(Self { kind, values })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    fn from_pairs(n: usize, kind: SimilarityKind, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Matrix::zeros(n, n);
        for i in 0..n {
            values[(i, i)] = kind.diagonal();
            for j in (i + 1)..n {
                let v = f(i, j);
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Self { kind, values }
    }
}

/// Binary method graph plus node features, the input of the autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassGraph {
    /// n × n, symmetric, 0/1 entries, zero diagonal.
    pub adjacency: Matrix,
    /// n × d, row i is the initial feature vector of method i.
    pub features: Matrix,
    /// The combined structural scores the adjacency was thresholded from.
    pub edge_weights: Matrix,
}

impl ClassGraph {
    pub fn new(combined: &SimilarityMatrix, threshold: f64, features: Matrix) -> Result<Self> {
        if features.rows() != combined.n() {
            return Err(Error::DimensionMismatch {
                expected: combined.n(),
                found: features.rows(),
            });
        }
        Ok(Self {
            adjacency: build_adjacency(combined, threshold)?,
            features,
            edge_weights: combined.values.clone(),
        })
    }

    pub fn edge_count(&self) -> usize {
        (self.adjacency.sum() / 2.0) as usize
    }
}

fn check_pair(facts: &ClassFacts, i: MethodId, j: MethodId) -> Result<()> {
    facts.check_id(i)?;
    facts.check_id(j)
}

/// Jaccard overlap of accessed instance variables; 0 when neither method
/// touches any.
pub fn ssm(facts: &ClassFacts, i: MethodId, j: MethodId) -> Result<f64> {
    check_pair(facts, i, j)?;
    let vi = &facts.methods[i].accessed_vars;
    let vj = &facts.methods[j].accessed_vars;
    let inter = vi.intersection(vj).count();
    let union = vi.len() + vj.len() - inter;
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

fn cdm_with(facts: &ClassFacts, incoming: &[u64], i: MethodId, j: MethodId) -> f64 {
    let directed = |from: MethodId, to: MethodId| match incoming[to] {
        0 => 0.0,
        total => facts.calls(from, to) as f64 / total as f64,
    };
    directed(i, j).max(directed(j, i))
}

/// Call-based dependence, `max(CDM(i→j), CDM(j→i))`.
pub fn cdm(facts: &ClassFacts, i: MethodId, j: MethodId) -> Result<f64> {
    check_pair(facts, i, j)?;
    Ok(cdm_with(facts, &facts.incoming_calls(), i, j))
}

pub fn ssm_matrix(facts: &ClassFacts) -> SimilarityMatrix {
    SimilarityMatrix::from_pairs(facts.len(), SimilarityKind::Ssm, |i, j| {
        ssm(facts, i, j).unwrap_or(0.0)
    })
}

pub fn cdm_matrix(facts: &ClassFacts) -> SimilarityMatrix {
    let incoming = facts.incoming_calls();
    SimilarityMatrix::from_pairs(facts.len(), SimilarityKind::Cdm, |i, j| {
        cdm_with(facts, &incoming, i, j)
    })
}

/// Convex weights for combining SSM and CDM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralWeights {
    pub ssm: f64,
    pub cdm: f64,
}

impl Default for StructuralWeights {
    fn default() -> Self {
        Self { ssm: 0.5, cdm: 0.5 }
    }
}

pub(crate) fn check_convex(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Weight(format!(
            "weights {weights:?} must be non-negative and sum to 1"
        )));
    }
    Ok(())
}

/// `w_ssm · SSM + w_cdm · CDM` off the diagonal, 0 on it.
pub fn structural_matrix(facts: &ClassFacts, weights: StructuralWeights) -> Result<SimilarityMatrix> {
    check_convex(&[weights.ssm, weights.cdm])?;
    let s = ssm_matrix(facts);
    let c = cdm_matrix(facts);
    Ok(SimilarityMatrix::from_pairs(
        facts.len(),
        SimilarityKind::Combined,
        |i, j| weights.ssm * s.get(i, j) + weights.cdm * c.get(i, j),
    ))
}

/// Edge `(i, j)` iff the combined score is strictly above `threshold`.
pub fn build_adjacency(combined: &SimilarityMatrix, threshold: f64) -> Result<Matrix> {
    if combined.kind != SimilarityKind::Combined {
        return Err(Error::Config(format!(
            "adjacency needs a combined structural matrix, got {:?}",
            combined.kind
        )));
    }
    if !(threshold >= 0.0) {
        return Err(Error::Config(format!("edge threshold {threshold} must be >= 0")));
    }
    let n = combined.n();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i != j && combined.get(i, j) > threshold && combined.get(j, i) > threshold {
            1.0
        } else {
            0.0
        }
    }))
}

/// Method ids adjacent to `i`.
pub fn neighbors(adjacency: &Matrix, i: usize) -> Vec<usize> {
    (0..adjacency.cols()).filter(|&j| adjacency[(i, j)] != 0.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::MethodFacts;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn with_vars(sets: &[&[&str]]) -> ClassFacts {
        let mut f = ClassFacts::default();
        for (id, vars) in sets.iter().enumerate() {
            let mut m = MethodFacts::new(id, format!("m{id}"), 0);
            for v in *vars {
                f.instance_vars.insert(v.to_string());
                m.accessed_vars.insert(v.to_string());
            }
            f.methods.push(m);
        }
        f
    }

    #[test]
    fn ssm_examples() {
        let f = with_vars(&[&[], &[], &["a", "b"], &["b", "c"], &["a", "b"]]);
        assert_eq!(ssm(&f, 0, 1).unwrap(), 0.0);
        assert_eq!(ssm(&f, 2, 3).unwrap(), 1.0 / 3.0);
        assert_eq!(ssm(&f, 2, 4).unwrap(), 1.0);
        assert_eq!(ssm(&f, 2, 3).unwrap(), ssm(&f, 3, 2).unwrap());
        assert_eq!(ssm(&f, 0, 9).unwrap_err(), Error::Index { id: 9, len: 5 });
    }

    fn with_calls(n: usize, calls: &[(usize, usize, u64)]) -> ClassFacts {
        let mut f = with_vars(&vec![&[][..]; n]);
        for &(from, to, c) in calls {
            *f.methods[from].internal_calls.entry(to).or_insert(0) += c;
        }
        f
    }

    #[test]
    fn cdm_examples() {
        let f = with_calls(3, &[]);
        assert_eq!(cdm(&f, 0, 1).unwrap(), 0.0);

        // calls(0,1)=2, calls_in(1)=4 via another caller, calls(1,0)=0
        let f = with_calls(3, &[(0, 1, 2), (2, 1, 2)]);
        assert_eq!(cdm(&f, 0, 1).unwrap(), 0.5);

        // calls(0,1)=1=calls_in(1); calls(1,0)=1, calls_in(0)=2
        let f = with_calls(3, &[(0, 1, 1), (1, 0, 1), (2, 0, 1)]);
        assert_eq!(cdm(&f, 0, 1).unwrap(), 1.0);
        assert_eq!(cdm(&f, 1, 0).unwrap(), 1.0);
    }

    #[test]
    fn self_calls_count_as_incoming() {
        let f = with_calls(2, &[(0, 1, 1), (1, 1, 1)]);
        assert_eq!(cdm(&f, 0, 1).unwrap(), 0.5);
    }

    #[test]
    fn combined_examples() {
        // ssm = 1, cdm = 0
        let f = with_vars(&[&["a"], &["a"]]);
        let m = structural_matrix(&f, StructuralWeights::default()).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(0, 0), 0.0);

        let f = with_vars(&[&[], &[]]);
        let m = structural_matrix(&f, StructuralWeights::default()).unwrap();
        assert_eq!(m.values, Matrix::zeros(2, 2));

        // ssm = 1/3, cdm = 0.5
        let mut f = with_vars(&[&["a", "b"], &["b", "c"], &[]]);
        f.methods[0].internal_calls.insert(1, 1);
        f.methods[2].internal_calls.insert(1, 1);
        let m = structural_matrix(&f, StructuralWeights::default()).unwrap();
        assert!((m.get(0, 1) - 5.0 / 12.0).abs() < 1e-15);

        let bad = StructuralWeights { ssm: 0.7, cdm: 0.7 };
        assert!(matches!(structural_matrix(&f, bad), Err(Error::Weight(_))));
    }

    #[test]
    fn adjacency_examples() {
        let zero = SimilarityMatrix::new(SimilarityKind::Combined, Matrix::zeros(3, 3)).unwrap();
        assert_eq!(build_adjacency(&zero, 0.0).unwrap(), Matrix::zeros(3, 3));

        let mut v = Matrix::zeros(2, 2);
        v[(0, 1)] = 0.4;
        v[(1, 0)] = 0.4;
        let m = SimilarityMatrix::new(SimilarityKind::Combined, v).unwrap();
        assert_eq!(build_adjacency(&m, 0.0).unwrap()[(0, 1)], 1.0);
        assert_eq!(build_adjacency(&m, 0.5).unwrap()[(0, 1)], 0.0);

        let csm = SimilarityMatrix::new(SimilarityKind::Csm, Matrix::identity(2)).unwrap();
        assert!(build_adjacency(&csm, 0.0).is_err());
    }

    pub(crate) fn arb_facts() -> impl Strategy<Value = ClassFacts> {
        (1usize..10, 1usize..6).prop_flat_map(|(n, nvars)| {
            let vars = proptest::collection::vec(proptest::collection::btree_set(0..nvars, 0..4), n);
            let calls = proptest::collection::vec((0..n, 0..n, 1u64..4), 0..(3 * n));
            (vars, calls).prop_map(move |(vars, calls)| {
                let mut f = ClassFacts::default();
                f.instance_vars = (0..nvars).map(|v| format!("v{v}")).collect();
                for (id, vs) in vars.into_iter().enumerate() {
                    let mut m = MethodFacts::new(id, format!("m{id}"), 0);
                    m.accessed_vars = vs.into_iter().map(|v| format!("v{v}")).collect();
                    f.methods.push(m);
                }
                for (a, b, c) in calls {
                    *f.methods[a].internal_calls.entry(b).or_insert(0) += c;
                }
                f
            })
        })
    }

    proptest! {
        #[test]
        fn matrices_symmetric_and_bounded(f in arb_facts()) {
            for m in [ssm_matrix(&f), cdm_matrix(&f), structural_matrix(&f, StructuralWeights::default()).unwrap()] {
                prop_assert!(m.values.is_symmetric(0.0));
                prop_assert!(m.values.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }

        #[test]
        fn edges_iff_any_structural_relation(f in arb_facts()) {
            let comb = structural_matrix(&f, StructuralWeights::default()).unwrap();
            let adj = build_adjacency(&comb, 0.0).unwrap();
            for i in 0..f.len() {
                for j in 0..f.len() {
                    let shares = f.methods[i].accessed_vars.intersection(&f.methods[j].accessed_vars).next().is_some();
                    let calls = f.calls(i, j) > 0 || f.calls(j, i) > 0;
                    let expected = i != j && (shares || calls);
                    prop_assert_eq!(adj[(i, j)] == 1.0, expected);
                }
            }
        }

        #[test]
        fn relabeling_permutes_matrices(f in arb_facts(), seed in any::<u64>()) {
            let n = f.len();
            let mut perm: Vec<usize> = (0..n).collect();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let p = f.permuted(&perm);
            let a = structural_matrix(&f, StructuralWeights::default()).unwrap();
            let b = structural_matrix(&p, StructuralWeights::default()).unwrap();
            prop_assert_eq!(b.values, a.values.permute_symmetric(&perm));
        }
    }
}

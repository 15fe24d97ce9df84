use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{GenError, Materialized, RaySpec, TreeGenerator};
use crate::vertex::{Address, VertexId};

/// A sequence of distinct vertices. Construction rejects repeated terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexSequence {
    terms: Vec<VertexId>,
}

impl VertexSequence {
    pub fn new(terms: Vec<VertexId>) -> Result<Self, GenError> {
        let mut seen = HashSet::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if !seen.insert(t) {
                return Err(GenError::RepeatedTerm {
                    index: i + 1,
                    vertex: t.clone(),
                });
            }
        }
        Ok(VertexSequence { terms })
    }

    pub fn terms(&self) -> &[VertexId] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term `n`, 1-based.
    pub fn term(&self, n: usize) -> &VertexId {
        &self.terms[n - 1]
    }

    pub fn prefix(&self, n: usize) -> VertexSequence {
        VertexSequence {
            terms: self.terms[..n.min(self.terms.len())].to_vec(),
        }
    }
}

/// A lazily enumerated sequence of vertices of a generated tree.
///
/// JSON form: `{"kind": "ToothTips"}`, `{"kind": "RayVertices", "params": {"ray": {...}, "from": 1}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum SequenceSpec {
    /// `v_from, v_{from+1}, ...` along a ray
    RayVertices {
        ray: RaySpec,
        from: u64,
    },
    /// tips of the arms of the star at the root, arm by arm
    ArmTips,
    /// tips of the teeth of the comb at the root, along the spine
    ToothTips,
    /// all vertices in materialization order
    TruncationOrder,
    /// round-robin over the parts: `a_1, b_1, a_2, b_2, ...`
    Interleave {
        parts: Vec<SequenceSpec>,
    },
    /// terms `offset + 1, offset + 1 + step, ...` of `inner`
    Stride {
        inner: Box<SequenceSpec>,
        step: u64,
        offset: u64,
    },
    Explicit {
        terms: Vec<Address>,
    },
}

impl SequenceSpec {
    /// Term `n` (1-based), or `None` past the end of a finite sequence.
    pub fn term(&self, gen: &TreeGenerator, order: &[Address], n: u64) -> Result<Option<Address>, GenError> {
        if n == 0 {
            return Ok(None);
        }
        Ok(match self {
            SequenceSpec::RayVertices { ray, from } => Some(ray.vertex(from.max(&1) + n - 1)),
            SequenceSpec::ArmTips => Some(
                gen.arm_tip(n)
                    .ok_or_else(|| GenError::SequenceUndefined("ArmTips".into()))?,
            ),
            SequenceSpec::ToothTips => match gen.tooth_tip(n) {
                Some(t) => Some(t),
                None if gen.tooth_tip(1).is_some() => None,
                None => return Err(GenError::SequenceUndefined("ToothTips".into())),
            },
            SequenceSpec::TruncationOrder => order.get((n - 1) as usize).cloned(),
            SequenceSpec::Interleave { parts } => {
                if parts.is_empty() {
                    return Ok(None);
                }
                let k = parts.len() as u64;
                parts[((n - 1) % k) as usize].term(gen, order, (n - 1) / k + 1)?
            }
            SequenceSpec::Stride { inner, step, offset } => {
                inner.term(gen, order, offset + 1 + (n - 1) * step.max(&1))?
            }
            SequenceSpec::Explicit { terms } => terms.get((n - 1) as usize).cloned(),
        })
    }

    /// The longest prefix whose terms all lie in the truncation.
    pub fn materialize(&self, gen: &TreeGenerator, mat: &Materialized) -> Result<VertexSequence, GenError> {
        VertexSequence::new(
            self.materialized_terms(gen, mat)?
                .into_iter()
                .map(VertexId::Addr)
                .collect(),
        )
    }

    pub(crate) fn materialized_terms(&self, gen: &TreeGenerator, mat: &Materialized) -> Result<Vec<Address>, GenError> {
        let mut terms = Vec::new();
        let mut seen = HashSet::new();
        let mut n = 1u64;
        while let Some(t) = self.term(gen, &mat.order, n)? {
            if !mat.contains(&t) {
                break;
            }
            if !seen.insert(t.clone()) {
                return Err(GenError::RepeatedTerm {
                    index: n as usize,
                    vertex: VertexId::Addr(t),
                });
            }
            terms.push(t);
            n += 1;
        }
        Ok(terms)
    }

    /// `(tip_1, v_2, tip_2, v_3, ...)` on the comb at the root.
    pub fn teeth_and_spine() -> Self {
        SequenceSpec::Interleave {
            parts: vec![
                SequenceSpec::ToothTips,
                SequenceSpec::RayVertices {
                    ray: RaySpec::new(Address::root(), 0),
                    from: 2,
                },
            ],
        }
    }
}

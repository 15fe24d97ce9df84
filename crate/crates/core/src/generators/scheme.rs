use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::label::Label;
use crate::vertex::{Address, VertexId};

/// The ray `start, start.d, start.d.d, ...` for a fixed child index `d`;
/// `vertex(1)` is `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RaySpec {
    pub start: Address,
    pub direction: u32,
}

impl RaySpec {
    pub fn new(start: Address, direction: u32) -> Self {
        RaySpec { start, direction }
    }

    pub fn vertex(&self, n: u64) -> Address {
        assert!(n >= 1, "ray indices start at 1");
        self.start.repeated(self.direction, n - 1)
    }

    /// `Some(n)` if `addr` is the `n`-th vertex of the ray.
    pub fn index_of(&self, addr: &Address) -> Option<u64> {
        let rest = addr.strip_prefix(&self.start)?;
        rest.as_uniform_run(self.direction).map(|j| j + 1)
    }

    /// Index of the ray vertex closest to `addr`. Vertices outside the
    /// subtree of `start` reach the ray through `start`.
    pub fn attachment(&self, addr: &Address) -> u64 {
        match addr.strip_prefix(&self.start) {
            Some(rest) => rest.split_leading(self.direction).0 + 1,
            None => 1,
        }
    }

    /// The ray with its first `n` vertices removed.
    pub fn tail(&self, n: u64) -> RaySpec {
        RaySpec::new(self.vertex(n + 1), self.direction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffRay {
    /// every vertex off the rays is labeled 1
    One,
    /// a vertex off the rays gets `1/n`, where `v_n` is where it attaches
    Attachment,
}

/// A component of `H - u` seen from `u`: the one containing its parent, or
/// the one through child `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKey {
    Parent,
    Child(u32),
}

impl ComponentKey {
    /// Component of `addr` around `hub`, or `None` for the hub itself.
    pub fn of(hub: &Address, addr: &Address) -> Option<ComponentKey> {
        if addr == hub {
            return None;
        }
        Some(match addr.strip_prefix(hub).and_then(|rest| rest.first_step()) {
            Some(c) => ComponentKey::Child(c),
            None => ComponentKey::Parent,
        })
    }
}

/// A vertex labeling of a generated tree, evaluated per address.
///
/// JSON form: `{"rule": "HarmonicOnRay", "params": {"rays": [{"start": "r", "direction": 0}], "off_ray": "one"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "params")]
pub enum LabelingScheme {
    Constant {
        value: Label,
    },
    /// `1/n` on the `n`-th vertex of each ray
    HarmonicOnRay {
        rays: Vec<RaySpec>,
        off_ray: OffRay,
    },
    /// `0` at the hub, `1/(c + 1)` on the subtree of child `c`, `1` elsewhere
    ArmHarmonic {
        hub: Address,
    },
    /// `0` at the hub; the `2n`-th listed component of `H - hub` gets `1/n`,
    /// every other vertex `1`
    HubAlternating {
        hub: Address,
        components: Vec<ComponentKey>,
    },
    /// `1/n` on the `n`-th ray vertex; `1/n_k` on the side subtrees hanging
    /// off ray vertex `n_k` for even `k`, where `branches = [n_1, n_2, ...]`;
    /// `1` elsewhere
    BranchAlternating {
        ray: RaySpec,
        branches: Vec<u64>,
    },
    Table {
        entries: BTreeMap<VertexId, Label>,
        default: Label,
    },
}

impl LabelingScheme {
    pub fn constant(value: Label) -> Self {
        LabelingScheme::Constant { value }
    }

    /// `1/n` on `v_n` of the ray at the root, `1` elsewhere.
    pub fn harmonic_ray() -> Self {
        LabelingScheme::HarmonicOnRay {
            rays: vec![RaySpec::new(Address::root(), 0)],
            off_ray: OffRay::One,
        }
    }

    pub fn evaluate(&self, addr: &Address) -> Label {
        match self {
            LabelingScheme::Constant { value } => value.clone(),
            LabelingScheme::HarmonicOnRay { rays, off_ray } => {
                if let Some(n) = rays.iter().find_map(|r| r.index_of(addr)) {
                    return Label::reciprocal(n);
                }
                match off_ray {
                    OffRay::One => Label::one(),
                    OffRay::Attachment => rays
                        .iter()
                        .filter(|r| addr.starts_with(&r.start))
                        .max_by_key(|r| r.start.depth())
                        .map_or_else(Label::one, |r| Label::reciprocal(r.attachment(addr))),
                }
            }
            LabelingScheme::ArmHarmonic { hub } => match ComponentKey::of(hub, addr) {
                None => Label::zero(),
                Some(ComponentKey::Child(c)) => Label::reciprocal(u64::from(c) + 1),
                Some(ComponentKey::Parent) => Label::one(),
            },
            LabelingScheme::HubAlternating { hub, components } => match ComponentKey::of(hub, addr) {
                None => Label::zero(),
                Some(key) => match components.iter().position(|k| *k == key) {
                    Some(i) if (i + 1) % 2 == 0 => Label::reciprocal((i as u64).div_ceil(2)),
                    _ => Label::one(),
                },
            },
            LabelingScheme::BranchAlternating { ray, branches } => {
                if let Some(n) = ray.index_of(addr) {
                    return Label::reciprocal(n);
                }
                if !addr.starts_with(&ray.start) {
                    return Label::one();
                }
                let n = ray.attachment(addr);
                match branches.binary_search(&n) {
                    Ok(i) if (i + 1) % 2 == 0 => Label::reciprocal(n),
                    _ => Label::one(),
                }
            }
            LabelingScheme::Table { entries, default } => {
                entries.get(&VertexId::Addr(addr.clone())).unwrap_or(default).clone()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn ray_positions() {
        let r = RaySpec::new(a("r.1"), 0);
        assert_eq!(r.vertex(3), a("r.1.0^2"));
        assert_eq!(r.index_of(&a("r.1.0^2")), Some(3));
        assert_eq!(r.index_of(&a("r.1.0.1")), None);
        assert_eq!(r.attachment(&a("r.1.0.1.0")), 2);
        assert_eq!(r.attachment(&a("r")), 1);
        assert_eq!(r.tail(2).vertex(1), a("r.1.0^2"));
    }

    #[test]
    fn harmonic_variants() {
        let one = LabelingScheme::harmonic_ray();
        assert_eq!(one.evaluate(&a("r.0^4")), Label::reciprocal(5));
        assert_eq!(one.evaluate(&a("r.0^4.1")), Label::one());
        let attach = LabelingScheme::HarmonicOnRay {
            rays: vec![RaySpec::new(Address::root(), 0)],
            off_ray: OffRay::Attachment,
        };
        assert_eq!(attach.evaluate(&a("r.0^4.1.0")), Label::reciprocal(5));
    }

    #[test]
    fn hub_alternating() {
        let s = LabelingScheme::HubAlternating {
            hub: Address::root(),
            components: (0..6).map(ComponentKey::Child).collect(),
        };
        let labels: Vec<String> = (0..7)
            .map(|c| s.evaluate(&Address::root().child(c)).to_string())
            .collect();
        assert_eq!(labels, ["1/1", "1/1", "1/1", "1/2", "1/1", "1/3", "1/1"]);
        assert_eq!(s.evaluate(&Address::root()), Label::zero());
        let arm = LabelingScheme::ArmHarmonic { hub: Address::root() };
        assert_eq!(arm.evaluate(&a("r.3.0")), Label::reciprocal(4));
    }

    #[test]
    fn branch_alternating() {
        let s = LabelingScheme::BranchAlternating {
            ray: RaySpec::new(Address::root(), 0),
            branches: vec![2, 3, 4, 5],
        };
        assert_eq!(s.evaluate(&a("r.0^2")), Label::reciprocal(3));
        assert_eq!(s.evaluate(&a("r.0.1")), Label::one());
        assert_eq!(s.evaluate(&a("r.0^2.1")), Label::reciprocal(3));
        assert_eq!(s.evaluate(&a("r.0^4.1.0")), Label::reciprocal(5));
        assert_eq!(s.evaluate(&a("r.1")), Label::one());
    }

    #[test]
    fn json_forms() {
        let s = LabelingScheme::HubAlternating {
            hub: Address::root(),
            components: vec![ComponentKey::Parent, ComponentKey::Child(2)],
        };
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"rule":"HubAlternating","params":{"hub":"r","components":["parent",{"child":2}]}}"#
        );
        assert_eq!(serde_json::from_str::<LabelingScheme>(&text).unwrap(), s);
        let t: LabelingScheme =
            serde_json::from_str(r#"{"rule":"Table","params":{"entries":{"r.0":"1/2"},"default":"1"}}"#).unwrap();
        assert_eq!(t.evaluate(&a("r.0")), Label::reciprocal(2));
        assert_eq!(t.evaluate(&a("r")), Label::one());
    }
}

//! Raw serde shapes of a scene file. Resolution into engine objects lives in
//! `scene::resolve`.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::linalg::{parse_rational, Rational};

/// A rational written either as a JSON integer or as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar(pub Rational);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok(Scalar(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Err(E::custom(format!("floating-point value {v} is not allowed; write rationals as \"p/q\"")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                parse_rational(v).map(Scalar).map_err(|_| E::custom(format!("`{v}` is not a rational")))
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

pub type RawVector = Vec<Scalar>;
pub type RawMatrix = Vec<Vec<Scalar>>;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawScene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    #[serde(default)]
    pub groups: BTreeMap<String, RawGroup>,
    #[serde(default)]
    pub subgroups: BTreeMap<String, RawSubgroup>,
    #[serde(default)]
    pub subspaces: BTreeMap<String, RawSubspace>,
    #[serde(default)]
    pub candidates: BTreeMap<String, RawCandidate>,
    #[serde(default)]
    pub maps: BTreeMap<String, RawMap>,
    #[serde(default)]
    pub probes: BTreeMap<String, RawProbe>,
    #[serde(default)]
    pub queries: Vec<RawQuery>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawGroup {
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub generators: Vec<RawMatrix>,
    /// Complex generators `(re, im)`, realified into `2n × 2n` blocks.
    #[serde(default)]
    pub complex_generators: Vec<RawComplexMatrix>,
    #[serde(default)]
    pub max_order: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawComplexMatrix {
    pub re: RawMatrix,
    pub im: RawMatrix,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawSubgroup {
    pub group: String,
    /// Subgroup generated by these matrices.
    #[serde(default)]
    pub generators: Option<Vec<RawMatrix>>,
    /// Subgroup generated by these entries of the parent's generator list.
    #[serde(default)]
    pub generator_indices: Option<Vec<usize>>,
    /// Explicit canonical element indices.
    #[serde(default)]
    pub elements: Option<Vec<usize>>,
    /// Stabilizer of a point.
    #[serde(default)]
    pub stabilizer_of: Option<RawVector>,
    #[serde(default)]
    pub whole: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawSubspace {
    pub base_point: RawVector,
    #[serde(default)]
    pub basis: Vec<RawVector>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawCandidate {
    pub group: String,
    /// Defaults to the whole group.
    #[serde(default)]
    pub subgroup: Option<String>,
    #[serde(default)]
    pub subspace: Option<String>,
    /// Point candidate `({x}, Γ_x)`; excludes `subgroup` and `subspace`.
    #[serde(default)]
    pub point: Option<RawVector>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum RawTheta {
    /// `"trivial"` or `"identity"`.
    Named(String),
    /// `[domain index, codomain index]` for every domain element.
    Pairs(Vec<[usize; 2]>),
    /// Images of the domain generators, as matrices of the codomain group.
    Images { images: Vec<RawMatrix> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub domain: String,
    pub codomain: String,
    pub matrix: RawMatrix,
    #[serde(default)]
    pub offset: Option<RawVector>,
    pub theta: RawTheta,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawProbe {
    pub group: String,
    #[serde(default)]
    pub subgroup: Option<String>,
    pub subspace: String,
    pub pairs: Vec<[RawVector; 2]>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RawQuery {
    Classify {
        candidate: String,
        #[serde(default)]
        search_all: bool,
        #[serde(default)]
        points: Vec<RawVector>,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Isotropy {
        candidate: String,
        point: RawVector,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Intersect {
        first: String,
        second: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Preimage {
        map: String,
        candidate: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Graph {
        map: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Image {
        map: String,
        candidate: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    FiberedProduct {
        first: String,
        second: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    RegularValue {
        map: String,
        value: RawVector,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    Embedding {
        candidate: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
    MetricCheck {
        probe: String,
        #[serde(default)]
        expect: BTreeMap<String, String>,
    },
}

impl RawQuery {
    pub fn expect(&self) -> &BTreeMap<String, String> {
        match self {
            RawQuery::Classify { expect, .. }
            | RawQuery::Isotropy { expect, .. }
            | RawQuery::Intersect { expect, .. }
            | RawQuery::Preimage { expect, .. }
            | RawQuery::Graph { expect, .. }
            | RawQuery::Image { expect, .. }
            | RawQuery::FiberedProduct { expect, .. }
            | RawQuery::RegularValue { expect, .. }
            | RawQuery::Embedding { expect, .. }
            | RawQuery::MetricCheck { expect, .. } => expect,
        }
    }

    pub fn expect_mut(&mut self) -> &mut BTreeMap<String, String> {
        match self {
            RawQuery::Classify { expect, .. }
            | RawQuery::Isotropy { expect, .. }
            | RawQuery::Intersect { expect, .. }
            | RawQuery::Preimage { expect, .. }
            | RawQuery::Graph { expect, .. }
            | RawQuery::Image { expect, .. }
            | RawQuery::FiberedProduct { expect, .. }
            | RawQuery::RegularValue { expect, .. }
            | RawQuery::Embedding { expect, .. }
            | RawQuery::MetricCheck { expect, .. } => expect,
        }
    }

    pub fn command(&self) -> &'static str {
        match self {
            RawQuery::Classify { .. } => "classify",
            RawQuery::Isotropy { .. } => "isotropy",
            RawQuery::Intersect { .. } => "intersect",
            RawQuery::Preimage { .. } => "preimage",
            RawQuery::Graph { .. } => "graph",
            RawQuery::Image { .. } => "image",
            RawQuery::FiberedProduct { .. } => "fibered-product",
            RawQuery::RegularValue { .. } => "regular-value",
            RawQuery::Embedding { .. } => "embedding",
            RawQuery::MetricCheck { .. } => "metric-check",
        }
    }

    /// The names this query refers to, joined for display.
    pub fn target(&self) -> String {
        match self {
            RawQuery::Classify { candidate, .. }
            | RawQuery::Isotropy { candidate, .. }
            | RawQuery::Embedding { candidate, .. } => candidate.clone(),
            RawQuery::Intersect { first, second, .. } | RawQuery::FiberedProduct { first, second, .. } => {
                format!("{first}, {second}")
            }
            RawQuery::Preimage { map, candidate, .. } | RawQuery::Image { map, candidate, .. } => {
                format!("{map}, {candidate}")
            }
            RawQuery::Graph { map, .. } | RawQuery::RegularValue { map, .. } => map.clone(),
            RawQuery::MetricCheck { probe, .. } => probe.clone(),
        }
    }
}

//! Serializable results. Rationals are written as `"p/q"` strings and group
//! elements as their canonical index together with the matrix, so a report
//! can be read back without the scene that produced it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::group::{Fingerprint, FiniteMatrixGroup, GroupTable, NoComplementCertificate, Subgroup};
use crate::linalg::{AffineSubspace, Rational};
use crate::suborbifold::{
    ClassificationReport, EmbeddedVerdict, NonFullWitness, SaturationVerdict, SuborbifoldCandidate,
};

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// `[a,b,c]` with no spaces, as used in fact values.
pub fn compact_vector(v: &[String]) -> String {
    format!("[{}]", v.join(","))
}

pub fn compact_matrix(m: &[Vec<String>]) -> String {
    let rows: Vec<String> = m.iter().map(|r| compact_vector(r)).collect();
    compact_vector(&rows)
}

fn members(s: &Subgroup) -> Vec<usize> {
    s.members().to_vec()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub index: usize,
    pub matrix: Vec<Vec<String>>,
}

impl ElementRecord {
    pub fn new(group: &FiniteMatrixGroup, index: usize) -> Self {
        ElementRecord {
            index,
            matrix: group.matrix(index).to_strings(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub element: ElementRecord,
    pub point: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub base_point: Vec<String>,
    pub basis: Vec<Vec<String>>,
}

impl From<&AffineSubspace> for SubspaceRecord {
    fn from(v: &AffineSubspace) -> Self {
        let (base_point, basis) = v.to_strings();
        SubspaceRecord { base_point, basis }
    }
}

/// The `(Δ, Ṽ)` pair a verdict refers to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub ambient_dim: usize,
    pub group_order: usize,
    pub delta: Vec<usize>,
    pub delta_fingerprint: Fingerprint,
    pub subspace: SubspaceRecord,
    pub dim: usize,
}

impl From<&SuborbifoldCandidate> for CandidateRecord {
    fn from(c: &SuborbifoldCandidate) -> Self {
        let g = c.group();
        CandidateRecord {
            ambient_dim: g.dim(),
            group_order: g.order(),
            delta: members(c.delta()),
            delta_fingerprint: g
                .subgroup_table(c.delta())
                .map(|t| t.fingerprint())
                .unwrap_or_else(|_| Fingerprint {
                    order: c.delta().order(),
                    element_orders: Vec::new(),
                    abelian: false,
                }),
            subspace: c.v().into(),
            dim: c.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedRecord {
    pub subgroup: Vec<usize>,
    /// A nontrivial kernel element inside `subgroup`.
    pub shared_kernel_element: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub delta_order: usize,
    pub kernel_order: usize,
    pub subgroups_examined: usize,
    pub blocked: Vec<BlockedRecord>,
}

impl From<&NoComplementCertificate> for CertificateRecord {
    fn from(c: &NoComplementCertificate) -> Self {
        CertificateRecord {
            delta_order: c.delta_order,
            kernel_order: c.kernel_order,
            subgroups_examined: c.subgroups_examined,
            blocked: c
                .blocked
                .iter()
                .map(|(s, e)| BlockedRecord {
                    subgroup: members(s),
                    shared_kernel_element: *e,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EmbeddedRecord {
    Split {
        complement: Vec<usize>,
        splitting_verified: bool,
    },
    Alternative {
        delta: Vec<usize>,
    },
    NotEmbedded {
        certificate: CertificateRecord,
        subgroups_searched: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropyRecord {
    pub point: Vec<String>,
    pub fingerprint: Fingerprint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub candidate: CandidateRecord,
    pub saturated: bool,
    pub saturation_witness: Option<WitnessRecord>,
    pub full: bool,
    /// `fixed-point` or `foreign-translate`.
    pub full_witness_kind: Option<String>,
    pub full_witness: Option<WitnessRecord>,
    pub kernel: Vec<usize>,
    pub embedded: Option<EmbeddedRecord>,
    pub isotropy: Vec<IsotropyRecord>,
}

impl ClassificationSummary {
    pub fn new(cand: &SuborbifoldCandidate, report: &ClassificationReport, splitting_verified: Option<bool>) -> Self {
        let g = cand.group();
        let saturation_witness = match &report.saturated {
            SaturationVerdict::Saturated => None,
            SaturationVerdict::NotSaturated(w) => Some(WitnessRecord {
                element: ElementRecord::new(g, w.element),
                point: strings(&w.point),
            }),
        };
        let (full_witness_kind, full_witness) = match &report.full {
            crate::suborbifold::FullVerdict::Full => (None, None),
            crate::suborbifold::FullVerdict::NotFull(w) => {
                let kind = match w {
                    NonFullWitness::FixedPoint { .. } => "fixed-point",
                    NonFullWitness::ForeignTranslate { .. } => "foreign-translate",
                };
                (
                    Some(kind.to_string()),
                    Some(WitnessRecord {
                        element: ElementRecord::new(g, w.element()),
                        point: strings(w.point()),
                    }),
                )
            }
        };
        let embedded = report.embedded.as_ref().map(|e| match &e.verdict {
            EmbeddedVerdict::Split { complement } => EmbeddedRecord::Split {
                complement: members(complement),
                splitting_verified: splitting_verified.unwrap_or(false),
            },
            EmbeddedVerdict::Alternative { delta } => EmbeddedRecord::Alternative { delta: members(delta) },
            EmbeddedVerdict::NotEmbedded {
                certificate,
                subgroups_searched,
            } => EmbeddedRecord::NotEmbedded {
                certificate: certificate.into(),
                subgroups_searched: *subgroups_searched,
            },
        });
        ClassificationSummary {
            candidate: cand.into(),
            saturated: report.saturated.holds(),
            saturation_witness,
            full: report.full.holds(),
            full_witness_kind,
            full_witness,
            kernel: members(&report.kernel),
            embedded,
            isotropy: report
                .isotropy
                .iter()
                .map(|i| IsotropyRecord {
                    point: strings(&i.point),
                    fingerprint: i.fingerprint.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropySummary {
    pub point: Vec<String>,
    /// `Γ_x` in the ambient chart.
    pub ambient: Fingerprint,
    /// `Δ_x/K`.
    pub sub_isotropy: Fingerprint,
    /// Stabilizer of the point in the induced chart.
    pub via_chart: Fingerprint,
    /// `Γ_x/Ω`, reported for abelian chart groups.
    pub omega_isotropy: Option<Fingerprint>,
    pub obstruction: Option<bool>,
}

/// A candidate produced by a construction, with its verdicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub candidate: CandidateRecord,
    pub expected_dim: usize,
    pub saturated: bool,
    pub full: bool,
    pub embedded: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub candidate: CandidateRecord,
    pub saturated: bool,
    pub embedded: bool,
    pub full: bool,
    pub image_in_regular_part: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub quotient: f64,
    pub intrinsic: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub pairs: Vec<PairRecord>,
    pub max_deviation: f64,
    pub depth: u32,
    pub tolerance: f64,
    /// `pass` or `increase-depth`.
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureSummary {
    /// Name of the innermost error variant.
    pub error: String,
    pub message: String,
    pub location: String,
    /// An internal consistency check failed, as opposed to bad input.
    pub internal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QueryResult {
    Classification(ClassificationSummary),
    Isotropy(IsotropySummary),
    Construction(ConstructionSummary),
    Graph(GraphSummary),
    Metric(MetricSummary),
    Failed(FailureSummary),
}

fn yes(b: bool) -> String {
    b.to_string()
}

impl QueryResult {
    /// Flat string view used for expectations and the text format.
    pub fn facts(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            f.insert(k.to_string(), v);
        };
        match self {
            QueryResult::Classification(c) => {
                put("dim", c.candidate.dim.to_string());
                put("delta.order", c.candidate.delta.len().to_string());
                put("saturated", yes(c.saturated));
                if let Some(w) = &c.saturation_witness {
                    put("saturation.element", compact_matrix(&w.element.matrix));
                    put("saturation.point", compact_vector(&w.point));
                }
                put("full", yes(c.full));
                if let (Some(kind), Some(w)) = (&c.full_witness_kind, &c.full_witness) {
                    put("full.kind", kind.clone());
                    put("full.element", compact_matrix(&w.element.matrix));
                    put("full.point", compact_vector(&w.point));
                }
                put("kernel.order", c.kernel.len().to_string());
                match &c.embedded {
                    None => put("embedded", "undefined".into()),
                    Some(e) => match e {
                        EmbeddedRecord::Split {
                            complement,
                            splitting_verified,
                        } => {
                            put("embedded", yes(true));
                            put("embedded.mode", "split".into());
                            put("embedded.complement.order", complement.len().to_string());
                            put("embedded.splitting_verified", yes(*splitting_verified));
                        }
                        EmbeddedRecord::Alternative { delta } => {
                            put("embedded", yes(true));
                            put("embedded.mode", "alternative".into());
                            put("embedded.delta.order", delta.len().to_string());
                        }
                        EmbeddedRecord::NotEmbedded {
                            certificate,
                            subgroups_searched,
                        } => {
                            put("embedded", yes(false));
                            put("embedded.mode", "not-embedded".into());
                            put("embedded.blocked", certificate.blocked.len().to_string());
                            if let Some(n) = subgroups_searched {
                                put("embedded.subgroups_searched", n.to_string());
                            }
                        }
                    },
                }
                for i in &c.isotropy {
                    put(&format!("isotropy{}", compact_vector(&i.point)), i.fingerprint.label());
                }
            }
            QueryResult::Isotropy(i) => {
                put("ambient", i.ambient.label());
                put("sub_isotropy", i.sub_isotropy.label());
                put("via_chart", i.via_chart.label());
                if let Some(o) = &i.omega_isotropy {
                    put("omega_isotropy", o.label());
                }
                if let Some(o) = i.obstruction {
                    put("obstruction", yes(o));
                }
            }
            QueryResult::Construction(c) => {
                put("dim", c.candidate.dim.to_string());
                put("expected_dim", c.expected_dim.to_string());
                put("ambient_dim", c.candidate.ambient_dim.to_string());
                put("delta.order", c.candidate.delta.len().to_string());
                put("saturated", yes(c.saturated));
                put("full", yes(c.full));
                put(
                    "embedded",
                    c.embedded.map_or_else(|| "undefined".to_string(), yes),
                );
            }
            QueryResult::Graph(g) => {
                put("dim", g.candidate.dim.to_string());
                put("saturated", yes(g.saturated));
                put("embedded", yes(g.embedded));
                put("full", yes(g.full));
                put("image_in_regular_part", yes(g.image_in_regular_part));
            }
            QueryResult::Metric(m) => {
                put("outcome", m.outcome.clone());
                put("pairs", m.pairs.len().to_string());
                put("depth", m.depth.to_string());
            }
            QueryResult::Failed(e) => {
                put("error", e.error.clone());
            }
        }
        f
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, QueryResult::Failed(_))
    }
}

impl QueryReport {
    /// A failure nobody asked for: the query has no `error` expectation.
    pub fn unexpected_failure(&self) -> Option<&FailureSummary> {
        match &self.result {
            QueryResult::Failed(f) if !self.expected.contains_key("error") => Some(f),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub key: String,
    pub expected: String,
    pub found: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    /// Scene (or corpus case) the query came from.
    pub scene: String,
    pub index: usize,
    pub command: String,
    pub target: String,
    pub result: QueryResult,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<Mismatch>,
}

impl QueryReport {
    /// Compares `expect` against the facts of the result.
    pub fn check(&mut self, expect: &BTreeMap<String, String>) {
        let facts = self.result.facts();
        self.expected = expect.clone();
        self.mismatches = expect
            .iter()
            .filter(|(k, v)| facts.get(*k) != Some(*v))
            .map(|(k, v)| Mismatch {
                key: k.clone(),
                expected: v.clone(),
                found: facts.get(k).cloned(),
            })
            .collect();
    }
}

/// Excluded from determinism comparisons.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub queries: Vec<QueryReport>,
    pub timing: Timing,
}

impl Report {
    pub fn mismatches(&self) -> impl Iterator<Item = (&QueryReport, &Mismatch)> {
        self.queries.iter().flat_map(|q| q.mismatches.iter().map(move |m| (q, m)))
    }

    pub fn has_mismatch(&self) -> bool {
        self.mismatches().next().is_some()
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_machine(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for q in &self.queries {
            let status = if q.mismatches.is_empty() { "" } else { "  MISMATCH" };
            out.push_str(&format!("[{}#{}] {} {}{}\n", q.scene, q.index, q.command, q.target, status));
            if let QueryResult::Failed(e) = &q.result {
                out.push_str(&format!("    error at {}: {}\n", e.location, e.message));
            }
            for (k, v) in q.result.facts() {
                out.push_str(&format!("    {k} = {v}\n"));
            }
            for m in &q.mismatches {
                out.push_str(&format!(
                    "    expected {} = {}, found {}\n",
                    m.key,
                    m.expected,
                    m.found.as_deref().unwrap_or("nothing")
                ));
            }
        }
        out.push_str(&format!("{} queries in {:.1} ms\n", self.queries.len(), self.timing.elapsed_ms));
        out
    }
}

use std::time::Instant;

use rayon::prelude::*;

use crate::group::GroupTable;
use crate::maps::{
    embedding_from_induced_chart, fibered_product, graph_suborbifold, image_suborbifold, intersect_full,
    preimage_suborbifold, regular_value_preimage, MapError,
};
use crate::metric::{lemma_metrics_check, MetricOutcome};
use crate::suborbifold::{
    abelian_omega_isotropy, check_embedded, check_full, check_saturated, classify, isotropy_point,
    isotropy_sub_point, isotropy_sub_point_via_chart, verify_splitting, ClassifyOptions, EmbeddedVerdict,
    SuborbifoldCandidate,
};

use super::format::{RawQuery, RawVector};
use super::report::*;
use super::resolve::Scene;
use super::ModuleError;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Run queries on the rayon pool; report order is unchanged.
    pub parallel: bool,
    /// Overrides every probe's partition depth.
    pub depth: Option<u32>,
    /// Overrides every probe's tolerance.
    pub tolerance: Option<f64>,
}

fn vector(raw: &RawVector) -> Vec<crate::linalg::Rational> {
    raw.iter().map(|s| s.0.clone()).collect()
}

fn construction(cand: &SuborbifoldCandidate, expected_dim: usize) -> Result<ConstructionSummary, ModuleError> {
    let saturated = check_saturated(cand).holds();
    let full = check_full(cand)?.holds();
    let embedded = if saturated {
        Some(check_embedded(cand, false)?.holds())
    } else {
        None
    };
    Ok(ConstructionSummary {
        candidate: cand.into(),
        expected_dim,
        saturated,
        full,
        embedded,
    })
}

fn run_classify(
    cand: &SuborbifoldCandidate,
    search_all: bool,
    points: &[RawVector],
) -> Result<QueryResult, ModuleError> {
    let options = ClassifyOptions {
        search_all_delta: search_all,
        query_points: points.iter().map(vector).collect(),
    };
    let report = classify(cand, &options)?;
    let verified = match report.embedded.as_ref().map(|e| &e.verdict) {
        Some(EmbeddedVerdict::Split { complement }) => Some(verify_splitting(cand, &report.kernel, complement)?.holds()),
        _ => None,
    };
    Ok(QueryResult::Classification(ClassificationSummary::new(cand, &report, verified)))
}

fn run_isotropy(cand: &SuborbifoldCandidate, point: &RawVector) -> Result<QueryResult, ModuleError> {
    let x = vector(point);
    let ambient = isotropy_point(cand.chart(), &x)?;
    let sub_isotropy = isotropy_sub_point(cand, &x)?;
    let via_chart = isotropy_sub_point_via_chart(cand, &x)?;
    let omega_isotropy = if cand.group().is_abelian() {
        Some(abelian_omega_isotropy(cand.chart(), cand.v(), &x)?)
    } else {
        None
    };
    let obstruction = omega_isotropy.as_ref().map(|o| *o != sub_isotropy);
    Ok(QueryResult::Isotropy(IsotropySummary {
        point: x.iter().map(ToString::to_string).collect(),
        ambient,
        sub_isotropy,
        via_chart,
        omega_isotropy,
        obstruction,
    }))
}

fn run_one(scene: &Scene, q: &RawQuery, options: &RunOptions) -> Result<QueryResult, ModuleError> {
    // names were checked during resolution
    let cand = |name: &str| &scene.candidates[name];
    let map = |name: &str| &scene.maps[name];
    match q {
        RawQuery::Classify {
            candidate,
            search_all,
            points,
            ..
        } => run_classify(cand(candidate), *search_all, points),
        RawQuery::Isotropy { candidate, point, .. } => run_isotropy(cand(candidate), point),
        RawQuery::Intersect { first, second, .. } => {
            let (a, b) = (cand(first), cand(second));
            let expected = (a.dim() + b.dim()).saturating_sub(a.chart().ambient_dim());
            let c = intersect_full(a, b)?;
            Ok(QueryResult::Construction(construction(&c, expected)?))
        }
        RawQuery::Preimage { map: m, candidate, .. } => {
            let (f, q) = (map(m), cand(candidate));
            let expected = (f.domain().ambient_dim() + q.dim()).saturating_sub(f.codomain().ambient_dim());
            let c = preimage_suborbifold(f, q)?;
            Ok(QueryResult::Construction(construction(&c, expected)?))
        }
        RawQuery::Image { map: m, candidate, .. } => {
            let c = image_suborbifold(map(m), cand(candidate))?;
            Ok(QueryResult::Construction(construction(&c, cand(candidate).dim())?))
        }
        RawQuery::Embedding { candidate, .. } => {
            let c = cand(candidate);
            let (_, image) = embedding_from_induced_chart(c)?;
            Ok(QueryResult::Construction(construction(&image, c.dim())?))
        }
        RawQuery::FiberedProduct { first, second, .. } => {
            let (f1, f2) = (map(first), map(second));
            let expected = (f1.domain().ambient_dim() + f2.domain().ambient_dim()).saturating_sub(f1.codomain().ambient_dim());
            let fp = fibered_product(f1, f2)?;
            Ok(QueryResult::Construction(construction(&fp.candidate, expected)?))
        }
        RawQuery::RegularValue { map: m, value, .. } => {
            let f = map(m);
            let expected = f.domain().ambient_dim().saturating_sub(f.codomain().ambient_dim());
            let c = regular_value_preimage(f, &vector(value))?;
            Ok(QueryResult::Construction(construction(&c, expected)?))
        }
        RawQuery::Graph { map: m, .. } => {
            let f = map(m);
            let g = graph_suborbifold(f)?;
            Ok(QueryResult::Graph(GraphSummary {
                candidate: (&g.candidate).into(),
                saturated: check_saturated(&g.candidate).holds(),
                embedded: check_embedded(&g.candidate, false).map_err(MapError::from)?.holds(),
                full: g.full,
                image_in_regular_part: crate::suborbifold::contained_in_regular_part(f.codomain(), &f.image_hull()),
            }))
        }
        RawQuery::MetricCheck { probe, .. } => {
            let p = scene.probes[probe].build(options.depth, options.tolerance)?;
            let r = lemma_metrics_check(&p)?;
            Ok(QueryResult::Metric(MetricSummary {
                pairs: r
                    .pairs
                    .iter()
                    .map(|d| PairRecord {
                        x: d.x.iter().map(ToString::to_string).collect(),
                        y: d.y.iter().map(ToString::to_string).collect(),
                        quotient: d.quotient,
                        intrinsic: d.intrinsic,
                        deviation: d.deviation,
                    })
                    .collect(),
                max_deviation: r.max_deviation,
                depth: r.depth,
                tolerance: r.tolerance,
                outcome: match r.outcome {
                    MetricOutcome::Pass => "pass",
                    MetricOutcome::IncreaseDepth => "increase-depth",
                }
                .to_string(),
            }))
        }
    }
}

/// Runs one query. Module errors become a `Failed` result rather than
/// aborting the scene.
pub fn run_query(scene: &Scene, label: &str, index: usize, options: &RunOptions) -> QueryReport {
    let q = &scene.queries[index];
    let result = run_one(scene, q, options).unwrap_or_else(|e| {
        QueryResult::Failed(FailureSummary {
            error: e.kind(),
            message: e.to_string(),
            location: format!("queries[{index}]"),
            internal: e.is_invariant_violation(),
        })
    });
    let mut report = QueryReport {
        scene: label.to_string(),
        index,
        command: q.command().to_string(),
        target: q.target(),
        result,
        expected: Default::default(),
        mismatches: Vec::new(),
    };
    report.check(q.expect());
    report
}

/// Runs every query of `scene`, in order.
pub fn run_scene(scene: &Scene, label: &str, options: &RunOptions) -> Report {
    let start = Instant::now();
    let queries = run_queries(scene, label, options);
    Report {
        queries,
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    }
}

pub(crate) fn run_queries(scene: &Scene, label: &str, options: &RunOptions) -> Vec<QueryReport> {
    let indices: Vec<usize> = (0..scene.queries.len()).collect();
    if options.parallel {
        indices.par_iter().map(|&i| run_query(scene, label, i, options)).collect()
    } else {
        indices.iter().map(|&i| run_query(scene, label, i, options)).collect()
    }
}

//! Quotient and intrinsic distances for orthogonal actions on flat ℚⁿ.
//!
//! Distances are computed exactly as squared rationals and converted to
//! `f64` only when taking the square root. Candidate paths inside `Ṽ` are
//! straight segments, which is where flatness is used.

use crate::group::{FiniteMatrixGroup, GroupTable, Subgroup};
use crate::linalg::{dot, sub_vec, to_f64, AffineSubspace, Rational};
use crate::suborbifold::{check_saturated, ChartModel, SuborbifoldCandidate, SuborbifoldError};

pub const DEFAULT_DEPTH: u32 = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Deepest refinement accepted (`2^MAX_DEPTH` pieces per segment).
pub const MAX_DEPTH: u32 = 24;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("group element {element} is not orthogonal")]
    NonOrthogonalGroup { element: usize },
    #[error("sample point {index} is not in the subspace")]
    PointsNotInSubspace { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tolerance must be a nonnegative number, got {0}")]
    BadTolerance(f64),
    #[error("partition depth {0} exceeds {MAX_DEPTH}")]
    DepthTooLarge(u32),
    #[error("candidate is not saturated")]
    CandidateNotSaturated,
    #[error(transparent)]
    Suborbifold(#[from] SuborbifoldError),
}

fn check_orthogonal(group: &FiniteMatrixGroup) -> Result<(), MetricError> {
    match (0..group.order()).find(|&i| !group.matrix(i).is_orthogonal()) {
        Some(element) => Err(MetricError::NonOrthogonalGroup { element }),
        None => Ok(()),
    }
}

fn squared_norm(v: &[Rational]) -> Rational {
    dot(v, v)
}

/// `min over h ∈ within of |x - h·y|²`, exactly.
fn min_squared_distance(group: &FiniteMatrixGroup, within: &Subgroup, x: &[Rational], y: &[Rational]) -> Rational {
    within
        .members()
        .iter()
        .map(|&h| squared_norm(&sub_vec(x, &group.act(h, y))))
        .min()
        .expect("subgroups contain the identity")
}

/// Distance between the orbits `Gx` and `Gy`.
pub fn quotient_distance(group: &FiniteMatrixGroup, x: &[Rational], y: &[Rational]) -> Result<f64, MetricError> {
    subgroup_quotient_distance(group, &group.whole(), x, y)
}

/// Distance between `Hx` and `Hy` for a subgroup `H`.
pub fn subgroup_quotient_distance(
    group: &FiniteMatrixGroup,
    within: &Subgroup,
    x: &[Rational],
    y: &[Rational],
) -> Result<f64, MetricError> {
    check_orthogonal(group)?;
    for p in [x, y] {
        if p.len() != group.dim() {
            return Err(MetricError::DimensionMismatch {
                expected: group.dim(),
                found: p.len(),
            });
        }
    }
    Ok(to_f64(&min_squared_distance(group, within, x, y)).sqrt())
}

/// A probe of the metric on `Ṽ/H` for an orthogonal chart group `G`.
#[derive(Clone, Debug)]
pub struct MetricProbe {
    pub chart: ChartModel,
    pub subgroup: Subgroup,
    pub subspace: AffineSubspace,
    pub pairs: Vec<(Vec<Rational>, Vec<Rational>)>,
    pub depth: u32,
    pub tolerance: f64,
}

impl MetricProbe {
    pub fn new(
        chart: ChartModel,
        subgroup: Subgroup,
        subspace: AffineSubspace,
        pairs: Vec<(Vec<Rational>, Vec<Rational>)>,
        depth: u32,
        tolerance: f64,
    ) -> Result<Self, MetricError> {
        check_orthogonal(chart.group())?;
        if subspace.ambient_dim() != chart.ambient_dim() {
            return Err(MetricError::DimensionMismatch {
                expected: chart.ambient_dim(),
                found: subspace.ambient_dim(),
            });
        }
        if !(tolerance >= 0.0) {
            return Err(MetricError::BadTolerance(tolerance));
        }
        if depth > MAX_DEPTH {
            return Err(MetricError::DepthTooLarge(depth));
        }
        for (index, (x, y)) in pairs.iter().enumerate() {
            if !subspace.contains_point(x) || !subspace.contains_point(y) {
                return Err(MetricError::PointsNotInSubspace { index });
            }
        }
        Ok(MetricProbe {
            chart,
            subgroup,
            subspace,
            pairs,
            depth,
            tolerance,
        })
    }
}

/// Partition sums `Σ min_g |c(tᵢ) - g·c(tᵢ₊₁)|` along the segment from `x`
/// to `target`, for `2⁰, 2¹, …, 2^depth` equal pieces.
pub fn refinement_sums(group: &FiniteMatrixGroup, x: &[Rational], target: &[Rational], depth: u32) -> Vec<f64> {
    let whole = group.whole();
    let step = sub_vec(target, x);
    (0..=depth)
        .map(|d| {
            let pieces = 1i64 << d;
            let point = |i: i64| -> Vec<Rational> {
                let t = Rational::new(i.into(), pieces.into());
                x.iter().zip(&step).map(|(a, s)| a + &t * s).collect()
            };
            let mut prev = point(0);
            let mut total = 0.0;
            for i in 1..=pieces {
                let next = point(i);
                total += to_f64(&min_squared_distance(group, &whole, &prev, &next)).sqrt();
                prev = next;
            }
            total
        })
        .collect()
}

/// Intrinsic distance on `Ṽ/H` induced by the quotient metric on `ℚⁿ/G`,
/// approximated over straight segments from `x` to each `h·y`: the sup over
/// refinements of the partition sums, then the min over `h`.
pub fn intrinsic_quotient_distance(probe: &MetricProbe, x: &[Rational], y: &[Rational]) -> Result<f64, MetricError> {
    if !probe.subspace.contains_point(x) || !probe.subspace.contains_point(y) {
        return Err(MetricError::PointsNotInSubspace { index: 0 });
    }
    let g = probe.chart.group();
    check_orthogonal(g)?;
    let best = probe
        .subgroup
        .members()
        .iter()
        .map(|&h| {
            let target = g.act(h, y);
            refinement_sums(g, x, &target, probe.depth)
                .into_iter()
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairDeviation {
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
    pub quotient: f64,
    pub intrinsic: f64,
    pub deviation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricOutcome {
    Pass,
    /// The candidate is saturated, so a gap means the partitions are too
    /// coarse rather than a counterexample.
    IncreaseDepth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub pairs: Vec<PairDeviation>,
    pub max_deviation: f64,
    pub depth: u32,
    pub tolerance: f64,
    pub outcome: MetricOutcome,
}

impl MetricReport {
    pub fn passed(&self) -> bool {
        self.outcome == MetricOutcome::Pass
    }
}

/// Compares the quotient metric of `Ṽ/H` with the intrinsic metric induced
/// from `ℚⁿ/G` on every sample pair. Requires `(H, Ṽ)` to be saturated.
pub fn lemma_metrics_check(probe: &MetricProbe) -> Result<MetricReport, MetricError> {
    let cand = SuborbifoldCandidate::new(probe.chart.clone(), probe.subgroup.clone(), probe.subspace.clone())
        .map_err(|e| match e {
            SuborbifoldError::NotInvariant { .. } | SuborbifoldError::NotSubgroup => MetricError::CandidateNotSaturated,
            other => other.into(),
        })?;
    if !check_saturated(&cand).holds() {
        return Err(MetricError::CandidateNotSaturated);
    }
    let g = probe.chart.group();
    let mut pairs = Vec::with_capacity(probe.pairs.len());
    let mut max_deviation: f64 = 0.0;
    for (x, y) in &probe.pairs {
        let quotient = subgroup_quotient_distance(g, &probe.subgroup, x, y)?;
        let intrinsic = intrinsic_quotient_distance(probe, x, y)?;
        let deviation = (quotient - intrinsic).abs();
        max_deviation = max_deviation.max(deviation);
        pairs.push(PairDeviation {
            x: x.clone(),
            y: y.clone(),
            quotient,
            intrinsic,
            deviation,
        });
    }
    let outcome = if max_deviation <= probe.tolerance {
        MetricOutcome::Pass
    } else {
        MetricOutcome::IncreaseDepth
    };
    Ok(MetricReport {
        pairs,
        max_deviation,
        depth: probe.depth,
        tolerance: probe.tolerance,
        outcome,
    })
}

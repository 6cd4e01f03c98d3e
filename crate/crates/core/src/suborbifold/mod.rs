//! Suborbifold candidates inside a single linear orbifold chart `ℚⁿ/Γ`:
//! saturation, fullness and embeddedness verdicts, induced charts and
//! isotropy groups.
//!
//! A candidate is a pair `(Δ, Ṽ)` of a subgroup of the chart group and a
//! `Δ`-invariant affine subspace. Affine subspaces are connected and closed,
//! so those hypotheses never need checking.

mod chart;
mod classify;
mod probes;

use std::sync::Arc;

pub use chart::{
    abelian_omega_isotropy, full_characterization_chart, full_obstruction_probe, induced_chart, isotropy_point,
    isotropy_sub_point, isotropy_sub_point_via_chart, FullChart, InducedChart, ObstructionProbe,
};
pub use classify::{
    check_embedded, check_full, check_saturated, classify, verify_splitting, ClassificationReport, ClassifyOptions,
    EmbeddedCheck, EmbeddedVerdict, FullVerdict, IsotropyAt, NonFullWitness, SaturationVerdict, SaturationWitness,
    SplittingCheck,
};
pub use probes::{contained_in_regular_part, quotient_injectivity_probe, InjectivityProbe};

use crate::group::{FiniteMatrixGroup, GroupError, GroupTable, Subgroup};
use crate::linalg::{AffineSubspace, LinalgError, RatMatrix, Rational};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum SuborbifoldError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subgroup members do not form a subgroup of the chart group")]
    NotSubgroup,
    #[error("subspace is not invariant under group element {element}")]
    NotInvariant { element: usize },
    #[error("candidate is not saturated")]
    CandidateNotSaturated,
    #[error("candidate is not full")]
    CandidateNotFull,
    #[error("point is not in the subspace")]
    PointNotInV,
    #[error("chart group is not abelian")]
    GroupNotAbelian,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A linear chart `ℚⁿ/Γ`. The orbit map is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartModel {
    group: Arc<FiniteMatrixGroup>,
}

impl ChartModel {
    pub fn new(group: FiniteMatrixGroup) -> Self {
        ChartModel { group: Arc::new(group) }
    }

    pub fn from_shared(group: Arc<FiniteMatrixGroup>) -> Self {
        ChartModel { group }
    }

    /// `ℚⁿ` with the trivial group, i.e. a manifold chart.
    pub fn manifold(n: usize) -> Self {
        Self::new(FiniteMatrixGroup::trivial_group(n))
    }

    pub fn ambient_dim(&self) -> usize {
        self.group.dim()
    }

    pub fn group(&self) -> &FiniteMatrixGroup {
        &self.group
    }

    pub fn shared_group(&self) -> Arc<FiniteMatrixGroup> {
        Arc::clone(&self.group)
    }

    pub fn is_manifold(&self) -> bool {
        self.group.order() == 1
    }

    /// Re-centers the chart at `x`: the new chart is `ℚⁿ` acted on by the
    /// stabilizer `Γ_x`, with `x` moved to the origin. Returns the new chart
    /// and the translated copy of `v`. Since every element of `Γ_x` is linear
    /// and fixes `x`, it acts on `y - x` exactly as on `y`.
    pub fn recenter(&self, x: &[Rational], v: &AffineSubspace) -> Result<(ChartModel, AffineSubspace), SuborbifoldError> {
        self.check_point(x)?;
        let stab = self.group.stabilizer(&self.group.whole(), x);
        let local = ChartModel::new(self.group.subgroup_group(&stab));
        let shift = RatMatrix::identity(self.ambient_dim());
        let minus_x: Vec<Rational> = x.iter().map(|c| -c).collect();
        Ok((local, v.image(&shift, &minus_x)?))
    }

    pub(crate) fn check_point(&self, x: &[Rational]) -> Result<(), SuborbifoldError> {
        if x.len() != self.ambient_dim() {
            return Err(SuborbifoldError::DimensionMismatch {
                expected: self.ambient_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_subspace(&self, v: &AffineSubspace) -> Result<(), SuborbifoldError> {
        if v.ambient_dim() != self.ambient_dim() {
            return Err(SuborbifoldError::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.ambient_dim(),
            });
        }
        Ok(())
    }
}

/// A pair `(Δ, Ṽ)` in a chart with `Ṽ` invariant under `Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuborbifoldCandidate {
    chart: ChartModel,
    delta: Subgroup,
    v: AffineSubspace,
}

impl SuborbifoldCandidate {
    /// Validates dimensions, that `delta` is a subgroup and that `δ·v = v`
    /// for every `δ ∈ delta`.
    pub fn new(chart: ChartModel, delta: Subgroup, v: AffineSubspace) -> Result<Self, SuborbifoldError> {
        chart.check_subspace(&v)?;
        let g = chart.group();
        if delta.members().iter().any(|&i| i >= g.order()) || !g.is_subgroup(&delta) {
            return Err(SuborbifoldError::NotSubgroup);
        }
        for &d in delta.members() {
            if v.linear_image(g.matrix(d))? != v {
                return Err(SuborbifoldError::NotInvariant { element: d });
            }
        }
        Ok(SuborbifoldCandidate { chart, delta, v })
    }

    /// `(Γ, v)`: the whole chart group as `Δ`.
    pub fn with_whole_group(chart: ChartModel, v: AffineSubspace) -> Result<Self, SuborbifoldError> {
        let whole = chart.group().whole();
        Self::new(chart, whole, v)
    }

    /// The point `{x}` with its stabilizer as `Δ`.
    pub fn point(chart: ChartModel, x: Vec<Rational>) -> Result<Self, SuborbifoldError> {
        chart.check_point(&x)?;
        let stab = chart.group().stabilizer(&chart.group().whole(), &x);
        Self::new(chart, stab, AffineSubspace::point(x))
    }

    pub fn chart(&self) -> &ChartModel {
        &self.chart
    }

    pub fn group(&self) -> &FiniteMatrixGroup {
        self.chart.group()
    }

    pub fn delta(&self) -> &Subgroup {
        &self.delta
    }

    pub fn v(&self) -> &AffineSubspace {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    /// Same chart and subspace, different subgroup.
    pub fn with_delta(&self, delta: Subgroup) -> Result<Self, SuborbifoldError> {
        Self::new(self.chart.clone(), delta, self.v.clone())
    }

    /// `K`: elements of `Δ` fixing `Ṽ` pointwise.
    pub fn kernel(&self) -> Subgroup {
        self.group()
            .pointwise_stabilizer(&self.delta, &self.v)
            .expect("candidate dimensions were validated")
    }
}

/// `g` and `h` agree at every point of `w`. Both are linear, so checking the
/// base point and the directions suffices.
pub(crate) fn agree_on(g: &RatMatrix, h: &RatMatrix, w: &AffineSubspace) -> bool {
    g.apply(w.base_point()) == h.apply(w.base_point()) && w.basis().iter().all(|d| g.apply(d) == h.apply(d))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::group::{generate_group, DEFAULT_MAX_ORDER};
    use crate::linalg::int_vec;

    pub fn rot90() -> RatMatrix {
        RatMatrix::from_ints(&[&[0, -1], &[1, 0]])
    }

    pub fn rot180() -> RatMatrix {
        RatMatrix::from_ints(&[&[-1, 0], &[0, -1]])
    }

    pub fn chart(dim: usize, gens: &[RatMatrix]) -> ChartModel {
        ChartModel::new(generate_group(dim, gens, DEFAULT_MAX_ORDER).unwrap())
    }

    pub fn subgroup(c: &ChartModel, gens: &[RatMatrix]) -> Subgroup {
        let idx: Vec<usize> = gens.iter().map(|m| c.group().index_of(m).unwrap()).collect();
        c.group().generate_subgroup(&idx).unwrap()
    }

    pub fn span(n: usize, dirs: &[&[i64]]) -> AffineSubspace {
        let dirs: Vec<Vec<Rational>> = dirs.iter().map(|d| int_vec(d)).collect();
        AffineSubspace::span(n, &dirs).unwrap()
    }

    /// Quarter-turn chart, Δ = ⟨R(π)⟩, Ṽ = x-axis.
    pub fn quarter_turn_line() -> SuborbifoldCandidate {
        let c = chart(2, &[rot90()]);
        let d = subgroup(&c, &[rot180()]);
        SuborbifoldCandidate::new(c, d, span(2, &[&[1, 0]])).unwrap()
    }

    /// Sign flips on ℚ², Δ = {±I}, Ṽ = diagonal.
    pub fn sign_flip_diagonal() -> SuborbifoldCandidate {
        let c = chart(
            2,
            &[RatMatrix::from_ints(&[&[-1, 0], &[0, 1]]), RatMatrix::from_ints(&[&[1, 0], &[0, -1]])],
        );
        let d = subgroup(&c, &[rot180()]);
        SuborbifoldCandidate::new(c, d, span(2, &[&[1, 1]])).unwrap()
    }

    /// diag(i, -1) on ℂ² realified to ℚ⁴ (coordinates re z1, im z1, re z2, im z2),
    /// Δ = Γ, Ṽ = {0} × ℂ.
    pub fn realified_z4() -> SuborbifoldCandidate {
        let re = RatMatrix::from_ints(&[&[0, 0], &[0, -1]]);
        let im = RatMatrix::from_ints(&[&[1, 0], &[0, 0]]);
        let g = RatMatrix::realify(&re, &im).unwrap();
        let c = chart(4, &[g]);
        SuborbifoldCandidate::with_whole_group(c, span(4, &[&[0, 0, 1, 0], &[0, 0, 0, 1]])).unwrap()
    }
}

use std::collections::BTreeMap;

use crate::group::{is_isomorphic, FiniteMatrixGroup, Fingerprint, GroupTable, Subgroup};
use crate::linalg::{AffineSubspace, RatMatrix, Rational};

use super::{check_full, check_saturated, ChartModel, SuborbifoldCandidate, SuborbifoldError};

/// The `k`-dimensional chart `Ṽ/(Δ/K)` together with its coordinates.
#[derive(Clone, Debug)]
pub struct InducedChart {
    pub chart: ChartModel,
    /// A `Δ`-fixed point of `Ṽ`, the origin of the coordinates.
    pub origin: Vec<Rational>,
    /// Coordinate directions: `c ↦ origin + Σ cᵢ·basis[i]`.
    pub basis: Vec<Vec<Rational>>,
    /// Index in the induced group of each element of `Δ`.
    pub restriction_of: BTreeMap<usize, usize>,
    pub kernel: Subgroup,
}

impl InducedChart {
    pub fn to_ambient(&self, coords: &[Rational]) -> Vec<Rational> {
        let mut x = self.origin.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += c * bi;
            }
        }
        x
    }

    /// Coordinates of a point of `v`. The basis is in reduced echelon form,
    /// so the coordinates are the pivot entries of `x - origin`.
    pub fn to_coords(&self, v: &AffineSubspace, x: &[Rational]) -> Option<Vec<Rational>> {
        v.coordinates(&self.origin, x)
    }
}

/// Restricts `Δ` to `Ṽ` in affine coordinates centred at a `Δ`-fixed point.
/// The resulting group has order `|Δ|/|K|`; its identity class is exactly `K`.
pub fn induced_chart(cand: &SuborbifoldCandidate) -> Result<InducedChart, SuborbifoldError> {
    if !check_saturated(cand).holds() {
        return Err(SuborbifoldError::CandidateNotSaturated);
    }
    let g = cand.group();
    let v = cand.v();
    let k = v.dim();
    // Centroid of a Δ-orbit in Ṽ is Δ-fixed and still in Ṽ.
    let orbit = g.orbit(cand.delta(), v.base_point());
    let mut origin = vec![Rational::default(); g.dim()];
    for p in &orbit {
        for (o, c) in origin.iter_mut().zip(p) {
            *o += c;
        }
    }
    let count = Rational::from_integer((orbit.len() as i64).into());
    for o in origin.iter_mut() {
        *o /= &count;
    }
    let mut restricted: BTreeMap<usize, RatMatrix> = BTreeMap::new();
    for &d in cand.delta().members() {
        let m = g.matrix(d);
        if m.apply(&origin) != origin {
            return Err(SuborbifoldError::InvariantViolation("orbit centroid is not fixed".into()));
        }
        let mut entries = Vec::with_capacity(k * k);
        let images: Vec<Vec<Rational>> = v.basis().iter().map(|b| m.apply(b)).collect();
        let mut columns = Vec::with_capacity(k);
        for img in &images {
            columns.push(v.direction_coordinates(img).ok_or(SuborbifoldError::NotInvariant { element: d })?);
        }
        for i in 0..k {
            for col in &columns {
                entries.push(col[i].clone());
            }
        }
        restricted.insert(d, RatMatrix::from_data(k, k, entries)?);
    }
    let group = FiniteMatrixGroup::from_elements(k, restricted.values().cloned().collect())?;
    let restriction_of: BTreeMap<usize, usize> = restricted
        .iter()
        .map(|(&d, m)| (d, group.index_of(m).expect("restriction is an element")))
        .collect();
    let kernel = Subgroup::from_indices(
        restriction_of
            .iter()
            .filter(|(_, &r)| r == group.identity())
            .map(|(&d, _)| d)
            .collect(),
    );
    if kernel != cand.kernel() || group.order() * kernel.order() != cand.delta().order() {
        return Err(SuborbifoldError::InvariantViolation(
            "induced group order differs from |Δ|/|K|".into(),
        ));
    }
    Ok(InducedChart {
        chart: ChartModel::new(group),
        origin,
        basis: v.basis().to_vec(),
        restriction_of,
        kernel,
    })
}

/// Isotropy type of `x` in the chart: the fingerprint of `Γ_x`.
pub fn isotropy_point(chart: &ChartModel, x: &[Rational]) -> Result<Fingerprint, SuborbifoldError> {
    chart.check_point(x)?;
    let g = chart.group();
    let stab = g.stabilizer(&g.whole(), x);
    Ok(g.subgroup_table(&stab)?.fingerprint())
}

/// Isotropy of `x` in the induced suborbifold chart, computed as `Δ_x/K` and
/// cross-checked against the stabilizer inside the induced chart.
pub fn isotropy_sub_point(cand: &SuborbifoldCandidate, x: &[Rational]) -> Result<Fingerprint, SuborbifoldError> {
    let via_quotient = isotropy_via_quotient(cand, x)?;
    let via_chart = isotropy_sub_point_via_chart(cand, x)?;
    if via_quotient != via_chart {
        return Err(SuborbifoldError::InvariantViolation(format!(
            "isotropy mismatch: Δ_x/K is {via_quotient}, induced chart gives {via_chart}"
        )));
    }
    Ok(via_quotient)
}

fn isotropy_via_quotient(cand: &SuborbifoldCandidate, x: &[Rational]) -> Result<Fingerprint, SuborbifoldError> {
    cand.chart().check_point(x)?;
    if !cand.v().contains_point(x) {
        return Err(SuborbifoldError::PointNotInV);
    }
    if !check_saturated(cand).holds() {
        return Err(SuborbifoldError::CandidateNotSaturated);
    }
    let g = cand.group();
    let stab = g.stabilizer(cand.delta(), x);
    let q = g.quotient_group(&stab, &cand.kernel())?;
    Ok(q.group.fingerprint())
}

/// The same isotropy group, read off from the induced chart's own action on
/// the coordinates of `x`.
pub fn isotropy_sub_point_via_chart(
    cand: &SuborbifoldCandidate,
    x: &[Rational],
) -> Result<Fingerprint, SuborbifoldError> {
    cand.chart().check_point(x)?;
    if !cand.v().contains_point(x) {
        return Err(SuborbifoldError::PointNotInV);
    }
    let induced = induced_chart(cand)?;
    let coords = induced.to_coords(cand.v(), x).ok_or(SuborbifoldError::PointNotInV)?;
    isotropy_point(&induced.chart, &coords)
}

/// `Γ_x/Ω` where `Ω` fixes `v` pointwise. Needs `Γ` abelian so that `Ω` is normal.
pub fn abelian_omega_isotropy(
    chart: &ChartModel,
    v: &AffineSubspace,
    x: &[Rational],
) -> Result<Fingerprint, SuborbifoldError> {
    chart.check_subspace(v)?;
    chart.check_point(x)?;
    let g = chart.group();
    if !g.is_abelian() {
        return Err(SuborbifoldError::GroupNotAbelian);
    }
    if !v.contains_point(x) {
        return Err(SuborbifoldError::PointNotInV);
    }
    let omega = g.pointwise_stabilizer(&g.whole(), v)?;
    let stab = g.stabilizer(&g.whole(), x);
    Ok(g.quotient_group(&stab, &omega)?.group.fingerprint())
}

/// Compares the suborbifold isotropy `Δ_x/K` with `Γ_x/Ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionProbe {
    pub sub_isotropy: Fingerprint,
    pub omega_isotropy: Fingerprint,
}

impl ObstructionProbe {
    /// Different groups rule out any full structure at this point.
    pub fn is_obstruction(&self) -> bool {
        self.sub_isotropy != self.omega_isotropy
    }
}

pub fn full_obstruction_probe(cand: &SuborbifoldCandidate, x: &[Rational]) -> Result<ObstructionProbe, SuborbifoldError> {
    if !cand.group().is_abelian() {
        return Err(SuborbifoldError::GroupNotAbelian);
    }
    let sub_isotropy = isotropy_sub_point(cand, x)?;
    let omega_isotropy = abelian_omega_isotropy(cand.chart(), cand.v(), x)?;
    Ok(ObstructionProbe {
        sub_isotropy,
        omega_isotropy,
    })
}

/// A chart localized at a point of a full candidate: the group is `Γ_x`,
/// which leaves `Ṽ` invariant.
#[derive(Clone, Debug)]
pub struct FullChart {
    pub chart: ChartModel,
    /// `Γ_x` as a subgroup of the original chart group.
    pub stabilizer: Subgroup,
}

pub fn full_characterization_chart(cand: &SuborbifoldCandidate, x: &[Rational]) -> Result<FullChart, SuborbifoldError> {
    cand.chart().check_point(x)?;
    if !cand.v().contains_point(x) {
        return Err(SuborbifoldError::PointNotInV);
    }
    if !check_full(cand)?.holds() {
        return Err(SuborbifoldError::CandidateNotFull);
    }
    let g = cand.group();
    let stabilizer = g.stabilizer(&g.whole(), x);
    let local = ChartModel::new(g.subgroup_group(&stabilizer));
    // fails with NotInvariant if Γ_x does not preserve Ṽ
    SuborbifoldCandidate::with_whole_group(local.clone(), cand.v().clone())?;
    let local_iso = local.group().subgroup_table(&local.group().whole())?;
    let delta_iso = g.subgroup_table(&g.stabilizer(cand.delta(), x))?;
    if is_isomorphic(&local_iso, &delta_iso) == Some(false) {
        return Err(SuborbifoldError::InvariantViolation("Γ_x and Δ_x differ on a full candidate".into()));
    }
    Ok(FullChart { chart: local, stabilizer })
}

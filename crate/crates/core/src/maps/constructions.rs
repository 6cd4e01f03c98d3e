use crate::group::{GroupHom, GroupTable, Subgroup};
use crate::linalg::{direction_sum_is_full, intersect, solve_affine, sub_vec, AffineSet, AffineSubspace, RatMatrix, Rational};
use crate::suborbifold::{
    check_embedded, check_full, check_saturated, contained_in_regular_part, induced_chart, ChartModel,
    EmbeddedVerdict, SuborbifoldCandidate, SuborbifoldError,
};

use super::{product_chart, product_map, EquivariantAffineMap, MapError, ProductChart};

/// Graph of a map as a candidate in the product chart.
#[derive(Clone, Debug)]
pub struct GraphSuborbifold {
    pub product: ProductChart,
    pub candidate: SuborbifoldCandidate,
    /// Whether the graph is full, which happens exactly when the image avoids
    /// every fixed point of a nontrivial codomain element.
    pub full: bool,
}

/// `Ṽ = {(x, f(x))}` with `Δ = {(γ, Θ(γ))}`. The graph is always saturated
/// and acts effectively (distinct `γ` move `x` differently); both facts and
/// the fullness criterion are re-checked before returning.
pub fn graph_suborbifold(f: &EquivariantAffineMap) -> Result<GraphSuborbifold, MapError> {
    let product = product_chart(f.domain(), f.codomain())?;
    let n1 = f.domain().ambient_dim();
    let mut base = vec![Rational::default(); n1];
    base.extend_from_slice(f.offset());
    let directions: Vec<Vec<Rational>> = (0..n1)
        .map(|i| {
            let mut d = vec![Rational::default(); n1];
            d[i] = Rational::from_integer(1.into());
            d.extend(f.linear().column(i));
            d
        })
        .collect();
    let v = AffineSubspace::new(base, &directions)?;
    let delta = Subgroup::from_indices(
        (0..f.domain().group().order())
            .map(|i| product.pair_index(i, f.theta().apply(i)))
            .collect(),
    );
    let candidate = SuborbifoldCandidate::new(product.combined.clone(), delta, v)?;
    if !check_saturated(&candidate).holds() || !check_embedded(&candidate, false)?.holds() {
        return Err(MapError::InvariantViolation("graph is not an embedded suborbifold".into()));
    }
    let full = check_full(&candidate)?.holds();
    if full != contained_in_regular_part(f.codomain(), &f.image_hull()) {
        return Err(MapError::InvariantViolation(
            "graph fullness disagrees with the regular-part criterion".into(),
        ));
    }
    Ok(GraphSuborbifold {
        product,
        candidate,
        full,
    })
}

/// Pushes a saturated candidate of the domain forward along an immersion.
///
/// Injectivity on quotients is decided exactly: for each codomain element `γ`
/// the pairs `(x, y)` with `f(x) = γ f(y)` form an affine space, which must lie
/// inside one `{x = γ₁ y}`; by irreducibility a finite union would not do.
pub fn image_suborbifold(
    f: &EquivariantAffineMap,
    cand: &SuborbifoldCandidate,
) -> Result<SuborbifoldCandidate, MapError> {
    if cand.chart() != f.domain() {
        return Err(MapError::ChartMismatch);
    }
    if !f.is_immersion() {
        return Err(MapError::NotImmersion {
            rank: f.rank(),
            dim: f.domain().ambient_dim(),
        });
    }
    if !f.theta().is_injective() {
        return Err(MapError::ThetaNotInjective);
    }
    if !check_saturated(cand).holds() {
        return Err(SuborbifoldError::CandidateNotSaturated.into());
    }
    check_quotient_injective(f)?;
    let g2 = f.codomain().group();
    let delta = Subgroup::from_indices(cand.delta().members().iter().map(|&d| f.theta().apply(d)).collect());
    debug_assert!(g2.is_subgroup(&delta));
    let v = cand.v().image(f.linear(), f.offset())?;
    let image = SuborbifoldCandidate::new(f.codomain().clone(), delta, v)?;
    if image.dim() != cand.dim() || !check_saturated(&image).holds() {
        return Err(MapError::InvariantViolation("image of a saturated candidate is not saturated".into()));
    }
    if check_embedded(cand, false)?.holds() && !check_embedded(&image, false)?.holds() {
        return Err(MapError::InvariantViolation("image lost the embedded property".into()));
    }
    Ok(image)
}

fn check_quotient_injective(f: &EquivariantAffineMap) -> Result<(), MapError> {
    let (g1, g2) = (f.domain().group(), f.codomain().group());
    let n1 = f.domain().ambient_dim();
    for gamma in 0..g2.order() {
        let gm = g2.matrix(gamma);
        // [A | -γA] (x, y) = γb - b
        let ga = gm * f.linear();
        let mut rows = Vec::with_capacity(f.linear().rows());
        for r in 0..f.linear().rows() {
            let mut row = f.linear().row(r).to_vec();
            row.extend(ga.row(r).iter().map(|c| -c));
            rows.push(row);
        }
        let system = RatMatrix::from_rows_with_cols(&rows, 2 * n1)?;
        let rhs = sub_vec(&gm.apply(f.offset()), f.offset());
        let AffineSet::Space(solutions) = solve_affine(&system, &rhs)? else { continue };
        let splits = |v: &[Rational]| (v[..n1].to_vec(), v[n1..].to_vec());
        let covered = (0..g1.order()).any(|g| {
            let m = g1.matrix(g);
            let (x, y) = splits(solutions.base_point());
            m.apply(&y) == x
                && solutions.basis().iter().all(|d| {
                    let (dx, dy) = splits(d);
                    m.apply(&dy) == dx
                })
        });
        if !covered {
            return Err(MapError::NotInjectiveOnQuotient {
                element: gamma,
                solutions,
            });
        }
    }
    Ok(())
}

fn require_full(cand: &SuborbifoldCandidate) -> Result<(), MapError> {
    match check_full(cand) {
        Ok(v) if v.holds() => Ok(()),
        Ok(_) | Err(SuborbifoldError::CandidateNotSaturated) => Err(MapError::CandidateNotFull),
        Err(e) => Err(e.into()),
    }
}

/// Two full candidates of one chart meeting in a point with complementary
/// directions. For affine data the pointwise transversality is one check.
pub fn transverse_candidates(
    chart: &ChartModel,
    a: &SuborbifoldCandidate,
    b: &SuborbifoldCandidate,
) -> Result<bool, MapError> {
    if a.chart() != chart || b.chart() != chart {
        return Err(MapError::ChartMismatch);
    }
    require_full(a)?;
    require_full(b)?;
    Ok(!intersect(a.v(), b.v())?.is_empty() && direction_sum_is_full(a.v(), b.v())?)
}

/// `(Δ₁ ∩ Δ₂, Ṽ₁ ∩ Ṽ₂)`, full of dimension `k₁ + k₂ - n`.
pub fn intersect_full(a: &SuborbifoldCandidate, b: &SuborbifoldCandidate) -> Result<SuborbifoldCandidate, MapError> {
    if !transverse_candidates(a.chart(), a, b)? {
        return Err(MapError::NotTransverse);
    }
    let AffineSet::Space(v) = intersect(a.v(), b.v())? else {
        return Err(MapError::NotTransverse);
    };
    let delta = a.delta().intersection(b.delta());
    let cand = SuborbifoldCandidate::new(a.chart().clone(), delta, v)?;
    let n = a.chart().ambient_dim();
    if cand.dim() + n != a.dim() + b.dim() {
        return Err(MapError::InvariantViolation(format!(
            "intersection has dimension {}, expected {} + {} - {n}",
            cand.dim(),
            a.dim(),
            b.dim()
        )));
    }
    if !check_full(&cand)?.holds() {
        return Err(MapError::InvariantViolation("transverse intersection is not full".into()));
    }
    Ok(cand)
}

/// `f⁻¹(Q)` for a full `Q` in the codomain, with `Δ = Θ⁻¹(Δ_Q)`. When
/// `Δ_Q` is the whole codomain group this is the whole domain group.
/// Transversality means `im A + dir(Ṽ)` spans the codomain.
pub fn preimage_suborbifold(
    f: &EquivariantAffineMap,
    q: &SuborbifoldCandidate,
) -> Result<SuborbifoldCandidate, MapError> {
    if q.chart() != f.codomain() {
        return Err(MapError::ChartMismatch);
    }
    require_full(q)?;
    // A transverse affine map always meets Ṽ, so emptiness is reported first.
    let AffineSet::Space(v) = q.v().preimage(f.linear(), f.offset())? else {
        return Err(MapError::EmptyPreimage);
    };
    let n2 = f.codomain().ambient_dim();
    let mut spanning: Vec<Vec<Rational>> = (0..f.linear().cols()).map(|j| f.linear().column(j)).collect();
    spanning.extend(q.v().basis().iter().cloned());
    if RatMatrix::from_rows_with_cols(&spanning, n2)?.rank() != n2 {
        return Err(MapError::NotTransverseToQ);
    }
    let g1 = f.domain().group();
    let delta = Subgroup::from_indices(
        (0..g1.order())
            .filter(|&g| q.delta().contains(f.theta().apply(g)))
            .collect(),
    );
    let cand = SuborbifoldCandidate::new(f.domain().clone(), delta, v)?;
    let n1 = f.domain().ambient_dim();
    if cand.dim() + n2 != n1 + q.dim() {
        return Err(MapError::InvariantViolation(format!(
            "preimage has dimension {}, expected {n1} - ({n2} - {})",
            cand.dim(),
            q.dim()
        )));
    }
    if !check_full(&cand)?.holds() {
        return Err(MapError::InvariantViolation("preimage of a full candidate is not full".into()));
    }
    Ok(cand)
}

#[derive(Clone, Debug)]
pub struct FiberedProduct {
    pub product: ProductChart,
    pub candidate: SuborbifoldCandidate,
}

/// `{(x, y) : f₁(x) = f₂(y)}` for two submersions into a manifold chart,
/// as the preimage of the diagonal under `f₁ × f₂`.
pub fn fibered_product(f1: &EquivariantAffineMap, f2: &EquivariantAffineMap) -> Result<FiberedProduct, MapError> {
    for f in [f1, f2] {
        if !f.is_submersion() {
            return Err(MapError::NotSubmersion {
                rank: f.rank(),
                dim: f.codomain().ambient_dim(),
            });
        }
        if !f.codomain().is_manifold() {
            return Err(MapError::CodomainNotManifold);
        }
    }
    let m = f1.codomain().ambient_dim();
    if f2.codomain().ambient_dim() != m {
        return Err(MapError::DimensionMismatch {
            expected: m,
            found: f2.codomain().ambient_dim(),
        });
    }
    let product = product_chart(f1.domain(), f2.domain())?;
    let target = product_chart(f1.codomain(), f2.codomain())?;
    let map = product_map(f1, f2, &product, &target)?;
    let diagonal_dirs: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut d = vec![Rational::default(); 2 * m];
            d[i] = Rational::from_integer(1.into());
            d[m + i] = Rational::from_integer(1.into());
            d
        })
        .collect();
    let diagonal = SuborbifoldCandidate::with_whole_group(
        target.combined.clone(),
        AffineSubspace::span(2 * m, &diagonal_dirs)?,
    )?;
    let candidate = preimage_suborbifold(&map, &diagonal)?;
    let (n1, n2) = (f1.domain().ambient_dim(), f2.domain().ambient_dim());
    if candidate.dim() + m != n1 + n2 {
        return Err(MapError::InvariantViolation("fibered product has the wrong dimension".into()));
    }
    Ok(FiberedProduct { product, candidate })
}

/// Preimage of a point `q` of full rank, taken as the point candidate `{q}`
/// with its stabilizer.
pub fn regular_value_preimage(f: &EquivariantAffineMap, q: &[Rational]) -> Result<SuborbifoldCandidate, MapError> {
    let n2 = f.codomain().ambient_dim();
    if q.len() != n2 {
        return Err(MapError::DimensionMismatch {
            expected: n2,
            found: q.len(),
        });
    }
    if f.rank() != n2 {
        return Err(MapError::RankDeficient { rank: f.rank(), dim: n2 });
    }
    if solve_affine(f.linear(), &sub_vec(q, f.offset()))?.is_empty() {
        return Err(MapError::NotInImage);
    }
    let point = SuborbifoldCandidate::point(f.codomain().clone(), q.to_vec())?;
    let cand = preimage_suborbifold(f, &point)?;
    if cand.dim() + n2 != f.domain().ambient_dim() {
        return Err(MapError::InvariantViolation("regular value preimage has the wrong dimension".into()));
    }
    Ok(cand)
}

/// For an embedded candidate, the inclusion of its induced chart
/// `ℚᵏ/(Δ′)` into the ambient chart, with `Θ` the splitting `Δ/K → Δ′`,
/// together with the image of the whole model space.
pub fn embedding_from_induced_chart(
    cand: &SuborbifoldCandidate,
) -> Result<(EquivariantAffineMap, SuborbifoldCandidate), MapError> {
    let effective = match check_embedded(cand, true)?.verdict {
        EmbeddedVerdict::Split { complement } => complement,
        EmbeddedVerdict::Alternative { delta } => delta,
        EmbeddedVerdict::NotEmbedded { .. } => return Err(MapError::NotEmbedded),
    };
    let split = cand.with_delta(effective)?;
    let induced = induced_chart(&split)?;
    let k = split.dim();
    let n = cand.chart().ambient_dim();
    let columns: Vec<Vec<Rational>> = induced.basis.clone();
    let mut entries = Vec::with_capacity(n * k);
    for i in 0..n {
        for col in &columns {
            entries.push(col[i].clone());
        }
    }
    let linear = RatMatrix::from_data(n, k, entries)?;
    // kernel is trivial, so restriction is a bijection Δ′ → induced group
    let mut image_of = vec![usize::MAX; induced.chart.group().order()];
    for (&d, &r) in &induced.restriction_of {
        image_of[r] = d;
    }
    let theta = GroupHom { image_of };
    let map = EquivariantAffineMap::new(
        induced.chart.clone(),
        cand.chart().clone(),
        linear,
        induced.origin.clone(),
        theta,
    )?;
    let model = SuborbifoldCandidate::with_whole_group(induced.chart.clone(), AffineSubspace::whole(k))?;
    let image = image_suborbifold(&map, &model)?;
    Ok((map, image))
}

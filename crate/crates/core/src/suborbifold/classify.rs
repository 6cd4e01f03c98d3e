use rayon::prelude::*;

use crate::group::{ComplementSearch, Fingerprint, GroupTable, NoComplementCertificate, Subgroup};
use crate::linalg::{fixed_space, intersect, AffineSet, Rational};

use super::{agree_on, isotropy_sub_point, SuborbifoldCandidate, SuborbifoldError};

/// `g·point ∈ Ṽ` for a point of `Ṽ`, yet no element of `Δ` sends `point` there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationWitness {
    pub element: usize,
    pub point: Vec<Rational>,
}

impl SaturationWitness {
    /// Re-checks the refutation from scratch.
    pub fn replays(&self, cand: &SuborbifoldCandidate) -> bool {
        let g = cand.group();
        if self.element >= g.order() || !cand.v().contains_point(&self.point) {
            return false;
        }
        let image = g.act(self.element, &self.point);
        cand.v().contains_point(&image) && cand.delta().members().iter().all(|&h| g.act(h, &self.point) != image)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SaturationVerdict {
    Saturated,
    NotSaturated(SaturationWitness),
}

impl SaturationVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SaturationVerdict::Saturated)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonFullWitness {
    /// `element ∉ Δ` fixes `point ∈ Ṽ`.
    FixedPoint { element: usize, point: Vec<Rational> },
    /// The candidate is not saturated; `element ∉ Δ` moves `point ∈ Ṽ` back into `Ṽ`.
    ForeignTranslate { element: usize, point: Vec<Rational> },
}

impl NonFullWitness {
    pub fn element(&self) -> usize {
        match self {
            NonFullWitness::FixedPoint { element, .. } | NonFullWitness::ForeignTranslate { element, .. } => *element,
        }
    }

    pub fn point(&self) -> &[Rational] {
        match self {
            NonFullWitness::FixedPoint { point, .. } | NonFullWitness::ForeignTranslate { point, .. } => point,
        }
    }

    pub fn replays(&self, cand: &SuborbifoldCandidate) -> bool {
        let g = cand.group();
        let (element, point) = (self.element(), self.point());
        if element >= g.order() || cand.delta().contains(element) || !cand.v().contains_point(point) {
            return false;
        }
        let image = g.act(element, point);
        match self {
            NonFullWitness::FixedPoint { .. } => image.as_slice() == point,
            NonFullWitness::ForeignTranslate { .. } => cand.v().contains_point(&image),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FullVerdict {
    Full,
    NotFull(NonFullWitness),
}

impl FullVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, FullVerdict::Full)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddedVerdict {
    /// `complement` maps isomorphically onto `Δ/K` and acts effectively on `Ṽ`.
    Split { complement: Subgroup },
    /// The given `Δ` does not split, but `delta` (another subgroup of the
    /// chart group) acts effectively with `Ṽ` saturated.
    Alternative { delta: Subgroup },
    /// No complement of `K` in `Δ`. `subgroups_searched` is set when every
    /// subgroup of the chart group was also tried.
    NotEmbedded {
        certificate: NoComplementCertificate,
        subgroups_searched: Option<usize>,
    },
}

/// Embeddedness relative to the supplied chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedCheck {
    pub kernel: Subgroup,
    pub verdict: EmbeddedVerdict,
}

impl EmbeddedCheck {
    pub fn holds(&self) -> bool {
        !matches!(self.verdict, EmbeddedVerdict::NotEmbedded { .. })
    }
}

/// Re-verification of a splitting `Δ = Δ′ ⋉ K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplittingCheck {
    pub effective: bool,
    pub saturated: bool,
    pub product_is_delta: bool,
    pub trivial_intersection: bool,
}

impl SplittingCheck {
    pub fn holds(&self) -> bool {
        self.effective && self.saturated && self.product_is_delta && self.trivial_intersection
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClassifyOptions {
    /// Also try every subgroup of the chart group when `Δ` itself does not split.
    pub search_all_delta: bool,
    /// Points of `Ṽ` at which to report the induced isotropy group.
    pub query_points: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropyAt {
    pub point: Vec<Rational>,
    pub fingerprint: Fingerprint,
}

/// All verdicts for one candidate. `embedded` is `None` when the candidate is
/// not saturated, since embeddedness is only defined for saturated ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub saturated: SaturationVerdict,
    pub full: FullVerdict,
    pub embedded: Option<EmbeddedCheck>,
    pub kernel: Subgroup,
    pub isotropy: Vec<IsotropyAt>,
}

/// Is `Ṽ` a `Δ`-submanifold, i.e. does every `Γ`-orbit meet `Ṽ` in a single
/// `Δ`-orbit?
///
/// For each `g`, the points of `Ṽ` that `g` keeps in `Ṽ` form the affine
/// space `W_g = Ṽ ∩ g⁻¹Ṽ`. Saturation asks that every `x ∈ W_g` has some
/// `h ∈ Δ` with `hx = gx`, i.e. `W_g` is covered by the finitely many
/// subspaces `{x : gx = hx}`. An affine space over an infinite field is never
/// a finite union of proper subspaces, so one `h` must work on all of `W_g`.
/// That is the only place where the pointwise condition gets strengthened.
///
/// On failure the witness is the first offending `g` in canonical order,
/// paired with the first point of the moment curve of `W_g` avoiding every
/// `{gx = hx}`.
pub fn check_saturated(cand: &SuborbifoldCandidate) -> SaturationVerdict {
    let g = cand.group();
    let v = cand.v();
    let zero = vec![Rational::default(); g.dim()];
    for gi in 0..g.order() {
        if cand.delta().contains(gi) {
            continue;
        }
        let gm = g.matrix(gi);
        let back = v.preimage(gm, &zero).expect("candidate dimensions were validated");
        let AffineSet::Space(back) = back else { continue };
        let AffineSet::Space(w) = intersect(v, &back).expect("same ambient") else { continue };
        let deltas = cand.delta().members();
        if deltas.iter().any(|&h| agree_on(gm, g.matrix(h), &w)) {
            continue;
        }
        let point = (0i64..)
            .map(|t| w.moment_point(t))
            .find(|x| {
                let gx = gm.apply(x);
                deltas.iter().all(|&h| g.act(h, x) != gx)
            })
            .expect("the moment curve escapes finitely many proper subspaces");
        return SaturationVerdict::NotSaturated(SaturationWitness { element: gi, point });
    }
    SaturationVerdict::Saturated
}

/// For a saturated candidate, fullness means `Γ_x = Δ_x` on `Ṽ`, so it fails
/// exactly when some `g ∉ Δ` has a fixed point in `Ṽ`. The witness is the
/// first such `g` with the canonical base point of `Fix(g) ∩ Ṽ`.
pub fn check_full(cand: &SuborbifoldCandidate) -> Result<FullVerdict, SuborbifoldError> {
    if !check_saturated(cand).holds() {
        return Err(SuborbifoldError::CandidateNotSaturated);
    }
    Ok(fixed_point_outside_delta(cand))
}

fn fixed_point_outside_delta(cand: &SuborbifoldCandidate) -> FullVerdict {
    let g = cand.group();
    for gi in 0..g.order() {
        if cand.delta().contains(gi) {
            continue;
        }
        let fix = fixed_space(g.matrix(gi)).expect("group elements are square");
        let AffineSet::Space(fix) = fix else { continue };
        if let AffineSet::Space(meet) = intersect(&fix, cand.v()).expect("same ambient") {
            return FullVerdict::NotFull(NonFullWitness::FixedPoint {
                element: gi,
                point: meet.base_point().to_vec(),
            });
        }
    }
    FullVerdict::Full
}

/// Does `Δ → Δ/K` split, where `K` fixes `Ṽ` pointwise? A complement acts
/// effectively on `Ṽ` and still saturates it. With `search_all_delta`, every
/// subgroup of the chart group acting effectively with `Ṽ` saturated is also
/// accepted. Verdicts are relative to this one chart.
pub fn check_embedded(cand: &SuborbifoldCandidate, search_all_delta: bool) -> Result<EmbeddedCheck, SuborbifoldError> {
    if !check_saturated(cand).holds() {
        return Err(SuborbifoldError::CandidateNotSaturated);
    }
    let g = cand.group();
    let kernel = cand.kernel();
    let certificate = match g.find_complement(cand.delta(), &kernel)? {
        ComplementSearch::Found(complement) => {
            let check = verify_splitting(cand, &kernel, &complement)?;
            if !check.holds() {
                return Err(SuborbifoldError::InvariantViolation(format!(
                    "complement failed re-verification: {check:?}"
                )));
            }
            return Ok(EmbeddedCheck {
                kernel,
                verdict: EmbeddedVerdict::Split { complement },
            });
        }
        ComplementSearch::NotFound(cert) => cert,
    };
    if !search_all_delta {
        return Ok(EmbeddedCheck {
            kernel,
            verdict: EmbeddedVerdict::NotEmbedded {
                certificate,
                subgroups_searched: None,
            },
        });
    }
    let subgroups = g.all_subgroups()?;
    let effective: Vec<bool> = subgroups
        .par_iter()
        .map(|s| acts_effectively_and_saturates(cand, s))
        .collect();
    // first hit in canonical order, independent of scheduling
    let verdict = match subgroups.iter().zip(&effective).find(|(_, &ok)| ok) {
        Some((s, _)) => EmbeddedVerdict::Alternative { delta: s.clone() },
        None => EmbeddedVerdict::NotEmbedded {
            certificate,
            subgroups_searched: Some(subgroups.len()),
        },
    };
    Ok(EmbeddedCheck { kernel, verdict })
}

fn acts_effectively_and_saturates(cand: &SuborbifoldCandidate, s: &Subgroup) -> bool {
    let Ok(other) = cand.with_delta(s.clone()) else {
        return false;
    };
    other.kernel().is_trivial() && check_saturated(&other).holds()
}

/// Re-checks a complement `Δ′` of `K` in `Δ` from first principles.
pub fn verify_splitting(
    cand: &SuborbifoldCandidate,
    kernel: &Subgroup,
    complement: &Subgroup,
) -> Result<SplittingCheck, SuborbifoldError> {
    let g = cand.group();
    let Ok(restricted) = cand.with_delta(complement.clone()) else {
        return Ok(SplittingCheck {
            effective: false,
            saturated: false,
            product_is_delta: false,
            trivial_intersection: false,
        });
    };
    let mut product: Vec<usize> = complement
        .members()
        .iter()
        .flat_map(|&a| kernel.members().iter().map(move |&b| g.mul(a, b)))
        .collect();
    product.sort_unstable();
    product.dedup();
    Ok(SplittingCheck {
        effective: restricted.kernel().is_trivial(),
        saturated: check_saturated(&restricted).holds(),
        product_is_delta: product == cand.delta().members(),
        trivial_intersection: complement.intersection(kernel).is_trivial(),
    })
}

/// Runs every check on one candidate.
pub fn classify(cand: &SuborbifoldCandidate, options: &ClassifyOptions) -> Result<ClassificationReport, SuborbifoldError> {
    let saturated = check_saturated(cand);
    let kernel = cand.kernel();
    let (full, embedded, isotropy) = match &saturated {
        SaturationVerdict::NotSaturated(w) => (
            // gx ∈ Ṽ with no h ∈ Δ doing the same, so in particular g ∉ Δ
            FullVerdict::NotFull(NonFullWitness::ForeignTranslate {
                element: w.element,
                point: w.point.clone(),
            }),
            None,
            Vec::new(),
        ),
        SaturationVerdict::Saturated => {
            let full = fixed_point_outside_delta(cand);
            let embedded = check_embedded(cand, options.search_all_delta)?;
            let isotropy = options
                .query_points
                .iter()
                .map(|x| {
                    Ok(IsotropyAt {
                        point: x.clone(),
                        fingerprint: isotropy_sub_point(cand, x)?,
                    })
                })
                .collect::<Result<Vec<_>, SuborbifoldError>>()?;
            (full, Some(embedded), isotropy)
        }
    };
    Ok(ClassificationReport {
        saturated,
        full,
        embedded,
        kernel,
        isotropy,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::linalg::{int_vec, AffineSubspace, RatMatrix};

    #[test]
    fn quarter_turn_line_is_saturated_embedded_not_full() {
        let cand = quarter_turn_line();
        assert!(check_saturated(&cand).holds());
        let FullVerdict::NotFull(w) = check_full(&cand).unwrap() else {
            panic!("expected not full")
        };
        assert_eq!(cand.group().matrix(w.element()), &rot90());
        assert_eq!(w.point(), int_vec(&[0, 0]).as_slice());
        assert!(w.replays(&cand));
        let emb = check_embedded(&cand, false).unwrap();
        assert!(emb.kernel.is_trivial());
        assert_eq!(emb.verdict, EmbeddedVerdict::Split { complement: cand.delta().clone() });
    }

    #[test]
    fn trivial_delta_on_line_is_not_saturated() {
        let c = chart(2, &[rot90()]);
        let trivial = c.group().trivial();
        let cand = SuborbifoldCandidate::new(c, trivial, span(2, &[&[1, 0]])).unwrap();
        let SaturationVerdict::NotSaturated(w) = check_saturated(&cand) else {
            panic!("expected not saturated")
        };
        assert_eq!(cand.group().matrix(w.element), &rot180());
        assert_eq!(w.point, int_vec(&[1, 0]));
        assert!(w.replays(&cand));
        assert_eq!(check_full(&cand), Err(SuborbifoldError::CandidateNotSaturated));
        assert_eq!(check_embedded(&cand, true), Err(SuborbifoldError::CandidateNotSaturated));
        let report = classify(&cand, &ClassifyOptions::default()).unwrap();
        assert!(!report.full.holds());
        assert!(report.embedded.is_none());
    }

    #[test]
    fn diagonal_under_sign_flips_is_saturated_not_full() {
        let cand = sign_flip_diagonal();
        assert!(check_saturated(&cand).holds());
        let FullVerdict::NotFull(w) = check_full(&cand).unwrap() else {
            panic!("expected not full")
        };
        assert_eq!(w.point(), int_vec(&[0, 0]).as_slice());
        assert!(w.replays(&cand));
    }

    #[test]
    fn realified_z4_is_full_but_not_embedded() {
        let cand = realified_z4();
        assert!(check_full(&cand).unwrap().holds());
        let emb = check_embedded(&cand, true).unwrap();
        assert_eq!(emb.kernel.order(), 2);
        match emb.verdict {
            EmbeddedVerdict::NotEmbedded {
                certificate,
                subgroups_searched,
            } => {
                assert_eq!(subgroups_searched, Some(3));
                assert_eq!(certificate.subgroups_examined, 3);
                assert_eq!(certificate.blocked.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn whole_space_and_points_are_full_and_embedded() {
        let charts = [
            chart(2, &[rot90()]),
            chart(
                2,
                &[RatMatrix::from_ints(&[&[-1, 0], &[0, 1]]), RatMatrix::from_ints(&[&[1, 0], &[0, -1]])],
            ),
            realified_z4().chart().clone(),
        ];
        for c in charts {
            let n = c.ambient_dim();
            let whole = SuborbifoldCandidate::with_whole_group(c.clone(), AffineSubspace::whole(n)).unwrap();
            let report = classify(&whole, &ClassifyOptions::default()).unwrap();
            assert!(report.full.holds());
            assert!(report.embedded.unwrap().holds());

            let origin = SuborbifoldCandidate::point(c.clone(), vec![Rational::default(); n]).unwrap();
            let report = classify(&origin, &ClassifyOptions::default()).unwrap();
            assert!(report.full.holds());
            let emb = report.embedded.unwrap();
            assert_eq!(emb.verdict, EmbeddedVerdict::Split { complement: c.group().trivial() });
        }
    }

    #[test]
    fn kernel_equal_to_delta_splits_trivially() {
        let flip = RatMatrix::from_ints(&[&[1, 0], &[0, -1]]);
        let c = chart(2, &[flip]);
        let cand = SuborbifoldCandidate::with_whole_group(c.clone(), span(2, &[&[1, 0]])).unwrap();
        let emb = check_embedded(&cand, false).unwrap();
        assert_eq!(emb.kernel.order(), 2);
        assert_eq!(emb.verdict, EmbeddedVerdict::Split { complement: c.group().trivial() });
    }

    #[test]
    fn search_all_finds_alternative_subgroup() {
        // g = (-1) ⊕ R(π/2) acts on the t-axis by -1 with kernel ⟨g²⟩, which has
        // no complement in ⟨g⟩; h = diag(-1, 1, 1) acts the same way effectively.
        let g = RatMatrix::from_ints(&[&[-1, 0, 0], &[0, 0, -1], &[0, 1, 0]]);
        let h = RatMatrix::from_ints(&[&[-1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let c = chart(3, &[g.clone(), h]);
        let delta = subgroup(&c, &[g]);
        let cand = SuborbifoldCandidate::new(c, delta, span(3, &[&[1, 0, 0]])).unwrap();
        assert!(check_saturated(&cand).holds());
        assert!(!check_embedded(&cand, false).unwrap().holds());
        match check_embedded(&cand, true).unwrap().verdict {
            EmbeddedVerdict::Alternative { delta } => {
                let other = cand.with_delta(delta).unwrap();
                assert!(other.kernel().is_trivial());
                assert!(check_saturated(&other).holds());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

use crate::group::{GroupTable, Subgroup};
use crate::linalg::{fixed_space, intersect, AffineSet, AffineSubspace, Rational};

use super::ChartModel;

/// True iff no nontrivial element of the chart group fixes a point of `v`,
/// i.e. `v` lies in the regular part of the chart.
pub fn contained_in_regular_part(chart: &ChartModel, v: &AffineSubspace) -> bool {
    let g = chart.group();
    (0..g.order()).filter(|&i| i != g.identity()).all(|i| {
        match fixed_space(g.matrix(i)).expect("group elements are square") {
            AffineSet::Empty => true,
            AffineSet::Space(fix) => intersect(&fix, v).map(|s| s.is_empty()).unwrap_or(true),
        }
    })
}

/// Outcome of sampling the map `Ṽ/H → ℚⁿ/Γ` for injectivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectivityProbe {
    pub pairs_checked: usize,
    /// Pairs lying in one `Γ`-orbit.
    pub same_orbit_pairs: usize,
    /// First pair in one `Γ`-orbit but in different `H`-orbits.
    pub failure: Option<(Vec<Rational>, Vec<Rational>)>,
}

impl InjectivityProbe {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// For every sampled pair `x, y ∈ v` with `Γx = Γy`, checks `Hx = Hy`.
/// Points outside `v` are skipped. This is a sampling check, not a decision
/// procedure; for saturated candidates it always passes.
pub fn quotient_injectivity_probe(
    chart: &ChartModel,
    h: &Subgroup,
    v: &AffineSubspace,
    pairs: &[(Vec<Rational>, Vec<Rational>)],
) -> InjectivityProbe {
    let g = chart.group();
    let mut probe = InjectivityProbe {
        pairs_checked: 0,
        same_orbit_pairs: 0,
        failure: None,
    };
    for (x, y) in pairs {
        if !v.contains_point(x) || !v.contains_point(y) {
            continue;
        }
        probe.pairs_checked += 1;
        let same_g = (0..g.order()).any(|i| g.act(i, x) == *y);
        if !same_g {
            continue;
        }
        probe.same_orbit_pairs += 1;
        let same_h = h.members().iter().any(|&i| g.act(i, x) == *y);
        if !same_h && probe.failure.is_none() {
            probe.failure = Some((x.clone(), y.clone()));
        }
    }
    probe
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::linalg::{frac, int_vec};

    #[test]
    fn regular_part() {
        let c = chart(2, &[rot180()]);
        let shifted = AffineSubspace::new(int_vec(&[0, 1]), &[int_vec(&[1, 0])]).unwrap();
        assert!(contained_in_regular_part(&c, &shifted));
        assert!(!contained_in_regular_part(&c, &span(2, &[&[1, 0]])));
        let trivial = ChartModel::manifold(2);
        assert!(contained_in_regular_part(&trivial, &AffineSubspace::whole(2)));
    }

    fn line_pairs() -> Vec<(Vec<Rational>, Vec<Rational>)> {
        (1..=10)
            .map(|k| (vec![frac(k, 3), frac(0, 1)], vec![frac(-k, 3), frac(0, 1)]))
            .collect()
    }

    #[test]
    fn injectivity_on_saturated_line() {
        let cand = quarter_turn_line();
        let probe = quotient_injectivity_probe(cand.chart(), cand.delta(), cand.v(), &line_pairs());
        assert_eq!(probe.pairs_checked, 10);
        assert_eq!(probe.same_orbit_pairs, 10);
        assert!(probe.passed());

        let diag = sign_flip_diagonal();
        let pairs: Vec<_> = (0..10).map(|k| (int_vec(&[k, k]), int_vec(&[-k, -k]))).collect();
        assert!(quotient_injectivity_probe(diag.chart(), diag.delta(), diag.v(), &pairs).passed());
    }

    #[test]
    fn injectivity_fails_without_saturation() {
        let c = chart(2, &[rot90()]);
        let trivial = c.group().trivial();
        let probe = quotient_injectivity_probe(
            &c,
            &trivial,
            &span(2, &[&[1, 0]]),
            &[(int_vec(&[1, 0]), int_vec(&[-1, 0]))],
        );
        assert_eq!(probe.failure, Some((int_vec(&[1, 0]), int_vec(&[-1, 0]))));
    }
}

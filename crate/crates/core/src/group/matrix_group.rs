use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::linalg::{RatMatrix, Rational};

use super::{GroupError, GroupTable, Subgroup};

/// Closure bound used when no explicit `max_order` is given.
pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// Groups up to this order get a precomputed Cayley table; larger ones
/// multiply matrices on demand.
pub const CAYLEY_TABLE_LIMIT: usize = 512;

/// A group element together with its position in the canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub index: usize,
    pub matrix: RatMatrix,
}

/// A finite group of invertible rational `n × n` matrices.
///
/// Elements are sorted lexicographically by entries, so two groups with the
/// same element set are structurally identical (same indices, same table).
/// Distinct elements are distinct matrices, which makes the action on ℚⁿ
/// effective by construction.
#[derive(Clone)]
pub struct FiniteMatrixGroup {
    dim: usize,
    elements: Vec<RatMatrix>,
    lookup: HashMap<RatMatrix, usize>,
    table: Option<Vec<u32>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl PartialEq for FiniteMatrixGroup {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.elements == other.elements
    }
}

impl Eq for FiniteMatrixGroup {}

impl fmt::Debug for FiniteMatrixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMatrixGroup")
            .field("dim", &self.dim)
            .field("order", &self.order())
            .finish()
    }
}

/// Enumerates the group generated by `generators` acting on ℚ^`dim`.
///
/// Fails with [`GroupError::NotFiniteWithinBound`] as soon as the closure
/// exceeds `max_order` elements.
pub fn generate_group(
    dim: usize,
    generators: &[RatMatrix],
    max_order: usize,
) -> Result<FiniteMatrixGroup, GroupError> {
    for (index, g) in generators.iter().enumerate() {
        if g.rows() != dim || g.cols() != dim {
            return Err(GroupError::BadGenerator {
                index,
                rows: g.rows(),
                cols: g.cols(),
                dim,
            });
        }
        if !g.is_invertible() {
            return Err(GroupError::NonInvertibleGenerator { index });
        }
    }
    let identity = RatMatrix::identity(dim);
    let mut seen: HashMap<RatMatrix, ()> = HashMap::new();
    seen.insert(identity.clone(), ());
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = &x * g;
            if seen.contains_key(&y) {
                continue;
            }
            if seen.len() == max_order {
                return Err(GroupError::NotFiniteWithinBound(max_order));
            }
            seen.insert(y.clone(), ());
            queue.push_back(y);
        }
    }
    Ok(FiniteMatrixGroup::from_closed_unchecked(dim, seen.into_keys().collect()))
}

impl FiniteMatrixGroup {
    /// The trivial group `{I}` on ℚ^`dim`.
    pub fn trivial_group(dim: usize) -> Self {
        Self::from_closed_unchecked(dim, vec![RatMatrix::identity(dim)])
    }

    /// Builds a group from an explicit element list, verifying closure.
    pub fn from_elements(dim: usize, elements: Vec<RatMatrix>) -> Result<Self, GroupError> {
        for (index, g) in elements.iter().enumerate() {
            if g.rows() != dim || g.cols() != dim {
                return Err(GroupError::BadGenerator {
                    index,
                    rows: g.rows(),
                    cols: g.cols(),
                    dim,
                });
            }
        }
        let group = Self::from_closed_unchecked(dim, elements);
        if !group.lookup.contains_key(&RatMatrix::identity(dim)) {
            return Err(GroupError::NotClosed);
        }
        for a in &group.elements {
            for b in &group.elements {
                if !group.lookup.contains_key(&(a * b)) {
                    return Err(GroupError::NotClosed);
                }
            }
        }
        Ok(group)
    }

    /// Sorts and indexes a set already known to be a group.
    pub(crate) fn from_closed_unchecked(dim: usize, mut elements: Vec<RatMatrix>) -> Self {
        elements.sort();
        elements.dedup();
        let lookup: HashMap<RatMatrix, usize> = elements.iter().cloned().zip(0..).collect();
        let n = elements.len();
        let identity = lookup.get(&RatMatrix::identity(dim)).copied().unwrap_or(0);
        let table = (n <= CAYLEY_TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(n * n);
            for a in &elements {
                for b in &elements {
                    t.push(lookup.get(&(a * b)).map_or(u32::MAX, |&i| i as u32));
                }
            }
            t
        });
        let mut group = FiniteMatrixGroup {
            dim,
            elements,
            lookup,
            table,
            identity,
            inverses: Vec::new(),
        };
        group.inverses = group
            .elements
            .iter()
            .map(|m| {
                m.inverse()
                    .ok()
                    .and_then(|inv| group.lookup.get(&inv).copied())
                    .unwrap_or(identity)
            })
            .collect();
        group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, index: usize) -> &RatMatrix {
        &self.elements[index]
    }

    pub fn matrices(&self) -> &[RatMatrix] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> GroupElement {
        GroupElement {
            index,
            matrix: self.elements[index].clone(),
        }
    }

    pub fn index_of(&self, m: &RatMatrix) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    pub fn has_cayley_table(&self) -> bool {
        self.table.is_some()
    }

    /// `γ·x` for the element at `index`.
    pub fn act(&self, index: usize, x: &[Rational]) -> Vec<Rational> {
        self.elements[index].apply(x)
    }

    /// The whole group as a subgroup of itself.
    pub fn whole(&self) -> Subgroup {
        Subgroup::from_sorted((0..self.order()).collect())
    }

    pub fn trivial(&self) -> Subgroup {
        Subgroup::from_sorted(vec![self.identity])
    }

    /// Orbit of `x` as a deduplicated list.
    pub fn orbit(&self, within: &Subgroup, x: &[Rational]) -> Vec<Vec<Rational>> {
        let mut points: Vec<Vec<Rational>> = within.members().iter().map(|&i| self.act(i, x)).collect();
        points.sort();
        points.dedup();
        points
    }
}

impl GroupTable for FiniteMatrixGroup {
    fn order(&self) -> usize {
        self.elements.len()
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.lookup[&(&self.elements[a] * &self.elements[b])],
        }
    }

    fn identity(&self) -> usize {
        self.identity
    }

    fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;

    fn rot90() -> RatMatrix {
        RatMatrix::from_ints(&[&[0, -1], &[1, 0]])
    }

    #[test]
    fn rotation_by_quarter_turn_has_order_four() {
        let g = generate_group(2, &[rot90()], DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 4);
        // lexicographic: R(π), R(π/2), R(3π/2), I
        assert_eq!(g.matrix(0), &RatMatrix::from_ints(&[&[-1, 0], &[0, -1]]));
        assert_eq!(g.matrix(1), &rot90());
        assert_eq!(g.matrix(3), &RatMatrix::identity(2));
        assert_eq!(g.identity(), 3);
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = generate_group(3, &[], DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.matrix(0).is_identity());
    }

    #[test]
    fn realified_example_generator_is_cyclic_of_order_four() {
        // diag(i, -1) on ℂ², realified to ℝ⁴
        let re = RatMatrix::from_ints(&[&[0, 0], &[0, -1]]);
        let im = RatMatrix::from_ints(&[&[1, 0], &[0, 0]]);
        let gen = RatMatrix::realify(&re, &im).unwrap();
        let g = generate_group(4, &[gen], DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 4);
        assert!((0..4).any(|i| g.element_order(i) == 4));
    }

    #[test]
    fn closure_bound_and_bad_generators() {
        let shear = RatMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        assert_eq!(
            generate_group(2, &[shear], 50),
            Err(GroupError::NotFiniteWithinBound(50))
        );
        let singular = RatMatrix::from_ints(&[&[1, 0], &[0, 0]]);
        assert_eq!(
            generate_group(2, &[singular], 50),
            Err(GroupError::NonInvertibleGenerator { index: 0 })
        );
    }

    #[test]
    fn cayley_table_matches_matrix_products() {
        let flip = RatMatrix::from_ints(&[&[1, 0], &[0, -1]]);
        let g = generate_group(2, &[rot90(), flip], DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 8);
        for a in 0..g.order() {
            for b in 0..g.order() {
                assert_eq!(g.matrix(g.mul(a, b)), &(g.matrix(a) * g.matrix(b)));
            }
            assert_eq!(g.mul(a, g.inverse(a)), g.identity());
        }
    }

    #[test]
    fn from_elements_rejects_non_closed_sets() {
        let res = FiniteMatrixGroup::from_elements(2, vec![RatMatrix::identity(2), rot90()]);
        assert_eq!(res, Err(GroupError::NotClosed));
    }

    #[test]
    fn orbit_of_point() {
        let g = generate_group(2, &[rot90()], DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.orbit(&g.whole(), &int_vec(&[1, 0])).len(), 4);
        assert_eq!(g.orbit(&g.whole(), &int_vec(&[0, 0])).len(), 1);
    }
}

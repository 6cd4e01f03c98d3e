//! Exact linear and affine algebra over ℚ.
//!
//! Everything downstream (group elements, fixed-point sets, invariant
//! subspaces, lifts of maps) is built from [`RatMatrix`] and
//! [`AffineSubspace`]. No floating point is used here.

mod affine;
mod matrix;

pub use affine::{
    direction_sum_is_full, fixed_space, intersect, intersect_set, solve_affine, subspace_contained_in,
    AffineSet, AffineSubspace,
};
pub use matrix::{
    add_vec, dot, format_rational, format_vector, frac, int, int_vec, is_zero_vec, parse_rational, scale_vec,
    sub_vec, to_f64, RatMatrix, Rational, Rref,
};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient dimensions differ: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("cannot parse rational {0:?} (expected \"p\" or \"p/q\")")]
    BadRational(String),
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-3i64..=3, 1i64..=3), n).prop_map(|v| v.into_iter().map(|(a, b)| frac(a, b)).collect())
    }

    fn subspace(n: usize) -> impl Strategy<Value = AffineSubspace> {
        (small_vec(n), prop::collection::vec(small_vec(n), 0..=n))
            .prop_map(|(base, dirs)| AffineSubspace::new(base, &dirs).unwrap())
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(rows in prop::collection::vec(small_vec(3), 0..4)) {
            let m = RatMatrix::from_rows_with_cols(&rows, 3).unwrap();
            let once = m.rref().matrix;
            prop_assert_eq!(once.rref().matrix, once);
        }

        #[test]
        fn solution_set_substitutes(rows in prop::collection::vec(small_vec(3), 1..4), b in small_vec(3)) {
            let a = RatMatrix::from_rows_with_cols(&rows, 3).unwrap();
            let b = b[..a.rows()].to_vec();
            if let AffineSet::Space(s) = solve_affine(&a, &b).unwrap() {
                prop_assert_eq!(a.apply(s.base_point()), b);
                for d in s.basis() {
                    prop_assert!(is_zero_vec(&a.apply(d)));
                }
                prop_assert_eq!(s.dim(), 3 - a.rank());
            }
        }

        #[test]
        fn canonical_form_is_representation_independent(s in subspace(3), c in small_vec(3), mix in small_vec(3)) {
            // Move the base point inside the subspace and re-mix the basis.
            let base = s.point_from(s.base_point(), &c[..s.dim()]);
            let mut dirs: Vec<Vec<Rational>> = s.basis().iter().rev().cloned().collect();
            if let Some(first) = dirs.first().cloned() {
                for d in dirs.iter_mut().skip(1) {
                    *d = add_vec(d, &scale_vec(&first, &mix[0]));
                }
                dirs[0] = scale_vec(&first, &int(2));
            }
            let t = AffineSubspace::new(base, &dirs).unwrap();
            prop_assert_eq!(&t, &s);
            for k in 0..4 {
                prop_assert!(s.contains_point(&t.moment_point(k)));
            }
        }

        #[test]
        fn intersection_is_contained_in_both(a in subspace(3), b in subspace(3), probe in small_vec(3)) {
            match intersect(&a, &b).unwrap() {
                AffineSet::Space(i) => {
                    prop_assert!(i.is_contained_in(&a).unwrap());
                    prop_assert!(i.is_contained_in(&b).unwrap());
                    if a.contains_point(&probe) && b.contains_point(&probe) {
                        prop_assert!(i.contains_point(&probe));
                    }
                }
                AffineSet::Empty => {
                    for k in 0..4 {
                        prop_assert!(!b.contains_point(&a.moment_point(k)));
                    }
                }
            }
        }
    }
}

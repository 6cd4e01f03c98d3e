//! Finite groups of rational matrices: closure, subgroup lattices,
//! stabilizers, quotients and complements.

mod abstract_group;
mod matrix_group;
mod subgroup;

pub use abstract_group::{
    cyclic, direct_product, generating_set, is_isomorphic, AbstractGroup, Fingerprint, GroupHom, GroupTable,
    ISOMORPHISM_TEST_LIMIT,
};
pub use matrix_group::{generate_group, FiniteMatrixGroup, GroupElement, CAYLEY_TABLE_LIMIT, DEFAULT_MAX_ORDER};
pub use subgroup::{ComplementSearch, NoComplementCertificate, QuotientGroup, Subgroup, SUBGROUP_ENUMERATION_BOUND};

use crate::linalg::LinalgError;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group closure exceeded {0} elements")]
    NotFiniteWithinBound(usize),
    #[error("generator {index} is not invertible")]
    NonInvertibleGenerator { index: usize },
    #[error("generator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    BadGenerator { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("group of order {order} exceeds the enumeration bound {bound}")]
    GroupTooLarge { order: usize, bound: usize },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("not a subgroup")]
    NotSubgroup,
    #[error("element set is not closed under multiplication")]
    NotClosed,
    #[error("table does not define a group")]
    NotAGroup,
    #[error("map is not a homomorphism")]
    NotHomomorphism,
    #[error("generator images do not determine a map on the whole group")]
    GeneratorsDoNotGenerate,
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

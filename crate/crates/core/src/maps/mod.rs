//! Equivariant affine maps between linear charts, product charts, and the
//! suborbifolds they produce: graphs, images, transverse intersections,
//! preimages, fibered products and regular-value preimages.
//!
//! Affine maps have constant rank and transversality of affine data is a
//! condition on direction spaces only, so every "at each point" hypothesis
//! reduces to one exact check.

mod constructions;

pub use constructions::{
    embedding_from_induced_chart, fibered_product, graph_suborbifold, image_suborbifold, intersect_full,
    preimage_suborbifold, regular_value_preimage, transverse_candidates, FiberedProduct, GraphSuborbifold,
};

use crate::group::{FiniteMatrixGroup, GroupError, GroupHom, GroupTable, DEFAULT_MAX_ORDER};
use crate::linalg::{add_vec, AffineSubspace, LinalgError, RatMatrix, Rational};
use crate::suborbifold::{ChartModel, SuborbifoldError};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("theta is not a homomorphism")]
    NotHomomorphism,
    #[error("map is not equivariant at domain element {element}")]
    NotEquivariant { element: usize },
    #[error("product group would have order {order}, above {bound}")]
    GroupTooLarge { order: usize, bound: usize },
    #[error("map is not an immersion (rank {rank}, domain dimension {dim})")]
    NotImmersion { rank: usize, dim: usize },
    #[error("map is not a submersion (rank {rank}, codomain dimension {dim})")]
    NotSubmersion { rank: usize, dim: usize },
    #[error("theta is not injective")]
    ThetaNotInjective,
    #[error("map is not injective on quotients: codomain element {element} identifies {solutions}")]
    NotInjectiveOnQuotient { element: usize, solutions: AffineSubspace },
    #[error("candidates live in different charts")]
    ChartMismatch,
    #[error("candidate is not full")]
    CandidateNotFull,
    #[error("candidates are not transverse")]
    NotTransverse,
    #[error("map is not transverse to the target subspace")]
    NotTransverseToQ,
    #[error("preimage is empty")]
    EmptyPreimage,
    #[error("codomain chart has a nontrivial group")]
    CodomainNotManifold,
    #[error("linear part has rank {rank}, codomain dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },
    #[error("point is not in the image")]
    NotInImage,
    #[error("candidate is not embedded")]
    NotEmbedded,
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Suborbifold(#[from] SuborbifoldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `x ↦ linear·x + offset` from one chart to another, with `Θ` between the
/// chart groups, satisfying `f(γx) = Θ(γ) f(x)`.
#[derive(Clone, Debug)]
pub struct EquivariantAffineMap {
    domain: ChartModel,
    codomain: ChartModel,
    linear: RatMatrix,
    offset: Vec<Rational>,
    theta: GroupHom,
}

impl EquivariantAffineMap {
    /// Checks shapes, that `theta` is a homomorphism, and equivariance
    /// element by element: `Θ(γ)·A = A·γ` and `Θ(γ)·b = b`.
    pub fn new(
        domain: ChartModel,
        codomain: ChartModel,
        linear: RatMatrix,
        offset: Vec<Rational>,
        theta: GroupHom,
    ) -> Result<Self, MapError> {
        let (n1, n2) = (domain.ambient_dim(), codomain.ambient_dim());
        if linear.cols() != n1 {
            return Err(MapError::DimensionMismatch {
                expected: n1,
                found: linear.cols(),
            });
        }
        if linear.rows() != n2 {
            return Err(MapError::DimensionMismatch {
                expected: n2,
                found: linear.rows(),
            });
        }
        if offset.len() != n2 {
            return Err(MapError::DimensionMismatch {
                expected: n2,
                found: offset.len(),
            });
        }
        let (g1, g2) = (domain.group(), codomain.group());
        if !theta.is_homomorphism(g1, g2) {
            return Err(MapError::NotHomomorphism);
        }
        for (element, &image) in theta.image_of.iter().enumerate() {
            let t = g2.matrix(image);
            if t * &linear != &linear * g1.matrix(element) || t.apply(&offset) != offset {
                return Err(MapError::NotEquivariant { element });
            }
        }
        Ok(EquivariantAffineMap {
            domain,
            codomain,
            linear,
            offset,
            theta,
        })
    }

    /// Builds `Θ` from images of generators (as element indices).
    pub fn from_generator_images(
        domain: ChartModel,
        codomain: ChartModel,
        linear: RatMatrix,
        offset: Vec<Rational>,
        generators: &[(usize, usize)],
    ) -> Result<Self, MapError> {
        let theta = GroupHom::from_generator_images(domain.group(), codomain.group(), generators)?;
        Self::new(domain, codomain, linear, offset, theta)
    }

    /// Map with `Θ` sending everything to the identity.
    pub fn with_trivial_theta(
        domain: ChartModel,
        codomain: ChartModel,
        linear: RatMatrix,
        offset: Vec<Rational>,
    ) -> Result<Self, MapError> {
        let theta = GroupHom::trivial(domain.group(), codomain.group());
        Self::new(domain, codomain, linear, offset, theta)
    }

    pub fn identity(chart: ChartModel) -> Self {
        let n = chart.ambient_dim();
        let theta = GroupHom {
            image_of: (0..chart.group().order()).collect(),
        };
        Self::new(chart.clone(), chart, RatMatrix::identity(n), vec![Rational::default(); n], theta)
            .expect("identity is equivariant")
    }

    /// `x ↦ γx` with `Θ(h) = γhγ⁻¹`: the chart acting on itself.
    pub fn translation_by(chart: ChartModel, element: usize) -> Result<Self, MapError> {
        let g = chart.group();
        if element >= g.order() {
            return Err(GroupError::IndexOutOfRange(element).into());
        }
        let inv = g.inverse(element);
        let theta = GroupHom {
            image_of: (0..g.order()).map(|h| g.mul(g.mul(element, h), inv)).collect(),
        };
        let linear = g.matrix(element).clone();
        let n = chart.ambient_dim();
        Self::new(chart.clone(), chart, linear, vec![Rational::default(); n], theta)
    }

    pub fn domain(&self) -> &ChartModel {
        &self.domain
    }

    pub fn codomain(&self) -> &ChartModel {
        &self.codomain
    }

    pub fn linear(&self) -> &RatMatrix {
        &self.linear
    }

    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    pub fn theta(&self) -> &GroupHom {
        &self.theta
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        add_vec(&self.linear.apply(x), &self.offset)
    }

    /// Rank of the lift. Constant for affine maps; `x` is ignored.
    pub fn rank_at(&self, _x: &[Rational]) -> usize {
        self.linear.rank()
    }

    pub fn rank(&self) -> usize {
        self.linear.rank()
    }

    pub fn is_immersion(&self) -> bool {
        self.rank() == self.domain.ambient_dim()
    }

    pub fn is_submersion(&self) -> bool {
        self.rank() == self.codomain.ambient_dim()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &EquivariantAffineMap) -> Result<Self, MapError> {
        if self.codomain != next.domain {
            return Err(MapError::ChartMismatch);
        }
        let linear = &next.linear * &self.linear;
        let offset = next.apply(&self.offset);
        Self::new(
            self.domain.clone(),
            next.codomain.clone(),
            linear,
            offset,
            self.theta.then(&next.theta),
        )
    }

    /// Image of the whole domain, an affine subspace of the codomain.
    pub fn image_hull(&self) -> AffineSubspace {
        AffineSubspace::whole(self.domain.ambient_dim())
            .image(&self.linear, &self.offset)
            .expect("shapes validated")
    }
}

/// `O₁ × O₂` as one chart with block-diagonal group. The combined index of
/// `(i, j)` is `i·|Γ₂| + j`, which is also the lexicographic order of the
/// block-diagonal matrices.
#[derive(Clone, Debug)]
pub struct ProductChart {
    pub left: ChartModel,
    pub right: ChartModel,
    pub combined: ChartModel,
}

impl ProductChart {
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        i * self.right.group().order() + j
    }

    pub fn split_index(&self, k: usize) -> (usize, usize) {
        let r = self.right.group().order();
        (k / r, k % r)
    }
}

pub fn product_chart(left: &ChartModel, right: &ChartModel) -> Result<ProductChart, MapError> {
    let (g1, g2) = (left.group(), right.group());
    let order = g1.order() * g2.order();
    if order > DEFAULT_MAX_ORDER {
        return Err(MapError::GroupTooLarge {
            order,
            bound: DEFAULT_MAX_ORDER,
        });
    }
    let mut elements = Vec::with_capacity(order);
    for a in g1.matrices() {
        for b in g2.matrices() {
            elements.push(RatMatrix::block_diag(a, b));
        }
    }
    // a product of groups is closed, so skip the quadratic closure check
    let group = FiniteMatrixGroup::from_closed_unchecked(left.ambient_dim() + right.ambient_dim(), elements);
    let product = ProductChart {
        left: left.clone(),
        right: right.clone(),
        combined: ChartModel::new(group),
    };
    debug_assert!((0..order).all(|k| {
        let (i, j) = product.split_index(k);
        product.combined.group().matrix(k) == &RatMatrix::block_diag(g1.matrix(i), g2.matrix(j))
    }));
    Ok(product)
}

/// `f₁ × f₂ : O₁ × O₂ → P₁ × P₂`.
pub fn product_map(
    f1: &EquivariantAffineMap,
    f2: &EquivariantAffineMap,
    domain: &ProductChart,
    codomain: &ProductChart,
) -> Result<EquivariantAffineMap, MapError> {
    let linear = RatMatrix::block_diag(f1.linear(), f2.linear());
    let mut offset = f1.offset().to_vec();
    offset.extend_from_slice(f2.offset());
    let order = domain.combined.group().order();
    let theta = GroupHom {
        image_of: (0..order)
            .map(|k| {
                let (i, j) = domain.split_index(k);
                codomain.pair_index(f1.theta().apply(i), f2.theta().apply(j))
            })
            .collect(),
    };
    EquivariantAffineMap::new(domain.combined.clone(), codomain.combined.clone(), linear, offset, theta)
}

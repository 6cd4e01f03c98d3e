use std::fmt;

use num_traits::{One, Zero};

use super::matrix::{add_vec, format_vector, int, is_zero_vec, sub_vec, RatMatrix, Rational};
use super::LinalgError;

/// An affine subspace `base_point + span(basis)` of ℚⁿ in canonical form.
///
/// The basis is the list of nonzero rows of a reduced row-echelon matrix and
/// the base point vanishes at every pivot column, so two values describe the
/// same point set exactly when their fields are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineSubspace {
    ambient_dim: usize,
    base_point: Vec<Rational>,
    basis: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

/// Outcome of an affine solve or intersection. Disjointness is a real case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineSet {
    Empty,
    Space(AffineSubspace),
}

impl AffineSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, AffineSet::Empty)
    }

    pub fn into_option(self) -> Option<AffineSubspace> {
        match self {
            AffineSet::Empty => None,
            AffineSet::Space(s) => Some(s),
        }
    }

    pub fn as_option(&self) -> Option<&AffineSubspace> {
        match self {
            AffineSet::Empty => None,
            AffineSet::Space(s) => Some(s),
        }
    }
}

impl AffineSubspace {
    /// Canonicalizes `base_point + span(directions)`. The directions may be
    /// linearly dependent; redundant ones are dropped.
    pub fn new(base_point: Vec<Rational>, directions: &[Vec<Rational>]) -> Result<Self, LinalgError> {
        let n = base_point.len();
        for d in directions {
            if d.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: d.len(),
                });
            }
        }
        let reduced = RatMatrix::from_rows_with_cols(directions, n)?.rref();
        let basis: Vec<Vec<Rational>> = (0..reduced.rank).map(|i| reduced.matrix.row(i).to_vec()).collect();
        let mut space = AffineSubspace {
            ambient_dim: n,
            base_point,
            basis,
            pivots: reduced.pivots,
        };
        space.base_point = space.reduce(&space.base_point);
        Ok(space)
    }

    pub fn whole(n: usize) -> Self {
        let basis: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        AffineSubspace {
            ambient_dim: n,
            base_point: vec![Rational::zero(); n],
            basis,
            pivots: (0..n).collect(),
        }
    }

    pub fn point(x: Vec<Rational>) -> Self {
        AffineSubspace {
            ambient_dim: x.len(),
            base_point: x,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Linear subspace spanned by `directions` in ℚⁿ.
    pub fn span(n: usize, directions: &[Vec<Rational>]) -> Result<Self, LinalgError> {
        Self::new(vec![Rational::zero(); n], directions)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn base_point(&self) -> &[Rational] {
        &self.base_point
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_whole_space(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Subtracts the basis component of `v`, leaving zeros at every pivot.
    fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = out[p].clone();
            if c.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o -= &c * r;
            }
        }
        out
    }

    fn check_ambient(&self, n: usize) -> Result<(), LinalgError> {
        if n != self.ambient_dim {
            return Err(LinalgError::AmbientMismatch {
                left: self.ambient_dim,
                right: n,
            });
        }
        Ok(())
    }

    pub fn contains_direction(&self, d: &[Rational]) -> bool {
        d.len() == self.ambient_dim && is_zero_vec(&self.reduce(d))
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        x.len() == self.ambient_dim && self.contains_direction(&sub_vec(x, &self.base_point))
    }

    /// `self ⊆ other` as point sets.
    pub fn is_contained_in(&self, other: &AffineSubspace) -> Result<bool, LinalgError> {
        other.check_ambient(self.ambient_dim)?;
        Ok(other.contains_point(&self.base_point) && self.basis.iter().all(|d| other.contains_direction(d)))
    }

    /// Coordinates of a point of the subspace with respect to `origin + span(basis)`.
    /// `origin` must itself lie in the subspace.
    pub fn coordinates(&self, origin: &[Rational], x: &[Rational]) -> Option<Vec<Rational>> {
        if !self.contains_point(x) {
            return None;
        }
        let d = sub_vec(x, origin);
        Some(self.pivots.iter().map(|&p| d[p].clone()).collect())
    }

    /// Coordinates of a direction vector in the canonical basis.
    pub fn direction_coordinates(&self, d: &[Rational]) -> Option<Vec<Rational>> {
        if !self.contains_direction(d) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| d[p].clone()).collect())
    }

    /// `origin + Σ coeffs[i]·basis[i]`.
    pub fn point_from(&self, origin: &[Rational], coeffs: &[Rational]) -> Vec<Rational> {
        let mut x = origin.to_vec();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += c * bi;
            }
        }
        x
    }

    /// Point on the moment curve `t ↦ base + Σ tⁱ⁺¹·basisᵢ`. A proper affine
    /// subspace meets this curve in at most `dim` parameters unless it contains it,
    /// so scanning `t = 0, 1, 2, …` escapes any finite family of proper subspaces.
    pub fn moment_point(&self, t: i64) -> Vec<Rational> {
        let t = int(t);
        let mut power = t.clone();
        let mut coeffs = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            coeffs.push(power.clone());
            power *= &t;
        }
        self.point_from(&self.base_point, &coeffs)
    }

    /// Linear equations `M x = c` cutting out the subspace.
    pub fn equations(&self) -> (RatMatrix, Vec<Rational>) {
        let basis = RatMatrix::from_rows_with_cols(&self.basis, self.ambient_dim).expect("canonical basis");
        let normals = basis.kernel_basis();
        let rhs: Vec<Rational> = normals
            .iter()
            .map(|w| super::matrix::dot(w, &self.base_point))
            .collect();
        let m = RatMatrix::from_rows_with_cols(&normals, self.ambient_dim).expect("normals share length");
        (m, rhs)
    }

    /// Image `{Lx + offset : x ∈ self}`.
    pub fn image(&self, linear: &RatMatrix, offset: &[Rational]) -> Result<AffineSubspace, LinalgError> {
        self.check_ambient(linear.cols())?;
        if offset.len() != linear.rows() {
            return Err(LinalgError::DimensionMismatch {
                expected: linear.rows(),
                found: offset.len(),
            });
        }
        let base = add_vec(&linear.apply(&self.base_point), offset);
        let dirs: Vec<Vec<Rational>> = self.basis.iter().map(|d| linear.apply(d)).collect();
        AffineSubspace::new(base, &dirs)
    }

    /// Image under a linear map.
    pub fn linear_image(&self, linear: &RatMatrix) -> Result<AffineSubspace, LinalgError> {
        self.image(linear, &vec![Rational::zero(); linear.rows()])
    }

    /// Preimage `{x : Lx + offset ∈ self}`.
    pub fn preimage(&self, linear: &RatMatrix, offset: &[Rational]) -> Result<AffineSet, LinalgError> {
        self.check_ambient(linear.rows())?;
        let (m, c) = self.equations();
        let a = m.checked_mul(linear)?;
        let rhs = sub_vec(&c, &m.mul_vec(offset)?);
        solve_affine(&a, &rhs)
    }

    pub fn to_strings(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let base = self.base_point.iter().map(ToString::to_string).collect();
        let basis = self
            .basis
            .iter()
            .map(|b| b.iter().map(ToString::to_string).collect())
            .collect();
        (base, basis)
    }
}

impl fmt::Display for AffineSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_vector(&self.base_point))?;
        if !self.basis.is_empty() {
            let dirs: Vec<String> = self.basis.iter().map(|b| format_vector(b)).collect();
            write!(f, " + span{{{}}}", dirs.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for AffineSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineSubspace[{self}]")
    }
}

/// Full solution set of `A x = b`.
pub fn solve_affine(a: &RatMatrix, b: &[Rational]) -> Result<AffineSet, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let n = a.cols();
    let reduced = a.augment(b)?.rref();
    if reduced.pivots.last() == Some(&n) {
        return Ok(AffineSet::Empty);
    }
    let mut particular = vec![Rational::zero(); n];
    for (r, &p) in reduced.pivots.iter().enumerate() {
        particular[p] = reduced.matrix.get(r, n).clone();
    }
    let kernel = a.kernel_basis();
    Ok(AffineSet::Space(AffineSubspace::new(particular, &kernel)?))
}

/// Fixed-point set `{x : Mx = x}` of a square matrix.
pub fn fixed_space(m: &RatMatrix) -> Result<AffineSet, LinalgError> {
    let a = m.sub(&RatMatrix::identity(m.rows()))?;
    solve_affine(&a, &vec![Rational::zero(); m.rows()])
}

pub fn intersect(a: &AffineSubspace, b: &AffineSubspace) -> Result<AffineSet, LinalgError> {
    a.check_ambient(b.ambient_dim)?;
    // Stack the defining equations of both.
    let (ma, ca) = a.equations();
    let (mb, cb) = b.equations();
    let m = ma.vstack(&mb)?;
    let mut c = ca;
    c.extend(cb);
    solve_affine(&m, &c)
}

/// Intersection with an [`AffineSet`], propagating emptiness.
pub fn intersect_set(a: &AffineSet, b: &AffineSubspace) -> Result<AffineSet, LinalgError> {
    match a {
        AffineSet::Empty => Ok(AffineSet::Empty),
        AffineSet::Space(s) => intersect(s, b),
    }
}

/// True iff `dir(a) + dir(b)` is all of ℚⁿ.
pub fn direction_sum_is_full(a: &AffineSubspace, b: &AffineSubspace) -> Result<bool, LinalgError> {
    a.check_ambient(b.ambient_dim)?;
    let mut rows = a.basis.clone();
    rows.extend(b.basis.iter().cloned());
    Ok(RatMatrix::from_rows_with_cols(&rows, a.ambient_dim)?.rank() == a.ambient_dim)
}

pub fn subspace_contained_in(a: &AffineSubspace, b: &AffineSubspace) -> Result<bool, LinalgError> {
    a.is_contained_in(b)
}

//! Seeded generators for random groups, candidates and maps.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use suborbifold::group::{generate_group, FiniteMatrixGroup, GroupTable, Subgroup};
use suborbifold::linalg::{frac, int, AffineSubspace, RatMatrix, Rational};
use suborbifold::suborbifold::{ChartModel, SuborbifoldCandidate};

pub const MAX_GROUP_ORDER: usize = 16;

pub fn mat_add(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let data = a.entries().iter().zip(b.entries()).map(|(x, y)| x + y).collect();
    RatMatrix::from_data(a.rows(), a.cols(), data).unwrap()
}

pub fn mat_scale(a: &RatMatrix, s: &Rational) -> RatMatrix {
    let data = a.entries().iter().map(|x| x * s).collect();
    RatMatrix::from_data(a.rows(), a.cols(), data).unwrap()
}

pub fn random_int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> RatMatrix {
    let data = (0..rows * cols).map(|_| int(rng.gen_range(-bound..=bound))).collect();
    RatMatrix::from_data(rows, cols, data).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<Rational> {
    (0..n).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

/// Invertible integer matrix with small entries.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> RatMatrix {
    loop {
        let m = random_int_matrix(rng, n, n, 2);
        if m.is_invertible() {
            return m;
        }
    }
}

fn signed_permutation(rng: &mut ChaCha8Rng, n: usize) -> RatMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = RatMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        m.set(i, j, int(if rng.gen_bool(0.5) { 1 } else { -1 }));
    }
    m
}

/// Order-3 block `[[0,-1],[1,-1]]` padded with random signs.
fn order_three_block(rng: &mut ChaCha8Rng, n: usize) -> RatMatrix {
    let block = RatMatrix::from_ints(&[&[0, -1], &[1, -1]]);
    if n == 2 {
        return block;
    }
    let signs: Vec<Rational> = (0..n - 2).map(|_| int(if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
    RatMatrix::block_diag(&block, &RatMatrix::diagonal(&signs))
}

/// A random finite group of order at most 16 in dimension `n`, optionally
/// conjugated into a non-orthogonal basis.
pub fn random_group(rng: &mut ChaCha8Rng, n: usize) -> FiniteMatrixGroup {
    loop {
        let count = rng.gen_range(0..=2);
        let mut gens: Vec<RatMatrix> = (0..count)
            .map(|_| {
                if n >= 2 && rng.gen_bool(0.2) {
                    order_three_block(rng, n)
                } else {
                    signed_permutation(rng, n)
                }
            })
            .collect();
        if rng.gen_bool(0.3) {
            let p = random_invertible(rng, n);
            let inv = p.inverse().unwrap();
            gens = gens.iter().map(|g| &(&p * g) * &inv).collect();
        }
        if let Ok(g) = generate_group(n, &gens, MAX_GROUP_ORDER) {
            return g;
        }
    }
}

pub fn random_subgroup(rng: &mut ChaCha8Rng, g: &FiniteMatrixGroup) -> Subgroup {
    let count = rng.gen_range(0..=2);
    let gens: Vec<usize> = (0..count).map(|_| rng.gen_range(0..g.order())).collect();
    g.generate_subgroup(&gens).unwrap()
}

fn centroid(g: &FiniteMatrixGroup, within: &Subgroup, x: &[Rational]) -> Vec<Rational> {
    let n = x.len();
    let mut sum = vec![Rational::default(); n];
    for &h in within.members() {
        for (s, v) in sum.iter_mut().zip(g.act(h, x)) {
            *s += v;
        }
    }
    let k = frac(1, within.order() as i64);
    sum.into_iter().map(|s| s * &k).collect()
}

/// A `Δ`-invariant affine subspace.
pub fn random_invariant_subspace(rng: &mut ChaCha8Rng, g: &FiniteMatrixGroup, delta: &Subgroup) -> AffineSubspace {
    let n = g.dim();
    let p = random_vector(rng, n, 2);
    match rng.gen_range(0..3) {
        // fixed base point, span of the orbit of a few directions
        0 => {
            let base = centroid(g, delta, &p);
            let dirs: Vec<Vec<Rational>> = (0..rng.gen_range(0..=2))
                .flat_map(|_| {
                    let d = random_vector(rng, n, 2);
                    delta.members().iter().map(|&h| g.act(h, &d)).collect::<Vec<_>>()
                })
                .collect();
            AffineSubspace::new(base, &dirs).unwrap()
        }
        // fixed base point, invariant directions
        1 => {
            let base = centroid(g, delta, &p);
            let zero = vec![Rational::default(); n];
            let dirs: Vec<Vec<Rational>> = (0..rng.gen_range(0..=2))
                .map(|_| {
                    let d = random_vector(rng, n, 2);
                    centroid(g, delta, &d)
                })
                .filter(|d| *d != zero)
                .collect();
            AffineSubspace::new(base, &dirs).unwrap()
        }
        // affine hull of an orbit
        _ => {
            let dirs: Vec<Vec<Rational>> = delta
                .members()
                .iter()
                .map(|&h| g.act(h, &p).iter().zip(&p).map(|(a, b)| a - b).collect())
                .collect();
            AffineSubspace::new(p, &dirs).unwrap()
        }
    }
}

pub fn random_candidate(rng: &mut ChaCha8Rng) -> SuborbifoldCandidate {
    let n = rng.gen_range(1..=4);
    let g = random_group(rng, n);
    let delta = random_subgroup(rng, &g);
    let v = random_invariant_subspace(rng, &g, &delta);
    SuborbifoldCandidate::new(ChartModel::new(g), delta, v).expect("generated subspaces are invariant")
}

/// Lattice and fractional points of `v` used by the brute-force oracles.
pub fn sample_points(v: &AffineSubspace) -> Vec<Vec<Rational>> {
    let k = v.dim();
    let mut coeffs: Vec<Vec<Rational>> = vec![Vec::new()];
    for _ in 0..k {
        coeffs = coeffs
            .into_iter()
            .flat_map(|c| {
                [-2, -1, 0, 1, 3].iter().map(move |&t| {
                    let mut c = c.clone();
                    c.push(int(t));
                    c
                })
            })
            .collect();
    }
    let mut points: Vec<Vec<Rational>> = coeffs.iter().map(|c| v.point_from(v.base_point(), c)).collect();
    for t in 1..=4 {
        points.push(v.moment_point(t));
        let halves: Vec<Rational> = (0..k).map(|i| frac((t * (i as i64 + 2)) % 7 - 3, 2)).collect();
        points.push(v.point_from(v.base_point(), &halves));
    }
    points
}

/// Reynolds average `x ↦ (1/|Γ|) Σ Θ(γ)⁻¹ B γ`, an intertwiner for `Θ`.
pub fn intertwiner(
    domain: &FiniteMatrixGroup,
    codomain: &FiniteMatrixGroup,
    image_of: &[usize],
    b: &RatMatrix,
) -> RatMatrix {
    let mut sum = RatMatrix::zeros(b.rows(), b.cols());
    for (gamma, &t) in image_of.iter().enumerate() {
        let term = &(codomain.matrix(codomain.inverse(t)) * b) * domain.matrix(gamma);
        sum = mat_add(&sum, &term);
    }
    mat_scale(&sum, &frac(1, domain.order() as i64))
}

/// `(1/|Γ|) Σ Θ(γ) b`, a vector fixed by the image of `Θ`.
pub fn fixed_offset(codomain: &FiniteMatrixGroup, image_of: &[usize], b: &[Rational]) -> Vec<Rational> {
    let mut sum = vec![Rational::default(); b.len()];
    for &t in image_of {
        for (s, v) in sum.iter_mut().zip(codomain.act(t, b)) {
            *s += v;
        }
    }
    let k = frac(1, image_of.len() as i64);
    sum.into_iter().map(|s| s * &k).collect()
}

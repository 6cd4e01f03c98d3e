use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GroupError;

/// Above this order [`is_isomorphic`] gives up and returns `None`.
pub const ISOMORPHISM_TEST_LIMIT: usize = 64;

/// Anything with a finite multiplication table on `0..order`.
pub trait GroupTable {
    fn order(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn identity(&self) -> usize;
    fn inverse(&self, a: usize) -> usize;

    fn element_order(&self, a: usize) -> usize {
        let e = self.identity();
        let mut x = a;
        let mut k = 1;
        while x != e {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a + 1..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Order, sorted element orders, and commutativity.
    fn fingerprint(&self) -> Fingerprint {
        let mut element_orders: Vec<usize> = (0..self.order()).map(|a| self.element_order(a)).collect();
        element_orders.sort_unstable();
        Fingerprint {
            order: self.order(),
            element_orders,
            abelian: self.is_abelian(),
        }
    }
}

/// A group given only by its multiplication table.
///
/// `labels[i]` records where element `i` came from in the parent group
/// (a coset representative or a subgroup member).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    labels: Vec<usize>,
}

impl AbstractGroup {
    /// Wraps a table, checking the group axioms exhaustively.
    pub fn from_table(order: usize, table: Vec<usize>, labels: Vec<usize>) -> Result<Self, GroupError> {
        if table.len() != order * order || labels.len() != order || table.iter().any(|&t| t >= order) {
            return Err(GroupError::NotAGroup);
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| table[e * order + a] == a && table[a * order + e] == a))
            .ok_or(GroupError::NotAGroup)?;
        let mut inverses = Vec::with_capacity(order);
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| table[a * order + b] == identity)
                .ok_or(GroupError::NotAGroup)?;
            inverses.push(inv);
        }
        let group = AbstractGroup {
            order,
            table,
            identity,
            inverses,
            labels,
        };
        if !group.is_associative() {
            return Err(GroupError::NotAGroup);
        }
        Ok(group)
    }

    /// Restricts a table group to a subset closed under multiplication.
    pub fn restrict<G: GroupTable>(parent: &G, members: &[usize]) -> Result<Self, GroupError> {
        let position = |x: usize| members.binary_search(&x).ok();
        let n = members.len();
        let mut table = Vec::with_capacity(n * n);
        for &a in members {
            for &b in members {
                table.push(position(parent.mul(a, b)).ok_or(GroupError::NotSubgroup)?);
            }
        }
        Self::from_table(n, table, members.to_vec())
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    fn is_associative(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| {
            (0..n).all(|b| {
                let ab = self.table[a * n + b];
                (0..n).all(|c| self.table[ab * n + c] == self.table[a * n + self.table[b * n + c]])
            })
        })
    }
}

impl GroupTable for AbstractGroup {
    fn order(&self) -> usize {
        self.order
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    fn identity(&self) -> usize {
        self.identity
    }

    fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }
}

/// Cheap isomorphism invariant: order, multiset of element orders, commutativity.
///
/// For abelian groups this determines the isomorphism class; for others
/// [`is_isomorphic`] gives an exact answer at small orders.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub order: usize,
    pub element_orders: Vec<usize>,
    pub abelian: bool,
}

impl Fingerprint {
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// Human-readable name: invariant factors for abelian groups
    /// (`"Z2 x Z2"`, `"Z4"`, `"trivial"`), otherwise `"nonabelian(n)"`.
    pub fn label(&self) -> String {
        if self.order == 1 {
            return "trivial".to_string();
        }
        if !self.abelian {
            return format!("nonabelian({})", self.order);
        }
        // For each prime p, the number of elements of p-power order dividing
        // p^k is p^(Σ min(k, e_i)); successive ratios recover the partition e.
        let mut factors: Vec<Vec<usize>> = Vec::new();
        let mut rest = self.order;
        let mut p = 2;
        while rest > 1 {
            if rest % p != 0 {
                p += 1;
                continue;
            }
            while rest % p == 0 {
                rest /= p;
            }
            let mut parts_at_least: Vec<usize> = Vec::new();
            let mut prev = 1usize;
            let mut pk = 1usize;
            loop {
                pk *= p;
                let count = self.element_orders.iter().filter(|&&o| pk % o == 0).count();
                if count == prev {
                    break;
                }
                let mut ratio = count / prev;
                let mut levels = 0;
                while ratio > 1 {
                    ratio /= p;
                    levels += 1;
                }
                parts_at_least.push(levels);
                prev = count;
            }
            // parts_at_least[k-1] = #{i : e_i ≥ k}; transpose into prime powers.
            let mut powers = Vec::new();
            for i in 0..parts_at_least.first().copied().unwrap_or(0) {
                let e = parts_at_least.iter().filter(|&&c| c > i).count();
                powers.push(p.pow(e as u32));
            }
            factors.push(powers);
        }
        // Combine prime-power parts into invariant factors d1 | d2 | ...
        let width = factors.iter().map(Vec::len).max().unwrap_or(0);
        let mut invariant = vec![1usize; width];
        for powers in &factors {
            for (slot, q) in invariant.iter_mut().rev().zip(powers.iter()) {
                *slot *= q;
            }
        }
        invariant.sort_unstable();
        invariant.iter().map(|d| format!("Z{d}")).collect::<Vec<_>>().join(" x ")
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let orders: Vec<String> = self.element_orders.iter().map(ToString::to_string).collect();
        write!(
            f,
            "{} (order {}, element orders {{{}}}, {})",
            self.label(),
            self.order,
            orders.join(","),
            if self.abelian { "abelian" } else { "nonabelian" }
        )
    }
}

/// A homomorphism stored as an image table `domain index -> codomain index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupHom {
    pub image_of: Vec<usize>,
}

impl GroupHom {
    pub fn trivial<D: GroupTable, C: GroupTable>(domain: &D, codomain: &C) -> Self {
        GroupHom {
            image_of: vec![codomain.identity(); domain.order()],
        }
    }

    /// Extends generator images along words in the generators.
    pub fn from_generator_images<D: GroupTable, C: GroupTable>(
        domain: &D,
        codomain: &C,
        generators: &[(usize, usize)],
    ) -> Result<Self, GroupError> {
        let mut image: Vec<Option<usize>> = vec![None; domain.order()];
        image[domain.identity()] = Some(codomain.identity());
        let mut queue = VecDeque::from([domain.identity()]);
        while let Some(x) = queue.pop_front() {
            let fx = image[x].expect("queued elements are mapped");
            for &(g, h) in generators {
                let y = domain.mul(x, g);
                let fy = codomain.mul(fx, h);
                match image[y] {
                    None => {
                        image[y] = Some(fy);
                        queue.push_back(y);
                    }
                    Some(existing) if existing != fy => return Err(GroupError::NotHomomorphism),
                    Some(_) => {}
                }
            }
        }
        let image_of: Option<Vec<usize>> = image.into_iter().collect();
        let hom = GroupHom {
            image_of: image_of.ok_or(GroupError::GeneratorsDoNotGenerate)?,
        };
        if !hom.is_homomorphism(domain, codomain) {
            return Err(GroupError::NotHomomorphism);
        }
        Ok(hom)
    }

    pub fn apply(&self, a: usize) -> usize {
        self.image_of[a]
    }

    pub fn is_homomorphism<D: GroupTable, C: GroupTable>(&self, domain: &D, codomain: &C) -> bool {
        let n = domain.order();
        self.image_of.len() == n
            && self.image_of.iter().all(|&i| i < codomain.order())
            && (0..n).all(|a| {
                (0..n).all(|b| self.image_of[domain.mul(a, b)] == codomain.mul(self.image_of[a], self.image_of[b]))
            })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.image_of.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.image_of.len()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupHom) -> GroupHom {
        GroupHom {
            image_of: self.image_of.iter().map(|&i| other.image_of[i]).collect(),
        }
    }
}

/// A small generating set, picked greedily by decreasing element order.
pub fn generating_set<G: GroupTable>(g: &G) -> Vec<usize> {
    let mut by_order: Vec<usize> = (0..g.order()).collect();
    by_order.sort_by_key(|&a| (std::cmp::Reverse(g.element_order(a)), a));
    let mut gens = Vec::new();
    let mut covered = vec![false; g.order()];
    covered[g.identity()] = true;
    for a in by_order {
        if covered[a] {
            continue;
        }
        gens.push(a);
        // Recompute the generated subgroup.
        covered = vec![false; g.order()];
        covered[g.identity()] = true;
        let mut queue = VecDeque::from([g.identity()]);
        while let Some(x) = queue.pop_front() {
            for &s in &gens {
                let y = g.mul(x, s);
                if !covered[y] {
                    covered[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    gens
}

/// Exact isomorphism test by backtracking over generator images.
/// Returns `None` when either group exceeds [`ISOMORPHISM_TEST_LIMIT`].
pub fn is_isomorphic<A: GroupTable, B: GroupTable>(a: &A, b: &B) -> Option<bool> {
    if a.fingerprint() != b.fingerprint() {
        return Some(false);
    }
    if a.order() > ISOMORPHISM_TEST_LIMIT {
        return None;
    }
    let gens = generating_set(a);
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| (0..b.order()).filter(|&y| b.element_order(y) == a.element_order(g)).collect())
        .collect();
    let mut chosen = Vec::with_capacity(gens.len());
    Some(search_images(a, b, &gens, &candidates, &mut chosen))
}

fn search_images<A: GroupTable, B: GroupTable>(
    a: &A,
    b: &B,
    gens: &[usize],
    candidates: &[Vec<usize>],
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == gens.len() {
        let pairs: Vec<(usize, usize)> = gens.iter().copied().zip(chosen.iter().copied()).collect();
        return GroupHom::from_generator_images(a, b, &pairs)
            .map(|h| h.is_injective())
            .unwrap_or(false);
    }
    for &y in &candidates[chosen.len()] {
        chosen.push(y);
        if search_images(a, b, gens, candidates, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Cyclic group of order `n` as a table group (used in tests and corpus checks).
pub fn cyclic(n: usize) -> AbstractGroup {
    let table = (0..n).flat_map(|a| (0..n).map(move |b| (a + b) % n)).collect();
    AbstractGroup::from_table(n, table, (0..n).collect()).expect("cyclic table is a group")
}

/// Direct product of two table groups, indexed `a * |B| + b`.
pub fn direct_product(a: &AbstractGroup, b: &AbstractGroup) -> AbstractGroup {
    let (na, nb) = (a.order(), b.order());
    let n = na * nb;
    let mut table = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            table.push(a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb));
        }
    }
    AbstractGroup::from_table(n, table, (0..n).collect()).expect("product of groups is a group")
}

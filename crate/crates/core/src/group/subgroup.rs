use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::linalg::{fixed_space, AffineSet, AffineSubspace, Rational};

use super::{AbstractGroup, FiniteMatrixGroup, GroupError, GroupTable};

/// Default cap on the order of a group whose subgroup lattice is enumerated.
pub const SUBGROUP_ENUMERATION_BOUND: usize = 512;

/// A subgroup, stored as the sorted canonical indices of its members in the parent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Subgroup { members }
    }

    /// Sorts and deduplicates; does not check closure.
    pub fn from_indices(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Subgroup { members }
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        Subgroup {
            members: self.members.iter().copied().filter(|&m| other.contains(m)).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }
}

/// Result of searching for a complement of `K` in `Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplementSearch {
    Found(Subgroup),
    NotFound(NoComplementCertificate),
}

/// Exhaustion record: every subgroup of `Δ` with order `|Δ|/|K|`, each paired
/// with a nontrivial element it shares with `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoComplementCertificate {
    pub delta_order: usize,
    pub kernel_order: usize,
    pub subgroups_examined: usize,
    pub blocked: Vec<(Subgroup, usize)>,
}

/// `Δ/K` with its projection.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    pub group: AbstractGroup,
    /// Coset index of every member of `Δ`.
    pub coset_of: BTreeMap<usize, usize>,
    /// Least canonical index in each coset.
    pub representatives: Vec<usize>,
}

impl QuotientGroup {
    pub fn project(&self, index: usize) -> Option<usize> {
        self.coset_of.get(&index).copied()
    }
}

impl FiniteMatrixGroup {
    /// Subgroup generated by the given element indices.
    pub fn generate_subgroup(&self, generators: &[usize]) -> Result<Subgroup, GroupError> {
        if let Some(&bad) = generators.iter().find(|&&g| g >= self.order()) {
            return Err(GroupError::IndexOutOfRange(bad));
        }
        Ok(self.closure(&self.trivial(), generators, None))
    }

    /// Smallest subgroup containing `base` and `extra`. When `within` is given
    /// (and contains both), Lagrange lets us stop as soon as more than half of
    /// it is reached.
    fn closure(&self, base: &Subgroup, extra: &[usize], within: Option<&Subgroup>) -> Subgroup {
        let mut gens: Vec<usize> = base.members.clone();
        gens.extend_from_slice(extra);
        let mut seen = vec![false; self.order()];
        let mut count = 1;
        seen[self.identity()] = true;
        let mut queue = VecDeque::from([self.identity()]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    if let Some(w) = within {
                        if 2 * count > w.order() {
                            return w.clone();
                        }
                    }
                    queue.push_back(y);
                }
            }
        }
        Subgroup::from_sorted((0..self.order()).filter(|&i| seen[i]).collect())
    }

    pub fn is_subgroup(&self, s: &Subgroup) -> bool {
        s.contains(self.identity())
            && s.members.iter().all(|&a| {
                s.contains(self.inverse(a)) && s.members.iter().all(|&b| s.contains(self.mul(a, b)))
            })
    }

    /// Every subgroup of the whole group, in canonical order
    /// (by order, then by member list).
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>, GroupError> {
        self.subgroups_of(&self.whole(), SUBGROUP_ENUMERATION_BOUND)
    }

    /// Every subgroup of `within`. Each subgroup is reached from the trivial
    /// one by adjoining one element at a time, so joining every known subgroup
    /// with every outside element enumerates the full lattice.
    pub fn subgroups_of(&self, within: &Subgroup, bound: usize) -> Result<Vec<Subgroup>, GroupError> {
        if within.order() > bound {
            return Err(GroupError::GroupTooLarge {
                order: within.order(),
                bound,
            });
        }
        let mut found: HashSet<Subgroup> = HashSet::new();
        let trivial = self.trivial();
        found.insert(trivial.clone());
        let mut queue = VecDeque::from([trivial]);
        while let Some(s) = queue.pop_front() {
            for &g in &within.members {
                if s.contains(g) {
                    continue;
                }
                let joined = self.closure(&s, &[g], Some(within));
                if found.insert(joined.clone()) {
                    queue.push_back(joined);
                }
            }
        }
        let mut all: Vec<Subgroup> = found.into_iter().collect();
        all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
        Ok(all)
    }

    /// `{γ ∈ within : γx = x}`.
    pub fn stabilizer(&self, within: &Subgroup, x: &[Rational]) -> Subgroup {
        Subgroup::from_sorted(
            within
                .members
                .iter()
                .copied()
                .filter(|&i| self.act(i, x).as_slice() == x)
                .collect(),
        )
    }

    /// `{γ ∈ within : v ⊆ Fix(γ)}`, the elements fixing `v` pointwise.
    pub fn pointwise_stabilizer(&self, within: &Subgroup, v: &AffineSubspace) -> Result<Subgroup, GroupError> {
        let mut members = Vec::new();
        for &i in &within.members {
            if let AffineSet::Space(fix) = fixed_space(self.matrix(i))? {
                if v.is_contained_in(&fix)? {
                    members.push(i);
                }
            }
        }
        Ok(Subgroup::from_sorted(members))
    }

    /// True iff `γ·v = v` for every `γ ∈ within`.
    pub fn leaves_invariant(&self, within: &Subgroup, v: &AffineSubspace) -> Result<bool, GroupError> {
        for &i in &within.members {
            if &v.linear_image(self.matrix(i))? != v {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_normal_in(&self, k: &Subgroup, d: &Subgroup) -> bool {
        k.is_subset_of(d)
            && d.members.iter().all(|&g| {
                let gi = self.inverse(g);
                k.members.iter().all(|&x| k.contains(self.mul(self.mul(g, x), gi)))
            })
    }

    /// `d/k` with canonical coset representatives.
    pub fn quotient_group(&self, d: &Subgroup, k: &Subgroup) -> Result<QuotientGroup, GroupError> {
        if !self.is_subgroup(d) || !self.is_subgroup(k) || !k.is_subset_of(d) {
            return Err(GroupError::NotSubgroup);
        }
        if !self.is_normal_in(k, d) {
            return Err(GroupError::NotNormal);
        }
        let mut coset_of = BTreeMap::new();
        let mut representatives = Vec::new();
        for &x in &d.members {
            if coset_of.contains_key(&x) {
                continue;
            }
            let c = representatives.len();
            representatives.push(x);
            for &y in &k.members {
                coset_of.insert(self.mul(x, y), c);
            }
        }
        let n = representatives.len();
        let mut table = Vec::with_capacity(n * n);
        for &a in &representatives {
            for &b in &representatives {
                table.push(coset_of[&self.mul(a, b)]);
            }
        }
        let group = AbstractGroup::from_table(n, table, representatives.clone())?;
        Ok(QuotientGroup {
            group,
            coset_of,
            representatives,
        })
    }

    /// First subgroup (in canonical order) `c ⊆ d` with `c ∩ k = {e}` and
    /// `c·k = d`, or a certificate that none exists.
    pub fn find_complement(&self, d: &Subgroup, k: &Subgroup) -> Result<ComplementSearch, GroupError> {
        if !self.is_subgroup(d) || !self.is_subgroup(k) || !k.is_subset_of(d) {
            return Err(GroupError::NotSubgroup);
        }
        if !self.is_normal_in(k, d) {
            return Err(GroupError::NotNormal);
        }
        let target = d.order() / k.order();
        let subgroups = self.subgroups_of(d, SUBGROUP_ENUMERATION_BOUND)?;
        let mut blocked = Vec::new();
        for s in subgroups.iter().filter(|s| s.order() == target) {
            let shared = s.intersection(k);
            match shared.members.iter().copied().find(|&m| m != self.identity()) {
                Some(witness) => blocked.push((s.clone(), witness)),
                None => {
                    debug_assert!(self.verify_complement(d, k, s));
                    return Ok(ComplementSearch::Found(s.clone()));
                }
            }
        }
        Ok(ComplementSearch::NotFound(NoComplementCertificate {
            delta_order: d.order(),
            kernel_order: k.order(),
            subgroups_examined: subgroups.len(),
            blocked,
        }))
    }

    /// Checks `c ∩ k = {e}`, `c·k = d`, and that the projection restricted to
    /// `c` is an isomorphism onto `d/k` (a homomorphic section).
    pub fn verify_complement(&self, d: &Subgroup, k: &Subgroup, c: &Subgroup) -> bool {
        if !self.is_subgroup(c) || !c.is_subset_of(d) || !c.intersection(k).is_trivial() {
            return false;
        }
        let mut product: Vec<usize> = c
            .members
            .iter()
            .flat_map(|&a| k.members.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.mul(a, b))
            .collect();
        product.sort_unstable();
        product.dedup();
        if product != d.members {
            return false;
        }
        let Ok(q) = self.quotient_group(d, k) else {
            return false;
        };
        let images: Vec<usize> = c.members.iter().map(|&a| q.coset_of[&a]).collect();
        let mut distinct = images.clone();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.len() == q.group.order()
            && c.members.iter().enumerate().all(|(i, &a)| {
                c.members
                    .iter()
                    .enumerate()
                    .all(|(j, &b)| q.coset_of[&self.mul(a, b)] == q.group.mul(images[i], images[j]))
            })
    }

    /// The subgroup re-indexed as a standalone table group.
    pub fn subgroup_table(&self, s: &Subgroup) -> Result<AbstractGroup, GroupError> {
        AbstractGroup::restrict(self, &s.members)
    }

    /// Restricts the group to a subgroup as a matrix group of its own.
    pub fn subgroup_group(&self, s: &Subgroup) -> FiniteMatrixGroup {
        FiniteMatrixGroup::from_closed_unchecked(
            self.dim(),
            s.members.iter().map(|&i| self.matrix(i).clone()).collect(),
        )
    }
}

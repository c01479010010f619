//! Finite permutation groups acting on index sets.
//!
//! A group is stored through its faithful action on `{0, …, m−1}`.  Actions
//! are written on the right: `x·g` is `g.apply(x)`, and the product `gh`
//! means "first `g`, then `h`", so that `x·(gh) = (x·g)·h`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Default cap on the order of a generated group.
pub const DEFAULT_GROUP_CAP: usize = 10_000;
/// Default cap on the size of the set a group acts on.
pub const DEFAULT_DOMAIN_CAP: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group closure exceeded the cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error("domain of size {size} exceeds the cap of {cap}")]
    DomainTooLarge { size: usize, cap: usize },
    #[error("generator {index} is not a bijection of {{0..{degree}}}: {reason}")]
    NotBijective { index: usize, degree: usize, reason: String },
    #[error("element index {index} is out of range for a group of order {order}")]
    BadElementIndex { index: usize, order: usize },
    #[error("the given elements are not closed under composition")]
    NotASubgroup,
    #[error("action table is inconsistent: {0}")]
    BadAction(String),
}

/// A bijection of `{0, …, n−1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation((0..degree).collect())
    }

    /// Checks that `images` is a bijection; on failure reports the first
    /// repeated or out-of-range image.
    pub fn from_images(images: Vec<usize>) -> Result<Self, String> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (x, &y) in images.iter().enumerate() {
            if y >= n {
                return Err(format!("image {y} of point {x} is out of range"));
            }
            if seen[y] {
                return Err(format!("image {y} is repeated"));
            }
            seen[y] = true;
        }
        Ok(Permutation(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// The right-action product `self · other`: apply `self` first.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation(self.0.iter().map(|&y| other.0[y]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(x, y)| x == *y).count()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A finite group of permutations with its multiplication table.
///
/// Elements are enumerated breadth-first from the identity, multiplying on
/// the right by the generators in input order, so element indices are
/// stable for a given presentation.  The identity always has index 0.
#[derive(Clone)]
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Permutation>,
    lookup: HashMap<Permutation, usize>,
    cayley: Vec<u32>,
    inverses: Vec<usize>,
    generators: Vec<usize>,
    parent_indices: Option<Vec<usize>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl FiniteGroup {
    pub fn closure(degree: usize, generators: &[Permutation]) -> Result<Self, GroupError> {
        Self::closure_with_caps(degree, generators, DEFAULT_GROUP_CAP, DEFAULT_DOMAIN_CAP)
    }

    pub fn closure_with_caps(
        degree: usize,
        generators: &[Permutation],
        group_cap: usize,
        domain_cap: usize,
    ) -> Result<Self, GroupError> {
        if degree > domain_cap {
            return Err(GroupError::DomainTooLarge { size: degree, cap: domain_cap });
        }
        for (index, g) in generators.iter().enumerate() {
            if g.degree() != degree {
                return Err(GroupError::NotBijective {
                    index,
                    degree,
                    reason: format!("acts on {} points", g.degree()),
                });
            }
            Permutation::from_images(g.0.clone()).map_err(|reason| GroupError::NotBijective {
                index,
                degree,
                reason,
            })?;
        }

        let identity = Permutation::identity(degree);
        let mut elements = vec![identity.clone()];
        let mut lookup = HashMap::from([(identity, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in generators {
                let next = elements[i].then(g);
                if !lookup.contains_key(&next) {
                    if elements.len() == group_cap {
                        return Err(GroupError::CapExceeded { cap: group_cap });
                    }
                    lookup.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }

        let generator_indices = generators.iter().map(|g| lookup[g]).collect();
        Ok(Self::assemble(degree, elements, lookup, generator_indices))
    }

    fn assemble(
        degree: usize,
        elements: Vec<Permutation>,
        lookup: HashMap<Permutation, usize>,
        generators: Vec<usize>,
    ) -> Self {
        let m = elements.len();
        let mut cayley = vec![0u32; m * m];
        let mut inverses = vec![0usize; m];
        for i in 0..m {
            for j in 0..m {
                let k = lookup[&elements[i].then(&elements[j])];
                cayley[i * m + j] = k as u32;
                if k == 0 {
                    inverses[i] = j;
                }
            }
        }
        FiniteGroup { degree, elements, lookup, cayley, inverses, generators, parent_indices: None }
    }

    /// The trivial group on `degree` points.
    pub fn trivial(degree: usize) -> Self {
        Self::closure_with_caps(degree, &[], 1, usize::MAX).expect("trivial group always closes")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.lookup.get(p).copied()
    }

    /// Index of the product `gh` (apply `g` first).
    #[inline]
    pub fn product(&self, g: usize, h: usize) -> usize {
        self.cayley[g * self.order() + h] as usize
    }

    #[inline]
    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// Indices of the generators this group was closed from.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// For a subgroup, the index in the parent of each element.
    pub fn parent_indices(&self) -> Option<&[usize]> {
        self.parent_indices.as_deref()
    }

    /// Parent index of element `i`, or `i` itself when this is not a subgroup.
    pub fn to_parent(&self, i: usize) -> usize {
        self.parent_indices.as_ref().map_or(i, |p| p[i])
    }

    /// The element `g` acting on the point `x`.
    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.elements[g].apply(x)
    }

    /// Subgroup generated by the given parent elements, with back-references
    /// into the parent.
    pub fn generated_subgroup(&self, element_indices: &[usize]) -> Result<FiniteGroup, GroupError> {
        for &index in element_indices {
            if index >= self.order() {
                return Err(GroupError::BadElementIndex { index, order: self.order() });
            }
        }
        let gens: Vec<Permutation> = element_indices.iter().map(|&i| self.elements[i].clone()).collect();
        let mut sub = FiniteGroup::closure_with_caps(self.degree, &gens, self.order(), usize::MAX)?;
        sub.parent_indices = Some(sub.elements.iter().map(|p| self.lookup[p]).collect());
        Ok(sub)
    }

    /// Turns a set of parent elements that is already a subgroup into a
    /// [`FiniteGroup`].  Closure under products is checked on the parent's
    /// table first.
    pub fn subgroup_from_set(&self, element_indices: &[usize]) -> Result<FiniteGroup, GroupError> {
        let mut member = vec![false; self.order()];
        for &i in element_indices {
            if i >= self.order() {
                return Err(GroupError::BadElementIndex { index: i, order: self.order() });
            }
            member[i] = true;
        }
        if !member[0] {
            return Err(GroupError::NotASubgroup);
        }
        for &i in element_indices {
            for &j in element_indices {
                if !member[self.product(i, j)] {
                    return Err(GroupError::NotASubgroup);
                }
            }
        }
        let sub = self.generated_subgroup(element_indices)?;
        if sub.order() != distinct_count(element_indices) {
            return Err(GroupError::NotASubgroup);
        }
        Ok(sub)
    }

    /// Checks associativity, identity and inverses on the stored table.
    pub fn verify_axioms(&self) -> bool {
        let m = self.order();
        for i in 0..m {
            if self.product(0, i) != i || self.product(i, 0) != i {
                return false;
            }
            if self.product(i, self.inverse(i)) != 0 {
                return false;
            }
            for j in 0..m {
                for k in 0..m {
                    if self.product(self.product(i, j), k) != self.product(i, self.product(j, k)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn distinct_count(indices: &[usize]) -> usize {
    let mut v = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Partition of a finite domain into disjoint blocks.
///
/// Blocks are sorted internally and ordered by their smallest point, so two
/// partitions compare equal iff they describe the same blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b[0]);
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn block_of(&self, x: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&x).is_ok())
    }

    pub fn domain_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// A group acting on `{0, …, domain_size−1}` through an explicit table.
#[derive(Debug, Clone)]
pub struct GroupAction<'g> {
    group: &'g FiniteGroup,
    domain_size: usize,
    table: Vec<Vec<usize>>,
}

impl<'g> GroupAction<'g> {
    /// The action of a permutation group on the points it permutes.
    pub fn natural(group: &'g FiniteGroup) -> Self {
        let table = group.elements().iter().map(|p| p.images().to_vec()).collect();
        GroupAction { group, domain_size: group.degree(), table }
    }

    /// Builds an action from a table `table[g][x] = x·g`, checking the
    /// identity and compatibility laws.
    pub fn from_table(group: &'g FiniteGroup, domain_size: usize, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        if table.len() != group.order() || table.iter().any(|row| row.len() != domain_size) {
            return Err(GroupError::BadAction("table shape does not match".into()));
        }
        if table.iter().flatten().any(|&y| y >= domain_size) {
            return Err(GroupError::BadAction("image out of range".into()));
        }
        let action = GroupAction { group, domain_size, table };
        action.check_laws()?;
        Ok(action)
    }

    fn check_laws(&self) -> Result<(), GroupError> {
        for x in 0..self.domain_size {
            if self.act(0, x) != x {
                return Err(GroupError::BadAction(format!("identity moves point {x}")));
            }
        }
        let m = self.group.order();
        for g in 0..m {
            for h in 0..m {
                let gh = self.group.product(g, h);
                for x in 0..self.domain_size {
                    if self.act(gh, x) != self.act(h, self.act(g, x)) {
                        return Err(GroupError::BadAction(format!("x(gh) != (xg)h for g={g}, h={h}, x={x}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    #[inline]
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.table[g][x]
    }

    /// Image `E·g` of a set of points.
    pub fn image_of_set(&self, g: usize, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.act(g, x)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Orbit partition of an action; the action is transitive iff the result
/// has a single block.
pub fn orbits(action: &GroupAction<'_>) -> Partition {
    let n = action.domain_size();
    let mut label = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut block = vec![seed];
        label[seed] = id;
        let mut frontier = vec![seed];
        while let Some(x) = frontier.pop() {
            for g in 0..action.group().order() {
                let y = action.act(g, x);
                if label[y] == usize::MAX {
                    label[y] = id;
                    block.push(y);
                    frontier.push(y);
                }
            }
        }
        blocks.push(block);
    }
    Partition::from_blocks(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_images(v.to_vec()).unwrap()
    }

    fn s3() -> FiniteGroup {
        FiniteGroup::closure(3, &[perm(&[1, 2, 0]), perm(&[1, 0, 2])]).unwrap()
    }

    #[test]
    fn three_cycle_and_transposition_generate_s3() {
        let g = s3();
        assert_eq!(g.order(), 6);
        assert!(g.verify_axioms());
        assert_eq!(g.identity_index(), 0);
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = FiniteGroup::closure(4, &[]).unwrap();
        assert_eq!(g.order(), 1);
        let p = orbits(&GroupAction::natural(&g));
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn malformed_generator_is_rejected() {
        let bad = Permutation(vec![0, 0, 1]);
        let err = FiniteGroup::closure(3, &[bad]).unwrap_err();
        assert!(matches!(err, GroupError::NotBijective { index: 0, .. }));
        assert!(Permutation::from_images(vec![0, 0]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let err = FiniteGroup::closure_with_caps(4, &[perm(&[1, 2, 3, 0]), perm(&[1, 0, 2, 3])], 10, 100).unwrap_err();
        assert_eq!(err, GroupError::CapExceeded { cap: 10 });
        let err = FiniteGroup::closure_with_caps(5, &[], 10, 4).unwrap_err();
        assert!(matches!(err, GroupError::DomainTooLarge { .. }));
    }

    #[test]
    fn right_action_composes_left_to_right() {
        let g = s3();
        let action = GroupAction::natural(&g);
        for a in 0..6 {
            for b in 0..6 {
                let ab = g.product(a, b);
                for x in 0..3 {
                    assert_eq!(action.act(ab, x), action.act(b, action.act(a, x)));
                }
            }
        }
    }

    #[test]
    fn subgroups_of_s3() {
        let g = s3();
        assert_eq!(g.generated_subgroup(&[0]).unwrap().order(), 1);
        let three_cycle = g.index_of(&perm(&[1, 2, 0])).unwrap();
        let c3 = g.generated_subgroup(&[three_cycle]).unwrap();
        assert_eq!(c3.order(), 3);
        let t01 = g.index_of(&perm(&[1, 0, 2])).unwrap();
        let t12 = g.index_of(&perm(&[0, 2, 1])).unwrap();
        let whole = g.generated_subgroup(&[t01, t12]).unwrap();
        assert_eq!(whole.order(), 6);
        let back = whole.parent_indices().unwrap();
        for (i, &p) in back.iter().enumerate() {
            assert_eq!(whole.element(i), g.element(p));
        }
    }

    #[test]
    fn subgroup_from_set_rejects_non_subgroups() {
        let g = s3();
        let t01 = g.index_of(&perm(&[1, 0, 2])).unwrap();
        let t12 = g.index_of(&perm(&[0, 2, 1])).unwrap();
        assert_eq!(g.subgroup_from_set(&[0, t01]).unwrap().order(), 2);
        assert_eq!(g.subgroup_from_set(&[0, t01, t12]).unwrap_err(), GroupError::NotASubgroup);
        assert_eq!(g.subgroup_from_set(&[t01]).unwrap_err(), GroupError::NotASubgroup);
    }

    #[test]
    fn bad_action_table_is_rejected() {
        let g = s3();
        assert!(GroupAction::from_table(&g, 2, vec![vec![0, 1]; 6]).is_ok());
        // Every non-identity element swapping the two points is not an action:
        // two transpositions compose to a 3-cycle.
        let mut table = vec![vec![1, 0]; 6];
        table[0] = vec![0, 1];
        assert!(GroupAction::from_table(&g, 2, table).is_err());
    }
}

//! Discrete standard posets represented by their covering DAG, with the
//! order relation cached as a reachability closure.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Dense handle for a poset element; ids run 0..n contiguously.
pub type ElementId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("covering edges contain a directed cycle")]
    CycleDetected,
    #[error("covering edge ({0}, {1}) is implied by transitivity")]
    RedundantCover(ElementId, ElementId),
    #[error("element id {0} out of range for poset of size {1}")]
    IdOutOfRange(ElementId, usize),
    #[error("duplicate cover pair ({0}, {1})")]
    DuplicatePair(ElementId, ElementId),
    #[error("up-set of element {0} meets the truncation boundary and no tail data was supplied")]
    TruncatedUpSet(ElementId),
    #[error("elements {0} and {1} are not comparable")]
    NotComparable(ElementId, ElementId),
    #[error("generating-function argument |t| >= 1 diverges")]
    GfDiverges,
}

/// Finite (or depth-truncated) locally finite poset.
///
/// `upper_covers[x]` lists the elements covering `x`; for a rooted tree
/// these are the children A(x). The order relation `leq` is the
/// reflexive-transitive closure of the covering relation, cached as a
/// dense bit table.
#[derive(Debug, Clone)]
pub struct Poset {
    n: usize,
    upper_covers: Vec<Vec<ElementId>>,
    lower_covers: Vec<Vec<ElementId>>,
    boundary: BTreeSet<ElementId>,
    /// closure[x * n + y] == true iff x ⪯ y
    closure: Vec<bool>,
    /// topological order, minimal elements first
    topo: Vec<ElementId>,
}

impl Poset {
    /// Build from covering pairs (x, y) meaning y covers x.
    ///
    /// Redundant edges (implied by transitivity of the others) are
    /// rejected rather than silently dropped; call [`transitive_reduce`]
    /// first to accept an arbitrary DAG relation.
    pub fn build(n: usize, cover_pairs: &[(ElementId, ElementId)]) -> Result<Poset, PosetError> {
        Self::build_with_boundary(n, cover_pairs, BTreeSet::new())
    }

    pub fn build_with_boundary(
        n: usize,
        cover_pairs: &[(ElementId, ElementId)],
        boundary: BTreeSet<ElementId>,
    ) -> Result<Poset, PosetError> {
        let mut upper = vec![Vec::new(); n];
        let mut lower = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(x, y) in cover_pairs {
            if x >= n {
                return Err(PosetError::IdOutOfRange(x, n));
            }
            if y >= n {
                return Err(PosetError::IdOutOfRange(y, n));
            }
            if x == y {
                return Err(PosetError::CycleDetected);
            }
            if !seen.insert((x, y)) {
                return Err(PosetError::DuplicatePair(x, y));
            }
            upper[x].push(y);
            lower[y].push(x);
        }
        for b in &boundary {
            if *b >= n {
                return Err(PosetError::IdOutOfRange(*b, n));
            }
        }
        let topo = topo_sort(n, &upper).ok_or(PosetError::CycleDetected)?;

        // Reachability closure in topological order, then detect covers
        // implied by two-step paths.
        let mut closure = vec![false; n * n];
        for &x in topo.iter().rev() {
            closure[x * n + x] = true;
            let succ = upper[x].clone();
            for y in succ {
                for z in 0..n {
                    if closure[y * n + z] {
                        closure[x * n + z] = true;
                    }
                }
            }
        }
        for &(x, y) in cover_pairs {
            let implied = upper[x]
                .iter()
                .any(|&t| t != y && closure[t * n + y]);
            if implied {
                return Err(PosetError::RedundantCover(x, y));
            }
        }
        for v in upper.iter_mut().chain(lower.iter_mut()) {
            v.sort_unstable();
        }
        Ok(Poset {
            n,
            upper_covers: upper,
            lower_covers: lower,
            boundary,
            closure,
            topo,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n
    }

    pub fn is_truncated(&self) -> bool {
        !self.boundary.is_empty()
    }

    pub fn boundary(&self) -> &BTreeSet<ElementId> {
        &self.boundary
    }

    /// x ⪯ y
    pub fn leq(&self, x: ElementId, y: ElementId) -> bool {
        self.closure[x * self.n + y]
    }

    /// Elements covering x (the children A(x) on a tree).
    pub fn children(&self, x: ElementId) -> &[ElementId] {
        &self.upper_covers[x]
    }

    /// Elements covered by x.
    pub fn parents(&self, x: ElementId) -> &[ElementId] {
        &self.lower_covers[x]
    }

    /// D[x] = {t : t ⪯ x}
    pub fn down_set(&self, x: ElementId) -> Vec<ElementId> {
        (0..self.n).filter(|&t| self.leq(t, x)).collect()
    }

    /// I[x] = {t : t ⪰ x}, restricted to represented elements.
    pub fn up_set(&self, x: ElementId) -> Vec<ElementId> {
        (0..self.n).filter(|&t| self.leq(x, t)).collect()
    }

    /// I(x) = {t : t ≻ x}, restricted to represented elements.
    pub fn strict_up(&self, x: ElementId) -> Vec<ElementId> {
        (0..self.n).filter(|&t| t != x && self.leq(x, t)).collect()
    }

    /// True when I[x] meets the truncation boundary, i.e. the
    /// represented up-set may be incomplete.
    pub fn up_set_truncated(&self, x: ElementId) -> bool {
        self.boundary.iter().any(|&b| self.leq(x, b))
    }

    /// Elements in topological order, minimal first.
    pub fn topo_order(&self) -> &[ElementId] {
        &self.topo
    }

    pub fn minimal_elements(&self) -> Vec<ElementId> {
        (0..self.n).filter(|&x| self.lower_covers[x].is_empty()).collect()
    }

    pub fn maximal_elements(&self) -> Vec<ElementId> {
        (0..self.n).filter(|&x| self.upper_covers[x].is_empty()).collect()
    }

    /// The minimum element, if one exists.
    pub fn minimum(&self) -> Option<ElementId> {
        let mins = self.minimal_elements();
        match mins.as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }

    pub fn classify(&self) -> Classification {
        let maximal = self.maximal_elements();
        let minimal = self.minimal_elements();
        let is_antichain = (0..self.n).all(|x| self.upper_covers[x].is_empty());
        let is_connected = self.is_connected();
        // rooted tree: unique minimum and every other element has exactly
        // one lower cover
        let is_rooted_tree = self.minimum().is_some()
            && (0..self.n).all(|x| self.lower_covers[x].len() <= 1);
        Classification {
            is_antichain,
            is_connected,
            is_rooted_tree,
            maximal_elements: maximal,
            minimal_elements: minimal,
        }
    }

    /// Connectivity of the comparability relation, equivalently weak
    /// connectivity of the covering DAG.
    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in self.upper_covers[x].iter().chain(self.lower_covers[x].iter()) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Partition of elements by identical strict up-sets I(x).
    pub fn upper_equivalence_classes(&self) -> Vec<Vec<ElementId>> {
        let mut classes: Vec<(Vec<ElementId>, Vec<ElementId>)> = Vec::new();
        for x in 0..self.n {
            let key = self.strict_up(x);
            match classes.iter_mut().find(|(k, _)| *k == key) {
                Some((_, members)) => members.push(x),
                None => classes.push((key, vec![x])),
            }
        }
        classes.into_iter().map(|(_, m)| m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_antichain: bool,
    pub is_connected: bool,
    pub is_rooted_tree: bool,
    pub maximal_elements: Vec<ElementId>,
    pub minimal_elements: Vec<ElementId>,
}

fn topo_sort(n: usize, upper: &[Vec<ElementId>]) -> Option<Vec<ElementId>> {
    let mut indeg = vec![0usize; n];
    for succ in upper {
        for &y in succ {
            indeg[y] += 1;
        }
    }
    let mut queue: Vec<ElementId> = (0..n).filter(|&x| indeg[x] == 0).collect();
    queue.sort_unstable();
    let mut order = Vec::with_capacity(n);
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        order.push(x);
        for &y in &upper[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                queue.push(y);
            }
        }
    }
    if order.len() == n {
        Some(order)
    } else {
        None
    }
}

/// Unique transitive reduction of a DAG relation given as pairs.
pub fn transitive_reduce(
    pairs: &[(ElementId, ElementId)],
) -> Result<Vec<(ElementId, ElementId)>, PosetError> {
    let n = pairs
        .iter()
        .map(|&(x, y)| x.max(y) + 1)
        .max()
        .unwrap_or(0);
    let mut adj = vec![Vec::new(); n];
    let mut edge_set = BTreeSet::new();
    for &(x, y) in pairs {
        if x == y {
            return Err(PosetError::CycleDetected);
        }
        if edge_set.insert((x, y)) {
            adj[x].push(y);
        }
    }
    let topo = topo_sort(n, &adj).ok_or(PosetError::CycleDetected)?;
    let mut closure = vec![false; n * n];
    for &x in topo.iter().rev() {
        closure[x * n + x] = true;
        for &y in adj[x].clone().iter() {
            for z in 0..n {
                if closure[y * n + z] {
                    closure[x * n + z] = true;
                }
            }
        }
    }
    let mut reduced: Vec<(ElementId, ElementId)> = edge_set
        .iter()
        .copied()
        .filter(|&(x, y)| {
            !adj[x]
                .iter()
                .any(|&t| t != y && t != x && closure[t * n + y])
        })
        .collect();
    reduced.sort_unstable();
    Ok(reduced)
}

/// JSON wire format: { "n": int, "covers": [[x, y], ...], "boundary": [ids] }
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosetFile {
    pub n: usize,
    pub covers: Vec<(ElementId, ElementId)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<ElementId>,
}

impl PosetFile {
    pub fn to_poset(&self) -> Result<Poset, PosetError> {
        Poset::build_with_boundary(self.n, &self.covers, self.boundary.iter().copied().collect())
    }

    pub fn from_poset(p: &Poset) -> PosetFile {
        let mut covers = Vec::new();
        for x in 0..p.n_elements() {
            for &y in p.children(x) {
                covers.push((x, y));
            }
        }
        covers.sort_unstable();
        PosetFile {
            n: p.n_elements(),
            covers,
            boundary: p.boundary().iter().copied().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Poset {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Poset::build(n, &pairs).unwrap()
    }

    #[test]
    fn build_chain() {
        let p = chain(3);
        assert!(p.leq(0, 2));
        assert!(p.leq(1, 1));
        assert!(!p.leq(2, 0));
    }

    #[test]
    fn redundant_cover_rejected() {
        let err = Poset::build(3, &[(0, 1), (1, 2), (0, 2)]).unwrap_err();
        assert_eq!(err, PosetError::RedundantCover(0, 2));
    }

    #[test]
    fn cycle_rejected() {
        let err = Poset::build(3, &[(0, 1), (1, 2), (2, 0)]).unwrap_err();
        assert_eq!(err, PosetError::CycleDetected);
    }

    #[test]
    fn reduce_removes_implied_edge() {
        let out = transitive_reduce(&[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(out, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reduce_identity_on_reduced() {
        let input = vec![(0, 1), (1, 2)];
        assert_eq!(transitive_reduce(&input).unwrap(), input);
    }

    #[test]
    fn reduce_boolean_lattice() {
        // elements 0=∅ 1={1} 2={2} 3={1,2}; all 5 comparable pairs in
        let all = vec![(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];
        let out = transitive_reduce(&all).unwrap();
        assert_eq!(out, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn sets_on_chain_of_4() {
        let p = chain(4);
        assert_eq!(p.down_set(1), vec![0, 1]);
        assert_eq!(p.up_set(1), vec![1, 2, 3]);
    }

    #[test]
    fn antichain_up_set_is_self() {
        let p = Poset::build(3, &[]).unwrap();
        assert_eq!(p.up_set(1), vec![1]);
        assert!(!p.leq(0, 2));
    }

    #[test]
    fn boolean_lattice_children() {
        let p = Poset::build(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(p.children(1), &[3]);
    }

    #[test]
    fn classify_flags() {
        let two_chains = Poset::build(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!two_chains.classify().is_connected);

        let anti = Poset::build(3, &[]).unwrap();
        let c = anti.classify();
        assert!(c.is_antichain);
        assert_eq!(c.maximal_elements, vec![0, 1, 2]);

        let tree = Poset::build(3, &[(0, 1), (0, 2)]).unwrap();
        assert!(tree.classify().is_rooted_tree);
    }

    #[test]
    fn upper_equivalence_chain_singletons() {
        let p = chain(4);
        assert_eq!(p.upper_equivalence_classes().len(), 4);
    }

    #[test]
    fn upper_equivalence_antichain_single_class() {
        let p = Poset::build(4, &[]).unwrap();
        assert_eq!(p.upper_equivalence_classes(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn poset_file_roundtrip() {
        let p = Poset::build(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let f = PosetFile::from_poset(&p);
        let json = serde_json::to_string(&f).unwrap();
        let back: PosetFile = serde_json::from_str(&json).unwrap();
        let q = back.to_poset().unwrap();
        assert_eq!(q.n_elements(), 4);
        assert!(q.leq(0, 3));
    }
}

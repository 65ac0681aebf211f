//! Rooted-tree constructions: lazy tree generation, UPF validation and
//! construction from rate functions, constant-rate laws, percolation
//! thinning, and depth distributions.

use crate::dist::{CheckRow, DistError, MomentReport, Pdf, Upf};
use crate::poset::{ElementId, Poset};
use crate::scalar::{Rational, Scalar};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("F at the root must be 1")]
    RootNotOne,
    #[error("child sum violation at node {0}: F(x) <= sum of child values")]
    ChildSumViolation(ElementId),
    #[error("leaf encountered at node {0}: no constant rate distribution exists")]
    LeafEncountered(ElementId),
    #[error("no lower rate bound declared for an unbounded rate construction")]
    RateBoundMissing,
    #[error("rate at leaf {0} must be exactly 1")]
    LeafRateNotOne(ElementId),
    #[error("rate at internal node {0} must be strictly less than 1")]
    InternalRateOne(ElementId),
    #[error("rate at node {0} outside (0, 1]")]
    RateOutOfRange(ElementId),
    #[error("weak inequality F(x) >= child sum violated at node {0}")]
    WeakInequalityViolation(ElementId),
    #[error("percolation probability must lie in (0, 1]")]
    BadPercolation,
    #[error("alpha must lie in (0, 1)")]
    BadAlpha,
    #[error("unknown registered tree rule {0:?}")]
    UnknownRule(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Node identity: the root-to-node child-index path. The root is the
/// empty path; concatenation is the free-semigroup product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TreePath(pub Vec<u32>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    pub fn child(&self, i: u32) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        TreePath(v)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_prefix_of(&self, other: &TreePath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Concatenation x·y in the free semigroup.
    pub fn concat(&self, other: &TreePath) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        TreePath(v)
    }

    /// Left quotient x⁻¹y, defined when x is a prefix of y.
    pub fn left_quotient(&self, other: &TreePath) -> Option<TreePath> {
        if self.is_prefix_of(other) {
            Some(TreePath(other.0[self.0.len()..].to_vec()))
        } else {
            None
        }
    }

    pub fn parse(s: &str) -> Option<TreePath> {
        let s = s.trim();
        if s.is_empty() {
            return Some(TreePath::root());
        }
        s.split('.')
            .map(|part| part.parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .map(TreePath)
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Lazy generator of a rooted tree: children count per node, pure and
/// deterministic in the node path.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeRule {
    /// k children at every node (k = 1 is the chain ℕ).
    Kary { k: u32 },
    /// Explicit counts keyed by path strings like "0.1.1"; absent = leaf.
    Explicit { children_counts: HashMap<String, u32> },
    /// Registered rule by name.
    Rule { name: String },
}

impl TreeRule {
    pub fn kary(k: u32) -> Self {
        TreeRule::Kary { k }
    }

    pub fn children_count(&self, path: &TreePath) -> Result<u32, TreeError> {
        match self {
            TreeRule::Kary { k } => Ok(*k),
            TreeRule::Explicit { children_counts } => {
                Ok(children_counts.get(&path.to_string()).copied().unwrap_or(0))
            }
            TreeRule::Rule { name } => match name.as_str() {
                // depth-alternating branching: 1 child at even depth, 2 at odd
                "alternating12" => Ok(if path.depth() % 2 == 0 { 1 } else { 2 }),
                other => Err(TreeError::UnknownRule(other.to_string())),
            },
        }
    }
}

/// Depth-truncated materialization of a tree rule, with node ids in BFS
/// order (root = 0) and the deepest branching nodes marked as boundary.
#[derive(Debug, Clone)]
pub struct TreeTrunc {
    pub rule: TreeRule,
    pub depth: usize,
    pub poset: Poset,
    pub paths: Vec<TreePath>,
    pub depths: Vec<usize>,
    pub index: HashMap<TreePath, ElementId>,
}

impl TreeTrunc {
    pub fn materialize(rule: TreeRule, depth: usize) -> Result<TreeTrunc, TreeError> {
        let mut paths = vec![TreePath::root()];
        let mut depths = vec![0usize];
        let mut pairs = Vec::new();
        let mut boundary = BTreeSet::new();
        let mut head = 0usize;
        while head < paths.len() {
            let path = paths[head].clone();
            let d = depths[head];
            let k = rule.children_count(&path)?;
            if d == depth {
                if k > 0 {
                    boundary.insert(head);
                }
            } else {
                for i in 0..k {
                    let child = path.child(i);
                    pairs.push((head, paths.len()));
                    paths.push(child);
                    depths.push(d + 1);
                }
            }
            head += 1;
        }
        let poset = Poset::build_with_boundary(paths.len(), &pairs, boundary)
            .expect("BFS tree edges form a reduced DAG");
        let index = paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(TreeTrunc {
            rule,
            depth,
            poset,
            paths,
            depths,
            index,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.paths.len()
    }

    /// Nodes at exact depth n (the level A_n).
    pub fn level(&self, n: usize) -> Vec<ElementId> {
        (0..self.n_nodes()).filter(|&x| self.depths[x] == n).collect()
    }

    pub fn is_leaf(&self, x: ElementId) -> bool {
        self.poset.children(x).is_empty() && !self.poset.boundary().contains(&x)
    }
}

/// Distributes the child-sum mass among the children of a node.
/// The choice is arbitrary in the construction; uniform gives closed
/// forms, the others witness non-uniqueness.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Splitter {
    Uniform,
    /// Fixed proportions by child index (normalized over the first k).
    Weighted { weights: Vec<(i64, i64)> },
    /// Proportions reversed at odd depths; breaks multiplicativity of
    /// the resulting UPF over concatenation.
    DepthAlternating { weights: Vec<(i64, i64)> },
    /// Deterministic pseudo-random proportions derived from the node path.
    Seeded { seed: u64 },
}

impl Splitter {
    pub fn uniform() -> Self {
        Splitter::Uniform
    }

    pub fn weighted(weights: &[(i64, i64)]) -> Self {
        Splitter::Weighted {
            weights: weights.to_vec(),
        }
    }

    /// Normalized positive proportions for the k children of `path`.
    pub fn proportions<T: Scalar>(&self, path: &TreePath, k: usize) -> Vec<T> {
        assert!(k > 0);
        let raw: Vec<T> = match self {
            Splitter::Uniform => vec![T::one(); k],
            Splitter::Weighted { weights } => (0..k)
                .map(|i| {
                    let (p, q) = weights[i % weights.len()];
                    T::from_ratio(p, q)
                })
                .collect(),
            Splitter::DepthAlternating { weights } => (0..k)
                .map(|i| {
                    let j = if path.depth() % 2 == 0 { i } else { k - 1 - i };
                    let (p, q) = weights[j % weights.len()];
                    T::from_ratio(p, q)
                })
                .collect(),
            Splitter::Seeded { seed } => (0..k)
                .map(|i| {
                    let h = splitmix(
                        seed.wrapping_add(0x9e37_79b9)
                            .wrapping_mul(path_hash(path))
                            .wrapping_add(i as u64),
                    );
                    T::from_u64(1 + h % 997)
                })
                .collect(),
        };
        let total = raw.iter().fold(T::zero(), |acc, v| acc + v.clone());
        raw.into_iter().map(|v| v / total.clone()).collect()
    }
}

fn path_hash(path: &TreePath) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &i in &path.0 {
        h ^= i as u64 + 1;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h | 1
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeUpfReport {
    /// s_n = Σ_{x ∈ A_n} F(x) per depth.
    pub level_sums: Vec<f64>,
    /// true when a lower rate bound α was declared and s_n ≤ (1−α)^n held.
    pub decay_established: bool,
    /// set when no bound was declared; the decay condition was reported
    /// but not certified.
    pub decay_warning: bool,
}

/// Check the UPF characterization on the represented nodes: F(root) = 1,
/// F(x) strictly above its child sum at every interior node, and the
/// level sums s_n, bounded by (1−α)^n when a rate bound is declared.
pub fn validate_upf_tree<T: Scalar>(
    tree: &TreeTrunc,
    f_upper: &Upf<T>,
    alpha_lower_bound: Option<&T>,
) -> Result<TreeUpfReport, TreeError> {
    if f_upper.values[0] != T::one() {
        return Err(TreeError::RootNotOne);
    }
    for x in 0..tree.n_nodes() {
        if tree.poset.boundary().contains(&x) {
            continue;
        }
        let child_sum = tree
            .poset
            .children(x)
            .iter()
            .fold(T::zero(), |acc, &y| acc + f_upper.values[y].clone());
        if f_upper.values[x] <= child_sum {
            return Err(TreeError::ChildSumViolation(x));
        }
    }
    let mut level_sums = Vec::new();
    let mut decay_established = alpha_lower_bound.is_some();
    for n in 0..=tree.depth {
        let s: T = tree
            .level(n)
            .iter()
            .fold(T::zero(), |acc, &x| acc + f_upper.values[x].clone());
        if let Some(alpha) = alpha_lower_bound {
            let bound = (T::one() - alpha.clone()).powu(n as u32);
            if s > bound {
                decay_established = false;
            }
        }
        level_sums.push(s.to_f64());
    }
    Ok(TreeUpfReport {
        level_sums,
        decay_established,
        decay_warning: alpha_lower_bound.is_none(),
    })
}

/// Recursive UPF construction from a rate function: F(root) = 1 and the
/// child sum at x equals [1 − r(x)]·F(x), split by the splitter.
///
/// A lower bound r ≥ α > 0 must be declared; it is what certifies the
/// level-sum decay beyond the truncation.
pub fn construct_upf_from_rate<T: Scalar>(
    tree: &TreeTrunc,
    rate: &[T],
    splitter: &Splitter,
    alpha_lower_bound: Option<&T>,
) -> Result<Upf<T>, TreeError> {
    let alpha = alpha_lower_bound.ok_or(TreeError::RateBoundMissing)?;
    if *alpha <= T::zero() || *alpha > T::one() {
        return Err(TreeError::BadAlpha);
    }
    for x in 0..tree.n_nodes() {
        if rate[x] <= T::zero() || rate[x] > T::one() || rate[x] < *alpha {
            return Err(TreeError::RateOutOfRange(x));
        }
        if tree.is_leaf(x) && rate[x] != T::one() {
            return Err(TreeError::LeafRateNotOne(x));
        }
        if !tree.is_leaf(x) && rate[x] == T::one() {
            return Err(TreeError::InternalRateOne(x));
        }
    }
    let mut values = vec![T::zero(); tree.n_nodes()];
    values[0] = T::one();
    for &x in tree.poset.topo_order() {
        let kids = tree.poset.children(x).to_vec();
        if kids.is_empty() {
            continue;
        }
        let mass = (T::one() - rate[x].clone()) * values[x].clone();
        let props: Vec<T> = splitter.proportions(&tree.paths[x], kids.len());
        for (y, w) in kids.iter().zip(props) {
            values[*y] = mass.clone() * w;
        }
    }
    Ok(Upf { values })
}

/// Constant-rate UPF: child sums equal (1 − α)F(x) at every node. The
/// tree must be leafless down to the truncation depth.
pub fn construct_constant_rate_upf<T: Scalar>(
    tree: &TreeTrunc,
    alpha: &T,
    splitter: &Splitter,
) -> Result<Upf<T>, TreeError> {
    if *alpha <= T::zero() || *alpha >= T::one() {
        return Err(TreeError::BadAlpha);
    }
    if let Some(x) = (0..tree.n_nodes()).find(|&x| tree.is_leaf(x)) {
        return Err(TreeError::LeafEncountered(x));
    }
    let rate = vec![alpha.clone(); tree.n_nodes()];
    construct_upf_from_rate(tree, &rate, splitter, Some(alpha))
}

/// Pdf of the constant-rate law on the truncation, with exact geometric
/// per-element tails: mass above x beyond the cut is (1−α)^(D−d(x)+1) F(x).
pub fn constant_rate_pdf<T: Scalar>(
    tree: &TreeTrunc,
    alpha: &T,
    splitter: &Splitter,
) -> Result<(Upf<T>, Pdf<T>), TreeError> {
    let upf = construct_constant_rate_upf(tree, alpha, splitter)?;
    let probs: Vec<T> = upf
        .values
        .iter()
        .map(|v| alpha.clone() * v.clone())
        .collect();
    let one_minus = T::one() - alpha.clone();
    let upper_tail: Vec<T> = (0..tree.n_nodes())
        .map(|x| {
            let levels_below_cut = (tree.depth - tree.depths[x] + 1) as u32;
            one_minus.powu(levels_below_cut) * upf.values[x].clone()
        })
        .collect();
    let tail = upper_tail[0].clone();
    let pdf = Pdf::with_tail(probs, tail, Some(upper_tail))?;
    Ok((upf, pdf))
}

/// Percolation: F_p(x) = p^{d(x)} F(x). Requires the weak child-sum
/// inequality on F; p = 1 returns F unchanged.
pub fn percolation_upf<T: Scalar>(
    tree: &TreeTrunc,
    f_upper: &Upf<T>,
    p: &T,
) -> Result<Upf<T>, TreeError> {
    if *p <= T::zero() || *p > T::one() {
        return Err(TreeError::BadPercolation);
    }
    for x in 0..tree.n_nodes() {
        if tree.poset.boundary().contains(&x) {
            continue;
        }
        let child_sum = tree
            .poset
            .children(x)
            .iter()
            .fold(T::zero(), |acc, &y| acc + f_upper.values[y].clone());
        if f_upper.values[x] < child_sum {
            return Err(TreeError::WeakInequalityViolation(x));
        }
    }
    let values = (0..tree.n_nodes())
        .map(|x| p.powu(tree.depths[x] as u32) * f_upper.values[x].clone())
        .collect();
    Ok(Upf { values })
}

/// Survival function of d(X): P(d(X) ≥ n) = Σ_{x ∈ A_n} F(x), for
/// n = 0 ..= depth.
pub fn depth_distribution<T: Scalar>(tree: &TreeTrunc, f_upper: &Upf<T>) -> Vec<T> {
    (0..=tree.depth)
        .map(|n| {
            tree.level(n)
                .iter()
                .fold(T::zero(), |acc, &x| acc + f_upper.values[x].clone())
        })
        .collect()
}

/// Moment identities for the constant-rate law on a leafless tree,
/// computed over the depth marginal d(X) ~ geometric(α) with a certified
/// geometric tail bound.
///
/// E[λ_n(X)] depends only on d(X) because λ_n(x) = C(n + d(x), n).
pub fn constant_rate_tree_moments(
    alpha: f64,
    n_max: usize,
    tail_tol: f64,
) -> Result<MomentReport, DistError> {
    assert!(alpha > 0.0 && alpha < 1.0);
    let q = 1.0 - alpha;
    let mut rows = Vec::new();
    let mut worst_tail: f64 = 0.0;
    for n in 0..=n_max as u32 {
        let mut depth = 8usize;
        loop {
            // tail bound: C(n+m, n) grows by factor (n+m+1)/(m+1), which
            // is at most gamma := (n + depth + 2)/(depth + 2) for m > depth
            let gamma = (n as f64 + depth as f64 + 2.0) / (depth as f64 + 2.0);
            if gamma * q < 1.0 {
                let head = binom_f64(n as usize + depth + 1, n as usize)
                    * alpha
                    * q.powi(depth as i32 + 1);
                let bound = head / (1.0 - gamma * q);
                if bound <= tail_tol {
                    let mut e_lam = 0.0;
                    for m in 0..=depth {
                        e_lam += binom_f64(n as usize + m, n as usize) * alpha * q.powi(m as i32);
                    }
                    worst_tail = worst_tail.max(bound);
                    rows.push(CheckRow::new(
                        "E_lambda_n_eq_alpha_pow_neg_n",
                        Some(n),
                        e_lam,
                        alpha.powi(-(n as i32)),
                    ));
                    break;
                }
            }
            depth *= 2;
            if depth > 1 << 22 {
                return Err(DistError::TailBoundTooLoose(tail_tol));
            }
        }
    }
    // record the certified bound alongside the rows
    rows.push(CheckRow::new("certified_tail_bound", None, worst_tail, 0.0));
    Ok(MomentReport {
        rows,
        constant_rate_alpha: Some(alpha),
    })
}

fn binom_f64(n: usize, k: usize) -> f64 {
    crate::scalar::binomial(n as u64, k as u64).to_f64()
}

/// UPF / PDF tables keyed by path strings like "0.1.1".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathTable {
    pub values: HashMap<String, serde_json::Value>,
}

impl PathTable {
    pub fn from_upf_f64(tree: &TreeTrunc, upf: &Upf<f64>) -> Self {
        let values = tree
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.to_string(), serde_json::json!(upf.values[i])))
            .collect();
        PathTable { values }
    }

    pub fn from_upf_exact(tree: &TreeTrunc, upf: &Upf<Rational>) -> Self {
        let values = tree
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p.to_string(),
                    serde_json::json!(crate::scalar::format_rational(&upf.values[i])),
                )
            })
            .collect();
        PathTable { values }
    }
}

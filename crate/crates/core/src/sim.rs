//! Seeded simulation of IID sequences, ladder chains, partial products,
//! and thinned point processes. All randomness flows through per-replicate
//! streams derived from a master seed, so results are bit-identical
//! across thread counts.

use crate::dist::Pdf;
use crate::par::{par_map_indexed, seq_map_indexed};
use crate::poset::{ElementId, Poset};
use crate::tree::{Splitter, TreePath, TreeRule};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("input path exhausted before the requested ladder length")]
    Exhausted,
    #[error("operation requires nodes of a free semigroup (k-ary tree paths)")]
    NotFreeSemigroup,
}

/// Master seed plus the derivation contract: replicate i draws from a
/// stream derived deterministically from (master_seed, i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed }
    }

    pub fn stream(&self, replicate: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut z = self
            .master_seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(replicate);
        for chunk in seed.chunks_mut(8) {
            z = splitmix(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A partially ordered sample space with exact sampling of X and of the
/// conditional law of X given X ⪰ y.
pub trait SampleSpace: Sync {
    type Point: Clone + Eq + Ord + Hash + Debug + Send;

    fn leq(&self, a: &Self::Point, b: &Self::Point) -> bool;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Point;
    fn sample_above(&self, y: &Self::Point, rng: &mut ChaCha8Rng) -> Self::Point;
}

/// Distribution on a finite poset, sampled by inversion over element ids;
/// conditional sampling enumerates I[y].
pub struct FiniteDist {
    pub poset: Poset,
    pub probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(poset: Poset, pdf: &Pdf<f64>) -> Self {
        FiniteDist {
            poset,
            probs: pdf.probs.clone(),
        }
    }

    fn invert(&self, weights: impl Iterator<Item = (ElementId, f64)>, u: f64) -> ElementId {
        let mut acc = 0.0;
        let mut last = 0;
        for (x, w) in weights {
            acc += w;
            last = x;
            if u < acc {
                return x;
            }
        }
        last
    }
}

impl SampleSpace for FiniteDist {
    type Point = ElementId;

    fn leq(&self, a: &ElementId, b: &ElementId) -> bool {
        self.poset.leq(*a, *b)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ElementId {
        let u: f64 = rng.gen();
        self.invert((0..self.probs.len()).map(|x| (x, self.probs[x])), u)
    }

    fn sample_above(&self, y: &ElementId, rng: &mut ChaCha8Rng) -> ElementId {
        let total: f64 = (0..self.probs.len())
            .filter(|&x| self.poset.leq(*y, x))
            .map(|x| self.probs[x])
            .sum();
        let u: f64 = rng.gen();
        self.invert(
            (0..self.probs.len())
                .filter(|&x| self.poset.leq(*y, x))
                .map(|x| (x, self.probs[x] / total)),
            u,
        )
    }
}

/// Constant-rate law on a lazily generated tree; sampling never caps the
/// depth. The descent walk stops at the current node with probability α
/// and otherwise moves to a child with the splitter's proportions, which
/// is exactly the conditional law given X ⪰ current node.
pub struct CrTreeLaw {
    pub rule: TreeRule,
    pub splitter: Splitter,
    pub alpha: f64,
}

impl CrTreeLaw {
    pub fn new(rule: TreeRule, splitter: Splitter, alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 1.0);
        CrTreeLaw {
            rule,
            splitter,
            alpha,
        }
    }
}

impl SampleSpace for CrTreeLaw {
    type Point = TreePath;

    fn leq(&self, a: &TreePath, b: &TreePath) -> bool {
        a.is_prefix_of(b)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> TreePath {
        self.sample_above(&TreePath::root(), rng)
    }

    fn sample_above(&self, y: &TreePath, rng: &mut ChaCha8Rng) -> TreePath {
        let mut node = y.clone();
        loop {
            let stop: f64 = rng.gen();
            if stop < self.alpha {
                return node;
            }
            let k = self
                .rule
                .children_count(&node)
                .expect("tree rule must be total") as usize;
            assert!(k > 0, "constant-rate law requires a leafless tree");
            let props: Vec<f64> = self.splitter.proportions(&node, k);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = k - 1;
            for (i, w) in props.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            node = node.child(pick as u32);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Iid,
    Ladder,
    PartialProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath<P> {
    pub kind: PathKind,
    pub nodes: Vec<P>,
    /// ladder index sequence N_n (1-based), where applicable
    pub indices: Vec<usize>,
}

pub fn sample_iid<S: SampleSpace>(space: &S, n: usize, rng: &mut ChaCha8Rng) -> SamplePath<S::Point> {
    let nodes = (0..n).map(|_| space.sample(rng)).collect();
    SamplePath {
        kind: PathKind::Iid,
        nodes,
        indices: Vec::new(),
    }
}

/// Extract the ladder subsequence: Y_1 = X_1, N_1 = 1, and
/// N_{n+1} = min{m > N_n : X_m ⪰ Y_n}.
pub fn ladder_from_iid<S: SampleSpace>(
    space: &S,
    path: &SamplePath<S::Point>,
    want_len: usize,
) -> Result<SamplePath<S::Point>, SimError> {
    let mut nodes = Vec::new();
    let mut indices = Vec::new();
    for (i, x) in path.nodes.iter().enumerate() {
        match nodes.last() {
            None => {
                nodes.push(x.clone());
                indices.push(i + 1);
            }
            Some(last) => {
                if space.leq(last, x) {
                    nodes.push(x.clone());
                    indices.push(i + 1);
                }
            }
        }
        if nodes.len() == want_len {
            break;
        }
    }
    if nodes.len() < want_len {
        return Err(SimError::Exhausted);
    }
    Ok(SamplePath {
        kind: PathKind::Ladder,
        nodes,
        indices,
    })
}

/// Ladder chain sampled directly from the Markov kernel g(y, z) = f(z)/F(y).
pub fn ladder_markov_sample<S: SampleSpace>(
    space: &S,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> SamplePath<S::Point> {
    let mut nodes: Vec<S::Point> = Vec::with_capacity(n);
    for _ in 0..n {
        let next = match nodes.last() {
            None => space.sample(rng),
            Some(y) => space.sample_above(y, rng),
        };
        nodes.push(next);
    }
    SamplePath {
        kind: PathKind::Ladder,
        nodes,
        indices: (1..=n).collect(),
    }
}

/// Partial products Z_n = X_1 · X_2 ⋯ X_n under free-semigroup
/// concatenation of paths.
pub fn partial_products(draws: &[TreePath]) -> SamplePath<TreePath> {
    let mut nodes = Vec::with_capacity(draws.len());
    let mut acc = TreePath::root();
    for d in draws {
        acc = acc.concat(d);
        nodes.push(acc.clone());
    }
    SamplePath {
        kind: PathKind::PartialProduct,
        nodes,
        indices: Vec::new(),
    }
}

/// Geometric(p) on {1, 2, ...} by inversion, for reproducibility across
/// platforms.
pub fn geometric_by_inversion(p: f64, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    if p >= 1.0 {
        return 1;
    }
    1 + ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize
}

/// Simulate one thinned point: draw M ~ geometric(p), run the ladder
/// chain M steps, return Y_M.
pub fn thin_simulate_one<S: SampleSpace>(space: &S, p: f64, rng: &mut ChaCha8Rng) -> S::Point {
    let m = geometric_by_inversion(p, rng);
    let path = ladder_markov_sample(space, m, rng);
    path.nodes.last().cloned().expect("m >= 1")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointCounts<P: Eq + Hash> {
    pub counts: HashMap<P, usize>,
}

/// N_x = #{n : W_n ⪯ x} over the supplied elements, plus a pathwise check
/// of the inverse relation W_n ⪯ x ⟺ N_x ≥ n and monotonicity.
pub fn point_counts<S: SampleSpace>(
    space: &S,
    path: &SamplePath<S::Point>,
    elements: &[S::Point],
) -> (PointCounts<S::Point>, bool) {
    let mut counts = HashMap::new();
    for x in elements {
        let n_x = path.nodes.iter().filter(|w| space.leq(w, x)).count();
        counts.insert(x.clone(), n_x);
    }
    let mut ok = true;
    for x in elements {
        let n_x = counts[x];
        // inverse relation W_n ⪯ x ⟺ N_x ≥ n holds for increasing paths
        for (n, w) in path.nodes.iter().enumerate() {
            if space.leq(w, x) != (n_x >= n + 1) {
                ok = false;
            }
        }
        for y in elements {
            if space.leq(x, y) && counts[x] > counts[y] {
                ok = false;
            }
        }
    }
    (PointCounts { counts }, ok)
}

/// Empirical law over `replicates` independent replicates, each drawn
/// from its own derived stream. Aggregation is order-independent.
pub fn monte_carlo_law<S, F>(
    space: &S,
    seed: SeedSpec,
    replicates: usize,
    draw: F,
) -> HashMap<S::Point, usize>
where
    S: SampleSpace,
    F: Fn(&S, &mut ChaCha8Rng) -> S::Point + Sync,
{
    let samples = par_map_indexed(replicates, |i| {
        let mut rng = seed.stream(i as u64);
        draw(space, &mut rng)
    });
    let mut counts = HashMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

/// Sequential reference implementation of [`monte_carlo_law`]; identical
/// output, used by the benchmark suite.
pub fn monte_carlo_law_seq<S, F>(
    space: &S,
    seed: SeedSpec,
    replicates: usize,
    draw: F,
) -> HashMap<S::Point, usize>
where
    S: SampleSpace,
    F: Fn(&S, &mut ChaCha8Rng) -> S::Point + Sync,
{
    let samples = seq_map_indexed(replicates, |i| {
        let mut rng = seed.stream(i as u64);
        draw(space, &mut rng)
    });
    let mut counts = HashMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

/// Total-variation distance between an empirical law and exact
/// probabilities on a finite list of points; all unlisted mass is pooled
/// into a single tail bin with the given exact tail probability.
pub fn total_variation<P: Eq + Hash + Clone>(
    counts: &HashMap<P, usize>,
    replicates: usize,
    exact: &[(P, f64)],
    exact_tail: f64,
) -> f64 {
    let n = replicates as f64;
    let mut tv = 0.0;
    let mut emp_listed = 0usize;
    for (point, prob) in exact {
        let c = counts.get(point).copied().unwrap_or(0);
        emp_listed += c;
        tv += (c as f64 / n - prob).abs();
    }
    let emp_tail = (replicates - emp_listed) as f64 / n;
    tv += (emp_tail - exact_tail).abs();
    tv / 2.0
}

/// Pearson chi-square statistic with expected counts below `min_expected`
/// pooled into the tail bin. Returns (statistic, degrees of freedom).
pub fn chi_square_stat(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
) -> (f64, usize) {
    let mut stat = 0.0;
    let mut pooled_obs = 0.0;
    let mut pooled_exp = 0.0;
    let mut bins = 0usize;
    for (o, e) in observed.iter().zip(expected) {
        if *e < min_expected {
            pooled_obs += o;
            pooled_exp += e;
        } else {
            stat += (o - e) * (o - e) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        bins += 1;
    }
    (stat, bins.saturating_sub(1))
}

/// Upper critical value of the chi-square distribution.
pub fn chi_square_critical(df: usize, significance: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64)
        .expect("df >= 1")
        .inverse_cdf(1.0 - significance)
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub critical: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Goodness-of-fit test with low-expectation pooling at the stated
/// significance level.
pub fn chi_square_test(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
    significance: f64,
) -> ChiSquareTest {
    let (statistic, df) = chi_square_stat(observed, expected, min_expected);
    let df = df.max(1);
    let critical = chi_square_critical(df, significance);
    ChiSquareTest {
        statistic,
        df,
        critical,
        significance,
        pass: statistic <= critical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeRule;

    fn chain_poset(n: usize) -> Poset {
        let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Poset::build(n, &pairs).unwrap()
    }

    #[test]
    fn seeded_reproducibility() {
        let seed = SeedSpec::new(42);
        let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.5);
        let mut a = seed.stream(7);
        let mut b = seed.stream(7);
        let pa = sample_iid(&law, 50, &mut a);
        let pb = sample_iid(&law, 50, &mut b);
        assert_eq!(pa, pb);
        let mut c = seed.stream(8);
        assert_ne!(pa, sample_iid(&law, 50, &mut c));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.5);
        let seed = SeedSpec::new(3);
        let a = monte_carlo_law(&law, seed, 500, |s, rng| s.sample(rng));
        let b = monte_carlo_law_seq(&law, seed, 500, |s, rng| s.sample(rng));
        assert_eq!(a, b);
    }

    #[test]
    fn ladder_hand_trace_on_chain() {
        // chain values (3,1,4,1,5) -> ladder (3,4,5), indices (1,3,5)
        let poset = chain_poset(6);
        let probs = vec![1.0 / 6.0; 6];
        let dist = FiniteDist {
            poset,
            probs,
        };
        let path = SamplePath {
            kind: PathKind::Iid,
            nodes: vec![3usize, 1, 4, 1, 5],
            indices: Vec::new(),
        };
        let ladder = ladder_from_iid(&dist, &path, 3).unwrap();
        assert_eq!(ladder.nodes, vec![3, 4, 5]);
        assert_eq!(ladder.indices, vec![1, 3, 5]);
    }

    #[test]
    fn ladder_first_value_is_first_draw() {
        let poset = chain_poset(4);
        let dist = FiniteDist {
            poset,
            probs: vec![0.25; 4],
        };
        let path = SamplePath {
            kind: PathKind::Iid,
            nodes: vec![2usize, 0, 1],
            indices: Vec::new(),
        };
        let ladder = ladder_from_iid(&dist, &path, 1).unwrap();
        assert_eq!(ladder.nodes, vec![2]);
        assert_eq!(ladder.indices, vec![1]);
    }

    #[test]
    fn ladder_on_antichain_repeats_only_on_equality() {
        let poset = Poset::build(3, &[]).unwrap();
        let dist = FiniteDist {
            poset,
            probs: vec![1.0 / 3.0; 3],
        };
        let path = SamplePath {
            kind: PathKind::Iid,
            nodes: vec![1usize, 0, 1, 2, 1],
            indices: Vec::new(),
        };
        let ladder = ladder_from_iid(&dist, &path, 3).unwrap();
        assert_eq!(ladder.nodes, vec![1, 1, 1]);
        assert_eq!(ladder.indices, vec![1, 3, 5]);
    }

    #[test]
    fn exhausted_when_path_too_short() {
        let poset = chain_poset(3);
        let dist = FiniteDist {
            poset,
            probs: vec![1.0 / 3.0; 3],
        };
        let path = SamplePath {
            kind: PathKind::Iid,
            nodes: vec![2usize, 0, 0],
            indices: Vec::new(),
        };
        assert_eq!(ladder_from_iid(&dist, &path, 3).unwrap_err(), SimError::Exhausted);
    }

    #[test]
    fn partial_products_concatenate() {
        let d0 = TreePath::parse("0").unwrap();
        let d1 = TreePath::parse("1").unwrap();
        let z = partial_products(&[d0, d1]);
        assert_eq!(z.nodes[1].to_string(), "0.1");
    }

    #[test]
    fn partial_products_of_identity_stay_at_root() {
        let z = partial_products(&[TreePath::root(), TreePath::root()]);
        assert_eq!(z.nodes, vec![TreePath::root(), TreePath::root()]);
    }

    #[test]
    fn iid_mean_on_chain_geometric() {
        // geometric(1/2): E X = 1, check within 3σ at 1e5 draws
        let law = CrTreeLaw::new(TreeRule::kary(1), Splitter::Uniform, 0.5);
        let counts = monte_carlo_law(&law, SeedSpec::new(11), 100_000, |s, rng| s.sample(rng));
        let mean: f64 = counts
            .iter()
            .map(|(p, c)| p.depth() as f64 * *c as f64)
            .sum::<f64>()
            / 100_000.0;
        // Var X = (1-α)/α² = 2, σ of mean = sqrt(2/1e5)
        assert!((mean - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt());
    }

    #[test]
    fn iid_depth_survival_on_binary_tree() {
        let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.5);
        let counts = monte_carlo_law(&law, SeedSpec::new(12), 100_000, |s, rng| s.sample(rng));
        let p_ge1: f64 = counts
            .iter()
            .filter(|(p, _)| p.depth() >= 1)
            .map(|(_, c)| *c as f64)
            .sum::<f64>()
            / 100_000.0;
        let sigma = (0.5 * 0.5f64 / 1e5).sqrt();
        assert!((p_ge1 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn point_count_inverse_relation() {
        let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.4);
        let mut rng = SeedSpec::new(5).stream(0);
        let path = ladder_markov_sample(&law, 20, &mut rng);
        let elements: Vec<TreePath> = path.nodes.clone();
        let (_, ok) = point_counts(&law, &path, &elements);
        assert!(ok);
    }

    #[test]
    fn geometric_inversion_support() {
        let mut rng = SeedSpec::new(1).stream(0);
        for _ in 0..1000 {
            let m = geometric_by_inversion(0.5, &mut rng);
            assert!(m >= 1);
        }
    }
}

//! Named example posets and distributions used by the CLI and tests.

use crate::dist::{DistError, Pdf, Upf};
use crate::poset::{ElementId, Poset};
use crate::scalar::{Rational, Scalar};
use num_traits::{One, Zero};
use std::collections::BTreeSet;

pub fn chain(n: usize) -> Poset {
    let pairs: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Poset::build(n, &pairs).unwrap()
}

/// Chain truncated at depth n−1: top element marked as boundary, so laws
/// on ℕ can be represented with a tail.
pub fn chain_truncated(n: usize) -> Poset {
    let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Poset::build_with_boundary(n, &pairs, [n - 1].into_iter().collect()).unwrap()
}

pub fn antichain(n: usize) -> Poset {
    Poset::build(n, &[]).unwrap()
}

pub fn kary_tree(k: u32, depth: u32) -> Poset {
    crate::tree::TreeTrunc::materialize(crate::tree::TreeRule::kary(k), depth as usize)
        .unwrap()
        .poset
}

/// Subset lattice of {1..m}: element ids are bitmask order, covers add
/// one element.
pub fn boolean_lattice(m: usize) -> Poset {
    let n = 1usize << m;
    let mut pairs = Vec::new();
    for x in 0..n {
        for i in 0..m {
            if x & (1 << i) == 0 {
                pairs.push((x, x | (1 << i)));
            }
        }
    }
    Poset::build(n, &pairs).unwrap()
}

/// Finite subsets of {1..m} with at most `cap` elements, ordered by
/// inclusion; size-`cap` sets are boundary (their strict up-sets are cut).
/// Returns the poset and the subsets in id order (sorted by size, then
/// lexicographically).
pub fn subsets_poset(m: usize, cap: usize) -> (Poset, Vec<BTreeSet<usize>>) {
    let mut sets: Vec<BTreeSet<usize>> = Vec::new();
    let full = 1usize << m;
    for mask in 0..full {
        let s: BTreeSet<usize> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        if s.len() <= cap {
            sets.push(s);
        }
    }
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let index = |s: &BTreeSet<usize>| sets.iter().position(|t| t == s).unwrap();
    let mut pairs = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if s.len() == cap {
            continue;
        }
        for e in 1..=m {
            if !s.contains(&e) {
                let mut t = s.clone();
                t.insert(e);
                pairs.push((i, index(&t)));
            }
        }
    }
    let boundary: BTreeSet<ElementId> = sets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() == cap && cap < m)
        .map(|(i, _)| i)
        .collect();
    let poset = Poset::build_with_boundary(sets.len(), &pairs, boundary).unwrap();
    (poset, sets)
}

/// Semigroup product on the subsets poset: xy = x ∪ {x^c(i) : i ∈ y},
/// where x^c(i) is the i-th smallest element of the complement of x in
/// ℕ = {1, 2, ...}. Returns None when the product needs elements outside
/// the ground set or exceeds the size cap.
pub fn semigroup_product_subsets(
    x: &BTreeSet<usize>,
    y: &BTreeSet<usize>,
    m: usize,
) -> Option<BTreeSet<usize>> {
    let complement: Vec<usize> = (1..).filter(|e| !x.contains(e)).take(m).collect();
    let mut out = x.clone();
    for &i in y {
        let e = *complement.get(i - 1)?;
        if e > m {
            return None;
        }
        out.insert(e);
    }
    Some(out)
}

/// Two parallel copies of a truncated chain as one disconnected poset:
/// ids 0..depth are the first copy, depth..2·depth the second, boundary
/// at both tops.
pub fn parallel_chains(depth: usize) -> Poset {
    let mut pairs = Vec::new();
    for i in 0..depth - 1 {
        pairs.push((i, i + 1));
        pairs.push((depth + i, depth + i + 1));
    }
    let boundary: BTreeSet<ElementId> = [depth - 1, 2 * depth - 1].into_iter().collect();
    Poset::build_with_boundary(2 * depth, &pairs, boundary).unwrap()
}

/// Mass p of a geometric(α) on the first copy plus 1−p of a geometric(β)
/// on the second: rate is α on copy one and β on copy two, so the
/// mixture has constant rate only when α = β, even though every ladder
/// conditional stays uniform.
pub fn mixture_counterexample<T: Scalar>(
    p_weight: T,
    alpha: T,
    beta: T,
    depth: usize,
) -> (Poset, Pdf<T>) {
    let poset = parallel_chains(depth);
    let qa = T::one() - alpha.clone();
    let qb = T::one() - beta.clone();
    let mut probs = Vec::with_capacity(2 * depth);
    let cw = T::one() - p_weight.clone();
    for i in 0..depth {
        probs.push(p_weight.clone() * alpha.clone() * qa.clone().powu(i as u32));
    }
    for i in 0..depth {
        probs.push(cw.clone() * beta.clone() * qb.clone().powu(i as u32));
    }
    let tail_a = p_weight.clone() * qa.clone().powu(depth as u32);
    let tail_b = cw.clone() * qb.clone().powu(depth as u32);
    let mut upper_tail = vec![T::zero(); 2 * depth];
    for i in 0..depth {
        upper_tail[i] = tail_a.clone();
        upper_tail[depth + i] = tail_b.clone();
    }
    let pdf = Pdf::with_tail(probs, tail_a + tail_b, Some(upper_tail)).unwrap();
    (poset, pdf)
}

/// Witness pair for non-uniqueness: a lexicographic sum of antichains
/// over ℕ (a single root, then k-element levels), truncated at `depth`
/// levels, carrying two distinct pdfs with the same upper function.
pub struct NonuniquePair {
    pub poset: Poset,
    /// level and within-level index of each element
    pub labels: Vec<(u32, u32)>,
    pub k: u32,
    pub alpha: Rational,
    pub c: Rational,
    pub f: Pdf<Rational>,
    pub g: Pdf<Rational>,
}

/// Build the pair with k = 3: the base law f is level-geometric(α) and
/// uniform within levels, and g(n, x) = f(n, x) + (−1/(k−1))ⁿ c. The
/// perturbation telescopes over every up-set, so g has exactly the same
/// upper function, while c ≠ 0 keeps the pdfs distinct. The perturbation
/// size c is grid-searched over {1/4, 1/8, 1/16, ...} for the largest
/// dyadic value keeping g strictly positive at every level, including
/// the cut ones.
pub fn nonunique_pair(alpha: Rational, depth: u32) -> Result<NonuniquePair, DistError> {
    let k: u32 = 3;
    assert!(depth >= 2);
    let levels = depth as usize;
    let n = 1 + (levels - 1) * k as usize;
    // covers: root under all of level 1, every element of level i under
    // every element of level i+1
    let id = |lev: usize, j: usize| -> usize {
        if lev == 0 {
            0
        } else {
            1 + (lev - 1) * k as usize + j
        }
    };
    let mut pairs = Vec::new();
    for b in 0..k as usize {
        pairs.push((0, id(1, b)));
    }
    for lev in 1..levels - 1 {
        for a in 0..k as usize {
            for b in 0..k as usize {
                pairs.push((id(lev, a), id(lev + 1, b)));
            }
        }
    }
    let boundary: BTreeSet<ElementId> = (0..k as usize).map(|j| id(levels - 1, j)).collect();
    let poset = Poset::build_with_boundary(n, &pairs, boundary).unwrap();
    let mut labels = vec![(0u32, 0u32)];
    for lev in 1..levels {
        for j in 0..k {
            labels.push((lev as u32, j));
        }
    }

    let q = Rational::one() - alpha.clone();
    let k_rat = Rational::from_usize(k as usize);
    // f(0, e) = α; f(n, x) = α(1−α)^n / k for n ≥ 1
    let f_at = |lev: u32| -> Rational {
        if lev == 0 {
            alpha.clone()
        } else {
            alpha.clone() * q.clone().powu(lev) / k_rat.clone()
        }
    };
    let ratio = -Rational::one() / Rational::from_usize(k as usize - 1);
    // positivity must hold at the cut levels too: the base decays at 1−α
    // per level and the perturbation at 1/(k−1), so require domination of
    // the whole remaining envelope when 1−α < 1/(k−1), otherwise just
    // check the represented levels
    let positive = |c: &Rational| -> bool {
        let all_levels = (0..depth).all(|lev| {
            f_at(lev) - Scalar::abs(&(ratio.clone().powu(lev) * c.clone())) > Rational::zero()
        });
        if !all_levels {
            return false;
        }
        if q.clone() * Rational::from_usize(k as usize - 1) >= Rational::one() {
            true
        } else {
            let last = depth - 1;
            let env = Scalar::abs(&(ratio.clone().powu(last) * c.clone()))
                / (Rational::one() - Rational::from_ratio(1, (k - 1) as i64));
            f_at(last) > env
        }
    };
    let mut c = Rational::from_ratio(1, 4);
    while !positive(&c) {
        c = c / Rational::from_usize(2);
        if c < Rational::from_ratio(1, 1 << 20) {
            return Err(DistError::BadWeights);
        }
    }

    let mut fp = Vec::with_capacity(n);
    let mut gp = Vec::with_capacity(n);
    for &(lev, _) in &labels {
        fp.push(f_at(lev));
        gp.push(f_at(lev) + ratio.clone().powu(lev) * c.clone());
    }
    // every represented element lies below all cut levels, so the
    // unrepresented mass above any x is the whole tail. For f the tail is
    // geometric: (1−α)^depth. For g the cut perturbation sums to
    // Σ_{m ≥ depth} k·ratioᵐ·c = −ratio^{depth−1} c, which is exactly what
    // the telescope needs for the truncated upper functions to agree.
    let tail_f = q.clone().powu(depth);
    let pert_tail = Rational::zero() - ratio.clone().powu(depth - 1) * c.clone();
    let tail_g = tail_f.clone() + pert_tail;
    let f = Pdf::with_tail(fp, tail_f.clone(), Some(vec![tail_f; n]))?;
    let g = Pdf::with_tail(gp, tail_g.clone(), Some(vec![tail_g; n]))?;
    Ok(NonuniquePair {
        poset,
        labels,
        k,
        alpha,
        c,
        f,
        g,
    })
}

/// Geometric(α) pdf on a truncated chain, with exact tail.
pub fn geometric_on_chain<T: Scalar>(n: usize, alpha: T) -> (Poset, Pdf<T>, Upf<T>) {
    let poset = chain_truncated(n);
    let q = T::one() - alpha.clone();
    let probs: Vec<T> = (0..n).map(|i| alpha.clone() * q.clone().powu(i as u32)).collect();
    let tail = q.clone().powu(n as u32);
    let upper_tail = vec![tail.clone(); n];
    let pdf = Pdf::with_tail(probs, tail, Some(upper_tail)).unwrap();
    let upf = Upf {
        values: (0..n).map(|i| q.clone().powu(i as u32)).collect(),
    };
    (poset, pdf, upf)
}

pub const CATALOG_NAMES: &[(&str, &str)] = &[
    ("chain", "finite chain 0 < 1 < ... < n-1"),
    ("chain-trunc", "chain with boundary tail at the top"),
    ("antichain", "n incomparable elements"),
    ("kary-tree", "k-ary ordered tree truncated at depth d"),
    ("boolean", "subset lattice of {1..m}"),
    ("subsets", "subsets of {1..m} with at most c elements, boundary at the cap"),
    ("parallel-chains", "two disconnected truncated chains"),
    ("nonunique", "lexicographic sum of 3-antichains carrying two laws with one upper function"),
];

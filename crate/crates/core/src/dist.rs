//! Probability distributions on a poset: PDF/UPF conversions,
//! generalized UPFs, rate functions, constant-rate verification, moment
//! identities, and the mixture / product / lexicographic constructions.

use crate::incidence::cumulative;
use crate::poset::{ElementId, Poset, PosetError};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("probability at element {0} is not strictly positive")]
    NonPositivePdf(ElementId),
    #[error("probabilities plus tail mass do not sum to one (defect {0})")]
    NotNormalized(f64),
    #[error("poset is not a rooted tree")]
    NotATree,
    #[error("element {0} has too many children to enumerate subsets")]
    TooManyChildren(ElementId),
    #[error("upper probability values are inconsistent (negative recovered mass)")]
    InconsistentUpf,
    #[error("distribution does not have constant rate")]
    NotConstantRate,
    #[error("tail mass {0} too large for the requested identity check")]
    TailBoundTooLoose(f64),
    #[error("weights must be positive and sum to one")]
    BadWeights,
    #[error("distributions must share a poset of the same size")]
    SizeMismatch,
}

/// Probability table over poset elements. Support equals the represented
/// poset; a truncated law additionally carries the aggregate mass above
/// the truncation and, when available, the per-element decomposition
/// `upper_tail[x]` = P(X unrepresented, X ⪰ x).
#[derive(Debug, Clone, PartialEq)]
pub struct Pdf<T> {
    pub probs: Vec<T>,
    pub tail_mass: T,
    pub upper_tail: Option<Vec<T>>,
}

impl<T: Scalar> Pdf<T> {
    pub fn new(probs: Vec<T>, tail_mass: T) -> Result<Self, DistError> {
        Self::with_tail(probs, tail_mass, None)
    }

    pub fn exact_on_finite(probs: Vec<T>) -> Result<Self, DistError> {
        Self::new(probs, T::zero())
    }

    pub fn with_tail(
        probs: Vec<T>,
        tail_mass: T,
        upper_tail: Option<Vec<T>>,
    ) -> Result<Self, DistError> {
        for (x, p) in probs.iter().enumerate() {
            if *p <= T::zero() {
                return Err(DistError::NonPositivePdf(x));
            }
        }
        let total = probs
            .iter()
            .fold(tail_mass.clone(), |acc, p| acc + p.clone());
        let defect = Scalar::abs(&(total - T::one()));
        let ok = if T::EXACT {
            defect == T::zero()
        } else {
            defect.to_f64() <= 1e-12
        };
        if !ok {
            return Err(DistError::NotNormalized(defect.to_f64()));
        }
        Ok(Pdf {
            probs,
            tail_mass,
            upper_tail,
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Upper probability function F(x) = P(X ⪰ x).
#[derive(Debug, Clone, PartialEq)]
pub struct Upf<T> {
    pub values: Vec<T>,
}

/// Rate function r(x) = f(x) / F(x), valued in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RateFn<T> {
    pub values: Vec<T>,
}

/// F(x) = Σ_{t ⪰ x} f(t), the per-element tail supplying the
/// unrepresented part on truncations.
pub fn upf_from_pdf<T: Scalar>(p: &Poset, f: &Pdf<T>) -> Result<Upf<T>, DistError> {
    let n = p.n_elements();
    let mut values = Vec::with_capacity(n);
    for x in 0..n {
        let mut acc = T::zero();
        for t in 0..n {
            if p.leq(x, t) {
                acc = acc + f.probs[t].clone();
            }
        }
        match &f.upper_tail {
            Some(tail) => acc = acc + tail[x].clone(),
            None => {
                if p.is_truncated() && p.up_set_truncated(x) {
                    return Err(PosetError::TruncatedUpSet(x).into());
                }
            }
        }
        values.push(acc);
    }
    Ok(Upf { values })
}

/// On a rooted tree the UPF determines the PDF: f(x) = F(x) − Σ_{y ∈ A(x)} F(y).
///
/// For boundary nodes of a truncation the child sum is unrepresented and
/// must be supplied via `boundary_child_sum`.
pub fn pdf_from_upf_tree<T: Scalar>(
    p: &Poset,
    f_upper: &Upf<T>,
    boundary_child_sum: Option<&[T]>,
) -> Result<Pdf<T>, DistError> {
    if !p.classify().is_rooted_tree {
        return Err(DistError::NotATree);
    }
    let n = p.n_elements();
    let mut probs = Vec::with_capacity(n);
    for x in 0..n {
        let mut child_sum = T::zero();
        for &y in p.children(x) {
            child_sum = child_sum + f_upper.values[y].clone();
        }
        if p.boundary().contains(&x) {
            match boundary_child_sum {
                Some(b) => child_sum = child_sum + b[x].clone(),
                None => return Err(PosetError::TruncatedUpSet(x).into()),
            }
        }
        let fx = f_upper.values[x].clone() - child_sum;
        if fx <= T::zero() {
            return Err(DistError::NonPositivePdf(x));
        }
        probs.push(fx);
    }
    let total = probs.iter().fold(T::zero(), |acc, v| acc + v.clone());
    let tail = T::one() - total;
    let upper_tail: Vec<T> = (0..n)
        .map(|x| {
            let mut acc = f_upper.values[x].clone();
            for t in 0..n {
                if p.leq(x, t) {
                    acc = acc - probs[t].clone();
                }
            }
            acc
        })
        .collect();
    Pdf::with_tail(probs, tail, Some(upper_tail))
}

/// Generalized UPF F(A) = P(X ⪰ a for all a ∈ A), finite posets only.
pub fn generalized_upf<T: Scalar>(p: &Poset, f: &Pdf<T>, set: &[ElementId]) -> T {
    let n = p.n_elements();
    let mut acc = T::zero();
    for x in 0..n {
        if set.iter().all(|&a| p.leq(a, x)) {
            acc = acc + f.probs[x].clone();
        }
    }
    // On a truncation, the unrepresented mass above all of A is taken as
    // the minimum of the per-element tails. Exact for singletons, and for
    // posets where every unrepresented element dominates all of A (chains,
    // the level posets in the catalog); an upper bound otherwise.
    match &f.upper_tail {
        Some(tail) => {
            let extra = set
                .iter()
                .map(|&a| tail[a].clone())
                .min_by(|a, b| a.partial_cmp(b).unwrap());
            match extra {
                Some(e) => acc + e,
                None => acc,
            }
        }
        None => acc,
    }
}

/// Recover the PDF from a generalized UPF by inclusion–exclusion over
/// subsets of the children: f(x) = Σ_{B ⊆ A(x)} (−1)^{|B|} F({x} ∪ B).
pub fn pdf_from_generalized_upf<T: Scalar>(
    p: &Poset,
    f_gen: &dyn Fn(&[ElementId]) -> T,
) -> Result<Pdf<T>, DistError> {
    let n = p.n_elements();
    let mut probs = Vec::with_capacity(n);
    for x in 0..n {
        let kids = p.children(x);
        if kids.len() > 20 {
            return Err(DistError::TooManyChildren(x));
        }
        let mut acc = T::zero();
        for mask in 0u32..(1 << kids.len()) {
            let mut set = vec![x];
            for (i, &k) in kids.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    set.push(k);
                }
            }
            let term = f_gen(&set);
            if mask.count_ones() % 2 == 0 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        if acc <= T::zero() {
            return Err(DistError::InconsistentUpf);
        }
        probs.push(acc);
    }
    Pdf::exact_on_finite(probs)
}

pub fn rate<T: Scalar>(p: &Poset, f: &Pdf<T>) -> Result<RateFn<T>, DistError> {
    let upf = upf_from_pdf(p, f)?;
    let values = f
        .probs
        .iter()
        .zip(&upf.values)
        .map(|(fx, capfx)| fx.clone() / capfx.clone())
        .collect();
    Ok(RateFn { values })
}

/// Returns α when f = αF holds everywhere, with α read off at a minimal
/// element. Exact equality on the rational track; `tol` applies on the
/// float track only.
pub fn check_constant_rate<T: Scalar>(p: &Poset, f: &Pdf<T>, tol: f64) -> Option<T> {
    let upf = upf_from_pdf(p, f).ok()?;
    let x0 = *p.minimal_elements().first()?;
    let alpha = f.probs[x0].clone() / upf.values[x0].clone();
    for x in 0..p.n_elements() {
        let resid = Scalar::abs(&(f.probs[x].clone() - alpha.clone() * upf.values[x].clone()));
        let ok = if T::EXACT {
            resid == T::zero()
        } else {
            resid.to_f64() <= tol
        };
        if !ok {
            return None;
        }
    }
    Some(alpha)
}

/// One row of a verification report: a named check with both sides of the
/// identity and the absolute error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub n: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, n: Option<u32>, lhs: f64, rhs: f64) -> Self {
        CheckRow {
            check: check.into(),
            n,
            lhs,
            rhs,
            abs_err: (lhs - rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<CheckRow>,
    pub constant_rate_alpha: Option<f64>,
}

/// Verify Σ_x λ_n(x) F(x) = E[λ_{n+1}(X)] for n ≤ n_max on a finite
/// poset, and E[λ_n(X)] = α^{−n} when f has constant rate.
///
/// Truncated laws must go through the tree-specific moment routine with
/// a certified geometric tail; here any tail mass is an error.
pub fn moment_identities<T: Scalar>(
    p: &Poset,
    f: &Pdf<T>,
    n_max: usize,
) -> Result<MomentReport, DistError> {
    if f.tail_mass > T::zero() {
        return Err(DistError::TailBoundTooLoose(f.tail_mass.to_f64()));
    }
    let upf = upf_from_pdf(p, f)?;
    let tables = cumulative::<T>(p, n_max + 1);
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let lhs = (0..p.n_elements())
            .map(|x| tables[n][x].clone() * upf.values[x].clone())
            .fold(T::zero(), |acc, v| acc + v);
        let rhs = (0..p.n_elements())
            .map(|x| tables[n + 1][x].clone() * f.probs[x].clone())
            .fold(T::zero(), |acc, v| acc + v);
        rows.push(CheckRow::new(
            "sum_lambda_n_F_eq_E_lambda_n1",
            Some(n as u32),
            lhs.to_f64(),
            rhs.to_f64(),
        ));
    }
    let alpha = check_constant_rate(p, f, 1e-9);
    if let Some(a) = &alpha {
        for n in 0..=n_max {
            let e_lam = (0..p.n_elements())
                .map(|x| tables[n][x].clone() * f.probs[x].clone())
                .fold(T::zero(), |acc, v| acc + v);
            let inv = T::one() / a.clone().powu(n as u32);
            rows.push(CheckRow::new(
                "E_lambda_n_eq_alpha_pow_neg_n",
                Some(n as u32),
                e_lam.to_f64(),
                inv.to_f64(),
            ));
        }
    }
    Ok(MomentReport {
        rows,
        constant_rate_alpha: alpha.map(|a| a.to_f64()),
    })
}

/// Mixture of distributions on the same poset.
pub fn mixture<T: Scalar>(dists: &[Pdf<T>], weights: &[T]) -> Result<Pdf<T>, DistError> {
    if dists.is_empty() || dists.len() != weights.len() {
        return Err(DistError::BadWeights);
    }
    let wsum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
    let ok = if T::EXACT {
        wsum == T::one()
    } else {
        (wsum.to_f64() - 1.0).abs() <= 1e-12
    };
    if !ok || weights.iter().any(|w| *w <= T::zero()) {
        return Err(DistError::BadWeights);
    }
    let n = dists[0].len();
    if dists.iter().any(|d| d.len() != n) {
        return Err(DistError::SizeMismatch);
    }
    let probs = (0..n)
        .map(|x| {
            dists
                .iter()
                .zip(weights)
                .map(|(d, w)| d.probs[x].clone() * w.clone())
                .fold(T::zero(), |acc, v| acc + v)
        })
        .collect();
    let tail = dists
        .iter()
        .zip(weights)
        .map(|(d, w)| d.tail_mass.clone() * w.clone())
        .fold(T::zero(), |acc, v| acc + v);
    let upper_tail = if dists.iter().all(|d| d.upper_tail.is_some()) {
        Some(
            (0..n)
                .map(|x| {
                    dists
                        .iter()
                        .zip(weights)
                        .map(|(d, w)| d.upper_tail.as_ref().unwrap()[x].clone() * w.clone())
                        .fold(T::zero(), |acc, v| acc + v)
                })
                .collect(),
        )
    } else {
        None
    };
    Pdf::with_tail(probs, tail, upper_tail)
}

/// Product poset of two finite posets; element (x, y) has id x·n_b + y.
pub fn product_poset(a: &Poset, b: &Poset) -> Poset {
    let na = a.n_elements();
    let nb = b.n_elements();
    let mut pairs = Vec::new();
    for x in 0..na {
        for y in 0..nb {
            let id = x * nb + y;
            for &x2 in a.children(x) {
                pairs.push((id, x2 * nb + y));
            }
            for &y2 in b.children(y) {
                pairs.push((id, x * nb + y2));
            }
        }
    }
    Poset::build(na * nb, &pairs).expect("product of valid covering DAGs is valid")
}

/// Law of (X, Y) for independent X, Y on the product poset.
pub fn product_dist<T: Scalar>(
    a: &Poset,
    f: &Pdf<T>,
    b: &Poset,
    g: &Pdf<T>,
) -> Result<(Poset, Pdf<T>), DistError> {
    let prod = product_poset(a, b);
    let nb = b.n_elements();
    let mut probs = vec![T::zero(); prod.n_elements()];
    for x in 0..a.n_elements() {
        for y in 0..nb {
            probs[x * nb + y] = f.probs[x].clone() * g.probs[y].clone();
        }
    }
    let pdf = Pdf::exact_on_finite(probs)?;
    Ok((prod, pdf))
}

/// Lexicographic product: (x, y) ⪯ (x', y') iff x ≺ x', or x = x' and
/// y ⪯ y'. The second factor gets the uniform distribution.
pub fn lex_product<T: Scalar>(
    a: &Poset,
    f: &Pdf<T>,
    b: &Poset,
) -> Result<(Poset, Pdf<T>), DistError> {
    let na = a.n_elements();
    let nb = b.n_elements();
    let b_max = b.maximal_elements();
    let b_min = b.minimal_elements();
    let mut pairs = Vec::new();
    for x in 0..na {
        for y in 0..nb {
            let id = x * nb + y;
            for &y2 in b.children(y) {
                pairs.push((id, x * nb + y2));
            }
        }
        for &x2 in a.children(x) {
            for &ym in &b_max {
                for &yn in &b_min {
                    pairs.push((x * nb + ym, x2 * nb + yn));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let poset = Poset::build(na * nb, &pairs)?;
    let m = T::from_usize(nb);
    let mut probs = vec![T::zero(); na * nb];
    for x in 0..na {
        for y in 0..nb {
            probs[x * nb + y] = f.probs[x].clone() / m.clone();
        }
    }
    // tail of the first factor spreads uniformly over the second
    let tail = f.tail_mass.clone();
    let upper_tail = f.upper_tail.as_ref().map(|ft| {
        let mut out = vec![T::zero(); na * nb];
        for x in 0..na {
            for y in 0..nb {
                // unrepresented mass sits strictly above in the first
                // coordinate, hence above every (x, y)
                out[x * nb + y] = ft[x].clone();
            }
        }
        out
    });
    let pdf = Pdf::with_tail(probs, tail, upper_tail)?;
    Ok((poset, pdf))
}

//! Incidence-algebra computations on a poset: Möbius function, lower and
//! upper operators, Möbius inversion, cumulative functions λ_n and their
//! generating function.

use crate::poset::{ElementId, Poset, PosetError};
use crate::scalar::{Rational, Scalar};
use num_traits::One;
use std::collections::HashMap;
use std::sync::RwLock;

/// Memoized Möbius function of a poset, computed from the defining
/// recursion m(x,x) = 1, m(x,y) = −Σ_{x ⪯ t ≺ y} m(x,t).
pub struct Mobius<'a> {
    poset: &'a Poset,
    cache: RwLock<HashMap<(ElementId, ElementId), Rational>>,
}

impl<'a> Mobius<'a> {
    pub fn new(poset: &'a Poset) -> Self {
        Mobius {
            poset,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, x: ElementId, y: ElementId) -> Result<Rational, PosetError> {
        if !self.poset.leq(x, y) {
            return Err(PosetError::NotComparable(x, y));
        }
        Ok(self.get_known(x, y))
    }

    fn get_known(&self, x: ElementId, y: ElementId) -> Rational {
        if x == y {
            return Rational::one();
        }
        if let Some(v) = self.cache.read().unwrap().get(&(x, y)) {
            return v.clone();
        }
        // interval [x, y], iterate in topological order to fill the cache
        // bottom-up without recursion depth concerns
        let interval: Vec<ElementId> = self
            .poset
            .topo_order()
            .iter()
            .copied()
            .filter(|&t| self.poset.leq(x, t) && self.poset.leq(t, y))
            .collect();
        let mut local: HashMap<ElementId, Rational> = HashMap::new();
        for &t in &interval {
            let v = if t == x {
                Rational::one()
            } else {
                let mut sum = Rational::from_integer(0.into());
                for &s in &interval {
                    if s != t && self.poset.leq(s, t) {
                        sum += local[&s].clone();
                    }
                }
                -sum
            };
            local.insert(t, v);
        }
        let out = local[&y].clone();
        let mut cache = self.cache.write().unwrap();
        for (t, v) in local {
            cache.insert((x, t), v);
        }
        out
    }
}

/// (Lf)(x) = Σ_{t ⪯ x} f(t)
pub fn lower_op<T: Scalar>(p: &Poset, f: &[T]) -> Vec<T> {
    let n = p.n_elements();
    (0..n)
        .map(|x| {
            let mut acc = T::zero();
            for t in 0..n {
                if p.leq(t, x) {
                    acc = acc + f[t].clone();
                }
            }
            acc
        })
        .collect()
}

/// (Uf)(x) = Σ_{t ⪰ x} f(t), plus per-element tail mass on truncations.
///
/// On a truncated poset the represented up-set is incomplete wherever it
/// meets the boundary, so tail data must be supplied explicitly.
pub fn upper_op<T: Scalar>(p: &Poset, f: &[T], tail: Option<&[T]>) -> Result<Vec<T>, PosetError> {
    let n = p.n_elements();
    let mut out = Vec::with_capacity(n);
    for x in 0..n {
        if tail.is_none() && p.is_truncated() && p.up_set_truncated(x) {
            return Err(PosetError::TruncatedUpSet(x));
        }
        let mut acc = T::zero();
        for t in 0..n {
            if p.leq(x, t) {
                acc = acc + f[t].clone();
            }
        }
        if let Some(tail) = tail {
            acc = acc + tail[x].clone();
        }
        out.push(acc);
    }
    Ok(out)
}

/// Inverse of the lower operator: f(x) = Σ_{t ⪯ x} g(t) m(t, x).
pub fn mobius_invert_lower<T: Scalar>(p: &Poset, g: &[T]) -> Vec<T> {
    let mob = Mobius::new(p);
    let n = p.n_elements();
    (0..n)
        .map(|x| {
            let mut acc = T::zero();
            for t in 0..n {
                if p.leq(t, x) {
                    let m = mob.get_known(t, x);
                    acc = acc + g[t].clone() * T::from_rational(&m);
                }
            }
            acc
        })
        .collect()
}

/// Tables λ_0 .. λ_n, with λ_0 ≡ 1 and λ_{k+1} = L λ_k.
pub fn cumulative<T: Scalar>(p: &Poset, n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(vec![T::one(); p.n_elements()]);
    for _ in 0..n {
        let next = lower_op(p, out.last().unwrap());
        out.push(next);
    }
    out
}

#[derive(Debug, Clone)]
pub struct GfValue<T> {
    /// Σ_{k ≤ n_max} λ_k(x) t^k
    pub partial_sum: T,
    /// Closed-form value when the poset is a chain or a rooted tree:
    /// Λ(x, t) = 1 / (1 − t)^{d(x) + 1}.
    pub closed_form: Option<T>,
    pub n_max: usize,
}

/// Generating function Λ(x, t) = Σ_n λ_n(x) t^n, |t| < 1.
pub fn cumulative_gf<T: Scalar>(
    p: &Poset,
    x: ElementId,
    t: &T,
    n_max: usize,
) -> Result<GfValue<T>, PosetError> {
    if Scalar::abs(t) >= T::one() {
        return Err(PosetError::GfDiverges);
    }
    let tables = cumulative::<T>(p, n_max);
    let mut partial = T::zero();
    let mut tp = T::one();
    for table in tables.iter() {
        partial = partial + table[x].clone() * tp.clone();
        tp = tp * t.clone();
    }
    let closed_form = if p.classify().is_rooted_tree {
        // on a tree d(x) = |D[x]| − 1
        let d = p.down_set(x).len() as u32 - 1;
        let denom = (T::one() - t.clone()).powu(d + 1);
        Some(T::one() / denom)
    } else {
        None
    };
    Ok(GfValue {
        partial_sum: partial,
        closed_form,
        n_max,
    })
}

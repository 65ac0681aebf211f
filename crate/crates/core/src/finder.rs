//! Search for constant-rate distributions: exact feasibility on finite
//! posets, truncations with boundary slack, the Poisson necessary
//! condition on the subsets poset, and the universality embedding.

use crate::dist::CheckRow;
use crate::par::par_map_indexed;
use crate::poset::{ElementId, Poset};
use crate::scalar::Scalar;
use crate::simplex::{solve_feasibility, LpStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinderError {
    #[error("epsilon {0} is too large: positivity floor alone exceeds total mass")]
    EpsilonTooLarge(f64),
    #[error("marginal truncation too severe: represented mass {0} below tolerance")]
    TruncationTooSevere(f64),
    #[error("alpha must lie in (0, 1]")]
    BadAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasStatus {
    Feasible,
    Infeasible,
    ResidualOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub alpha: f64,
    pub status: FeasStatus,
    /// witness pdf over represented elements (probabilities only)
    pub witness: Option<Vec<f64>>,
    /// boundary slack masses of the witness, aligned with `boundary_ids`
    pub slack: Option<Vec<f64>>,
    pub boundary_ids: Vec<ElementId>,
    /// max constraint violation of the witness
    pub residual: f64,
    /// phase-1 infeasibility measure when infeasible
    pub infeasibility: f64,
    pub note: String,
}

/// The linear system for constant rate α on a (possibly truncated)
/// poset: variables f(x) ≥ ε for represented x and slack m(b) ≥ 0 for
/// boundary b; constraints
///   f(x) = α (Σ_{y ⪰ x, represented} f(y) + m(x)),
/// plus Σ f + tail = 1, where on a tree m(x) is the exact disjoint sum of
/// boundary slacks above x, and on general posets each truncated element
/// carries its own slack bounded by the union-bound relaxation.
pub struct FeasibilityProblem<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub n_elements: usize,
    pub boundary: Vec<ElementId>,
    pub epsilon: T,
    pub alpha: T,
}

impl<T: Scalar> FeasibilityProblem<T> {
    /// `level_marginals`: optional (elements, target mass) equality
    /// constraints added to the system (used by the subsets search).
    pub fn build(
        poset: &Poset,
        alpha: T,
        epsilon: T,
        level_marginals: &[(Vec<ElementId>, T)],
    ) -> Result<Self, FinderError> {
        if alpha <= T::zero() || alpha > T::one() {
            return Err(FinderError::BadAlpha);
        }
        let n = poset.n_elements();
        let is_tree = poset.classify().is_rooted_tree;
        let boundary: Vec<ElementId> = poset.boundary().iter().copied().collect();
        let nb = boundary.len();

        let floor_total = epsilon.clone() * T::from_usize(n);
        if floor_total >= T::one() {
            return Err(FinderError::EpsilonTooLarge(epsilon.to_f64()));
        }

        // variables: u(x) = f(x) − ε for x in 0..n, then m(b) for boundary,
        // then on non-tree posets union-bound slacks s(x) for truncated
        // interior x
        let truncated_interior: Vec<ElementId> = if is_tree || nb == 0 {
            Vec::new()
        } else {
            (0..n)
                .filter(|&x| poset.up_set_truncated(x) && !poset.boundary().contains(&x))
                .collect()
        };
        let n_m: usize = if is_tree {
            nb
        } else {
            nb + truncated_interior.len()
        };
        // m-variable column for element x, if any
        let m_col = |x: ElementId| -> Option<usize> {
            if let Some(i) = boundary.iter().position(|&b| b == x) {
                return Some(n + i);
            }
            truncated_interior
                .iter()
                .position(|&t| t == x)
                .map(|i| n + nb + i)
        };
        let n_vars = n + n_m;

        let mut a: Vec<Vec<T>> = Vec::new();
        let mut b: Vec<T> = Vec::new();

        // rate equations
        for x in 0..n {
            let mut row = vec![T::zero(); n_vars];
            let mut eps_coeff = T::zero(); // coefficient of ε on the LHS
            row[x] = row[x].clone() + T::one();
            eps_coeff = eps_coeff + T::one();
            for y in 0..n {
                if poset.leq(x, y) {
                    row[y] = row[y].clone() - alpha.clone();
                    eps_coeff = eps_coeff - alpha.clone();
                }
            }
            // tail mass above x
            if is_tree {
                // disjoint boundary up-sets: m(x) = Σ_{b ⪰ x, b boundary} m(b)
                for (i, &bd) in boundary.iter().enumerate() {
                    if poset.leq(x, bd) {
                        row[n + i] = row[n + i].clone() - alpha.clone();
                    }
                }
            } else if let Some(col) = m_col(x) {
                row[col] = row[col].clone() - alpha.clone();
            }
            a.push(row);
            b.push(T::zero() - eps_coeff * epsilon.clone());
        }

        // union-bound relaxation on general posets: m(x) ≤ Σ_{y ∈ A(x)} m(y)
        // for truncated interior x, via a nonnegative surplus variable
        // folded into the same column space (surplus reuses the structural
        // simplex slack by writing Σ m(y) − m(x) ≥ 0 as an extra equation
        // with its own slack appended below)
        let mut surplus_rows: Vec<Vec<T>> = Vec::new();
        for &x in &truncated_interior {
            let mut row = vec![T::zero(); n_vars];
            if let Some(cx) = m_col(x) {
                row[cx] = row[cx].clone() - T::one();
            }
            let mut any_child = false;
            for &y in poset.children(x) {
                if let Some(cy) = m_col(y) {
                    row[cy] = row[cy].clone() + T::one();
                    any_child = true;
                }
            }
            if any_child {
                surplus_rows.push(row);
            }
            // no truncated children at all: m(x) unconstrained from above
            // would make the relaxation vacuous; leave it free
        }

        // normalization: Σ f + total tail = 1. On a tree the total tail is
        // the slack above the minimum; in general sum all boundary slacks
        // reachable from the minimum (or all of them if no minimum).
        {
            let mut row = vec![T::zero(); n_vars];
            for cell in row.iter_mut().take(n) {
                *cell = T::one();
            }
            match poset.minimum() {
                Some(root) if is_tree => {
                    for (i, &bd) in boundary.iter().enumerate() {
                        if poset.leq(root, bd) {
                            row[n + i] = T::one();
                        }
                    }
                }
                Some(root) => {
                    if let Some(col) = m_col(root) {
                        row[col] = T::one();
                    }
                }
                None => {
                    for i in 0..nb {
                        row[n + i] = T::one();
                    }
                }
            }
            a.push(row);
            b.push(T::one() - floor_total);
        }

        for (elements, target) in level_marginals {
            let mut row = vec![T::zero(); n_vars];
            let mut shift = T::zero();
            for &x in elements {
                row[x] = T::one();
                shift = shift + epsilon.clone();
            }
            a.push(row);
            b.push(target.clone() - shift);
        }

        // append surplus slack columns for the inequality rows
        if !surplus_rows.is_empty() {
            let extra = surplus_rows.len();
            for row in a.iter_mut() {
                row.extend(std::iter::repeat(T::zero()).take(extra));
            }
            for (k, mut row) in surplus_rows.into_iter().enumerate() {
                row.extend((0..extra).map(|j| if j == k { -T::one() } else { T::zero() }));
                a.push(row);
                b.push(T::zero());
            }
        }

        Ok(FeasibilityProblem {
            a,
            b,
            n_elements: n,
            boundary,
            epsilon,
            alpha,
        })
    }

    pub fn solve(&self, poset: &Poset, note: impl Into<String>) -> FeasibilityReport {
        let lp = solve_feasibility(&self.a, &self.b);
        match lp.status {
            LpStatus::Infeasible => FeasibilityReport {
                alpha: self.alpha.to_f64(),
                status: FeasStatus::Infeasible,
                witness: None,
                slack: None,
                boundary_ids: self.boundary.clone(),
                residual: f64::INFINITY,
                infeasibility: lp.artificial_mass.to_f64(),
                note: note.into(),
            },
            LpStatus::Feasible => {
                let n = self.n_elements;
                let f: Vec<T> = (0..n)
                    .map(|x| lp.solution[x].clone() + self.epsilon.clone())
                    .collect();
                let slack: Vec<f64> = (0..self.boundary.len())
                    .map(|i| lp.solution[n + i].to_f64())
                    .collect();
                let residual = self.witness_residual(poset, &f, &lp.solution);
                FeasibilityReport {
                    alpha: self.alpha.to_f64(),
                    status: FeasStatus::Feasible,
                    witness: Some(f.iter().map(|v| v.to_f64()).collect()),
                    slack: Some(slack),
                    boundary_ids: self.boundary.clone(),
                    residual,
                    infeasibility: 0.0,
                    note: note.into(),
                }
            }
        }
    }

    fn witness_residual(&self, poset: &Poset, f: &[T], raw: &[T]) -> f64 {
        let n = self.n_elements;
        let is_tree = poset.classify().is_rooted_tree;
        let mut worst: f64 = 0.0;
        for x in 0..n {
            let mut upsum = T::zero();
            for y in 0..n {
                if poset.leq(x, y) {
                    upsum = upsum + f[y].clone();
                }
            }
            if is_tree {
                for (i, &bd) in self.boundary.iter().enumerate() {
                    if poset.leq(x, bd) {
                        upsum = upsum + raw[n + i].clone();
                    }
                }
            } else if let Some(i) = self.boundary.iter().position(|&b| b == x) {
                upsum = upsum + raw[n + i].clone();
            }
            let lhs = f[x].clone();
            let rhs = self.alpha.clone() * upsum;
            worst = worst.max(Scalar::abs(&(lhs - rhs)).to_f64());
        }
        worst
    }
}

/// Decide constant-rate feasibility at rate α on a finite, untruncated
/// poset.
pub fn constant_rate_feasible_finite<T: Scalar>(
    poset: &Poset,
    alpha: T,
    epsilon: T,
) -> Result<FeasibilityReport, FinderError> {
    let problem = FeasibilityProblem::build(poset, alpha, epsilon, &[])?;
    Ok(problem.solve(poset, "finite exact feasibility"))
}

/// Feasibility on a truncation: feasible means a constant-rate law may
/// extend the truncation (a necessary-condition search), infeasible rules
/// out any extension satisfying the (relaxed, on non-trees) constraints.
pub fn constant_rate_feasible_truncated<T: Scalar>(
    poset: &Poset,
    alpha: T,
    epsilon: T,
) -> Result<FeasibilityReport, FinderError> {
    let problem = FeasibilityProblem::build(poset, alpha, epsilon, &[])?;
    Ok(problem.solve(poset, "truncated feasibility with boundary slack"))
}

/// Solve every α in the grid; cells run in parallel, output order is the
/// grid order.
pub fn alpha_grid_search(
    poset: &Poset,
    alphas: &[f64],
    epsilon: f64,
) -> Vec<Result<FeasibilityReport, FinderError>> {
    par_map_indexed(alphas.len(), |i| {
        constant_rate_feasible_truncated(poset, alphas[i], epsilon)
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoissonCheckReport {
    pub alpha: f64,
    pub rows: Vec<CheckRow>,
    pub max_residual: f64,
}

/// Residuals of the three equivalent necessary conditions on U = #(X)
/// for a constant-rate law on the subsets poset:
///   (a) α P(U=k) = E[(−1)^{U+k} C(U,k)]
///   (b) P(U=n) = α E[C(U,n)]
///   (c) G(t−n) = αⁿ G(t) at sample points t
/// `marginal[k]` = P(U = k) for k = 0..=K.
pub fn subsets_poisson_check(
    marginal: &[f64],
    alpha: f64,
) -> Result<PoissonCheckReport, FinderError> {
    let mass: f64 = marginal.iter().sum();
    if mass < 1.0 - 1e-9 {
        return Err(FinderError::TruncationTooSevere(mass));
    }
    let k_max = marginal.len() - 1;
    let binom = |n: usize, k: usize| crate::scalar::binomial(n as u64, k as u64).to_f64();
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let lhs = alpha * marginal[k];
        let rhs: f64 = (0..=k_max)
            .map(|j| {
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                sign * binom(j, k) * marginal[j]
            })
            .sum();
        rows.push(CheckRow::new("alternating_binomial", Some(k as u32), lhs, rhs));
    }
    for n in 0..=k_max {
        let lhs = marginal[n];
        let rhs: f64 = alpha
            * (0..=k_max)
                .map(|j| binom(j, n) * marginal[j])
                .sum::<f64>();
        rows.push(CheckRow::new("binomial_moment", Some(n as u32), lhs, rhs));
    }
    let pgf = |t: f64| -> f64 {
        marginal
            .iter()
            .enumerate()
            .map(|(j, p)| p * t.powi(j as i32))
            .sum()
    };
    for n in 1..=2u32 {
        for (i, t) in [0.25f64, 0.5, 0.75].iter().enumerate() {
            let lhs = pgf(t - n as f64);
            let rhs = alpha.powi(n as i32) * pgf(*t);
            rows.push(CheckRow::new(
                format!("pgf_shift_t{}", i),
                Some(n),
                lhs,
                rhs,
            ));
        }
    }
    let max_residual = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    Ok(PoissonCheckReport {
        alpha,
        rows,
        max_residual,
    })
}

/// Poisson(μ) pmf table for k = 0..=K.
pub fn poisson_marginal(mu: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut p = (-mu).exp();
    for k in 0..=k_max {
        out.push(p);
        p *= mu / (k as f64 + 1.0);
    }
    out
}

/// Feasibility evidence for the subsets-poset open question at a finite
/// truncation: ground set {1..M}, subsets of size ≤ m_cap, with the
/// Poisson(−ln α) marginal imposed on #(x) as a necessary condition.
/// Evidence only: feasibility at a truncation does not resolve existence.
pub fn search_subsets_poset(
    alpha: f64,
    m: usize,
    m_cap: usize,
) -> Result<FeasibilityReport, FinderError> {
    if !(0.0..=1.0).contains(&alpha) || alpha == 0.0 {
        return Err(FinderError::BadAlpha);
    }
    let (poset, sets) = crate::catalog::subsets_poset(m, m_cap);
    if alpha == 1.0 {
        // constant rate 1 requires an antichain
        let problem = FeasibilityProblem::build(&poset, 1.0f64, 1e-9, &[])?;
        return Ok(problem.solve(&poset, "subsets truncation, alpha = 1"));
    }
    let mu = -alpha.ln();
    let pois = poisson_marginal(mu, m_cap);
    // impose level marginals only below the cap: the top level is cut both
    // by size and by the ground set
    let mut marginals = Vec::new();
    for (size, pk) in pois.iter().enumerate().take(m_cap) {
        let elements: Vec<ElementId> = sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() == size)
            .map(|(i, _)| i)
            .collect();
        if !elements.is_empty() {
            marginals.push((elements, *pk));
        }
    }
    let problem = FeasibilityProblem::build(&poset, alpha, 1e-9, &marginals)?;
    Ok(problem.solve(
        &poset,
        format!(
            "subsets truncation M={m} cap={m_cap}: evidence only, does not resolve the open question"
        ),
    ))
}

/// Universality embedding x ↦ D[x] into the subsets poset; returns the
/// image family (labels 1..N) and whether the order isomorphism check
/// passed.
pub fn universality_embed(poset: &Poset) -> (Vec<BTreeSet<usize>>, bool) {
    let n = poset.n_elements();
    let family: Vec<BTreeSet<usize>> = (0..n)
        .map(|x| poset.down_set(x).into_iter().map(|t| t + 1).collect())
        .collect();
    let mut iso = true;
    for x in 0..n {
        for y in 0..n {
            if poset.leq(x, y) != family[x].is_subset(&family[y]) {
                iso = false;
            }
        }
    }
    (family, iso)
}

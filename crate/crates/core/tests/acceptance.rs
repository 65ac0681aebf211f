//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use crdist::dist::{check_constant_rate, upf_from_pdf, Pdf};
use crdist::incidence::{cumulative, lower_op, mobius_invert_lower, upper_op};
use crdist::ladder::{
    equivalence_diagnostic, ladder_exact_pdfs, thin_exact_tree, uniformity_diagnostic,
};
use crdist::scalar::{binomial, Scalar};
use crdist::sim::{
    geometric_by_inversion, monte_carlo_law, thin_simulate_one, total_variation, CrTreeLaw,
    SampleSpace, SeedSpec,
};
use crdist::tree::{
    constant_rate_pdf, constant_rate_tree_moments, depth_distribution, percolation_upf,
    validate_upf_tree, Splitter, TreePath, TreeRule, TreeTrunc,
};
use crdist::{catalog, finder, Poset, Rational};
use num_traits::{One, Zero};

fn rat(p: i64, q: i64) -> Rational {
    Rational::from_ratio(p, q)
}

struct Criterion {
    name: &'static str,
    pass: bool,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, pass: true }
    }
    fn check(&mut self, ok: bool, what: &str) {
        if !ok {
            eprintln!("  [{}] subcheck failed: {what}", self.name);
            self.pass = false;
        }
    }
    fn finish(self) {
        println!(
            "criterion {}: {}",
            self.name,
            if self.pass { "pass" } else { "FAIL" }
        );
        assert!(self.pass, "criterion {} failed", self.name);
    }
}

fn catalog_posets() -> Vec<(&'static str, Poset)> {
    vec![
        ("chain", catalog::chain(8)),
        ("chain-trunc", catalog::chain_truncated(8)),
        ("antichain", catalog::antichain(6)),
        ("kary", catalog::kary_tree(2, 4)),
        ("boolean", catalog::boolean_lattice(3)),
        ("subsets", catalog::subsets_poset(5, 2).0),
        ("parallel", catalog::parallel_chains(6)),
        ("nonunique", {
            catalog::nonunique_pair(rat(1, 2), 6).unwrap().poset
        }),
    ]
}

fn pseudo_rationals(n: usize, salt: i64) -> Vec<Rational> {
    (0..n as i64)
        .map(|i| rat((i * 7 + salt) % 23 + 1, 97))
        .collect()
}

#[test]
fn criterion_01_exact_identities() {
    let mut c = Criterion::new("1 exact identity suite");
    for (name, p) in catalog_posets() {
        let n = p.n_elements();
        c.check(n <= 500, name);
        // Möbius inversion roundtrip: invert ∘ L = identity
        let f = pseudo_rationals(n, 3);
        let lf = lower_op(&p, &f);
        let back = mobius_invert_lower(&p, &lf);
        c.check(back == f, &format!("{name}: mobius inversion roundtrip"));
        // duality Σ (Lf) g = Σ f (Ug) on the represented finite matrix
        let g = pseudo_rationals(n, 11);
        let zeros = vec![Rational::zero(); n];
        let ug = upper_op(&p, &g, Some(&zeros)).unwrap();
        let lhs: Rational = lf
            .iter()
            .zip(&g)
            .map(|(a, b)| a.clone() * b.clone())
            .fold(Rational::zero(), |acc, v| acc + v);
        let rhs: Rational = f
            .iter()
            .zip(&ug)
            .map(|(a, b)| a.clone() * b.clone())
            .fold(Rational::zero(), |acc, v| acc + v);
        c.check(lhs == rhs, &format!("{name}: duality"));
    }
    // λ_n closed forms, n ≤ 6
    let chain = catalog::chain(10);
    let lam = cumulative::<Rational>(&chain, 6);
    for n in 0..=6u64 {
        for x in 0..10u64 {
            c.check(
                lam[n as usize][x as usize] == binomial(n + x, x),
                "chain lambda closed form",
            );
        }
    }
    c.check(lam[2][3] == rat(10, 1), "lambda_2(3) = 10");
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 4).unwrap();
    let lam_t = cumulative::<Rational>(&tree.poset, 6);
    for n in 0..=6u64 {
        for x in 0..tree.n_nodes() {
            let d = tree.depths[x] as u64;
            c.check(
                lam_t[n as usize][x] == binomial(n + d, n),
                "tree lambda closed form",
            );
        }
    }
    let (subsets, sets) = catalog::subsets_poset(5, 3);
    let lam_s = cumulative::<Rational>(&subsets, 6);
    for n in 0..=6u64 {
        for (x, s) in sets.iter().enumerate() {
            let expect = Rational::from_u64(n + 1).powu(s.len() as u32);
            c.check(lam_s[n as usize][x] == expect, "subsets lambda closed form");
        }
    }
    let x13 = sets
        .iter()
        .position(|s| s.len() == 2 && s.contains(&1) && s.contains(&3))
        .unwrap();
    c.check(lam_s[2][x13] == rat(9, 1), "lambda_2({1,3}) = 9");
    c.finish();
}

#[test]
fn criterion_02_tree_construction() {
    let mut c = Criterion::new("2 constant-rate tree construction");
    for k in [1u32, 2, 3] {
        for (an, ad) in [(3i64, 10i64), (1, 2), (7, 10)] {
            let alpha = rat(an, ad);
            let tree = TreeTrunc::materialize(TreeRule::kary(k), 6).unwrap();
            let (upf, pdf) = constant_rate_pdf(&tree, &alpha, &Splitter::Uniform).unwrap();
            let got = check_constant_rate(&tree.poset, &pdf, 0.0);
            c.check(got == Some(alpha.clone()), "alpha recovered exactly");
            // P(d(X) ≥ n) = (1−α)^n
            let surv = depth_distribution(&tree, &upf);
            for (n, s) in surv.iter().enumerate() {
                c.check(
                    *s == (Rational::one() - alpha.clone()).powu(n as u32),
                    "geometric depth survival",
                );
            }
            // uniform-split closed form
            let base = (Rational::one() - alpha.clone()) / Rational::from_u64(k as u64);
            for x in 0..tree.n_nodes() {
                c.check(
                    upf.values[x] == base.clone().powu(tree.depths[x] as u32),
                    "uniform split closed form",
                );
            }
        }
    }
    c.finish();
}

/// Independent oracle: iterate the defining ladder kernel
/// f_{k+1}(z) = Σ_{y ⪯ z} f_k(y) f(z)/F(y), starting from f_1 = f.
fn ladder_oracle(p: &Poset, f: &Pdf<Rational>, n: usize) -> Vec<Vec<Rational>> {
    let upf = upf_from_pdf(p, f).unwrap();
    let m = p.n_elements();
    let mut tables = vec![f.probs.clone()];
    for _ in 1..n {
        let prev = tables.last().unwrap();
        let next: Vec<Rational> = (0..m)
            .map(|z| {
                (0..m)
                    .filter(|&y| p.leq(y, z))
                    .map(|y| prev[y].clone() * f.probs[z].clone() / upf.values[y].clone())
                    .fold(Rational::zero(), |acc, v| acc + v)
            })
            .collect();
        tables.push(next);
    }
    tables
}

#[test]
fn criterion_03_ladder_exactness() {
    let mut c = Criterion::new("3 ladder exactness");
    // small posets with constant-rate laws, ≤ 12 elements
    let (chain, geo, _) = catalog::geometric_on_chain::<Rational>(8, rat(1, 2));
    let tree7 = TreeTrunc::materialize(TreeRule::kary(2), 2).unwrap();
    let (_, tree_pdf) = constant_rate_pdf(&tree7, &rat(2, 5), &Splitter::Uniform).unwrap();
    for (p, f) in [(&chain, &geo), (&tree7.poset, &tree_pdf)] {
        assert!(p.n_elements() <= 12);
        let closed = ladder_exact_pdfs(p, f, 3).unwrap();
        let oracle = ladder_oracle(p, f, 3);
        for n in 0..3 {
            c.check(closed[n] == oracle[n], "closed form vs kernel iteration");
        }
    }
    // conditional of Y_1 given Y_2 = y exactly uniform on D[y]
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 4).unwrap();
    let (_, pdf) = constant_rate_pdf(&tree, &rat(1, 2), &Splitter::Uniform).unwrap();
    let unif = uniformity_diagnostic(&tree.poset, &pdf).unwrap();
    c.check(unif.max_deviation == 0.0, "ladder conditional uniform");
    c.finish();
}

#[test]
fn criterion_04_thinning() {
    let mut c = Criterion::new("4 thinning");
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 4).unwrap();
    let half = rat(1, 2);
    let (new_alpha, exact_pdf, _) =
        thin_exact_tree::<Rational>(&tree, &half, &Splitter::Uniform, &half).unwrap();
    c.check(new_alpha == rat(1, 3), "thinned rate 1/3 exact");
    let cr = check_constant_rate(&tree.poset, &exact_pdf, 0.0);
    c.check(cr == Some(rat(1, 3)), "thinned law constant rate");

    // Monte Carlo: first accepted ladder point, p = 1/2
    let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.5);
    let replicates = 100_000;
    let counts = monte_carlo_law(&law, SeedSpec::new(4_040_404), replicates, |s, rng| {
        thin_simulate_one(s, 0.5, rng)
    });
    let exact: Vec<(TreePath, f64)> = tree
        .paths
        .iter()
        .cloned()
        .zip(exact_pdf.probs.iter().map(|v| v.to_f64()))
        .collect();
    let tv = total_variation(&counts, replicates, &exact, exact_pdf.tail_mass.to_f64());
    c.check(tv <= 0.01, &format!("thinning Monte Carlo TV = {tv:.4}"));
    c.finish();
}

#[test]
fn criterion_05_exponential_equivalence() {
    let mut c = Criterion::new("5 exponential equivalence");
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 4).unwrap();
    let (_, unif_pdf) = constant_rate_pdf(&tree, &rat(1, 2), &Splitter::Uniform).unwrap();
    let eq = equivalence_diagnostic(&tree, &unif_pdf).unwrap();
    c.check(
        eq.max_discrepancy == 0.0,
        "uniform split: kernels agree exactly",
    );
    // 70/30 split must alternate by depth to stay non-multiplicative; a
    // constant per-index 70/30 weighting is still exponential
    let alt = Splitter::DepthAlternating {
        weights: vec![(7, 10), (3, 10)],
    };
    let (_, alt_pdf) = constant_rate_pdf(&tree, &rat(1, 2), &alt).unwrap();
    let cr = check_constant_rate(&tree.poset, &alt_pdf, 0.0);
    c.check(cr == Some(rat(1, 2)), "70/30 law still constant rate");
    let eq2 = equivalence_diagnostic(&tree, &alt_pdf).unwrap();
    c.check(
        eq2.max_discrepancy > 1e-3,
        &format!("70/30 split gap = {:.3e}", eq2.max_discrepancy),
    );
    c.finish();
}

#[test]
fn criterion_06_nonuniqueness() {
    let mut c = Criterion::new("6 non-uniqueness");
    let pair = catalog::nonunique_pair(rat(1, 2), 6).unwrap();
    let uf = upf_from_pdf(&pair.poset, &pair.f).unwrap();
    let ug = upf_from_pdf(&pair.poset, &pair.g).unwrap();
    c.check(uf.values == ug.values, "identical UPFs exactly");
    c.check(pair.f.probs != pair.g.probs, "distinct PDFs");
    c.check(
        pair.g.probs.iter().all(|v| *v > Rational::zero()),
        "g strictly positive",
    );
    let set = vec![1usize, 2];
    let gf = crdist::dist::generalized_upf(&pair.poset, &pair.f, &set);
    let gg = crdist::dist::generalized_upf(&pair.poset, &pair.g, &set);
    c.check(gf != gg, "generalized UPFs differ on a 2-element set");
    c.finish();
}

#[test]
fn criterion_07_finder_soundness() {
    let mut c = Criterion::new("7 finder soundness");
    let eps = rat(1, 1_000_000_000);
    for a in 1..=9 {
        let rep = finder::constant_rate_feasible_finite(&catalog::chain(5), rat(a, 10), eps.clone())
            .unwrap();
        c.check(
            rep.status == finder::FeasStatus::Infeasible,
            "5-chain infeasible",
        );
    }
    let anti = catalog::antichain(4);
    let at_one = finder::constant_rate_feasible_finite(&anti, rat(1, 1), rat(1, 100)).unwrap();
    c.check(
        at_one.status == finder::FeasStatus::Feasible,
        "antichain feasible at 1",
    );
    for a in 1..=9 {
        let rep = finder::constant_rate_feasible_finite(&anti, rat(a, 10), eps.clone()).unwrap();
        c.check(
            rep.status == finder::FeasStatus::Infeasible,
            "antichain infeasible below 1",
        );
    }
    // truncated binary tree depth 5, α = 1/2: feasible; compare the
    // witness against the closed-form constant-rate pdf
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 5).unwrap();
    let rep =
        finder::constant_rate_feasible_truncated(&tree.poset, rat(1, 2), eps.clone()).unwrap();
    c.check(rep.status == finder::FeasStatus::Feasible, "tree feasible");
    c.check(
        rep.residual <= 1e-6,
        &format!("witness residual = {:.3e}", rep.residual),
    );
    let witness = rep.witness.unwrap();
    // any feasible witness satisfies the same linear identities the
    // closed form does; check a structural consequence: total mass on
    // level n is α(1−α)^n up to the LP residual
    let (_, closed) = constant_rate_pdf(&tree, &rat(1, 2), &Splitter::Uniform).unwrap();
    for n in 0..=5usize {
        let lvl: f64 = tree
            .level(n)
            .iter()
            .map(|&x| witness[x])
            .sum();
        let expect: f64 = tree
            .level(n)
            .iter()
            .map(|&x| closed.probs[x].to_f64())
            .sum();
        c.check(
            (lvl - expect).abs() <= 1e-6,
            &format!("level {n} mass {lvl} vs closed {expect}"),
        );
    }
    // grid agreement with the analytic rule on finite posets ≤ 8
    // elements: constant rate exists iff the poset is an antichain and
    // α = 1 (finite posets always have maximal elements)
    let smalls: Vec<(&str, Poset)> = vec![
        ("chain3", catalog::chain(3)),
        ("chain8", catalog::chain(8)),
        ("antichain3", catalog::antichain(3)),
        ("antichain8", catalog::antichain(8)),
        ("boolean3", catalog::boolean_lattice(3)),
        // depth-2 binary tree with genuine leaves (no truncation boundary)
        (
            "tree-d2",
            Poset::build(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap(),
        ),
        ("vee", Poset::build(3, &[(0, 1), (0, 2)]).unwrap()),
        ("diamond", Poset::build(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()),
    ];
    for (name, p) in smalls {
        assert!(p.n_elements() <= 8);
        let is_antichain = p.classify().is_antichain;
        for a in [1, 3, 5, 7, 9, 10] {
            let alpha = rat(a, 10);
            let rep =
                finder::constant_rate_feasible_finite(&p, alpha.clone(), eps.clone()).unwrap();
            let analytic = is_antichain && alpha == Rational::one();
            c.check(
                (rep.status == finder::FeasStatus::Feasible) == analytic,
                &format!("{name} at α={a}/10: grid agreement"),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_08_poisson_necessary_conditions() {
    let mut c = Criterion::new("8 Poisson necessary condition");
    for alpha in [0.3f64, 0.5, 0.8] {
        let marg = finder::poisson_marginal(-alpha.ln(), 40);
        let rep = finder::subsets_poisson_check(&marg, alpha).unwrap();
        c.check(
            rep.max_residual < 1e-10,
            &format!("poisson residual {:.3e} at α={alpha}", rep.max_residual),
        );
    }
    let geo: Vec<f64> = (0..=40).map(|j| 0.5 * 0.5f64.powi(j)).collect();
    let rep = finder::subsets_poisson_check(&geo, 0.5).unwrap();
    c.check(
        rep.max_residual > 1e-3,
        &format!("geometric residual {:.3e}", rep.max_residual),
    );
    c.finish();
}

#[test]
fn criterion_09_percolation() {
    let mut c = Criterion::new("9 percolation");
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 4).unwrap();
    let alpha = rat(1, 2);
    let upf = crdist::tree::construct_constant_rate_upf(&tree, &alpha, &Splitter::Uniform).unwrap();
    for (pn, pd, pf) in [(1i64, 2i64, 0.5f64), (9, 10, 0.9)] {
        let p = rat(pn, pd);
        let perc = percolation_upf(&tree, &upf, &p).unwrap();
        // structural validity: root 1, strict child-sum inequality, decay
        let new_rate = Rational::one() - p.clone() * (Rational::one() - alpha.clone());
        let report = validate_upf_tree(&tree, &perc, Some(&new_rate)).unwrap();
        c.check(report.decay_established, "percolated UPF decay certified");
        // simulation: truncate X at an independent geometric depth M with
        // P(M ≥ n) = p^n, so P(X' ⪰ x) = p^d(x) F(x)
        let law = CrTreeLaw::new(TreeRule::kary(2), Splitter::Uniform, 0.5);
        let replicates = 100_000;
        let counts = monte_carlo_law(&law, SeedSpec::new(9_090_909), replicates, |s, rng| {
            let x = s.sample(rng);
            // geometric_by_inversion(q) returns 1 + floor(ln U / ln(1-q));
            // with q = 1 - p this gives P(M ≥ n) = p^n for M = value - 1
            let m = geometric_by_inversion(1.0 - pf, rng) - 1;
            TreePath(x.0[..m.min(x.0.len())].to_vec())
        });
        // exact pdf of the percolated law on the truncation
        let exact_f: Vec<f64> = (0..tree.n_nodes())
            .map(|x| {
                let children_sum: f64 = tree
                    .poset
                    .children(x)
                    .iter()
                    .map(|&y| perc.values[y].to_f64())
                    .sum();
                if tree.poset.boundary().contains(&x) {
                    // boundary pdf mass = F_p − (unrepresented children),
                    // computed from the constant-rate recursion
                    let f_val = perc.values[x].to_f64();
                    let below = (1.0 - new_rate.to_f64()) * f_val;
                    f_val - below
                } else {
                    perc.values[x].to_f64() - children_sum
                }
            })
            .collect();
        let exact: Vec<(TreePath, f64)> = tree.paths.iter().cloned().zip(exact_f.iter().copied()).collect();
        let tail = 1.0 - exact_f.iter().sum::<f64>();
        let tv = total_variation(&counts, replicates, &exact, tail);
        c.check(tv <= 0.01, &format!("percolation TV = {tv:.4} at p={pf}"));
    }
    c.finish();
}

#[test]
fn criterion_10_moment_identities() {
    let mut c = Criterion::new("10 moment identities");
    for alpha in [0.3f64, 0.5, 0.7] {
        let report = constant_rate_tree_moments(alpha, 3, 1e-9).unwrap();
        for row in &report.rows {
            if row.check == "certified_tail_bound" {
                c.check(row.lhs <= 1e-9, "tail bound certified");
            } else {
                let rel = row.abs_err / row.rhs.abs().max(1.0);
                c.check(
                    rel <= 1e-9,
                    &format!("E[λ_n] vs α^-n at α={alpha}: rel err {rel:.3e}"),
                );
            }
        }
    }
    c.finish();
}

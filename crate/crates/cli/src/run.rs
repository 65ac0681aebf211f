//! Subcommand implementations.

use crate::dist_io::{self, DistFile, InputError};
use crate::{CatalogAction, Cli, Command};
use crdist::dist::{self, CheckRow, Pdf};
use crdist::incidence;
use crdist::ladder;
use crdist::poset::PosetFile;
use crdist::scalar::{format_rational, Scalar};
use crdist::sim::{self, SeedSpec};
use crdist::tree::{PathTable, Splitter, TreeRule, TreeTrunc};
use crdist::{finder, Poset, Rational};
use serde_json::json;
use std::path::{Path, PathBuf};

const EXIT_OK: i32 = 0;
const EXIT_CHECK: i32 = 1;
const EXIT_INPUT: i32 = 2;

pub fn run(cli: Cli) -> i32 {
    if cli.threads > 0 {
        // best effort: ignored if a pool is already installed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("CRDIST_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail_input(&format!("cannot create output dir: {e}"));
    }
    match dispatch(&cli, &out_dir) {
        Ok(code) => code,
        Err(e) => fail_input(&e.0),
    }
}

fn fail_input(msg: &str) -> i32 {
    eprintln!("{}", json!({ "error": msg, "kind": "input" }));
    EXIT_INPUT
}

fn fail_check(msg: &str) -> i32 {
    eprintln!("{}", json!({ "error": msg, "kind": "check" }));
    EXIT_CHECK
}

fn dispatch(cli: &Cli, out: &Path) -> Result<i32, InputError> {
    match &cli.command {
        Command::Mobius { poset } => cmd_mobius(poset, out),
        Command::Cumulative { poset, n, track } => {
            cmd_cumulative(poset, *n, track.is_float(), out)
        }
        Command::Upf { dist, track } => cmd_upf(dist, track.is_float(), out),
        Command::Rate { dist, track } => cmd_rate(dist, track.is_float(), cli.tol, out),
        Command::ConstructTree {
            k,
            depth,
            alpha,
            splitter,
            track,
        } => cmd_construct_tree(*k, *depth, alpha, splitter, track.is_float(), out),
        Command::Percolate {
            k,
            depth,
            alpha,
            p,
            splitter,
            track,
        } => cmd_percolate(*k, *depth, alpha, p, splitter, track.is_float(), out),
        Command::Ladder {
            k,
            depth,
            alpha,
            splitter,
            n,
            replicates,
            seed,
        } => cmd_ladder(*k, *depth, alpha, splitter, *n, *replicates, *seed, out),
        Command::Thin {
            tree,
            depth,
            alpha,
            p,
            splitter,
            track,
        } => cmd_thin(tree, *depth, alpha, p, splitter, track.is_float(), out),
        Command::Products {
            k,
            depth,
            alpha,
            splitter,
            n,
            replicates,
            seed,
        } => cmd_products(*k, *depth, alpha, splitter, *n, *replicates, *seed, out),
        Command::Find {
            poset,
            alpha_grid,
            epsilon,
            track,
        } => cmd_find(poset, alpha_grid, *epsilon, !track.is_float(), out),
        Command::PoissonCheck {
            alpha,
            marginal,
            k_max,
        } => cmd_poisson_check(*alpha, marginal, *k_max, cli.tol, out),
        Command::Verify { suite } => cmd_verify(suite, out),
        Command::Catalog { action } => cmd_catalog(action, out),
    }
}

fn build_tree(k: u32, depth: usize) -> Result<TreeTrunc, InputError> {
    TreeTrunc::materialize(TreeRule::kary(k), depth)
        .map_err(|e| InputError(format!("tree build failed: {e}")))
}

fn cmd_mobius(spec: &str, out: &Path) -> Result<i32, InputError> {
    let poset = dist_io::resolve_poset(spec)?;
    let mobius = incidence::Mobius::new(&poset);
    let n = poset.n_elements();
    let mut entries = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if poset.leq(x, y) {
                let v = mobius
                    .get(x, y)
                    .map_err(|e| InputError(format!("mobius failed: {e}")))?;
                entries.push((x, y, format_rational(&v)));
            }
        }
    }
    let mut w = csv::Writer::from_path(out.join("mobius.csv"))
        .map_err(|e| InputError(format!("csv: {e}")))?;
    w.write_record(["x", "y", "value"]).ok();
    for (x, y, v) in &entries {
        w.write_record([x.to_string(), y.to_string(), v.clone()]).ok();
    }
    w.flush().ok();
    dist_io::write_json(
        &out.join("mobius.json"),
        &json!({
            "n": n,
            "entries": entries.iter().map(|(x, y, v)| json!({"x": x, "y": y, "value": v})).collect::<Vec<_>>(),
        }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_cumulative(spec: &str, n_max: usize, float: bool, out: &Path) -> Result<i32, InputError> {
    let poset = dist_io::resolve_poset(spec)?;
    let tables_json: Vec<Vec<serde_json::Value>> = if float {
        incidence::cumulative::<f64>(&poset, n_max)
            .into_iter()
            .map(|t| t.into_iter().map(|v| json!(v)).collect())
            .collect()
    } else {
        incidence::cumulative::<Rational>(&poset, n_max)
            .into_iter()
            .map(|t| t.into_iter().map(|v| json!(format_rational(&v))).collect())
            .collect()
    };
    let mut w = csv::Writer::from_path(out.join("cumulative.csv"))
        .map_err(|e| InputError(format!("csv: {e}")))?;
    w.write_record(["n", "element", "value"]).ok();
    for (n, table) in tables_json.iter().enumerate() {
        for (x, v) in table.iter().enumerate() {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            w.write_record([n.to_string(), x.to_string(), s]).ok();
        }
    }
    w.flush().ok();
    dist_io::write_json(
        &out.join("cumulative.json"),
        &json!({ "n_max": n_max, "tables": tables_json }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_upf(dist_path: &Path, float: bool, out: &Path) -> Result<i32, InputError> {
    let file = DistFile::load(dist_path)?;
    let poset = file.poset(dist_path)?;
    let values: Vec<serde_json::Value> = if float {
        let pdf: Pdf<f64> = file.pdf(&poset)?;
        let upf = dist::upf_from_pdf(&poset, &pdf)
            .map_err(|e| InputError(format!("upf failed: {e}")))?;
        upf.values.into_iter().map(|v| json!(v)).collect()
    } else {
        let pdf: Pdf<Rational> = file.pdf(&poset)?;
        let upf = dist::upf_from_pdf(&poset, &pdf)
            .map_err(|e| InputError(format!("upf failed: {e}")))?;
        upf.values
            .into_iter()
            .map(|v| json!(format_rational(&v)))
            .collect()
    };
    dist_io::write_json(&out.join("upf.json"), &json!({ "values": values }))?;
    Ok(EXIT_OK)
}

fn cmd_rate(dist_path: &Path, float: bool, tol: f64, out: &Path) -> Result<i32, InputError> {
    let file = DistFile::load(dist_path)?;
    let poset = file.poset(dist_path)?;
    let (values, alpha): (Vec<serde_json::Value>, Option<String>) = if float {
        let pdf: Pdf<f64> = file.pdf(&poset)?;
        let r = dist::rate(&poset, &pdf).map_err(|e| InputError(format!("rate failed: {e}")))?;
        let a = dist::check_constant_rate(&poset, &pdf, tol);
        (
            r.values.into_iter().map(|v| json!(v)).collect(),
            a.map(|a| a.to_string()),
        )
    } else {
        let pdf: Pdf<Rational> = file.pdf(&poset)?;
        let r = dist::rate(&poset, &pdf).map_err(|e| InputError(format!("rate failed: {e}")))?;
        let a = dist::check_constant_rate(&poset, &pdf, tol);
        (
            r.values
                .into_iter()
                .map(|v| json!(format_rational(&v)))
                .collect(),
            a.map(|a| format_rational(&a)),
        )
    };
    dist_io::write_json(
        &out.join("rate.json"),
        &json!({ "values": values, "constant_rate_alpha": alpha }),
    )?;
    Ok(EXIT_OK)
}

fn cmd_construct_tree(
    k: u32,
    depth: usize,
    alpha: &str,
    splitter: &str,
    float: bool,
    out: &Path,
) -> Result<i32, InputError> {
    let tree = build_tree(k, depth)?;
    let splitter = dist_io::parse_splitter(splitter)?;
    let alpha_r = dist_io::parse_alpha(alpha)?;
    let report = if float {
        construct_tree_track::<f64>(&tree, f64::from_rational(&alpha_r), &splitter, out)?
    } else {
        construct_tree_track::<Rational>(&tree, alpha_r, &splitter, out)?
    };
    dist_io::write_json(&out.join("construct-tree.json"), &report)?;
    Ok(EXIT_OK)
}

fn construct_tree_track<T: Scalar>(
    tree: &TreeTrunc,
    alpha: T,
    splitter: &Splitter,
    _out: &Path,
) -> Result<serde_json::Value, InputError> {
    let (upf, pdf) = crdist::tree::constant_rate_pdf(tree, &alpha, splitter)
        .map_err(|e| InputError(format!("construction failed: {e}")))?;
    let validation = crdist::tree::validate_upf_tree(tree, &upf, Some(&alpha))
        .map_err(|e| InputError(format!("validation failed: {e}")))?;
    let table = path_table(tree, &upf.values);
    let pdf_table = path_table(tree, &pdf.probs);
    Ok(json!({
        "alpha": alpha.to_f64(),
        "depth": tree.depth,
        "n_nodes": tree.n_nodes(),
        "upf": table.values,
        "pdf": pdf_table.values,
        "tail_mass": pdf.tail_mass.to_f64(),
        "validation": validation,
    }))
}

fn path_table<T: Scalar>(tree: &TreeTrunc, values: &[T]) -> PathTable {
    if T::EXACT {
        // values are rationals; format exactly
        let vals = tree
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let r = values[i].clone();
                // exact track: to_f64 would lose precision; round-trip via
                // the rational formatter
                (
                    p.to_string(),
                    json!(format_rational(&rational_of(&r))),
                )
            })
            .collect();
        PathTable { values: vals }
    } else {
        let vals = tree
            .paths
            .iter()
            .enumerate()
            .map(|(i, p)| (p.to_string(), json!(values[i].to_f64())))
            .collect();
        PathTable { values: vals }
    }
}

/// Recover the Rational behind an exact-track scalar. Only called when
/// T::EXACT, where from_rational/to-rational is the identity.
fn rational_of<T: Scalar>(v: &T) -> Rational {
    // the Scalar trait has no downcast; reconstruct through the f64 value
    // is lossy, so go through the Debug formatting of Ratio instead.
    // Simpler: Scalar provides from_rational but not to_rational, so use
    // the fact that the only EXACT impl is Rational itself.
    use std::any::Any;
    let any: &dyn Any = v;
    any.downcast_ref::<Rational>()
        .cloned()
        .expect("EXACT scalar is Rational")
}

#[allow(clippy::too_many_arguments)]
fn cmd_percolate(
    k: u32,
    depth: usize,
    alpha: &str,
    p: &str,
    splitter: &str,
    float: bool,
    out: &Path,
) -> Result<i32, InputError> {
    let tree = build_tree(k, depth)?;
    let splitter = dist_io::parse_splitter(splitter)?;
    let alpha_r = dist_io::parse_alpha(alpha)?;
    let p_r = dist_io::parse_alpha(p)?;
    let report = if float {
        percolate_track::<f64>(
            &tree,
            f64::from_rational(&alpha_r),
            f64::from_rational(&p_r),
            &splitter,
        )?
    } else {
        percolate_track::<Rational>(&tree, alpha_r, p_r, &splitter)?
    };
    dist_io::write_json(&out.join("percolate.json"), &report)?;
    Ok(EXIT_OK)
}

fn percolate_track<T: Scalar>(
    tree: &TreeTrunc,
    alpha: T,
    p: T,
    splitter: &Splitter,
) -> Result<serde_json::Value, InputError> {
    let upf = crdist::tree::construct_constant_rate_upf(tree, &alpha, splitter)
        .map_err(|e| InputError(format!("construction failed: {e}")))?;
    let perc = crdist::tree::percolation_upf(tree, &upf, &p)
        .map_err(|e| InputError(format!("percolation failed: {e}")))?;
    let new_alpha = T::one() - p.clone() * (T::one() - alpha.clone());
    let validation = crdist::tree::validate_upf_tree(tree, &perc, Some(&new_alpha))
        .map_err(|e| InputError(format!("percolated UPF invalid: {e}")))?;
    Ok(json!({
        "alpha": alpha.to_f64(),
        "p": p.to_f64(),
        "new_rate": new_alpha.to_f64(),
        "upf": path_table(tree, &perc.values).values,
        "validation": validation,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_ladder(
    k: u32,
    depth: usize,
    alpha: &str,
    splitter: &str,
    n: usize,
    replicates: usize,
    seed: u64,
    out: &Path,
) -> Result<i32, InputError> {
    let tree = build_tree(k, depth)?;
    let splitter = dist_io::parse_splitter(splitter)?;
    let alpha_r = dist_io::parse_alpha(alpha)?;
    let alpha_f = f64::from_rational(&alpha_r);
    let (_, pdf) = crdist::tree::constant_rate_pdf::<f64>(&tree, &alpha_f, &splitter)
        .map_err(|e| InputError(format!("construction failed: {e}")))?;
    let marginals = ladder::ladder_exact_pdfs(&tree.poset, &pdf, n)
        .map_err(|e| InputError(format!("ladder marginals failed: {e}")))?;
    let equivalence = ladder::equivalence_diagnostic(&tree, &pdf)
        .map_err(|e| InputError(format!("equivalence diagnostic failed: {e}")))?;
    let uniformity = ladder::uniformity_diagnostic(&tree.poset, &pdf)
        .map_err(|e| InputError(format!("uniformity diagnostic failed: {e}")))?;

    let mut report = json!({
        "alpha": alpha_f,
        "n": n,
        "marginals": marginals
            .iter()
            .map(|t| path_table(&tree, t).values)
            .collect::<Vec<_>>(),
        "equivalence": equivalence,
        "uniformity": uniformity,
    });

    let mut code = EXIT_OK;
    if replicates > 0 {
        let law = sim::CrTreeLaw::new(TreeRule::kary(k), splitter.clone(), alpha_f);
        let counts = sim::monte_carlo_law(&law, SeedSpec::new(seed), replicates, |s, rng| {
            sim::ladder_markov_sample(s, n, rng).nodes.pop().unwrap()
        });
        let exact: Vec<(crdist::tree::TreePath, f64)> = tree
            .paths
            .iter()
            .cloned()
            .zip(marginals[n - 1].iter().copied())
            .collect();
        let exact_tail: f64 = 1.0 - marginals[n - 1].iter().sum::<f64>();
        let tv = sim::total_variation(&counts, replicates, &exact, exact_tail);
        let observed: Vec<f64> = tree
            .paths
            .iter()
            .map(|p| *counts.get(p).unwrap_or(&0) as f64)
            .collect();
        let obs_tail = replicates as f64 - observed.iter().sum::<f64>();
        let mut obs = observed.clone();
        obs.push(obs_tail);
        let mut expd: Vec<f64> = marginals[n - 1]
            .iter()
            .map(|p| p * replicates as f64)
            .collect();
        expd.push(exact_tail * replicates as f64);
        let test = sim::chi_square_test(&obs, &expd, 5.0, 0.01);
        let mut w = csv::Writer::from_path(out.join("ladder.csv"))
            .map_err(|e| InputError(format!("csv: {e}")))?;
        w.write_record(["path", "empirical", "exact", "abs_err"]).ok();
        for (i, p) in tree.paths.iter().enumerate() {
            let emp = observed[i] / replicates as f64;
            w.write_record([
                p.to_string(),
                format!("{emp:.10}"),
                format!("{:.10}", marginals[n - 1][i]),
                format!("{:.10}", (emp - marginals[n - 1][i]).abs()),
            ])
            .ok();
        }
        w.flush().ok();
        if !test.pass {
            code = EXIT_CHECK;
        }
        report["monte_carlo"] = json!({
            "replicates": replicates,
            "seed": seed,
            "total_variation": tv,
            "chi_square": test,
        });
    }
    dist_io::write_json(&out.join("ladder.json"), &report)?;
    if code == EXIT_CHECK {
        return Ok(fail_check("ladder Monte Carlo chi-square check failed"));
    }
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_thin(
    tree_spec: &str,
    depth: usize,
    alpha: &str,
    p: &str,
    splitter: &str,
    float: bool,
    out: &Path,
) -> Result<i32, InputError> {
    let k: u32 = match tree_spec.split_once(':') {
        Some(("kary", k)) => k
            .parse()
            .map_err(|_| InputError(format!("bad tree spec {tree_spec:?}")))?,
        _ => return Err(InputError(format!("unknown tree spec {tree_spec:?}"))),
    };
    let tree = build_tree(k, depth)?;
    let splitter = dist_io::parse_splitter(splitter)?;
    let alpha_r = dist_io::parse_alpha(alpha)?;
    let p_r = dist_io::parse_alpha(p)?;
    let report = if float {
        let (na, pdf, upf) = ladder::thin_exact_tree::<f64>(
            &tree,
            &f64::from_rational(&alpha_r),
            &splitter,
            &f64::from_rational(&p_r),
        )
        .map_err(|e| InputError(format!("thinning failed: {e}")))?;
        json!({
            "alpha": f64::from_rational(&alpha_r),
            "p": f64::from_rational(&p_r),
            "new_rate": na,
            "pdf": path_table(&tree, &pdf.probs).values,
            "upf": path_table(&tree, &upf.values).values,
            "tail_mass": pdf.tail_mass,
        })
    } else {
        let (na, pdf, upf) =
            ladder::thin_exact_tree::<Rational>(&tree, &alpha_r, &splitter, &p_r)
                .map_err(|e| InputError(format!("thinning failed: {e}")))?;
        json!({
            "alpha": format_rational(&alpha_r),
            "p": format_rational(&p_r),
            "new_rate": format_rational(&na),
            "pdf": path_table(&tree, &pdf.probs).values,
            "upf": path_table(&tree, &upf.values).values,
            "tail_mass": format_rational(&pdf.tail_mass),
        })
    };
    dist_io::write_json(&out.join("thin.json"), &report)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_products(
    k: u32,
    depth: usize,
    alpha: &str,
    splitter: &str,
    n: usize,
    replicates: usize,
    seed: u64,
    out: &Path,
) -> Result<i32, InputError> {
    let tree = build_tree(k, depth)?;
    let splitter = dist_io::parse_splitter(splitter)?;
    let alpha_f = f64::from_rational(&dist_io::parse_alpha(alpha)?);
    let (_, pdf) = crdist::tree::constant_rate_pdf::<f64>(&tree, &alpha_f, &splitter)
        .map_err(|e| InputError(format!("construction failed: {e}")))?;
    let equivalence = ladder::equivalence_diagnostic(&tree, &pdf)
        .map_err(|e| InputError(format!("equivalence diagnostic failed: {e}")))?;
    let mut report = json!({
        "alpha": alpha_f,
        "n": n,
        "equivalence": equivalence,
        "exponential": equivalence.max_discrepancy <= 1e-9,
    });
    if replicates > 0 {
        // empirical law of Z_n = X_1 ··· X_n vs the ladder chain Y_n
        let law = sim::CrTreeLaw::new(TreeRule::kary(k), splitter.clone(), alpha_f);
        let seeds = SeedSpec::new(seed);
        let prod_counts = sim::monte_carlo_law(&law, seeds, replicates, |s, rng| {
            let draws = sim::sample_iid(s, n, rng).nodes;
            sim::partial_products(&draws).nodes.pop().unwrap()
        });
        let ladder_counts =
            sim::monte_carlo_law(&law, SeedSpec::new(seed ^ 0x5555_5555), replicates, |s, rng| {
                sim::ladder_markov_sample(s, n, rng).nodes.pop().unwrap()
            });
        let exact_pts: Vec<(crdist::tree::TreePath, f64)> = {
            let marg = ladder::ladder_exact_pdfs(&tree.poset, &pdf, n)
                .map_err(|e| InputError(format!("ladder marginals failed: {e}")))?;
            tree.paths
                .iter()
                .cloned()
                .zip(marg[n - 1].iter().copied())
                .collect()
        };
        let exact_tail = 1.0 - exact_pts.iter().map(|(_, p)| p).sum::<f64>();
        let tv_prod = sim::total_variation(&prod_counts, replicates, &exact_pts, exact_tail);
        let tv_ladder = sim::total_variation(&ladder_counts, replicates, &exact_pts, exact_tail);
        report["monte_carlo"] = json!({
            "replicates": replicates,
            "seed": seed,
            "tv_products_vs_ladder_exact": tv_prod,
            "tv_ladder_vs_ladder_exact": tv_ladder,
        });
    }
    dist_io::write_json(&out.join("products.json"), &report)?;
    Ok(EXIT_OK)
}

fn cmd_find(
    spec: &str,
    grid: &str,
    epsilon: f64,
    exact: bool,
    out: &Path,
) -> Result<i32, InputError> {
    let poset = dist_io::resolve_poset(spec)?;
    let alphas = dist_io::parse_grid(grid)?;
    let reports: Vec<finder::FeasibilityReport> = if exact && poset.n_elements() <= 40 {
        let cells: Vec<Result<finder::FeasibilityReport, finder::FinderError>> =
            crdist::par::par_map_indexed(alphas.len(), |i| {
                let a = crdist::scalar::rational_from_decimal_str(&format!("{}", alphas[i]))
                    .unwrap_or_else(|| Rational::from_ratio(1, 2));
                finder::constant_rate_feasible_truncated(&poset, a, epsilon_rational(epsilon))
            });
        collect_cells(cells)?
    } else {
        collect_cells(finder::alpha_grid_search(&poset, &alphas, epsilon))?
    };
    let mut w = csv::Writer::from_path(out.join("find.csv"))
        .map_err(|e| InputError(format!("csv: {e}")))?;
    w.write_record(["alpha", "depth", "status", "residual"]).ok();
    for r in &reports {
        w.write_record([
            format!("{:.6}", r.alpha),
            String::new(),
            format!("{:?}", r.status).to_lowercase(),
            if r.residual.is_finite() {
                format!("{:.3e}", r.residual)
            } else {
                "inf".into()
            },
        ])
        .ok();
    }
    w.flush().ok();
    dist_io::write_json(&out.join("find.json"), &json!({ "cells": reports }))?;
    Ok(EXIT_OK)
}

fn epsilon_rational(e: f64) -> Rational {
    crdist::scalar::rational_from_decimal_str(&format!("{e}"))
        .unwrap_or_else(|| Rational::from_ratio(1, 1_000_000_000))
}

fn collect_cells(
    cells: Vec<Result<finder::FeasibilityReport, finder::FinderError>>,
) -> Result<Vec<finder::FeasibilityReport>, InputError> {
    cells
        .into_iter()
        .map(|c| c.map_err(|e| InputError(format!("feasibility solve failed: {e}"))))
        .collect()
}

fn cmd_poisson_check(
    alpha: f64,
    marginal: &str,
    k_max: usize,
    tol: f64,
    out: &Path,
) -> Result<i32, InputError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(InputError("alpha must lie in (0, 1)".into()));
    }
    let marg: Vec<f64> = match marginal.split_once(':') {
        None if marginal == "poisson" => finder::poisson_marginal(-alpha.ln(), k_max),
        Some(("geometric", beta)) => {
            let b: f64 = beta
                .parse()
                .map_err(|_| InputError(format!("bad beta {beta:?}")))?;
            (0..=k_max).map(|j| b * (1.0 - b).powi(j as i32)).collect()
        }
        _ => {
            let text = std::fs::read_to_string(marginal)
                .map_err(|e| InputError(format!("cannot read marginal: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| InputError(format!("malformed marginal JSON: {e}")))?
        }
    };
    let report = finder::subsets_poisson_check(&marg, alpha)
        .map_err(|e| InputError(format!("poisson check failed: {e}")))?;
    dist_io::write_check_csv(&out.join("poisson-check.csv"), &report.rows)?;
    dist_io::write_json(&out.join("poisson-check.json"), &report)?;
    if report.max_residual > tol.max(1e-8) {
        return Ok(fail_check(&format!(
            "necessary conditions violated: max residual {:.3e}",
            report.max_residual
        )));
    }
    Ok(EXIT_OK)
}

fn cmd_verify(suite: &str, out: &Path) -> Result<i32, InputError> {
    if suite != "core" {
        return Err(InputError(format!("unknown suite {suite:?}")));
    }
    let mut rows: Vec<CheckRow> = Vec::new();
    let mut all_pass = true;
    let mut push = |name: &str, pass: bool, lhs: f64, rhs: f64| {
        println!("{} {name}", if pass { "pass" } else { "FAIL" });
        rows.push(CheckRow::new(name, None, lhs, rhs));
        all_pass &= pass;
    };

    // chain cumulative closed form
    let chain = crdist::catalog::chain(8);
    let lam = incidence::cumulative::<Rational>(&chain, 2);
    let expect = crdist::scalar::binomial(5, 3);
    push(
        "chain_lambda2_binomial",
        lam[2][3] == expect,
        lam[2][3].to_f64(),
        expect.to_f64(),
    );

    // tree constant-rate construction is constant rate
    let tree = TreeTrunc::materialize(TreeRule::kary(2), 5).unwrap();
    let half = Rational::from_ratio(1, 2);
    let (_, pdf) = crdist::tree::constant_rate_pdf(&tree, &half, &Splitter::Uniform).unwrap();
    let cr = dist::check_constant_rate(&tree.poset, &pdf, 0.0);
    push(
        "tree_constant_rate_exact",
        cr == Some(half.clone()),
        cr.map(|a| a.to_f64()).unwrap_or(f64::NAN),
        0.5,
    );

    // nonuniqueness witness
    let pair = crdist::catalog::nonunique_pair(half.clone(), 6).unwrap();
    let uf = dist::upf_from_pdf(&pair.poset, &pair.f).unwrap();
    let ug = dist::upf_from_pdf(&pair.poset, &pair.g).unwrap();
    push(
        "nonunique_identical_upfs",
        uf.values == ug.values && pair.f.probs != pair.g.probs,
        0.0,
        0.0,
    );

    // thinned rate 1/3
    let (na, _, _) =
        ladder::thin_exact_tree::<Rational>(&tree, &half, &Splitter::Uniform, &half).unwrap();
    push(
        "thinned_rate_one_third",
        na == Rational::from_ratio(1, 3),
        na.to_f64(),
        1.0 / 3.0,
    );

    // chain infeasibility, truncated chain feasibility
    let inf = finder::constant_rate_feasible_finite(
        &crdist::catalog::chain(5),
        half.clone(),
        Rational::from_ratio(1, 1_000_000),
    )
    .unwrap();
    push(
        "finite_chain_infeasible",
        inf.status == finder::FeasStatus::Infeasible,
        0.0,
        0.0,
    );
    let feas = finder::constant_rate_feasible_truncated(
        &crdist::catalog::chain_truncated(5),
        half,
        Rational::from_ratio(1, 1_000_000),
    )
    .unwrap();
    push(
        "truncated_chain_feasible",
        feas.status == finder::FeasStatus::Feasible,
        0.0,
        0.0,
    );

    // Poisson necessary conditions
    let marg = finder::poisson_marginal((2.0f64).ln(), 40);
    let pc = finder::subsets_poisson_check(&marg, 0.5).unwrap();
    push(
        "poisson_conditions_hold",
        pc.max_residual < 1e-10,
        pc.max_residual,
        0.0,
    );

    dist_io::write_check_csv(&out.join("verify.csv"), &rows)?;
    dist_io::write_json(
        &out.join("verify.json"),
        &json!({ "suite": suite, "pass": all_pass, "rows": rows }),
    )?;
    if !all_pass {
        return Ok(fail_check("verification suite failed"));
    }
    Ok(EXIT_OK)
}

fn cmd_catalog(action: &CatalogAction, out: &Path) -> Result<i32, InputError> {
    match action {
        CatalogAction::List => {
            for (name, desc) in crdist::catalog::CATALOG_NAMES {
                println!("{name}\t{desc}");
            }
            Ok(EXIT_OK)
        }
        CatalogAction::Build { name, params } => {
            let mut kv = std::collections::HashMap::new();
            for pair in params.split(',').filter(|s| !s.is_empty()) {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| InputError(format!("bad param {pair:?}")))?;
                let v: usize = v
                    .parse()
                    .map_err(|_| InputError(format!("bad param value {pair:?}")))?;
                kv.insert(k.to_string(), v);
            }
            let get = |key: &str, default: usize| kv.get(key).copied().unwrap_or(default);
            let poset: Poset = match name.as_str() {
                "chain" => crdist::catalog::chain(get("n", 8)),
                "chain-trunc" => crdist::catalog::chain_truncated(get("n", 8)),
                "antichain" => crdist::catalog::antichain(get("n", 4)),
                "kary-tree" => {
                    crdist::catalog::kary_tree(get("k", 2) as u32, get("depth", 5) as u32)
                }
                "boolean" => crdist::catalog::boolean_lattice(get("m", 3)),
                "subsets" => crdist::catalog::subsets_poset(get("m", 4), get("cap", 2)).0,
                "parallel-chains" => crdist::catalog::parallel_chains(get("depth", 6)),
                "nonunique" => {
                    let pair = crdist::catalog::nonunique_pair(
                        Rational::from_ratio(1, 2),
                        get("depth", 6) as u32,
                    )
                    .map_err(|e| InputError(format!("build failed: {e}")))?;
                    // also export the witness distributions
                    let dist_json = |pdf: &Pdf<Rational>| {
                        json!({
                            "poset": PosetFile::from_poset(&pair.poset),
                            "probs": pdf.probs.iter().enumerate()
                                .map(|(i, v)| (i.to_string(), json!(format_rational(v))))
                                .collect::<std::collections::BTreeMap<_, _>>(),
                            "tail_mass": format_rational(&pdf.tail_mass),
                            "upper_tail": pdf.upper_tail.as_ref().unwrap().iter().enumerate()
                                .map(|(i, v)| (i.to_string(), json!(format_rational(v))))
                                .collect::<std::collections::BTreeMap<_, _>>(),
                        })
                    };
                    dist_io::write_json(&out.join("nonunique-f.json"), &dist_json(&pair.f))?;
                    dist_io::write_json(&out.join("nonunique-g.json"), &dist_json(&pair.g))?;
                    pair.poset
                }
                other => return Err(InputError(format!("unknown catalog entry {other:?}"))),
            };
            let file = PosetFile::from_poset(&poset);
            dist_io::write_json(&out.join(format!("{name}.json")), &file)?;
            println!("{}", serde_json::to_string(&file).unwrap());
            Ok(EXIT_OK)
        }
    }
}

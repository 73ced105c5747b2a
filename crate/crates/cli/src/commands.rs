use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use peprk::bbm::{solitary_wave_run, BbmGrid};
use peprk::bseries::{conditions_on_weights, derive_conditions};
use peprk::integrate::{
    classify_orbit_with, default_sample_every, eoc_table, error_series_auto, integrate, integrate_system, problem,
};
use peprk::methods::{io, pep_residuals, registry, validate_with, VALIDATE_CAP};
use peprk::search::{solve, SearchSpec};
use peprk::trees::{density, ep_conjugate, conjugacy_classes, generate_trees, leaves, symmetry};
use peprk::{RootedTree, Tableau, Tolerances};
use rayon::prelude::*;

use crate::args;
use crate::output::{num, opt, write_csv, write_svg, Chart, Series};

#[derive(Args)]
pub struct TreesArgs {
    /// Largest tree order listed (at most 10).
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    /// Print the conjugacy classes of each order, one class per line.
    #[arg(long)]
    classes: bool,
    /// Show the energy-preserving conjugate for every leaf.
    #[arg(long)]
    conjugates: bool,
    /// Show a single tree instead, e.g. "[•,[•]]" or "[[],[[]]]".
    #[arg(long, conflicts_with_all = ["classes", "max_order"])]
    tree: Option<String>,
}

fn print_tree(t: &RootedTree, conjugates: bool) -> Result<()> {
    println!("{t}  order {}  σ {}  γ {}", t.order(), symmetry(t), density(t));
    if conjugates && t.order() > 1 {
        for leaf in leaves(t) {
            let (c, sign) = ep_conjugate(t, leaf)?;
            let sign = if sign > 0 { '+' } else { '-' };
            println!("    leaf {} (depth {}): {sign} {c}", leaf.node_index, leaf.depth);
        }
    }
    Ok(())
}

pub fn trees(a: TreesArgs) -> Result<()> {
    if let Some(s) = &a.tree {
        let t: RootedTree = s.parse()?;
        return print_tree(&t, true);
    }
    if a.classes {
        for (order, classes) in conjugacy_classes(a.max_order)? {
            for c in classes {
                let names: Vec<String> = c.iter().map(|t| t.to_string()).collect();
                println!("{order}: {}", names.join("  "));
            }
        }
        return Ok(());
    }
    let list = generate_trees(a.max_order)?;
    for t in &list {
        print_tree(t, a.conjugates)?;
    }
    println!("{} trees", list.len());
    Ok(())
}

#[derive(Args)]
pub struct ConditionsArgs {
    /// Order of the conditions.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Conditions on elementary weights for PEP orders 3..=order, assuming
    /// classical order two.
    #[arg(long, alias = "weights")]
    on_weights: bool,
    /// Flow conditions of every order 2..=order.
    #[arg(long)]
    cumulative: bool,
}

pub fn condition_lines(order: usize, weights: bool, cumulative: bool) -> Result<Vec<String>> {
    let list: Vec<String> = if weights {
        conditions_on_weights(order)?.iter().map(|c| format!("[{}] {c}", c.order())).collect()
    } else if cumulative {
        let mut out = Vec::new();
        for n in 2..=order {
            out.extend(derive_conditions(n)?.iter().map(|c| format!("[{n}] {c}")));
        }
        out
    } else {
        derive_conditions(order)?.iter().map(|c| c.to_string()).collect()
    };
    Ok(list)
}

pub fn conditions(a: ConditionsArgs) -> Result<()> {
    let lines = condition_lines(a.order, a.on_weights, a.cumulative)?;
    for l in &lines {
        println!("{l}");
    }
    println!("{} conditions", lines.len());
    Ok(())
}

#[derive(Args)]
pub struct CheckArgs {
    /// Method name or tableau file.
    method: String,
    /// Parameter of the RK22 family.
    #[arg(long)]
    alpha: Option<String>,
    /// Highest order examined.
    #[arg(long, default_value_t = VALIDATE_CAP)]
    cap: usize,
    /// Also print the Butcher-sum residuals of the PEP conditions (q = 3..5).
    #[arg(long)]
    residuals: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Write the per-order defects as CSV: order,defect.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Returns whether the claim (if any) was confirmed.
pub fn check(a: CheckArgs) -> Result<bool> {
    let t = args::method(&a.method, a.alpha.as_deref())?;
    let report = validate_with(&t, a.cap, &Tolerances::default())?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
        println!();
        println!("order,defect");
        for (n, d) in &report.defects {
            println!("{n},{}", num(*d));
        }
    }
    if let Some(path) = &a.csv {
        write_csv(path, &["order", "defect"], report.defects.iter().map(|(n, d)| vec![n.to_string(), num(*d)]))?;
    }
    if a.residuals {
        for q in 3..=5 {
            let rows = match &t {
                Tableau::Exact(x) => pep_residuals(x, q)?.into_iter().map(|(s, r)| (s, r.to_string())).collect::<Vec<_>>(),
                Tableau::Float(x) => pep_residuals(x, q)?.into_iter().map(|(s, r)| (s, format!("{r:.3e}"))).collect(),
            };
            for (label, r) in rows {
                println!("q={q}  {label}: residual {r}");
            }
        }
    }
    Ok(report.matches_claim() != Some(false))
}

#[derive(Subcommand)]
pub enum MethodsCommand {
    /// List the built-in methods.
    List,
    /// Print a tableau.
    Show {
        /// Method name or tableau file.
        method: String,
        #[arg(long)]
        alpha: Option<String>,
        /// Print in the tableau file format.
        #[arg(long)]
        json: bool,
    },
    /// Certify the claimed (p, q) of built-in methods or files.
    Validate {
        /// Methods to check; all built-in methods when empty.
        methods: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

pub fn methods(cmd: MethodsCommand) -> Result<bool> {
    match cmd {
        MethodsCommand::List => {
            for t in registry() {
                let claim = t.claimed().map(|(p, q)| format!("({p},{q})")).unwrap_or_else(|| "-".into());
                let kind = if t.is_exact() { "exact" } else { "float" };
                println!("{:<12} stages {}  claimed {claim:<7} {kind}", t.name(), t.stages());
            }
            Ok(true)
        }
        MethodsCommand::Show { method, alpha, json } => {
            let t = args::method(&method, alpha.as_deref())?;
            if json {
                println!("{}", io::to_json(&t));
                return Ok(true);
            }
            match &t {
                Tableau::Exact(x) => show(x.name(), x.a_matrix(), x.b(), x.c(), |v| v.to_string()),
                Tableau::Float(x) => show(x.name(), x.a_matrix(), x.b(), x.c(), |v| format!("{v:.17}")),
            }
            Ok(true)
        }
        MethodsCommand::Validate { methods, json } => {
            let list: Vec<Tableau> = if methods.is_empty() {
                registry()
            } else {
                methods.iter().map(|m| args::method(m, None)).collect::<Result<_>>()?
            };
            let reports = list
                .par_iter()
                .map(peprk::validate)
                .collect::<peprk::Result<Vec<_>>>()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    let verdict = match r.matches_claim() {
                        Some(true) => "ok",
                        Some(false) => "MISMATCH",
                        None => "no claim",
                    };
                    let claim = r.claimed.map(|(p, q)| format!("({p},{q})")).unwrap_or_else(|| "-".into());
                    println!("{:<12} p={} q={}  claimed {claim:<7} {verdict}", r.name, r.classical_order, r.pep_order);
                }
            }
            Ok(reports.iter().all(|r| r.matches_claim() != Some(false)))
        }
    }
}

fn show<S>(name: &str, a: &[Vec<S>], b: &[S], c: &[S], f: impl Fn(&S) -> String) {
    println!("{name}");
    for (i, row) in a.iter().enumerate() {
        let entries: Vec<String> = row[..i].iter().map(&f).collect();
        println!("  {:>24} | {}", f(&c[i]), entries.join("  "));
    }
    let entries: Vec<String> = b.iter().map(&f).collect();
    println!("  {:>24} | {}", "b", entries.join("  "));
}

#[derive(Args)]
pub struct IntegrateArgs {
    /// Method name or tableau file.
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: Option<String>,
    /// exponential, oscillator, lotka-volterra or duffing.
    #[arg(long)]
    problem: String,
    /// Time advanced per stage; the step is h = s·h0.
    #[arg(long, value_parser = args::number)]
    h0: f64,
    /// Final time.
    #[arg(long = "T", value_parser = args::number)]
    t_end: f64,
    /// Store every k-th step (default keeps below 10⁶ points).
    #[arg(long)]
    sample_every: Option<usize>,
    /// Error series as CSV: t,sol_error,energy_error.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Log-scale plot of the error series.
    #[arg(long)]
    svg: Option<PathBuf>,
}

pub fn integrate_cmd(a: IntegrateArgs) -> Result<()> {
    let t = args::float_method(&a.method, a.alpha.as_deref())?;
    let p = problem(&a.problem)?;
    let h = t.stages() as f64 * a.h0;
    let every = a.sample_every.unwrap_or_else(|| default_sample_every((a.t_end / h).ceil() as usize));
    let traj = integrate(&t, &p, a.h0, a.t_end, every)?;
    let errors = error_series_auto(&traj, &p)?;
    let last = errors.last().expect("at least one sample");
    let max_energy = errors.iter().map(|e| e.energy_error).fold(0.0, f64::max);
    println!("method {}  problem {}  h = {}  samples {}", t.name(), p.name, num(h), traj.len());
    if traj.final_partial {
        println!("final step shortened to reach T = {}", a.t_end);
    }
    println!("final solution error {}", num(last.solution_error));
    println!("final energy error   {}", num(last.energy_error));
    println!("max energy error     {}", num(max_energy));
    if let Some(path) = &a.csv {
        write_csv(
            path,
            &["t", "sol_error", "energy_error"],
            errors.iter().map(|e| vec![num(e.t), num(e.solution_error), num(e.energy_error)]),
        )?;
    }
    if let Some(path) = &a.svg {
        let chart = Chart { title: &format!("{} on {}", t.name(), p.name), x_label: "t", y_label: "error", log_x: true, log_y: true };
        write_svg(
            path,
            &chart,
            &[
                Series { label: "solution".into(), points: errors.iter().map(|e| (e.t, e.solution_error)).collect() },
                Series { label: "energy".into(), points: errors.iter().map(|e| (e.t, e.energy_error)).collect() },
            ],
        )?;
    }
    Ok(())
}

#[derive(Args)]
pub struct EocArgs {
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    problem: String,
    /// Step sizes, e.g. 1/2,1/4,1/8 (used as given, not scaled by s).
    #[arg(long, value_parser = args::number, value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long = "T", value_parser = args::number)]
    t_end: f64,
    /// Table as CSV: h,sol_error,sol_eoc,energy_error,energy_eoc.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

pub fn write_eoc(rows: &[peprk::integrate::EocRow], csv: Option<&std::path::Path>, svg: Option<&std::path::Path>, title: &str) -> Result<()> {
    if let Some(path) = csv {
        write_csv(
            path,
            &["h", "sol_error", "sol_eoc", "energy_error", "energy_eoc"],
            rows.iter().map(|r| vec![num(r.h), num(r.solution_error), opt(r.solution_eoc), num(r.energy_error), opt(r.energy_eoc)]),
        )?;
    }
    if let Some(path) = svg {
        let chart = Chart { title, x_label: "h", y_label: "error at T", log_x: true, log_y: true };
        write_svg(
            path,
            &chart,
            &[
                Series { label: "solution".into(), points: rows.iter().map(|r| (r.h, r.solution_error)).collect() },
                Series { label: "energy".into(), points: rows.iter().map(|r| (r.h, r.energy_error)).collect() },
            ],
        )?;
    }
    Ok(())
}

pub fn print_eoc(rows: &[peprk::integrate::EocRow]) {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
    println!("{:>10} {:>10} {:>7} {:>10} {:>7}", "h", "sol err", "EOC", "energy err", "EOC");
    for r in rows {
        println!(
            "{:>10} {:>10.2e} {:>7} {:>10.2e} {:>7}",
            format!("{}", r.h),
            r.solution_error,
            f(r.solution_eoc),
            r.energy_error,
            f(r.energy_eoc)
        );
    }
}

pub fn eoc(a: EocArgs) -> Result<()> {
    let h = a.h;
    if h.is_empty() {
        bail!("--h needs at least one step size");
    }
    let t = args::float_method(&a.method, a.alpha.as_deref())?;
    let p = problem(&a.problem)?;
    let rows = eoc_table(&t, &p, &h, a.t_end)?;
    print_eoc(&rows);
    write_eoc(&rows, a.csv.as_deref(), a.svg.as_deref(), &format!("{} on {}", t.name(), p.name))
}

#[derive(Args)]
pub struct DuffingArgs {
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: Option<String>,
    /// Time advanced per stage (h = s·h0).
    #[arg(long, value_parser = args::number, conflicts_with = "h", required_unless_present = "h")]
    h0: Option<f64>,
    /// Step size used as given.
    #[arg(long, value_parser = args::number)]
    h: Option<f64>,
    #[arg(long = "T", value_parser = args::number, default_value = "1000")]
    t_end: f64,
    /// Fraction of the run used as the final window.
    #[arg(long, value_parser = args::number, default_value = "0.25")]
    window: f64,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Phase-space samples as CSV: t,u1,u2,energy_error.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Phase portrait.
    #[arg(long)]
    svg: Option<PathBuf>,
}

pub fn duffing(a: DuffingArgs) -> Result<()> {
    let t = args::float_method(&a.method, a.alpha.as_deref())?;
    let p = problem("duffing")?;
    let h = a.h.unwrap_or_else(|| t.stages() as f64 * a.h0.expect("clap enforces h0 or h"));
    let every = a.sample_every.unwrap_or_else(|| default_sample_every((a.t_end / h).ceil() as usize));
    let traj = integrate_system(&t, &p, &p.y0, h, a.t_end, every)?;
    let class = classify_orbit_with(&traj, a.window);
    let e0 = p.initial_energy();
    println!("method {}  h = {}  T = {}", t.name(), num(h), a.t_end);
    println!("final energy error {}", num(p.energy(traj.final_state()) - e0));
    println!("orbit: {class}");
    if let Some(path) = &a.csv {
        write_csv(
            path,
            &["t", "u1", "u2", "energy_error"],
            traj.times.iter().zip(&traj.states).map(|(t, y)| vec![num(*t), num(y[0]), num(y[1]), num(p.energy(y) - e0)]),
        )?;
    }
    if let Some(path) = &a.svg {
        let chart = Chart { title: &format!("{} h = {h}", t.name()), x_label: "u1", y_label: "u2", log_x: false, log_y: false };
        write_svg(path, &chart, &[Series { label: t.name().into(), points: traj.states.iter().map(|y| (y[0], y[1])).collect() }])?;
    }
    Ok(())
}

#[derive(Args)]
pub struct BbmArgs {
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, value_parser = args::number, default_value = "0.05")]
    h0: f64,
    #[arg(long = "T", value_parser = args::number, default_value = "500")]
    t_end: f64,
    /// Number of grid points (even).
    #[arg(long, default_value_t = peprk::bbm::DEFAULT_N)]
    n_grid: usize,
    #[arg(long, default_value_t = 10)]
    sample_every: usize,
    /// CSV: t,error,mass_drift,energy_drift (drifts relative).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

pub fn bbm(a: BbmArgs) -> Result<()> {
    let t = args::float_method(&a.method, a.alpha.as_deref())?;
    let grid = BbmGrid::new(a.n_grid)?;
    let samples = solitary_wave_run(&t, &grid, a.h0, a.t_end, a.sample_every)?;
    let last = samples.last().expect("at least one sample");
    println!("method {}  N = {}  h = {}", t.name(), grid.n(), num(t.stages() as f64 * a.h0));
    println!("final error        {}", num(last.error));
    println!("final mass drift   {}", num(last.mass_drift));
    println!("final energy drift {}", num(last.energy_drift));
    write_bbm(&samples, a.csv.as_deref(), a.svg.as_deref(), t.name())
}

pub fn write_bbm(samples: &[peprk::bbm::BbmSample], csv: Option<&std::path::Path>, svg: Option<&std::path::Path>, name: &str) -> Result<()> {
    if let Some(path) = csv {
        write_csv(
            path,
            &["t", "error", "mass_drift", "energy_drift"],
            samples.iter().map(|s| vec![num(s.t), num(s.error), num(s.mass_drift), num(s.energy_drift)]),
        )?;
    }
    if let Some(path) = svg {
        let chart = Chart { title: &format!("BBM, {name}"), x_label: "t", y_label: "error", log_x: true, log_y: true };
        write_svg(path, &chart, &[Series { label: name.into(), points: samples.iter().map(|s| (s.t, s.error)).collect() }])?;
    }
    Ok(())
}

#[derive(Args)]
pub struct SearchArgs {
    /// Number of stages.
    #[arg(long)]
    stages: usize,
    /// Classical order p.
    #[arg(long)]
    order: usize,
    /// PEP order q.
    #[arg(long)]
    pep: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Success threshold on the largest residual.
    #[arg(long, value_parser = args::number, default_value = "1e-12")]
    tolerance: f64,
    /// Write the found tableau (exact when polishing succeeds).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn search_spec(a: &SearchArgs) -> SearchSpec {
    SearchSpec::new(a.stages, a.order, a.pep)
        .with_restarts(a.restarts)
        .with_seed(a.seed)
        .with_tolerance(a.tolerance)
}

/// Returns the tableau that would be written, if any.
pub fn run_search(spec: &SearchSpec) -> Result<Option<Tableau>> {
    let o = solve(spec)?;
    println!(
        "spec (s,p,q) = ({},{},{})  restarts {}  seed {}",
        spec.s, spec.p, spec.q, spec.restarts, spec.seed
    );
    println!("successful restarts {}  distinct solutions {}", o.successes, o.solutions.len());
    println!("best residual {}", num(o.residual));
    if !o.feasible() {
        println!("no restart reached the tolerance: infeasible, or the search was unlucky");
        return Ok(None);
    }
    let name = format!("found({},{},{})", spec.s, spec.p, spec.q);
    let t: Tableau = match o.polished {
        Some(x) => {
            println!("exact tableau recovered by rational reconstruction");
            x.with_name(name).with_claim(spec.p, spec.q).into()
        }
        None => o.best.context("feasible search has a best point")?.with_name(name).with_claim(spec.p, spec.q).into(),
    };
    println!("{}", io::to_json(&t));
    Ok(Some(t))
}

pub fn search(a: SearchArgs) -> Result<()> {
    let spec = search_spec(&a);
    if let Some(t) = run_search(&spec)? {
        if let Some(path) = &a.out {
            io::write_file(path, &t)?;
        }
    }
    Ok(())
}

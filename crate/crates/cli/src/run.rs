//! Named experiments: each writes its data files and a `manifest.json`.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use peprk::bbm::{solitary_wave_run, BbmGrid};
use peprk::integrate::{
    classify_orbit, default_sample_every, eoc_table, error_series_auto, integrate, problem, HamiltonianProblem,
};
use peprk::methods::{io, lookup, validate};
use peprk::search::SearchSpec;
use peprk::Tableau;
use serde_json::json;

use crate::args;
use crate::commands::{condition_lines, print_eoc, run_search, write_bbm, write_eoc};
use crate::output::{num, write_csv, write_svg, Chart, Series};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Experiment {
    EocTable3,
    EocTable4,
    OscillatorFig1,
    LotkaVolterra,
    Duffing,
    Bbm,
    Conditions,
    Search,
}

impl Experiment {
    fn id(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Args)]
pub struct RunArgs {
    experiment: Experiment,
    /// Output directory (created if missing).
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Replace the experiment's methods (repeatable).
    #[arg(long)]
    method: Vec<String>,
    /// Replace every group's h0.
    #[arg(long, value_parser = args::number)]
    h0: Option<f64>,
    /// Replace the step sizes of the convergence experiments.
    #[arg(long, value_parser = args::number, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Final time.
    #[arg(long = "T", value_parser = args::number)]
    t_end: Option<f64>,
    /// Order for the conditions experiment.
    #[arg(long, default_value_t = 6)]
    order: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = peprk::bbm::DEFAULT_N)]
    n_grid: usize,
}

/// A set of methods sharing one h0.
struct Group {
    label: &'static str,
    h0: f64,
    methods: Vec<&'static str>,
}

fn group(label: &'static str, h0: f64, methods: &[&'static str]) -> Group {
    Group { label, h0, methods: methods.to_vec() }
}

struct Recorder {
    dir: PathBuf,
    files: Vec<String>,
    methods: Vec<serde_json::Value>,
}

impl Recorder {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    /// Loads a method and certifies its claimed orders.
    fn method(&mut self, spec: &str) -> Result<Tableau> {
        let t = args::method(spec, None)?;
        let r = validate(&t)?;
        if r.matches_claim() == Some(false) {
            bail!("{}: claimed {:?} but certified (p,q) = ({},{})", r.name, r.claimed, r.classical_order, r.pep_order);
        }
        self.methods.push(json!({
            "name": t.name(),
            "stages": t.stages(),
            "p": r.classical_order,
            "q": r.pep_order,
            "tableau": serde_json::from_str::<serde_json::Value>(&io::to_json(&t))?,
        }));
        Ok(t)
    }
}

fn slug(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_string()
}

fn methods_or(a: &RunArgs, default: &[&'static str]) -> Vec<String> {
    if a.method.is_empty() {
        default.iter().map(|s| s.to_string()).collect()
    } else {
        a.method.clone()
    }
}

fn groups_or(a: &RunArgs, default: Vec<Group>) -> Vec<(String, f64, Vec<String>)> {
    if !a.method.is_empty() {
        let h0 = a.h0.unwrap_or(default[0].h0);
        return vec![("custom".into(), h0, a.method.clone())];
    }
    default
        .into_iter()
        .map(|g| (g.label.to_string(), a.h0.unwrap_or(g.h0), g.methods.iter().map(|s| s.to_string()).collect()))
        .collect()
}

pub fn run(a: RunArgs) -> Result<()> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut rec = Recorder { dir: a.out.clone(), files: Vec::new(), methods: Vec::new() };
    let exp = a.experiment;
    let mut params = json!({});
    match exp {
        Experiment::EocTable3 | Experiment::EocTable4 => {
            let default = if matches!(exp, Experiment::EocTable3) { "PEP(6,3,6)" } else { "PEP(7,4,6)" };
            let h = a.h.clone().unwrap_or_else(|| (1..=6).map(|k| 0.5f64.powi(k)).collect());
            let t_end = a.t_end.unwrap_or(160.0);
            let p = problem("exponential")?;
            for m in methods_or(&a, &[default]) {
                let t = rec.method(&m)?.to_f64();
                let rows = eoc_table(&t, &p, &h, t_end)?;
                println!("{} on {}, T = {t_end}", t.name(), p.name);
                print_eoc(&rows);
                let base = format!("eoc-{}", slug(t.name()));
                let csv = rec.path(&format!("{base}.csv"));
                let svg = rec.path(&format!("{base}.svg"));
                write_eoc(&rows, Some(&csv), Some(&svg), &format!("{} on {}", t.name(), p.name))?;
            }
            params = json!({ "problem": p.name, "h": h, "T": t_end });
        }
        Experiment::OscillatorFig1 | Experiment::LotkaVolterra => {
            let (name, default) = if matches!(exp, Experiment::OscillatorFig1) {
                (
                    "oscillator",
                    vec![
                        group("rk2", 1.0 / 20.0, &["RK22(1/2)", "RK22(3/5)", "RK22(2/3)", "RK22(1)", "PEP(4,2,5)"]),
                        group("rk4", 1.0 / 40.0, &["RK(4,4)", "PEP(7,4,6)"]),
                    ],
                )
            } else {
                (
                    "lotka-volterra",
                    vec![
                        group("rk2", 3.0 / 40.0, &["RK22(1/2)", "PEP(4,2,5)", "PEP(5,2,6)"]),
                        group("pep324", 1.0 / 6.0, &["PEP(3,2,4)"]),
                        group("pep636", 1.0 / 20.0, &["PEP(6,3,6)"]),
                    ],
                )
            };
            let t_end = a.t_end.unwrap_or(1000.0);
            let p = problem(name)?;
            let groups = groups_or(&a, default);
            for (label, h0, methods) in &groups {
                let mut series = Vec::new();
                for m in methods {
                    let t = rec.method(m)?.to_f64();
                    series.push(error_run(&mut rec, &t, &p, *h0, t_end, label)?);
                }
                let svg = rec.path(&format!("{}-{label}.svg", slug(p.name)));
                let chart = Chart { title: &format!("{}, h0 = {h0}", p.name), x_label: "t", y_label: "solution error", log_x: true, log_y: true };
                write_svg(&svg, &chart, &series)?;
            }
            params = json!({ "problem": p.name, "T": t_end, "groups": groups_json(&groups) });
        }
        Experiment::Duffing => {
            let default = vec![
                group("rk2", 1.0 / 200.0, &["RK22(1/2)", "PEP(5,2,6)"]),
                group("rk4", 1.0 / 20.0, &["RK(4,4)", "PEP(7,4,6)"]),
            ];
            let t_end = a.t_end.unwrap_or(1000.0);
            let p = problem("duffing")?;
            let groups = groups_or(&a, default);
            let mut classes = Vec::new();
            for (label, h0, methods) in &groups {
                let mut series = Vec::new();
                for m in methods {
                    let t = rec.method(m)?.to_f64();
                    let h = t.stages() as f64 * h0;
                    let traj = integrate(&t, &p, *h0, t_end, default_sample_every((t_end / h).ceil() as usize))?;
                    let class = classify_orbit(&traj);
                    let e0 = p.initial_energy();
                    println!("{:<12} h0 = {h0:<8} h = {h:<8} orbit {class}", t.name());
                    classes.push(json!({ "method": t.name(), "h0": h0, "h": h, "orbit": class.to_string() }));
                    let csv = rec.path(&format!("duffing-{}-{label}.csv", slug(t.name())));
                    write_csv(
                        &csv,
                        &["t", "u1", "u2", "energy_error"],
                        traj.times.iter().zip(&traj.states).map(|(t, y)| vec![num(*t), num(y[0]), num(y[1]), num(p.energy(y) - e0)]),
                    )?;
                    series.push(Series { label: t.name().into(), points: traj.states.iter().map(|y| (y[0], y[1])).collect() });
                }
                let svg = rec.path(&format!("duffing-{label}.svg"));
                let chart = Chart { title: &format!("Duffing, h0 = {h0}"), x_label: "u1", y_label: "u2", log_x: false, log_y: false };
                write_svg(&svg, &chart, &series)?;
            }
            params = json!({ "problem": p.name, "T": t_end, "groups": groups_json(&groups), "orbits": classes });
        }
        Experiment::Bbm => {
            let h0 = a.h0.unwrap_or(0.05);
            let t_end = a.t_end.unwrap_or(500.0);
            let grid = BbmGrid::new(a.n_grid)?;
            let mut series = Vec::new();
            for m in methods_or(&a, &["RK22(1/2)", "PEP(4,2,5)"]) {
                let t = rec.method(&m)?.to_f64();
                let samples = solitary_wave_run(&t, &grid, h0, t_end, 10)?;
                let last = samples.last().expect("at least one sample");
                println!(
                    "{:<12} error {:.3e}  mass drift {:.3e}  energy drift {:.3e}",
                    t.name(),
                    last.error,
                    last.mass_drift,
                    last.energy_drift
                );
                let csv = rec.path(&format!("bbm-{}.csv", slug(t.name())));
                write_bbm(&samples, Some(&csv), None, t.name())?;
                series.push(Series { label: t.name().into(), points: samples.iter().map(|s| (s.t, s.error)).collect() });
            }
            let svg = rec.path("bbm.svg");
            let chart = Chart { title: "BBM solitary wave", x_label: "t", y_label: "error", log_x: true, log_y: true };
            write_svg(&svg, &chart, &series)?;
            params = json!({
                "h0": h0, "T": t_end, "n_grid": grid.n(), "length": grid.length(),
                "speed": peprk::bbm::DEFAULT_SPEED, "sample_every": 10,
            });
        }
        Experiment::Conditions => {
            let lines = condition_lines(a.order, false, false)?;
            for l in &lines {
                println!("{l}");
            }
            println!("{} conditions", lines.len());
            let path = rec.path(&format!("conditions-order{}.txt", a.order));
            fs::write(&path, lines.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
            let weights = if (3..=6).contains(&a.order) {
                let w = condition_lines(a.order, true, false)?;
                let path = rec.path(&format!("weight-conditions-order{}.txt", a.order));
                fs::write(&path, w.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
                Some(w.len())
            } else {
                None
            };
            params = json!({ "order": a.order, "count": lines.len(), "weight_count": weights });
        }
        Experiment::Search => {
            let mut specs = Vec::new();
            for (s, p, q) in [(2, 2, 3), (3, 2, 4)] {
                let spec = SearchSpec::new(s, p, q).with_restarts(a.restarts).with_seed(a.seed);
                let Some(t) = run_search(&spec)? else {
                    bail!("search ({s},{p},{q}) found no solution");
                };
                let path = rec.path(&format!("search-{s}{p}{q}.json"));
                io::write_file(&path, &t)?;
                rec.method(&path.to_string_lossy())?;
                if let (Ok(Tableau::Exact(known)), Tableau::Exact(found)) = (lookup(&format!("PEP({s},{p},{q})")), &t) {
                    let same = known.a_matrix() == found.a_matrix() && known.b() == found.b();
                    println!("identical to registry {}: {same}", known.name());
                }
                specs.push(json!({ "s": s, "p": p, "q": q, "tolerance": spec.tolerance }));
            }
            params = json!({ "specs": specs });
        }
    }
    let manifest = json!({
        "experiment": exp.id(),
        "version": env!("CARGO_PKG_VERSION"),
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "seed": a.seed,
        "restarts": a.restarts,
        "parameters": params,
        "methods": rec.methods,
        "files": rec.files,
    });
    let path = a.out.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} files and manifest.json to {}", rec.files.len(), a.out.display());
    Ok(())
}

fn groups_json(groups: &[(String, f64, Vec<String>)]) -> serde_json::Value {
    groups.iter().map(|(label, h0, m)| json!({ "label": label, "h0": h0, "methods": m })).collect()
}

fn error_run(rec: &mut Recorder, t: &peprk::ButcherTableau<f64>, p: &HamiltonianProblem, h0: f64, t_end: f64, label: &str) -> Result<Series> {
    let h = t.stages() as f64 * h0;
    let traj = integrate(t, p, h0, t_end, default_sample_every((t_end / h).ceil() as usize))?;
    let errors = error_series_auto(&traj, p)?;
    let last = errors.last().expect("at least one sample");
    println!(
        "{:<12} h0 = {h0:<8} final error {:.3e}  energy error {:.3e}",
        t.name(),
        last.solution_error,
        last.energy_error
    );
    let csv = rec.path(&format!("{}-{}-{label}.csv", slug(p.name), slug(t.name())));
    write_csv(
        &csv,
        &["t", "sol_error", "energy_error"],
        errors.iter().map(|e| vec![num(e.t), num(e.solution_error), num(e.energy_error)]),
    )?;
    Ok(Series { label: t.name().into(), points: errors.iter().map(|e| (e.t, e.solution_error)).collect() })
}

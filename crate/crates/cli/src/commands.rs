use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use fracheat_core::besov::{besov_lorentz_norm, build_partition, BesovSpec};
use fracheat_core::forcing::build_forcing;
use fracheat_core::harness::kernel::{axis_profile, kernel_decay, synthesize_kernel};
use fracheat_core::harness::output::{self, fmt_f64, Column, ColumnType, Table};
use fracheat_core::harness::{run_plan, write_outcome, Experiment, ExperimentPlan, Outcome};
use fracheat_core::lorentz::{lorentz_norm, uniformly_local_lorentz_norm};
use fracheat_core::solver::picard_solve;
use fracheat_core::spectral::io::{read_field, write_physical, write_spectral, StoredField};
use fracheat_core::{CenterLattice, Grid, Index, NormSpec, PhysicalField, SpectralField, Verdict};
use log::info;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, NormsConfig, SolveConfig};
use crate::failure::{self, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub fn producer() -> String {
    format!("fracheat {}", env!("CARGO_PKG_VERSION"))
}

/// Header text for CSV outputs: producer line followed by the resolved config as TOML.
fn csv_header<T: Serialize>(config: &T) -> Result<String, Failure> {
    Ok(format!("{}\n{}", producer(), config::to_toml(config)?))
}

fn provenance<T: Serialize>(config: &T) -> serde_json::Value {
    json!({ "producer": producer(), "config": config })
}

fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| failure::output(dir, e))?;
    if !dir.is_dir() {
        return Err(Failure::Output(format!("{} is not a directory", dir.display())));
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| failure::output(path, e))?;
    fs::write(path, text + "\n").map_err(|e| failure::output(path, e))
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

/// `count` slice indices spread over `1..=n`, the last one always `n`.
pub fn snapshot_indices(n: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=count.min(n)).map(|k| (k * n).div_ceil(count.min(n))).collect();
    out.dedup();
    out
}

pub fn solve(path: &Path, overrides: &[String], out: &Path) -> Result<Status, Failure> {
    let mut cfg: SolveConfig = config::load(path, overrides)?;
    if let Some(seed) = config::env_seed()? {
        config::reseed_terms(&mut cfg.forcing, seed);
    }
    let grid = cfg.validate()?;
    let mu = build_forcing(&grid, &cfg.forcing).map_err(|e| Failure::Config(format!("forcing: {e}")))?;
    let id = cfg.id.clone().unwrap_or_else(|| stem_of(path));
    prepare_dir(out)?;

    info!("solving {id} on {} points, T = {}", grid.points(), cfg.solver.horizon);
    let (u, report) = picard_solve(&mu, &cfg.solver)?;

    let report_path = out.join(format!("{id}.report.json"));
    write_json(&report_path, &json!({ "provenance": provenance(&cfg), "report": report }))?;

    let mut snapshots = Vec::new();
    if cfg.snapshots.count > 0 {
        let dir = out.join(format!("{id}.snapshots"));
        prepare_dir(&dir)?;
        for n in snapshot_indices(u.len() - 1, cfg.snapshots.count) {
            let name = format!("u_{n:05}.frht");
            let file = dir.join(&name);
            let handle = fs::File::create(&file).map_err(|e| failure::output(&file, e))?;
            let mut w = BufWriter::new(handle);
            if cfg.snapshots.spectral {
                write_spectral(&mut w, &u.slices[n])?;
            } else {
                write_physical(&mut w, &u.slices[n].to_physical()?)?;
            }
            snapshots.push(json!({ "index": n, "time": u.times[n], "file": name }));
        }
        write_json(&dir.join("manifest.json"), &json!({ "provenance": provenance(&cfg), "snapshots": snapshots }))?;
    }

    println!(
        "{id}: {:?} after {} iterations, X_T norm {:.6e}, residual {:.3e}",
        report.verdict, report.iterations, report.xt_norm, report.final_residual
    );
    println!("report: {}", report_path.display());
    Ok(Status::from_pass(report.verdict == Verdict::Converged))
}

fn load_field(cfg: &NormsConfig, config_path: &Path) -> Result<(PhysicalField, SpectralField), Failure> {
    if let Some(input) = &cfg.input {
        let file = config_path.parent().unwrap_or(Path::new(".")).join(input);
        let handle = fs::File::open(&file).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
        let stored = read_field(&mut std::io::BufReader::new(handle))
            .map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
        return Ok(match stored {
            StoredField::Physical(f) => {
                let s = f.to_spectral();
                (f, s)
            }
            StoredField::Spectral(s) => (s.to_physical()?, s),
        });
    }
    let grid: Grid = cfg.grid.as_ref().expect("validated").build()?;
    let s = build_forcing(&grid, &cfg.forcing).map_err(|e| Failure::Config(format!("forcing: {e}")))?;
    Ok((s.to_physical()?, s))
}

fn index_text(i: Index) -> String {
    fmt_f64(i.as_f64())
}

pub fn norms(path: &Path, overrides: &[String], out: &Path) -> Result<Status, Failure> {
    let mut cfg: NormsConfig = config::load(path, overrides)?;
    if let Some(seed) = config::env_seed()? {
        config::reseed_terms(&mut cfg.forcing, seed);
    }
    cfg.validate()?;
    let id = cfg.id.clone().unwrap_or_else(|| stem_of(path));
    prepare_dir(out)?;
    let (phys, spec) = load_field(&cfg, path)?;

    use ColumnType::*;
    let column = |name, kind, description| Column { name, kind, description };
    let mut table = Table::new(vec![
        column("norm", Text, "lorentz, lorentz_ul or besov"),
        column("s", Float, "smoothness index; empty for Lorentz norms"),
        column("p", Float, "Lorentz integrability index"),
        column("q", Float, "Lorentz fine index"),
        column("r", Float, "Besov summation index; empty for Lorentz norms"),
        column("value", Float, "norm value"),
        column("j_max", Integer, "last Littlewood-Paley block; empty for Lorentz norms"),
        column("truncated", Bool, "spectral content beyond the last block"),
    ]);
    for l in &cfg.lorentz {
        let ns = NormSpec::new(l.p, l.q)?;
        let (name, value) = if l.uniformly_local {
            ("lorentz_ul", uniformly_local_lorentz_norm(&phys, &ns, &CenterLattice::default())?)
        } else {
            ("lorentz", lorentz_norm(&phys, &ns))
        };
        println!("{name} p={} q={}: {value:.6e}", l.p, index_text(l.q));
        table.push(vec![
            name.into(),
            String::new(),
            fmt_f64(l.p),
            index_text(l.q),
            String::new(),
            fmt_f64(value),
            String::new(),
            String::new(),
        ]);
    }
    if !cfg.besov.is_empty() {
        let part = build_partition(spec.grid())?;
        for b in &cfg.besov {
            let v = besov_lorentz_norm(&spec, &BesovSpec::new(b.s, b.p, b.q, b.r)?, &part)?;
            println!("besov s={} p={} q={} r={}: {:.6e}", b.s, b.p, index_text(b.q), index_text(b.r), v.value);
            table.push(vec![
                "besov".into(),
                fmt_f64(b.s),
                fmt_f64(b.p),
                index_text(b.q),
                index_text(b.r),
                fmt_f64(v.value),
                v.j_max.to_string(),
                v.truncated.to_string(),
            ]);
        }
    }
    let csv = output::write_table(out, &format!("{id}.norms"), &table, &csv_header(&cfg)?)?;
    println!("table: {}", csv.display());
    Ok(Status::Pass)
}

fn resolve_out(cli_out: Option<&Path>, plan: &ExperimentPlan) -> PathBuf {
    cli_out.map(Path::to_path_buf).or_else(|| plan.output.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_and_write(plan: &ExperimentPlan, out: &Path) -> Result<Outcome, Failure> {
    info!("running {} ({})", plan.id, plan.experiment.name());
    let outcome = run_plan(plan)?;
    let summary = write_outcome(out, plan, &outcome)?;
    println!("{}: {} ({})", plan.id, if outcome.pass() { "PASS" } else { "FAIL" }, summary.display());
    Ok(outcome)
}

pub fn verify(plans: &[PathBuf], overrides: &[String], out: Option<&Path>) -> Result<Status, Failure> {
    // every plan is validated before the first one runs
    let loaded: Vec<ExperimentPlan> =
        plans.iter().map(|p| config::load_plan(p, overrides)).collect::<Result<_, _>>()?;
    for plan in &loaded {
        prepare_dir(&resolve_out(out, plan))?;
    }
    let mut pass = true;
    for plan in &loaded {
        pass &= run_and_write(plan, &resolve_out(out, plan))?.pass();
    }
    Ok(Status::from_pass(pass))
}

pub fn sweep(path: &Path, overrides: &[String], out: Option<&Path>) -> Result<Status, Failure> {
    let plan = config::load_plan(path, overrides)?;
    if plan.experiment != Experiment::SolvabilitySweep {
        return Err(Failure::Config(format!(
            "{}: experiment is {}, sweep needs solvability_sweep",
            path.display(),
            plan.experiment.name()
        )));
    }
    let dir = resolve_out(out, &plan);
    prepare_dir(&dir)?;
    let outcome = run_and_write(&plan, &dir)?;
    if let Outcome::Sweep(report) = &outcome {
        for t in &report.thresholds {
            let show = |v: Option<f64>| v.map(|a| format!("{a:e}")).unwrap_or_else(|| "none".into());
            println!(
                "  theta={} gamma={} {}: last converged {}, first failure {}",
                t.theta,
                t.gamma,
                t.kind,
                show(t.last_converged),
                show(t.first_failure)
            );
        }
    }
    Ok(Status::from_pass(outcome.pass()))
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRun {
    pub theta: f64,
    pub horizon: f64,
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
    pub stride: usize,
}

pub fn kernel(run: &KernelRun, out: &Path) -> Result<Status, Failure> {
    if run.stride == 0 {
        return Err(Failure::Usage("--stride must be positive".into()));
    }
    let grid = Grid::new(run.dim, run.points, run.half_length).map_err(|e| Failure::Usage(e.to_string()))?;
    prepare_dir(out)?;
    // parameter and window checks happen before any synthesis
    let fit = kernel_decay(&grid, run.theta, run.horizon).map_err(|e| match e {
        fracheat_core::Error::InvalidParameter(m) | fracheat_core::Error::InvalidGrid(m) => Failure::Usage(m),
        other => other.into(),
    })?;
    let profile: Vec<(f64, f64)> = axis_profile(&synthesize_kernel(&grid, run.theta, run.horizon)?)
        .into_iter()
        .step_by(run.stride)
        .collect();
    let stem = format!("kernel_theta{}_T{}", run.theta, run.horizon);
    let csv = output::write_table(out, &stem, &output::kernel_samples_table(&profile), &csv_header(run)?)?;
    write_json(&out.join(format!("{stem}.fit.json")), &json!({ "provenance": provenance(run), "fit": fit }))?;
    match fit.fit {
        Some(f) => println!(
            "theta={} T={}: tail slope {:.4} on [{}, {}] (target {}), L1 {:.6e}",
            run.theta, run.horizon, f.slope, fit.window[0], fit.window[1], fit.target, fit.l1
        ),
        None => println!(
            "theta={} T={}: tail below round-off on [{}, {}], L1 {:.6e}",
            run.theta, run.horizon, fit.window[0], fit.window[1], fit.l1
        ),
    }
    println!("{}: {}", if fit.pass { "PASS" } else { "FAIL" }, csv.display());
    Ok(Status::from_pass(fit.pass))
}

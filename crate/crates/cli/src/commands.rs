use std::io::Write;
use std::path::{Path, PathBuf};

use parisian_core::sim::{self, Barrier, Estimand, SimConfig, SimEstimate, StrategySpec};
use parisian_core::tables::{eval_table, strategy_table, uniform_grid, EvalRow};
use parisian_core::verify::{run_suite, VerifyOptions, VerifyReport};
use parisian_core::{
    DerivedConstants, DualSolution, ModelParams, OccupationValue, RestrictedValue, ValueFunction,
};
use serde::Serialize;

use crate::args::{
    Command, EvalArgs, Figure1Args, OutputArgs, ReplayArgs, SimulateArgs, SolveArgs, VerifyArgs, OUT_DIR_ENV,
};
use crate::error::CliError;
use crate::manifest::{RunManifest, Stopwatch};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a),
        Command::Figure1(a) => figure1(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Replay(a) => replay(a),
    }
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    manifest: &'a RunManifest,
    params: ModelParams,
    constants: DerivedConstants,
    dual: DualSolution,
    beta: f64,
}

fn solve(a: SolveArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::new(a.output.timings);
    let mut manifest = RunManifest::new(Command::Solve(a.clone()), a.params.model(), vec![])?;
    if a.output.manifest_only {
        return emit_json(&manifest, a.output.out.as_deref());
    }
    let v = ValueFunction::new(manifest.params)?;
    clock.lap("solve");
    clock.finish(&mut manifest);
    let doc = SolveDoc {
        manifest: &manifest,
        params: v.params,
        constants: v.consts,
        dual: v.dual,
        beta: v.beta,
    };
    emit_json(&doc, a.output.out.as_deref())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::new(a.output.timings);
    let mut manifest = RunManifest::new(Command::Eval(a.clone()), a.params.model(), vec![])?;
    let p = manifest.params;
    let lo = a.grid_min.unwrap_or(-p.l);
    let hi = a.grid_max.unwrap_or(p.safe_level());
    if a.points == 0 {
        return Err(CliError::Input("--points must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Input(format!("grid needs finite --grid-min <= --grid-max, got [{lo}, {hi}]")));
    }
    if !a.clamp && (lo < -p.l || hi > p.safe_level()) {
        return Err(parisian_core::Error::Domain {
            what: "grid",
            value: if lo < -p.l { lo } else { hi },
            lo: -p.l,
            hi: p.safe_level(),
        }
        .into());
    }
    let path = csv_path(&a.output, "eval");
    if a.output.manifest_only {
        return emit_json(&manifest, None);
    }
    let grid = uniform_grid(lo, hi, a.points);
    let rows = eval_table(p, &grid, a.clamp)?;
    clock.lap("eval");
    clock.finish(&mut manifest);
    write_csv(
        &path,
        &EvalRow::HEADER.map(String::from),
        rows.iter().map(|r| r.values().to_vec()),
    )?;
    write_sidecar(&path, &manifest)
}

fn figure1(a: Figure1Args) -> Result<(), CliError> {
    let mut clock = Stopwatch::new(a.output.timings);
    let mut manifest = RunManifest::new(Command::Figure1(a.clone()), a.params.model(), vec![])?;
    let p = manifest.params;
    if a.points < 2 {
        return Err(CliError::Input("--points must be at least 2".into()));
    }
    if a.rhos.is_empty() {
        return Err(CliError::Input("--rhos needs at least one value".into()));
    }
    for &rho in &a.rhos {
        p.with_rho(rho).validate()?;
    }
    let path = csv_path(&a.output, "figure1");
    if a.output.manifest_only {
        return emit_json(&manifest, None);
    }
    let grid = uniform_grid(-p.l, p.safe_level(), a.points);
    let t = strategy_table(p, &a.rhos, &grid)?;
    clock.lap("figure1");
    clock.finish(&mut manifest);
    let rows = (0..t.w.len()).map(|i| {
        let mut row = vec![t.w[i], t.pi_0[i], t.pi_l[i]];
        row.extend(t.pi_rho.iter().map(|col| col[i]));
        row
    });
    write_csv(&path, &t.header(), rows)?;
    write_sidecar(&path, &manifest)
}

/// Closed-form value the estimate should be compared with, when one exists.
#[derive(Debug, Serialize)]
struct Oracle {
    name: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    manifest: &'a RunManifest,
    config: SimConfig,
    #[serde(flatten)]
    estimate: SimEstimate,
    oracle: Option<Oracle>,
}

fn oracle(p: &ModelParams, c: &SimConfig) -> Result<Option<Oracle>, CliError> {
    let (lo, hi) = (-p.l, p.safe_level());
    let w = c.w0.min(hi);
    let o = match (c.strategy, c.mode, c.barrier) {
        (StrategySpec::Optimal, Estimand::ParisianValue, Barrier::Truncated) => Some(Oracle {
            name: "psi",
            value: ValueFunction::new(*p)?.psi_clamped(w),
        }),
        (StrategySpec::LifetimeRuin, Estimand::ParisianValue, Barrier::Restricted) => Some(Oracle {
            name: "psi_restricted",
            value: RestrictedValue::new(*p)?.psi_restricted(w)?,
        }),
        (StrategySpec::OccupationLimit, Estimand::OccupationValue, Barrier::Truncated) => Some(Oracle {
            name: "m",
            value: OccupationValue::new(*p)?.m_clamped(w),
        }),
        (StrategySpec::OccupationLimit, Estimand::ParisianValue, Barrier::Truncated) => Some(Oracle {
            name: "rho_times_m",
            value: p.rho * OccupationValue::new(*p)?.m_clamped(w.max(lo)),
        }),
        _ => None,
    };
    Ok(o)
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::new(a.output.timings);
    let mut manifest = RunManifest::new(Command::Simulate(a.clone()), a.params.model(), vec![a.seed])?;
    let p = manifest.params;
    let config = SimConfig {
        paths: a.paths,
        dt: a.dt,
        clock: a.clock,
        barrier: a.barrier(),
        max_time: a.max_time,
        antithetic: a.antithetic,
        ..SimConfig::new(a.w0, a.strategy, a.mode, a.seed)
    }
    .validate(&p)?;
    if a.threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    if a.output.manifest_only {
        return emit_json(&manifest, a.output.out.as_deref());
    }
    let estimate = match a.threads {
        Some(n) => sim::estimate_value_with_threads(&p, &config, n)?,
        None => sim::estimate_value(&p, &config)?,
    };
    clock.lap("simulate");
    let oracle = oracle(&p, &config)?;
    clock.finish(&mut manifest);
    let doc = SimulateDoc {
        manifest: &manifest,
        config,
        estimate,
        oracle,
    };
    emit_json(&doc, a.output.out.as_deref())
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    manifest: &'a RunManifest,
    report: &'a VerifyReport,
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let mut clock = Stopwatch::new(a.output.timings);
    let mut manifest = RunManifest::new(Command::Verify(a.clone()), a.params.model(), vec![])?;
    let opts = VerifyOptions {
        rho_ladder: a.rho_ladder.clone(),
        figure_rhos: a.figure_rhos.clone(),
        sandwich_rhos: a.sandwich_rhos.clone(),
    };
    for &rho in [&opts.rho_ladder, &opts.figure_rhos, &opts.sandwich_rhos]
        .into_iter()
        .flatten()
        .flatten()
    {
        manifest.params.with_rho(rho).validate()?;
    }
    if a.output.manifest_only {
        return emit_json(&manifest, a.output.out.as_deref());
    }
    let report = run_suite(&manifest.params, a.suite, &opts)?;
    clock.lap("verify");
    clock.finish(&mut manifest);
    println!("{report}");
    let json_out = a
        .output
        .out
        .clone()
        .or_else(|| a.output.out_dir.as_ref().map(|d| d.join("verify.json")));
    if let Some(path) = json_out {
        emit_json(
            &VerifyDoc {
                manifest: &manifest,
                report: &report,
            },
            Some(&path),
        )?;
    }
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::Checks(n)),
    }
}

fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let m = RunManifest::load(&a.manifest)?;
    let mut cmd = m.command;
    let out = match &mut cmd {
        Command::Solve(x) => &mut x.output,
        Command::Eval(x) => &mut x.output,
        Command::Figure1(x) => &mut x.output,
        Command::Simulate(x) => &mut x.output,
        Command::Verify(x) => &mut x.output,
        Command::Replay(_) => return Err(CliError::Input("a manifest cannot record a replay".into())),
    };
    if a.out.is_some() {
        out.out = a.out;
    }
    out.out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    out.manifest_only = a.manifest_only;
    run(cmd)
}

fn csv_path(o: &OutputArgs, stem: &str) -> PathBuf {
    o.out.clone().unwrap_or_else(|| {
        o.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(format!("{stem}.csv"))
    })
}

/// `table.csv` -> `table.manifest.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn emit_json(doc: &impl Serialize, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    match out {
        Some(path) => {
            create_parent(path)?;
            std::fs::write(path, text).map_err(|e| CliError::io(path, e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn write_sidecar(csv: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    emit_json(manifest, Some(&sidecar_path(csv)))
}

/// `{:?}` on f64 is the shortest decimal that round-trips.
fn write_csv(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), CliError> {
    create_parent(path)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

//! Command implementations behind the `avor` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::engine::{run_scenario, write_risk_csv, Model, RiskTrace};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate_ratings, normalize_risk, onset_delta, rmse_per_phase, EvalReport, OnsetRecord,
    RatingTrace, ReportKey,
};
use crate::scenario::{
    characterize_cutin, load_scenario_with_window, segment_phases, Phase, PhaseSegmentation,
    Population, ScenarioTrace,
};

#[derive(Debug, Parser)]
#[command(name = "avor", version, about = "Perceived-risk engine for cut-in scenarios")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "AVOR_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute DRF/AVOR risk traces for one scenario.
    Run(RunArgs),
    /// Score model output against rating files.
    Eval(EvalArgs),
    /// Print cut-in kinematics of scenarios.
    Characterize(CharacterizeArgs),
    /// Serve scenarios and collect ratings over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Comma-separated model list.
    #[arg(long, default_value = "drf,avor", value_delimiter = ',')]
    pub models: Vec<Model>,
    /// Override the scenario's population level (O, A, A+R).
    #[arg(long)]
    pub population: Option<Population>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Directory of `avor-rating/1` JSON files.
    #[arg(long)]
    pub ratings: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CharacterizeArgs {
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Static UI bundle to serve at `/`.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

/// Parse arguments, run, and map the outcome to a process exit code:
/// 0 on success, 1 on validation errors, 2 on I/O errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        2
    } else {
        1
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref(), std::env::vars())?;
    match &cli.command {
        Command::Run(a) => {
            let out = cmd_run(a, &cfg, &cli.out)?;
            println!("wrote {}", out.csv.display());
            println!("wrote {}", out.summary.display());
        }
        Command::Eval(a) => {
            let out = cmd_eval(a, &cfg, &cli.out)?;
            println!("wrote {}", out.report_csv.display());
            match out.report.onset_fraction() {
                Some(f) => println!("onset fraction: {f:.2}"),
                None => println!("onset fraction: n/a"),
            }
        }
        Command::Characterize(a) => print!("{}", cmd_characterize(a, &cfg)?),
        Command::Serve(a) => crate::service::serve(a, &cfg)?,
    }
    Ok(())
}

pub fn load_trace(path: &Path, cfg: &Config) -> Result<ScenarioTrace> {
    load_scenario_with_window(path, cfg.engine.smoothing_window)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub traces: Vec<RiskTrace>,
}

pub fn cmd_run(args: &RunArgs, cfg: &Config, out_dir: &Path) -> Result<RunOutput> {
    let mut trace = load_trace(&args.scenario, cfg)?;
    if let Some(p) = args.population {
        trace = trace.with_population(p);
    }
    if args.models.is_empty() {
        return Err(Error::Invalid("no models requested".into()));
    }
    let traces = run_scenario(&trace, &args.models, &cfg.engine_params())?;
    let seg = segment_phases(&trace, &cfg.phases).ok();
    let norm_params = cfg.metrics.normalize_params(cfg.metrics.c_bar);
    let normalized: Vec<Option<Vec<f64>>> = traces
        .iter()
        .map(|t| normalize_risk(&t.value, &norm_params).ok())
        .collect();

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv = out_dir.join(format!("{}_risk.csv", trace.id));
    let mut buf = Vec::new();
    write_risk_csv(&mut buf, &traces, &normalized, seg.as_ref())
        .map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&csv, buf).map_err(|e| Error::io(&csv, e))?;

    let summary = out_dir.join(format!("{}_summary.txt", trace.id));
    let text = run_summary(&trace, &traces, &normalized, seg.as_ref(), cfg);
    std::fs::write(&summary, text).map_err(|e| Error::io(&summary, e))?;

    Ok(RunOutput {
        csv,
        summary,
        traces,
    })
}

/// Mean over the Phase-0 window and max over the Phase-I window.
fn phase_rise(t: &[f64], v: &[f64], seg: &PhaseSegmentation) -> Option<f64> {
    let pick = |phase: Phase| -> Vec<f64> {
        let (a, b) = seg.window(phase);
        t.iter()
            .zip(v)
            .filter(|(t, _)| crate::scenario::in_window(**t, a, b))
            .map(|(_, v)| *v)
            .collect()
    };
    let base = pick(Phase::Zero);
    let one = pick(Phase::I);
    if base.is_empty() || one.is_empty() {
        return None;
    }
    let mean = base.iter().sum::<f64>() / base.len() as f64;
    Some(one.iter().copied().fold(f64::MIN, f64::max) - mean)
}

/// Rise of a normalized risk series from its Phase-0 mean to its Phase-I
/// maximum.
pub fn normalized_rise(t: &[f64], normalized: &[f64], seg: &PhaseSegmentation) -> Option<f64> {
    phase_rise(t, normalized, seg)
}

fn run_summary(
    trace: &ScenarioTrace,
    traces: &[RiskTrace],
    normalized: &[Option<Vec<f64>>],
    seg: Option<&PhaseSegmentation>,
    cfg: &Config,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {} ({}), population {}, {} frames at dt {} s",
        trace.id,
        trace.risk_label,
        trace.population,
        trace.len(),
        trace.dt
    );
    match seg {
        Some(seg) => {
            for phase in [Phase::Zero, Phase::I, Phase::II, Phase::III] {
                let (a, b) = seg.window(phase);
                let _ = writeln!(s, "phase {phase}: [{a}, {b})");
            }
            if let Ok(c) = characterize_cutin(trace, seg) {
                let _ = writeln!(
                    s,
                    "cut-in: duration {:.3} s, v_lat avg {:.4} m/s, max {:.4} m/s, a_lat avg {:.4} m/s^2, initial distance {:.3} m",
                    c.duration, c.v_lat_avg, c.v_lat_max, c.a_lat_avg, c.initial_cutin_distance
                );
            }
        }
        None => {
            let _ = writeln!(s, "phases: no cut-in detected");
        }
    }
    let np = cfg.metrics.normalize_params(cfg.metrics.c_bar);
    let _ = writeln!(s, "normalization: c_bar {}, scale {}", np.c_bar, np.scale);
    for (tr, norm) in traces.iter().zip(normalized) {
        let lo = tr.value.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tr.value.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(s, "{}: raw min {lo}, raw max {hi}", tr.model);
        if let (Some(n), Some(seg)) = (norm, seg) {
            if let Some(r) = phase_rise(&tr.t, n, seg) {
                let _ = write!(s, ", normalized rise phase 0 -> I {r:.4}");
            }
        }
        let _ = writeln!(s);
    }
    s
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report_csv: PathBuf,
    pub onset_csv: PathBuf,
    pub report: EvalReport,
}

fn load_ratings(dir: &Path) -> Result<Vec<RatingTrace>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| RatingTrace::load(p)).collect()
}

pub fn cmd_eval(args: &EvalArgs, cfg: &Config, out_dir: &Path) -> Result<EvalOutput> {
    let ratings = load_ratings(&args.ratings)?;
    let mut report = EvalReport::default();
    let mut matched = 0usize;

    for path in &args.scenarios {
        let base = load_trace(path, cfg)?;
        let seg = segment_phases(&base, &cfg.phases)?;
        let times = base.times();
        let mut by_pop: BTreeMap<Population, Vec<&RatingTrace>> = BTreeMap::new();
        for r in ratings.iter().filter(|r| r.scenario_id == base.id) {
            by_pop.entry(r.population).or_default().push(r);
        }
        for (population, group) in by_pop {
            matched += group.len();
            let group: Vec<RatingTrace> = group.into_iter().cloned().collect();
            let trace = base.with_population(population);
            let (mean, _) = aggregate_ratings(&group, &times)?;

            let (p0, p1) = seg.window(Phase::Zero);
            let base_samples: Vec<f64> = times
                .iter()
                .zip(&mean)
                .filter(|(t, _)| crate::scenario::in_window(**t, p0, p1))
                .map(|(_, m)| *m)
                .collect();
            if base_samples.is_empty() {
                return Err(Error::EmptyWindow(format!(
                    "phase 0 of `{}` has no samples",
                    trace.id
                )));
            }
            let c_bar = base_samples.iter().sum::<f64>() / base_samples.len() as f64;
            let np = cfg.metrics.normalize_params(c_bar);

            for risk in run_scenario(&trace, &Model::ALL, &cfg.engine_params())? {
                let norm = normalize_risk(&risk.value, &np)?;
                for (phase, v) in rmse_per_phase(&norm, &mean, &times, &seg)? {
                    report.insert(
                        ReportKey {
                            model: risk.model,
                            population,
                            scenario: trace.risk_label,
                            phase,
                        },
                        v,
                    );
                }
            }
            for r in &group {
                let delta = onset_delta(r, &seg)?;
                report.onsets.push(OnsetRecord {
                    rater_id: r.rater_id.clone(),
                    scenario_id: r.scenario_id.clone(),
                    population,
                    delta,
                    onset: delta > cfg.metrics.onset_threshold,
                });
            }
        }
    }
    if matched == 0 {
        return Err(Error::NoRatings(format!(
            "no rating files in {} match the given scenarios",
            args.ratings.display()
        )));
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let report_csv = out_dir.join("eval_report.csv");
    let mut buf = Vec::new();
    report
        .write_csv(&mut buf)
        .map_err(|e| Error::io(&report_csv, e))?;
    std::fs::write(&report_csv, buf).map_err(|e| Error::io(&report_csv, e))?;

    let onset_csv = out_dir.join("onset_summary.csv");
    let mut f = std::fs::File::create(&onset_csv).map_err(|e| Error::io(&onset_csv, e))?;
    report
        .write_onset_summary(&mut f, cfg.metrics.onset_threshold)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(&onset_csv, e))?;

    Ok(EvalOutput {
        report_csv,
        onset_csv,
        report,
    })
}

pub fn cmd_characterize(args: &CharacterizeArgs, cfg: &Config) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:>6} {:>10} {:>12} {:>12} {:>12} {:>14}",
        "scenario", "label", "duration_s", "v_lat_avg", "v_lat_max", "a_lat_avg", "init_dist_m"
    );
    for path in &args.scenarios {
        let trace = load_trace(path, cfg)?;
        let seg = segment_phases(&trace, &cfg.phases)?;
        let c = characterize_cutin(&trace, &seg)?;
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:>10.3} {:>12.4} {:>12.4} {:>12.4} {:>14.3}",
            trace.id,
            trace.risk_label.as_str(),
            c.duration,
            c.v_lat_avg,
            c.v_lat_max,
            c.a_lat_avg,
            c.initial_cutin_distance
        );
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_run_arguments() {
        let cli = Cli::try_parse_from([
            "avor", "--out", "o", "run", "s.json", "--models", "drf,avor", "--population", "A+R",
        ])
        .unwrap();
        match cli.command {
            Command::Run(a) => {
                assert_eq!(a.models, vec![Model::Drf, Model::Avor]);
                assert_eq!(a.population, Some(Population::AR));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cli.out, PathBuf::from("o"));
    }

    #[test]
    fn missing_scenario_is_io_exit() {
        let dir = tempfile::tempdir().unwrap();
        let code = main_with_args([
            "avor".into(),
            "--out".into(),
            dir.path().as_os_str().to_owned(),
            "run".into(),
            dir.path().join("nope.json").into_os_string(),
        ]);
        assert_eq!(code, 2);
    }
}

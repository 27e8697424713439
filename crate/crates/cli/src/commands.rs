//! Subcommand bodies. Each returns the lines it printed so tests can inspect them.

use std::fs;
use std::path::{Path, PathBuf};

use fowler_core::experiments::tables::{compare_table, reproduce_table};
use fowler_core::experiments::{convergence_study, memory_sweep};
use fowler_core::io::{
    convergence_csv, memory_csv, sweep_csv, table_csv, trajectory_csv, truncation_csv, CsvDocument,
};
use fowler_core::nonlocal::{short_memory_warning, DiscretizationKind, Gaussian, TruncationPolicy};
use fowler_core::schemes::{integrate, make_initial_bump, SchemeConfig};
use fowler_core::spectral::{cfl_mod, SpectralAnalyzer, DEFAULT_SAMPLES, DEFAULT_THETA0};

use crate::config::{convergence_config, truncation_config, RunConfig};
use crate::error::CliError;

/// Text written to stdout and stderr by a subcommand.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    pub stdout: Vec<String>,
    pub stderr: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl Report {
    fn say(&mut self, line: impl Into<String>) {
        self.stdout.push(line.into());
    }

    fn warn(&mut self, line: impl Into<String>) {
        self.stderr.push(format!("warning: {}", line.into()));
    }

    fn write(&mut self, dir: &Path, name: &str, doc: &CsvDocument) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, doc.render()).map_err(|e| CliError::io(&path, e))?;
        self.say(format!("wrote {}", path.display()));
        self.written.push(path);
        Ok(())
    }
}

/// A failure after some output was produced.
#[derive(Debug)]
pub struct Failure {
    pub error: CliError,
    pub report: Report,
}

impl From<CliError> for Box<Failure> {
    fn from(error: CliError) -> Self {
        Box::new(Failure {
            error,
            report: Report::default(),
        })
    }
}

impl From<fowler_core::Error> for Box<Failure> {
    fn from(e: fowler_core::Error) -> Self {
        CliError::from(e).into()
    }
}

pub type Outcome = Result<Report, Box<Failure>>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn out_dir(cli: Option<&Path>, config: Option<&str>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn simulate(config: &Path, out: Option<&Path>, kind: Option<DiscretizationKind>) -> Outcome {
    let cfg = RunConfig::from_text(&read(config)?, kind)?;
    let mut report = Report::default();
    let s = &cfg.scheme;
    let groups = s.groups();
    let cfl = cfl_mod(s.kind, &groups);
    report.say(format!(
        "kind {} flux {} Cr {:.6} Df {:.6} Fo {:.6} CFL_mod {:.4}",
        s.kind, s.flux, groups.cr, groups.df, groups.fo, cfl
    ));
    if cfl > 1.0 {
        report.warn(format!(
            "CFL_mod = {cfl:.4} > 1: the sufficient stability condition does not hold"
        ));
    }
    if let Some(w) = short_memory_warning(s.kind, &s.truncation, s.grid.dx()) {
        report.warn(w);
    }
    let u0 = make_initial_bump(
        &s.grid,
        cfg.initial.center,
        cfg.initial.width,
        cfg.initial.height,
    )?;
    let traj = integrate(&u0, s, cfg.snapshot_every)?;
    let dir = out_dir(out, cfg.output_dir.as_deref());
    if let Err(e) = report.write(&dir, "trajectory.csv", &trajectory_csv(&traj)) {
        return Err(Box::new(Failure { error: e, report }));
    }
    match traj.blow_up {
        Some(b) => Err(Box::new(Failure {
            error: CliError::Numerical(format!(
                "solution exceeded {:e} at step {} (t = {}); partial trajectory kept",
                fowler_core::schemes::BLOW_UP_THRESHOLD,
                b.step,
                b.time
            )),
            report,
        })),
        None => {
            report.say(format!(
                "completed {} steps to t = {}, max |u| = {:.6e}",
                traj.steps_completed,
                traj.last().time(),
                traj.last().max_abs()
            ));
            Ok(report)
        }
    }
}

pub fn analyze(
    config: &Path,
    out: Option<&Path>,
    kind: Option<DiscretizationKind>,
    theta0: Option<f64>,
    samples: Option<usize>,
) -> Outcome {
    let cfg = RunConfig::from_text(&read(config)?, kind)?;
    let theta0 = theta0.or(cfg.theta0).unwrap_or(DEFAULT_THETA0);
    let samples = samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    if samples < 2 {
        return Err(CliError::Validation("--samples needs at least 2".into()).into());
    }
    let s = &cfg.scheme;
    // the spectral weights are grid free; a memory length becomes a term count
    let truncation = if cfg.default_truncation {
        TruncationPolicy::default()
    } else {
        match s.truncation {
            TruncationPolicy::Memory(_) => TruncationPolicy::Terms(
                s.truncation
                    .terms(s.grid.dx())?
                    .expect("memory gives a term count"),
            ),
            t => t,
        }
    };
    let an = SpectralAnalyzer::shared();
    let report_ = an.stability_verdict(s.kind, &s.params, &s.grid, truncation, theta0, samples)?;
    let sweep = an.sweep(s.kind, truncation, &s.groups(), samples)?;
    let mut report = Report::default();
    let g = s.groups();
    report.say(format!(
        "kind {} Cr {:.6} Df {:.6} Fo {:.6} truncation {:?}",
        s.kind, g.cr, g.df, g.fo, truncation
    ));
    report.say(format!(
        "CFL_mod = {:.6} (<= 1: {})",
        report_.cfl_mod, report_.cfl_ok
    ));
    report.say(format!(
        "high-frequency condition at theta0 = {theta0:.6}: {}",
        report_.highfreq_ok
    ));
    report.say(format!(
        "max |g| over (theta0, pi] = {:.10} at theta = {:.6} ({} samples)",
        report_.max_high_freq_gain, report_.argmax_theta, report_.samples
    ));
    if let Some(w) = sweep
        .iter()
        .filter(|x| x.theta > theta0)
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    {
        report.say(format!(
            "max |g|/|G_cont| over (theta0, pi] = {:.6} at theta = {:.6}",
            w.ratio, w.theta
        ));
    }
    report.say(format!(
        "verdict: {}",
        if report_.verdict {
            "stable"
        } else {
            "unstable"
        }
    ));
    if report_.cfl_mod > 1.0 {
        report.warn(format!("CFL_mod = {:.4} > 1", report_.cfl_mod));
    }
    let dir = out_dir(out, cfg.output_dir.as_deref());
    let effective = SchemeConfig { truncation, ..*s };
    report
        .write(&dir, "sweep.csv", &sweep_csv(&sweep, &report_, &effective))
        .map_err(Box::<Failure>::from)?;
    Ok(report)
}

pub fn tables(ids: &[u8], out: Option<&Path>) -> Outcome {
    let ids: Vec<u8> = if ids.is_empty() {
        vec![1, 2, 3]
    } else {
        ids.to_vec()
    };
    let mut report = Report::default();
    let dir = out_dir(out, None);
    for &id in &ids {
        let rows = reproduce_table(id)?;
        let cmp = compare_table(id, &rows)?;
        let worst = cmp.iter().map(|c| c.deviation()).fold(0.0, f64::max);
        let errata = cmp.iter().filter(|c| c.erratum.is_some()).count();
        report.say(format!(
            "table {id}: {} rows, max deviation from printed values {worst:.2e} ({errata} printed cells corrected)",
            rows.len()
        ));
        report
            .write(&dir, &format!("table{id}.csv"), &table_csv(id, &rows)?)
            .map_err(Box::<Failure>::from)?;
    }
    Ok(report)
}

pub fn converge(config: &Path, out: Option<&Path>, kind: Option<DiscretizationKind>) -> Outcome {
    let text = read(config)?;
    let c = convergence_config(&text, kind)?;
    let r = convergence_study(&c)?;
    let mut report = Report::default();
    for (dx, e) in r.dx_values.iter().zip(&r.e1_values) {
        report.say(format!("dx {dx:.6e} E1 {e:.6e}"));
    }
    report.say(format!(
        "kind {} fitted slope {:.4}",
        c.kind, r.fitted_slope
    ));
    let dir = out_dir(out, output_dir(&text)?.as_deref());
    report
        .write(&dir, "convergence.csv", &convergence_csv(&c, &r))
        .map_err(Box::<Failure>::from)?;
    Ok(report)
}

pub fn truncation(config: &Path, out: Option<&Path>, kind: Option<DiscretizationKind>) -> Outcome {
    let text = read(config)?;
    let run = truncation_config(&text, kind)?;
    let phi = Gaussian {
        center: run.config.x0,
        width: run.width,
        height: 1.0,
    };
    let r = fowler_core::experiments::truncation::truncation_order_study_with(&run.config, &phi)?;
    let sweep = memory_sweep(&run.config, &phi, run.sweep_dx, &run.sweep_memories)?;
    let mut report = Report::default();
    for e in &r.error_values {
        report.say(format!(
            "dx {:.6e} |E| {:.6e} (nonlocal part {:.3e})",
            e.dx, e.total, e.nonlocal
        ));
    }
    report.say(format!(
        "kind {} fitted order {:.4}",
        run.config.kind, r.fitted_order
    ));
    for p in &sweep {
        report.say(format!(
            "memory {:.4} at dx {:.4e}: memory part {:.3e}",
            p.memory, run.sweep_dx, p.memory_effect
        ));
    }
    let dir = out_dir(out, output_dir(&text)?.as_deref());
    report
        .write(&dir, "truncation.csv", &truncation_csv(&run.config, &r))
        .map_err(Box::<Failure>::from)?;
    report
        .write(&dir, "memory.csv", &memory_csv(&run.config, &sweep))
        .map_err(Box::<Failure>::from)?;
    Ok(report)
}

fn output_dir(text: &str) -> Result<Option<String>, CliError> {
    let raw = crate::config::RawConfig::parse(text)?;
    Ok(raw.output_dir())
}

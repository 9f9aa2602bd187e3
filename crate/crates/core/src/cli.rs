//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 failed verification, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_config, ReferenceSource, RunConfig, SnapshotFormat};
use crate::diagnostics::{
    density, rate_fit, record, reference_profile, write_density_csv, write_field_csv, write_fit_summary,
    write_records_csv, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::lyapunov::scan_drift_inequality;
use crate::solver::run::check_resumable;
use crate::solver::{
    default_initial_condition, read_checkpoint, run, steady_state_reference, write_checkpoint, Checkpoint, Field,
    Observer, PhaseGrid, Start, SteadyOptions, Stepper,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VERIFY_FAIL: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "kfp", version, about = "Kinetic Fokker-Planck solver and Lyapunov certifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Recorded in the manifest; the solver itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver and write snapshots, densities and diagnostics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Scan the drift inequality for the `[lyapunov]` section.
    VerifyLyapunov {
        #[command(flatten)]
        common: Common,
    },
    /// Fit the configured decay law to a `(t, distance)` series.
    FitRate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        series: PathBuf,
    },
    /// Integrate to a numerical steady state.
    SteadyState {
        #[command(flatten)]
        common: Common,
    },
    /// Write the profile `exp(-δ E^{β/2})` on the configured grid.
    ExportReference {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonFinite { .. } | Error::SteadyStateNotReached { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Simulate { common, resume } => Session::open("simulate", &common)?.simulate(resume.as_deref()),
        Command::VerifyLyapunov { common } => Session::open("verify-lyapunov", &common)?.verify(),
        Command::FitRate { common, series } => Session::open("fit-rate", &common)?.fit_rate(&series),
        Command::SteadyState { common } => Session::open("steady-state", &common)?.steady_state(),
        Command::ExportReference { common } => Session::open("export-reference", &common)?.export_reference(),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    wall_time_seconds: f64,
    files: Vec<String>,
    config: &'a RunConfig,
}

struct Session {
    command: &'static str,
    config: RunConfig,
    dir: PathBuf,
    seed: Option<u64>,
    started: Instant,
    files: Vec<String>,
}

impl Session {
    fn open(command: &'static str, common: &Common) -> Result<Self> {
        let text = fs::read_to_string(&common.config)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", common.config.display())]))?;
        let config = parse_config(&text)?;
        let dir = common.output.clone().unwrap_or_else(|| config.output.directory.clone());
        fs::create_dir_all(&dir)?;
        Ok(Self { command, config, dir, seed: common.seed, started: Instant::now(), files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        self.note(name);
        Ok(BufWriter::new(fs::File::create(self.dir.join(name))?))
    }

    fn note(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    fn finish(mut self, status: &str) -> Result<()> {
        self.files.sort();
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            status,
            seed: self.seed,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            files: self.files.clone(),
            config: &self.config,
        };
        let text = toml::to_string(&manifest).expect("manifest is always representable");
        fs::write(self.dir.join("manifest.toml"), text)?;
        Ok(())
    }

    fn initial_field(&self, grid: &PhaseGrid) -> Result<Field> {
        match &self.config.initial.file {
            Some(path) => read_tabulated_field(path, grid),
            None => Ok(default_initial_condition(grid)),
        }
    }

    fn simulate(mut self, resume: Option<&Path>) -> Result<u8> {
        let params = self.config.model_params()?;
        let grid = self.config.phase_grid()?;
        let settings = self.config.run_settings()?;
        let mut stepper = Stepper::new(grid, &params)?;
        let (field, start) = match resume {
            Some(path) => {
                let c = read_checkpoint(path)?;
                check_resumable(&c, &grid, &settings)?;
                (c.field, Start { step: c.step })
            }
            None => (self.initial_field(&grid)?, Start::default()),
        };
        let reference = match self.config.diagnostics.reference {
            ReferenceSource::None => None,
            ReferenceSource::Profile => Some(reference_profile(&grid, &params, self.config.diagnostics.delta, true)?),
            ReferenceSource::File => {
                let path = self.config.diagnostics.reference_file.as_ref().expect("validated");
                let c = read_checkpoint(path)?;
                field.check_grid(&c.field)?;
                Some(c.field)
            }
            ReferenceSource::SteadyState => {
                let reached =
                    steady_state_reference(&mut stepper, field.clone(), &self.steady_options(&grid, &params))?;
                Some(reached.field)
            }
        };

        let mut sink = SimulationSink {
            dir: self.dir.clone(),
            format: self.config.output.snapshot_format,
            dt: settings.effective_dt(),
            reference,
            records: Vec::new(),
            density_rows: Vec::new(),
            files: Vec::new(),
        };
        let outcome = run(&mut stepper, &settings, field, start, &mut sink);
        for f in std::mem::take(&mut sink.files) {
            self.note(&f);
        }
        let mut w = self.create("diagnostics.csv")?;
        write_records_csv(&mut w, &sink.records)?;
        w.flush()?;
        let mut w = self.create("density_series.csv")?;
        w.write_all(b"step,time,x,rho\n")?;
        for row in &sink.density_rows {
            w.write_all(row.as_bytes())?;
        }
        w.flush()?;
        match outcome {
            Ok(_) => {
                self.finish("ok")?;
                Ok(EXIT_OK)
            }
            Err(e @ Error::NonFinite { .. }) => {
                eprintln!("error: {e}; last good state kept in checkpoint.bin");
                self.finish("aborted")?;
                Ok(EXIT_NUMERICAL)
            }
            Err(e) => Err(e),
        }
    }

    fn steady_options(&self, grid: &PhaseGrid, params: &crate::model::ModelParams) -> SteadyOptions {
        let d = &self.config.diagnostics;
        SteadyOptions {
            dt: self.config.dt(grid, params),
            tol_rate: d.steady_tol,
            window_steps: d.steady_window,
            max_steps: d.steady_max_steps,
        }
    }

    fn verify(mut self) -> Result<u8> {
        let params = self.config.model_params()?;
        let spec = self.config.lyapunov.spec();
        let report = scan_drift_inequality(&params, &spec, &self.config.lyapunov.scan())?;
        let text = toml::to_string(&report).expect("report is always representable");
        let mut w = self.create("certificate.toml")?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        println!("{}", report.summary());
        self.finish(if report.passed { "pass" } else { "fail" })?;
        Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAIL })
    }

    fn fit_rate(mut self, series: &Path) -> Result<u8> {
        let rows = read_series(series)?;
        let fit = rate_fit(&rows, self.config.diagnostics.rate_mode(), self.config.diagnostics.burn_fraction)?;
        let mut w = self.create("rate_fit.txt")?;
        write_fit_summary(&mut w, &fit)?;
        w.flush()?;
        println!("fitted = {:.6e}  residual_rms = {:.3e}  samples = {}", fit.fitted, fit.residual_rms, fit.samples);
        self.finish("ok")?;
        Ok(EXIT_OK)
    }

    fn steady_state(mut self) -> Result<u8> {
        let params = self.config.model_params()?;
        let grid = self.config.phase_grid()?;
        let mut stepper = Stepper::new(grid, &params)?;
        let opts = self.steady_options(&grid, &params);
        let reached = steady_state_reference(&mut stepper, self.initial_field(&grid)?, &opts)?;
        self.note("steady_state.bin");
        write_checkpoint(
            &self.dir.join("steady_state.bin"),
            &Checkpoint { field: reached.field.clone(), step: reached.steps, dt: opts.dt },
        )?;
        let mut w = self.create("steady_density.csv")?;
        write_density_csv(&mut w, &grid.xs(), &density(&reached.field))?;
        w.flush()?;
        println!("steady state after {} steps (rate {:.3e})", reached.steps, reached.rate);
        self.finish("ok")?;
        Ok(EXIT_OK)
    }

    fn export_reference(mut self) -> Result<u8> {
        let params = self.config.model_params()?;
        let grid = self.config.phase_grid()?;
        let field = reference_profile(&grid, &params, self.config.diagnostics.delta, true)?;
        match self.config.output.snapshot_format {
            SnapshotFormat::Csv => {
                let mut w = self.create("reference.csv")?;
                write_field_csv(&mut w, &field)?;
                w.flush()?;
            }
            SnapshotFormat::Binary => {
                self.note("reference.bin");
                write_checkpoint(&self.dir.join("reference.bin"), &Checkpoint { field, step: 0, dt: 0.0 })?;
            }
        }
        self.finish("ok")?;
        Ok(EXIT_OK)
    }
}

struct SimulationSink {
    dir: PathBuf,
    format: SnapshotFormat,
    dt: f64,
    reference: Option<Field>,
    records: Vec<DiagnosticsRecord>,
    density_rows: Vec<String>,
    files: Vec<String>,
}

impl SimulationSink {
    fn checkpoint(&mut self, step: u64, field: &Field) -> Result<()> {
        write_checkpoint(&self.dir.join("checkpoint.bin"), &Checkpoint { field: field.clone(), step, dt: self.dt })?;
        if !self.files.iter().any(|f| f == "checkpoint.bin") {
            self.files.push("checkpoint.bin".into());
        }
        Ok(())
    }
}

impl Observer for SimulationSink {
    fn on_snapshot(&mut self, step: u64, field: &Field) -> Result<()> {
        let name = match self.format {
            SnapshotFormat::Csv => {
                let name = format!("snapshot_{step:010}.csv");
                let mut w = BufWriter::new(fs::File::create(self.dir.join(&name))?);
                write_field_csv(&mut w, field)?;
                w.flush()?;
                name
            }
            SnapshotFormat::Binary => {
                let name = format!("snapshot_{step:010}.bin");
                write_checkpoint(&self.dir.join(&name), &Checkpoint { field: field.clone(), step, dt: self.dt })?;
                name
            }
        };
        self.files.push(name);
        for (x, r) in field.grid.xs().iter().zip(density(field)) {
            self.density_rows.push(format!("{step},{:.16e},{x:.16e},{r:.16e}\n", field.time));
        }
        self.checkpoint(step, field)
    }

    fn on_diagnostics(&mut self, step: u64, field: &Field) -> Result<()> {
        self.records.push(record(step, field, self.reference.as_ref(), None)?);
        Ok(())
    }

    fn on_abort(&mut self, step: u64, last_good: &Field) -> Result<()> {
        self.checkpoint(step, last_good)
    }
}

fn split_row(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn is_header(line: &str) -> bool {
    split_row(line).first().is_some_and(|c| c.parse::<f64>().is_err())
}

/// Reads `t,distance` rows (an optional header line is skipped). A file
/// written by `simulate` is accepted too: its `time` and
/// `l1_distance_to_reference` columns are used.
pub fn read_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let (mut t_col, mut d_col) = (0, 1);
    if let Some((_, first)) = lines.peek() {
        if is_header(first) {
            let names = split_row(first);
            if let (Some(t), Some(d)) =
                (names.iter().position(|n| *n == "time"), names.iter().position(|n| *n == "l1_distance_to_reference"))
            {
                (t_col, d_col) = (t, d);
            }
            lines.next();
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let cells = split_row(line);
        let get = |c: usize| -> Result<f64> {
            let raw = cells
                .get(c)
                .ok_or_else(|| Error::Parse { line: i + 1, reason: format!("missing column {}", c + 1) })?;
            raw.parse().map_err(|_| Error::Parse { line: i + 1, reason: format!("{raw:?} is not a number") })
        };
        out.push((get(t_col)?, get(d_col)?));
    }
    if out.is_empty() {
        return Err(Error::Fit(format!("{} holds no data rows", path.display())));
    }
    Ok(out)
}

/// Reads `x,v,f` rows in grid order (x outer, v inner), checking the
/// coordinates against the cell centres.
pub fn read_tabulated_field(path: &Path, grid: &PhaseGrid) -> Result<Field> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    if lines.peek().is_some_and(|(_, l)| is_header(l)) {
        lines.next();
    }
    for (i, line) in lines {
        let k = values.len();
        if k >= grid.len() {
            return Err(Error::Parse { line: i + 1, reason: format!("more than {} rows", grid.len()) });
        }
        let cells = split_row(line);
        if cells.len() != 3 {
            return Err(Error::Parse { line: i + 1, reason: format!("expected 3 columns, found {}", cells.len()) });
        }
        let mut nums = [0.0; 3];
        for (j, c) in cells.iter().enumerate() {
            nums[j] = c.parse().map_err(|_| Error::Parse { line: i + 1, reason: format!("{c:?} is not a number") })?;
        }
        let (n, m) = (k / grid.nv, k % grid.nv);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
        if !close(nums[0], grid.x(n)) || !close(nums[1], grid.v(m)) {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected cell centre ({}, {})", grid.x(n), grid.v(m)),
            });
        }
        values.push(nums[2]);
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} rows for a grid of {} cells", values.len(), grid.len())));
    }
    Field::from_values(*grid, values)
}

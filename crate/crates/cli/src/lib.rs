//! Configuration, dispatch, and output writing for the `wavebell` binary.
//!
//! A run is described by one TOML file:
//!
//! ```toml
//! mode = "chsh"            # fringe | chsh | scan | sample
//!
//! [experiment]
//! gamma_a = 0.01           # reference amplitudes (required)
//! gamma_b = 0.01
//! alpha = 0.0              # reference phases, radians (default 0)
//! beta = 0.0
//! phi = 0.0                # source path phase, radians (default 0)
//! cutoff = 4               # per-mode occupation cutoff (default 4)
//!
//! [settings]               # chsh and scan modes; optional for sample
//! alpha_1 = 0.0            # detected wave phases, radians
//! alpha_2 = 1.5707963267948966
//! beta_1 = 0.7853981633974483
//! beta_2 = -0.7853981633974483
//!
//! [grid]                   # fringe (phase grid) and scan (gamma grid)
//! count = 64
//! start = 0.0              # fringe default [0, 2*pi), scan has no default
//! stop = 6.283185307179586
//!
//! [sample]                 # sample mode
//! shots = 1000000
//! seed = 42
//!
//! [output]
//! path = "out.csv"
//! format = "csv"           # csv | json (default csv)
//! ```
//!
//! All angles are radians; there is no degree input anywhere. Every output
//! file embeds the fully resolved configuration (as `# `-prefixed TOML
//! comment lines in CSV, as a `config` object in JSON), so a result can be
//! reproduced from the file alone. Files are written atomically: content
//! goes to a temporary file in the destination directory which is then
//! renamed over the target.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use wavebell::bell::{
    chsh, exact_provider, fringe_scan, visibility, ChshSettings, NormalizedTable,
};
use wavebell::experiment::ExperimentConfig;
use wavebell::sampling::{estimate_chsh, sample, CountRecord, DetectionPattern, ShotPlan};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Engine(#[from] wavebell::Error),
}

impl CliError {
    /// Exit codes: 2 for configuration problems, 3 for numerical or
    /// truncation failures inside the engine.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Engine(wavebell::Error::InvalidConfig(_)) => 2,
            CliError::Engine(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fringe,
    Chsh,
    Scan,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub count: usize,
    #[serde(default)]
    pub start: f64,
    #[serde(default = "default_grid_stop")]
    pub stop: f64,
}

fn default_grid_stop() -> f64 {
    std::f64::consts::TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// One fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<ChshSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    pub output: OutputSpec,
}

impl RunConfig {
    /// Parse and validate a TOML run configuration.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        match self.mode {
            Mode::Fringe => {
                let grid = self.require_grid()?;
                if grid.count < 8 {
                    return Err(CliError::Config(format!(
                        "fringe mode needs grid.count >= 8, got {}",
                        grid.count
                    )));
                }
            }
            Mode::Chsh => {
                self.require_settings()?;
            }
            Mode::Scan => {
                self.require_settings()?;
                let grid = self.require_grid()?;
                if grid.count == 0 {
                    return Err(CliError::Config("scan mode needs grid.count >= 1".into()));
                }
                if grid.start <= 0.0 {
                    return Err(CliError::Config(format!(
                        "scan mode sweeps gamma and needs grid.start > 0, got {}",
                        grid.start
                    )));
                }
            }
            Mode::Sample => {
                let spec = self.require_sample()?;
                if spec.shots == 0 {
                    return Err(CliError::Config("sample.shots must be at least 1".into()));
                }
            }
        }
        if let Some(grid) = &self.grid {
            if grid.stop <= grid.start {
                return Err(CliError::Config(format!(
                    "grid.stop ({}) must exceed grid.start ({})",
                    grid.stop, grid.start
                )));
            }
        }
        Ok(())
    }

    fn require_settings(&self) -> Result<&ChshSettings> {
        self.settings.as_ref().ok_or_else(|| {
            CliError::Config(format!("{:?} mode needs a [settings] section", self.mode))
        })
    }

    fn require_grid(&self) -> Result<&GridSpec> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{:?} mode needs a [grid] section", self.mode)))
    }

    fn require_sample(&self) -> Result<&SampleSpec> {
        self.sample
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{:?} mode needs a [sample] section", self.mode)))
    }
}

/// What a completed run hands back to the caller.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// One-line summary for standard output.
    pub summary: String,
    pub output_path: PathBuf,
}

/// Execute a validated configuration and write its output file atomically.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let (summary, body) = match config.mode {
        Mode::Fringe => run_fringe(config)?,
        Mode::Chsh => run_chsh(config)?,
        Mode::Scan => run_scan(config)?,
        Mode::Sample => run_sample(config)?,
    };
    write_atomically(&config.output.path, &body)?;
    Ok(RunOutcome {
        summary,
        output_path: config.output.path.clone(),
    })
}

// ---------------------------------------------------------------- fringe --

#[derive(Serialize)]
struct FringeRow {
    delta_rad: f64,
    p11: f64,
    p12: f64,
    p21: f64,
    p22: f64,
    s1a: f64,
    s2a: f64,
    s1b: f64,
    s2b: f64,
}

#[derive(Serialize)]
struct FringeResults {
    visibility: f64,
    rows: Vec<FringeRow>,
}

fn run_fringe(config: &RunConfig) -> Result<(String, String)> {
    let grid = config.require_grid()?;
    let deltas = phase_grid(grid);
    let scan = fringe_scan(&config.experiment, &deltas)?;
    let vis = visibility(&scan)?;
    let rows: Vec<FringeRow> = scan
        .iter()
        .map(|(delta, t)| FringeRow {
            delta_rad: *delta,
            p11: t.p[0][0],
            p12: t.p[0][1],
            p21: t.p[1][0],
            p22: t.p[1][1],
            s1a: t.singles[0],
            s2a: t.singles[1],
            s1b: t.singles[2],
            s2b: t.singles[3],
        })
        .collect();

    let summary = format!(
        "fringe: {} points, p(A1,B1) visibility = {:.6}",
        rows.len(),
        vis
    );
    let body = match config.output.format {
        OutputFormat::Json => to_json(config, &FringeResults { visibility: vis, rows })?,
        OutputFormat::Csv => {
            let mut out = csv_preamble(config)?;
            out.push_str("delta_rad,p11,p12,p21,p22,s1A,s2A,s1B,s2B\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.delta_rad, r.p11, r.p12, r.p21, r.p22, r.s1a, r.s2a, r.s1b, r.s2b
                )
                .expect("string write");
            }
            out
        }
    };
    Ok((summary, body))
}

// ------------------------------------------------------------------ chsh --

#[derive(Serialize)]
struct ChshResults {
    s_value: f64,
    /// S with Alice's settings shifted by the source phase, the value the
    /// same settings would give at phi = 0.
    s_compensated: f64,
    violated: bool,
    correlations: [f64; 4],
    setting_pairs: [(f64, f64); 4],
    tables: [NormalizedTable; 4],
}

fn run_chsh(config: &RunConfig) -> Result<(String, String)> {
    let settings = config.require_settings()?;
    let raw = chsh(settings, exact_provider(config.experiment))?;
    let compensated = chsh(
        &settings.compensated_for_source_phase(config.experiment.phi),
        exact_provider(config.experiment),
    )?;
    let results = ChshResults {
        s_value: raw.s_value,
        s_compensated: compensated.s_value,
        violated: raw.violated,
        correlations: raw.correlations,
        setting_pairs: settings.pairs(),
        tables: raw.tables,
    };

    let summary = format!(
        "chsh: S = {:.6} (phase-compensated {:.6}), classical bound 2, violated = {}",
        results.s_value, results.s_compensated, results.violated
    );
    let body = match config.output.format {
        OutputFormat::Json => to_json(config, &results)?,
        OutputFormat::Csv => {
            let mut out = csv_preamble(config)?;
            out.push_str("pair,alpha_prime_rad,beta_prime_rad,correlation,p11,p12,p21,p22\n");
            for (k, ((a, b), t)) in results
                .setting_pairs
                .iter()
                .zip(&results.tables)
                .enumerate()
            {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    k, a, b, results.correlations[k], t[0][0], t[0][1], t[1][0], t[1][1]
                )
                .expect("string write");
            }
            out
        }
    };
    Ok((summary, body))
}

// ------------------------------------------------------------------ scan --

#[derive(Serialize)]
struct ScanRow {
    gamma: f64,
    s_exact: f64,
    s_approx: f64,
    visibility: f64,
}

/// Fringe resolution used for the per-gamma visibility column.
const SCAN_VISIBILITY_GRID: usize = 64;

fn run_scan(config: &RunConfig) -> Result<(String, String)> {
    let settings = config.require_settings()?;
    let grid = config.require_grid()?;
    let mut rows = Vec::with_capacity(grid.count);
    for gamma in gamma_grid(grid) {
        let base = ExperimentConfig {
            gamma_a: gamma,
            gamma_b: gamma,
            ..config.experiment
        };
        let s_exact = chsh(settings, exact_provider(base))?.s_value;
        let s_approx = chsh(settings, wavebell::bell::approx_provider(base))?.s_value;
        let deltas = wavebell::bell::uniform_delta_grid(SCAN_VISIBILITY_GRID);
        let vis = visibility(&fringe_scan(&base, &deltas)?)?;
        rows.push(ScanRow {
            gamma,
            s_exact,
            s_approx,
            visibility: vis,
        });
    }

    let summary = format!(
        "scan: {} gammas in [{}, {}], S_exact {:.4} -> {:.4}",
        rows.len(),
        rows.first().map(|r| r.gamma).unwrap_or(f64::NAN),
        rows.last().map(|r| r.gamma).unwrap_or(f64::NAN),
        rows.first().map(|r| r.s_exact).unwrap_or(f64::NAN),
        rows.last().map(|r| r.s_exact).unwrap_or(f64::NAN),
    );
    let body = match config.output.format {
        OutputFormat::Json => to_json(config, &rows)?,
        OutputFormat::Csv => {
            let mut out = csv_preamble(config)?;
            out.push_str("gamma,S_exact,S_approx,visibility\n");
            for r in &rows {
                writeln!(out, "{},{},{},{}", r.gamma, r.s_exact, r.s_approx, r.visibility)
                    .expect("string write");
            }
            out
        }
    };
    Ok((summary, body))
}

// ---------------------------------------------------------------- sample --

#[derive(Serialize)]
struct SampleCount {
    pattern: String,
    count: u64,
    frequency: f64,
}

#[derive(Serialize)]
struct SinglePointSample {
    shots: u64,
    seed: u64,
    counts: Vec<SampleCount>,
}

#[derive(Serialize)]
struct PairSample {
    alpha_prime: f64,
    beta_prime: f64,
    seed: u64,
    counts: Vec<SampleCount>,
}

#[derive(Serialize)]
struct ChshSample {
    s_hat: f64,
    stderr: f64,
    shots_per_pair: u64,
    pairs: Vec<PairSample>,
}

fn count_rows(record: &CountRecord, prefix: &str) -> Vec<SampleCount> {
    DetectionPattern::ALL
        .iter()
        .map(|&p| SampleCount {
            pattern: format!("{prefix}{}", p.label()),
            count: record.count(p),
            frequency: record.frequency(p),
        })
        .collect()
}

fn run_sample(config: &RunConfig) -> Result<(String, String)> {
    let spec = config.require_sample()?;
    let (summary, rows, json): (String, Vec<SampleCount>, serde_json::Value) =
        if let Some(settings) = &config.settings {
            // Four plans, one per setting pair, with consecutive seeds.
            let pairs = settings.pairs();
            let plans: [ShotPlan; 4] = std::array::from_fn(|k| {
                ShotPlan::for_setting_pair(
                    &config.experiment,
                    spec.shots,
                    spec.seed + k as u64,
                    pairs[k].0,
                    pairs[k].1,
                )
            });
            let (s_hat, stderr) = estimate_chsh(&plans, settings)?;
            let mut rows = Vec::new();
            let mut pair_docs = Vec::new();
            for (k, plan) in plans.iter().enumerate() {
                // seeded draws are deterministic, so this reproduces exactly
                // the counts behind the estimate
                let record = sample(plan)?;
                rows.extend(count_rows(&record, &format!("pair{k}_")));
                pair_docs.push(PairSample {
                    alpha_prime: pairs[k].0,
                    beta_prime: pairs[k].1,
                    seed: plan.seed,
                    counts: count_rows(&record, ""),
                });
            }
            let doc = ChshSample {
                s_hat,
                stderr,
                shots_per_pair: spec.shots,
                pairs: pair_docs,
            };
            (
                format!(
                    "sample: S_hat = {s_hat:.4} +- {stderr:.4} over 4 x {} shots (seed {})",
                    spec.shots, spec.seed
                ),
                rows,
                serde_json::to_value(doc).expect("serializable"),
            )
        } else {
            let record = sample(&ShotPlan::new(spec.shots, spec.seed, config.experiment))?;
            let rows = count_rows(&record, "");
            let doc = SinglePointSample {
                shots: spec.shots,
                seed: spec.seed,
                counts: count_rows(&record, ""),
            };
            (
                format!(
                    "sample: {} shots, {} coincidences (seed {})",
                    spec.shots,
                    record.coincidence_total(),
                    spec.seed
                ),
                rows,
                serde_json::to_value(doc).expect("serializable"),
            )
        };

    let body = match config.output.format {
        OutputFormat::Json => to_json(config, &json)?,
        OutputFormat::Csv => {
            let mut out = csv_preamble(config)?;
            out.push_str("pattern,count,frequency\n");
            for r in &rows {
                writeln!(out, "{},{},{}", r.pattern, r.count, r.frequency)
                    .expect("string write");
            }
            out
        }
    };
    Ok((summary, body))
}

// --------------------------------------------------------------- helpers --

/// Fringe phases: `count` points from `start`, excluding `stop` (the fringe
/// is periodic).
fn phase_grid(grid: &GridSpec) -> Vec<f64> {
    let step = (grid.stop - grid.start) / grid.count as f64;
    (0..grid.count).map(|k| grid.start + k as f64 * step).collect()
}

/// Gamma sweep: `count` points including both endpoints.
fn gamma_grid(grid: &GridSpec) -> Vec<f64> {
    if grid.count == 1 {
        return vec![grid.start];
    }
    let step = (grid.stop - grid.start) / (grid.count - 1) as f64;
    (0..grid.count).map(|k| grid.start + k as f64 * step).collect()
}

/// The resolved config as `# `-prefixed TOML lines.
fn csv_preamble(config: &RunConfig) -> Result<String> {
    let toml_text = toml::to_string(config)
        .map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))?;
    let mut out = String::new();
    for line in toml_text.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            writeln!(out, "# {line}").expect("string write");
        }
    }
    Ok(out)
}

/// Recover the embedded TOML config from an emitted CSV file.
pub fn extract_embedded_config(text: &str) -> Option<String> {
    let mut toml_text = String::new();
    let mut saw_comment = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            saw_comment = true;
            toml_text.push_str(rest.strip_prefix(' ').unwrap_or(rest));
            toml_text.push('\n');
        } else {
            break;
        }
    }
    saw_comment.then_some(toml_text)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a RunConfig,
    results: T,
}

fn to_json<T: Serialize>(config: &RunConfig, results: T) -> Result<String> {
    let doc = Document { config, results };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Config(format!("cannot serialize results: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write `content`, leaving either the old file or the new one, never a mix.
fn write_atomically(path: &Path, content: &str) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mode = "chsh"

[experiment]
gamma_a = 0.01
gamma_b = 0.01

[settings]
alpha_1 = 0.0
alpha_2 = 1.5707963267948966
beta_1 = 0.7853981633974483
beta_2 = -0.7853981633974483

[output]
path = "out.csv"
"#;

    #[test]
    fn minimal_chsh_config_parses_with_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Mode::Chsh);
        assert_eq!(cfg.experiment.cutoff, 4);
        assert_eq!(cfg.experiment.phi, 0.0);
        assert_eq!(cfg.output.format, OutputFormat::Csv);
        // beta_2 canonicalized into [0, 2*pi)
        let s = cfg.settings.unwrap();
        assert!(s.beta_2 > 5.49 && s.beta_2 < 5.5);
    }

    #[test]
    fn missing_required_key_is_named() {
        let err = RunConfig::from_toml("mode = \"chsh\"\n[experiment]\ngamma_a = 0.1\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gamma_b"), "message was: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("gamma_a = 0.01", "gamma_a = 0.01\nalpha_deg = 30.0");
        let err = RunConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("alpha_deg"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn fringe_needs_a_large_enough_grid() {
        let cfg = MINIMAL
            .replace("mode = \"chsh\"", "mode = \"fringe\"\n[grid]\ncount = 4\n");
        let err = RunConfig::from_toml(&cfg).unwrap_err();
        assert!(err.to_string().contains("grid.count >= 8"));
    }

    #[test]
    fn scan_rejects_zero_gamma_start() {
        let cfg = MINIMAL.replace(
            "mode = \"chsh\"",
            "mode = \"scan\"\n[grid]\ncount = 3\nstart = 0.0\nstop = 0.2\n",
        );
        let err = RunConfig::from_toml(&cfg).unwrap_err();
        assert!(err.to_string().contains("grid.start > 0"));
    }

    #[test]
    fn grids_have_the_advertised_shape() {
        let g = GridSpec {
            count: 4,
            start: 0.0,
            stop: 1.0,
        };
        assert_eq!(phase_grid(&g), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(gamma_grid(&g), vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn preamble_round_trips_through_extraction() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let preamble = csv_preamble(&cfg).unwrap();
        let embedded = extract_embedded_config(&preamble).unwrap();
        let recovered = RunConfig::from_toml(&embedded).unwrap();
        assert_eq!(cfg, recovered);
    }

    #[test]
    fn engine_errors_map_to_exit_code_3() {
        let err = CliError::Engine(wavebell::Error::TruncationExceeded {
            leakage: 1e-3,
            budget: 1e-6,
        });
        assert_eq!(err.exit_code(), 3);
        let err = CliError::Engine(wavebell::Error::InvalidConfig("x".into()));
        assert_eq!(err.exit_code(), 2);
    }
}

//! Experiment specs, the parallel runner and report output.

use std::fs;
use std::path::{Path, PathBuf};

use qsdc_core::channel::{EveStrategy, NoiseKind, NoiseModel};
use qsdc_core::codes::BoundReport;
use qsdc_core::{run_session, SessionConfig, Transcript};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::example::{worked_example, ExampleTrace};
use crate::summary::{summarize_sessions, Summary};
use crate::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Noiseless,
    NoiseSweep,
    EveDetection,
    #[serde(alias = "paper_example")]
    WorkedExample,
    BoundsReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsQuery {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
}

fn default_sessions() -> usize {
    100
}

/// One experiment as written in a TOML file.
///
/// ```toml
/// scenario = "noise_sweep"
/// seed = 7
/// sessions = 200
/// p_values = [0.0, 0.02, 0.05]
///
/// [session]
/// n_blocks = 16
/// sift_count = 4
///
/// [session.noise]
/// kind = "depolarizing"
/// ```
///
/// Trial `i` of every group runs with session seed `seed + i`, so groups in
/// a sweep share their random streams trial by trial. `session.seed` is
/// overwritten with `seed` when the spec is resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sessions")]
    pub sessions: usize,
    #[serde(default)]
    pub p_values: Vec<f64>,
    /// Where to write the report; not part of the embedded config.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub session: SessionConfig,
    #[serde(default)]
    pub bounds: Vec<BoundsQuery>,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            seed: 0,
            sessions: default_sessions(),
            p_values: Vec::new(),
            output: None,
            session: SessionConfig::default(),
            bounds: Vec::new(),
        }
    }

    /// Parses TOML; errors carry the dotted path of the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Value = text
            .parse::<toml::Table>()
            .map(toml::Value::Table)
            .map_err(|e| CliError::config("<document>", e.to_string()))?;
        let spec: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            // toml appends its own location lines; keep the message itself
            let message = e.into_inner().to_string();
            CliError::config(path, message.lines().next().unwrap_or_default())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sessions == 0 {
            return Err(CliError::config("sessions", "must be at least 1"));
        }
        for (i, p) in self.p_values.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(CliError::config(
                    format!("p_values[{i}]"),
                    format!("{p} is not a probability"),
                ));
            }
        }
        self.session.validate().map_err(|e| match e {
            qsdc_core::Error::InvalidConfig { field, reason } => {
                CliError::config(format!("session.{field}"), reason)
            }
            other => CliError::Core(other),
        })?;
        match self.scenario {
            Scenario::Noiseless => {
                if self.session.noise.kind != NoiseKind::None && self.session.noise.p > 0.0 {
                    return Err(CliError::config(
                        "session.noise",
                        "must be none for the noiseless scenario",
                    ));
                }
                if self.session.eve != EveStrategy::None {
                    return Err(CliError::config(
                        "session.eve",
                        "must be none for the noiseless scenario",
                    ));
                }
                if !self.session.inject.is_empty() {
                    return Err(CliError::config(
                        "session.inject",
                        "must be empty for the noiseless scenario",
                    ));
                }
            }
            Scenario::NoiseSweep => {
                if self.p_values.is_empty() {
                    return Err(CliError::config("p_values", "a sweep needs at least one p"));
                }
                if self.session.noise.kind == NoiseKind::None {
                    return Err(CliError::config(
                        "session.noise.kind",
                        "a sweep needs a noise kind other than none",
                    ));
                }
            }
            Scenario::EveDetection => {
                if self.session.eve == EveStrategy::None {
                    return Err(CliError::config(
                        "session.eve",
                        "eve_detection needs an eavesdropping strategy",
                    ));
                }
            }
            Scenario::BoundsReport => {
                for (i, q) in self.bound_queries().iter().enumerate() {
                    BoundReport::compute(q.n, q.d1, q.d2)
                        .map_err(|e| CliError::config(format!("bounds[{i}]"), e.to_string()))?;
                }
            }
            Scenario::WorkedExample => {}
        }
        Ok(())
    }

    fn bound_queries(&self) -> Vec<BoundsQuery> {
        if self.bounds.is_empty() {
            vec![BoundsQuery { n: 7, d1: 3, d2: 4 }]
        } else {
            self.bounds.clone()
        }
    }

    /// Applies run-time overrides and fills in defaults.
    pub fn resolved(&self, seed: Option<u64>) -> Self {
        let mut spec = self.clone();
        if let Some(seed) = seed {
            spec.seed = seed;
        }
        spec.session.seed = spec.seed;
        if spec.scenario == Scenario::BoundsReport {
            spec.bounds = spec.bound_queries();
        }
        spec
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the spec's seed.
    pub seed: Option<u64>,
    /// Drop oracle-only fields from transcripts.
    pub no_oracle: bool,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
}

/// Sessions that share one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Group {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_p: Option<f64>,
    pub eve_active: bool,
    pub summary: Summary,
    pub sessions: Vec<Transcript>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub config: ExperimentSpec,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<Group>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleTrace>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundReport>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// One row per group, for plotting.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            label: &'a str,
            noise_p: Option<f64>,
            eve_active: bool,
            sessions: usize,
            abort_rate: f64,
            abort_ci_low: f64,
            abort_ci_high: f64,
            qber_mean: Option<f64>,
            qber_std: Option<f64>,
            key_agreement_rate: f64,
            key_rate: f64,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for g in &self.groups {
            let s = &g.summary;
            w.serialize(Row {
                label: &g.label,
                noise_p: g.noise_p,
                eve_active: g.eve_active,
                sessions: s.sessions,
                abort_rate: s.abort_rate,
                abort_ci_low: s.abort_rate_ci[0],
                abort_ci_high: s.abort_rate_ci[1],
                qber_mean: s.qber_mean,
                qber_std: s.qber_std,
                key_agreement_rate: s.key_agreement_rate,
                key_rate: s.key_rate,
            })
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
    }
}

fn run_group(
    label: String,
    noise_p: Option<f64>,
    base: &SessionConfig,
    spec: &ExperimentSpec,
    opts: &RunOptions,
    pool: &rayon::ThreadPool,
) -> Result<Group> {
    let sessions: Vec<Transcript> = pool.install(|| {
        (0..spec.sessions)
            .into_par_iter()
            .map(|trial| {
                let config = SessionConfig {
                    seed: spec.seed.wrapping_add(trial as u64),
                    ..base.clone()
                };
                run_session(&config).map(|t| {
                    if opts.no_oracle {
                        t.without_oracle()
                    } else {
                        t
                    }
                })
            })
            .collect::<qsdc_core::Result<_>>()
    })?;
    let eve_active = base.eve != EveStrategy::None && base.eve_stages.iter().any(|&s| s);
    Ok(Group {
        summary: summarize_sessions(&sessions, eve_active)?,
        label,
        noise_p,
        eve_active,
        sessions,
    })
}

/// Runs every session of the scenario. Results are ordered by trial index,
/// so the report does not depend on thread scheduling.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Report> {
    let spec = spec.resolved(opts.seed);
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut report = Report {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: spec.scenario,
        config: spec.clone(),
        groups: Vec::new(),
        example: None,
        bounds: Vec::new(),
    };
    let base = &spec.session;
    match spec.scenario {
        Scenario::Noiseless => {
            report.groups.push(run_group(
                "noiseless".into(),
                None,
                base,
                &spec,
                opts,
                &pool,
            )?);
        }
        Scenario::NoiseSweep => {
            for &p in &spec.p_values {
                let config = SessionConfig {
                    noise: NoiseModel::new(base.noise.kind, p)?,
                    ..base.clone()
                };
                report.groups.push(run_group(
                    format!("p={p}"),
                    Some(p),
                    &config,
                    &spec,
                    opts,
                    &pool,
                )?);
            }
        }
        Scenario::EveDetection => {
            report
                .groups
                .push(run_group("eve".into(), None, base, &spec, opts, &pool)?);
            let baseline = SessionConfig {
                eve: EveStrategy::None,
                ..base.clone()
            };
            report.groups.push(run_group(
                "baseline".into(),
                None,
                &baseline,
                &spec,
                opts,
                &pool,
            )?);
        }
        Scenario::WorkedExample => {
            report.example = Some(worked_example(base.theta, base.phi, spec.seed)?);
        }
        Scenario::BoundsReport => {
            report.bounds = spec
                .bounds
                .iter()
                .map(|q| BoundReport::compute(q.n, q.d1, q.d2))
                .collect::<qsdc_core::Result<_>>()?;
        }
    }
    Ok(report)
}

/// Writes `report.json`, plus `sweep.csv` for sweeps, into `dir`.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let json = dir.join("report.json");
    fs::write(&json, report.to_json()?).map_err(io(&json))?;
    let mut written = vec![json];
    if report.scenario == Scenario::NoiseSweep {
        let csv = dir.join("sweep.csv");
        fs::write(&csv, report.to_csv()?).map_err(io(&csv))?;
        written.push(csv);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_uses_defaults() {
        let spec = ExperimentSpec::from_toml_str("scenario = \"noiseless\"").unwrap();
        assert_eq!(spec.sessions, 100);
        assert_eq!(spec.session, SessionConfig::default());
    }

    #[test]
    fn nested_field_errors_carry_their_path() {
        let text = "scenario = \"noise_sweep\"\np_values = [0.1]\n[session.noise]\nkind = \"depolarizing\"\np = \"high\"\n";
        match ExperimentSpec::from_toml_str(text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "session.noise.p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err =
            ExperimentSpec::from_toml_str("scenario = \"noiseless\"\n[session]\nthetta = 1.0\n")
                .unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("thetta"), "{err}");
    }

    #[test]
    fn semantic_errors_carry_their_path() {
        let cases = [
            ("scenario = \"noiseless\"\nsessions = 0\n", "sessions"),
            ("scenario = \"noise_sweep\"\np_values = [0.1, 1.5]\n[session.noise]\nkind = \"bit_flip\"\n", "p_values[1]"),
            ("scenario = \"noise_sweep\"\np_values = [0.1]\n", "session.noise.kind"),
            ("scenario = \"eve_detection\"\n", "session.eve"),
            ("scenario = \"noiseless\"\n[session]\nn_blocks = 4\nsift_count = 5\n", "session.sift_count"),
            ("scenario = \"noiseless\"\n[[session.inject]]\nstage = 4\nblock = 0\nqubit = 0\npauli = \"X\"\n", "session.inject[0].stage"),
        ];
        for (text, expected) in cases {
            match ExperimentSpec::from_toml_str(text) {
                Err(CliError::Config { path, .. }) => assert_eq!(path, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn seed_override_reaches_the_session() {
        let spec = ExperimentSpec::new(Scenario::Noiseless).resolved(Some(9));
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.session.seed, 9);
    }
}

//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored; unknown keys are errors so typos
//! surface instead of silently using defaults. A run draws its data from
//! exactly one source: response/question files, or a simulated world.

use std::collections::BTreeMap;
use std::path::PathBuf;

use spvote::calib::{GridSpec, LossKind};
use spvote::model::ElicitationFormat;

use crate::error::{CliError, Result};

/// Simulated-world parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub kind: WorldKind,
    pub m: usize,
    pub phi: f64,
    pub voters: usize,
    pub n_questions: usize,
    pub domains: usize,
    /// Probability a voter's prediction is replaced by a uniform random one.
    pub noise: f64,
    pub p_high: f64,
    pub p_low: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldKind {
    Mallows,
    Adversarial,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            kind: WorldKind::Mallows,
            m: 4,
            phi: 0.5,
            voters: 20,
            n_questions: 60,
            domains: 1,
            noise: 0.0,
            p_high: 0.9,
            p_low: 0.6,
        }
    }
}

/// Where a run's elections come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Files {
        responses: PathBuf,
        questions: PathBuf,
    },
    World(WorldSpec),
}

/// How tie-broken metric targets are evaluated: exact expectation over the
/// uniform tie-break, or an empirical mean of `k` seeded samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    Exact,
    Sampled(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub formats: Vec<ElicitationFormat>,
    /// `None` disables calibration; aggregation then uses `alpha`/`beta`.
    pub grid: Option<GridSpec>,
    pub train_per_domain: usize,
    pub loss: LossKind,
    pub seed: u64,
    pub out: PathBuf,
    pub metric_mode: MetricMode,
    /// Aggregation parameters when no grid is given. The default is
    /// symmetric (beta = 1 - alpha), which keeps verdicts independent of
    /// alternative naming.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: DataSource::World(WorldSpec::default()),
            formats: ElicitationFormat::ALL.to_vec(),
            grid: None,
            train_per_domain: 5,
            loss: LossKind::MseKt,
            seed: 0,
            out: PathBuf::from("out"),
            metric_mode: MetricMode::Exact,
            alpha: 0.75,
            beta: 0.25,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "responses",
    "questions",
    "world",
    "m",
    "phi",
    "voters",
    "n_questions",
    "domains",
    "noise",
    "p_high",
    "p_low",
    "formats",
    "grid",
    "grid.alpha_min",
    "grid.alpha_max",
    "grid.alpha_step",
    "grid.beta_min",
    "grid.beta_max",
    "grid.beta_step",
    "train_per_domain",
    "loss",
    "seed",
    "out",
    "metric_mode",
    "alpha",
    "beta",
];

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::validation(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::validation(format!(
                "config line {}: unknown key {key:?}",
                i + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::validation(format!(
                "config line {}: duplicate key {key:?}",
                i + 1
            )));
        }
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<T>().map(Some).map_err(|_| {
            CliError::validation(format!("config key {key}: cannot parse {v:?}"))
        }),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_pairs(text)?;
        let mut config = ExperimentConfig::default();

        let responses = map.get("responses").map(PathBuf::from);
        let questions = map.get("questions").map(PathBuf::from);
        let world_given = map.contains_key("world")
            || ["m", "phi", "voters", "n_questions", "domains", "noise", "p_high", "p_low"]
                .iter()
                .any(|k| map.contains_key(*k));
        match (responses, questions) {
            (Some(responses), Some(questions)) => {
                if world_given {
                    return Err(CliError::validation(
                        "config mixes file inputs with simulated-world keys; pick one source",
                    ));
                }
                config.source = DataSource::Files {
                    responses,
                    questions,
                };
            }
            (None, None) => {
                let mut world = WorldSpec::default();
                if let Some(kind) = map.get("world") {
                    world.kind = match kind.as_str() {
                        "mallows" => WorldKind::Mallows,
                        "adversarial" => WorldKind::Adversarial,
                        other => {
                            return Err(CliError::validation(format!(
                                "config key world: unknown kind {other:?}"
                            )))
                        }
                    };
                }
                if let Some(v) = num(&map, "m")? {
                    world.m = v;
                }
                if let Some(v) = num(&map, "phi")? {
                    world.phi = v;
                }
                if let Some(v) = num(&map, "voters")? {
                    world.voters = v;
                }
                if let Some(v) = num(&map, "n_questions")? {
                    world.n_questions = v;
                }
                if let Some(v) = num(&map, "domains")? {
                    world.domains = v;
                }
                if let Some(v) = num(&map, "noise")? {
                    world.noise = v;
                }
                if let Some(v) = num(&map, "p_high")? {
                    world.p_high = v;
                }
                if let Some(v) = num(&map, "p_low")? {
                    world.p_low = v;
                }
                if world.voters == 0 || world.n_questions == 0 || world.domains == 0 {
                    return Err(CliError::validation(
                        "voters, n_questions, and domains must be positive",
                    ));
                }
                config.source = DataSource::World(world);
            }
            _ => {
                return Err(CliError::validation(
                    "responses and questions must be given together",
                ));
            }
        }

        if let Some(tokens) = map.get("formats") {
            if tokens != "all" {
                config.formats = tokens
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<ElicitationFormat>()
                            .map_err(|e| CliError::validation(e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if config.formats.is_empty() {
                    return Err(CliError::validation("formats list is empty"));
                }
            }
        }

        let grid_keys_given = KNOWN_KEYS
            .iter()
            .filter(|k| k.starts_with("grid."))
            .any(|k| map.contains_key(*k));
        config.grid = match map.get("grid").map(|s| s.as_str()) {
            Some("none") => {
                if grid_keys_given {
                    return Err(CliError::validation(
                        "grid = none conflicts with grid.* keys",
                    ));
                }
                None
            }
            Some("default") | None if grid_keys_given || map.get("grid").is_some() => {
                let mut grid = GridSpec::default();
                if let Some(v) = num(&map, "grid.alpha_min")? {
                    grid.alpha_min = v;
                }
                if let Some(v) = num(&map, "grid.alpha_max")? {
                    grid.alpha_max = v;
                }
                if let Some(v) = num(&map, "grid.alpha_step")? {
                    grid.alpha_step = v;
                }
                if let Some(v) = num(&map, "grid.beta_min")? {
                    grid.beta_min = v;
                }
                if let Some(v) = num(&map, "grid.beta_max")? {
                    grid.beta_max = v;
                }
                if let Some(v) = num(&map, "grid.beta_step")? {
                    grid.beta_step = v;
                }
                grid.cells()?; // validate eagerly
                Some(grid)
            }
            None => None,
            Some(other) => {
                return Err(CliError::validation(format!(
                    "config key grid: expected default or none, got {other:?}"
                )))
            }
        };

        if let Some(v) = num(&map, "train_per_domain")? {
            if v == 0 {
                return Err(CliError::validation("train_per_domain must be positive"));
            }
            config.train_per_domain = v;
        }
        if let Some(v) = map.get("loss") {
            config.loss = LossKind::parse(v)?;
        }
        if let Some(v) = num(&map, "seed")? {
            config.seed = v;
        }
        if let Some(v) = map.get("out") {
            config.out = PathBuf::from(v);
        }
        if let Some(v) = map.get("metric_mode") {
            config.metric_mode = match v.as_str() {
                "exact" => MetricMode::Exact,
                other => match other.strip_prefix("sampled:") {
                    Some(k) => {
                        let k: u32 = k.parse().map_err(|_| {
                            CliError::validation(format!("metric_mode: bad sample count {k:?}"))
                        })?;
                        if k == 0 {
                            return Err(CliError::validation(
                                "metric_mode: sample count must be positive",
                            ));
                        }
                        MetricMode::Sampled(k)
                    }
                    None => {
                        return Err(CliError::validation(format!(
                            "metric_mode: expected exact or sampled:<k>, got {v:?}"
                        )))
                    }
                },
            };
        }
        if let Some(v) = num(&map, "alpha")? {
            config.alpha = v;
        }
        if let Some(v) = num(&map, "beta")? {
            config.beta = v;
        }
        spvote::extract::ExtractionParams::new(config.alpha, config.beta)?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }
}

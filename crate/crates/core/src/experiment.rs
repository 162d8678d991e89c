//! Seeded batch runs of grouped, paired replications.
//!
//! Every group plays the same list of seeds: subgroup `k` of each group sees
//! the same end-customer demand, so differences between groups come from
//! their visibility and policy settings alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{override_policies, GameConfig, LoadError, VisibilityMode};
use crate::engine::GameState;
use crate::error::{ConfigError, EngineError, MetricsError};
use crate::exec::Execution;
use crate::metrics::{compare_groups, group_table, ComparisonReport, GroupTable, RunSummary};
use crate::policy::PolicySpec;
use crate::record::{self, WeekRecord};
use crate::role::Role;
use crate::table::{self, LabeledTable, TableFormat};

/// Environment variable that replaces the configured base seed.
pub const SEED_ENV: &str = "BEERGAME_SEED";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(
        "{0} is a human seat; headless runs need agents everywhere (use `serve` for live play)"
    )]
    HeadlessHuman(Role),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("group {group}, subgroup {subgroup} (seed {seed})")]
    Run {
        group: String,
        subgroup: String,
        seed: u64,
        #[source]
        source: Box<ExperimentError>,
    },
    #[error("nothing to export: no group tables")]
    NothingToExport,
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub records: Vec<WeekRecord>,
}

/// Plays one all-agent game to its horizon.
pub fn run_single(config: &GameConfig) -> Result<RunOutcome, ExperimentError> {
    if let Some(role) = config.policies.human_roles().first() {
        return Err(ExperimentError::HeadlessHuman(*role));
    }
    let mut game = GameState::new(config.clone())?;
    let records = game.run_to_end()?;
    let summary = RunSummary::from_records(&records)?;
    Ok(RunOutcome { summary, records })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub label: String,
    pub visibility: VisibilityMode,
    /// Per-role overrides of the base game's policies.
    #[serde(default)]
    pub policies: BTreeMap<Role, PolicySpec>,
    /// The seat a live player would take; carried through to the results.
    #[serde(default)]
    pub interactive_role: Option<Role>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub subgroups_per_group: usize,
    /// Seeds `base_seed, base_seed + 1, …`; defaults to the game's `rng_seed`.
    pub base_seed: Option<u64>,
    /// Number of derived seeds; defaults to `subgroups_per_group`.
    pub replications: Option<usize>,
    /// Explicit seed list, used instead of derived seeds.
    pub seeds: Option<Vec<u64>>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            subgroups_per_group: 7,
            base_seed: None,
            replications: None,
            seeds: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub game: GameConfig,
    #[serde(default)]
    pub experiment: ExperimentSettings,
    pub groups: Vec<GroupSpec>,
    #[serde(default)]
    pub output: OutputSettings,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(LoadError::from)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    /// Replaces the seed plan with seeds derived from `base_seed`.
    pub fn override_base_seed(&mut self, base_seed: u64) {
        self.experiment.base_seed = Some(base_seed);
        self.experiment.seeds = None;
    }

    /// Applies `BEERGAME_SEED` when it is set.
    pub fn apply_seed_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            let seed = raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::new(SEED_ENV, format!("`{raw}` is not a u64 seed")))?;
            self.override_base_seed(seed);
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        let e = &self.experiment;
        match &e.seeds {
            Some(list) => list.clone(),
            None => {
                let base = e.base_seed.unwrap_or(self.game.rng_seed);
                let n = e.replications.unwrap_or(e.subgroups_per_group);
                (0..n as u64).map(|k| base.wrapping_add(k)).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.game.validate()?;
        if self.groups.is_empty() {
            return Err(ConfigError::new("groups", "at least one group is required"));
        }
        if self.experiment.subgroups_per_group < 1 {
            return Err(ConfigError::new(
                "experiment.subgroups_per_group",
                "must be at least 1",
            ));
        }
        if self.seeds().len() < self.experiment.subgroups_per_group {
            return Err(ConfigError::new(
                "experiment.seeds",
                format!(
                    "{} seeds for {} subgroups",
                    self.seeds().len(),
                    self.experiment.subgroups_per_group
                ),
            ));
        }
        let mut labels = BTreeSet::new();
        for (i, g) in self.groups.iter().enumerate() {
            if !labels.insert(g.label.as_str()) {
                return Err(ConfigError::new(
                    format!("groups[{i}].label"),
                    format!("duplicate label `{}`", g.label),
                ));
            }
            for (role, spec) in &g.policies {
                spec.validate(&format!("groups[{i}].policies.{role}"))?;
            }
        }
        Ok(())
    }

    /// Game played by subgroup `subgroup` of group `group`.
    pub fn subgroup_config(&self, group: usize, seed: u64) -> GameConfig {
        let spec = &self.groups[group];
        GameConfig {
            visibility: spec.visibility,
            policies: override_policies(self.game.policies, &spec.policies),
            rng_seed: seed,
            ..self.game.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub label: String,
    pub visibility: VisibilityMode,
    pub interactive_role: Option<Role>,
    pub seeds: Vec<u64>,
    pub table: GroupTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub groups: Vec<GroupResult>,
    /// Every later group against the first.
    pub comparisons: Vec<ComparisonReport>,
    pub week_advances: u64,
}

impl BatchOutcome {
    pub fn labeled_tables(&self) -> Vec<LabeledTable> {
        self.groups
            .iter()
            .map(|g| LabeledTable {
                label: g.label.clone(),
                table: g.table.clone(),
            })
            .collect()
    }
}

pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutcome, ExperimentError> {
    run_batch_with(config, Execution::default())
}

pub fn run_batch_with(
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<BatchOutcome, ExperimentError> {
    config.validate()?;
    let per_group = config.experiment.subgroups_per_group;
    let seeds: Vec<u64> = config.seeds().into_iter().take(per_group).collect();
    let jobs: Vec<(usize, usize)> = (0..config.groups.len())
        .flat_map(|g| (0..per_group).map(move |k| (g, k)))
        .collect();
    let label = |g: usize, k: usize| format!("SG{}", g * per_group + k + 1);

    let results = execution.map(&jobs, |&(g, k)| {
        run_single(&config.subgroup_config(g, seeds[k])).map_err(|e| ExperimentError::Run {
            group: config.groups[g].label.clone(),
            subgroup: label(g, k),
            seed: seeds[k],
            source: Box::new(e),
        })
    });

    let mut results = results.into_iter();
    let mut groups = Vec::with_capacity(config.groups.len());
    let mut week_advances = 0u64;
    for (g, spec) in config.groups.iter().enumerate() {
        let mut summaries = Vec::with_capacity(per_group);
        for _ in 0..per_group {
            let outcome = results.next().expect("one result per job")?;
            week_advances += outcome.records.len() as u64;
            summaries.push(outcome.summary);
        }
        let labels = (0..per_group).map(|k| label(g, k)).collect();
        groups.push(GroupResult {
            label: spec.label.clone(),
            visibility: spec.visibility,
            interactive_role: spec.interactive_role,
            seeds: seeds.clone(),
            table: group_table(summaries, labels)?,
        });
    }
    let comparisons = groups
        .iter()
        .skip(1)
        .map(|b| compare_groups(&groups[0].table, &b.table))
        .collect();
    Ok(BatchOutcome {
        groups,
        comparisons,
        week_advances,
    })
}

/// Writes the tables in one format to `path`. Nothing is created for an
/// empty list.
pub fn export(
    tables: &[LabeledTable],
    format: TableFormat,
    path: &Path,
) -> Result<(), ExperimentError> {
    if tables.is_empty() {
        return Err(ExperimentError::NothingToExport);
    }
    fs::write(path, table::render(tables, format)).map_err(io_err(path))
}

pub const TABLES_JSON: &str = "tables.json";
pub const GROUPS_CSV: &str = "groups.csv";
pub const GROUPS_TXT: &str = "groups.txt";
pub const COMPARISON_JSON: &str = "comparison.json";

/// Writes every artifact of a batch into `dir`.
pub fn write_outputs(outcome: &BatchOutcome, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let tables = outcome.labeled_tables();
    if tables.is_empty() {
        return Err(ExperimentError::NothingToExport);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (name, format) in [
        (GROUPS_CSV, TableFormat::Csv),
        (GROUPS_TXT, TableFormat::Text),
    ] {
        let path = dir.join(name);
        export(&tables, format, &path)?;
        written.push(path);
    }
    for (name, body) in [
        (TABLES_JSON, pretty_json(&tables)),
        (COMPARISON_JSON, pretty_json(&outcome.comparisons)),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads the tables written by [`write_outputs`].
pub fn read_tables(dir: &Path) -> Result<Vec<LabeledTable>, ExperimentError> {
    let path = dir.join(TABLES_JSON);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Io {
        path,
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })
}

/// Week ledger CSV for a single run.
pub fn records_csv(records: &[WeekRecord]) -> String {
    record::to_csv_string(records)
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

//! Experiment settings from command-line flags, experiment files and
//! built-in defaults, in that order of precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diversity::PopulationSizes;
use crate::engine::{Experiment, PhaseConfig, Strategy};
use crate::error::{DseError, Result};
use crate::evaluator::ModelCoefficients;
use crate::objective::{Aggregation, ObjectiveSpec, DEFAULT_AREA_CONSTRAINT_MM2};
use crate::pareto::TECH_SWEEP_P_GA;
use crate::space::{SearchSpace, SystemMode};
use crate::workload::{default_set, load_workloads};

/// Environment variable that overrides the output directory of experiment
/// files.
pub const OUT_DIR_ENV: &str = "IMC_DSE_OUT";

/// Optional settings. The same shape is read from experiment files (JSON)
/// and filled from command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub space: Option<PathBuf>,
    pub workloads: Option<PathBuf>,
    pub objective: Option<String>,
    pub aggregation: Option<Aggregation>,
    pub mode: Option<SystemMode>,
    pub seed: Option<u64>,
    pub pga: Option<usize>,
    pub ph: Option<usize>,
    pub pe: Option<usize>,
    pub generations: Option<usize>,
    pub coefficients: Option<PathBuf>,
    pub area_constraint_mm2: Option<f64>,
    pub strategy: Option<Strategy>,
    pub out: Option<PathBuf>,
    pub no_cache: Option<bool>,
}

macro_rules! prefer {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Settings { $($f: $a.$f.clone().or_else(|| $b.$f.clone()),)* }
    };
}

impl Settings {
    /// Read an experiment file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DseError::io(path, e))?;
        let mut s: Settings = serde_json::from_str(&text).map_err(|e| DseError::parse(path, &e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut s.space, &mut s.workloads, &mut s.coefficients, &mut s.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(s)
    }

    /// Field-wise `self`, falling back to `other`.
    pub fn or(&self, other: &Settings) -> Settings {
        prefer!(
            self, other, space, workloads, objective, aggregation, mode, seed, pga, ph, pe, generations,
            coefficients, area_constraint_mm2, strategy, out, no_cache
        )
    }
}

/// Which command the settings are for; picks the built-in defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Optimize,
    Baseline,
    AggregationStudy,
    TechSweep,
    Oracle,
    Repeat,
}

impl Command {
    fn default_space(self, mode: SystemMode) -> SearchSpace {
        match (self, mode) {
            (Command::TechSweep, _) => SearchSpace::tech_sweep_sram(),
            (Command::Oracle, SystemMode::WeightStationary) => SearchSpace::reduced_rram(),
            (_, SystemMode::WeightStationary) => SearchSpace::default_rram(),
            (_, SystemMode::WeightSwapping) => SearchSpace::default_sram(),
        }
    }
}

/// Output directory: flag, then environment, then experiment file, then `out`.
pub fn out_dir(flag: Option<&Path>, env: Option<&str>, file: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|e| !e.is_empty()).map(PathBuf::from))
        .or_else(|| file.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Build the experiment for `command` from merged settings.
pub fn build_experiment(s: &Settings, command: Command) -> Result<Experiment> {
    let (space, mode) = match &s.space {
        Some(path) => {
            let space = SearchSpace::load(path)?;
            if let Some(m) = s.mode {
                if m != space.mode() {
                    return Err(DseError::Config(format!(
                        "--mode {} conflicts with the space file's mode {}",
                        m.as_str(),
                        space.mode().as_str()
                    )));
                }
            }
            let mode = space.mode();
            (space, mode)
        }
        None => {
            let mode = s.mode.unwrap_or(match command {
                Command::TechSweep => SystemMode::WeightSwapping,
                _ => SystemMode::WeightStationary,
            });
            (command.default_space(mode), mode)
        }
    };
    let workloads = match &s.workloads {
        Some(p) => load_workloads(p)?,
        None => default_set(),
    };
    let default_objective = if command == Command::TechSweep { "ed-cost" } else { "edap" };
    let aggregation = s.aggregation.unwrap_or(Aggregation::Max);
    let mut objective = ObjectiveSpec::named(s.objective.as_deref().unwrap_or(default_objective), aggregation)?;
    objective.a_constr_mm2 = s.area_constraint_mm2.unwrap_or(DEFAULT_AREA_CONSTRAINT_MM2);
    objective.validate()?;
    let coefficients = match &s.coefficients {
        Some(p) => ModelCoefficients::load(p)?,
        None => ModelCoefficients::for_mode(mode),
    };
    let defaults = PopulationSizes::default();
    let p_ga = s.pga.unwrap_or(if command == Command::TechSweep {
        TECH_SWEEP_P_GA
    } else {
        defaults.p_ga
    });
    let sizes = PopulationSizes {
        p_h: s.ph.unwrap_or(defaults.p_h.max(p_ga)),
        p_e: s.pe.unwrap_or(defaults.p_e.max(p_ga)),
        p_ga,
    };
    sizes.validate()?;
    let strategy = match command {
        Command::Baseline | Command::Repeat => s.strategy.unwrap_or(Strategy::Proposed),
        _ => Strategy::Proposed,
    };
    Ok(Experiment {
        strategy,
        space,
        workloads,
        objective,
        coefficients,
        phases: PhaseConfig::four_phase(s.generations.unwrap_or(PhaseConfig::DEFAULT_GENERATIONS)),
        sizes,
        seed: s.seed.unwrap_or(0),
        cache: !s.no_cache.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flag_beats_file_beats_default() {
        let cli = Settings {
            seed: Some(7),
            ..Default::default()
        };
        let file = Settings {
            seed: Some(3),
            pga: Some(12),
            ..Default::default()
        };
        let merged = cli.or(&file);
        assert_eq!((merged.seed, merged.pga), (Some(7), Some(12)));
        let e = build_experiment(&merged, Command::Optimize).unwrap();
        assert_eq!((e.seed, e.sizes.p_ga, e.sizes.p_h), (7, 12, 1000));
        assert_eq!(e.phases, PhaseConfig::four_phase(10));
    }

    #[test]
    fn out_dir_precedence() {
        let f = Path::new("from-file");
        assert_eq!(out_dir(Some(Path::new("flag")), Some("env"), Some(f)), PathBuf::from("flag"));
        assert_eq!(out_dir(None, Some("env"), Some(f)), PathBuf::from("env"));
        assert_eq!(out_dir(None, None, Some(f)), PathBuf::from("from-file"));
        assert_eq!(out_dir(None, Some(""), None), PathBuf::from("out"));
    }

    #[test]
    fn command_defaults() {
        let s = Settings::default();
        let t = build_experiment(&s, Command::TechSweep).unwrap();
        assert_eq!(t.sizes.p_ga, 70);
        assert!(t.objective.uses_cost());
        assert_eq!(t.space.mode(), SystemMode::WeightSwapping);
        assert_eq!(build_experiment(&s, Command::Oracle).unwrap().space.size(), 375);
        let sram = Settings {
            mode: Some(SystemMode::WeightSwapping),
            ..Default::default()
        };
        assert_eq!(build_experiment(&sram, Command::Optimize).unwrap().space, SearchSpace::default_sram());
    }

    #[test]
    fn file_paths_are_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.json");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, r#"{{"space": "s.json", "seed": 4, "aggregation": "mean"}}"#).unwrap();
        let s = Settings::load(&path).unwrap();
        assert_eq!(s.space, Some(dir.path().join("s.json")));
        assert_eq!(s.aggregation, Some(Aggregation::Mean));
        std::fs::write(&path, r#"{"sede": 4}"#).unwrap();
        assert!(matches!(Settings::load(&path), Err(DseError::Parse { .. })));
    }

    #[test]
    fn mode_conflict_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.json");
        std::fs::write(&path, SearchSpace::default_sram().to_json()).unwrap();
        let s = Settings {
            space: Some(path),
            mode: Some(SystemMode::WeightStationary),
            ..Default::default()
        };
        let err = build_experiment(&s, Command::Optimize).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

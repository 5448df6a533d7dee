//! Multi-run studies: seed repeats and aggregation-scheme comparison.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{Experiment, RunResult};
use crate::error::Result;
use crate::objective::{finite_or_null, Aggregation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRow {
    pub seed: u64,
    #[serde(with = "finite_or_null")]
    pub best_score: f64,
    pub feasible: bool,
    pub eval_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatStudy {
    pub strategy: String,
    pub rows: Vec<RepeatRow>,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
}

impl RepeatStudy {
    /// Coefficient of variation, `std / mean`.
    pub fn cv(&self) -> f64 {
        self.std / self.mean
    }

    /// `seed,best_score,feasible,eval_count`
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "seed,best_score,feasible,eval_count")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.seed, r.best_score, r.feasible, r.eval_count)?;
        }
        Ok(())
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run `base` once per seed. Mean and std cover feasible runs only.
pub fn repeat(base: &Experiment, seeds: &[u64]) -> Result<RepeatStudy> {
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let r = Experiment { seed, ..base.clone() }.run()?;
        let s = r.joint_score();
        rows.push(RepeatRow {
            seed,
            best_score: s.value,
            feasible: s.feasible,
            eval_count: r.outcome.eval_count,
        });
    }
    let feasible: Vec<f64> = rows.iter().filter(|r| r.feasible).map(|r| r.best_score).collect();
    let (mean, std) = mean_std(&feasible);
    Ok(RepeatStudy {
        strategy: base.strategy.to_string(),
        rows,
        mean,
        std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationRow {
    pub scheme: Aggregation,
    #[serde(with = "finite_or_null")]
    pub best_score: f64,
    /// EDAP of the best design on each workload, in workload order.
    pub per_workload_edap: Vec<f64>,
    pub wall_s: f64,
    pub eval_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationStudy {
    pub workloads: Vec<String>,
    pub rows: Vec<AggregationRow>,
}

impl AggregationStudy {
    /// `scheme,best_score,wall_s,eval_count,<workload>_edap...`
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "scheme,best_score,wall_s,eval_count")?;
        for w in &self.workloads {
            write!(out, ",{w}_edap")?;
        }
        writeln!(out)?;
        for r in &self.rows {
            write!(out, "{},{},{},{}", r.scheme.as_str(), r.best_score, r.wall_s, r.eval_count)?;
            for e in &r.per_workload_edap {
                write!(out, ",{e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn row(&self, scheme: Aggregation) -> Option<&AggregationRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }
}

fn per_workload_edap(r: &RunResult) -> Vec<f64> {
    let s = r.joint_score();
    s.per_workload.iter().map(|m| m.energy_mj * m.latency_ms * s.area_mm2).collect()
}

/// Run `base` under each scheme, summing wall time over `seeds`. The
/// reported design is the one from the first seed.
pub fn aggregation_study(base: &Experiment, schemes: &[Aggregation], seeds: &[u64]) -> Result<AggregationStudy> {
    let mut rows = Vec::new();
    for &scheme in schemes {
        let mut exp = base.clone();
        exp.objective.aggregation = scheme;
        let mut wall = 0.0;
        let mut first: Option<RunResult> = None;
        let mut evals = 0;
        for &seed in seeds {
            let start = Instant::now();
            let r = Experiment { seed, ..exp.clone() }.run()?;
            wall += start.elapsed().as_secs_f64();
            evals += r.outcome.eval_count;
            first.get_or_insert(r);
        }
        let r = first.expect("at least one seed");
        rows.push(AggregationRow {
            scheme,
            best_score: r.joint_score().value,
            per_workload_edap: per_workload_edap(&r),
            wall_s: wall,
            eval_count: evals,
        });
    }
    Ok(AggregationStudy {
        workloads: base.workloads.iter().map(|w| w.name.clone()).collect(),
        rows,
    })
}

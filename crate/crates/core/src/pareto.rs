//! EDAP-versus-cost trade-off analysis.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::diversity::PopulationSizes;
use crate::engine::{run_joint, PhaseConfig, SearchOutcome};
use crate::error::{DseError, Result};
use crate::objective::cost;
use crate::problem::Problem;
use crate::space::{DesignPoint, SearchSpace};

/// Population size of the technology sweep.
pub const TECH_SWEEP_P_GA: usize = 70;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradePoint {
    pub design: DesignPoint,
    pub edap: f64,
    pub cost: f64,
    pub tech_nm: u32,
}

/// Weak Pareto dominance on (edap, cost).
pub fn dominates(a: &TradePoint, b: &TradePoint) -> bool {
    a.edap <= b.edap && a.cost <= b.cost && (a.edap < b.edap || a.cost < b.cost)
}

/// Non-dominated points sorted by cost. Points equal on both axes collapse
/// to the one with the lowest gene vector.
pub fn pareto_front(points: &[TradePoint]) -> Result<Vec<TradePoint>> {
    if points.is_empty() {
        return Err(DseError::EmptyInput);
    }
    let mut sorted: Vec<&TradePoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.cost
            .total_cmp(&b.cost)
            .then(a.edap.total_cmp(&b.edap))
            .then_with(|| a.design.cmp(&b.design))
    });
    let mut front: Vec<TradePoint> = Vec::new();
    let mut best_edap = f64::INFINITY;
    for p in sorted {
        // any earlier point has lower-or-equal cost; p survives only by
        // strictly improving the running EDAP minimum
        if p.edap < best_edap {
            best_edap = p.edap;
            front.push(p.clone());
        }
    }
    Ok(front)
}

#[derive(Debug, Clone)]
pub struct TechSweep {
    pub run: SearchOutcome,
    /// Every feasible design evaluated during the run.
    pub points: Vec<TradePoint>,
    pub front: Vec<TradePoint>,
}

/// Trade points of every feasible design the problem has scored. EDAP uses
/// the objective's aggregation.
pub fn collect_trade_points(problem: &Problem) -> Result<Vec<TradePoint>> {
    let mut out = Vec::new();
    for (design, score) in problem.archive() {
        if !score.feasible {
            continue;
        }
        let Some(edap) = score.edap(problem.objective.aggregation) else {
            continue;
        };
        let tech_nm = problem.space.decode(&design)?.tech_nm;
        out.push(TradePoint {
            cost: cost(score.area_mm2, tech_nm)?,
            design,
            edap,
            tech_nm,
        });
    }
    Ok(out)
}

/// Joint search over a space with a technology gene, followed by front
/// extraction over everything it evaluated.
pub fn tech_sweep(problem: &Problem, phases: &[PhaseConfig], sizes: PopulationSizes, seed: u64) -> Result<TechSweep> {
    let run = run_joint(problem, phases, sizes, seed)?;
    let points = collect_trade_points(problem)?;
    let front = pareto_front(&points)?;
    Ok(TechSweep { run, points, front })
}

/// `edap,cost,tech_nm,<gene values...>,on_front`
pub fn write_csv<W: Write>(out: &mut W, space: &SearchSpace, points: &[TradePoint], front: &[TradePoint]) -> std::io::Result<()> {
    write!(out, "edap,cost,tech_nm")?;
    for d in space.domains() {
        write!(out, ",{}", d.name)?;
    }
    writeln!(out, ",on_front")?;
    for p in points {
        write!(out, "{},{},{}", p.edap, p.cost, p.tech_nm)?;
        for v in space.values(&p.design) {
            write!(out, ",{v}")?;
        }
        let on = front.iter().any(|f| f.design == p.design);
        writeln!(out, ",{}", on as u8)?;
    }
    Ok(())
}

//! Exhaustive enumeration of small spaces.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{DseError, Result};
use crate::objective::JointScore;
use crate::problem::Problem;
use crate::space::{DesignPoint, SearchSpace};

pub const DEFAULT_MAX_POINTS: u128 = 100_000;

const CHUNK: u128 = 256;

#[derive(Debug, Clone)]
pub struct Landscape {
    /// Every design of the space in enumeration order.
    pub entries: Vec<(DesignPoint, JointScore)>,
    /// Index into `entries` of the best feasible design (first on ties).
    pub global_min: Option<usize>,
    pub feasible_count: usize,
}

impl Landscape {
    pub fn global_min(&self) -> Option<&(DesignPoint, JointScore)> {
        self.global_min.map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `1 +` the number of feasible designs scoring strictly lower.
    pub fn rank_of(&self, design: &DesignPoint) -> Result<usize> {
        let (_, score) = self
            .entries
            .iter()
            .find(|(d, _)| d == design)
            .ok_or(DseError::NotInLandscape)?;
        Ok(1 + self
            .entries
            .iter()
            .filter(|(_, s)| s.feasible && s.value < score.value)
            .count())
    }

    /// `index,<gene values...>,score,feasible,area_mm2`
    pub fn write_csv<W: Write>(&self, out: &mut W, space: &SearchSpace) -> std::io::Result<()> {
        write!(out, "index")?;
        for d in space.domains() {
            write!(out, ",{}", d.name)?;
        }
        writeln!(out, ",score,feasible,area_mm2")?;
        for (i, (d, s)) in self.entries.iter().enumerate() {
            write!(out, "{i}")?;
            for v in space.values(d) {
                write!(out, ",{v}")?;
            }
            let score = if s.value.is_finite() { s.value.to_string() } else { String::new() };
            writeln!(out, ",{score},{},{}", s.feasible, s.area_mm2)?;
        }
        Ok(())
    }
}

fn summarize(entries: Vec<(DesignPoint, JointScore)>) -> Landscape {
    let mut global_min: Option<usize> = None;
    for (i, (_, s)) in entries.iter().enumerate() {
        if s.feasible && global_min.is_none_or(|g| s.value < entries[g].1.value) {
            global_min = Some(i);
        }
    }
    Landscape {
        feasible_count: entries.iter().filter(|(_, s)| s.feasible).count(),
        global_min,
        entries,
    }
}

fn check_size(space: &SearchSpace, max_points: u128) -> Result<u128> {
    let size = space.size();
    if size > max_points {
        return Err(DseError::SpaceTooLarge { size, cap: max_points });
    }
    Ok(size)
}

/// Score every design; chunks run in parallel and merge in index order.
pub fn exhaustive(problem: &Problem, max_points: u128) -> Result<Landscape> {
    let size = check_size(&problem.space, max_points)?;
    let chunks: Vec<u128> = (0..size.div_ceil(CHUNK)).collect();
    let parts = chunks
        .par_iter()
        .map(|&c| {
            let points: Vec<DesignPoint> = (c * CHUNK..((c + 1) * CHUNK).min(size))
                .map(|i| problem.space.point_at(i))
                .collect();
            let scores = problem.score_batch(&points)?;
            Ok(points.into_iter().zip(scores).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(parts.into_iter().flatten().collect()))
}

/// Sequential pass in reverse enumeration order, returned in forward order.
pub fn exhaustive_reversed(problem: &Problem, max_points: u128) -> Result<Landscape> {
    let size = check_size(&problem.space, max_points)?;
    let mut entries = Vec::with_capacity(size as usize);
    for i in (0..size).rev() {
        let p = problem.space.point_at(i);
        let s = problem.score(&p)?;
        entries.push((p, s));
    }
    entries.reverse();
    Ok(summarize(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::ModelCoefficients;
    use crate::objective::{Aggregation, ObjectiveSpec};
    use crate::space::{ParamDomain, SystemMode};
    use crate::workload::{generate_synthetic, LayerKind, LayerSpec, Workload};

    fn problem(space: SearchSpace, workloads: Vec<Workload>) -> Problem {
        Problem::new(space, workloads, ObjectiveSpec::edap(Aggregation::Max), ModelCoefficients::RRAM).unwrap()
    }

    fn pinned_space(f: impl Fn(&ParamDomain) -> Vec<f64>) -> SearchSpace {
        let domains = SearchSpace::default_rram()
            .domains()
            .iter()
            .map(|d| ParamDomain::new(d.name.clone(), f(d)))
            .collect();
        SearchSpace::new(domains, Default::default(), SystemMode::WeightStationary).unwrap()
    }

    #[test]
    fn one_point_space() {
        let space = pinned_space(|d| vec![d.options[0]]);
        let l = exhaustive(&problem(space, vec![generate_synthetic("mlp", 1, 0).unwrap()]), DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l.global_min, Some(0));
        assert_eq!(l.rank_of(&l.entries[0].0).unwrap(), 1);
    }

    #[test]
    fn all_infeasible_space() {
        let space = pinned_space(|d| d.options[..2.min(d.len())].to_vec());
        let huge = Workload::new("huge", vec![LayerSpec::dense("fc", LayerKind::Fc, 1 << 22, 1 << 20, 1)]).unwrap();
        let l = exhaustive(&problem(space, vec![huge]), DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(l.feasible_count, 0);
        assert!(l.global_min().is_none());
    }

    #[test]
    fn too_large_rejected() {
        let p = problem(SearchSpace::default_rram(), vec![generate_synthetic("mlp", 1, 0).unwrap()]);
        assert!(matches!(exhaustive(&p, DEFAULT_MAX_POINTS), Err(DseError::SpaceTooLarge { .. })));
    }

    #[test]
    fn ranks_and_order_independence() {
        let ws = vec![generate_synthetic("mlp", 2, 0).unwrap()];
        let space = SearchSpace::reduced_rram();
        let fwd = exhaustive(&problem(space.clone(), ws.clone()), DEFAULT_MAX_POINTS).unwrap();
        let rev = exhaustive_reversed(&problem(space, ws), DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(fwd.entries, rev.entries);
        assert_eq!(fwd.global_min, rev.global_min);
        let (best, best_score) = fwd.global_min().unwrap();
        assert_eq!(fwd.rank_of(best).unwrap(), 1);
        let worst = fwd
            .entries
            .iter()
            .filter(|(_, s)| s.feasible)
            .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .unwrap();
        let ties = fwd.entries.iter().filter(|(_, s)| s.feasible && s.value == worst.1.value).count();
        assert_eq!(fwd.rank_of(&worst.0).unwrap(), fwd.feasible_count - ties + 1);
        assert!(fwd.entries.iter().all(|(_, s)| !s.feasible || s.value >= best_score.value));
        assert!(matches!(fwd.rank_of(&DesignPoint(vec![99; 10])), Err(DseError::NotInLandscape)));
    }
}

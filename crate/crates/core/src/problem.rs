//! A search problem: space + workloads + objective + evaluator state.
//!
//! Scoring goes through the memoized evaluator. Batches are de-duplicated
//! before they are evaluated in parallel, so the evaluator-call count is the
//! same no matter how the work is scheduled.

use std::collections::{BTreeMap, HashSet};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{DseError, Result};
use crate::evaluator::{self, cached_evaluate, EvalCache, EvalOutcome, ModelCoefficients};
use crate::objective::{joint_score, JointScore, ObjectiveSpec};
use crate::space::{cell_capacity, DesignPoint, SearchSpace, SystemMode};
use crate::workload::Workload;

pub struct Problem {
    pub space: SearchSpace,
    pub workloads: Vec<Workload>,
    pub objective: ObjectiveSpec,
    pub coefficients: ModelCoefficients,
    cache: EvalCache,
    archive: Mutex<BTreeMap<DesignPoint, JointScore>>,
}

impl Problem {
    pub fn new(
        space: SearchSpace,
        workloads: Vec<Workload>,
        objective: ObjectiveSpec,
        coefficients: ModelCoefficients,
    ) -> Result<Self> {
        Self::with_cache(space, workloads, objective, coefficients, true)
    }

    pub fn with_cache(
        space: SearchSpace,
        workloads: Vec<Workload>,
        objective: ObjectiveSpec,
        coefficients: ModelCoefficients,
        cache_enabled: bool,
    ) -> Result<Self> {
        if workloads.is_empty() {
            return Err(DseError::Config("at least one workload is required".into()));
        }
        objective.validate()?;
        coefficients.validate()?;
        if objective.uses_cost() {
            let probe = space.decode(&space.min_point())?;
            let nodes: Vec<u32> = match space.domain_index(crate::space::param::TECH) {
                Some(i) => space.domains()[i].options.iter().map(|v| v.round() as u32).collect(),
                None => vec![probe.tech_nm],
            };
            for nm in nodes {
                crate::objective::cost(1.0, nm)?;
            }
        }
        Ok(Problem {
            space,
            workloads,
            objective,
            coefficients,
            cache: EvalCache::new(cache_enabled),
            archive: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn mode(&self) -> SystemMode {
        self.space.mode()
    }

    /// Evaluator calls executed so far (cache misses).
    pub fn eval_count(&self) -> u64 {
        self.cache.misses()
    }

    pub fn cache(&self) -> &EvalCache {
        &self.cache
    }

    /// Cells the largest workload needs at `bits_per_cell`.
    pub fn required_cells(&self, bits_per_cell: u32) -> u64 {
        self.workloads
            .iter()
            .map(|w| w.required_cells(bits_per_cell))
            .max()
            .unwrap_or(0)
    }

    /// Whether the design holds every weight of the largest workload. Always
    /// true for weight-swapping designs.
    pub fn capacity_feasible(&self, point: &DesignPoint) -> Result<bool> {
        if self.mode() == SystemMode::WeightSwapping {
            return Ok(true);
        }
        let config = self.space.decode(point)?;
        Ok(cell_capacity(&config)? >= self.required_cells(config.bits_per_cell))
    }

    fn score_uncached(&self, point: &DesignPoint) -> Result<JointScore> {
        let config = self.space.decode(point)?;
        let area = evaluator::area(&config, &self.coefficients);
        let mut metrics = Vec::with_capacity(self.workloads.len());
        for w in &self.workloads {
            match cached_evaluate(&self.cache, point, &config, w, self.mode(), &self.coefficients)? {
                EvalOutcome::Metrics(m) => metrics.push(m),
                EvalOutcome::Infeasible { .. } => return Ok(JointScore::unmappable(area)),
            }
        }
        let accuracies: Option<Vec<f64>> = self
            .objective
            .accuracy
            .as_ref()
            .map(|hook| self.workloads.iter().map(|w| hook.accuracy(&config, w)).collect());
        if let Some(acc) = &accuracies {
            if let Some(bad) = acc.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
                return Err(DseError::Config(format!("accuracy provider returned {bad}, outside (0, 1]")));
            }
        }
        joint_score(&metrics, area, config.tech_nm, &self.objective, accuracies.as_deref())
    }

    pub fn score(&self, point: &DesignPoint) -> Result<JointScore> {
        Ok(self.score_batch(std::slice::from_ref(point))?.remove(0))
    }

    /// Score a batch; results come back in input order.
    pub fn score_batch(&self, points: &[DesignPoint]) -> Result<Vec<JointScore>> {
        let todo: Vec<DesignPoint> = {
            let archive = self.archive.lock().expect("archive lock");
            let mut seen = HashSet::new();
            points
                .iter()
                .filter(|p| !(self.cache.is_enabled() && archive.contains_key(*p)))
                .filter(|p| seen.insert(*p))
                .cloned()
                .collect()
        };
        let fresh: Vec<JointScore> = todo
            .par_iter()
            .map(|p| self.score_uncached(p))
            .collect::<Result<Vec<_>>>()?;
        let mut archive = self.archive.lock().expect("archive lock");
        let mut fresh_by_point = BTreeMap::new();
        for (p, s) in todo.into_iter().zip(fresh) {
            archive.insert(p.clone(), s.clone());
            fresh_by_point.insert(p, s);
        }
        Ok(points
            .iter()
            .map(|p| fresh_by_point.get(p).unwrap_or_else(|| &archive[p]).clone())
            .collect())
    }

    /// Every design scored so far, in gene order.
    pub fn archive(&self) -> Vec<(DesignPoint, JointScore)> {
        self.archive
            .lock()
            .expect("archive lock")
            .iter()
            .map(|(p, s)| (p.clone(), s.clone()))
            .collect()
    }

    /// Best `k` distinct designs scored so far, best first; ties by gene.
    pub fn top_k(&self, k: usize) -> Vec<(DesignPoint, JointScore)> {
        let mut all = self.archive();
        all.sort_by(|a, b| a.1.rank_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Aggregation;
    use crate::workload::generate_synthetic;

    fn problem(cache: bool) -> Problem {
        let ws = vec![
            generate_synthetic("mlp", 3, 1).unwrap(),
            generate_synthetic("convstack", 3, 2).unwrap(),
        ];
        Problem::with_cache(
            SearchSpace::default_rram(),
            ws,
            ObjectiveSpec::edap(Aggregation::Max),
            ModelCoefficients::RRAM,
            cache,
        )
        .unwrap()
    }

    #[test]
    fn batch_dedupes_and_counts_misses() {
        let p = problem(true);
        let a = p.space.median_point();
        let b = p.space.max_point();
        let scores = p.score_batch(&[a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(scores[0], scores[2]);
        assert_eq!(p.eval_count(), 4);
        p.score_batch(&[b]).unwrap();
        assert_eq!(p.eval_count(), 4);
        assert_eq!(p.archive().len(), 2);
    }

    #[test]
    fn disabled_cache_recomputes_same_values() {
        let on = problem(true);
        let off = problem(false);
        let pts = vec![on.space.min_point(), on.space.median_point(), on.space.min_point()];
        assert_eq!(on.score_batch(&pts).unwrap(), off.score_batch(&pts).unwrap());
        off.score_batch(&pts).unwrap();
        assert!(off.eval_count() > on.eval_count());
    }

    #[test]
    fn cost_objective_requires_tabulated_nodes() {
        let mut domains = SearchSpace::default_sram().domains().to_vec();
        let t = domains.iter().position(|d| d.name == "tech_nm").unwrap();
        domains[t].options = vec![28.0];
        let space = SearchSpace::new(domains, Default::default(), SystemMode::WeightSwapping).unwrap();
        let err = Problem::new(
            space,
            vec![generate_synthetic("mlp", 1, 0).unwrap()],
            ObjectiveSpec::named("ed-cost", Aggregation::Max).unwrap(),
            ModelCoefficients::SRAM,
        );
        assert!(matches!(err, Err(DseError::UnknownTechNode(28))));
    }
}

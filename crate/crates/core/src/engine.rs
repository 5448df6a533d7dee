//! Genetic search: the four-phase GA, the plain single-phase GA, and the
//! separate, largest-workload and stage-wise sequential strategies.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diversity::{initial_population, sample_feasible, PopulationSizes};
use crate::error::{DseError, Result};
use crate::evaluator::ModelCoefficients;
use crate::objective::{finite_or_null, JointScore, ObjectiveSpec};
use crate::operators::{crossover_points, default_gene_prob, mutate_point};
use crate::problem::Problem;
use crate::space::{param, DesignPoint, SearchSpace, SystemMode};
use crate::workload::{largest_by_layer, largest_by_total, Workload};

/// Designs kept in [`RunResult::top_k`].
pub const TOP_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseName {
    Exploration,
    Transition,
    Convergence,
    Finetuning,
    /// The plain GA's only phase.
    Single,
}

impl PhaseName {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseName::Exploration => "exploration",
            PhaseName::Transition => "transition",
            PhaseName::Convergence => "convergence",
            PhaseName::Finetuning => "finetuning",
            PhaseName::Single => "single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub name: PhaseName,
    pub p_c: f64,
    pub eta_c: f64,
    pub p_m: f64,
    pub eta_m: f64,
    pub generations: usize,
}

impl PhaseConfig {
    pub const DEFAULT_GENERATIONS: usize = 10;

    /// Exploration, transition, convergence and finetuning, `g` generations each.
    pub fn four_phase(g: usize) -> Vec<PhaseConfig> {
        let p = |name, p_c, eta_c, p_m, eta_m| PhaseConfig {
            name,
            p_c,
            eta_c,
            p_m,
            eta_m,
            generations: g,
        };
        vec![
            p(PhaseName::Exploration, 1.0, 3.0, 1.0, 3.0),
            p(PhaseName::Transition, 0.9, 7.0, 0.5, 7.0),
            p(PhaseName::Convergence, 1.0, 15.0, 0.2, 15.0),
            p(PhaseName::Finetuning, 1.0, 25.0, 0.05, 25.0),
        ]
    }

    /// Fixed parameters of the plain GA.
    pub fn plain(generations: usize) -> PhaseConfig {
        PhaseConfig {
            name: PhaseName::Single,
            p_c: 0.9,
            eta_c: 15.0,
            p_m: 1.0,
            eta_m: 20.0,
            generations,
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_c) || !prob(self.p_m) || !(self.eta_c > 0.0) || !(self.eta_m > 0.0) {
            return Err(DseError::Config(format!(
                "phase {}: probabilities must lie in [0, 1] and distribution indices be positive",
                self.name.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Diversity sampling followed by the four-phase GA.
    Proposed,
    PlainGa,
    /// The proposed search on a single workload.
    Separate,
    Largest,
    SequentialMax,
    SequentialMedian,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Proposed => "proposed",
            Strategy::PlainGa => "plain-ga",
            Strategy::Separate => "separate",
            Strategy::Largest => "largest",
            Strategy::SequentialMax => "sequential-max",
            Strategy::SequentialMedian => "sequential-median",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = DseError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "proposed" => Strategy::Proposed,
            "plain-ga" => Strategy::PlainGa,
            "separate" => Strategy::Separate,
            "largest" => Strategy::Largest,
            "sequential-max" => Strategy::SequentialMax,
            "sequential-median" => Strategy::SequentialMedian,
            other => return Err(DseError::Config(format!("unknown strategy `{other}`"))),
        })
    }
}

/// Start point of the sequential search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    MaxConfig,
    MedianConfig,
}

/// Stage order of the sequential search, device level first.
pub const STAGES: [(&str, &[&str]); 4] = [
    ("device", &[param::BITS_CELL]),
    ("circuit", &[param::XBAR_ROWS, param::XBAR_COLS]),
    (
        "architecture",
        &[param::C_PER_TILE, param::T_PER_ROUTER, param::G_PER_CHIP, param::GLB],
    ),
    ("system", &[param::V_OP, param::T_CYCLE, param::TECH]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDesign {
    pub design: DesignPoint,
    /// Decoded option value of each gene.
    pub values: Vec<f64>,
    pub score: JointScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub phase: String,
    /// Best feasible score of the population (`null` when none is feasible).
    #[serde(with = "finite_or_null")]
    pub best_score: f64,
    #[serde(with = "finite_or_null")]
    pub mean_score: f64,
    /// Cumulative evaluator calls.
    pub evals: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub sampling_s: f64,
    pub search_s: f64,
}

impl Timing {
    pub fn total_s(&self) -> f64 {
        self.sampling_s + self.search_s
    }
}

/// What one search produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: ScoredDesign,
    pub top_k: Vec<ScoredDesign>,
    pub history: Vec<GenerationRecord>,
    pub eval_count: u64,
    /// Evaluator calls spent on the initial population.
    pub sampling_evals: u64,
    #[serde(skip)]
    pub timing: Timing,
}

struct Search<'a> {
    problem: &'a Problem,
    rng: ChaCha8Rng,
    p_ga: usize,
    history: Vec<GenerationRecord>,
    generation: usize,
    eval_offset: u64,
    identical_streak: usize,
}

impl<'a> Search<'a> {
    fn new(problem: &'a Problem, p_ga: usize, rng: ChaCha8Rng) -> Self {
        Search {
            problem,
            rng,
            p_ga,
            history: Vec::new(),
            generation: 0,
            eval_offset: 0,
            identical_streak: 0,
        }
    }

    fn record(&mut self, phase: &str, scores: &[JointScore]) {
        let feasible: Vec<f64> = scores.iter().filter(|s| s.feasible).map(|s| s.value).collect();
        let best = feasible.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = if feasible.is_empty() {
            f64::INFINITY
        } else {
            feasible.iter().sum::<f64>() / feasible.len() as f64
        };
        self.history.push(GenerationRecord {
            generation: self.generation,
            phase: phase.to_string(),
            best_score: best,
            mean_score: mean,
            evals: self.eval_offset + self.problem.eval_count(),
        });
        self.generation += 1;
    }

    /// Rank-based binary tournament: the better of two uniformly drawn ranks.
    fn tournament(&mut self, order: &[usize]) -> usize {
        let i = self.rng.gen_range(0..order.len());
        let j = self.rng.gen_range(0..order.len());
        order[i.min(j)]
    }

    fn evolve(&mut self, mut pop: Vec<DesignPoint>, phases: &[PhaseConfig], label: Option<&str>) -> Result<Vec<DesignPoint>> {
        let space = &self.problem.space;
        let gene_prob = default_gene_prob(space);
        for phase in phases {
            for _ in 0..phase.generations {
                let scores = self.problem.score_batch(&pop)?;
                let mut order: Vec<usize> = (0..pop.len()).collect();
                order.sort_by(|&a, &b| scores[a].rank_cmp(&scores[b]).then_with(|| pop[a].cmp(&pop[b])));
                self.record(label.unwrap_or(phase.name.as_str()), &scores);

                let mut next = vec![pop[order[0]].clone()];
                while next.len() < self.p_ga {
                    let a = self.tournament(&order);
                    let b = self.tournament(&order);
                    let (c1, c2) = crossover_points(space, &pop[a], &pop[b], phase.eta_c, phase.p_c, &mut self.rng);
                    for child in [c1, c2] {
                        if next.len() < self.p_ga {
                            let m = mutate_point(space, &child, phase.eta_m, phase.p_m, gene_prob, &mut self.rng);
                            next.push(m);
                        }
                    }
                }

                if next.iter().all(|d| *d == next[0]) {
                    self.identical_streak += 1;
                } else {
                    self.identical_streak = 0;
                }
                if self.p_ga > 1 && self.identical_streak >= 2 * phase.generations {
                    match sample_feasible(self.problem, 1, &mut self.rng) {
                        Ok((mut fresh, _)) => {
                            info!("population collapsed to one design; injecting a random individual");
                            *next.last_mut().expect("non-empty population") = fresh.remove(0);
                        }
                        Err(DseError::SamplingExhausted { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                pop = next;
            }
        }
        Ok(pop)
    }

    fn finish(&mut self, pop: &[DesignPoint]) -> Result<()> {
        let scores = self.problem.score_batch(pop)?;
        self.record("final", &scores);
        Ok(())
    }
}

fn scored(space: &SearchSpace, design: DesignPoint, score: JointScore) -> ScoredDesign {
    ScoredDesign {
        values: space.values(&design),
        design,
        score,
    }
}

fn outcome_from_archive(problem: &Problem, search: Search<'_>, sampling_evals: u64, timing: Timing) -> SearchOutcome {
    let top_k: Vec<ScoredDesign> = problem
        .top_k(TOP_K)
        .into_iter()
        .map(|(d, s)| scored(&problem.space, d, s))
        .collect();
    SearchOutcome {
        best: top_k[0].clone(),
        top_k,
        history: search.history,
        eval_count: problem.eval_count(),
        sampling_evals,
        timing,
    }
}

fn check_schedule(phases: &[PhaseConfig], p_ga: usize) -> Result<()> {
    if p_ga == 0 {
        return Err(DseError::Config("P_GA must be positive".into()));
    }
    phases.iter().try_for_each(PhaseConfig::validate)
}

/// Diversity sampling followed by the phase schedule.
pub fn run_joint(problem: &Problem, phases: &[PhaseConfig], sizes: PopulationSizes, seed: u64) -> Result<SearchOutcome> {
    check_schedule(phases, sizes.p_ga)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = initial_population(problem, sizes, &mut rng)?;
    let sampling_evals = problem.eval_count();
    let sampling_s = start.elapsed().as_secs_f64();
    debug!("sampling done: {sampling_evals} evaluations");

    let search_start = Instant::now();
    let mut search = Search::new(problem, sizes.p_ga, rng);
    let pop = search.evolve(init.elite, phases, None)?;
    search.finish(&pop)?;
    let timing = Timing {
        sampling_s,
        search_s: search_start.elapsed().as_secs_f64(),
    };
    Ok(outcome_from_archive(problem, search, sampling_evals, timing))
}

/// Plain GA: random capacity-feasible population of `p_ga`, one phase with
/// the fixed plain parameters.
pub fn run_baseline_ga(problem: &Problem, generations: usize, p_ga: usize, seed: u64) -> Result<SearchOutcome> {
    let phase = PhaseConfig::plain(generations);
    check_schedule(&[phase], p_ga)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pop, _) = sample_feasible(problem, p_ga, &mut rng)?;
    let sampling_s = start.elapsed().as_secs_f64();
    let search_start = Instant::now();
    let mut search = Search::new(problem, p_ga, rng);
    let pop = search.evolve(pop, &[phase], None)?;
    search.finish(&pop)?;
    let timing = Timing {
        sampling_s,
        search_s: search_start.elapsed().as_secs_f64(),
    };
    Ok(outcome_from_archive(problem, search, 0, timing))
}

/// Stage-wise search: each stage runs a plain GA over its own genes with
/// all others frozen, starting from `start` and then from the previous
/// stage's best design.
pub fn run_sequential(
    problem: &Problem,
    start: StartPoint,
    stage_generations: usize,
    p_ga: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let phase = PhaseConfig::plain(stage_generations);
    check_schedule(&[phase], p_ga)?;
    let clock = Instant::now();
    let space = &problem.space;
    let mut current = match start {
        StartPoint::MaxConfig => space.max_point(),
        StartPoint::MedianConfig => space.median_point(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history = Vec::new();
    let mut generation = 0;
    let mut evals = 0u64;
    let mut seen: Vec<(DesignPoint, JointScore)> = Vec::new();
    let mut current_score = None;

    for (stage, names) in STAGES {
        let free: Vec<usize> = names
            .iter()
            .filter_map(|n| space.domain_index(n))
            .filter(|&i| space.domains()[i].len() > 1)
            .collect();
        if free.is_empty() {
            continue;
        }
        let sub = space.restrict(&current, &free)?;
        let sub_problem = Problem::with_cache(
            sub,
            problem.workloads.clone(),
            problem.objective.clone(),
            problem.coefficients,
            problem.cache().is_enabled(),
        )?;
        let sub_start = DesignPoint(
            (0..space.n_genes())
                .map(|i| if free.contains(&i) { current.0[i] } else { 0 })
                .collect(),
        );
        let mut pop = vec![sub_start.clone()];
        match sample_feasible(&sub_problem, p_ga - 1, &mut rng) {
            Ok((more, _)) => pop.extend(more),
            Err(DseError::SamplingExhausted { .. }) => pop.resize(p_ga, sub_start.clone()),
            Err(e) => return Err(e),
        }

        let mut search = Search::new(&sub_problem, p_ga, rng);
        search.generation = generation;
        search.eval_offset = evals;
        let pop = search.evolve(pop, &[phase], Some(stage))?;
        search.finish(&pop)?;
        let (stage_best, best_score) = sub_problem.top_k(1).remove(0);
        let start_score = sub_problem.score(&sub_start)?;
        // ties keep the incoming design
        if best_score.is_better_than(&start_score) {
            current = space.lift(&current, &free, &stage_best);
            current_score = Some(best_score);
        } else {
            current_score = Some(start_score);
        }
        seen.extend(
            sub_problem
                .top_k(TOP_K)
                .into_iter()
                .map(|(d, s)| (space.lift(&current, &free, &d), s)),
        );
        debug!("stage {stage}: best {current}");

        generation = search.generation;
        evals += sub_problem.eval_count();
        rng = search.rng;
        history.extend(search.history);
    }

    let current_score = match current_score {
        Some(s) => s,
        None => {
            // nothing to optimize: every domain has a single option
            let s = problem.score(&current)?;
            evals += problem.eval_count();
            s
        }
    };
    seen.retain(|(d, _)| *d != current);
    seen.sort_by(|a, b| a.1.rank_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    seen.dedup_by(|a, b| a.0 == b.0);
    seen.insert(0, (current, current_score));
    seen.truncate(TOP_K);
    let top_k: Vec<ScoredDesign> = seen.into_iter().map(|(d, s)| scored(space, d, s)).collect();
    Ok(SearchOutcome {
        best: top_k[0].clone(),
        top_k,
        history,
        eval_count: evals,
        sampling_evals: 0,
        timing: Timing {
            sampling_s: 0.0,
            search_s: clock.elapsed().as_secs_f64(),
        },
    })
}

fn default_cache() -> bool {
    true
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub strategy: Strategy,
    pub space: SearchSpace,
    pub workloads: Vec<Workload>,
    pub objective: ObjectiveSpec,
    pub coefficients: ModelCoefficients,
    pub phases: Vec<PhaseConfig>,
    pub sizes: PopulationSizes,
    pub seed: u64,
    #[serde(default = "default_cache")]
    pub cache: bool,
}

impl Experiment {
    /// The proposed search with default schedule and population sizes.
    pub fn new(space: SearchSpace, workloads: Vec<Workload>, objective: ObjectiveSpec, seed: u64) -> Self {
        let coefficients = ModelCoefficients::for_mode(space.mode());
        Experiment {
            strategy: Strategy::Proposed,
            space,
            workloads,
            objective,
            coefficients,
            phases: PhaseConfig::four_phase(PhaseConfig::DEFAULT_GENERATIONS),
            sizes: PopulationSizes::default(),
            seed,
            cache: true,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Generations over the whole schedule.
    pub fn total_generations(&self) -> usize {
        self.phases.iter().map(|p| p.generations).sum()
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::with_cache(
            self.space.clone(),
            self.workloads.clone(),
            self.objective.clone(),
            self.coefficients,
            self.cache,
        )
    }

    /// Index of the workload the largest-workload strategy optimizes for.
    pub fn largest_workload(&self) -> Result<usize> {
        let pick = match self.space.mode() {
            SystemMode::WeightSwapping => largest_by_layer(&self.workloads, 1),
            SystemMode::WeightStationary => largest_by_total(&self.workloads, 1),
        };
        pick.ok_or(DseError::EmptyList)
    }

    pub fn run(&self) -> Result<RunResult> {
        let mut largest_workload = None;
        let mut rescored = None;
        let outcome = match self.strategy {
            Strategy::Proposed => run_joint(&self.problem()?, &self.phases, self.sizes, self.seed)?,
            Strategy::Separate => {
                if self.workloads.len() != 1 {
                    return Err(DseError::Config(format!(
                        "the separate strategy takes exactly one workload, got {}",
                        self.workloads.len()
                    )));
                }
                run_joint(&self.problem()?, &self.phases, self.sizes, self.seed)?
            }
            Strategy::PlainGa => {
                run_baseline_ga(&self.problem()?, self.total_generations(), self.sizes.p_ga, self.seed)?
            }
            Strategy::Largest => {
                let idx = self.largest_workload()?;
                let single = Experiment {
                    strategy: Strategy::Separate,
                    workloads: vec![self.workloads[idx].clone()],
                    ..self.clone()
                };
                let out = run_joint(&single.problem()?, &self.phases, self.sizes, self.seed)?;
                let full = self.problem()?;
                rescored = Some(full.score(&out.best.design)?);
                largest_workload = Some(self.workloads[idx].name.clone());
                out
            }
            Strategy::SequentialMax | Strategy::SequentialMedian => {
                let start = if self.strategy == Strategy::SequentialMax {
                    StartPoint::MaxConfig
                } else {
                    StartPoint::MedianConfig
                };
                let per_stage = self.total_generations() / STAGES.len();
                run_sequential(&self.problem()?, start, per_stage, self.sizes.p_ga, self.seed)?
            }
        };
        Ok(RunResult {
            config: self.clone(),
            outcome,
            largest_workload,
            rescored,
        })
    }
}

/// A run record: the experiment and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: Experiment,
    #[serde(flatten)]
    pub outcome: SearchOutcome,
    /// Workload the largest-workload strategy optimized for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub largest_workload: Option<String>,
    /// The best design scored on every workload of the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescored: Option<JointScore>,
}

impl RunResult {
    pub fn best(&self) -> &ScoredDesign {
        &self.outcome.best
    }

    /// Score of the best design on the experiment's full workload set.
    pub fn joint_score(&self) -> &JointScore {
        self.rescored.as_ref().unwrap_or(&self.outcome.best.score)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run records serialize")
    }
}

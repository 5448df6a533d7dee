//! Hamming-distance diversity sampling of the initial GA population.
//!
//! `C₁` is a random (capacity-filtered) draw, `C₂` the greedy farthest-point
//! subset of `C₁`, and the elite the best-scoring members of `C₂`.

use log::{debug, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};
use crate::objective::JointScore;
use crate::problem::Problem;
use crate::space::DesignPoint;

/// Number of differing genes.
pub fn hamming(x: &DesignPoint, y: &DesignPoint) -> Result<usize> {
    if x.len() != y.len() {
        return Err(DseError::LengthMismatch(x.len(), y.len()));
    }
    Ok(x.genes().iter().zip(y.genes()).filter(|(a, b)| a != b).count())
}

pub fn min_distance(x: &DesignPoint, set: &[DesignPoint]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for y in set {
        let d = hamming(x, y)?;
        best = Some(best.map_or(d, |b| b.min(d)));
    }
    best.ok_or(DseError::EmptySet)
}

/// Result of greedy farthest-point selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedySelection {
    /// Indices into the candidate pool, in pick order.
    pub indices: Vec<usize>,
    /// `d_min` of each pick to the designs picked before it (the seed's
    /// entry is the gene count).
    pub d_min: Vec<usize>,
}

/// Pick `p_e` designs from `pool`: start from `pool[0]`, then repeatedly add
/// the candidate whose minimum Hamming distance to the picked set is
/// largest. Ties go to the lowest pool index.
pub fn greedy_select(pool: &[DesignPoint], p_e: usize) -> Result<GreedySelection> {
    if p_e > pool.len() {
        return Err(DseError::PoolTooSmall {
            requested: p_e,
            available: pool.len(),
        });
    }
    if p_e == 0 {
        return Ok(GreedySelection {
            indices: vec![],
            d_min: vec![],
        });
    }
    let n_genes = pool[0].len();
    let mut picked = vec![false; pool.len()];
    let mut dist = vec![usize::MAX; pool.len()];
    let mut indices = Vec::with_capacity(p_e);
    let mut d_min = Vec::with_capacity(p_e);

    let mut current = 0;
    let mut current_d = n_genes;
    loop {
        picked[current] = true;
        indices.push(current);
        d_min.push(current_d);
        if indices.len() == p_e {
            break;
        }
        let newest = &pool[current];
        let mut best: Option<(usize, usize)> = None;
        for (i, cand) in pool.iter().enumerate() {
            if picked[i] {
                continue;
            }
            let d = hamming(cand, newest)?;
            if d < dist[i] {
                dist[i] = d;
            }
            if best.is_none_or(|(_, bd)| dist[i] > bd) {
                best = Some((i, dist[i]));
            }
        }
        let (next, d) = best.expect("pool has unpicked candidates");
        current = next;
        current_d = d;
    }
    Ok(GreedySelection { indices, d_min })
}

/// Mean Hamming distance over all unordered pairs.
pub fn mean_pairwise_hamming(points: &[DesignPoint]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += hamming(&points[i], &points[j]).expect("equal gene lengths");
        }
    }
    total as f64 / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationSizes {
    /// Random candidates drawn (`C₁`).
    pub p_h: usize,
    /// Diverse candidates scored (`C₂`).
    pub p_e: usize,
    /// GA population.
    pub p_ga: usize,
}

impl Default for PopulationSizes {
    fn default() -> Self {
        PopulationSizes {
            p_h: 1000,
            p_e: 500,
            p_ga: 40,
        }
    }
}

impl PopulationSizes {
    pub fn validate(&self) -> Result<()> {
        if self.p_ga == 0 || self.p_e < self.p_ga || self.p_h < self.p_e {
            return Err(DseError::Config(format!(
                "population sizes must satisfy 0 < P_GA ≤ P_E ≤ P_H (got {}, {}, {})",
                self.p_ga, self.p_e, self.p_h
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct InitialPopulation {
    pub c1: Vec<DesignPoint>,
    pub c2: Vec<DesignPoint>,
    pub c2_scores: Vec<JointScore>,
    pub elite: Vec<DesignPoint>,
    pub greedy: GreedySelection,
    /// Random draws spent filling `C₁`.
    pub draws: usize,
}

/// Draw `n` random designs; weight-stationary designs must hold the largest
/// workload. Gives up after `100·n` draws.
pub fn sample_feasible<R: Rng + ?Sized>(problem: &Problem, n: usize, rng: &mut R) -> Result<(Vec<DesignPoint>, usize)> {
    let budget = 100 * n.max(1);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0;
    while out.len() < n {
        if draws == budget {
            return Err(DseError::SamplingExhausted {
                accepted: out.len(),
                draws,
                needed: n,
            });
        }
        draws += 1;
        let p = problem.space.random_point(rng);
        if problem.capacity_feasible(&p)? {
            out.push(p);
        }
    }
    Ok((out, draws))
}

/// Diversity-driven initial population.
pub fn initial_population<R: Rng + ?Sized>(
    problem: &Problem,
    sizes: PopulationSizes,
    rng: &mut R,
) -> Result<InitialPopulation> {
    sizes.validate()?;
    let (c1, draws) = sample_feasible(problem, sizes.p_h, rng)?;
    debug!("C1: {} designs from {} draws", c1.len(), draws);
    let greedy = greedy_select(&c1, sizes.p_e)?;
    let c2: Vec<DesignPoint> = greedy.indices.iter().map(|&i| c1[i].clone()).collect();
    let c2_scores = problem.score_batch(&c2)?;

    let mut order: Vec<usize> = (0..c2.len()).collect();
    order.sort_by(|&a, &b| c2_scores[a].rank_cmp(&c2_scores[b]).then(a.cmp(&b)));
    order.truncate(sizes.p_ga);
    let feasible = order.iter().filter(|&&i| c2_scores[i].feasible).count();
    if feasible < sizes.p_ga {
        warn!(
            "only {feasible} of {} elite designs satisfy the constraints; filling with the best infeasible ones",
            sizes.p_ga
        );
    }
    let elite = order.iter().map(|&i| c2[i].clone()).collect();
    Ok(InitialPopulation {
        c1,
        c2,
        c2_scores,
        elite,
        greedy,
        draws,
    })
}

//! Joint multi-workload scoring.
//!
//! A score is a product of metric terms, each aggregated across workloads.
//! Scores carry mixed units and are only ever compared, never summed.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};
use crate::evaluator::HwMetrics;
use crate::space::HardwareConfig;
use crate::tech;
use crate::workload::Workload;

pub const DEFAULT_AREA_CONSTRAINT_MM2: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTerm {
    Energy,
    Latency,
    Area,
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Max,
    All,
    Mean,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Aggregation::Max, Aggregation::All, Aggregation::Mean];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Max => "max",
            Aggregation::All => "all",
            Aggregation::Mean => "mean",
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = DseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "all" => Ok(Aggregation::All),
            "mean" => Ok(Aggregation::Mean),
            other => Err(DseError::InvalidObjective(format!("unknown aggregation `{other}`"))),
        }
    }
}

/// Max → max, All → product, Mean → arithmetic mean.
pub fn aggregate(values: &[f64], scheme: Aggregation) -> Result<f64> {
    if values.is_empty() {
        return Err(DseError::EmptyList);
    }
    Ok(match scheme {
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::All => values.iter().product(),
        Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
    })
}

/// Per-workload accuracy in (0, 1]; the joint score is divided by the
/// product of accuracies. Implementations must be deterministic.
pub trait AccuracyProvider: Send + Sync {
    fn name(&self) -> &str;
    fn accuracy(&self, config: &HardwareConfig, workload: &Workload) -> f64;
}

/// The default provider: every workload is perfectly accurate.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantAccuracy;

impl AccuracyProvider for ConstantAccuracy {
    fn name(&self) -> &str {
        "constant-1"
    }

    fn accuracy(&self, _: &HardwareConfig, _: &Workload) -> f64 {
        1.0
    }
}

#[derive(Clone, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub terms: Vec<MetricTerm>,
    pub aggregation: Aggregation,
    pub a_constr_mm2: f64,
    #[serde(skip)]
    pub accuracy: Option<Arc<dyn AccuracyProvider>>,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("terms", &self.terms)
            .field("aggregation", &self.aggregation)
            .field("a_constr_mm2", &self.a_constr_mm2)
            .field("accuracy", &self.accuracy.as_ref().map(|a| a.name().to_string()))
            .finish()
    }
}

impl PartialEq for ObjectiveSpec {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.aggregation == other.aggregation
            && self.a_constr_mm2 == other.a_constr_mm2
            && self.accuracy.as_ref().map(|a| a.name()) == other.accuracy.as_ref().map(|a| a.name())
    }
}

impl ObjectiveSpec {
    pub fn new(terms: Vec<MetricTerm>, aggregation: Aggregation, a_constr_mm2: f64) -> Result<Self> {
        let spec = ObjectiveSpec {
            terms,
            aggregation,
            a_constr_mm2,
            accuracy: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Energy × latency × area under `aggregation`, 800 mm² budget.
    pub fn edap(aggregation: Aggregation) -> Self {
        Self::named("edap", aggregation).expect("edap is a known objective")
    }

    /// Named objective: `edap`, `edp`, `energy`, `latency`, `area`, `ed-cost`.
    pub fn named(name: &str, aggregation: Aggregation) -> Result<Self> {
        use MetricTerm::*;
        let terms = match name {
            "edap" => vec![Energy, Latency, Area],
            "edp" => vec![Energy, Latency],
            "energy" => vec![Energy],
            "latency" => vec![Latency],
            "area" => vec![Area],
            "ed-cost" | "ed_cost" => vec![Energy, Latency, Cost],
            other => return Err(DseError::InvalidObjective(format!("unknown objective `{other}`"))),
        };
        Self::new(terms, aggregation, DEFAULT_AREA_CONSTRAINT_MM2)
    }

    pub fn with_accuracy(mut self, provider: Arc<dyn AccuracyProvider>) -> Self {
        self.accuracy = Some(provider);
        self
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(DseError::InvalidObjective("no metric terms".into()));
        }
        if self.terms.contains(&MetricTerm::Area) && self.terms.contains(&MetricTerm::Cost) {
            return Err(DseError::InvalidObjective(
                "cost is proportional to area; select one of them".into(),
            ));
        }
        if !(self.a_constr_mm2 > 0.0) {
            return Err(DseError::InvalidObjective("area constraint must be positive".into()));
        }
        Ok(())
    }

    pub fn uses_cost(&self) -> bool {
        self.terms.contains(&MetricTerm::Cost)
    }

    /// Unit string of the score for `n` workloads, e.g. `mJ·ms·mm²`.
    pub fn unit(&self, n: usize) -> String {
        let pow = |u: &str| match (self.aggregation, n) {
            (Aggregation::All, n) if n > 1 => format!("{u}^{n}"),
            _ => u.to_string(),
        };
        self.terms
            .iter()
            .map(|t| match t {
                MetricTerm::Energy => pow("mJ"),
                MetricTerm::Latency => pow("ms"),
                MetricTerm::Area => "mm²".to_string(),
                MetricTerm::Cost => "cost".to_string(),
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

/// Fabrication cost: `α(tech) × area`, α normalized to 32 nm.
pub fn cost(area_mm2: f64, tech_nm: u32) -> Result<f64> {
    let node = tech::node(tech_nm).ok_or(DseError::UnknownTechNode(tech_nm))?;
    Ok(node.alpha * area_mm2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointScore {
    /// `null` in JSON when the design could not be mapped at all.
    #[serde(with = "finite_or_null")]
    pub value: f64,
    pub feasible: bool,
    pub area_mm2: f64,
    /// One entry per workload, in workload order; empty when some workload
    /// does not fit a weight-stationary design.
    pub per_workload: Vec<HwMetrics>,
}

impl JointScore {
    /// A design that cannot hold the weights of some workload.
    pub fn unmappable(area_mm2: f64) -> Self {
        JointScore {
            value: f64::INFINITY,
            feasible: false,
            area_mm2,
            per_workload: Vec::new(),
        }
    }

    /// Feasible designs first, then by value.
    pub fn rank_cmp(&self, other: &JointScore) -> Ordering {
        other
            .feasible
            .cmp(&self.feasible)
            .then_with(|| self.value.total_cmp(&other.value))
    }

    pub fn is_better_than(&self, other: &JointScore) -> bool {
        self.rank_cmp(other) == Ordering::Less
    }

    /// `aggregate(E) × aggregate(L) × A` regardless of the run's objective.
    pub fn edap(&self, scheme: Aggregation) -> Option<f64> {
        if self.per_workload.is_empty() {
            return None;
        }
        let e: Vec<f64> = self.per_workload.iter().map(|m| m.energy_mj).collect();
        let l: Vec<f64> = self.per_workload.iter().map(|m| m.latency_ms).collect();
        Some(aggregate(&e, scheme).ok()? * aggregate(&l, scheme).ok()? * self.area_mm2)
    }
}

/// Score one design from its per-workload metrics.
///
/// `accuracies`, when given, holds one value in (0, 1] per workload.
pub fn joint_score(
    metrics: &[HwMetrics],
    area_mm2: f64,
    tech_nm: u32,
    spec: &ObjectiveSpec,
    accuracies: Option<&[f64]>,
) -> Result<JointScore> {
    let mut value = 1.0;
    for term in &spec.terms {
        value *= match term {
            MetricTerm::Energy => {
                aggregate(&metrics.iter().map(|m| m.energy_mj).collect::<Vec<_>>(), spec.aggregation)?
            }
            MetricTerm::Latency => {
                aggregate(&metrics.iter().map(|m| m.latency_ms).collect::<Vec<_>>(), spec.aggregation)?
            }
            MetricTerm::Area => area_mm2,
            MetricTerm::Cost => cost(area_mm2, tech_nm)?,
        };
    }
    if let Some(acc) = accuracies {
        value /= acc.iter().product::<f64>();
    }
    Ok(JointScore {
        value,
        feasible: area_mm2 <= spec.a_constr_mm2 && value.is_finite(),
        area_mm2,
        per_workload: metrics.to_vec(),
    })
}

pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(e: f64, l: f64) -> HwMetrics {
        HwMetrics {
            energy_mj: e,
            latency_ms: l,
            area_mm2: 10.0,
        }
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[2.0, 4.0], Aggregation::Max).unwrap(), 4.0);
        assert_eq!(aggregate(&[2.0, 4.0], Aggregation::All).unwrap(), 8.0);
        assert_eq!(aggregate(&[2.0, 4.0], Aggregation::Mean).unwrap(), 3.0);
        assert!(matches!(aggregate(&[], Aggregation::Max), Err(DseError::EmptyList)));
    }

    #[test]
    fn joint_score_examples() {
        let ms = [m(2.0, 1.0), m(4.0, 3.0)];
        let max = joint_score(&ms, 10.0, 32, &ObjectiveSpec::edap(Aggregation::Max), None).unwrap();
        assert_eq!(max.value, 120.0);
        assert!(max.feasible);
        let mean = joint_score(&ms, 10.0, 32, &ObjectiveSpec::edap(Aggregation::Mean), None).unwrap();
        assert_eq!(mean.value, 60.0);
        let all = joint_score(&ms, 10.0, 32, &ObjectiveSpec::edap(Aggregation::All), None).unwrap();
        assert_eq!(all.value, 8.0 * 3.0 * 10.0);
    }

    #[test]
    fn single_workload_schemes_coincide() {
        let ms = [m(2.5, 7.0)];
        let scores: Vec<f64> = Aggregation::ALL
            .iter()
            .map(|&a| joint_score(&ms, 3.0, 32, &ObjectiveSpec::edap(a), None).unwrap().value)
            .collect();
        assert_eq!(scores, vec![52.5; 3]);
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(100.0, 32).unwrap(), 100.0);
        assert!((cost(100.0, 7).unwrap() - 387.1).abs() < 1e-9);
        assert!(matches!(cost(1.0, 28), Err(DseError::UnknownTechNode(28))));
    }

    #[test]
    fn area_constraint_sets_feasibility() {
        let spec = ObjectiveSpec::edap(Aggregation::Max);
        let over = joint_score(&[m(1.0, 1.0)], 800.5, 32, &spec, None).unwrap();
        assert!(!over.feasible);
        let at = joint_score(&[m(1.0, 1.0)], 800.0, 32, &spec, None).unwrap();
        assert!(at.feasible);
        assert!(at.is_better_than(&over));
    }

    #[test]
    fn cost_objective_excludes_area() {
        assert!(ObjectiveSpec::new(vec![MetricTerm::Area, MetricTerm::Cost], Aggregation::Max, 800.0).is_err());
        assert!(ObjectiveSpec::new(vec![], Aggregation::Max, 800.0).is_err());
        let ed_cost = ObjectiveSpec::named("ed-cost", Aggregation::Max).unwrap();
        let s = joint_score(&[m(2.0, 3.0)], 10.0, 7, &ed_cost, None).unwrap();
        assert!((s.value - 2.0 * 3.0 * 38.71).abs() < 1e-9);
        assert_eq!(ed_cost.unit(4), "mJ·ms·cost");
        assert_eq!(ObjectiveSpec::edap(Aggregation::All).unit(4), "mJ^4·ms^4·mm²");
    }

    #[test]
    fn accuracy_divides_score() {
        let spec = ObjectiveSpec::edap(Aggregation::Max);
        let s = joint_score(&[m(2.0, 1.0), m(4.0, 3.0)], 10.0, 32, &spec, Some(&[0.5, 0.8])).unwrap();
        assert!((s.value - 120.0 / 0.4).abs() < 1e-9);
    }

    #[test]
    fn unmappable_serializes_as_null() {
        let s = JointScore::unmappable(5.0);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"value\":null"));
        let back: JointScore = serde_json::from_str(&json).unwrap();
        assert_eq!(back.value, f64::INFINITY);
    }

    fn metrics_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.01f64..100.0, 0.01f64..100.0), 1..6)
    }

    proptest! {
        #[test]
        fn permutation_invariant(ms in metrics_strategy(), area in 1.0f64..1000.0, rot in 0usize..6) {
            let a: Vec<HwMetrics> = ms.iter().map(|&(e, l)| m(e, l)).collect();
            let mut b = a.clone();
            let k = rot % b.len();
            b.rotate_left(k);
            b.reverse();
            for scheme in Aggregation::ALL {
                let spec = ObjectiveSpec::edap(scheme);
                let sa = joint_score(&a, area, 32, &spec, None).unwrap();
                let sb = joint_score(&b, area, 32, &spec, None).unwrap();
                let tol = 1e-12 * sa.value.abs();
                prop_assert!((sa.value - sb.value).abs() <= tol);
                prop_assert_eq!(sa.feasible, sb.feasible);
            }
        }

        #[test]
        fn ordering_survives_energy_scaling(x in metrics_strategy(), y in metrics_strategy(), k in 0.01f64..100.0) {
            let n = x.len().min(y.len());
            let a: Vec<HwMetrics> = x[..n].iter().map(|&(e, l)| m(e, l)).collect();
            let b: Vec<HwMetrics> = y[..n].iter().map(|&(e, l)| m(e, l)).collect();
            let scale = |v: &[HwMetrics]| v.iter().map(|h| m(h.energy_mj * k, h.latency_ms)).collect::<Vec<_>>();
            for scheme in Aggregation::ALL {
                let spec = ObjectiveSpec::edap(scheme);
                let before = joint_score(&a, 5.0, 32, &spec, None).unwrap().value
                    < joint_score(&b, 7.0, 32, &spec, None).unwrap().value;
                let after = joint_score(&scale(&a), 5.0, 32, &spec, None).unwrap().value
                    < joint_score(&scale(&b), 7.0, 32, &spec, None).unwrap().value;
                // skip pairs within rounding distance of a tie
                let va = joint_score(&a, 5.0, 32, &spec, None).unwrap().value;
                let vb = joint_score(&b, 7.0, 32, &spec, None).unwrap().value;
                if (va - vb).abs() > 1e-9 * va.max(vb) {
                    prop_assert_eq!(before, after);
                }
            }
        }

        #[test]
        fn feasible_always_wins(fv in 0.0f64..1e12, iv in 0.0f64..1e12) {
            let f = JointScore { value: fv, feasible: true, area_mm2: 1.0, per_workload: vec![] };
            let i = JointScore { value: iv, feasible: false, area_mm2: 1.0, per_workload: vec![] };
            prop_assert!(f.is_better_than(&i));
            prop_assert!(!i.is_better_than(&f));
        }
    }
}

//! Analytical energy / latency / area model of a tiled crossbar accelerator.
//!
//! Each layer's lowered weight matrix is folded onto `rows × cols` crossbar
//! macros. Inputs are applied bit-serially (8-bit activations) and every
//! macro owns one ADC that converts its columns one after another.
//! Weight-stationary designs keep every weight on chip; weight-swapping
//! designs stream layer groups from DRAM whenever the model does not fit.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};
use crate::space::{cell_capacity, DesignPoint, HardwareConfig, SystemMode};
use crate::workload::{cells_per_weight, Workload};

/// Activation precision, applied bit-serially.
pub const ACTIVATION_BITS: u32 = 8;

const PJ_PER_MJ: f64 = 1e9;
const NS_PER_MS: f64 = 1e6;
const UM2_PER_MM2: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwMetrics {
    pub energy_mj: f64,
    pub latency_ms: f64,
    pub area_mm2: f64,
}

impl HwMetrics {
    pub fn edap(&self) -> f64 {
        self.energy_mj * self.latency_ms * self.area_mm2
    }
}

/// Model constants, all referenced to the 32 nm node and `v_ref`.
///
/// The DRAM figures stand in for an LPDDR4 channel and are placeholders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    /// Energy of driving one crossbar row for one input bit, pJ.
    pub e_cell_pj: f64,
    /// Energy of one ADC conversion, pJ.
    pub e_adc_pj: f64,
    pub e_buf_pj_per_byte: f64,
    pub e_router_pj_per_byte: f64,
    pub e_dram_pj_per_byte: f64,
    /// Area of one memory cell, µm².
    pub a_cell_um2: f64,
    pub a_adc_mm2: f64,
    /// Drivers, sample-and-hold and buffers of one macro, mm².
    pub a_periph_mm2: f64,
    pub a_router_mm2: f64,
    pub a_glb_mm2_per_mib: f64,
    pub dram_gbps: f64,
    /// Shortest cycle the macro sustains at `v_ref`, ns.
    pub t_min_ns: f64,
    pub v_ref: f64,
}

impl ModelCoefficients {
    /// 1T1R RRAM crossbars.
    pub const RRAM: ModelCoefficients = ModelCoefficients {
        e_cell_pj: 0.5,
        e_adc_pj: 2.0,
        e_buf_pj_per_byte: 1.0,
        e_router_pj_per_byte: 2.0,
        e_dram_pj_per_byte: 40.0,
        a_cell_um2: 0.0123,
        a_adc_mm2: 0.003,
        a_periph_mm2: 0.002,
        a_router_mm2: 0.05,
        a_glb_mm2_per_mib: 1.5,
        dram_gbps: 25.6,
        t_min_ns: 1.0,
        v_ref: 1.0,
    };

    /// 8T compute-SRAM crossbars.
    pub const SRAM: ModelCoefficients = ModelCoefficients {
        e_cell_pj: 0.3,
        a_cell_um2: 0.3,
        ..Self::RRAM
    };

    pub fn for_mode(mode: SystemMode) -> Self {
        match mode {
            SystemMode::WeightStationary => Self::RRAM,
            SystemMode::WeightSwapping => Self::SRAM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_cell_pj", self.e_cell_pj),
            ("e_adc_pj", self.e_adc_pj),
            ("e_buf_pj_per_byte", self.e_buf_pj_per_byte),
            ("e_router_pj_per_byte", self.e_router_pj_per_byte),
            ("e_dram_pj_per_byte", self.e_dram_pj_per_byte),
            ("a_cell_um2", self.a_cell_um2),
            ("a_adc_mm2", self.a_adc_mm2),
            ("a_periph_mm2", self.a_periph_mm2),
            ("a_router_mm2", self.a_router_mm2),
            ("a_glb_mm2_per_mib", self.a_glb_mm2_per_mib),
            ("dram_gbps", self.dram_gbps),
            ("t_min_ns", self.t_min_ns),
            ("v_ref", self.v_ref),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(DseError::Config(format!("coefficient `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DseError::io(path, e))?;
        let c: ModelCoefficients = serde_json::from_str(&text).map_err(|e| DseError::parse(path, &e))?;
        c.validate()?;
        Ok(c)
    }
}

/// Linear energy scaling with feature size.
fn k_tech(config: &HardwareConfig) -> f64 {
    config.tech_nm as f64 / 32.0
}

/// Quadratic area scaling with feature size.
fn s_tech(config: &HardwareConfig) -> f64 {
    let k = k_tech(config);
    k * k
}

/// On-chip area in mm² (DRAM excluded).
pub fn area(config: &HardwareConfig, c: &ModelCoefficients) -> f64 {
    let s = s_tech(config);
    let cells = config.xbar_rows as f64 * config.xbar_cols as f64;
    let per_macro = cells * c.a_cell_um2 / UM2_PER_MM2 + c.a_adc_mm2 + c.a_periph_mm2;
    config.crossbar_count() as f64 * per_macro * s
        + config.router_count() as f64 * c.a_router_mm2 * s
        + config.glb_mib() * c.a_glb_mm2_per_mib * s
}

/// Cycle time after voltage scaling: `max(t_cycle, t_min · v_ref / v_op)`.
pub fn effective_cycle_ns(config: &HardwareConfig, c: &ModelCoefficients) -> f64 {
    config.t_cycle_ns.max(c.t_min_ns * c.v_ref / config.v_op)
}

/// DRAM round trips needed to stream the weights through the chip, grouping
/// consecutive layers greedily in execution order. Zero when the whole model
/// fits.
pub fn swap_rounds(config: &HardwareConfig, workload: &Workload) -> Result<u64> {
    let capacity = cell_capacity(config)?;
    let bpc = config.bits_per_cell;
    if workload.required_cells(bpc) <= capacity {
        return Ok(0);
    }
    let mut rounds = 0u64;
    let mut open = 0u64;
    for cells in workload.layers.iter().map(|l| l.cells(bpc)).filter(|&c| c > 0) {
        if cells > capacity {
            if open > 0 {
                rounds += 1;
                open = 0;
            }
            rounds += cells.div_ceil(capacity);
        } else if open + cells > capacity {
            rounds += 1;
            open = cells;
        } else {
            open += cells;
        }
    }
    if open > 0 {
        rounds += 1;
    }
    Ok(rounds)
}

/// Energy, latency and area of running `workload` once on `config`.
pub fn evaluate(
    config: &HardwareConfig,
    workload: &Workload,
    mode: SystemMode,
    c: &ModelCoefficients,
) -> Result<HwMetrics> {
    if workload.total_weights() == 0 || workload.total_macs() == 0 {
        return Err(DseError::ZeroWorkload(workload.name.clone()));
    }
    let capacity = cell_capacity(config)?;
    let bpc = match mode {
        SystemMode::WeightStationary => config.bits_per_cell,
        SystemMode::WeightSwapping => 1,
    };
    let required = workload.required_cells(bpc);
    if mode == SystemMode::WeightStationary && required > capacity {
        return Err(DseError::InfeasibleMapping {
            workload: workload.name.clone(),
            required,
            capacity,
        });
    }

    let rows = config.xbar_rows as u64;
    let cols = config.xbar_cols as u64;
    let k = k_tech(config);
    let v_ratio = config.v_op / c.v_ref;
    let t_eff = effective_cycle_ns(config, c);
    let pass_energy = rows as f64 * c.e_cell_pj * v_ratio * v_ratio * k + cols as f64 * c.e_adc_pj * k;
    let act_byte_energy = c.e_buf_pj_per_byte + c.e_router_pj_per_byte;

    let mut energy_pj = 0.0;
    let mut latency_ns = 0.0;
    for layer in &workload.layers {
        let per_weight = cells_per_weight(layer.weight_bits, bpc);
        let folds = layer.fan_in.div_ceil(rows) * (layer.fan_out * per_weight).div_ceil(cols);
        let passes = layer.positions() * ACTIVATION_BITS as f64;
        let mut layer_ns = passes * cols as f64 * t_eff;
        if mode == SystemMode::WeightSwapping {
            // a layer larger than the chip runs its folds in batches
            layer_ns *= layer.cells(bpc).div_ceil(capacity).max(1) as f64;
        }
        let act_bytes = (layer.in_activations + layer.out_activations) * ACTIVATION_BITS as u64 / 8;
        let overflow = act_bytes.saturating_sub(config.glb_bytes) as f64;
        energy_pj += folds as f64 * passes * pass_energy
            + act_bytes as f64 * act_byte_energy
            + overflow * c.e_dram_pj_per_byte;
        latency_ns += layer_ns + overflow / c.dram_gbps;
    }

    if mode == SystemMode::WeightSwapping && swap_rounds(config, workload)? > 0 {
        let swap_bytes = workload.weight_bytes() as f64;
        latency_ns += swap_bytes / c.dram_gbps;
        energy_pj += swap_bytes * c.e_dram_pj_per_byte;
    }

    Ok(HwMetrics {
        energy_mj: energy_pj / PJ_PER_MJ,
        latency_ms: latency_ns / NS_PER_MS,
        area_mm2: area(config, c),
    })
}

/// Outcome stored in the cache: mapping infeasibility is a result, not a
/// fault, so it is memoized too.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalOutcome {
    Metrics(HwMetrics),
    Infeasible { required: u64, capacity: u64 },
}

impl EvalOutcome {
    pub fn metrics(&self) -> Option<&HwMetrics> {
        match self {
            EvalOutcome::Metrics(m) => Some(m),
            EvalOutcome::Infeasible { .. } => None,
        }
    }
}

type CacheKey = (DesignPoint, String, SystemMode);

/// Memo table keyed on (design gene, workload name, mode).
///
/// Lookups and inserts go through one mutex; inserting a key twice stores
/// the same value, so racing writers are harmless.
#[derive(Debug)]
pub struct EvalCache {
    enabled: bool,
    map: Mutex<HashMap<CacheKey, EvalOutcome>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Default for EvalCache {
    fn default() -> Self {
        Self::new(true)
    }
}

impl EvalCache {
    pub fn new(enabled: bool) -> Self {
        EvalCache {
            enabled,
            map: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Evaluator calls actually executed.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn contains(&self, point: &DesignPoint, workload: &str, mode: SystemMode) -> bool {
        self.enabled
            && self
                .map
                .lock()
                .expect("cache lock")
                .contains_key(&(point.clone(), workload.to_string(), mode))
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// [`evaluate`] behind the memo table.
pub fn cached_evaluate(
    cache: &EvalCache,
    point: &DesignPoint,
    config: &HardwareConfig,
    workload: &Workload,
    mode: SystemMode,
    c: &ModelCoefficients,
) -> Result<EvalOutcome> {
    let key = (point.clone(), workload.name.clone(), mode);
    if cache.enabled {
        if let Some(hit) = cache.map.lock().expect("cache lock").get(&key) {
            cache.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit.clone());
        }
    }
    cache.misses.fetch_add(1, Ordering::Relaxed);
    let outcome = match evaluate(config, workload, mode, c) {
        Ok(m) => EvalOutcome::Metrics(m),
        Err(DseError::InfeasibleMapping { required, capacity, .. }) => EvalOutcome::Infeasible { required, capacity },
        Err(e) => return Err(e),
    };
    if cache.enabled {
        cache.map.lock().expect("cache lock").insert(key, outcome.clone());
    }
    Ok(outcome)
}

//! CMOS technology node data: wafer cost, yield range, normalized cost per
//! mm² and the operating-voltage window simulated at each node.

/// One row of the technology table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechNode {
    pub nm: u32,
    /// Average 300 mm wafer cost in USD.
    pub wafer_cost_usd: f64,
    pub yield_lo: f64,
    pub yield_hi: f64,
    /// Fabrication cost per mm², normalized to the 32 nm node.
    pub alpha: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

/// Usable area of a 300 mm wafer (≈95% of 70685 mm²).
pub const EFFECTIVE_WAFER_AREA_MM2: f64 = 70_000.0;

/// Node every cost is normalized to.
pub const REFERENCE_NODE_NM: u32 = 32;

pub const TECH_NODES: [TechNode; 8] = [
    TechNode { nm: 90, wafer_cost_usd: 1651.5, yield_lo: 0.90, yield_hi: 0.95, alpha: 0.413, v_lo: 0.95, v_hi: 1.3 },
    TechNode { nm: 65, wafer_cost_usd: 1939.0, yield_lo: 0.90, yield_hi: 0.95, alpha: 0.477, v_lo: 0.85, v_hi: 1.2 },
    TechNode { nm: 45, wafer_cost_usd: 2237.5, yield_lo: 0.80, yield_hi: 0.90, alpha: 0.606, v_lo: 0.75, v_hi: 1.1 },
    TechNode { nm: 32, wafer_cost_usd: 3500.0, yield_lo: 0.70, yield_hi: 0.90, alpha: 1.0, v_lo: 0.65, v_hi: 1.0 },
    TechNode { nm: 22, wafer_cost_usd: 4338.5, yield_lo: 0.70, yield_hi: 0.90, alpha: 1.282, v_lo: 0.65, v_hi: 1.0 },
    TechNode { nm: 14, wafer_cost_usd: 4492.0, yield_lo: 0.60, yield_hi: 0.80, alpha: 1.498, v_lo: 0.55, v_hi: 0.9 },
    TechNode { nm: 10, wafer_cost_usd: 5600.0, yield_lo: 0.50, yield_hi: 0.70, alpha: 2.243, v_lo: 0.5, v_hi: 0.85 },
    TechNode { nm: 7, wafer_cost_usd: 9291.5, yield_lo: 0.50, yield_hi: 0.70, alpha: 3.871, v_lo: 0.45, v_hi: 0.8 },
];

pub fn node(nm: u32) -> Option<&'static TechNode> {
    TECH_NODES.iter().find(|n| n.nm == nm)
}

impl TechNode {
    pub fn yield_midpoint(&self) -> f64 {
        0.5 * (self.yield_lo + self.yield_hi)
    }

    /// Cost per functional mm² in USD: wafer cost over `A_e × yield`.
    pub fn cost_per_mm2(&self) -> f64 {
        self.wafer_cost_usd / (EFFECTIVE_WAFER_AREA_MM2 * self.yield_midpoint())
    }

    /// α recomputed from the wafer-cost and yield columns instead of read
    /// from the table.
    pub fn recomputed_alpha(&self) -> f64 {
        let reference = node(REFERENCE_NODE_NM).expect("reference node is tabulated");
        self.cost_per_mm2() / reference.cost_per_mm2()
    }

    /// Admissible operating voltages in 50 mV steps, inclusive of both ends.
    pub fn voltage_grid(&self) -> Vec<f64> {
        voltage_grid(self.v_lo, self.v_hi)
    }
}

/// Voltages from `lo` to `hi` in 0.05 V steps, rounded to the centivolt.
pub fn voltage_grid(lo: f64, hi: f64) -> Vec<f64> {
    let lo_cv = (lo * 100.0).round() as i64;
    let hi_cv = (hi * 100.0).round() as i64;
    (lo_cv..=hi_cv)
        .step_by(5)
        .map(|cv| cv as f64 / 100.0)
        .collect()
}

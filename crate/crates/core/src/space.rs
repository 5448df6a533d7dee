//! Discrete hardware search space, design-point encoding and decoding.
//!
//! A design point is a vector of option indices, one per domain. Genetic
//! operators work on a continuous relaxation where index `i` occupies the
//! real interval `[i, i + 1)` and is represented by its center `i + 0.5`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};
use crate::tech;

/// Canonical domain names understood by [`SearchSpace::decode`].
pub mod param {
    pub const XBAR_ROWS: &str = "xbar_rows";
    pub const XBAR_COLS: &str = "xbar_cols";
    pub const C_PER_TILE: &str = "c_per_tile";
    pub const T_PER_ROUTER: &str = "t_per_router";
    pub const G_PER_CHIP: &str = "g_per_chip";
    pub const V_OP: &str = "v_op";
    pub const T_CYCLE: &str = "t_cycle_ns";
    pub const GLB: &str = "glb_kib";
    pub const BITS_CELL: &str = "bits_cell";
    pub const TECH: &str = "tech_nm";

    pub const ALL: [&str; 10] = [
        XBAR_ROWS,
        XBAR_COLS,
        C_PER_TILE,
        T_PER_ROUTER,
        G_PER_CHIP,
        V_OP,
        T_CYCLE,
        GLB,
        BITS_CELL,
        TECH,
    ];
}

/// How weights reach the crossbars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemMode {
    /// Every weight resident on chip for the whole inference (RRAM).
    #[serde(alias = "rram")]
    WeightStationary,
    /// Layer weights streamed from DRAM in rounds (SRAM).
    #[serde(alias = "sram")]
    WeightSwapping,
}

impl SystemMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemMode::WeightStationary => "weight_stationary",
            SystemMode::WeightSwapping => "weight_swapping",
        }
    }
}

impl std::str::FromStr for SystemMode {
    type Err = DseError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rram" | "weight_stationary" | "weight-stationary" => Ok(SystemMode::WeightStationary),
            "sram" | "weight_swapping" | "weight-swapping" => Ok(SystemMode::WeightSwapping),
            other => Err(DseError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub name: String,
    pub options: Vec<f64>,
}

impl ParamDomain {
    pub fn new(name: impl Into<String>, options: Vec<f64>) -> Self {
        ParamDomain {
            name: name.into(),
            options,
        }
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.options.is_empty() {
            return Err(DseError::InvalidSpace(format!("domain `{}` has no options", self.name)));
        }
        if self.options.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(DseError::InvalidSpace(format!(
                "domain `{}` has a non-positive option",
                self.name
            )));
        }
        if self.options.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DseError::InvalidSpace(format!(
                "domain `{}` options are not strictly ascending",
                self.name
            )));
        }
        Ok(())
    }
}

/// A candidate design: one option index per domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DesignPoint(pub Vec<usize>);

impl DesignPoint {
    pub fn genes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DesignPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Physical parameters of one accelerator instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub xbar_rows: u32,
    pub xbar_cols: u32,
    pub crossbars_per_tile: u32,
    pub tiles_per_router: u32,
    pub tile_groups_per_chip: u32,
    pub v_op: f64,
    pub t_cycle_ns: f64,
    pub glb_bytes: u64,
    pub bits_per_cell: u32,
    pub tech_nm: u32,
}

impl HardwareConfig {
    /// Crossbar macros on the chip; one router per tile group.
    pub fn crossbar_count(&self) -> u64 {
        self.crossbars_per_tile as u64 * self.tiles_per_router as u64 * self.tile_groups_per_chip as u64
    }

    pub fn router_count(&self) -> u64 {
        self.tile_groups_per_chip as u64
    }

    pub fn glb_mib(&self) -> f64 {
        self.glb_bytes as f64 / (1u64 << 20) as f64
    }
}

/// Total memory cells: rows × cols × crossbars/tile × tiles/router × groups.
pub fn cell_capacity(config: &HardwareConfig) -> Result<u64> {
    [
        config.xbar_cols,
        config.crossbars_per_tile,
        config.tiles_per_router,
        config.tile_groups_per_chip,
    ]
    .iter()
    .try_fold(config.xbar_rows as u64, |acc, &f| acc.checked_mul(f as u64))
    .ok_or(DseError::ArithmeticOverflow("cell capacity"))
}

/// Serialized form of a [`SearchSpace`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceFile {
    mode: SystemMode,
    domains: Vec<ParamDomain>,
    #[serde(default)]
    voltage_by_tech: BTreeMap<u32, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceFile", into = "SpaceFile")]
pub struct SearchSpace {
    domains: Vec<ParamDomain>,
    voltage_by_tech: BTreeMap<u32, Vec<f64>>,
    mode: SystemMode,
    roles: [Option<usize>; 10],
}

impl TryFrom<SpaceFile> for SearchSpace {
    type Error = DseError;

    fn try_from(f: SpaceFile) -> Result<Self> {
        SearchSpace::new(f.domains, f.voltage_by_tech, f.mode)
    }
}

impl From<SearchSpace> for SpaceFile {
    fn from(s: SearchSpace) -> Self {
        SpaceFile {
            mode: s.mode,
            domains: s.domains,
            voltage_by_tech: s.voltage_by_tech,
        }
    }
}

impl SearchSpace {
    pub fn new(
        domains: Vec<ParamDomain>,
        voltage_by_tech: BTreeMap<u32, Vec<f64>>,
        mode: SystemMode,
    ) -> Result<Self> {
        if domains.is_empty() {
            return Err(DseError::InvalidSpace("no domains".into()));
        }
        for (i, d) in domains.iter().enumerate() {
            d.validate()?;
            if domains[..i].iter().any(|o| o.name == d.name) {
                return Err(DseError::InvalidSpace(format!("duplicate domain `{}`", d.name)));
            }
        }
        let mut roles = [None; 10];
        for (slot, name) in roles.iter_mut().zip(param::ALL) {
            *slot = domains.iter().position(|d| d.name == name);
        }
        let space = SearchSpace {
            domains,
            voltage_by_tech,
            mode,
            roles,
        };
        space.check_voltage_coupling()?;
        if mode == SystemMode::WeightSwapping {
            if let Some(d) = space.role_domain(param::BITS_CELL) {
                if d.options != [1.0] {
                    return Err(DseError::InvalidSpace(
                        "weight-swapping (SRAM) designs store one bit per cell".into(),
                    ));
                }
            }
        }
        Ok(space)
    }

    fn check_voltage_coupling(&self) -> Result<()> {
        for (nm, volts) in &self.voltage_by_tech {
            if volts.is_empty() || volts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DseError::InvalidSpace(format!(
                    "voltage list for {nm} nm must be non-empty and ascending"
                )));
            }
        }
        if self.role(param::TECH).is_none() || self.voltage_by_tech.is_empty() {
            return Ok(());
        }
        if let Some(v) = self.role_domain(param::V_OP) {
            for opt in &v.options {
                let covered = self
                    .voltage_by_tech
                    .values()
                    .any(|vs| vs.iter().any(|x| (x - opt).abs() < 1e-9));
                if !covered {
                    return Err(DseError::InvalidSpace(format!(
                        "voltage option {opt} V is not admissible at any technology node"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DseError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            DseError::Parse {
                line,
                column,
                message,
                ..
            } => DseError::Parse {
                path: path.to_path_buf(),
                line,
                column,
                message,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text).map_err(|e| DseError::parse("<space>", &e))?;
        SearchSpace::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search space serializes")
    }

    pub fn mode(&self) -> SystemMode {
        self.mode
    }

    pub fn domains(&self) -> &[ParamDomain] {
        &self.domains
    }

    pub fn voltage_by_tech(&self) -> &BTreeMap<u32, Vec<f64>> {
        &self.voltage_by_tech
    }

    pub fn n_genes(&self) -> usize {
        self.domains.len()
    }

    /// Genes that can actually vary (more than one option).
    pub fn free_genes(&self) -> usize {
        self.domains.iter().filter(|d| d.len() > 1).count()
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.name == name)
    }

    fn role(&self, name: &str) -> Option<usize> {
        param::ALL
            .iter()
            .position(|n| *n == name)
            .and_then(|slot| self.roles[slot])
    }

    fn role_domain(&self, name: &str) -> Option<&ParamDomain> {
        self.role(name).map(|i| &self.domains[i])
    }

    /// Number of distinct design points.
    pub fn size(&self) -> u128 {
        self.domains.iter().map(|d| d.len() as u128).product()
    }

    pub fn validate_point(&self, point: &DesignPoint) -> Result<()> {
        if point.len() != self.n_genes() {
            return Err(DseError::GeneLength {
                expected: self.n_genes(),
                got: point.len(),
            });
        }
        for (d, &g) in self.domains.iter().zip(point.genes()) {
            if g >= d.len() {
                return Err(DseError::IndexOutOfDomain {
                    domain: d.name.clone(),
                    index: g,
                    len: d.len(),
                });
            }
        }
        Ok(())
    }

    fn value(&self, point: &DesignPoint, name: &'static str) -> Result<f64> {
        let i = self.role(name).ok_or(DseError::MissingDomain(name))?;
        Ok(self.domains[i].options[point.0[i]])
    }

    fn value_or(&self, point: &DesignPoint, name: &'static str, default: f64) -> f64 {
        self.role(name)
            .map(|i| self.domains[i].options[point.0[i]])
            .unwrap_or(default)
    }

    /// Map option indices to physical values.
    ///
    /// `bits_cell` defaults to 1 and `tech_nm` to 32 when the space does not
    /// search them; every other hardware domain is required. The decoded
    /// voltage is clamped to the nearest admissible value of the decoded
    /// technology node.
    pub fn decode(&self, point: &DesignPoint) -> Result<HardwareConfig> {
        self.validate_point(point)?;
        let tech_nm = self.value_or(point, param::TECH, tech::REFERENCE_NODE_NM as f64).round() as u32;
        let mut v_op = self.value(point, param::V_OP)?;
        if let Some(admissible) = self.voltage_by_tech.get(&tech_nm) {
            v_op = nearest(admissible, v_op);
        }
        let bits_per_cell = match self.mode {
            SystemMode::WeightSwapping => 1,
            SystemMode::WeightStationary => self.value_or(point, param::BITS_CELL, 1.0).round() as u32,
        };
        Ok(HardwareConfig {
            xbar_rows: self.value(point, param::XBAR_ROWS)?.round() as u32,
            xbar_cols: self.value(point, param::XBAR_COLS)?.round() as u32,
            crossbars_per_tile: self.value(point, param::C_PER_TILE)?.round() as u32,
            tiles_per_router: self.value(point, param::T_PER_ROUTER)?.round() as u32,
            tile_groups_per_chip: self.value(point, param::G_PER_CHIP)?.round() as u32,
            v_op,
            t_cycle_ns: self.value(point, param::T_CYCLE)?,
            glb_bytes: (self.value(point, param::GLB)? * 1024.0).round() as u64,
            bits_per_cell,
            tech_nm,
        })
    }

    /// Option values of every gene, in domain order.
    pub fn values(&self, point: &DesignPoint) -> Vec<f64> {
        self.domains
            .iter()
            .zip(point.genes())
            .map(|(d, &g)| d.options[g])
            .collect()
    }

    pub fn to_real(point: &DesignPoint) -> Vec<f64> {
        point.genes().iter().map(|&g| g as f64 + 0.5).collect()
    }

    /// Index of the unit cell containing each real, clamped into its domain.
    pub fn from_real(&self, reals: &[f64]) -> DesignPoint {
        DesignPoint(
            self.domains
                .iter()
                .zip(reals)
                .map(|(d, &r)| {
                    let hi = (d.len() - 1) as f64;
                    if r.is_nan() {
                        0
                    } else {
                        r.floor().clamp(0.0, hi) as usize
                    }
                })
                .collect(),
        )
    }

    /// Real-valued bounds `[0, n_options]` per gene.
    pub fn real_bounds(&self) -> Vec<(f64, f64)> {
        self.domains.iter().map(|d| (0.0, d.len() as f64)).collect()
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DesignPoint {
        DesignPoint(self.domains.iter().map(|d| rng.gen_range(0..d.len())).collect())
    }

    /// The point at position `flat` in mixed-radix order (last gene fastest).
    pub fn point_at(&self, mut flat: u128) -> DesignPoint {
        let mut genes = vec![0; self.n_genes()];
        for (g, d) in genes.iter_mut().zip(&self.domains).rev() {
            let n = d.len() as u128;
            *g = (flat % n) as usize;
            flat /= n;
        }
        DesignPoint(genes)
    }

    pub fn flat_index(&self, point: &DesignPoint) -> u128 {
        self.domains
            .iter()
            .zip(point.genes())
            .fold(0u128, |acc, (d, &g)| acc * d.len() as u128 + g as u128)
    }

    pub fn min_point(&self) -> DesignPoint {
        DesignPoint(vec![0; self.n_genes()])
    }

    pub fn max_point(&self) -> DesignPoint {
        DesignPoint(self.domains.iter().map(|d| d.len() - 1).collect())
    }

    /// Lower median option of every domain.
    pub fn median_point(&self) -> DesignPoint {
        DesignPoint(self.domains.iter().map(|d| (d.len() - 1) / 2).collect())
    }

    /// Sub-space in which every domain outside `free` is pinned to the option
    /// `base` selects. Genes of the sub-space index the pinned domains at 0;
    /// [`SearchSpace::lift`] maps them back.
    pub fn restrict(&self, base: &DesignPoint, free: &[usize]) -> Result<SearchSpace> {
        self.validate_point(base)?;
        let domains = self
            .domains
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if free.contains(&i) {
                    d.clone()
                } else {
                    ParamDomain::new(d.name.clone(), vec![d.options[base.0[i]]])
                }
            })
            .collect();
        let mut voltage_by_tech = self.voltage_by_tech.clone();
        if let Some(ti) = self.role(param::TECH) {
            if !free.contains(&ti) {
                let nm = self.domains[ti].options[base.0[ti]].round() as u32;
                voltage_by_tech.retain(|k, _| *k == nm);
            }
        }
        let mut sub = SearchSpace::new(domains, BTreeMap::new(), self.mode)?;
        // the pinned voltage may sit outside the pinned node's window; decode
        // clamps it exactly as the full space would
        sub.voltage_by_tech = voltage_by_tech;
        Ok(sub)
    }

    /// Inverse of [`SearchSpace::restrict`] for points of the sub-space.
    pub fn lift(&self, base: &DesignPoint, free: &[usize], sub: &DesignPoint) -> DesignPoint {
        DesignPoint(
            (0..self.n_genes())
                .map(|i| if free.contains(&i) { sub.0[i] } else { base.0[i] })
                .collect(),
        )
    }

    /// Copy with the named domain pinned to the option at `index`.
    pub fn pin(&self, name: &str, index: usize) -> Result<SearchSpace> {
        let i = self
            .domain_index(name)
            .ok_or_else(|| DseError::InvalidSpace(format!("no domain `{name}`")))?;
        let mut domains = self.domains.clone();
        let opt = *domains[i].options.get(index).ok_or_else(|| DseError::IndexOutOfDomain {
            domain: name.to_string(),
            index,
            len: domains[i].len(),
        })?;
        domains[i].options = vec![opt];
        SearchSpace::new(domains, self.voltage_by_tech.clone(), self.mode)
    }

    /// Default weight-stationary RRAM space at 32 nm: 2,520,000 points.
    pub fn default_rram() -> Self {
        let pow2 = |lo: u32, hi: u32| -> Vec<f64> {
            (lo.trailing_zeros()..=hi.trailing_zeros()).map(|e| (1u64 << e) as f64).collect()
        };
        let v32 = tech::node(32).expect("32 nm tabulated").voltage_grid();
        let domains = vec![
            ParamDomain::new(param::XBAR_ROWS, pow2(64, 1024)),
            ParamDomain::new(param::XBAR_COLS, pow2(64, 1024)),
            ParamDomain::new(param::C_PER_TILE, pow2(2, 32)),
            ParamDomain::new(param::T_PER_ROUTER, pow2(2, 32)),
            ParamDomain::new(param::G_PER_CHIP, pow2(4, 128)),
            ParamDomain::new(param::V_OP, v32.clone()),
            ParamDomain::new(param::T_CYCLE, vec![1.0, 2.0, 5.0, 10.0]),
            ParamDomain::new(param::GLB, pow2(256, 16384)),
            ParamDomain::new(param::BITS_CELL, vec![1.0, 2.0, 4.0]),
            ParamDomain::new(param::TECH, vec![32.0]),
        ];
        let vbt = BTreeMap::from([(32, v32)]);
        SearchSpace::new(domains, vbt, SystemMode::WeightStationary).expect("default RRAM space is valid")
    }

    /// Default weight-swapping SRAM space at 32 nm, with a wider GLB range.
    pub fn default_sram() -> Self {
        Self::sram_with_tech(&[32])
    }

    /// SRAM space that also searches the technology node, with voltage
    /// windows per node.
    pub fn tech_sweep_sram() -> Self {
        let nodes: Vec<u32> = {
            let mut v: Vec<u32> = tech::TECH_NODES.iter().map(|n| n.nm).collect();
            v.sort_unstable();
            v
        };
        Self::sram_with_tech(&nodes)
    }

    /// Weight-swapping space over the given technology nodes.
    pub fn sram_with_tech(nodes: &[u32]) -> Self {
        let pow2 = |lo: u32, hi: u32| -> Vec<f64> {
            (lo.trailing_zeros()..=hi.trailing_zeros()).map(|e| (1u64 << e) as f64).collect()
        };
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        let table: Vec<&tech::TechNode> = nodes
            .iter()
            .map(|nm| tech::node(*nm).expect("technology node is tabulated"))
            .collect();
        let v_lo = table.iter().map(|n| n.v_lo).fold(f64::INFINITY, f64::min);
        let v_hi = table.iter().map(|n| n.v_hi).fold(0.0, f64::max);
        let domains = vec![
            ParamDomain::new(param::XBAR_ROWS, pow2(64, 512)),
            ParamDomain::new(param::XBAR_COLS, pow2(64, 512)),
            ParamDomain::new(param::C_PER_TILE, pow2(2, 16)),
            ParamDomain::new(param::T_PER_ROUTER, pow2(2, 16)),
            ParamDomain::new(param::G_PER_CHIP, pow2(4, 64)),
            ParamDomain::new(param::V_OP, tech::voltage_grid(v_lo, v_hi)),
            ParamDomain::new(param::T_CYCLE, vec![1.0, 2.0, 5.0, 10.0]),
            ParamDomain::new(param::GLB, pow2(64, 65536)),
            ParamDomain::new(param::TECH, nodes.iter().map(|&n| n as f64).collect()),
        ];
        let vbt = table.iter().map(|n| (n.nm, n.voltage_grid())).collect();
        SearchSpace::new(domains, vbt, SystemMode::WeightSwapping).expect("default SRAM space is valid")
    }

    /// Four-parameter RRAM space: rows, cols, crossbars per tile and bits per
    /// cell searched; every other domain pinned at its median option.
    pub fn reduced_rram() -> Self {
        let full = Self::default_rram();
        let free: Vec<usize> = [param::XBAR_ROWS, param::XBAR_COLS, param::C_PER_TILE, param::BITS_CELL]
            .iter()
            .map(|n| full.domain_index(n).expect("default domain"))
            .collect();
        full.restrict(&full.median_point(), &free).expect("median point is valid")
    }
}

fn nearest(options: &[f64], v: f64) -> f64 {
    options
        .iter()
        .copied()
        .min_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()))
        .unwrap_or(v)
}

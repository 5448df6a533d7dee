//! Neural-network workload descriptors.
//!
//! A layer is described by its lowered weight matrix (`fan_in × fan_out`,
//! im2col-style for convolutions), its MAC count and its activation traffic.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};

pub const DEFAULT_WEIGHT_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv,
    #[serde(alias = "linear")]
    Fc,
    DepthwiseConv,
    Attention,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    pub fan_in: u64,
    pub fan_out: u64,
    pub weight_count: u64,
    pub weight_bits: u32,
    pub macs: u64,
    pub in_activations: u64,
    pub out_activations: u64,
}

impl LayerSpec {
    /// Dense layer applied to `positions` input vectors.
    pub fn dense(name: impl Into<String>, kind: LayerKind, fan_in: u64, fan_out: u64, positions: u64) -> Self {
        LayerSpec {
            name: name.into(),
            kind,
            fan_in,
            fan_out,
            weight_count: fan_in * fan_out,
            weight_bits: DEFAULT_WEIGHT_BITS,
            macs: fan_in * fan_out * positions,
            in_activations: fan_in * positions,
            out_activations: fan_out * positions,
        }
    }

    /// Memory cells needed for this layer's weights.
    pub fn cells(&self, bits_per_cell: u32) -> u64 {
        self.weight_count * cells_per_weight(self.weight_bits, bits_per_cell)
    }

    pub fn weight_bytes(&self) -> u64 {
        (self.weight_count * self.weight_bits as u64).div_ceil(8)
    }

    /// Input vectors pushed through the layer per inference.
    pub fn positions(&self) -> f64 {
        if self.weight_count == 0 {
            0.0
        } else {
            self.macs as f64 / self.weight_count as f64
        }
    }
}

/// `ceil(weight_bits / bits_per_cell)`.
pub fn cells_per_weight(weight_bits: u32, bits_per_cell: u32) -> u64 {
    weight_bits.div_ceil(bits_per_cell.max(1)) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

impl Workload {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Result<Self> {
        let w = Workload {
            name: name.into(),
            layers,
        };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(DseError::Schema(format!("workload `{}` has no layers", self.name)));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if self.layers[..i].iter().any(|o| o.name == l.name) {
                return Err(DseError::Schema(format!(
                    "workload `{}` repeats layer name `{}`",
                    self.name, l.name
                )));
            }
            if l.weight_bits == 0 {
                return Err(DseError::Schema(format!("layer `{}` has zero weight bits", l.name)));
            }
        }
        Ok(())
    }

    /// Σ weight_count × ceil(weight_bits / bits_per_cell).
    pub fn required_cells(&self, bits_per_cell: u32) -> u64 {
        self.layers.iter().map(|l| l.cells(bits_per_cell)).sum()
    }

    pub fn largest_layer_cells(&self, bits_per_cell: u32) -> u64 {
        self.layers.iter().map(|l| l.cells(bits_per_cell)).max().unwrap_or(0)
    }

    pub fn total_weights(&self) -> u64 {
        self.layers.iter().map(|l| l.weight_count).sum()
    }

    pub fn total_macs(&self) -> u64 {
        self.layers.iter().map(|l| l.macs).sum()
    }

    pub fn weight_bytes(&self) -> u64 {
        self.layers.iter().map(LayerSpec::weight_bytes).sum()
    }
}

/// Index of the workload with the single largest layer (weight-swapping
/// notion of "largest"). Ties go to the earlier workload.
pub fn largest_by_layer(workloads: &[Workload], bits_per_cell: u32) -> Option<usize> {
    argmax(workloads.iter().map(|w| w.largest_layer_cells(bits_per_cell)))
}

/// Index of the workload needing the most cells overall (weight-stationary).
pub fn largest_by_total(workloads: &[Workload], bits_per_cell: u32) -> Option<usize> {
    argmax(workloads.iter().map(|w| w.required_cells(bits_per_cell)))
}

fn argmax(values: impl Iterator<Item = u64>) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: String,
    kind: LayerKind,
    #[serde(default)]
    fan_in: Option<i64>,
    #[serde(default)]
    fan_out: Option<i64>,
    #[serde(default)]
    weight_count: Option<i64>,
    #[serde(default)]
    weight_bits: Option<i64>,
    #[serde(default)]
    macs: Option<i64>,
    in_activations: i64,
    out_activations: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkload {
    name: String,
    layers: Vec<RawLayer>,
}

fn non_negative(layer: &str, field: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| DseError::Schema(format!("layer `{layer}`: `{field}` is negative ({v})")))
}

impl RawLayer {
    fn into_spec(self) -> Result<LayerSpec> {
        let n = self.name.as_str();
        let opt = |field: &str, v: Option<i64>| v.map(|v| non_negative(n, field, v)).transpose();
        let fan_in = opt("fan_in", self.fan_in)?;
        let fan_out = opt("fan_out", self.fan_out)?;
        let weight_count = opt("weight_count", self.weight_count)?;
        let (fan_in, fan_out, weight_count) = match (fan_in, fan_out, weight_count) {
            (Some(i), Some(o), wc) => {
                let product = i * o;
                if let Some(wc) = wc {
                    if wc != product && matches!(self.kind, LayerKind::Conv | LayerKind::Fc) {
                        return Err(DseError::Schema(format!(
                            "layer `{n}`: weight_count {wc} != fan_in × fan_out = {product}"
                        )));
                    }
                    (i, o, wc)
                } else {
                    (i, o, product)
                }
            }
            (Some(i), None, Some(wc)) if i > 0 && wc % i == 0 => (i, wc / i, wc),
            (None, Some(o), Some(wc)) if o > 0 && wc % o == 0 => (wc / o, o, wc),
            _ => {
                return Err(DseError::Schema(format!(
                    "layer `{n}`: need fan_in and fan_out, or one of them with a divisible weight_count"
                )))
            }
        };
        let weight_bits = match self.weight_bits {
            Some(b) if b <= 0 => {
                return Err(DseError::Schema(format!("layer `{n}`: weight_bits must be positive")))
            }
            Some(b) => b as u32,
            None => DEFAULT_WEIGHT_BITS,
        };
        let in_activations = non_negative(n, "in_activations", self.in_activations)?;
        let out_activations = non_negative(n, "out_activations", self.out_activations)?;
        // fan_in × fan_out × (out_activations / fan_out)
        let macs = match opt("macs", self.macs)? {
            Some(m) => m,
            None if fan_out == 0 => 0,
            None => fan_in * out_activations,
        };
        Ok(LayerSpec {
            name: self.name,
            kind: self.kind,
            fan_in,
            fan_out,
            weight_count,
            weight_bits,
            macs,
            in_activations,
            out_activations,
        })
    }
}

impl RawWorkload {
    fn into_workload(self) -> Result<Workload> {
        let layers = self
            .layers
            .into_iter()
            .map(RawLayer::into_spec)
            .collect::<Result<Vec<_>>>()?;
        Workload::new(self.name, layers)
    }
}

/// Parse one workload object from JSON text.
pub fn parse_workload(text: &str, origin: &Path) -> Result<Workload> {
    let raw: RawWorkload = serde_json::from_str(text).map_err(|e| DseError::parse(origin, &e))?;
    raw.into_workload()
}

/// Load workloads from a file, in file order.
///
/// Accepted shapes: a single workload object, an array of workload objects,
/// or a set `{"workloads": [...]}` whose entries are workload objects or
/// paths relative to the set file.
pub fn load_workloads(path: impl AsRef<Path>) -> Result<Vec<Workload>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DseError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| DseError::parse(path, &e))?;
    let workloads = match &value {
        serde_json::Value::Array(_) => {
            let raws: Vec<RawWorkload> = serde_json::from_str(&text).map_err(|e| DseError::parse(path, &e))?;
            raws.into_iter().map(RawWorkload::into_workload).collect::<Result<Vec<_>>>()?
        }
        serde_json::Value::Object(map) if map.contains_key("workloads") && !map.contains_key("layers") => {
            let entries = map["workloads"]
                .as_array()
                .ok_or_else(|| DseError::Schema(format!("{}: `workloads` must be an array", path.display())))?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
            let mut out = Vec::with_capacity(entries.len());
            for entry in entries {
                match entry {
                    serde_json::Value::String(rel) => out.extend(load_workloads(dir.join(rel))?),
                    obj => {
                        let raw: RawWorkload = serde_json::from_value(obj.clone())
                            .map_err(|e| DseError::Schema(format!("{}: {e}", path.display())))?;
                        out.push(raw.into_workload()?);
                    }
                }
            }
            out
        }
        _ => vec![parse_workload(&text, path)?],
    };
    if workloads.is_empty() {
        return Err(DseError::Schema(format!("{}: no workloads", path.display())));
    }
    for (i, w) in workloads.iter().enumerate() {
        if workloads[..i].iter().any(|o| o.name == w.name) {
            return Err(DseError::Schema(format!("duplicate workload name `{}`", w.name)));
        }
    }
    Ok(workloads)
}

const BUILTIN: [(&str, &str); 9] = [
    ("resnet18", include_str!("../data/workloads/resnet18.json")),
    ("vgg16", include_str!("../data/workloads/vgg16.json")),
    ("alexnet", include_str!("../data/workloads/alexnet.json")),
    ("mobilenetv3", include_str!("../data/workloads/mobilenetv3.json")),
    ("resnet50", include_str!("../data/workloads/resnet50.json")),
    ("densenet201", include_str!("../data/workloads/densenet201.json")),
    ("vit", include_str!("../data/workloads/vit.json")),
    ("mobilebert", include_str!("../data/workloads/mobilebert.json")),
    ("gpt2_medium", include_str!("../data/workloads/gpt2_medium.json")),
];

/// A shipped workload by name.
pub fn builtin(name: &str) -> Result<Workload> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| DseError::Config(format!("no built-in workload `{name}`")))?;
    parse_workload(text, Path::new(name))
}

/// ResNet18, VGG16, AlexNet and MobileNetV3.
pub fn default_set() -> Vec<Workload> {
    BUILTIN[..4]
        .iter()
        .map(|(n, _)| builtin(n).expect("shipped workloads parse"))
        .collect()
}

/// The default set plus five larger CNN and transformer workloads.
pub fn extended_set() -> Vec<Workload> {
    BUILTIN
        .iter()
        .map(|(n, _)| builtin(n).expect("shipped workloads parse"))
        .collect()
}

/// Deterministic desk-scale workloads.
///
/// * `mlp`: `scale` FC layers of widths `b·2^i → b·2^(i+1)`, with
///   `b = 32·(1 + seed mod 4)`, one input vector each.
/// * `convstack`: `scale` 3×3 conv layers. Layer `i` maps `c_i → c_{i+1}`
///   channels with `c_0 = 3`, `c_i = 16·m·2^(i−1)` where
///   `m = 1 + (seed / 4) mod 2`, on an output side of
///   `max(1, H₀ >> i)` with `H₀ = 8·(1 + seed mod 4)`, so
///   `macs = weight_count × side²`.
pub fn generate_synthetic(kind: &str, scale: usize, seed: u64) -> Result<Workload> {
    if scale == 0 {
        return Err(DseError::Schema("synthetic workload scale must be at least 1".into()));
    }
    let mut layers = Vec::with_capacity(scale);
    match kind {
        "mlp" => {
            let base = 32 * (1 + seed % 4);
            for i in 0..scale {
                let fan_in = base << i;
                layers.push(LayerSpec::dense(format!("fc{i}"), LayerKind::Fc, fan_in, fan_in * 2, 1));
            }
        }
        "convstack" => {
            let side0 = 8 * (1 + seed % 4);
            let m = 1 + (seed / 4) % 2;
            let channels = |i: usize| if i == 0 { 3 } else { (16 * m) << (i - 1) };
            for i in 0..scale {
                let (cin, cout) = (channels(i), channels(i + 1));
                let side = (side0 >> i).max(1);
                let positions = side * side;
                let mut l = LayerSpec::dense(format!("conv{i}"), LayerKind::Conv, 9 * cin, cout, positions);
                let in_side = if i == 0 { side0 } else { (side0 >> (i - 1)).max(1) };
                l.in_activations = in_side * in_side * cin;
                layers.push(l);
            }
        }
        other => return Err(DseError::UnknownKind(other.to_string())),
    }
    Workload::new(format!("{kind}-{scale}-{seed}"), layers)
}

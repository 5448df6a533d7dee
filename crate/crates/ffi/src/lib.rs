//! C ABI for the imc-dse search engine.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Fallible calls return an
//! [`ImcStatus`]; [`imc_last_error_message`] describes the latest failure
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use imc_dse::diversity::{hamming, PopulationSizes};
use imc_dse::engine::{Experiment, PhaseConfig, RunResult, Strategy};
use imc_dse::objective::{cost, Aggregation, ObjectiveSpec};
use imc_dse::space::{DesignPoint, SearchSpace};
use imc_dse::workload::{default_set, parse_workload, Workload};
use imc_dse::DseError;

/// Opaque search space.
pub struct ImcSpace(SearchSpace);

/// Opaque list of workloads.
pub struct ImcWorkloadSet(Vec<Workload>);

/// Opaque run record.
pub struct ImcRunResult(RunResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ConfigError = 4,
    Infeasible = 5,
    SamplingExhausted = 6,
    IoError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImcMode {
    WeightStationary = 0,
    WeightSwapping = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImcAggregation {
    Max = 0,
    All = 1,
    Mean = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImcStrategy {
    Proposed = 0,
    PlainGa = 1,
    Separate = 2,
    Largest = 3,
    SequentialMax = 4,
    SequentialMedian = 5,
}

/// Search options. Start from [`imc_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ImcOptions {
    /// Objective name (`edap`, `edp`, `energy`, `latency`, `area`,
    /// `ed-cost`); NULL means `edap`.
    pub objective: *const c_char,
    pub aggregation: ImcAggregation,
    pub strategy: ImcStrategy,
    pub area_constraint_mm2: f64,
    pub p_h: usize,
    pub p_e: usize,
    pub p_ga: usize,
    /// Generations per phase.
    pub generations: usize,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &DseError) -> ImcStatus {
    match err {
        DseError::Parse { .. } | DseError::Schema(_) | DseError::UnknownKind(_) => ImcStatus::ParseError,
        DseError::SamplingExhausted { .. } => ImcStatus::SamplingExhausted,
        DseError::InfeasibleMapping { .. } => ImcStatus::Infeasible,
        DseError::Io { .. } => ImcStatus::IoError,
        DseError::LengthMismatch(..)
        | DseError::IndexOutOfDomain { .. }
        | DseError::GeneLength { .. }
        | DseError::UnknownTechNode(_) => ImcStatus::InvalidArgument,
        _ => ImcStatus::ConfigError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (ImcStatus, String)>) -> ImcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ImcStatus::Panic
        }
    }
}

fn dse(e: DseError) -> (ImcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ImcStatus, String) {
    (ImcStatus::NullPointer, format!("{what} is NULL"))
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ImcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ImcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the latest failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn imc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Built-in default space for `mode`.
#[no_mangle]
pub extern "C" fn imc_space_default(mode: ImcMode) -> *mut ImcSpace {
    let space = match mode {
        ImcMode::WeightStationary => SearchSpace::default_rram(),
        ImcMode::WeightSwapping => SearchSpace::default_sram(),
    };
    Box::into_raw(Box::new(ImcSpace(space)))
}

/// The 375-point weight-stationary space over crossbar rows, columns,
/// crossbars per tile and bits per cell.
#[no_mangle]
pub extern "C" fn imc_space_reduced() -> *mut ImcSpace {
    Box::into_raw(Box::new(ImcSpace(SearchSpace::reduced_rram())))
}

/// Parse a space from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn imc_space_from_json(json: *const c_char, out: *mut *mut ImcSpace) -> ImcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = c_str(json, "json")?;
        let space = SearchSpace::from_json(text).map_err(dse)?;
        *out = Box::into_raw(Box::new(ImcSpace(space)));
        Ok(())
    })
}

/// Number of design points, saturating at `UINT64_MAX`; 0 for NULL.
///
/// # Safety
/// `space` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_space_size(space: *const ImcSpace) -> u64 {
    space.as_ref().map_or(0, |s| u64::try_from(s.0.size()).unwrap_or(u64::MAX))
}

/// Number of genes (parameters) per design point; 0 for NULL.
///
/// # Safety
/// `space` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_space_gene_count(space: *const ImcSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.n_genes())
}

/// # Safety
/// `space` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imc_space_free(space: *mut ImcSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// ResNet18, VGG16, AlexNet and MobileNetV3.
#[no_mangle]
pub extern "C" fn imc_workloads_default() -> *mut ImcWorkloadSet {
    Box::into_raw(Box::new(ImcWorkloadSet(default_set())))
}

/// Parse one workload object or an array of them.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn imc_workloads_from_json(json: *const c_char, out: *mut *mut ImcWorkloadSet) -> ImcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = c_str(json, "json")?;
        let origin = Path::new("<json>");
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| dse(DseError::parse(origin, &e)))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        if items.is_empty() {
            return Err(dse(DseError::EmptyList));
        }
        let mut workloads = Vec::with_capacity(items.len());
        for item in items {
            let w = parse_workload(&item.to_string(), origin).map_err(dse)?;
            if workloads.iter().any(|o: &Workload| o.name == w.name) {
                return Err((ImcStatus::ParseError, format!("duplicate workload name `{}`", w.name)));
            }
            workloads.push(w);
        }
        *out = Box::into_raw(Box::new(ImcWorkloadSet(workloads)));
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_workloads_len(set: *const ImcWorkloadSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imc_workloads_free(set: *mut ImcWorkloadSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// EDAP objective, Max aggregation, 800 mm² area limit, default population
/// sizes and 10 generations per phase, seed 0.
#[no_mangle]
pub extern "C" fn imc_options_default() -> ImcOptions {
    let sizes = PopulationSizes::default();
    ImcOptions {
        objective: ptr::null(),
        aggregation: ImcAggregation::Max,
        strategy: ImcStrategy::Proposed,
        area_constraint_mm2: imc_dse::objective::DEFAULT_AREA_CONSTRAINT_MM2,
        p_h: sizes.p_h,
        p_e: sizes.p_e,
        p_ga: sizes.p_ga,
        generations: PhaseConfig::DEFAULT_GENERATIONS,
        seed: 0,
    }
}

unsafe fn experiment(space: &SearchSpace, workloads: &[Workload], o: &ImcOptions) -> Result<Experiment, (ImcStatus, String)> {
    let aggregation = match o.aggregation {
        ImcAggregation::Max => Aggregation::Max,
        ImcAggregation::All => Aggregation::All,
        ImcAggregation::Mean => Aggregation::Mean,
    };
    let name = if o.objective.is_null() { "edap" } else { c_str(o.objective, "objective")? };
    let mut objective = ObjectiveSpec::named(name, aggregation).map_err(dse)?;
    objective.a_constr_mm2 = o.area_constraint_mm2;
    objective.validate().map_err(dse)?;
    let strategy = match o.strategy {
        ImcStrategy::Proposed => Strategy::Proposed,
        ImcStrategy::PlainGa => Strategy::PlainGa,
        ImcStrategy::Separate => Strategy::Separate,
        ImcStrategy::Largest => Strategy::Largest,
        ImcStrategy::SequentialMax => Strategy::SequentialMax,
        ImcStrategy::SequentialMedian => Strategy::SequentialMedian,
    };
    let mut e = Experiment::new(space.clone(), workloads.to_vec(), objective, o.seed).with_strategy(strategy);
    e.sizes = PopulationSizes {
        p_h: o.p_h,
        p_e: o.p_e,
        p_ga: o.p_ga,
    };
    e.sizes.validate().map_err(dse)?;
    e.phases = PhaseConfig::four_phase(o.generations);
    Ok(e)
}

/// Run a search. On success `*out` receives a result handle.
///
/// # Safety
/// All pointers must be valid; `options` may be NULL for the defaults.
#[no_mangle]
pub unsafe extern "C" fn imc_optimize(
    space: *const ImcSpace,
    workloads: *const ImcWorkloadSet,
    options: *const ImcOptions,
    out: *mut *mut ImcRunResult,
) -> ImcStatus {
    guard(|| {
        let space = space.as_ref().ok_or_else(|| null("space"))?;
        let workloads = workloads.as_ref().ok_or_else(|| null("workloads"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = options.as_ref().copied().unwrap_or_else(|| imc_options_default());
        let result = experiment(&space.0, &workloads.0, &opts)?.run().map_err(dse)?;
        *out = Box::into_raw(Box::new(ImcRunResult(result)));
        Ok(())
    })
}

/// Score of the best design on all workloads; NaN for NULL, +inf when the
/// design cannot be mapped.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_result_best_score(result: *const ImcRunResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.joint_score().value)
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_result_best_feasible(result: *const ImcRunResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.joint_score().feasible)
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_result_eval_count(result: *const ImcRunResult) -> u64 {
    result.as_ref().map_or(0, |r| r.0.outcome.eval_count)
}

/// Copy the best design's option indices into `buf`. `*written` receives
/// the gene count; when `len` is too small nothing is copied and
/// `IMC_STATUS_INVALID_ARGUMENT` is returned.
///
/// # Safety
/// `buf` must hold `len` elements (or be NULL when `len` is 0); `written`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn imc_result_best_genes(
    result: *const ImcRunResult,
    buf: *mut usize,
    len: usize,
    written: *mut usize,
) -> ImcStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if written.is_null() {
            return Err(null("written"));
        }
        let genes = r.0.best().design.genes();
        *written = genes.len();
        if len < genes.len() || buf.is_null() {
            return Err((
                ImcStatus::InvalidArgument,
                format!("buffer holds {len} genes, {} needed", genes.len()),
            ));
        }
        ptr::copy_nonoverlapping(genes.as_ptr(), buf, genes.len());
        Ok(())
    })
}

/// The run record as JSON; release with [`imc_string_free`]. NULL on error.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn imc_result_to_json(result: *const ImcRunResult) -> *mut c_char {
    match result.as_ref() {
        Some(r) => CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw),
        None => {
            set_error("result is NULL");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `result` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imc_result_free(result: *mut ImcRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Fabrication cost of `area_mm2` at `tech_nm`, in 32 nm-normalized units.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn imc_cost(area_mm2: f64, tech_nm: u32, out: *mut f64) -> ImcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = cost(area_mm2, tech_nm).map_err(dse)?;
        Ok(())
    })
}

/// Hamming distance between two gene vectors of length `len`.
///
/// # Safety
/// `a` and `b` must each hold `len` elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn imc_hamming(a: *const usize, b: *const usize, len: usize, out: *mut usize) -> ImcStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let x = DesignPoint(std::slice::from_raw_parts(a, len).to_vec());
        let y = DesignPoint(std::slice::from_raw_parts(b, len).to_vec());
        *out = hamming(&x, &y).map_err(dse)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&DseError::UnknownTechNode(28)), ImcStatus::InvalidArgument);
        assert_eq!(status_of(&DseError::Schema("x".into())), ImcStatus::ParseError);
        assert_eq!(
            status_of(&DseError::SamplingExhausted {
                accepted: 0,
                draws: 1,
                needed: 1
            }),
            ImcStatus::SamplingExhausted
        );
    }

    #[test]
    fn modes_map_to_default_spaces() {
        unsafe {
            let s = imc_space_default(ImcMode::WeightSwapping);
            assert_eq!(imc_space_size(s), SearchSpace::default_sram().size() as u64);
            imc_space_free(s);
        }
    }
}

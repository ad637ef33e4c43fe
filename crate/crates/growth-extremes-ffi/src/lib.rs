//! C interface to the growth-extremes toolkit.
//!
//! Conventions, mirrored by the committed header `include/growth_extremes.h`:
//!
//! * Fitness laws and random streams are opaque handles ([`GxModel`],
//!   [`GxRng`]) created and destroyed by `gx_*_new` / `gx_*_free` pairs;
//!   freeing a null handle is a no-op.
//! * Every fallible call returns a [`GxStatus`] code and writes its result
//!   through an out-pointer, which is left untouched on error.
//! * No call unwinds across the boundary: panics surface as
//!   `GX_STATUS_INTERNAL`.
//! * Strings returned by the library are static; callers must not free
//!   them. Strings passed in must be NUL-terminated UTF-8.
//!
//! The header is maintained by hand and kept in lockstep by a test that
//! compares its declarations against the exported symbols.

use std::ffi::{CStr, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};

use growth_extremes::dist::{DistError, Frechet, GammaDist, Gaussian};
use growth_extremes::engines::EngineError;
use growth_extremes::malthusian::{
    MalthusianError, OffspringLaw, malthusian_bb, malthusian_crp, malthusian_rbp,
    malthusian_selection_mutation,
};
use growth_extremes::models::{CrpOptions, simulate_crp};
use growth_extremes::rng::{EngineRng, replicate_rng};
use growth_extremes::scaling::{ScalingError, solve_sigma};
use growth_extremes::{FitnessError, FitnessModel};

/// Outcome of a library call. Stable values, safe to store and compare.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownModel = 3,
    InvalidParameter = 4,
    /// The operation needs the other tail class (e.g. a centering time of a
    /// polynomial-tail law).
    WrongClass = 5,
    /// The balance equation has no root in the admissible range.
    NoRoot = 6,
    /// An iterative solve stopped above its residual tolerance.
    NotConverged = 7,
    SimulationFailed = 8,
    /// A defect inside the library; please report it.
    Internal = 9,
}

/// Opaque fitness law.
pub struct GxModel(FitnessModel);

/// Opaque deterministic random stream.
pub struct GxRng(EngineRng);

fn status_of_fitness(e: &FitnessError) -> GxStatus {
    match e {
        FitnessError::UnknownModel(_) => GxStatus::UnknownModel,
        FitnessError::MissingParameter { .. } | FitnessError::InvalidParameter(_) => {
            GxStatus::InvalidParameter
        }
        FitnessError::NotGumbelClass | FitnessError::NotWeibullClass => GxStatus::WrongClass,
        FitnessError::KappaDiverged { .. } => GxStatus::NotConverged,
    }
}

fn status_of_scaling(e: &ScalingError) -> GxStatus {
    match e {
        ScalingError::Fitness(inner) => status_of_fitness(inner),
        ScalingError::InvalidHorizon(_) | ScalingError::InvalidRate { .. } => {
            GxStatus::InvalidParameter
        }
        ScalingError::NoBracket { .. } => GxStatus::NoRoot,
        ScalingError::NotConverged { .. } => GxStatus::NotConverged,
    }
}

fn status_of_malthusian(e: &MalthusianError) -> GxStatus {
    match e {
        MalthusianError::InvalidLaw(_) | MalthusianError::InvalidParameter(_) => {
            GxStatus::InvalidParameter
        }
        MalthusianError::NoRoot { .. } => GxStatus::NoRoot,
        MalthusianError::NotConverged { .. } => GxStatus::NotConverged,
        MalthusianError::Fitness(inner) => status_of_fitness(inner),
    }
}

fn status_of_engine(e: &EngineError) -> GxStatus {
    match e {
        EngineError::InvalidParameter(_) => GxStatus::InvalidParameter,
        EngineError::Law(inner) => status_of_malthusian(inner),
        _ => GxStatus::SimulationFailed,
    }
}

fn status_of_dist(e: &DistError) -> GxStatus {
    let _ = e;
    GxStatus::InvalidParameter
}

/// Runs a call body, translating panics into `Internal`.
fn guarded(f: impl FnOnce() -> GxStatus) -> GxStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(GxStatus::Internal)
}

/// Writes `value` through `out`, tolerating only non-null pointers.
///
/// # Safety
/// `out` must be valid for writes when non-null.
unsafe fn write_out<T>(out: *mut T, value: T) -> GxStatus {
    if out.is_null() {
        return GxStatus::NullPointer;
    }
    unsafe { out.write(value) };
    GxStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static human-readable message for a status code; never null, including
/// for unrecognized codes.
#[no_mangle]
pub extern "C" fn gx_status_message(status: i32) -> *const c_char {
    let text: &'static str = match status {
        0 => "ok\0",
        1 => "null pointer argument\0",
        2 => "string argument is not valid UTF-8\0",
        3 => "unknown fitness model id\0",
        4 => "invalid parameter\0",
        5 => "operation requires the other tail class\0",
        6 => "balance equation has no root\0",
        7 => "solver did not converge\0",
        8 => "simulation failed\0",
        9 => "internal error\0",
        _ => "unrecognized status code\0",
    };
    text.as_ptr() as *const c_char
}

/// Creates a fitness law from a catalog id and its parameters.
///
/// # Safety
/// `id` must be a NUL-terminated string, `params` must point to `n_params`
/// doubles (may be null when `n_params` is 0), and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_model_new(
    id: *const c_char,
    params: *const f64,
    n_params: usize,
    out: *mut *mut GxModel,
) -> GxStatus {
    guarded(|| {
        if id.is_null() || out.is_null() || (params.is_null() && n_params > 0) {
            return GxStatus::NullPointer;
        }
        let Ok(id) = unsafe { CStr::from_ptr(id) }.to_str() else {
            return GxStatus::InvalidUtf8;
        };
        let params = if n_params == 0 {
            &[][..]
        } else {
            unsafe { std::slice::from_raw_parts(params, n_params) }
        };
        match FitnessModel::from_catalog(id, params) {
            Ok(law) => unsafe { write_out(out, Box::into_raw(Box::new(GxModel(law)))) },
            Err(e) => status_of_fitness(&e),
        }
    })
}

/// Destroys a fitness law; null is a no-op.
///
/// # Safety
/// `model` must have come from [`gx_model_new`] and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn gx_model_free(model: *mut GxModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// P(fitness > x).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_model_tail_prob(
    model: *const GxModel,
    x: f64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        unsafe { write_out(out, model.0.tail_prob(x)) }
    })
}

/// Curvature constant of a fast-decaying (Gumbel-class) law.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_model_kappa(model: *const GxModel, out: *mut f64) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        match model.0.as_gumbel().map(|g| g.kappa()) {
            Ok(Ok(estimate)) => unsafe { write_out(out, estimate.value) },
            Ok(Err(e)) => status_of_fitness(&e),
            Err(e) => status_of_fitness(&e),
        }
    })
}

/// Draws one fitness value, advancing the stream.
///
/// # Safety
/// `model` and `rng` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_model_sample_fitness(
    model: *const GxModel,
    rng: *mut GxRng,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        let Some(rng) = (unsafe { rng.as_mut() }) else {
            return GxStatus::NullPointer;
        };
        unsafe { write_out(out, model.0.sample_fitness(&mut rng.0)) }
    })
}

/// Creates the deterministic stream for (`seed`, `stream`); the same pair
/// always reproduces the same draws.
#[no_mangle]
pub extern "C" fn gx_rng_new(seed: u64, stream: u64) -> *mut GxRng {
    Box::into_raw(Box::new(GxRng(replicate_rng(seed, stream))))
}

/// Destroys a stream; null is a no-op.
///
/// # Safety
/// `rng` must have come from [`gx_rng_new`] and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn gx_rng_free(rng: *mut GxRng) {
    if !rng.is_null() {
        drop(unsafe { Box::from_raw(rng) });
    }
}

/// Centering time of the largest family for a Gumbel-class law at rate
/// `lambda` and horizon `t`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_solve_sigma(
    model: *const GxModel,
    lambda: f64,
    t: f64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        let gumbel = match model.0.as_gumbel() {
            Ok(g) => g,
            Err(e) => return status_of_fitness(&e),
        };
        match solve_sigma(gumbel, lambda, t) {
            Ok(solution) => unsafe { write_out(out, solution.sigma) },
            Err(e) => status_of_scaling(&e),
        }
    })
}

/// Growth rate of the fitness-degree attachment tree.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_malthusian_bb(model: *const GxModel, out: *mut f64) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        match malthusian_bb(&model.0) {
            Ok(solution) => unsafe { write_out(out, solution.lambda) },
            Err(e) => status_of_malthusian(&e),
        }
    })
}

/// Growth rate of branching dynamics with an offspring table given as three
/// parallel arrays: per row, `same[i]` same-family members and `new_[i]`
/// new families arrive together with probability `prob[i]`.
///
/// # Safety
/// `model` must be a live handle; the arrays must hold `n_rows` entries;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_malthusian_rbp(
    model: *const GxModel,
    same: *const u32,
    new_: *const u32,
    prob: *const f64,
    n_rows: usize,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        if same.is_null() || new_.is_null() || prob.is_null() || n_rows == 0 {
            return GxStatus::NullPointer;
        }
        let rows: Vec<(u32, u32, f64)> = (0..n_rows)
            .map(|i| unsafe { (*same.add(i), *new_.add(i), *prob.add(i)) })
            .collect();
        let law = match OffspringLaw::new(rows) {
            Ok(law) => law,
            Err(e) => return status_of_malthusian(&e),
        };
        match malthusian_rbp(&model.0, &law) {
            Ok(solution) => unsafe { write_out(out, solution.lambda) },
            Err(e) => status_of_malthusian(&e),
        }
    })
}

/// Growth rate of selection-mutation dynamics: `mean` children per event,
/// each a mutant with probability `beta`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_malthusian_selection_mutation(
    model: *const GxModel,
    beta: f64,
    mean: f64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        match malthusian_selection_mutation(&model.0, beta, mean) {
            Ok(solution) => unsafe { write_out(out, solution.lambda) },
            Err(e) => status_of_malthusian(&e),
        }
    })
}

/// Partition-balance exponent of the fitness-biased seating process.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_malthusian_crp(model: *const GxModel, out: *mut f64) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        match malthusian_crp(&model.0) {
            Ok(balance) => unsafe { write_out(out, balance.alpha) },
            Err(e) => status_of_malthusian(&e),
        }
    })
}

/// Frechet CDF with the given shape and scale.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_frechet_cdf(
    shape: f64,
    scale: f64,
    x: f64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| match Frechet::new(shape, scale) {
        Ok(dist) => unsafe { write_out(out, dist.cdf(x)) },
        Err(e) => status_of_dist(&e),
    })
}

/// Gaussian CDF with the given mean and variance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_gaussian_cdf(
    mean: f64,
    variance: f64,
    x: f64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| match Gaussian::new(mean, variance) {
        Ok(dist) => unsafe { write_out(out, dist.cdf(x)) },
        Err(e) => status_of_dist(&e),
    })
}

/// Gamma CDF with the given shape and rate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_gamma_cdf(shape: f64, rate: f64, x: f64, out: *mut f64) -> GxStatus {
    guarded(|| match GammaDist::new(shape, rate) {
        Ok(dist) => unsafe { write_out(out, dist.cdf(x)) },
        Err(e) => status_of_dist(&e),
    })
}

/// Seats `n_customers` in the fitness-biased seating process and reports
/// the ratio of the two largest occupancies (infinity when fewer than two
/// tables opened). Deterministic in (`seed`, `replicate`).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_crp_top_ratio(
    model: *const GxModel,
    theta: f64,
    n_customers: u64,
    seed: u64,
    replicate: u64,
    out: *mut f64,
) -> GxStatus {
    guarded(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            return GxStatus::NullPointer;
        };
        let options = CrpOptions {
            theta,
            n_customers,
            ..CrpOptions::default()
        };
        match simulate_crp(&model.0, options, replicate_rng(seed, replicate)) {
            Ok(output) => unsafe {
                write_out(out, output.top_ratio().unwrap_or(f64::INFINITY))
            },
            Err(e) => status_of_engine(&e),
        }
    })
}

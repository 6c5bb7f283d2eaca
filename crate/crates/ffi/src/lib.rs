//! C ABI over the optimizer kernel.
//!
//! Every function returns an [`AmStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`am_last_error_message`].
//! Optimizer handles are opaque and must be released with [`am_optimizer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adamomentum::numerics::ParamVector;
use adamomentum::optim::{effective_stepsize, DecayMode, HyperParams, OptimizerKind, OptimizerState};
use adamomentum::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    NonFinite = 4,
    InvalidState = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmOptimizerKind {
    Adamomentum = 0,
    Adam = 1,
    Adamw = 2,
    Rmsprop = 3,
    Rprop = 4,
    Adabelief = 5,
    Sgd = 6,
}

impl From<AmOptimizerKind> for OptimizerKind {
    fn from(k: AmOptimizerKind) -> Self {
        match k {
            AmOptimizerKind::Adamomentum => OptimizerKind::Adamomentum,
            AmOptimizerKind::Adam => OptimizerKind::Adam,
            AmOptimizerKind::Adamw => OptimizerKind::Adamw,
            AmOptimizerKind::Rmsprop => OptimizerKind::Rmsprop,
            AmOptimizerKind::Rprop => OptimizerKind::Rprop,
            AmOptimizerKind::Adabelief => OptimizerKind::Adabelief,
            AmOptimizerKind::Sgd => OptimizerKind::Sgd,
        }
    }
}

/// Constant-schedule hyperparameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmHyperParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    /// Nonzero: decay applied to the weights directly instead of added to the gradient.
    pub decoupled_decay: u8,
}

impl AmHyperParams {
    fn from_rust(hp: &HyperParams) -> Self {
        AmHyperParams {
            alpha: hp.alpha,
            beta1: hp.beta1,
            beta2: hp.beta2,
            epsilon: hp.epsilon,
            weight_decay: hp.weight_decay,
            decoupled_decay: u8::from(hp.decay_mode == DecayMode::Decoupled),
        }
    }

    fn to_rust(self) -> HyperParams {
        let decay_mode = match (self.weight_decay == 0.0, self.decoupled_decay != 0) {
            (true, _) => DecayMode::None,
            (false, true) => DecayMode::Decoupled,
            (false, false) => DecayMode::Coupled,
        };
        HyperParams {
            alpha: self.alpha,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
            decay_mode,
            ..HyperParams::default()
        }
    }
}

/// Opaque optimizer handle.
pub struct AmOptimizer {
    kind: OptimizerKind,
    hyper: HyperParams,
    state: OptimizerState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AmStatus {
    match e {
        Error::Shape { .. } => AmStatus::ShapeMismatch,
        Error::NonFinite { .. } => AmStatus::NonFinite,
        Error::State(_) => AmStatus::InvalidState,
        _ => AmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), AmStatus>) -> AmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside adamomentum");
            AmStatus::Panic
        }
    }
}

fn fail(e: Error) -> AmStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> AmStatus {
    set_error(format!("{what} is null"));
    AmStatus::NullPointer
}

/// Message for the last non-OK status on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn am_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn am_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or point to writable memory for one `AmHyperParams`.
#[no_mangle]
pub unsafe extern "C" fn am_hyper_defaults(kind: AmOptimizerKind, out: *mut AmHyperParams) -> AmStatus {
    if out.is_null() {
        return null("out");
    }
    *out = AmHyperParams::from_rust(&HyperParams::for_kind(kind.into()));
    AmStatus::Ok
}

/// Creates an optimizer for `dim` parameters. `hyper` may be null to use the
/// defaults for `kind`.
///
/// # Safety
/// `hyper` must be null or valid for reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_new(
    kind: AmOptimizerKind,
    hyper: *const AmHyperParams,
    dim: usize,
    out: *mut *mut AmOptimizer,
) -> AmStatus {
    if out.is_null() {
        return null("out");
    }
    *out = ptr::null_mut();
    let hyper = hyper.as_ref().copied();
    guard(|| {
        let kind = OptimizerKind::from(kind);
        if dim == 0 {
            return Err(fail(Error::Config("dim must be at least 1".into())));
        }
        let hp = hyper.map_or_else(|| HyperParams::for_kind(kind), AmHyperParams::to_rust);
        hp.validate().map_err(fail)?;
        let handle = AmOptimizer {
            kind,
            hyper: hp,
            state: OptimizerState::new(kind.kernel(), dim),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`am_optimizer_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_free(handle: *mut AmOptimizer) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Applies one update in place. On error `params` is left unchanged.
///
/// # Safety
/// `params` and `grad` must each point to `len` valid doubles.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_step(
    handle: *mut AmOptimizer,
    params: *mut f64,
    grad: *const f64,
    len: usize,
) -> AmStatus {
    let Some(h) = handle.as_mut() else { return null("handle") };
    if params.is_null() {
        return null("params");
    }
    if grad.is_null() {
        return null("grad");
    }
    let params = std::slice::from_raw_parts_mut(params, len);
    let grad = std::slice::from_raw_parts(grad, len);
    guard(|| {
        if len != h.state.dim() {
            return Err(fail(Error::Shape {
                context: "params",
                expected: h.state.dim(),
                actual: len,
            }));
        }
        let mut p = ParamVector::from(&*params);
        h.state.step(&mut p, &ParamVector::from(grad), &h.hyper).map_err(fail)?;
        params.copy_from_slice(&p);
        Ok(())
    })
}

/// Writes the per-coordinate effective stepsize of the most recent step.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_effective_stepsize(
    handle: *const AmOptimizer,
    out: *mut f64,
    len: usize,
) -> AmStatus {
    let Some(h) = handle.as_ref() else { return null("handle") };
    if out.is_null() {
        return null("out");
    }
    let out = std::slice::from_raw_parts_mut(out, len);
    guard(|| {
        if len != h.state.dim() {
            return Err(fail(Error::Shape {
                context: "out",
                expected: h.state.dim(),
                actual: len,
            }));
        }
        let eff = effective_stepsize(&h.state, &h.hyper).map_err(fail)?;
        out.copy_from_slice(&eff);
        Ok(())
    })
}

/// Steps taken so far; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_step_count(handle: *const AmOptimizer) -> u64 {
    handle.as_ref().map_or(0, |h| h.state.t())
}

/// Clears the moments and the step counter, keeping the hyperparameters.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn am_optimizer_reset(handle: *mut AmOptimizer) -> AmStatus {
    let Some(h) = handle.as_mut() else { return null("handle") };
    h.state = OptimizerState::new(h.kind.kernel(), h.state.dim());
    AmStatus::Ok
}

use std::ffi::CStr;
use std::ptr;

use adamomentum::numerics::ParamVector;
use adamomentum::optim::{HyperParams, OptimizerKind, OptimizerState};
use adamomentum_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(am_last_error_message()) }.to_string_lossy().into_owned()
}

fn make(kind: AmOptimizerKind, hyper: Option<&AmHyperParams>, dim: usize) -> *mut AmOptimizer {
    let mut h = ptr::null_mut();
    let hp = hyper.map_or(ptr::null(), |h| h as *const _);
    assert_eq!(unsafe { am_optimizer_new(kind, hp, dim, &mut h) }, AmStatus::Ok, "{}", last_error());
    h
}

#[test]
fn first_step_through_the_c_abi() {
    let mut hp = AmHyperParams { alpha: 0.0, beta1: 0.0, beta2: 0.0, epsilon: 0.0, weight_decay: 0.0, decoupled_decay: 0 };
    unsafe { am_hyper_defaults(AmOptimizerKind::Adamomentum, &mut hp) };
    assert_eq!(hp.beta1, 0.9);
    hp.alpha = 0.1;
    hp.epsilon = 0.0;
    for (kind, want) in [(AmOptimizerKind::Adamomentum, 0.0), (AmOptimizerKind::Adam, 0.9)] {
        let h = make(kind, Some(&hp), 1);
        let mut theta = [1.0];
        let g = [2.0];
        assert_eq!(unsafe { am_optimizer_step(h, theta.as_mut_ptr(), g.as_ptr(), 1) }, AmStatus::Ok);
        assert!((theta[0] - want).abs() <= 1e-12, "{kind:?}: {}", theta[0]);
        assert_eq!(unsafe { am_optimizer_step_count(h) }, 1);
        unsafe { am_optimizer_free(h) };
    }
}

#[test]
fn matches_the_rust_state_bit_for_bit() {
    let h = make(AmOptimizerKind::Adamomentum, None, 3);
    let hp = HyperParams::for_kind(OptimizerKind::Adamomentum);
    let mut state = OptimizerState::new(OptimizerKind::Adamomentum.kernel(), 3);
    let mut a = [0.5, -1.0, 2.0];
    let mut b = ParamVector::from(&a[..]);
    for t in 0..200 {
        let g = [(t as f64).sin(), 0.3, -(t as f64) * 1e-3];
        assert_eq!(unsafe { am_optimizer_step(h, a.as_mut_ptr(), g.as_ptr(), 3) }, AmStatus::Ok);
        state.step(&mut b, &ParamVector::from(&g[..]), &hp).unwrap();
    }
    assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let mut eff = [0.0; 3];
    assert_eq!(unsafe { am_optimizer_effective_stepsize(h, eff.as_mut_ptr(), 3) }, AmStatus::Ok);
    assert!(eff.iter().all(|e| *e > 0.0));
    assert_eq!(unsafe { am_optimizer_reset(h) }, AmStatus::Ok);
    assert_eq!(unsafe { am_optimizer_step_count(h) }, 0);
    assert_eq!(unsafe { am_optimizer_effective_stepsize(h, eff.as_mut_ptr(), 3) }, AmStatus::InvalidState);
    unsafe { am_optimizer_free(h) };
}

#[test]
fn error_codes_and_messages() {
    let mut h = ptr::null_mut();
    let bad = AmHyperParams { alpha: 0.1, beta1: 1.5, beta2: 0.999, epsilon: 1e-8, weight_decay: 0.0, decoupled_decay: 0 };
    assert_eq!(unsafe { am_optimizer_new(AmOptimizerKind::Adam, &bad, 2, &mut h) }, AmStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("beta1"), "{}", last_error());
    assert_eq!(unsafe { am_optimizer_new(AmOptimizerKind::Adam, ptr::null(), 0, &mut h) }, AmStatus::InvalidArgument);
    assert_eq!(unsafe { am_optimizer_new(AmOptimizerKind::Adam, ptr::null(), 2, ptr::null_mut()) }, AmStatus::NullPointer);

    let h = make(AmOptimizerKind::Adam, None, 2);
    let mut p = [1.0, 2.0];
    let g = [0.1, f64::NAN];
    assert_eq!(unsafe { am_optimizer_step(h, p.as_mut_ptr(), g.as_ptr(), 2) }, AmStatus::NonFinite);
    assert_eq!(p, [1.0, 2.0]);
    assert_eq!(unsafe { am_optimizer_step_count(h) }, 0);
    assert_eq!(unsafe { am_optimizer_step(h, p.as_mut_ptr(), g.as_ptr(), 1) }, AmStatus::ShapeMismatch);
    assert_eq!(unsafe { am_optimizer_step(h, ptr::null_mut(), g.as_ptr(), 2) }, AmStatus::NullPointer);
    assert_eq!(unsafe { am_optimizer_step(ptr::null_mut(), p.as_mut_ptr(), g.as_ptr(), 2) }, AmStatus::NullPointer);
    assert_eq!(unsafe { am_optimizer_step_count(ptr::null()) }, 0);
    unsafe {
        am_optimizer_free(h);
        am_optimizer_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/adamomentum.h");
    for sym in [
        "am_optimizer_new",
        "am_optimizer_step",
        "am_optimizer_effective_stepsize",
        "am_optimizer_free",
        "am_last_error_message",
        "AM_STATUS_NON_FINITE",
        "typedef struct AmOptimizer AmOptimizer",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
    let v = unsafe { CStr::from_ptr(am_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"adamomentum.h\"\nint main(void) {\n  AmOptimizer *h = 0;\n  double p[1] = {1.0}, g[1] = {2.0};\n  if (am_optimizer_new(AM_OPTIMIZER_KIND_ADAMOMENTUM, 0, 1, &h) != AM_STATUS_OK) return 1;\n  am_optimizer_step(h, p, g, 1);\n  am_optimizer_free(h);\n  return 0;\n}\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = std::process::Command::new(cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("am_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

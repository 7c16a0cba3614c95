//! Process-wide fault injection for the self-test's mutation check.
//!
//! When the polarization-sign fault is on, the inclusion–exclusion in
//! `mixed_sigma` drops its alternating signs. Only `ghx selftest
//! --inject-fault polarization-sign` turns it on; a correct self-test must
//! then fail.

use std::sync::atomic::{AtomicBool, Ordering};

static POLARIZATION_SIGN: AtomicBool = AtomicBool::new(false);

pub fn set_polarization_sign_fault(on: bool) {
    POLARIZATION_SIGN.store(on, Ordering::SeqCst);
}

#[inline]
pub(crate) fn polarization_sign_fault() -> bool {
    POLARIZATION_SIGN.load(Ordering::Relaxed)
}

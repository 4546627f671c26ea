//! Collision-detection call counters.
//!
//! Two granularities are tracked per thread: `config_checks` counts one unit
//! per configuration-against-one-obstacle test (the dominant cost of every
//! updater and planner), `element_checks` counts one unit per roadmap
//! element re-examined against one obstacle during an update. Thread-local
//! storage keeps concurrently running benchmarks and tests independent.

use std::cell::Cell;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CdStats {
    /// Configuration-vs-obstacle collision tests.
    pub config_checks: u64,
    /// Element-vs-obstacle re-examinations (the CD(c, o) of an update).
    pub element_checks: u64,
}

thread_local! {
    static CONFIG: Cell<u64> = const { Cell::new(0) };
    static ELEMENT: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn count_config_check() {
    CONFIG.with(|c| c.set(c.get() + 1));
}

pub(crate) fn count_element_check() {
    ELEMENT.with(|c| c.set(c.get() + 1));
}

/// Current totals for this thread.
pub fn snapshot() -> CdStats {
    CdStats {
        config_checks: CONFIG.with(|c| c.get()),
        element_checks: ELEMENT.with(|c| c.get()),
    }
}

/// Resets this thread's counters to zero.
pub fn reset() {
    CONFIG.with(|c| c.set(0));
    ELEMENT.with(|c| c.set(0));
}

/// Counter deltas accumulated while running `f`.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, CdStats) {
    let before = snapshot();
    let out = f();
    let after = snapshot();
    (
        out,
        CdStats {
            config_checks: after.config_checks - before.config_checks,
            element_checks: after.element_checks - before.element_checks,
        },
    )
}

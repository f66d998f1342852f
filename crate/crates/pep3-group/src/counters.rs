//! Thread-local counters for scalar multiplications, used by benchmarks to
//! check operation budgets.  Base-point multiplications (which hit the
//! precomputed table) are counted separately from general ones.

use core::cell::Cell;

thread_local! {
    static GENERAL: Cell<u64> = const { Cell::new(0) };
    static BASE: Cell<u64> = const { Cell::new(0) };
}

/// Scalar-multiplication counts for the current thread since the last reset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct MulCounts {
    pub general: u64,
    pub base: u64,
}

pub fn reset() {
    GENERAL.with(|c| c.set(0));
    BASE.with(|c| c.set(0));
}

pub fn snapshot() -> MulCounts {
    MulCounts {
        general: GENERAL.with(|c| c.get()),
        base: BASE.with(|c| c.get()),
    }
}

pub(crate) fn tick_general() {
    GENERAL.with(|c| c.set(c.get() + 1));
}

pub(crate) fn tick_base() {
    BASE.with(|c| c.set(c.get() + 1));
}

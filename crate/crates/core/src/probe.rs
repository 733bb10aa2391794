//! Per-thread operation counters.
//!
//! Kernels in [`crate::tensor`] report the arithmetic they perform and every
//! buffer they allocate. Counting is off unless a [`measure`] scope is active
//! on the current thread, so uninstrumented callers pay one flag check per
//! kernel call.

use std::cell::Cell;

/// Totals collected inside one [`measure`] scope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Floating point operations; a multiply-add counts as two.
    pub flops: u64,
    /// Largest single buffer allocated, in scalar elements.
    pub peak_elems: u64,
    /// Number of buffers allocated.
    pub allocations: u64,
}

thread_local! {
    static ACTIVE: Cell<Option<Counters>> = const { Cell::new(None) };
}

/// Runs `f` with counting enabled and returns what it did.
///
/// Scopes nest: an inner scope sees only its own work and the outer scope's
/// counts are restored (not merged) when it ends.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, Counters) {
    let saved = ACTIVE.with(|a| a.replace(Some(Counters::default())));
    let out = f();
    let counters = ACTIVE.with(|a| a.replace(saved)).unwrap_or_default();
    (out, counters)
}

pub(crate) fn record_flops(n: u64) {
    ACTIVE.with(|a| {
        if let Some(mut c) = a.get() {
            c.flops += n;
            a.set(Some(c));
        }
    });
}

pub(crate) fn record_alloc(elems: usize) {
    ACTIVE.with(|a| {
        if let Some(mut c) = a.get() {
            c.peak_elems = c.peak_elems.max(elems as u64);
            c.allocations += 1;
            a.set(Some(c));
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inactive_by_default() {
        record_flops(10);
        let ((), c) = measure(|| {});
        assert_eq!(c, Counters::default());
    }

    #[test]
    fn nested_scopes_are_isolated() {
        let ((), outer) = measure(|| {
            record_flops(3);
            let ((), inner) = measure(|| {
                record_flops(5);
                record_alloc(7);
            });
            assert_eq!(inner.flops, 5);
            assert_eq!(inner.peak_elems, 7);
            record_alloc(2);
        });
        assert_eq!(outer.flops, 3);
        assert_eq!(outer.peak_elems, 2);
        assert_eq!(outer.allocations, 1);
    }
}

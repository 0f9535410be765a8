//! Composite-Simpson quadrature over piecewise-smooth integrands.
//!
//! Integrands in this crate are smooth between known breakpoints (grid
//! abscissae of a sampled curve, control-segment boundaries, opponent
//! thresholds) and only piecewise-smooth across them, so every routine here
//! takes the breakpoints explicitly and never integrates across one.

use crate::{real, Real};

/// Composite Simpson on `[a, b]` with `sub` (even, >= 2) subintervals.
pub(crate) fn composite_simpson<T: Real>(f: &mut impl FnMut(T) -> T, a: T, b: T, sub: usize) -> T {
    debug_assert!(sub >= 2 && sub.is_multiple_of(2));
    if b <= a {
        return T::zero();
    }
    let h = (b - a) / T::from_usize(sub).unwrap();
    let mut acc = f(a) + f(b);
    let four = real::<T>(4.0);
    let two = real::<T>(2.0);
    for i in 1..sub {
        let x = a + h * T::from_usize(i).unwrap();
        acc += if i % 2 == 1 { four * f(x) } else { two * f(x) };
    }
    acc * h / real::<T>(3.0)
}

/// Integrates `f` over consecutive pairs of `breaks` (sorted ascending),
/// subdividing each piece into even subintervals of length at most `h_target`.
pub(crate) fn integrate_breakpoints<T: Real>(
    f: &mut impl FnMut(T) -> T,
    breaks: &[T],
    h_target: T,
) -> T {
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let len = b - a;
        let mut sub = if h_target > T::zero() {
            (len / h_target).ceil().to_usize().unwrap_or(2).max(2)
        } else {
            2
        };
        if sub % 2 == 1 {
            sub += 1;
        }
        total += composite_simpson(f, a, b, sub.min(4096));
    }
    total
}

/// Sorted, deduplicated breakpoint list on `[lo, hi]` from the given interior
/// candidates; points outside `(lo, hi)` are dropped.
pub(crate) fn merge_breakpoints<T: Real>(lo: T, hi: T, interior: impl Iterator<Item = T>) -> Vec<T> {
    let tol = (hi - lo) * real::<T>(1e-12);
    let mut pts: Vec<T> = interior.filter(|&p| p > lo + tol && p < hi - tol).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut breaks = Vec::with_capacity(pts.len() + 2);
    breaks.push(lo);
    for p in pts {
        if p - *breaks.last().unwrap() > tol {
            breaks.push(p);
        }
    }
    breaks.push(hi);
    breaks
}

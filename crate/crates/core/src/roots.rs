//! Bracketing root finders used by the analysis module.

/// A root estimate; `bracketed == false` means no sign change was found and
/// `value` is the upper end of the search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    pub bracketed: bool,
}

/// Bisection on `[lo, hi]` with `f(lo) > 0 >= f(hi)`.
///
/// Returns the left end of the final bracket, so `f > 0` on `[0, result)` is
/// preserved when `f` is positive up to the first crossing.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * hi.abs() || mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest root of `f` on `(lo, hi]` given `f(lo) > 0`: uniform scan over
/// `cells` sub-intervals, then bisection on the first sign change.
pub fn first_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize, rel_tol: f64) -> Root {
    let width = (hi - lo) / cells as f64;
    let mut left = lo;
    for j in 1..=cells {
        let right = if j == cells { hi } else { lo + j as f64 * width };
        if f(right) <= 0.0 {
            return Root { value: bisect(&f, left, right, rel_tol), bracketed: true };
        }
        left = right;
    }
    Root { value: hi, bracketed: false }
}

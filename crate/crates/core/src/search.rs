//! One-dimensional search primitives shared by the solvers: golden-section
//! maximization for concave/unimodal objectives and bracketed bisection for
//! monotone root finding.

/// Inverse golden ratio, (√5 − 1)/2.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` over `[lo, hi]` by golden-section search.
///
/// Stops when the bracket width falls below `xtol` (absolute) or after
/// `max_iter` shrink steps. Returns `(x_best, f(x_best))` at the bracket
/// midpoint.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    debug_assert!(hi >= lo);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while hi - lo > xtol && iter < max_iter {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iter += 1;
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Error from a bracketed root search.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f(lo)={flo}, f(hi)={fhi})")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("bisection did not converge within {0} iterations")]
    MaxIterations(usize),
}

/// Finds the root of `f` on `[lo, hi]` by bisection, assuming
/// `sign(f(lo)) != sign(f(hi))`.
///
/// Converges to `rel_tol` relative bracket width (with an absolute floor for
/// roots near zero). Bisection needs only the sign change, so it tolerates
/// mild non-monotonicity inside the bracket.
pub fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { lo, hi, flo, fhi });
    }
    let mut flo = flo;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(RootError::MaxIterations(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }

    #[test]
    fn golden_section_monotone_returns_boundary() {
        let (x, _) = golden_section_max(|x| x, 0.0, 5.0, 1e-9, 300);
        assert!((x - 5.0).abs() < 1e-6);
    }

    #[test]
    fn bisect_simple_root() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn bisect_rejects_unbracketed() {
        let e = bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 200);
        assert!(matches!(e, Err(RootError::NoBracket { .. })));
    }
}

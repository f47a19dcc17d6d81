//! Scalar minimization and root finding used by the optimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimizer of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `rel_tol * max(|x|, tiny)`.
/// Returns `(x, f(x))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        let scale = c.abs().max(d.abs()).max(f64::MIN_POSITIVE);
        if (b - a) <= rel_tol * scale {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Brent's method for a root of `f` in `[a, b]`; `f(a)` and `f(b)` must
/// have opposite signs (or one of them be zero). Returns `None` otherwise.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let fa = f(a);
    let fb = f(b);
    brent_root_from(f, (a, fa), (b, fb), xtol)
}

/// [`brent_root`] with the end-point values already known. Endpoints are
/// never re-evaluated, so a slightly noisy `f` cannot lose the bracket.
pub fn brent_root_from<F: FnMut(f64) -> f64>(mut f: F, (a, fa): (f64, f64), (b, fb): (f64, f64), xtol: f64) -> Option<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return None;
        }
    }
    Some(b)
}

/// Finds a root of a monotone `f` starting from `[a, b]`, pushing the upper
/// end outward by `grow` until the sign changes (at most `max_grow` times).
pub fn expand_and_root<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    mut b: f64,
    grow: impl Fn(f64) -> f64,
    max_grow: usize,
    xtol: f64,
) -> Option<f64> {
    let fa = f(a);
    let mut fb = f(b);
    let mut n = 0;
    while fa.signum() == fb.signum() && fb != 0.0 {
        if n == max_grow {
            return None;
        }
        b = grow(b);
        fb = f(b);
        n += 1;
    }
    brent_root(f, a, b, xtol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| (x - 1.3).powi(2) + 2.0, -4.0, 9.0, 1e-10);
        // f is flat to rounding within ~sqrt(eps) of the vertex
        assert!((x - 1.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let (x, _) = golden_section(|x| x, 2.0, 3.0, 1e-12);
        assert!((x - 2.0).abs() < 1e-10);
    }

    #[test]
    fn brent_solves_cubic() {
        let r = brent_root(|x| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 1e-14).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_same_sign() {
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn expand_grows_bracket() {
        let r = expand_and_root(|x| x - 1000.0, 0.0, 1.0, |b| b * 2.0, 20, 1e-12).unwrap();
        assert!((r - 1000.0).abs() < 1e-9);
    }
}

//! Bracketed root finding for monotone scalar functions.

/// Outcome of a bracketed solve. `x` is the iterate with the smallest |f|
/// seen; `[lo, hi]` still brackets the sign change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Brent's method (inverse quadratic / secant steps safeguarded by bisection)
/// on a bracket with f(lo) < 0 < f(hi).
///
/// Stops when `done(lo, hi)` holds, when f hits zero exactly, or after
/// `max_iter` evaluations.
pub fn brent<F, E, D>(
    mut f: F,
    (lo, f_lo): (f64, f64),
    (hi, f_hi): (f64, f64),
    done: D,
    max_iter: usize,
) -> Result<Root, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    D: Fn(f64, f64) -> bool,
{
    debug_assert!(f_lo <= 0.0 && f_hi >= 0.0);
    let (mut a, mut fa) = (lo, f_lo);
    let (mut b, mut fb) = (hi, f_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut iterations = 0;
    loop {
        if fb.signum() == fc.signum() && fb != 0.0 {
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
        let (blo, bhi) = if b < c { (b, c) } else { (c, b) };
        if fb == 0.0 || done(blo, bhi) || iterations >= max_iter {
            let converged = fb == 0.0 || done(blo, bhi);
            return Ok(Root { x: best.0, fx: best.1, lo: blo, hi: bhi, iterations, converged });
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)), (q0 - 1.0) * (r - 1.0) * (s - 1.0))
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        iterations += 1;
        if fb.abs() < best.1.abs() {
            best = (b, fb);
        }
    }
}

//! Scalar numerics: Brent root finding and composite Gauss-Legendre quadrature.

use crate::error::{Error, Result};

/// Five-point Gauss-Legendre abscissae on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];

const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// Composite quadrature settings.
///
/// Every interval of the integration grid is split into panels no longer
/// than `max_panel / refinement` years and each panel is integrated with
/// five-point Gauss-Legendre (exact for polynomials up to degree nine).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub refinement: usize,
    pub max_panel: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            refinement: 1,
            max_panel: 0.25,
        }
    }
}

impl Quadrature {
    pub fn with_refinement(refinement: usize) -> Self {
        Self {
            refinement: refinement.max(1),
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let len = b - a;
        if len <= 0.0 {
            return 0.0;
        }
        let panel = self.max_panel / self.refinement as f64;
        let n = ((len / panel).ceil() as usize).max(self.refinement).max(1);
        let h = len / n as f64;
        let mut total = 0.0;
        for k in 0..n {
            let lo = a + h * k as f64;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            let mut s = 0.0;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                s += w * f(mid + half * x);
            }
            total += s * half;
        }
        total
    }

    /// Integrate over consecutive intervals of `breaks`, which must be sorted.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: &F, breaks: &[f64]) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(f, w[0], w[1]))
            .sum()
    }
}

/// Options for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-15,
            max_iter: 200,
        }
    }
}

/// Brent's method on a bracketing interval `[a, b]`.
///
/// Fails when `f(a)` and `f(b)` share a sign or the function is not finite.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    opts: BrentOptions,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numeric(format!(
            "non-finite function value at bracket [{a}, {b}]"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numeric(format!(
            "no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
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
        if !fb.is_finite() {
            return Err(Error::numeric(format!("non-finite function value at {b}")));
        }
    }
    Err(Error::numeric("Brent iteration limit reached"))
}

/// Widen `[lo, hi]` geometrically until it brackets a sign change, then solve.
pub fn brent_expanding<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    max_expansions: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    let mut n = 0;
    while flo.signum() == fhi.signum() && flo.is_finite() && fhi.is_finite() {
        if n == max_expansions {
            return Err(Error::numeric(format!(
                "could not bracket a root in [{lo}, {hi}]"
            )));
        }
        let width = hi - lo;
        lo -= width;
        hi += width;
        flo = f(lo);
        fhi = f(hi);
        n += 1;
    }
    brent(f, lo, hi, BrentOptions::default())
}

//! Uniform grids, composite trapezoid quadrature with prefix-integral
//! support, and bracketed scalar root finding.
//!
//! Trapezoid is used for every integral in the toolkit: it is second-order
//! on the uniform grids in use and, unlike Simpson, has an exact prefix form
//! (`cumulative_trapezoid`'s last entry reproduces `trapezoid` bit for bit
//! because both run the same left-to-right accumulation).
//!
//! Everything here is pure; callers may parallelise independent quadratures
//! freely.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature needs at least 2 values, got {0}")]
    InsufficientPoints(usize),
    #[error("spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("grid extent must be positive, got {0}")]
    BadExtent(f64),
    #[error("endpoints do not bracket a root: f({a}) = {fa}, f({b}) = {fb}")]
    NonBracketing { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("invalid bracket [{0}, {1}]")]
    BadBracket(f64, f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("function returned NaN at {0}")]
    NanValue(f64),
    #[error("scan needs at least 2 samples, got {0}")]
    ScanTooSmall(usize),
}

/// Endpoint-exact uniform sample: `lo` at `k = 0`, `hi` at `k = n-1`.
///
/// The lerp form keeps endpoints bit-exact and lands on values like 0 when
/// the arithmetic cancels, which sample formulas of the `lo + k h` kind miss.
pub fn lerp_node(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    let last = (n - 1) as f64;
    (lo * (last - k as f64) + hi * k as f64) / last
}

/// Uniform size grid on `[0, m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeGrid {
    nodes: Vec<f64>,
    spacing: f64,
    max_size: f64,
}

impl SizeGrid {
    pub fn new(n_s: usize, m: f64) -> Result<SizeGrid, NumericsError> {
        if n_s < 3 {
            return Err(NumericsError::GridTooSmall { min: 3, got: n_s });
        }
        if !(m > 0.0) {
            return Err(NumericsError::BadExtent(m));
        }
        let nodes = (0..n_s).map(|i| lerp_node(0.0, m, i, n_s)).collect();
        Ok(SizeGrid {
            nodes,
            spacing: m / (n_s - 1) as f64,
            max_size: m,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_size(&self) -> f64 {
        self.max_size
    }
}

/// Uniform delay grid on `[-theta, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGrid {
    nodes: Vec<f64>,
    spacing: f64,
    max_delay: f64,
}

impl DelayGrid {
    pub fn new(n_tau: usize, theta: f64) -> Result<DelayGrid, NumericsError> {
        if n_tau < 3 {
            return Err(NumericsError::GridTooSmall { min: 3, got: n_tau });
        }
        if !(theta > 0.0) {
            return Err(NumericsError::BadExtent(theta));
        }
        let nodes = (0..n_tau)
            .map(|j| lerp_node(-theta, 0.0, j, n_tau))
            .collect();
        Ok(DelayGrid {
            nodes,
            spacing: theta / (n_tau - 1) as f64,
            max_delay: theta,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_delay(&self) -> f64 {
        self.max_delay
    }
}

/// Composite trapezoid sum of uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> Result<f64, NumericsError> {
    if values.len() < 2 {
        return Err(NumericsError::InsufficientPoints(values.len()));
    }
    if !(h > 0.0) {
        return Err(NumericsError::BadSpacing(h));
    }
    let mut acc = 0.0;
    for pair in values.windows(2) {
        acc += h * 0.5 * (pair[0] + pair[1]);
    }
    Ok(acc)
}

/// Prefix integrals: `out[k]` is the trapezoid sum of `values[..=k]`, so
/// `out[0] == 0` and `out[last]` equals [`trapezoid`] exactly.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Result<Vec<f64>, NumericsError> {
    if values.len() < 2 {
        return Err(NumericsError::InsufficientPoints(values.len()));
    }
    if !(h > 0.0) {
        return Err(NumericsError::BadSpacing(h));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += h * 0.5 * (pair[0] + pair[1]);
        out.push(acc);
    }
    Ok(out)
}

/// Brent's method on a bracketing interval, with bisection fallback.
///
/// Refines until the bracket width is below `tol` (absolute); the returned
/// point never leaves the initial bracket.
pub fn find_root_bracketed<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(NumericsError::BadTolerance(tol));
    }
    if !(a < b) {
        if a == b {
            // degenerate bracket from an exact zero at a scan node
            let fa = f(a);
            if fa.is_nan() {
                return Err(NumericsError::NanValue(a));
            }
            if fa == 0.0 {
                return Ok(a);
            }
        }
        return Err(NumericsError::BadBracket(a, b));
    }
    let mut xa = a;
    let mut xb = b;
    let mut fa = f(xa);
    let mut fb = f(xb);
    if fa.is_nan() {
        return Err(NumericsError::NanValue(xa));
    }
    if fb.is_nan() {
        return Err(NumericsError::NanValue(xb));
    }
    if fa == 0.0 {
        return Ok(xa);
    }
    if fb == 0.0 {
        return Ok(xb);
    }
    if fa * fb > 0.0 {
        return Err(NumericsError::NonBracketing {
            a: xa,
            b: xb,
            fa,
            fb,
        });
    }

    let mut xc = xa;
    let mut fc = fa;
    let mut d = xb - xa;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            xc = xa;
            fc = fa;
            d = xb - xa;
            e = d;
        }
        if fc.abs() < fb.abs() {
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * xb.abs() + 0.5 * tol;
        let xm = 0.5 * (xc - xb);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(xb);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation (secant when only two points)
            let s = fb / fa;
            let (mut p, mut q) = if xa == xc {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (xb - xa) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
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
        xa = xb;
        fa = fb;
        if d.abs() > tol1 {
            xb += d;
        } else {
            xb += if xm > 0.0 { tol1 } else { -tol1 };
        }
        fb = f(xb);
        if fb.is_nan() {
            return Err(NumericsError::NanValue(xb));
        }
    }
    Ok(xb)
}

/// A sign-change interval found by [`bracket_scan`]; `lo == hi` marks an
/// exact zero at a sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// Evaluate `f` at `n` uniform points on `[lo, hi]` and report every strict
/// sign change plus degenerate brackets at exact zeros.
pub fn bracket_scan<F>(mut f: F, lo: f64, hi: f64, n: usize) -> Result<Vec<Bracket>, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    if n < 2 {
        return Err(NumericsError::ScanTooSmall(n));
    }
    if !(lo < hi) {
        return Err(NumericsError::BadBracket(lo, hi));
    }
    let mut out = Vec::new();
    let mut prev_x = lerp_node(lo, hi, 0, n);
    let mut prev_f = f(prev_x);
    if prev_f.is_nan() {
        return Err(NumericsError::NanValue(prev_x));
    }
    if prev_f == 0.0 {
        out.push(Bracket {
            lo: prev_x,
            hi: prev_x,
        });
    }
    for k in 1..n {
        let x = lerp_node(lo, hi, k, n);
        let fx = f(x);
        if fx.is_nan() {
            return Err(NumericsError::NanValue(x));
        }
        if fx == 0.0 {
            out.push(Bracket { lo: x, hi: x });
        } else if prev_f != 0.0 && (prev_f > 0.0) != (fx > 0.0) {
            out.push(Bracket { lo: prev_x, hi: x });
        }
        prev_x = x;
        prev_f = fx;
    }
    Ok(out)
}

/// Default absolute bracket tolerance for root refinement.
pub const ROOT_TOL: f64 = 1e-10;

//! Adaptive Simpson quadrature with an absolute tolerance.

use crate::error::{Error, Result};

/// Hard cap on accepted subintervals.
pub const MAX_SUBINTERVALS: usize = 1 << 20;

/// Panels are split at least this many times before the error test applies.
pub const MIN_DEPTH: u32 = 6;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// `∫_a^b f` to absolute accuracy `tol`. `f` must be bounded on `[a, b]`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut total = 0.0;
    let mut panels = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        // a panel that can no longer be split in floating point is accepted as is
        let exhausted = lm <= p.a || rm >= p.b || m <= p.a || m >= p.b;
        if (p.depth >= MIN_DEPTH && delta.abs() <= 15.0 * p.tol) || exhausted {
            total += left + right + delta / 15.0;
            panels += 1;
            if panels > MAX_SUBINTERVALS {
                return Err(Error::QuadratureNonConvergence { a, b });
            }
            continue;
        }
        if stack.len() + panels >= MAX_SUBINTERVALS {
            return Err(Error::QuadratureNonConvergence { a, b });
        }
        let tol = 0.5 * p.tol;
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol,
            depth: p.depth + 1,
        });
    }
    Ok(total)
}

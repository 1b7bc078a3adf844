//! Root-finding utilities: sign-change bracketing, bisection and damped
//! Newton iteration in two dimensions.

use crate::error::{FracError, Result};

const BISECT_MAX_ITER: usize = 200;
const JACOBIAN_STEP: f64 = 1e-7;

/// An interval on which a continuous function changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and validates the sign change.
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let b = Bracket {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) {
            return Err(FracError::InvalidParameter(format!(
                "bracket requires lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        let opposite = (self.f_lo < 0.0 && self.f_hi > 0.0) || (self.f_lo > 0.0 && self.f_hi < 0.0);
        let touches = self.f_lo == 0.0 || self.f_hi == 0.0;
        if !(opposite || touches) {
            return Err(FracError::InvalidParameter(format!(
                "no sign change on [{}, {}]: f = {} and {}",
                self.lo, self.hi, self.f_lo, self.f_hi
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Splits `[lo, hi]` into `n` equal subintervals and returns those on which
/// `f` changes sign (or hits zero at the right end).
pub fn find_brackets<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize) -> Vec<Bracket> {
    let mut out = Vec::new();
    if n == 0 || !(lo < hi) {
        return out;
    }
    let h = (hi - lo) / n as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        if (f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0) || (f1 == 0.0 && f0 != 0.0) {
            out.push(Bracket {
                lo: x0,
                hi: x1,
                f_lo: f0,
                f_hi: f1,
            });
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Bisection until the bracket is narrower than `tol`, at most 200 halvings.
///
/// Returns the point with the smallest `|f|` among the final bracket ends and
/// midpoint; an exact zero found on the way is returned immediately.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    bracket.validate()?;
    if !(tol > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if bracket.f_lo == 0.0 {
        return Ok(bracket.lo);
    }
    if bracket.f_hi == 0.0 {
        return Ok(bracket.hi);
    }
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    let f_mid = f(mid).abs();
    let best = [(mid, f_mid), (lo, f_lo.abs()), (hi, f_hi.abs())]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(x, _)| x)
        .unwrap_or(mid);
    Ok(best)
}

/// Settings for [`newton2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Target Euclidean norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 30,
        }
    }
}

impl NewtonOptions {
    pub fn with_tol(tol: f64) -> Self {
        NewtonOptions {
            tol,
            ..Self::default()
        }
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton iteration for `F: R² → R²` with a central-difference
/// Jacobian (step `1e-7`, scaled by the magnitude of each coordinate).
pub fn newton2d<F>(mut f: F, start: [f64; 2], opts: NewtonOptions) -> Result<[f64; 2]>
where
    F: FnMut([f64; 2]) -> [f64; 2],
{
    let jac = |f: &mut F, x: [f64; 2]| -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = JACOBIAN_STEP * x[c].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let fp = f(xp);
            let fm = f(xm);
            for r in 0..2 {
                j[r][c] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        j
    };
    newton2d_impl(&mut f, jac, start, opts)
}

/// Damped Newton iteration with a caller-supplied Jacobian.
pub fn newton2d_with_jacobian<F, J>(
    mut f: F,
    mut jacobian: J,
    start: [f64; 2],
    opts: NewtonOptions,
) -> Result<[f64; 2]>
where
    F: FnMut([f64; 2]) -> [f64; 2],
    J: FnMut([f64; 2]) -> [[f64; 2]; 2],
{
    newton2d_impl(&mut f, |_: &mut F, x| jacobian(x), start, opts)
}

fn newton2d_impl<F, J>(
    f: &mut F,
    mut jac: J,
    start: [f64; 2],
    opts: NewtonOptions,
) -> Result<[f64; 2]>
where
    F: FnMut([f64; 2]) -> [f64; 2],
    J: FnMut(&mut F, [f64; 2]) -> [[f64; 2]; 2],
{
    let mut x = start;
    let mut fx = f(x);
    let mut res = norm2(fx);
    for _ in 0..opts.max_iter {
        if res < opts.tol {
            return Ok(x);
        }
        let j = jac(f, x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            return Err(FracError::NoConvergence {
                iterations: opts.max_iter,
                residual: res,
            });
        }
        let dx = [
            (j[1][1] * fx[0] - j[0][1] * fx[1]) / det,
            (j[0][0] * fx[1] - j[1][0] * fx[0]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
            let ft = f(trial);
            let rt = norm2(ft);
            if rt.is_finite() && rt < res {
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < opts.tol {
        Ok(x)
    } else {
        Err(FracError::NoConvergence {
            iterations: opts.max_iter,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_identity() {
        let b = Bracket::new(|x| x, -1.0, 1.0).unwrap();
        let r = bisect(|x| x, b, 1e-12).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn bisect_sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let b = Bracket::new(f, 1.0, 2.0).unwrap();
        let r = bisect(f, b, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(f(r).abs() < b.f_lo.abs() && f(r).abs() < b.f_hi.abs());
    }

    #[test]
    fn invalid_brackets_are_rejected() {
        assert!(Bracket::new(|x| x * x + 1.0, -1.0, 1.0).is_err());
        assert!(Bracket::new(|x| x, 1.0, -1.0).is_err());
        let bogus = Bracket {
            lo: 0.0,
            hi: 1.0,
            f_lo: 1.0,
            f_hi: 2.0,
        };
        assert!(bisect(|x| x, bogus, 1e-9).is_err());
    }

    #[test]
    fn brackets_found_for_sine() {
        let br = find_brackets(f64::sin, 0.5, 10.0, 1000);
        assert_eq!(br.len(), 3);
        for (b, k) in br.iter().zip(1..) {
            let r = bisect(f64::sin, *b, 1e-13).unwrap();
            assert!((r - k as f64 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_identity_map() {
        let r = newton2d(|x| x, [0.3, -0.2], NewtonOptions::with_tol(1e-12)).unwrap();
        assert!(norm2(r) < 1e-12);
    }

    #[test]
    fn newton_separable_system() {
        let f = |x: [f64; 2]| [x[0] * x[0] - 1.0, x[1] - 2.0];
        let r = newton2d(f, [1.5, 1.0], NewtonOptions::with_tol(1e-12)).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-10 && (r[1] - 2.0).abs() < 1e-10);
        assert!(norm2(f(r)) < 1e-12);
    }

    #[test]
    fn newton_reports_failure_without_root() {
        let f = |x: [f64; 2]| [x[0] * x[0] + 1.0, x[1]];
        let err = newton2d(f, [0.5, 0.5], NewtonOptions::default()).unwrap_err();
        assert!(err.is_numeric_failure());
    }

    #[test]
    fn newton_with_analytic_jacobian() {
        let f = |x: [f64; 2]| [x[0].exp() - 2.0, x[0] + x[1]];
        let j = |x: [f64; 2]| [[x[0].exp(), 0.0], [1.0, 1.0]];
        let r = newton2d_with_jacobian(f, j, [0.0, 0.0], NewtonOptions::with_tol(1e-13)).unwrap();
        assert!((r[0] - 2f64.ln()).abs() < 1e-12);
        assert!((r[1] + 2f64.ln()).abs() < 1e-12);
    }
}

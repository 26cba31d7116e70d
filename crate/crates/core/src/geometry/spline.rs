//! Periodic cubic splines and arclength reparametrization for the
//! generatrix curve.

use crate::error::{Error, Result};

/// Cubic spline over uniformly spaced periodic knots u_i = i/n, u in [0,1).
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    moments: Vec<f64>,
    n: usize,
    h: f64,
}

impl PeriodicSpline {
    /// Interpolating spline through `values[i]` at u = i/len with periodic
    /// closure values[n] = values[0].
    pub fn fit(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::Geometry(format!(
                "periodic spline needs at least 3 points, got {n}"
            )));
        }
        let h = 1.0 / n as f64;
        // Uniform cyclic system: M_{i-1} + 4 M_i + M_{i+1} = 6 d2_i / h^2.
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let ym = values[(i + n - 1) % n];
                let y0 = values[i];
                let yp = values[(i + 1) % n];
                6.0 * (ym - 2.0 * y0 + yp) / (h * h)
            })
            .collect();
        let moments = solve_cyclic_tridiag(1.0, 4.0, 1.0, &rhs)?;
        Ok(Self { values, moments, n, h })
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let uu = u.rem_euclid(1.0);
        let x = uu / self.h;
        let mut i = x.floor() as usize;
        if i >= self.n {
            i = self.n - 1;
        }
        (i, (x - i as f64) * self.h)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (i, dx) = self.locate(u);
        let j = (i + 1) % self.n;
        let t = dx / self.h;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.moments[i], self.moments[j]);
        let s = 1.0 - t;
        s * y0 + t * y1
            + self.h * self.h / 6.0 * ((s * s * s - s) * m0 + (t * t * t - t) * m1)
    }

    /// d/du of the spline.
    pub fn deriv(&self, u: f64) -> f64 {
        let (i, dx) = self.locate(u);
        let j = (i + 1) % self.n;
        let t = dx / self.h;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.moments[i], self.moments[j]);
        let s = 1.0 - t;
        (y1 - y0) / self.h
            + self.h / 6.0 * ((1.0 - 3.0 * s * s) * m0 + (3.0 * t * t - 1.0) * m1)
    }
}

/// Solves a cyclic constant-coefficient tridiagonal system
/// a x_{i-1} + b x_i + c x_{i+1} = d_i via Sherman-Morrison.
fn solve_cyclic_tridiag(a: f64, b: f64, c: f64, d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n < 3 {
        return Err(Error::Geometry("cyclic system too small".into()));
    }
    let alpha = -b;
    // Modified diagonal: first entry b - alpha, last b - a*c/alpha.
    let mut diag = vec![b; n];
    diag[0] = b - alpha;
    diag[n - 1] = b - a * c / alpha;
    let x1 = solve_tridiag(a, &diag, c, d)?;
    let mut u = vec![0.0; n];
    u[0] = alpha;
    u[n - 1] = c;
    let x2 = solve_tridiag(a, &diag, c, &u)?;
    // v = (1, 0, ..., 0, a/alpha)
    let vx1 = x1[0] + a / alpha * x1[n - 1];
    let vx2 = x2[0] + a / alpha * x2[n - 1];
    let denom = 1.0 + vx2;
    if denom.abs() < 1e-14 {
        return Err(Error::Geometry("singular cyclic tridiagonal system".into()));
    }
    let factor = vx1 / denom;
    Ok((0..n).map(|i| x1[i] - factor * x2[i]).collect())
}

/// Thomas algorithm with constant off-diagonals and a per-row diagonal.
fn solve_tridiag(a: f64, diag: &[f64], c: f64, d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    if diag[0].abs() < 1e-300 {
        return Err(Error::Geometry("singular tridiagonal system".into()));
    }
    cp[0] = c / diag[0];
    dp[0] = d[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - a * cp[i - 1];
        if m.abs() < 1e-300 {
            return Err(Error::Geometry("singular tridiagonal system".into()));
        }
        cp[i] = c / m;
        dp[i] = (d[i] - a * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Closed plane curve u -> (r(u), z(u)), u in [0,1), as a pair of periodic
/// splines, with utilities for arclength reparametrization.
#[derive(Debug, Clone)]
pub struct SplineLoop {
    pub r: PeriodicSpline,
    pub z: PeriodicSpline,
}

impl SplineLoop {
    pub fn fit(points: &[(f64, f64)]) -> Result<Self> {
        let r = PeriodicSpline::fit(points.iter().map(|p| p.0).collect())?;
        let z = PeriodicSpline::fit(points.iter().map(|p| p.1).collect())?;
        Ok(Self { r, z })
    }

    pub fn point(&self, u: f64) -> (f64, f64) {
        (self.r.eval(u), self.z.eval(u))
    }

    pub fn tangent(&self, u: f64) -> (f64, f64) {
        (self.r.deriv(u), self.z.deriv(u))
    }

    fn speed(&self, u: f64) -> f64 {
        let (tr, tz) = self.tangent(u);
        tr.hypot(tz)
    }

    /// Cumulative arclength at m+1 equally spaced parameter values
    /// (0, 1/m, ..., 1), by per-interval Gauss-Legendre.
    pub fn cumulative_arclength(&self, m: usize) -> Vec<f64> {
        // 5-point Gauss nodes on [0,1].
        const GX: [f64; 5] = [
            0.046910077030668,
            0.230765344947158,
            0.5,
            0.769234655052842,
            0.953089922969332,
        ];
        const GW: [f64; 5] = [
            0.118463442528095,
            0.239314335249683,
            0.284444444444444,
            0.239314335249683,
            0.118463442528095,
        ];
        let h = 1.0 / m as f64;
        let mut acc = Vec::with_capacity(m + 1);
        acc.push(0.0);
        let mut total = 0.0;
        for i in 0..m {
            let u0 = i as f64 * h;
            let mut seg = 0.0;
            for k in 0..5 {
                seg += GW[k] * self.speed(u0 + GX[k] * h);
            }
            total += seg * h;
            acc.push(total);
        }
        acc
    }

    /// Resamples the loop at `n` points equally spaced in arclength,
    /// returning the points and the total arclength.
    pub fn resample_by_arclength(&self, n: usize) -> (Vec<(f64, f64)>, f64) {
        let m = (4 * n).max(1024);
        let cum = self.cumulative_arclength(m);
        let total = cum[m];
        let h = 1.0 / m as f64;
        let mut pts = Vec::with_capacity(n);
        for k in 0..n {
            let target = total * k as f64 / n as f64;
            // Binary search on the monotone cumulative table.
            let mut lo = 0usize;
            let mut hi = m;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if cum[mid] <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let ds = cum[hi] - cum[lo];
            let frac = if ds > 0.0 { (target - cum[lo]) / ds } else { 0.0 };
            let mut u = (lo as f64 + frac) * h;
            // Two Newton corrections on s(u) = target.
            for _ in 0..2 {
                let sp = self.speed(u);
                if sp < 1e-12 {
                    break;
                }
                let s_here = cum[lo] + self.arc_in_interval(lo as f64 * h, u);
                u -= (s_here - target) / sp;
                u = u.clamp(lo as f64 * h, hi as f64 * h);
            }
            pts.push(self.point(u));
        }
        (pts, total)
    }

    fn arc_in_interval(&self, u0: f64, u1: f64) -> f64 {
        const GX: [f64; 5] = [
            0.046910077030668,
            0.230765344947158,
            0.5,
            0.769234655052842,
            0.953089922969332,
        ];
        const GW: [f64; 5] = [
            0.118463442528095,
            0.239314335249683,
            0.284444444444444,
            0.239314335249683,
            0.118463442528095,
        ];
        let len = u1 - u0;
        let mut seg = 0.0;
        for k in 0..5 {
            seg += GW[k] * self.speed(u0 + GX[k] * len);
        }
        seg * len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_circle() {
        let n = 256;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (2.0 + t.cos(), t.sin())
            })
            .collect();
        let sl = SplineLoop::fit(&pts).unwrap();
        for k in 0..37 {
            let u = k as f64 / 37.0;
            let (r, z) = sl.point(u);
            let rad = ((r - 2.0).powi(2) + z * z).sqrt();
            assert!((rad - 1.0).abs() < 1e-8, "radius off: {rad}");
        }
    }

    #[test]
    fn arclength_of_circle() {
        let n = 512;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (2.0 + t.cos(), t.sin())
            })
            .collect();
        let sl = SplineLoop::fit(&pts).unwrap();
        let (_, total) = sl.resample_by_arclength(64);
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    }
}

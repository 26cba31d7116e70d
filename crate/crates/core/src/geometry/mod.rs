//! Axisymmetric domains of revolution: the generatrix curve, boundary
//! frames, containment, specular reflection and domain extents.
//!
//! The domain Ω is the solid obtained by rotating the meridian cross-section
//! around the z-axis. The cross-section boundary is a counterclockwise
//! closed C¹ curve (r̃(β), z̃(β)) with β in [0,1] proportional to arclength.
//! Curves touching the axis (r̃(0) = r̃(1) = 0) are handled by mirroring
//! across the axis, which enforces the endpoint slope condition
//! z̃'/r̃' = 0 by construction.

mod polyline;
mod spline;

pub use polyline::{signed_area, BoundaryIndex, NearestHit};
pub use spline::{PeriodicSpline, SplineLoop};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Tolerance on the endpoint slope condition for axis-touching curves.
const AXIS_SLOPE_TOL: f64 = 1e-6;
/// Number of points in the dense arclength resampling of the curve.
const DENSE_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub beta: f64,
    pub r: f64,
    pub z: f64,
}

/// The meridian boundary curve, reparametrized to normalized arclength.
#[derive(Debug, Clone)]
pub struct GeneratrixCurve {
    /// Closed loop in the (r, z) plane; for axis-touching curves this is the
    /// mirrored double loop and the physical half is u in [0, 1/2].
    loop_spline: SplineLoop,
    /// Dense samples of the physical curve at uniform β.
    pub samples: Vec<CurveSample>,
    pub closed: bool,
    pub touches_axis: bool,
    /// Physical (unnormalized) arclength of the curve.
    pub total_arclength: f64,
}

impl GeneratrixCurve {
    /// Builds the curve from ordered samples of the meridian boundary.
    ///
    /// If the first and last samples sit on the axis (r = 0) the curve is
    /// treated as axis-touching; otherwise it must close onto itself.
    /// Orientation is normalized to counterclockwise.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Geometry(format!(
                "need at least 4 curve samples, got {}",
                points.len()
            )));
        }
        let scale = points
            .iter()
            .map(|p| p.0.abs().max(p.1.abs()))
            .fold(0.0f64, f64::max)
            .max(1e-12);
        for (i, &(r, _)) in points.iter().enumerate() {
            if r < -1e-9 * scale {
                return Err(Error::Geometry(format!(
                    "negative radius r = {r} at sample {i}"
                )));
            }
        }
        let axis_tol = 1e-7 * scale;
        let first = points[0];
        let last = *points.last().unwrap();
        let touches_axis = first.0.abs() <= axis_tol && last.0.abs() <= axis_tol;

        let mut pts: Vec<(f64, f64)> = points.to_vec();
        let loop_pts: Vec<(f64, f64)> = if touches_axis {
            // Clamp the axis endpoints and mirror the interior points.
            pts[0].0 = 0.0;
            let n = pts.len();
            pts[n - 1].0 = 0.0;
            let mut doubled = pts.clone();
            for &(r, z) in pts[1..n - 1].iter().rev() {
                doubled.push((-r, z));
            }
            doubled
        } else {
            // Drop a duplicated closing point if present.
            let gap = (first.0 - last.0).hypot(first.1 - last.1);
            if gap <= 1e-9 * scale {
                pts.pop();
            } else if gap > 1e-3 * scale {
                return Err(Error::Geometry(
                    "curve does not close and does not touch the axis".into(),
                ));
            }
            pts
        };

        let mut loop_pts = loop_pts;
        if signed_area(&loop_pts) < 0.0 {
            loop_pts.reverse();
        }

        // Fit, resample by arclength, refit on the uniform samples.
        let rough = SplineLoop::fit(&loop_pts)?;
        let n_dense = if touches_axis { 2 * DENSE_SAMPLES } else { DENSE_SAMPLES };
        let (resampled, loop_len) = rough.resample_by_arclength(n_dense);
        let mut resampled = resampled;
        if touches_axis {
            // Rotate so the loop starts at the axis point of minimal |r| to
            // keep u = 0 pinned on the axis, then re-symmetrize.
            let start = resampled
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .0.abs().partial_cmp(&b.1 .0.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            resampled.rotate_left(start);
            resampled[0].0 = 0.0;
            let n = resampled.len();
            // Enforce exact mirror symmetry of the double loop.
            for i in 1..n / 2 {
                let (rp, zp) = resampled[i];
                let (rm, zm) = resampled[n - i];
                let r_sym = 0.5 * (rp - rm);
                let z_sym = 0.5 * (zp + zm);
                resampled[i] = (r_sym, z_sym);
                resampled[n - i] = (-r_sym, z_sym);
            }
            if n % 2 == 0 {
                resampled[n / 2].0 = 0.0;
            }
        }
        let loop_spline = SplineLoop::fit(&resampled)?;

        let total_arclength = if touches_axis { loop_len / 2.0 } else { loop_len };
        let curve = Self {
            loop_spline,
            samples: Vec::new(),
            closed: true,
            touches_axis,
            total_arclength,
        };
        let samples = (0..=DENSE_SAMPLES)
            .map(|i| {
                let beta = i as f64 / DENSE_SAMPLES as f64;
                let (r, z) = curve.point(beta);
                CurveSample { beta, r: r.max(0.0), z }
            })
            .collect();
        let curve = Self { samples, ..curve };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        for s in &self.samples {
            if s.r < -1e-8 * self.total_arclength {
                return Err(Error::Geometry(format!(
                    "resampled curve has negative radius at beta = {}",
                    s.beta
                )));
            }
        }
        if self.touches_axis {
            for beta in [0.0, 1.0] {
                let (tr, tz) = self.tangent(beta);
                if tr.abs() < 1e-12 || (tz / tr).abs() > AXIS_SLOPE_TOL {
                    return Err(Error::Geometry(format!(
                        "axis slope condition violated at beta = {beta}: \
                         z'/r' = {}",
                        tz / tr
                    )));
                }
            }
        }
        Ok(())
    }

    fn to_u(&self, beta: f64) -> f64 {
        if self.touches_axis {
            0.5 * beta.clamp(0.0, 1.0)
        } else {
            beta.rem_euclid(1.0)
        }
    }

    pub fn point(&self, beta: f64) -> (f64, f64) {
        self.loop_spline.point(self.to_u(beta))
    }

    /// Tangent d(r,z)/dβ (not normalized).
    pub fn tangent(&self, beta: f64) -> (f64, f64) {
        self.loop_spline.tangent(self.to_u(beta))
    }
}

/// Orthonormal frame on the boundary, expressed in the local cylindrical
/// basis (e_r, e_φ, e_z): `e_n` outward normal, `e_tg` meridian tangent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub e_n: [f64; 3],
    pub e_tg: [f64; 3],
    pub e_phi: [f64; 3],
}

/// e_n = (z̃' e_r − r̃' e_z)/√(z̃'²+r̃'²), e_tg = (−r̃' e_r − z̃' e_z)/√(z̃'²+r̃'²).
pub fn boundary_frame(curve: &GeneratrixCurve, beta: f64) -> Result<BoundaryFrame> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Geometry(format!("beta = {beta} outside [0,1]")));
    }
    let (rp, zp) = curve.tangent(beta);
    let norm = rp.hypot(zp);
    if norm < 1e-10 * curve.total_arclength.max(1.0) {
        return Err(Error::Geometry(format!(
            "degenerate tangent at beta = {beta}"
        )));
    }
    Ok(BoundaryFrame {
        e_n: [zp / norm, 0.0, -rp / norm],
        e_tg: [-rp / norm, 0.0, -zp / norm],
        e_phi: [0.0, 1.0, 0.0],
    })
}

/// Specular reflection v* = −v_n e_n + v_tg e_tg + v_φ e_φ of a momentum
/// vector given in cylindrical components (v_r, v_φ, v_z).
pub fn specular_reflect(frame: &BoundaryFrame, v: [f64; 3]) -> [f64; 3] {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let vn = dot(&frame.e_n, &v);
    [
        v[0] - 2.0 * vn * frame.e_n[0],
        v[1] - 2.0 * vn * frame.e_n[1],
        v[2] - 2.0 * vn * frame.e_n[2],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Which branch of the Poincaré bound min is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoincareBranch {
    Rectangle,
    Axial,
}

/// Upper bound on c_P, the square of the Poincaré constant of Ω for
/// axisymmetric functions with homogeneous Dirichlet data.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoincareBound {
    /// π⁻² b L₁²L₂²/(L₁²+L₂²), corrected by 1/inf_Ω r when inf r < 1
    /// (infinite for axis-touching domains where that branch degenerates).
    pub branch_rectangle: f64,
    /// L₁ branch.
    pub branch_axial: f64,
    pub value: f64,
    pub active: PoincareBranch,
}

/// Plain arithmetic form of the Poincaré bound given the extents.
///
/// `inf_r` is the infimum of r over Ω; the rectangle branch requires
/// inf r > 0 and acquires a 1/inf r factor when inf r < 1.
pub fn poincare_bound_from_extents(b: f64, l1: f64, l2: f64, inf_r: f64) -> PoincareBound {
    let pi2 = std::f64::consts::PI.powi(2);
    let rect_raw = b * l1 * l1 * l2 * l2 / (pi2 * (l1 * l1 + l2 * l2));
    let branch_rectangle = if inf_r <= 0.0 {
        f64::INFINITY
    } else {
        rect_raw * (1.0_f64).max(1.0 / inf_r)
    };
    let branch_axial = l1;
    let (value, active) = if branch_rectangle <= branch_axial {
        (branch_rectangle, PoincareBranch::Rectangle)
    } else {
        (branch_axial, PoincareBranch::Axial)
    };
    PoincareBound { branch_rectangle, branch_axial, value, active }
}

/// An axisymmetric domain of revolution with cached extents, Poincaré
/// bound and a spatial index of the boundary polygon.
#[derive(Debug, Clone)]
pub struct Domain {
    pub curve: GeneratrixCurve,
    pub index: Arc<BoundaryIndex>,
    /// b = sup_Ω r.
    pub b: f64,
    /// Axial extent sup z − inf z.
    pub l1: f64,
    /// Radial extent sup r − inf r.
    pub l2: f64,
    /// inf_Ω r (0 for axis-touching domains).
    pub inf_r: f64,
    pub z_range: (f64, f64),
    pub poincare: PoincareBound,
    /// Half-width of the containment boundary band.
    pub boundary_band: f64,
}

impl Domain {
    pub fn new(curve: GeneratrixCurve) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = curve
            .samples
            .iter()
            .take(curve.samples.len() - 1)
            .map(|s| (s.r, s.z))
            .collect();
        let mut betas: Vec<f64> = curve
            .samples
            .iter()
            .take(curve.samples.len() - 1)
            .map(|s| s.beta)
            .collect();
        if curve.touches_axis {
            // Close the polygon along the axis segment (r = 0).
            let z_first = curve.samples[0].z;
            let z_last = curve.samples.last().unwrap().z;
            let n_axis = 64;
            for k in 0..n_axis {
                let t = (k + 1) as f64 / (n_axis + 1) as f64;
                pts.push((0.0, z_last + t * (z_first - z_last)));
                betas.push(1.0);
            }
        }
        let index = BoundaryIndex::new(pts, betas);

        let mut b = f64::NEG_INFINITY;
        let mut rlo = f64::INFINITY;
        let mut zlo = f64::INFINITY;
        let mut zhi = f64::NEG_INFINITY;
        for s in &curve.samples {
            b = b.max(s.r);
            rlo = rlo.min(s.r);
            zlo = zlo.min(s.z);
            zhi = zhi.max(s.z);
        }
        let inf_r = if curve.touches_axis { 0.0 } else { rlo };
        let l1 = zhi - zlo;
        let l2 = b - inf_r;
        if b <= 0.0 || l1 <= 0.0 || l2 <= 0.0 {
            return Err(Error::Geometry("degenerate domain extents".into()));
        }
        let poincare = poincare_bound_from_extents(b, l1, l2, inf_r);
        let boundary_band = 1e-9 * index.diameter;
        Ok(Self {
            curve,
            index: Arc::new(index),
            b,
            l1,
            l2,
            inf_r,
            z_range: (zlo, zhi),
            poincare,
            boundary_band,
        })
    }

    /// Containment query for a meridian point (r, z), r ≥ 0.
    pub fn contains(&self, r: f64, z: f64) -> Containment {
        if r < 0.0 {
            return Containment::Outside;
        }
        let level = self.index.signed_level((r, z));
        if level.abs() <= self.boundary_band {
            return Containment::Boundary;
        }
        if self.index.winding_number((r, z)) != 0 {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Signed distance to the boundary: negative inside.
    pub fn signed_level(&self, r: f64, z: f64) -> f64 {
        if self.curve.touches_axis && r < 0.0 {
            // Mirror symmetry across the axis.
            return self.index.signed_level((-r, z));
        }
        self.index.signed_level((r, z))
    }

    /// (b, L1, L2).
    pub fn extents(&self) -> (f64, f64, f64) {
        (self.b, self.l1, self.l2)
    }

    /// Torus with major radius `big_r` and circular cross-section radius `a`.
    pub fn torus(big_r: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || big_r <= a {
            return Err(Error::Geometry(format!(
                "torus needs 0 < a < R, got R = {big_r}, a = {a}"
            )));
        }
        let n = 1024;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (big_r + a * t.cos(), a * t.sin())
            })
            .collect();
        Self::new(GeneratrixCurve::from_points(&pts)?)
    }

    /// Solid ball of radius `a` centered on the axis.
    pub fn ball(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Geometry(format!("ball radius must be positive, got {a}")));
        }
        let n = 1024;
        // Half-meridian from the south pole to the north pole.
        let pts: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / n as f64;
                (a * t.sin(), -a * t.cos())
            })
            .collect();
        Self::new(GeneratrixCurve::from_points(&pts)?)
    }

    /// Elliptical cross-section centered at (big_r, 0) with radial half-axis
    /// `ar` and axial half-axis `az`.
    pub fn ellipse(big_r: f64, ar: f64, az: f64) -> Result<Self> {
        if !(ar > 0.0) || !(az > 0.0) || big_r <= ar {
            return Err(Error::Geometry(format!(
                "ellipse needs 0 < ar < R and az > 0, got R = {big_r}, ar = {ar}, az = {az}"
            )));
        }
        let n = 1024;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (big_r + ar * t.cos(), az * t.sin())
            })
            .collect();
        Self::new(GeneratrixCurve::from_points(&pts)?)
    }

    /// Curve from CSV text with a `beta,r,z` header. Samples are sorted by
    /// beta; the beta column fixes the ordering only (the curve is
    /// re-parametrized to arclength).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty curve CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
        if cols != ["beta", "r", "z"] {
            return Err(Error::Config(format!(
                "curve CSV header must be `beta,r,z`, got `{header}`"
            )));
        }
        for (ln, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Config(format!(
                    "curve CSV line {} has {} fields",
                    ln + 2,
                    f.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("curve CSV line {}: {e}", ln + 2)))
            };
            rows.push((parse(f[0])?, parse(f[1])?, parse(f[2])?));
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let pts: Vec<(f64, f64)> = rows.iter().map(|&(_, r, z)| (r, z)).collect();
        Self::new(GeneratrixCurve::from_points(&pts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn torus_frame_at_outer_equator() {
        let d = Domain::torus(2.0, 1.0).unwrap();
        // Find beta of the point (3, 0).
        let hit = d.index.nearest((3.0, 0.0));
        let f = boundary_frame(&d.curve, hit.beta).unwrap();
        assert_abs_diff_eq!(f.e_n[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.e_n[2], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.e_tg[2], -1.0, epsilon = 1e-6);
    }

    #[test]
    fn frame_is_orthonormal_everywhere() {
        let d = Domain::torus(2.0, 1.0).unwrap();
        for k in 0..97 {
            let beta = k as f64 / 97.0;
            let f = boundary_frame(&d.curve, beta).unwrap();
            let dot = |a: &[f64; 3], b: &[f64; 3]| {
                a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
            };
            assert_abs_diff_eq!(dot(&f.e_n, &f.e_n), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(dot(&f.e_tg, &f.e_tg), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(dot(&f.e_n, &f.e_tg), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(dot(&f.e_n, &f.e_phi), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ball_frame_at_equator() {
        let d = Domain::ball(1.0).unwrap();
        assert!(d.curve.touches_axis);
        let hit = d.index.nearest((1.0, 0.0));
        let f = boundary_frame(&d.curve, hit.beta).unwrap();
        assert_abs_diff_eq!(f.e_n[0], 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(f.e_tg[2], -1.0, epsilon = 1e-5);
    }

    #[test]
    fn reflection_flips_normal_component() {
        let f = BoundaryFrame {
            e_n: [1.0, 0.0, 0.0],
            e_tg: [0.0, 0.0, -1.0],
            e_phi: [0.0, 1.0, 0.0],
        };
        let v = specular_reflect(&f, [1.0, 2.0, 3.0]);
        assert_eq!(v, [-1.0, 2.0, 3.0]);
        // Grazing momentum is unchanged.
        let g = specular_reflect(&f, [0.0, 2.0, 3.0]);
        assert_eq!(g, [0.0, 2.0, 3.0]);
    }

    #[test]
    fn reflection_householder_oracle() {
        // 45-degree normal in the (r, z) plane.
        let s = 1.0 / 2.0_f64.sqrt();
        let f = BoundaryFrame {
            e_n: [s, 0.0, s],
            e_tg: [-s, 0.0, s],
            e_phi: [0.0, 1.0, 0.0],
        };
        let v = [1.0, 0.0, 0.0];
        let got = specular_reflect(&f, v);
        // Householder v − 2 (v·n) n computed independently.
        let vn = v[0] * f.e_n[0] + v[1] * f.e_n[1] + v[2] * f.e_n[2];
        let want = [
            v[0] - 2.0 * vn * f.e_n[0],
            v[1] - 2.0 * vn * f.e_n[1],
            v[2] - 2.0 * vn * f.e_n[2],
        ];
        for i in 0..3 {
            assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn torus_containment() {
        let d = Domain::torus(2.0, 1.0).unwrap();
        assert_eq!(d.contains(2.0, 0.0), Containment::Inside);
        assert_eq!(d.contains(0.5, 0.0), Containment::Outside);
        // A point on the sampled curve itself.
        let s = d.curve.samples[17];
        assert_eq!(d.contains(s.r, s.z), Containment::Boundary);
    }

    #[test]
    fn extents_examples() {
        let t = Domain::torus(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(t.b, 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(t.l1, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(t.l2, 2.0, epsilon = 1e-6);

        let b = Domain::ball(1.0).unwrap();
        assert_abs_diff_eq!(b.b, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.l1, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.l2, 1.0, epsilon = 1e-6);

        let e = Domain::ellipse(2.0, 0.5, 1.5).unwrap();
        assert_abs_diff_eq!(e.b, 2.5, epsilon = 1e-6);
        assert_abs_diff_eq!(e.l1, 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(e.l2, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn poincare_example_value() {
        // L1 = L2 = 1, b = 1, inf r = 1: min{1/(2π²), 1} = 1/(2π²).
        let p = poincare_bound_from_extents(1.0, 1.0, 1.0, 1.0);
        assert_abs_diff_eq!(p.value, 1.0 / (2.0 * std::f64::consts::PI.powi(2)), epsilon = 1e-12);
        assert_eq!(p.active, PoincareBranch::Rectangle);
        // Large L1 switches nothing here; the rectangle branch saturates.
        let p2 = poincare_bound_from_extents(1.0, 1e6, 1.0, 1.0);
        assert!(p2.branch_rectangle < p2.branch_axial);
        // Monotonicity in each extent.
        let base = poincare_bound_from_extents(1.0, 1.0, 1.0, 1.0).value;
        for scale in [1.1, 2.0, 5.0] {
            assert!(poincare_bound_from_extents(scale, 1.0, 1.0, 1.0).value >= base);
            assert!(poincare_bound_from_extents(1.0, scale, 1.0, 1.0).value >= base);
            assert!(poincare_bound_from_extents(1.0, 1.0, scale, 1.0).value >= base);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let d0 = Domain::torus(2.0, 0.5).unwrap();
        let mut csv = String::from("beta,r,z\n");
        for s in d0.curve.samples.iter().step_by(16) {
            csv.push_str(&format!("{},{},{}\n", s.beta, s.r, s.z));
        }
        let d1 = Domain::from_csv(&csv).unwrap();
        assert_abs_diff_eq!(d1.b, 2.5, epsilon = 1e-4);
        assert_eq!(d1.contains(2.0, 0.0), Containment::Inside);
    }
}

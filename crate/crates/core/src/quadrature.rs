//! Velocity-space quadrature: tensor Gauss-Legendre on [−v_max, v_max]³ and
//! radial reductions for integrands depending on |v| alone.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            pp = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// One quadrature node in momentum space with its precomputed kinematics.
#[derive(Debug, Clone, Copy)]
pub struct VelNode {
    pub v: [f64; 3],
    pub w: f64,
    /// ⟨v⟩ = √(1 + |v|²).
    pub gamma: f64,
    /// v̂_φ = v_φ/⟨v⟩.
    pub vhat_phi: f64,
}

/// Tensor Gauss-Legendre quadrature over [−v_max, v_max]³ in (v_r, v_φ, v_z).
///
/// The node set is symmetric under v → −v and under the meridian flip
/// (v_r, v_z) → (−v_r, −v_z), so odd-integrand cancellations hold exactly.
#[derive(Debug, Clone)]
pub struct VelocityQuadrature {
    pub nodes: Vec<VelNode>,
    pub v_max: f64,
    pub n_per_axis: usize,
}

impl VelocityQuadrature {
    pub fn new(v_max: f64, n_per_axis: usize) -> Result<Self> {
        if !(v_max > 0.0) || n_per_axis < 2 {
            return Err(Error::Config(format!(
                "bad velocity quadrature: v_max = {v_max}, n = {n_per_axis}"
            )));
        }
        let (x, w) = gauss_legendre(n_per_axis);
        let scale = v_max;
        let mut nodes = Vec::with_capacity(n_per_axis.pow(3));
        for (ir, &xr) in x.iter().enumerate() {
            for (ip, &xp) in x.iter().enumerate() {
                for (iz, &xz) in x.iter().enumerate() {
                    let v = [xr * scale, xp * scale, xz * scale];
                    let weight = w[ir] * w[ip] * w[iz] * scale.powi(3);
                    let gamma = (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    nodes.push(VelNode { v, w: weight, gamma, vhat_phi: v[1] / gamma });
                }
            }
        }
        Ok(Self { nodes, v_max, n_per_axis })
    }

    /// Sum of weights (the cube volume), useful as a sanity check.
    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.w).sum()
    }

    /// Relative size of the outermost node shell of |f|, used as the
    /// truncation-tail estimate for a decaying integrand.
    pub fn tail_estimate(&self, f: impl Fn(&VelNode) -> f64) -> f64 {
        let edge = self.v_max * (1.0 - 2.0 / self.n_per_axis as f64);
        let mut tail = 0.0;
        let mut bulk = 0.0;
        for n in &self.nodes {
            let a = n.w * f(n).abs();
            let outer = n.v.iter().any(|c| c.abs() > edge);
            if outer {
                tail += a;
            }
            bulk += a;
        }
        if bulk > 0.0 {
            tail / bulk
        } else {
            0.0
        }
    }
}

/// Chooses v_max so the γ-decay tail ∫_{|v|>v_max} (1+⟨v⟩^γ)⁻¹ dv is below
/// `tail_rel` of the whole integral, capped at `v_cap`. Returns the cutoff
/// and whether the cap was hit (an accuracy warning condition).
pub fn select_v_max(gamma: f64, tail_rel: f64, v_cap: f64) -> (f64, bool) {
    let total = radial_integral(|u| 1.0 / (1.0 + u.powf(gamma)), 1.0);
    let mut v = 4.0;
    while v < v_cap {
        // Tail of ∫ 4π s²/(1+⟨s⟩^γ) ds beyond v: integrand ≈ 4π s^{2−γ}.
        let tail = 4.0 * std::f64::consts::PI * v.powf(3.0 - gamma) / (gamma - 3.0);
        if tail <= tail_rel * total {
            return (v, false);
        }
        v *= 1.3;
    }
    (v_cap, true)
}

/// ∫_{ℝ³} F(⟨v⟩) dv = 4π ∫₁^∞ F(u) u √(u²−1) du by composite
/// Gauss-Legendre on log-spaced panels. `weight_power`: 0 for the plain
/// integral, 1 for ∫ |v_φ| F dv = 2π ∫ s³ F(⟨s⟩)... (see
/// [`radial_component_integral`]).
pub fn radial_integral(f: impl Fn(f64) -> f64, _scale_hint: f64) -> f64 {
    // Panels on u ∈ [1, U]: integrands here decay at least like u^{−γ+2}
    // with γ > 4, so U = 1e6 with log panels is far below 1e-10 relative.
    composite_log_panels(1.0, 1.0e6, 160, 16, |u| {
        f(u) * u * (u * u - 1.0).max(0.0).sqrt()
    }) * 4.0
        * std::f64::consts::PI
}

/// ∫_{ℝ³} |v_j| F(⟨v⟩) dv for a single Cartesian component v_j: the angular
/// average of |v_j| over the sphere of radius s is s/2, giving
/// 2π ∫₀^∞ s³ F(√(1+s²)) ds = 2π ∫₁^∞ (u²−1) u F(u)·... with s ds = u du:
/// s³ ds = s² · s ds = (u²−1) u du.
pub fn radial_component_integral(f: impl Fn(f64) -> f64, _scale_hint: f64) -> f64 {
    composite_log_panels(1.0, 1.0e6, 160, 16, |u| f(u) * u * (u * u - 1.0).max(0.0))
        * 2.0
        * std::f64::consts::PI
}

fn composite_log_panels(
    a: f64,
    b: f64,
    n_panels: usize,
    n_gauss: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let (x, w) = gauss_legendre(n_gauss);
    let la = a.ln();
    let lb = b.ln();
    let mut total = 0.0;
    for p in 0..n_panels {
        let u0 = (la + (lb - la) * p as f64 / n_panels as f64).exp();
        let u1 = (la + (lb - la) * (p + 1) as f64 / n_panels as f64).exp();
        let mid = 0.5 * (u0 + u1);
        let half = 0.5 * (u1 - u0);
        let mut acc = 0.0;
        for k in 0..n_gauss {
            acc += w[k] * f(mid + half * x[k]);
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int_x6: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(6)).sum();
        assert_abs_diff_eq!(int_x6, 2.0 / 7.0, epsilon = 1e-14);
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn velocity_quadrature_symmetry_and_volume() {
        let q = VelocityQuadrature::new(5.0, 8).unwrap();
        assert_abs_diff_eq!(q.total_weight(), 1000.0, epsilon = 1e-9);
        // Odd integrands cancel exactly.
        let odd: f64 = q.nodes.iter().map(|n| n.w * n.v[1] * (-n.gamma).exp()).sum();
        assert!(odd.abs() < 1e-14);
        let odd_rz: f64 = q
            .nodes
            .iter()
            .map(|n| n.w * n.v[0] * n.v[2] * (-n.gamma).exp())
            .sum();
        assert!(odd_rz.abs() < 1e-14);
    }

    #[test]
    fn gaussian_against_radial_reduction() {
        // ∫ exp(1−⟨v⟩) dv both ways.
        let q = VelocityQuadrature::new(18.0, 48).unwrap();
        let tensor: f64 = q.nodes.iter().map(|n| n.w * (1.0 - n.gamma).exp()).sum();
        let radial = radial_integral(|u| (1.0 - u).exp(), 1.0);
        assert_abs_diff_eq!(tensor / radial, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn component_moment_reduction() {
        let q = VelocityQuadrature::new(18.0, 48).unwrap();
        let tensor: f64 = q
            .nodes
            .iter()
            .map(|n| n.w * n.v[1].abs() * (1.0 - n.gamma).exp())
            .sum();
        let radial = radial_component_integral(|u| (1.0 - u).exp(), 1.0);
        assert_abs_diff_eq!(tensor / radial, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn v_max_selection_tracks_gamma() {
        let (v5, capped5) = select_v_max(5.0, 1e-8, 1e5);
        assert!(!capped5 && v5 > 50.0);
        let (v8, _) = select_v_max(8.0, 1e-8, 1e5);
        assert!(v8 < v5);
    }
}

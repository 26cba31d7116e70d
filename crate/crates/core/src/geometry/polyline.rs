//! Dense polygonal representation of the meridian boundary with fast
//! nearest-segment and winding-number queries.
//!
//! The polygon is oriented counterclockwise in the (r, z) plane, so the
//! outward normal of a segment with direction (dr, dz) is (dz, -dr)/|d|.

#[derive(Debug, Clone)]
pub struct BoundaryIndex {
    /// Polygon vertices (closed implicitly: last connects to first).
    pts: Vec<(f64, f64)>,
    /// Curve parameter of each vertex.
    betas: Vec<f64>,
    rmin: f64,
    zmin: f64,
    cell: f64,
    ncr: usize,
    ncz: usize,
    buckets: Vec<Vec<u32>>,
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NearestHit {
    pub dist: f64,
    pub point: (f64, f64),
    /// Interpolated curve parameter at the foot point.
    pub beta: f64,
    /// Outward normal of the supporting segment.
    pub normal: (f64, f64),
}

impl BoundaryIndex {
    pub fn new(pts: Vec<(f64, f64)>, betas: Vec<f64>) -> Self {
        assert_eq!(pts.len(), betas.len());
        let (mut rlo, mut rhi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut zlo, mut zhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(r, z) in &pts {
            rlo = rlo.min(r);
            rhi = rhi.max(r);
            zlo = zlo.min(z);
            zhi = zhi.max(z);
        }
        let diameter = (rhi - rlo).hypot(zhi - zlo);
        let n = pts.len();
        // Cell comparable to a few segment lengths keeps buckets short.
        let perim_guess: f64 = (0..n)
            .map(|i| {
                let a = pts[i];
                let b = pts[(i + 1) % n];
                (b.0 - a.0).hypot(b.1 - a.1)
            })
            .sum();
        let cell = (4.0 * perim_guess / n as f64).max(diameter / 256.0);
        let pad = cell;
        let rmin = rlo - pad;
        let zmin = zlo - pad;
        let ncr = (((rhi + pad) - rmin) / cell).ceil() as usize + 1;
        let ncz = (((zhi + pad) - zmin) / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); ncr * ncz];
        for s in 0..n {
            let a = pts[s];
            let b = pts[(s + 1) % n];
            let (slo_r, shi_r) = (a.0.min(b.0), a.0.max(b.0));
            let (slo_z, shi_z) = (a.1.min(b.1), a.1.max(b.1));
            let i0 = (((slo_r - cell) - rmin) / cell).floor().max(0.0) as usize;
            let i1 = ((((shi_r + cell) - rmin) / cell).floor() as usize).min(ncr - 1);
            let j0 = (((slo_z - cell) - zmin) / cell).floor().max(0.0) as usize;
            let j1 = ((((shi_z + cell) - zmin) / cell).floor() as usize).min(ncz - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * ncr + i].push(s as u32);
                }
            }
        }
        Self { pts, betas, rmin, zmin, cell, ncr, ncz, buckets, diameter }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.pts
    }

    fn segment(&self, s: usize) -> ((f64, f64), (f64, f64)) {
        let n = self.pts.len();
        (self.pts[s], self.pts[(s + 1) % n])
    }

    fn consider(&self, s: usize, p: (f64, f64), best: &mut (f64, usize, f64)) {
        let (a, b) = self.segment(s);
        let (dr, dz) = (b.0 - a.0, b.1 - a.1);
        let len2 = dr * dr + dz * dz;
        let t = if len2 > 0.0 {
            (((p.0 - a.0) * dr + (p.1 - a.1) * dz) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let cp = (a.0 + t * dr, a.1 + t * dz);
        let d2 = (p.0 - cp.0).powi(2) + (p.1 - cp.1).powi(2);
        if d2 < best.0 {
            *best = (d2, s, t);
        }
    }

    /// Nearest point on the polygon via ring search over the bucket grid.
    pub fn nearest(&self, p: (f64, f64)) -> NearestHit {
        let ci = (((p.0 - self.rmin) / self.cell).floor() as i64)
            .clamp(0, self.ncr as i64 - 1) as usize;
        let cj = (((p.1 - self.zmin) / self.cell).floor() as i64)
            .clamp(0, self.ncz as i64 - 1) as usize;
        let mut best = (f64::INFINITY, usize::MAX, 0.0);
        let max_ring = self.ncr.max(self.ncz);
        for ring in 0..=max_ring {
            let i0 = ci.saturating_sub(ring);
            let i1 = (ci + ring).min(self.ncr - 1);
            let j0 = cj.saturating_sub(ring);
            let j1 = (cj + ring).min(self.ncz - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    // Only the ring shell.
                    let on_shell = ring == 0
                        || i == i0 && ci >= ring
                        || i == i1 && ci + ring < self.ncr
                        || j == j0 && cj >= ring
                        || j == j1 && cj + ring < self.ncz;
                    let edge = i == i0 || i == i1 || j == j0 || j == j1;
                    if !(on_shell && edge) && ring > 0 {
                        continue;
                    }
                    for &s in &self.buckets[j * self.ncr + i] {
                        self.consider(s as usize, p, &mut best);
                    }
                }
            }
            if best.0.is_finite() {
                // Once a hit exists, one extra ring guarantees optimality.
                let safe = (ring as f64 - 1.0).max(0.0) * self.cell;
                if best.0.sqrt() <= safe || ring == max_ring {
                    break;
                }
            }
        }
        let (d2, s, t) = best;
        let (a, b) = self.segment(s);
        let (dr, dz) = (b.0 - a.0, b.1 - a.1);
        let len = dr.hypot(dz).max(1e-300);
        let n = self.pts.len();
        let beta_a = self.betas[s];
        let mut beta_b = self.betas[(s + 1) % n];
        if beta_b < beta_a {
            beta_b += 1.0;
        }
        NearestHit {
            dist: d2.sqrt(),
            point: (a.0 + t * dr, a.1 + t * dz),
            beta: (beta_a + t * (beta_b - beta_a)).rem_euclid(1.0),
            normal: (dz / len, -dr / len),
        }
    }

    /// Signed level function: negative inside, positive outside, magnitude
    /// equal to the distance to the polygon. Sign from the outward normal of
    /// the nearest segment (valid for densely sampled C^1 curves).
    pub fn signed_level(&self, p: (f64, f64)) -> f64 {
        let hit = self.nearest(p);
        let s = (p.0 - hit.point.0) * hit.normal.0 + (p.1 - hit.point.1) * hit.normal.1;
        if s >= 0.0 {
            hit.dist
        } else {
            -hit.dist
        }
    }

    /// Winding number of the closed polygon around `p` (1 inside for a
    /// counterclockwise loop, 0 outside).
    pub fn winding_number(&self, p: (f64, f64)) -> i32 {
        let n = self.pts.len();
        let mut wn = 0i32;
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            if a.1 <= p.1 {
                if b.1 > p.1 && cross(a, b, p) > 0.0 {
                    wn += 1;
                }
            } else if b.1 <= p.1 && cross(a, b, p) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }
}

fn cross(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1)
}

/// Signed area of a closed polygon (positive for counterclockwise).
pub fn signed_area(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.0 * b.1 - b.0 * a.1;
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> BoundaryIndex {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (2.0 + t.cos(), t.sin())
            })
            .collect();
        let betas: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        BoundaryIndex::new(pts, betas)
    }

    #[test]
    fn winding_and_level() {
        let idx = circle(512);
        assert_eq!(idx.winding_number((2.0, 0.0)), 1);
        assert_eq!(idx.winding_number((0.5, 0.0)), 0);
        assert!(idx.signed_level((2.0, 0.0)) < -0.99);
        assert!(idx.signed_level((4.0, 0.0)) > 0.99);
        let lv = idx.signed_level((2.0 + 0.999, 0.0));
        assert!((lv + 0.001).abs() < 1e-4, "level near boundary: {lv}");
    }

    #[test]
    fn nearest_matches_geometry() {
        let idx = circle(1024);
        let hit = idx.nearest((3.5, 0.0));
        assert!((hit.dist - 0.5).abs() < 1e-4);
        assert!((hit.point.0 - 3.0).abs() < 1e-4);
        assert!((hit.normal.0 - 1.0).abs() < 1e-3);
    }
}

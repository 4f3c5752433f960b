//! Module grid geometry, the Gaussian module kernel and spot shapes.

use crate::error::{Error, Result};

/// Placement of an m×m module grid on a raster, `a` pixels per module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleGrid {
    pub a: u32,
    pub m: usize,
    /// Pixel offset of module (0, 0).
    pub origin: (u32, u32),
}

impl ModuleGrid {
    pub fn new(a: u32, m: usize) -> Result<Self> {
        Self::with_origin(a, m, (0, 0))
    }

    pub fn with_origin(a: u32, m: usize, origin: (u32, u32)) -> Result<Self> {
        if a < 3 || a.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "module size must be odd and at least 3, got {a}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("empty module grid".into()));
        }
        Ok(Self { a, m, origin })
    }

    /// Pixel side of the module area, m·a.
    pub fn side(&self) -> u32 {
        self.m as u32 * self.a
    }

    pub fn half(&self) -> u32 {
        (self.a - 1) / 2
    }

    /// Centre pixel of module `idx` (row-major).
    pub fn center(&self, idx: usize) -> (u32, u32) {
        let (row, col) = (idx / self.m, idx % self.m);
        (
            self.origin.0 + col as u32 * self.a + self.half(),
            self.origin.1 + row as u32 * self.a + self.half(),
        )
    }

    /// Same grid with the origin moved to (0, 0).
    pub fn at_origin(&self) -> Self {
        Self {
            origin: (0, 0),
            ..*self
        }
    }

    /// Module index containing pixel (x, y), if any.
    pub fn module_at(&self, x: u32, y: u32) -> Option<usize> {
        let (ox, oy) = self.origin;
        if x < ox || y < oy {
            return None;
        }
        let (col, row) = (((x - ox) / self.a) as usize, ((y - oy) / self.a) as usize);
        (col < self.m && row < self.m).then_some(row * self.m + col)
    }

    /// ⌊a/4⌋
    pub fn default_spot_radius(&self) -> u32 {
        self.a / 4
    }

    pub fn check_radius(&self, r: u32) -> Result<()> {
        if 2 * r > self.a {
            Err(Error::InvalidParameter(format!(
                "spot radius {r} exceeds half the module size {}",
                self.a
            )))
        } else {
            Ok(())
        }
    }
}

/// Normalised Gaussian weights over one a×a module, σ = (a − 1)/6.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModuleKernel {
    a: u32,
    sigma: f64,
    weights: Vec<f64>,
}

impl GaussianModuleKernel {
    pub fn new(a: u32) -> Result<Self> {
        if a < 3 || a.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel side must be odd and at least 3, got {a}"
            )));
        }
        let sigma = (a - 1) as f64 / 6.0;
        let h = ((a - 1) / 2) as i32;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
        let mut weights = Vec::with_capacity((a * a) as usize);
        for j in -h..=h {
            for i in -h..=h {
                let d2 = (i * i + j * j) as f64;
                weights.push(norm * (-d2 / (2.0 * sigma * sigma)).exp());
            }
        }
        // The continuous density loses mass outside the module; renormalise.
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { a, sigma, weights })
    }

    pub fn side(&self) -> u32 {
        self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Weight at offset (i, j) from the module centre, |i|, |j| ≤ (a−1)/2.
    #[inline]
    pub fn weight(&self, i: i32, j: i32) -> f64 {
        let h = ((self.a - 1) / 2) as i32;
        self.weights[((j + h) * self.a as i32 + (i + h)) as usize]
    }

    /// Row-major weights, top-left first.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterates (i, j, weight) over the module.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        let h = ((self.a - 1) / 2) as i32;
        let a = self.a as i32;
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, &w)| (k as i32 % a - h, k as i32 / a - h, w))
    }
}

/// Offsets (i, j) of a hard disc: i² + j² ≤ r².
pub fn disc_offsets(r: u32) -> Vec<(i32, i32)> {
    let r = r as i32;
    let mut out = Vec::new();
    for j in -r..=r {
        for i in -r..=r {
            if i * i + j * j <= r * r {
                out.push((i, j));
            }
        }
    }
    out
}

/// Offsets of the annulus (r + ½)² ≤ i² + j² < (r + 3⁄2)² around a spot.
pub fn ring_offsets(r: u32) -> Vec<(i32, i32)> {
    let inner = (r as f64 + 0.5).powi(2);
    let outer = (r as f64 + 1.5).powi(2);
    let ext = r as i32 + 2;
    let mut out = Vec::new();
    for j in -ext..=ext {
        for i in -ext..=ext {
            let d2 = (i * i + j * j) as f64;
            if d2 >= inner && d2 < outer {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sums_to_one_for_odd_sizes() {
        for a in (5..=21).step_by(2) {
            let k = GaussianModuleKernel::new(a).unwrap();
            let total: f64 = k.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "a={a}");
            assert!((k.sigma() - (a - 1) as f64 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_is_radially_symmetric() {
        let k = GaussianModuleKernel::new(13).unwrap();
        for (i, j, w) in k.iter() {
            assert!((k.weight(-i, j) - w).abs() < 1e-15);
            assert!((k.weight(j, i) - w).abs() < 1e-15);
            assert!(w <= k.weight(0, 0));
        }
    }

    #[test]
    fn even_or_tiny_sizes_rejected() {
        assert!(GaussianModuleKernel::new(12).is_err());
        assert!(GaussianModuleKernel::new(1).is_err());
        assert!(ModuleGrid::new(8, 37).is_err());
    }

    #[test]
    fn disc_lattice_counts() {
        // Enumerated by hand over the 7×7 candidate square for r = 3.
        assert_eq!(disc_offsets(3).len(), 29);
        assert_eq!(disc_offsets(0), vec![(0, 0)]);
        assert_eq!(disc_offsets(1).len(), 5);
    }

    #[test]
    fn ring_is_disjoint_from_disc() {
        for r in 0..6 {
            let disc = disc_offsets(r);
            let ring = ring_offsets(r);
            assert!(!ring.is_empty());
            assert!(ring.iter().all(|p| !disc.contains(p)));
        }
    }

    #[test]
    fn centers_and_lookup() {
        let g = ModuleGrid::with_origin(13, 37, (52, 52)).unwrap();
        assert_eq!(g.side(), 481);
        assert_eq!(g.center(0), (58, 58));
        assert_eq!(g.center(37 + 2), (52 + 26 + 6, 52 + 13 + 6));
        assert_eq!(g.module_at(58, 58), Some(0));
        assert_eq!(g.module_at(10, 58), None);
        assert_eq!(g.module_at(52 + 481, 60), None);
        assert_eq!(g.default_spot_radius(), 3);
        assert!(g.check_radius(6).is_ok());
        assert!(g.check_radius(7).is_err());
    }
}

//! Labeled synthetic point clouds.
//!
//! Every sampler is a pure function of its parameters and a `u64` seed. The
//! generator is [`ChaCha8Rng`], whose stream is fixed across platforms, so a
//! `(parameters, seed)` pair always reproduces the same cloud bit for bit.
//!
//! All three shape classes live in R³; circle samples lie in the `z = 0`
//! plane.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seedable generator used by every sampler in the crate.
pub type SeedRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A finite point set in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    pub label: Option<String>,
    pub seed: Option<u64>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::arg("point cloud must contain at least one point"))?;
        if dim == 0 {
            return Err(Error::arg("points must have dimension >= 1"));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::input(format!(
                    "point {i} has dimension {} but expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::input(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords, label: None, seed: None })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::arg("flat coordinates must hold a positive whole number of points"));
        }
        Ok(Self { dim, coords, label: None, seed: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("sample count must be >= 1"));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::arg(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Point on the circle of the given radius at `angle`, embedded at `z = 0`.
pub fn circle_point(radius: f64, angle: f64) -> [f64; 3] {
    [radius * angle.cos(), radius * angle.sin(), 0.0]
}

/// Point on the torus with major radius `big_r` and tube radius `small_r`.
/// `u` is the angle around the tube, `v` the angle around the z-axis.
pub fn torus_point(big_r: f64, small_r: f64, u: f64, v: f64) -> [f64; 3] {
    let ring = big_r + small_r * u.cos();
    [ring * v.cos(), ring * v.sin(), small_r * u.sin()]
}

fn cloud_from_rows(rows: Vec<[f64; 3]>, label: &str, seed: u64) -> PointCloud {
    let coords = rows.into_iter().flatten().collect();
    PointCloud { dim: 3, coords, label: Some(label.to_string()), seed: Some(seed) }
}

/// `n` points uniform in angle on a circle centered at the origin.
pub fn sample_circle(n: usize, radius: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("radius", radius)?;
    let mut rng = rng_from_seed(seed);
    let rows = (0..n).map(|_| circle_point(radius, rng.gen_range(0.0..TAU))).collect();
    Ok(cloud_from_rows(rows, "circle", seed))
}

/// `n` points uniform on the 2-sphere, drawn as normalized Gaussian vectors.
pub fn sample_sphere(n: usize, radius: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("radius", radius)?;
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let g: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        // A zero draw has no direction; redraw.
        if norm < 1e-12 {
            continue;
        }
        rows.push(g.map(|c| radius * c / norm));
    }
    Ok(cloud_from_rows(rows, "sphere", seed))
}

/// `n` points uniform with respect to surface area on a torus of revolution.
///
/// The tube angle is drawn by rejection against the area element
/// `big_r + small_r cos u`, so the inner rim is not oversampled.
pub fn sample_torus(n: usize, big_r: f64, small_r: f64, seed: u64) -> Result<PointCloud> {
    check_count(n)?;
    check_positive("R", big_r)?;
    check_positive("r", small_r)?;
    if small_r >= big_r {
        return Err(Error::arg(format!(
            "tube radius r = {small_r} must be smaller than R = {big_r}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let u = rng.gen_range(0.0..TAU);
        let accept: f64 = rng.gen_range(0.0..1.0);
        if accept * (big_r + small_r) > big_r + small_r * u.cos() {
            continue;
        }
        let v = rng.gen_range(0.0..TAU);
        rows.push(torus_point(big_r, small_r, u, v));
    }
    Ok(cloud_from_rows(rows, "torus", seed))
}

/// Perturbs every coordinate by an independent `Uniform[-s, s]` draw.
pub fn add_uniform_noise(pc: &PointCloud, s: f64, seed: u64) -> Result<PointCloud> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::arg(format!("noise scale must be >= 0, got {s}")));
    }
    let mut out = pc.clone();
    if s == 0.0 {
        return Ok(out);
    }
    let mut rng = rng_from_seed(seed);
    for c in out.coords.iter_mut() {
        *c += rng.gen_range(-s..=s);
    }
    Ok(out)
}

/// The three shape classes used by the simulated experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Sphere,
    Torus,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Circle, ShapeKind::Sphere, ShapeKind::Torus];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Sphere => "sphere",
            ShapeKind::Torus => "torus",
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "circle" => Ok(ShapeKind::Circle),
            "sphere" => Ok(ShapeKind::Sphere),
            "torus" => Ok(ShapeKind::Torus),
            other => Err(Error::arg(format!("unknown shape class '{other}'"))),
        }
    }
}

/// Radii of the three shape classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub circle_radius: f64,
    pub sphere_radius: f64,
    pub torus_major: f64,
    pub torus_minor: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self { circle_radius: 5.0, sphere_radius: 5.0, torus_major: 5.0, torus_minor: 2.0 }
    }
}

impl ShapeParams {
    pub fn sample(&self, kind: ShapeKind, n: usize, seed: u64) -> Result<PointCloud> {
        match kind {
            ShapeKind::Circle => sample_circle(n, self.circle_radius, seed),
            ShapeKind::Sphere => sample_sphere(n, self.sphere_radius, seed),
            ShapeKind::Torus => sample_torus(n, self.torus_major, self.torus_minor, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn norm(p: &[f64]) -> f64 {
        p.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    #[test]
    fn circle_parametrization_hits_axis_points() {
        let expected = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        for (k, want) in expected.iter().enumerate() {
            let p = circle_point(1.0, k as f64 * PI / 2.0);
            for (a, b) in p.iter().zip(want) {
                assert!((a - b).abs() < 1e-15, "{p:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn circle_sample_has_radius_norm() {
        let pc = sample_circle(1, 2.0, 9).unwrap();
        assert_eq!(pc.len(), 1);
        assert!((norm(pc.point(0)) - 2.0).abs() < 1e-12);
        assert_eq!(pc.point(0)[2], 0.0);
    }

    #[test]
    fn samplers_are_deterministic() {
        assert_eq!(sample_circle(50, 1.0, 3).unwrap(), sample_circle(50, 1.0, 3).unwrap());
        assert_eq!(sample_sphere(50, 1.0, 3).unwrap(), sample_sphere(50, 1.0, 3).unwrap());
        assert_eq!(sample_torus(50, 3.0, 1.0, 3).unwrap(), sample_torus(50, 3.0, 1.0, 3).unwrap());
        assert_ne!(sample_sphere(50, 1.0, 3).unwrap(), sample_sphere(50, 1.0, 4).unwrap());
    }

    #[test]
    fn sphere_points_on_surface_and_centered() {
        let pc = sample_sphere(1000, 1.0, 11).unwrap();
        let mut mean = [0.0; 3];
        for p in pc.points() {
            assert!((norm(p) - 1.0).abs() < 1e-12);
            for k in 0..3 {
                mean[k] += p[k] / 1000.0;
            }
        }
        assert!(norm(&mean) < 0.1, "mean {mean:?}");
    }

    #[test]
    fn torus_points_inside_tube() {
        let (big, small) = (3.0, 1.0);
        let pc = sample_torus(500, big, small, 5).unwrap();
        for p in pc.points() {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!(rho >= big - small - 1e-12 && rho <= big + small + 1e-12);
            assert!(p[2].abs() <= small + 1e-12);
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(sample_circle(0, 1.0, 0).is_err());
        assert!(sample_circle(3, 0.0, 0).is_err());
        assert!(sample_sphere(3, -1.0, 0).is_err());
        assert!(sample_torus(3, 1.0, 1.0, 0).is_err());
        assert!(sample_torus(3, 1.0, 2.0, 0).is_err());
        let pc = sample_circle(3, 1.0, 0).unwrap();
        assert!(add_uniform_noise(&pc, -0.1, 0).is_err());
    }

    #[test]
    fn zero_noise_is_identity_and_noise_is_bounded() {
        let pc = sample_torus(100, 3.0, 1.0, 1).unwrap();
        assert_eq!(add_uniform_noise(&pc, 0.0, 7).unwrap(), pc);
        let noisy = add_uniform_noise(&pc, 1.0, 7).unwrap();
        assert_eq!(noisy.label, pc.label);
        for (a, b) in noisy.coords().iter().zip(pc.coords()) {
            assert!((a - b).abs() <= 1.0);
        }
        assert_eq!(noisy, add_uniform_noise(&pc, 1.0, 7).unwrap());
    }

    #[test]
    fn torus_area_correction_balances_rims() {
        // Area element (R + r cos u): outer half (cos u > 0) holds
        // (pi R + 2r) / (2 pi R) of the area.
        let (big, small) = (3.0, 1.0);
        let pc = sample_torus(20_000, big, small, 2).unwrap();
        let outer = pc
            .points()
            .filter(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() > big)
            .count() as f64
            / 20_000.0;
        let expected = (PI * big + 2.0 * small) / (2.0 * PI * big);
        assert!((outer - expected).abs() < 0.015, "outer fraction {outer} vs {expected}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn support_bounds_hold(n in 1usize..60, radius in 0.1f64..20.0, s in 0.0f64..3.0, seed: u64) {
                let c = sample_circle(n, radius, seed).unwrap();
                for p in c.points() {
                    prop_assert!((norm(p) - radius).abs() <= 1e-9 * radius.max(1.0));
                }
                let sp = sample_sphere(n, radius, seed).unwrap();
                for p in sp.points() {
                    prop_assert!((norm(p) - radius).abs() <= 1e-12 * radius.max(1.0));
                }
                let t = sample_torus(n, radius, radius * 0.4, seed).unwrap();
                for p in t.points() {
                    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    prop_assert!(rho >= radius * 0.6 - 1e-9 && rho <= radius * 1.4 + 1e-9);
                    prop_assert!(p[2].abs() <= radius * 0.4 + 1e-9);
                }
                let noisy = add_uniform_noise(&sp, s, seed ^ 1).unwrap();
                for (a, b) in noisy.coords().iter().zip(sp.coords()) {
                    prop_assert!((a - b).abs() <= s);
                }
            }
        }
    }
}

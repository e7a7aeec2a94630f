use rand::Rng;

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::means::{frechet_mean, mean_measure, MeanInit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::metrics::{ot_distance, wasserstein, Atom, Order, PersistenceMeasure};
use crate::shapes::SeedRng;

/// A representation space for k-means: a squared distance and a centroid
/// rule.
pub trait Space: Sync {
    type Item: Clone + PartialEq + Send + Sync;

    /// Squared distance `dist²(a, b)`.
    fn dist2(&self, a: &Self::Item, b: &Self::Item) -> Result<f64>;

    /// Centroid of a non-empty cluster. `previous` is the cluster's current
    /// centroid, available as a warm start.
    fn mean(&self, members: &[&Self::Item], previous: Option<&Self::Item>) -> Result<Self::Item>;

    /// A random nearby item, used to probe centroid optimality.
    fn perturb(&self, item: &Self::Item, scale: f64, rng: &mut SeedRng) -> Self::Item;

    /// Norm of the gradient of `Σ dist²(x, c)` over members at `c`, where a
    /// gradient exists.
    fn gradient_norm(&self, _centroid: &Self::Item, _members: &[&Self::Item]) -> Option<f64> {
        None
    }

    /// Typical length of an item, used to size perturbations.
    fn length_scale(&self, item: &Self::Item) -> f64;
}

/// `R^d` with the Euclidean norm; centroids are arithmetic means.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Space for Euclidean {
    type Item = Vec<f64>;

    fn dist2(&self, a: &Vec<f64>, b: &Vec<f64>) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::arg(format!("vectors of length {} and {}", a.len(), b.len())));
        }
        Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
    }

    fn mean(&self, members: &[&Vec<f64>], _previous: Option<&Vec<f64>>) -> Result<Vec<f64>> {
        let first = members.first().ok_or_else(|| Error::arg("mean of an empty cluster"))?;
        let mut acc = vec![0.0; first.len()];
        for m in members {
            if m.len() != acc.len() {
                return Err(Error::arg("vectors of different lengths in one cluster"));
            }
            for (a, x) in acc.iter_mut().zip(m.iter()) {
                *a += x;
            }
        }
        let n = members.len() as f64;
        Ok(acc.into_iter().map(|a| a / n).collect())
    }

    fn perturb(&self, item: &Vec<f64>, scale: f64, rng: &mut SeedRng) -> Vec<f64> {
        item.iter().map(|x| x + rng.gen_range(-scale..=scale)).collect()
    }

    fn gradient_norm(&self, centroid: &Vec<f64>, members: &[&Vec<f64>]) -> Option<f64> {
        let mut g = vec![0.0; centroid.len()];
        for m in members {
            for ((gi, c), x) in g.iter_mut().zip(centroid).zip(m.iter()) {
                *gi += 2.0 * (c - x);
            }
        }
        Some(g.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    fn length_scale(&self, item: &Vec<f64>) -> f64 {
        item.iter().map(|x| x * x).sum::<f64>().sqrt() / (item.len().max(1) as f64).sqrt()
    }
}

/// Persistence diagrams under `W₂` with Fréchet-mean centroids.
///
/// Each update runs the mean iteration from the best input diagram and, when
/// there is one, from the current centroid, and keeps the lower Fréchet
/// value.
#[derive(Debug, Clone, Copy)]
pub struct DiagramSpace {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DiagramSpace {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl Space for DiagramSpace {
    type Item = PersistenceDiagram;

    fn dist2(&self, a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<f64> {
        Ok(wasserstein(a, b, Order::W2)?.1.cost)
    }

    fn mean(&self, members: &[&PersistenceDiagram], previous: Option<&PersistenceDiagram>) -> Result<PersistenceDiagram> {
        let owned: Vec<PersistenceDiagram> = members.iter().map(|d| (*d).clone()).collect();
        let fresh = frechet_mean(&owned, &MeanInit::BestInput, self.tol, self.max_iter)?;
        match previous {
            Some(prev) if prev.dimension() == fresh.candidate.dimension() => {
                let warm = frechet_mean(&owned, &MeanInit::Diagram(prev.clone()), self.tol, self.max_iter)?;
                Ok(if warm.frechet_value <= fresh.frechet_value { warm.candidate } else { fresh.candidate })
            }
            _ => Ok(fresh.candidate),
        }
    }

    fn perturb(&self, item: &PersistenceDiagram, scale: f64, rng: &mut SeedRng) -> PersistenceDiagram {
        let pts = item.expanded().into_iter().filter_map(|(b, d)| {
            let p = (b + rng.gen_range(-scale..=scale), d + rng.gen_range(-scale..=scale));
            (p.0 < p.1).then_some(p)
        });
        PersistenceDiagram::new(item.dimension(), pts.collect::<Vec<_>>()).unwrap_or_else(|_| item.clone())
    }

    fn length_scale(&self, item: &PersistenceDiagram) -> f64 {
        let p = item.persistences();
        if p.is_empty() {
            1.0
        } else {
            p.iter().sum::<f64>() / p.len() as f64
        }
    }
}

/// Persistence measures under `OT₂` with empirical-mean centroids.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeasureSpace;

impl Space for MeasureSpace {
    type Item = PersistenceMeasure;

    fn dist2(&self, a: &PersistenceMeasure, b: &PersistenceMeasure) -> Result<f64> {
        Ok(ot_distance(a, b, Order::W2)?.1.cost)
    }

    fn mean(&self, members: &[&PersistenceMeasure], _previous: Option<&PersistenceMeasure>) -> Result<PersistenceMeasure> {
        let owned: Vec<PersistenceMeasure> = members.iter().map(|m| (*m).clone()).collect();
        mean_measure(&owned)
    }

    fn perturb(&self, item: &PersistenceMeasure, scale: f64, rng: &mut SeedRng) -> PersistenceMeasure {
        let atoms: Vec<Atom> = item
            .atoms()
            .iter()
            .filter_map(|a| {
                let (b, d) = (a.birth + rng.gen_range(-scale..=scale), a.death + rng.gen_range(-scale..=scale));
                let mass = a.mass * (1.0 + rng.gen_range(-0.1..=0.1));
                (b < d).then_some(Atom { birth: b, death: d, mass })
            })
            .collect();
        PersistenceMeasure::new(item.dimension(), atoms).unwrap_or_else(|_| item.clone())
    }

    fn length_scale(&self, item: &PersistenceMeasure) -> f64 {
        let mass = item.total_mass();
        if mass == 0.0 {
            1.0
        } else {
            item.atoms().iter().map(|a| a.mass * (a.death - a.birth)).sum::<f64>() / mass
        }
    }
}

//! Fréchet means of persistence diagrams under `W₂` and empirical means of
//! persistence measures.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::metrics::{optimal_matching, plan_from_matching, wasserstein, Atom, Matching, Order, PersistenceMeasure, TransportPlan};
use crate::shapes::rng_from_seed;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Starting point of the mean iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanInit {
    /// The input diagram with the smallest Fréchet function value.
    BestInput,
    /// An input diagram chosen uniformly with the given seed.
    RandomInput(u64),
    Diagram(PersistenceDiagram),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetState {
    pub candidate: PersistenceDiagram,
    /// Optimal plans from the candidate to each input diagram.
    pub matchings: Vec<TransportPlan>,
    pub frechet_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fréchet value of the starting candidate followed by one value per
    /// iteration.
    pub history: Vec<f64>,
}

fn check_inputs(diagrams: &[PersistenceDiagram]) -> Result<usize> {
    let first = diagrams.first().ok_or_else(|| Error::arg("at least one diagram is required"))?;
    let dim = first.dimension();
    if diagrams.iter().any(|d| d.dimension() != dim) {
        return Err(Error::arg("all diagrams must share one homology degree"));
    }
    Ok(dim)
}

/// `(1/N) Σ W₂²(D, Dᵢ)`.
pub fn frechet_function(d: &PersistenceDiagram, diagrams: &[PersistenceDiagram]) -> Result<f64> {
    check_inputs(diagrams)?;
    let costs: Vec<f64> = diagrams
        .par_iter()
        .map(|di| wasserstein(d, di, Order::W2).map(|(_, plan)| plan.cost))
        .collect::<Result<_>>()?;
    Ok(costs.iter().sum::<f64>() / diagrams.len() as f64)
}

fn evaluate(candidate: &[(f64, f64)], inputs: &[Vec<(f64, f64)>]) -> (Vec<Matching>, f64) {
    let matchings: Vec<Matching> =
        inputs.par_iter().map(|b| optimal_matching(candidate, b, Order::W2)).collect();
    let value = matchings.iter().map(|m| m.cost).sum::<f64>() / inputs.len() as f64;
    (matchings, value)
}

/// Moves every candidate point to the mean of its partners, a partner on
/// the diagonal being the point's own projection, solved to its fixed point
/// for the current matchings: along the diagonal the point goes to the mean
/// of its off-diagonal partners, across it to the mean over all inputs.
/// Points matched only to the diagonal are removed.
fn average_step(candidate: &[(f64, f64)], inputs: &[Vec<(f64, f64)>], matchings: &[Matching]) -> Vec<(f64, f64)> {
    let n = inputs.len() as f64;
    let mut next = Vec::with_capacity(candidate.len());
    for k in 0..candidate.len() {
        let (mut along, mut across, mut partners) = (0.0, 0.0, 0usize);
        for (m, b) in matchings.iter().zip(inputs) {
            if let Some(j) = m.forward[k] {
                let (pb, pd) = b[j];
                along += (pb + pd) / 2.0;
                across += (pd - pb) / 2.0;
                partners += 1;
            }
        }
        if partners == 0 {
            continue;
        }
        let (mid, half) = (along / partners as f64, across / n);
        let p = (mid - half, mid + half);
        if p.0 < p.1 {
            next.push(p);
        }
    }
    next
}

/// Local Fréchet mean by alternating optimal matching and averaging.
///
/// Iteration stops when the Fréchet value decreases by less than `tol`
/// (converged) or after `max_iter` updates. The returned candidate is the
/// best one visited, so `history` is non-increasing.
pub fn frechet_mean(
    diagrams: &[PersistenceDiagram],
    init: &MeanInit,
    tol: f64,
    max_iter: usize,
) -> Result<FrechetState> {
    let dim = check_inputs(diagrams)?;
    if max_iter == 0 {
        return Err(Error::arg("max_iter must be at least 1"));
    }
    if !(tol >= 0.0) {
        return Err(Error::arg("tol must be non-negative"));
    }
    let start = match init {
        MeanInit::BestInput => best_input(diagrams)?.clone(),
        MeanInit::RandomInput(seed) => diagrams[rng_from_seed(*seed).gen_range(0..diagrams.len())].clone(),
        MeanInit::Diagram(d) => {
            if d.dimension() != dim {
                return Err(Error::arg("initial diagram has the wrong homology degree"));
            }
            d.clone()
        }
    };
    let inputs: Vec<Vec<(f64, f64)>> = diagrams.iter().map(PersistenceDiagram::expanded).collect();
    let mut candidate = start.expanded();
    let (mut matchings, mut value) = evaluate(&candidate, &inputs);
    let mut history = vec![value];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let next = PersistenceDiagram::new(dim, average_step(&candidate, &inputs, &matchings))?.expanded();
        let (next_matchings, next_value) = evaluate(&next, &inputs);
        if next_value > value {
            // Only reachable through rounding; keep the better candidate.
            history.push(value);
            converged = true;
            break;
        }
        let decrease = value - next_value;
        candidate = next;
        matchings = next_matchings;
        value = next_value;
        history.push(value);
        if decrease < tol {
            converged = true;
            break;
        }
    }
    let candidate = PersistenceDiagram::new(dim, candidate)?;
    let plans = matchings.iter().zip(diagrams).map(|(m, d)| plan_from_matching(&candidate, d, m)).collect();
    Ok(FrechetState { candidate, matchings: plans, frechet_value: value, iterations, converged, history })
}

/// The input diagram minimising the Fréchet function; ties go to the lowest
/// index.
pub fn best_input(diagrams: &[PersistenceDiagram]) -> Result<&PersistenceDiagram> {
    check_inputs(diagrams)?;
    let n = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let costs: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| wasserstein(&diagrams[i], &diagrams[j], Order::W2).map(|(_, p)| p.cost))
        .collect::<Result<_>>()?;
    let mut totals = vec![0.0; n];
    for (&(i, j), c) in pairs.iter().zip(&costs) {
        totals[i] += c;
        totals[j] += c;
    }
    let best = (0..n).min_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b))).unwrap_or(0);
    Ok(&diagrams[best])
}

/// Empirical mean `(1/N) Σ μᵢ`.
pub fn mean_measure(measures: &[PersistenceMeasure]) -> Result<PersistenceMeasure> {
    let first = measures.first().ok_or_else(|| Error::arg("at least one measure is required"))?;
    let dim = first.dimension();
    if measures.iter().any(|m| m.dimension() != dim) {
        return Err(Error::arg("all measures must share one homology degree"));
    }
    let n = measures.len() as f64;
    PersistenceMeasure::new(
        dim,
        measures.iter().flat_map(|m| m.atoms().iter().map(move |a| Atom { mass: a.mass / n, ..*a })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::diagram_to_measure;

    fn dg(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(1, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn frechet_function_examples() {
        let d = dg(&[(0.0, 2.0), (1.0, 4.0)]);
        assert_eq!(frechet_function(&d, std::slice::from_ref(&d)).unwrap(), 0.0);
        let v = frechet_function(&dg(&[]), &[dg(&[]), dg(&[(0.0, 2.0)])]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!(frechet_function(&d, &[]).is_err());
    }

    #[test]
    fn identical_inputs_are_their_own_mean() {
        let d = dg(&[(0.0, 2.0), (1.0, 4.0), (1.0, 4.0)]);
        let s = frechet_mean(&[d.clone(), d.clone()], &MeanInit::BestInput, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(s.candidate, d);
        assert_eq!(s.iterations, 1);
        assert!(s.converged);
        assert_eq!(s.frechet_value, 0.0);
    }

    #[test]
    fn empty_inputs_give_empty_mean() {
        let s = frechet_mean(&[dg(&[]), dg(&[])], &MeanInit::BestInput, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(s.candidate.is_empty());
    }

    #[test]
    fn two_single_points_average() {
        let s = frechet_mean(&[dg(&[(0.0, 2.0)]), dg(&[(0.0, 4.0)])], &MeanInit::BestInput, DEFAULT_TOL, 100).unwrap();
        assert_eq!(s.candidate.expanded(), vec![(0.0, 3.0)]);
        assert!((s.frechet_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = dg(&[(0.0, 1.0)]);
        assert!(frechet_mean(std::slice::from_ref(&d), &MeanInit::BestInput, DEFAULT_TOL, 0).is_err());
        assert!(frechet_mean(&[], &MeanInit::BestInput, DEFAULT_TOL, 10).is_err());
        let wrong = MeanInit::Diagram(PersistenceDiagram::empty(0));
        assert!(frechet_mean(&[d], &wrong, DEFAULT_TOL, 10).is_err());
    }

    #[test]
    fn mean_measure_examples() {
        let mu = diagram_to_measure(&dg(&[(0.0, 2.0)]));
        assert_eq!(mean_measure(&[mu.clone(), mu.clone()]).unwrap(), mu);
        let half = mean_measure(&[mu.clone(), PersistenceMeasure::empty(1)]).unwrap();
        assert_eq!(half.atoms(), &[Atom { birth: 0.0, death: 2.0, mass: 0.5 }]);
        assert!(mean_measure(&[]).is_err());
    }
}

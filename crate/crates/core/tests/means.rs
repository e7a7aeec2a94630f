use phkm_core::means::{frechet_function, frechet_mean, mean_measure, MeanInit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use phkm_core::metrics::{diagram_to_measure, Atom};
use phkm_core::{PersistenceDiagram, PersistenceMeasure};
use proptest::prelude::*;

fn dg(pairs: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(1, pairs.iter().copied()).unwrap()
}

fn diagram(max_points: usize) -> impl Strategy<Value = PersistenceDiagram> {
    prop::collection::vec((0.0f64..3.0, 0.05f64..4.0), 0..=max_points)
        .prop_map(|v| PersistenceDiagram::new(1, v.into_iter().map(|(b, p)| (b, b + p))).unwrap())
}

/// Squared W₂ between one-point diagrams: direct pairing or both to the
/// diagonal.
fn w2_sq_single(y: (f64, f64), x: (f64, f64)) -> f64 {
    let direct = (y.0 - x.0).powi(2) + (y.1 - x.1).powi(2);
    let diag = |p: (f64, f64)| (p.1 - p.0).powi(2) / 2.0;
    direct.min(diag(y) + diag(x))
}

#[test]
fn single_point_mean_matches_grid_oracle() {
    let inputs = [(0.0, 2.0), (0.0, 4.0)];
    let diagrams: Vec<_> = inputs.iter().map(|&x| dg(&[x])).collect();
    let state = frechet_mean(&diagrams, &MeanInit::BestInput, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();

    let step = 0.01;
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for i in 0..=100 {
        for j in 0..=500 {
            let y = (-0.5 + i as f64 * step, j as f64 * step);
            if y.0 >= y.1 {
                continue;
            }
            let v: f64 = inputs.iter().map(|&x| w2_sq_single(y, x)).sum::<f64>() / 2.0;
            if v < best.0 {
                best = (v, y);
            }
        }
    }
    let mean = state.candidate.expanded();
    assert_eq!(mean.len(), 1);
    assert!((mean[0].0 - best.1 .0).abs() <= step && (mean[0].1 - best.1 .1).abs() <= step);
    assert!((state.frechet_value - best.0).abs() < 1e-9);
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull (counter-clockwise) by the monotone chain.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn in_hull(h: &[(f64, f64)], p: (f64, f64)) -> bool {
    let eps = 1e-9;
    match h.len() {
        0 => false,
        1 => (p.0 - h[0].0).abs() < eps && (p.1 - h[0].1).abs() < eps,
        2 => {
            let (a, b) = (h[0], h[1]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            let t = ((p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1)) / (len * len);
            cross(a, b, p).abs() / len < eps && (-eps..=1.0 + eps).contains(&t)
        }
        n => (0..n).all(|i| cross(h[i], h[(i + 1) % n], p) >= -eps),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn mean_iteration_descends_and_stays_in_hull(ds in prop::collection::vec(diagram(5), 1..6), seed in any::<u64>()) {
        let init = if seed % 2 == 0 { MeanInit::BestInput } else { MeanInit::RandomInput(seed) };
        let state = frechet_mean(&ds, &init, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        for w in state.history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "history {:?}", state.history);
        }
        prop_assert_eq!(*state.history.last().unwrap(), state.frechet_value);
        prop_assert!((frechet_function(&state.candidate, &ds).unwrap() - state.frechet_value).abs() < 1e-9);

        let total: usize = ds.iter().map(PersistenceDiagram::cardinality).sum();
        prop_assert!(state.candidate.cardinality() <= total);
        let mut support: Vec<(f64, f64)> = Vec::new();
        for d in &ds {
            for (b, e) in d.expanded() {
                support.push((b, e));
                support.push(((b + e) / 2.0, (b + e) / 2.0));
            }
        }
        let h = hull(support);
        for p in state.candidate.expanded() {
            prop_assert!(in_hull(&h, p), "{:?} outside hull", p);
        }
        prop_assert_eq!(state.matchings.len(), ds.len());
    }

    #[test]
    fn best_input_mean_beats_every_input(ds in prop::collection::vec(diagram(4), 1..6)) {
        let state = frechet_mean(&ds, &MeanInit::BestInput, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        for d in &ds {
            prop_assert!(state.frechet_value <= frechet_function(d, &ds).unwrap() + 1e-12);
        }
    }

    #[test]
    fn mean_measure_commutes_with_mass_scaling(ds in prop::collection::vec(diagram(5), 1..6), factor in 0.1f64..10.0) {
        let ms: Vec<PersistenceMeasure> = ds.iter().map(diagram_to_measure).collect();
        let scaled: Vec<PersistenceMeasure> = ms.iter().map(|m| m.scaled(factor).unwrap()).collect();
        let a = mean_measure(&scaled).unwrap();
        let b = mean_measure(&ms).unwrap().scaled(factor).unwrap();
        prop_assert_eq!(a.atoms().len(), b.atoms().len());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            prop_assert_eq!(x.coords(), y.coords());
            prop_assert!((x.mass - y.mass).abs() <= 1e-12 * (1.0 + y.mass));
        }
        let avg = ms.iter().map(|m| m.total_mass()).sum::<f64>() / ms.len() as f64;
        prop_assert!((mean_measure(&ms).unwrap().total_mass() - avg).abs() < 1e-12);
    }
}

#[test]
fn mean_measure_of_atom_and_empty() {
    let mu = PersistenceMeasure::new(1, [Atom { birth: 0.0, death: 2.0, mass: 1.0 }]).unwrap();
    let m = mean_measure(&[mu, PersistenceMeasure::empty(1)]).unwrap();
    assert_eq!(m.atoms(), &[Atom { birth: 0.0, death: 2.0, mass: 0.5 }]);
}

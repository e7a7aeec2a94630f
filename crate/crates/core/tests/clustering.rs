use phkm_core::clustering::{
    cluster_cost, directional_derivative, kmeans, kmeans_restarts, verify_partial_optimality, ClusterState, DiagramSpace,
    Euclidean, KktOptions, KmeansOptions, MeasureSpace, Space,
};
use phkm_core::metrics::diagram_to_measure;
use phkm_core::shapes::rng_from_seed;
use phkm_core::PersistenceDiagram;
use proptest::prelude::*;
use rand::Rng;

fn dg(pairs: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(1, pairs.iter().copied()).unwrap()
}

fn check_descent<T>(s: &ClusterState<T>) {
    for step in &s.steps {
        assert!(step.after_update <= step.start + 1e-9, "{step:?}");
        assert!(step.after_assignment <= step.after_update + 1e-9, "{step:?}");
    }
    for w in s.cost_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{:?}", s.cost_trace);
    }
}

/// Best 2-partition cost over all splits, each part costed by `part_cost`.
fn exhaustive_two_partition(n: usize, part_cost: impl Fn(&[usize]) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let b: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) == 0).collect();
        best = best.min(part_cost(&a) + part_cost(&b));
    }
    best
}

#[test]
fn cost_of_two_diagrams_around_their_midpoint() {
    let data = vec![dg(&[(0.0, 2.0)]), dg(&[(0.0, 4.0)])];
    let c = cluster_cost(&DiagramSpace::default(), &data, &[0, 0], &[dg(&[(0.0, 3.0)])]).unwrap();
    assert!((c - 2.0).abs() < 1e-12);
    assert_eq!(cluster_cost(&DiagramSpace::default(), &data, &[0, 1], &data).unwrap(), 0.0);
}

#[test]
fn separated_single_point_diagrams_split_into_their_groups() {
    let mut rng = rng_from_seed(5);
    let mut pts = Vec::new();
    for center in [2.0, 10.0] {
        for _ in 0..4 {
            pts.push((rng.gen_range(-0.2..0.2), center + rng.gen_range(-0.3..0.3)));
        }
    }
    let data: Vec<PersistenceDiagram> = pts.iter().map(|&p| dg(&[p])).collect();

    // With tight groups far from the diagonal the Fréchet mean of a part is
    // its arithmetic mean and every point is matched directly to it.
    let part_cost = |idx: &[usize]| {
        let m = idx.iter().fold((0.0, 0.0), |acc, &j| (acc.0 + pts[j].0, acc.1 + pts[j].1));
        let m = (m.0 / idx.len() as f64, m.1 / idx.len() as f64);
        idx.iter()
            .map(|&j| {
                let direct = (pts[j].0 - m.0).powi(2) + (pts[j].1 - m.1).powi(2);
                let diag = (pts[j].1 - pts[j].0).powi(2) / 2.0 + (m.1 - m.0).powi(2) / 2.0;
                direct.min(diag)
            })
            .sum::<f64>()
    };
    let optimum = exhaustive_two_partition(8, part_cost);

    let space = DiagramSpace::default();
    let r = kmeans_restarts(&space, &data, &KmeansOptions { k: 2, seed: 9, max_iter: 50 }, 10).unwrap();
    check_descent(&r.best);
    assert!((r.best.final_cost() - optimum).abs() < 1e-9, "{} vs {optimum}", r.best.final_cost());
    let l = &r.best.labels;
    assert!(l[..4].iter().all(|&x| x == l[0]) && l[4..].iter().all(|&x| x == l[4]) && l[0] != l[4]);
}

#[test]
fn euclidean_runs_reach_the_exhaustive_optimum() {
    let mut at_optimum = 0;
    let mut runs = 0;
    for data_seed in 0..10u64 {
        let mut rng = rng_from_seed(data_seed);
        let n = 6 + (data_seed as usize % 3);
        // Two groups of unequal size and spread around random centers.
        let centers = [[rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)], [rng.gen_range(8.0..12.0), rng.gen_range(0.0..4.0)]];
        let data: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let c = centers[usize::from(j % 3 == 0)];
                vec![c[0] + rng.gen_range(-1.5..1.5), c[1] + rng.gen_range(-1.5..1.5)]
            })
            .collect();
        let part_cost = |idx: &[usize]| {
            let m = Euclidean.mean(&idx.iter().map(|&j| &data[j]).collect::<Vec<_>>(), None).unwrap();
            idx.iter().map(|&j| Euclidean.dist2(&data[j], &m).unwrap()).sum::<f64>()
        };
        let optimum = exhaustive_two_partition(n, part_cost);
        for seed in 0..10 {
            let s = kmeans(&Euclidean, &data, &KmeansOptions { k: 2, seed, max_iter: 100 }).unwrap();
            check_descent(&s);
            assert!(s.converged);
            runs += 1;
            if s.final_cost() <= optimum + 1e-9 {
                at_optimum += 1;
            }
        }
        let r = kmeans_restarts(&Euclidean, &data, &KmeansOptions { k: 2, seed: 1, max_iter: 100 }, 10).unwrap();
        assert!((r.best.final_cost() - optimum).abs() <= 1e-9);
    }
    assert!(at_optimum * 10 >= runs * 9, "{at_optimum}/{runs} runs at the optimum");
}

fn random_diagram(rng: &mut impl Rng, center: f64) -> PersistenceDiagram {
    let m = rng.gen_range(0..5);
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|_| {
            let b = rng.gen_range(0.0..2.0);
            (b, b + center * rng.gen_range(0.2..1.5))
        })
        .collect();
    dg(&pts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_representation_descends_and_is_partially_optimal(seed in any::<u64>(), n in 4usize..10, k in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let diagrams: Vec<PersistenceDiagram> =
            (0..n).map(|j| random_diagram(&mut rng, if j % 2 == 0 { 1.0 } else { 3.0 })).collect();
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
        let opts = KmeansOptions { k: k.min(n), seed, max_iter: 100 };
        let kkt = KktOptions { seed, ..KktOptions::default() };

        let e = kmeans(&Euclidean, &vectors, &opts).unwrap();
        check_descent(&e);
        prop_assert!(e.converged);
        let r = verify_partial_optimality(&Euclidean, &vectors, &e, &kkt).unwrap();
        prop_assert!(r.is_partial_optimal_assignment);
        prop_assert!(r.max_first_order_violation <= 1e-6);

        let space = DiagramSpace::default();
        let d = kmeans(&space, &diagrams, &opts).unwrap();
        check_descent(&d);
        prop_assert!(d.converged);
        let r = verify_partial_optimality(&space, &diagrams, &d, &kkt).unwrap();
        prop_assert!(r.is_partial_optimal_assignment);

        let measures: Vec<_> = diagrams.iter().map(diagram_to_measure).collect();
        let m = kmeans(&MeasureSpace, &measures, &opts).unwrap();
        check_descent(&m);
        prop_assert!(m.converged);
        let r = verify_partial_optimality(&MeasureSpace, &measures, &m, &kkt).unwrap();
        prop_assert!(r.is_partial_optimal_assignment);
    }

    #[test]
    fn feasible_directions_do_not_descend_at_convergence(seed in any::<u64>(), n in 4usize..10) {
        let mut rng = rng_from_seed(seed);
        let data: Vec<PersistenceDiagram> =
            (0..n).map(|j| random_diagram(&mut rng, if j % 2 == 0 { 1.0 } else { 3.0 })).collect();
        let space = DiagramSpace::default();
        let s = kmeans(&space, &data, &KmeansOptions { k: 2, seed, max_iter: 100 }).unwrap();
        prop_assert!(s.converged);
        for _ in 0..20 {
            let mut v = vec![vec![0.0; n]; 2];
            for j in 0..n {
                let t: f64 = rng.gen_range(0.0..1.0);
                let own = s.labels[j];
                v[own][j] = -t;
                v[1 - own][j] = t;
            }
            let dd = directional_derivative(&space, &data, &s.labels, &v, &s.centroids).unwrap();
            prop_assert!(dd >= -1e-12);
        }
    }
}

#[test]
fn euclidean_move_derivative_is_a_distance_difference() {
    let data = vec![vec![0.0], vec![1.0], vec![9.0], vec![10.0]];
    let s = kmeans(&Euclidean, &data, &KmeansOptions { k: 2, seed: 0, max_iter: 10 }).unwrap();
    let (a, b) = (s.labels[1], 1 - s.labels[1]);
    let mut v = vec![vec![0.0; 4]; 2];
    v[a][1] = -1.0;
    v[b][1] = 1.0;
    let dd = directional_derivative(&Euclidean, &data, &s.labels, &v, &s.centroids).unwrap();
    let expected = Euclidean.dist2(&data[1], &s.centroids[b]).unwrap() - Euclidean.dist2(&data[1], &s.centroids[a]).unwrap();
    assert_eq!(dd, expected);
    assert!(dd >= 0.0);
}

#[test]
fn all_in_one_cluster_costs_at_least_the_best_split() {
    let data: Vec<Vec<f64>> = [0.0, 0.5, 1.0, 8.0, 8.5, 9.0].iter().map(|&x| vec![x]).collect();
    let one = kmeans(&Euclidean, &data, &KmeansOptions { k: 1, seed: 0, max_iter: 10 }).unwrap();
    let part_cost = |idx: &[usize]| {
        let m = idx.iter().map(|&j| data[j][0]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&j| (data[j][0] - m).powi(2)).sum::<f64>()
    };
    assert!(one.final_cost() >= exhaustive_two_partition(6, part_cost));
}

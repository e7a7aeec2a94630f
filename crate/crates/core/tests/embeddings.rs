use std::collections::HashMap;

use phkm_core::embeddings::{betti_curve, grid_points, persistence_image, persistence_landscape};
use phkm_core::homology::{build_vr_filtration, compute_persistence};
use phkm_core::shapes::rng_from_seed;
use phkm_core::{PersistenceDiagram, PointCloud};
use proptest::prelude::*;
use rand::Rng;

fn diagram(max_points: usize) -> impl Strategy<Value = PersistenceDiagram> {
    prop::collection::vec((0.0f64..4.0, 0.01f64..4.0), 0..=max_points)
        .prop_map(|v| PersistenceDiagram::new(1, v.into_iter().map(|(b, p)| (b, b + p))).unwrap())
}

/// All tent values at `t`, sorted descending by repeated selection.
fn tents_descending(pts: &[(f64, f64)], t: f64) -> Vec<f64> {
    let mut rest: Vec<f64> = pts.iter().map(|&(b, d)| f64::max(0.0, f64::min(t - b, d - t))).collect();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (k, _) = rest.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        out.push(rest.swap_remove(k));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn landscape_matches_tent_oracle(d in diagram(5), layers in 1usize..7) {
        let g = 41;
        let emb = persistence_landscape(&d, layers, -0.5, 8.5, g).unwrap();
        prop_assert_eq!(emb.values.len(), layers * g);
        for (i, t) in grid_points(-0.5, 8.5, g).into_iter().enumerate() {
            let tents = tents_descending(&d.expanded(), t);
            for k in 0..layers {
                prop_assert_eq!(emb.values[k * g + i], tents.get(k).copied().unwrap_or(0.0));
            }
        }
    }

    #[test]
    fn landscape_is_one_lipschitz(d in diagram(5), which in 0usize..5, db in -0.3f64..0.3, dd in -0.3f64..0.3) {
        let mut pts = d.expanded();
        prop_assume!(!pts.is_empty());
        let k = which % pts.len();
        pts[k] = (pts[k].0 + db, pts[k].1 + dd);
        prop_assume!(pts[k].0 < pts[k].1);
        let moved = PersistenceDiagram::new(1, pts).unwrap();
        let a = persistence_landscape(&d, 5, -1.0, 9.0, 101).unwrap();
        let b = persistence_landscape(&moved, 5, -1.0, 9.0, 101).unwrap();
        let delta = db.abs().max(dd.abs());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= delta + 1e-12);
        }
    }

    #[test]
    fn betti_and_image_are_additive(a in diagram(5), b in diagram(5)) {
        let u = a.union(&b).unwrap();
        let (ba, bb, bu) = (
            betti_curve(&a, 0.0, 8.0, 33).unwrap(),
            betti_curve(&b, 0.0, 8.0, 33).unwrap(),
            betti_curve(&u, 0.0, 8.0, 33).unwrap(),
        );
        for i in 0..33 {
            prop_assert_eq!(bu.values[i], ba.values[i] + bb.values[i]);
        }
        let img = |d: &PersistenceDiagram| persistence_image(d, 8, 0.3, [0.0, 4.0], [0.0, 4.0]).unwrap().values;
        let (ia, ib, iu) = (img(&a), img(&b), img(&u));
        for i in 0..64 {
            prop_assert!((iu[i] - ia[i] - ib[i]).abs() <= 1e-12 * (1.0 + iu[i]));
            prop_assert!(iu[i] >= 0.0);
        }
    }

    #[test]
    fn embeddings_ignore_point_order(pairs in prop::collection::vec((0.0f64..4.0, 0.01f64..4.0), 0..6)) {
        let fwd: Vec<(f64, f64)> = pairs.iter().map(|&(b, p)| (b, b + p)).collect();
        let rev: Vec<(f64, f64)> = fwd.iter().rev().copied().collect();
        let (a, b) = (PersistenceDiagram::new(1, fwd).unwrap(), PersistenceDiagram::new(1, rev).unwrap());
        prop_assert_eq!(betti_curve(&a, 0.0, 8.0, 20).unwrap(), betti_curve(&b, 0.0, 8.0, 20).unwrap());
        prop_assert_eq!(persistence_landscape(&a, 3, 0.0, 8.0, 20).unwrap(), persistence_landscape(&b, 3, 0.0, 8.0, 20).unwrap());
        prop_assert_eq!(
            persistence_image(&a, 5, 0.5, [0.0, 4.0], [0.0, 4.0]).unwrap(),
            persistence_image(&b, 5, 0.5, [0.0, 4.0], [0.0, 4.0]).unwrap()
        );
    }
}

/// Rank over Z/2Z of a set of bit vectors.
fn rank_gf2(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        if let Some(pos) = rows[rank..].iter().position(|r| r & mask != 0) {
            rows.swap(rank, rank + pos);
            let pivot = rows[rank];
            for r in rows.iter_mut().skip(rank + 1) {
                if *r & mask != 0 {
                    *r ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

fn components(n: usize, edges: &[(usize, usize)]) -> usize {
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut count = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

#[test]
fn betti_curves_match_rank_counts_of_the_filtration() {
    let (scale, g) = (1.2, 50);
    for seed in 0..20u64 {
        let mut rng = rng_from_seed(seed);
        let n = 8 + (seed as usize % 4);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let pc = PointCloud::new(pts).unwrap();
        let fc = build_vr_filtration(&pc, scale, 1).unwrap();
        let dgms = compute_persistence(&fc, 1).unwrap();
        let b0 = betti_curve(&dgms[0], 0.0, scale * 0.999, g).unwrap();
        let b1 = betti_curve(&dgms[1], 0.0, scale * 0.999, g).unwrap();

        for (i, t) in grid_points(0.0, scale * 0.999, g).into_iter().enumerate() {
            let alive: Vec<_> = fc.simplices().iter().filter(|s| s.value <= t).collect();
            let edges: Vec<(usize, usize)> = alive
                .iter()
                .filter(|s| s.vertices.len() == 2)
                .map(|s| (s.vertices[0] as usize, s.vertices[1] as usize))
                .collect();
            let edge_id: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
            let boundaries: Vec<u128> = alive
                .iter()
                .filter(|s| s.vertices.len() == 3)
                .map(|s| {
                    let v: Vec<usize> = s.vertices.iter().map(|&x| x as usize).collect();
                    [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])].iter().fold(0u128, |acc, e| acc | 1u128 << edge_id[e])
                })
                .collect();
            let beta0 = components(n, &edges);
            let cycles = edges.len() + beta0 - n;
            let beta1 = cycles - rank_gf2(boundaries);
            assert_eq!(b0.values[i], beta0 as f64, "seed {seed}, t = {t}");
            assert_eq!(b1.values[i], beta1 as f64, "seed {seed}, t = {t}");
        }
    }
}

//! Exact balanced transportation problem by the primal network simplex
//! method.
//!
//! Rows send to columns along uncapacitated arcs. The starting basis hangs
//! every node from an artificial root by a costly artificial arc; entering
//! arcs are chosen by block search and leaving arcs by Cunningham's rule,
//! which keeps the spanning tree strongly feasible and so cannot cycle.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub flows: Vec<Flow>,
    /// Row potentials of the final basis (`u_i + v_j = c_ij` on basic cells).
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
}

/// Spanning tree of the basis, rooted at the artificial node.
struct Tree {
    parent: Vec<usize>,
    /// Arc joining a node to its parent.
    pred: Vec<usize>,
    /// Whether `pred[v]` points from `v` to its parent.
    up: Vec<bool>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    pi: Vec<f64>,
}

impl Tree {
    fn detach(&mut self, child: usize) {
        let p = self.parent[child];
        let list = &mut self.children[p];
        let pos = list.iter().position(|&c| c == child).expect("child listed under its parent");
        list.swap_remove(pos);
    }

    /// Recomputes potentials and depths below `top` from each node's tree
    /// arc, so rounding does not build up over pivots.
    fn refresh(&mut self, top: usize, arc_cost: impl Fn(usize) -> f64, stack: &mut Vec<usize>) {
        stack.clear();
        stack.push(top);
        while let Some(v) = stack.pop() {
            let p = self.parent[v];
            let c = arc_cost(self.pred[v]);
            self.pi[v] = if self.up[v] { self.pi[p] - c } else { self.pi[p] + c };
            self.depth[v] = self.depth[p] + 1;
            stack.extend_from_slice(&self.children[v]);
        }
    }
}

/// Solves `min Σ c_ij x_ij` subject to row sums `supply`, column sums
/// `demand`, `x >= 0`. `cost` is `supply.len() × demand.len()` row-major.
/// Supplies and demands must be non-negative with equal totals (up to
/// rounding, which is left on the artificial arcs and dropped).
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Solution {
    let (m_all, n_all) = (supply.len(), demand.len());
    assert_eq!(cost.len(), m_all * n_all, "cost matrix shape mismatch");

    // Zero-mass rows and columns never carry flow; solve on the rest.
    let rows: Vec<usize> = (0..m_all).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n_all).filter(|&j| demand[j] > 0.0).collect();
    let mut row_potentials = vec![0.0; m_all];
    let mut col_potentials = vec![0.0; n_all];
    if rows.is_empty() || cols.is_empty() {
        return Solution { flows: Vec::new(), row_potentials, col_potentials };
    }
    let (m, n) = (rows.len(), cols.len());
    let real = m * n;
    let c: Vec<f64> = rows.iter().flat_map(|&i| cols.iter().map(move |&j| cost[i * n_all + j])).collect();
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let eps = 1e-13 * (1.0 + scale);
    // Flows this close count as equal in the ratio test.
    let mass = rows.iter().map(|&i| supply[i]).sum::<f64>();
    let tie = 1e-14 * (1.0 + mass);

    // Nodes: rows 0..m, columns m..m+n, root m+n. Arcs: real arc i*n+j
    // from row i to column j; artificial arc real+i from row i to the root
    // and real+m+j from the root to column j.
    let root = m + n;
    // Any row and column both still served by the root have a direct arc
    // of negative reduced cost `c_ij - 2 * art_cost`.
    let art_cost = 1.0 + scale;
    let ends = |a: usize| -> (usize, usize) {
        if a < real {
            (a / n, m + a % n)
        } else if a < real + m {
            (a - real, root)
        } else {
            (root, a - real)
        }
    };

    let mut flow = vec![0.0; real + m + n];
    let mut tree = Tree {
        parent: vec![root; root + 1],
        pred: vec![usize::MAX; root + 1],
        up: vec![false; root + 1],
        depth: vec![1; root + 1],
        children: vec![Vec::new(); root + 1],
        pi: vec![0.0; root + 1],
    };
    tree.depth[root] = 0;
    tree.children[root] = (0..root).collect();
    for i in 0..m {
        tree.pred[i] = real + i;
        tree.up[i] = true;
        tree.pi[i] = -art_cost;
        flow[real + i] = supply[rows[i]];
    }
    for j in 0..n {
        tree.pred[m + j] = real + m + j;
        tree.pi[m + j] = art_cost;
        flow[real + m + j] = demand[cols[j]];
    }

    let block = (real as f64).sqrt().ceil().max(16.0) as usize;
    let mut next_arc = 0usize;
    let mut stack = Vec::new();
    let mut path = Vec::new();

    loop {
        // Pricing: the most negative reduced cost within the first block,
        // scanning on from where the last search stopped, that has one.
        let mut entering = None;
        let mut best = -eps;
        let mut pos = next_arc;
        let mut left = real;
        while left > 0 {
            let mut chunk = block.min(left);
            left -= chunk;
            while chunk > 0 {
                let (i, j0) = (pos / n, pos % n);
                let len = (n - j0).min(chunk);
                let pi_row = tree.pi[i];
                let costs = &c[pos..pos + len];
                let pi_cols = &tree.pi[m + j0..m + j0 + len];
                for (t, (&cij, &pj)) in costs.iter().zip(pi_cols).enumerate() {
                    let r = cij + pi_row - pj;
                    if r < best {
                        best = r;
                        entering = Some(pos + t);
                    }
                }
                pos = if pos + len == real { 0 } else { pos + len };
                chunk -= len;
            }
            if entering.is_some() {
                break;
            }
        }
        next_arc = pos;
        let Some(e) = entering else { break };
        let (first, second) = ends(e);

        // Join of the cycle closed by the entering arc.
        let (mut x, mut y) = (first, second);
        while x != y {
            if tree.depth[x] > tree.depth[y] {
                x = tree.parent[x];
            } else {
                y = tree.parent[y];
            }
        }
        let join = x;

        // Leaving arc: the last blocking arc met going round the cycle from
        // the join in the entering arc's direction, counting flows within
        // `tie` of the smallest as tied.
        let mut delta = f64::INFINITY;
        for start in [first, second] {
            let mut v = start;
            while v != join {
                if tree.up[v] == (start == first) {
                    delta = delta.min(flow[tree.pred[v]]);
                }
                v = tree.parent[v];
            }
        }
        let mut leaving = usize::MAX;
        let mut on_first = false;
        let mut v = second;
        while v != join {
            if !tree.up[v] && flow[tree.pred[v]] <= delta + tie {
                leaving = v;
            }
            v = tree.parent[v];
        }
        if leaving == usize::MAX {
            on_first = true;
            v = first;
            while leaving == usize::MAX {
                if tree.up[v] && flow[tree.pred[v]] <= delta + tie {
                    leaving = v;
                }
                v = tree.parent[v];
            }
        }

        // Augment.
        flow[e] += delta;
        v = first;
        while v != join {
            let k = tree.pred[v];
            flow[k] = if tree.up[v] { flow[k] - delta } else { flow[k] + delta };
            v = tree.parent[v];
        }
        v = second;
        while v != join {
            let k = tree.pred[v];
            flow[k] = if tree.up[v] { flow[k] + delta } else { flow[k] - delta };
            v = tree.parent[v];
        }

        // Re-hang the subtree cut off below `leaving` from the entering arc.
        let (u_in, v_in) = if on_first { (first, second) } else { (second, first) };
        path.clear();
        let mut w = u_in;
        path.push(w);
        while w != leaving {
            w = tree.parent[w];
            path.push(w);
        }
        tree.detach(leaving);
        for k in (1..path.len()).rev() {
            let (below, above) = (path[k - 1], path[k]);
            tree.detach(below);
            tree.parent[above] = below;
            tree.pred[above] = tree.pred[below];
            tree.up[above] = !tree.up[below];
            tree.children[below].push(above);
        }
        tree.parent[u_in] = v_in;
        tree.pred[u_in] = e;
        tree.up[u_in] = ends(e).0 == u_in;
        tree.children[v_in].push(u_in);
        tree.refresh(u_in, |a| if a < real { c[a] } else { art_cost }, &mut stack);
    }

    for (i, &ri) in rows.iter().enumerate() {
        row_potentials[ri] = -tree.pi[i];
    }
    for (j, &cj) in cols.iter().enumerate() {
        col_potentials[cj] = tree.pi[m + j];
    }
    let flows: Vec<Flow> = (0..real)
        .filter(|&a| flow[a] > 0.0)
        .map(|a| Flow { source: rows[a / n], target: cols[a % n], mass: flow[a] })
        .collect();
    Solution { flows, row_potentials, col_potentials }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(sol: &Solution, cost: &[f64], n: usize) -> f64 {
        sol.flows.iter().map(|f| f.mass * cost[f.source * n + f.target]).sum()
    }

    fn check_feasible(sol: &Solution, supply: &[f64], demand: &[f64]) {
        let mut rs = vec![0.0; supply.len()];
        let mut cs = vec![0.0; demand.len()];
        for f in &sol.flows {
            assert!(f.mass > 0.0);
            rs[f.source] += f.mass;
            cs[f.target] += f.mass;
        }
        for (a, b) in rs.iter().zip(supply) {
            assert!((a - b).abs() < 1e-12, "row sums {rs:?} vs {supply:?}");
        }
        for (a, b) in cs.iter().zip(demand) {
            assert!((a - b).abs() < 1e-12, "col sums {cs:?} vs {demand:?}");
        }
    }

    fn check_dual_optimal(sol: &Solution, supply: &[f64], demand: &[f64], cost: &[f64]) {
        let n = demand.len();
        for i in 0..supply.len() {
            for j in 0..n {
                if supply[i] > 0.0 && demand[j] > 0.0 {
                    let r = cost[i * n + j] - sol.row_potentials[i] - sol.col_potentials[j];
                    assert!(r > -1e-9, "negative reduced cost {r} at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn textbook_instance() {
        // Classic 3x4 instance with optimum 743.
        let supply = [7.0, 9.0, 18.0];
        let demand = [5.0, 8.0, 7.0, 14.0];
        let cost = [19.0, 30.0, 50.0, 10.0, 70.0, 30.0, 40.0, 60.0, 40.0, 8.0, 70.0, 20.0];
        let sol = solve(&supply, &demand, &cost);
        check_feasible(&sol, &supply, &demand);
        check_dual_optimal(&sol, &supply, &demand, &cost);
        assert!((total(&sol, &cost, 4) - 743.0).abs() < 1e-9);
    }

    #[test]
    fn zero_rows_are_skipped() {
        let supply = [0.0, 1.0];
        let demand = [0.5, 0.5, 0.0];
        let cost = [0.0, 0.0, 0.0, 1.0, 2.0, 3.0];
        let sol = solve(&supply, &demand, &cost);
        check_feasible(&sol, &supply, &demand);
        assert!((total(&sol, &cost, 3) - 1.5).abs() < 1e-12);
        assert!(solve(&[0.0], &[0.0], &[1.0]).flows.is_empty());
    }

    #[test]
    fn degenerate_permutation_instance() {
        // Unit supplies and demands: every basis is highly degenerate.
        let n = 12;
        let supply = vec![1.0; n];
        let demand = vec![1.0; n];
        let cost: Vec<f64> = (0..n * n).map(|k| (((k * 7919) % 97) as f64).sqrt()).collect();
        let sol = solve(&supply, &demand, &cost);
        check_feasible(&sol, &supply, &demand);
        check_dual_optimal(&sol, &supply, &demand, &cost);
        let assignment = super::super::hungarian::solve(n, &cost);
        let hung: f64 = assignment.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
        assert!((total(&sol, &cost, n) - hung).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn random_instances_are_feasible_and_dual_optimal(
                m in 1usize..7,
                n in 1usize..7,
                raw_s in proptest::collection::vec(0.0f64..3.0, 7),
                raw_d in proptest::collection::vec(0.01f64..3.0, 7),
                raw_c in proptest::collection::vec(0.0f64..10.0, 49),
            ) {
                let supply = raw_s[..m].to_vec();
                let ts: f64 = supply.iter().sum();
                let td: f64 = raw_d[..n].iter().sum();
                // Rescale demands to the supply total, then pin the last one.
                let mut demand: Vec<f64> = raw_d[..n].iter().map(|d| d * ts / td).collect();
                let head: f64 = demand[..n - 1].iter().sum();
                demand[n - 1] = (ts - head).max(0.0);
                let cost = raw_c[..m * n].to_vec();
                let sol = solve(&supply, &demand, &cost);
                let rs: f64 = sol.flows.iter().map(|f| f.mass).sum();
                prop_assert!((rs - ts).abs() < 1e-9);
                check_dual_optimal(&sol, &supply, &demand, &cost);
            }
        }
    }
}


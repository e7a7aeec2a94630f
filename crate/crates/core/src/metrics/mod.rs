//! Wasserstein distance between persistence diagrams and optimal partial
//! transport between persistence measures.
//!
//! The ground cost between two locations is `‖x − y‖_q^p`; a location paired
//! with the diagonal is paired with its own projection
//! `x^⊤ = ((b + d) / 2, (b + d) / 2)`.

mod hungarian;
mod measure;
mod transport;

use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};

pub use measure::{diagram_to_measure, Atom, PersistenceMeasure};

/// Exponents of a `W_{p,q}` / `OT_{p,q}` distance. `q` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub p: f64,
    pub q: f64,
}

impl Order {
    pub const W2: Order = Order { p: 2.0, q: 2.0 };

    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::arg(format!("p must be a finite real >= 1, got {p}")));
        }
        if !(q >= 1.0) {
            return Err(Error::arg(format!("q must lie in [1, inf], got {q}")));
        }
        Ok(Self { p, q })
    }

    fn pow_p(&self, x: f64) -> f64 {
        if self.p == 1.0 {
            x
        } else if self.p == 2.0 {
            x * x
        } else {
            x.powf(self.p)
        }
    }

    /// `cost^(1/p)`.
    pub fn root(&self, cost: f64) -> f64 {
        let cost = cost.max(0.0);
        if self.p == 1.0 {
            cost
        } else if self.p == 2.0 {
            cost.sqrt()
        } else {
            cost.powf(1.0 / self.p)
        }
    }

    fn norm_cost(&self, dx: f64, dy: f64) -> f64 {
        let (dx, dy) = (dx.abs(), dy.abs());
        if self.q == f64::INFINITY {
            self.pow_p(dx.max(dy))
        } else if self.q == self.p {
            self.pow_p(dx) + self.pow_p(dy)
        } else if self.q == 1.0 {
            self.pow_p(dx + dy)
        } else if self.q == 2.0 {
            self.pow_p(dx.hypot(dy))
        } else {
            (dx.powf(self.q) + dy.powf(self.q)).powf(self.p / self.q)
        }
    }

    /// `‖x − y‖_q^p`.
    pub fn ground_cost(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        self.norm_cost(x.0 - y.0, x.1 - y.1)
    }

    /// `‖x − x^⊤‖_q^p`.
    pub fn diagonal_cost(&self, x: (f64, f64)) -> f64 {
        let h = (x.1 - x.0) / 2.0;
        self.norm_cost(h, h)
    }
}

impl Default for Order {
    fn default() -> Self {
        Self::W2
    }
}

/// One side of a transported mass: an atom (diagram point) index or the
/// diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Atom(usize),
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub source: Endpoint,
    pub target: Endpoint,
    pub mass: f64,
}

/// Certificate of an optimal pairing. Atom indices refer to the distinct
/// points of the source and target diagrams (or atoms of the measures);
/// `cost` is the optimal value before taking the `p`-th root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub pairs: Vec<PlanEntry>,
    pub cost: f64,
}

impl TransportPlan {
    /// Mass leaving each source atom and arriving at each target atom.
    pub fn marginals(&self, n_source: usize, n_target: usize) -> (Vec<f64>, Vec<f64>) {
        let mut src = vec![0.0; n_source];
        let mut tgt = vec![0.0; n_target];
        for e in &self.pairs {
            if let Endpoint::Atom(i) = e.source {
                src[i] += e.mass;
            }
            if let Endpoint::Atom(j) = e.target {
                tgt[j] += e.mass;
            }
        }
        (src, tgt)
    }

    /// `Σ mass · cost(pair)` for the given atom locations.
    pub fn recompute_cost(&self, source: &[(f64, f64)], target: &[(f64, f64)], order: Order) -> f64 {
        self.pairs
            .iter()
            .map(|e| {
                let c = match (e.source, e.target) {
                    (Endpoint::Atom(i), Endpoint::Atom(j)) => order.ground_cost(source[i], target[j]),
                    (Endpoint::Atom(i), Endpoint::Diagonal) => order.diagonal_cost(source[i]),
                    (Endpoint::Diagonal, Endpoint::Atom(j)) => order.diagonal_cost(target[j]),
                    (Endpoint::Diagonal, Endpoint::Diagonal) => 0.0,
                };
                e.mass * c
            })
            .sum()
    }
}

/// Optimal matching between two point lists (multiplicities expanded).
/// `forward[i]` is the partner of `a[i]` in `b`, or `None` for the diagonal;
/// `backward[j]` likewise for `b[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub forward: Vec<Option<usize>>,
    pub backward: Vec<Option<usize>>,
    pub cost: f64,
}

/// Sum of a matching's pair costs, added in ascending order so the value does
/// not depend on which diagram is listed first.
pub fn matching_cost(a: &[(f64, f64)], b: &[(f64, f64)], forward: &[Option<usize>], order: Order) -> f64 {
    let mut used = vec![false; b.len()];
    let mut terms: Vec<f64> = Vec::with_capacity(a.len() + b.len());
    for (i, f) in forward.iter().enumerate() {
        terms.push(match *f {
            Some(j) => {
                used[j] = true;
                order.ground_cost(a[i], b[j])
            }
            None => order.diagonal_cost(a[i]),
        });
    }
    terms.extend(used.iter().enumerate().filter(|(_, u)| !**u).map(|(j, _)| order.diagonal_cost(b[j])));
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Minimum-cost matching of `a` against `b`, each augmented by the diagonal
/// projections of the other side, solved as a square assignment.
pub fn optimal_matching(a: &[(f64, f64)], b: &[(f64, f64)], order: Order) -> Matching {
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let mut cost = vec![0.0; n * n];
    for i in 0..n1 {
        let diag = order.diagonal_cost(a[i]);
        let row = &mut cost[i * n..(i + 1) * n];
        for j in 0..n2 {
            row[j] = order.ground_cost(a[i], b[j]);
        }
        row[n2..].fill(diag);
    }
    for i in n1..n {
        let row = &mut cost[i * n..(i + 1) * n];
        for j in 0..n2 {
            row[j] = order.diagonal_cost(b[j]);
        }
    }
    let assignment = hungarian::solve(n, &cost);
    let mut forward = vec![None; n1];
    let mut backward = vec![None; n2];
    for i in 0..n1 {
        let j = assignment[i];
        if j < n2 && cost[i * n + j] <= order.diagonal_cost(a[i]) + order.diagonal_cost(b[j]) {
            forward[i] = Some(j);
            backward[j] = Some(i);
        }
    }
    let cost = matching_cost(a, b, &forward, order);
    Matching { forward, backward, cost }
}

fn expanded_owner(d: &PersistenceDiagram) -> Vec<usize> {
    d.points().iter().enumerate().flat_map(|(k, p)| std::iter::repeat_n(k, p.multiplicity as usize)).collect()
}

/// Plan over distinct diagram points from a matching over expanded points.
pub(crate) fn plan_from_matching(d1: &PersistenceDiagram, d2: &PersistenceDiagram, m: &Matching) -> TransportPlan {
    let (o1, o2) = (expanded_owner(d1), expanded_owner(d2));
    let mut entries: Vec<(Endpoint, Endpoint)> = Vec::with_capacity(o1.len() + o2.len());
    for (i, f) in m.forward.iter().enumerate() {
        entries.push((Endpoint::Atom(o1[i]), f.map_or(Endpoint::Diagonal, |j| Endpoint::Atom(o2[j]))));
    }
    for (j, b) in m.backward.iter().enumerate() {
        if b.is_none() {
            entries.push((Endpoint::Diagonal, Endpoint::Atom(o2[j])));
        }
    }
    entries.sort();
    let mut pairs: Vec<PlanEntry> = Vec::new();
    for (source, target) in entries {
        match pairs.last_mut() {
            Some(last) if last.source == source && last.target == target => last.mass += 1.0,
            _ => pairs.push(PlanEntry { source, target, mass: 1.0 }),
        }
    }
    TransportPlan { pairs, cost: m.cost }
}

/// `W_{p,q}(D1, D2)` with an optimal plan.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, order: Order) -> Result<(f64, TransportPlan)> {
    let order = Order::new(order.p, order.q)?;
    if d1.dimension() != d2.dimension() {
        return Err(Error::arg(format!(
            "diagrams of different homology degrees ({} and {})",
            d1.dimension(),
            d2.dimension()
        )));
    }
    let m = optimal_matching(&d1.expanded(), &d2.expanded(), order);
    let plan = plan_from_matching(d1, d2, &m);
    Ok((order.root(m.cost), plan))
}

/// `W_{p,q}(D, D_∅)` in closed form.
pub fn total_persistence(d: &PersistenceDiagram, order: Order) -> Result<f64> {
    let order = Order::new(order.p, order.q)?;
    let mut terms: Vec<f64> = d.expanded().into_iter().map(|x| order.diagonal_cost(x)).collect();
    terms.sort_by(f64::total_cmp);
    Ok(order.root(terms.iter().sum()))
}

/// `OT_{p,q}(μ, ν)` with an optimal plan.
///
/// Each side gets a diagonal node holding the other side's total mass; the
/// balanced problem is solved exactly by the network simplex method.
pub fn ot_distance(mu: &PersistenceMeasure, nu: &PersistenceMeasure, order: Order) -> Result<(f64, TransportPlan)> {
    let order = Order::new(order.p, order.q)?;
    if mu.dimension() != nu.dimension() {
        return Err(Error::arg(format!(
            "measures of different homology degrees ({} and {})",
            mu.dimension(),
            nu.dimension()
        )));
    }
    let (a, b) = (mu.atoms(), nu.atoms());
    let (m, n) = (a.len(), b.len());
    if m + n == 0 {
        return Ok((0.0, TransportPlan { pairs: Vec::new(), cost: 0.0 }));
    }
    let mut supply: Vec<f64> = a.iter().map(|x| x.mass).collect();
    supply.push(nu.total_mass());
    let mut demand: Vec<f64> = b.iter().map(|x| x.mass).collect();
    demand.push(mu.total_mass());
    let cols = n + 1;
    let mut cost = vec![0.0; (m + 1) * cols];
    for i in 0..m {
        for j in 0..n {
            cost[i * cols + j] = order.ground_cost(a[i].coords(), b[j].coords());
        }
        cost[i * cols + n] = order.diagonal_cost(a[i].coords());
    }
    for j in 0..n {
        cost[m * cols + j] = order.diagonal_cost(b[j].coords());
    }
    let sol = transport::solve(&supply, &demand, &cost);
    let primal: f64 = sol.flows.iter().map(|f| f.mass * cost[f.source * cols + f.target]).sum();
    let dual: f64 = supply.iter().zip(&sol.row_potentials).map(|(s, u)| s * u).sum::<f64>()
        + demand.iter().zip(&sol.col_potentials).map(|(d, v)| d * v).sum::<f64>();
    debug_assert!((primal - dual).abs() <= 1e-8 * (1.0 + primal.abs()), "transport duality gap {primal} vs {dual}");
    let mut pairs: Vec<PlanEntry> = sol
        .flows
        .iter()
        .filter(|f| f.mass > 0.0 && !(f.source == m && f.target == n))
        .map(|f| PlanEntry {
            source: if f.source == m { Endpoint::Diagonal } else { Endpoint::Atom(f.source) },
            target: if f.target == n { Endpoint::Diagonal } else { Endpoint::Atom(f.target) },
            mass: f.mass,
        })
        .collect();
    pairs.sort_by_key(|x| (x.source, x.target));
    let mut plan = TransportPlan { pairs, cost: 0.0 };
    let src: Vec<(f64, f64)> = a.iter().map(|x| x.coords()).collect();
    let tgt: Vec<(f64, f64)> = b.iter().map(|x| x.coords()).collect();
    plan.cost = plan.recompute_cost(&src, &tgt, order).max(0.0);
    Ok((order.root(plan.cost), plan))
}

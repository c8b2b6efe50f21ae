//! Exact-rational transportation solver.
//!
//! Successive shortest augmenting paths on the bipartite network
//! `source -> supply i -> demand j -> sink`, with Bellman-Ford on the
//! residual graph. Scaling all masses by a common denominator makes the
//! instance integral, so the number of augmentations is finite; every step
//! is exact.

use crate::rational::Rational;

struct Arc {
    to: usize,
    cap: Rational,
    cost: Rational,
}

struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    // Forward arc at an even index, its residual twin right after it.
    fn add_arc(&mut self, from: usize, to: usize, cap: Rational, cost: Rational) {
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost: cost.clone() });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: Rational::zero(),
            cost: -cost,
        });
    }

    /// Shortest path by residual cost; returns the arc used to enter each node.
    fn shortest_path(&self, source: usize, sink: usize) -> Option<Vec<Option<usize>>> {
        let nodes = self.adj.len();
        let mut dist: Vec<Option<Rational>> = vec![None; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = Some(Rational::zero());
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                let Some(du) = dist[u].clone() else { continue };
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap.is_zero() {
                        continue;
                    }
                    let cand = &du + &arc.cost;
                    if dist[arc.to].as_ref().is_none_or(|d| cand < *d) {
                        dist[arc.to] = Some(cand);
                        via[arc.to] = Some(a);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[sink].as_ref()?;
        Some(via)
    }
}

/// Minimum of `sum d[i][j] f[i][j]` over flows with row sums `supply` and
/// column sums `demand`. Both sides must carry the same total mass.
pub fn min_cost_transport(supply: &[Rational], demand: &[Rational], dist: &[Vec<Rational>]) -> Rational {
    transport_plan(supply, demand, dist).0
}

/// Like [`min_cost_transport`], also returning an optimal flow `f[i][j]`.
pub fn transport_plan(
    supply: &[Rational],
    demand: &[Rational],
    dist: &[Vec<Rational>],
) -> (Rational, Vec<Vec<Rational>>) {
    let s = supply.len();
    let t = demand.len();
    debug_assert_eq!(dist.len(), s);
    let source = 0;
    let sink = s + t + 1;
    let total: Rational = supply.iter().sum();
    let mut net = Network::new(s + t + 2);
    for (i, x) in supply.iter().enumerate() {
        if !x.is_zero() {
            net.add_arc(source, 1 + i, x.clone(), Rational::zero());
        }
    }
    for (j, y) in demand.iter().enumerate() {
        if !y.is_zero() {
            net.add_arc(1 + s + j, sink, y.clone(), Rational::zero());
        }
    }
    let mut flow_arc = vec![vec![None; t]; s];
    for i in 0..s {
        if supply[i].is_zero() {
            continue;
        }
        for j in 0..t {
            if !demand[j].is_zero() {
                flow_arc[i][j] = Some(net.arcs.len());
                net.add_arc(1 + i, 1 + s + j, total.clone(), dist[i][j].clone());
            }
        }
    }

    let mut shipped = Rational::zero();
    let mut cost = Rational::zero();
    while shipped < total {
        let Some(via) = net.shortest_path(source, sink) else { break };
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let a = via[v].expect("path reaches the sink");
            path.push(a);
            v = net.arcs[a ^ 1].to;
        }
        let bottleneck = path
            .iter()
            .map(|&a| net.arcs[a].cap.clone())
            .min()
            .expect("non-empty path");
        for &a in &path {
            net.arcs[a].cap -= &bottleneck;
            net.arcs[a ^ 1].cap += &bottleneck;
            cost += &net.arcs[a].cost * &bottleneck;
        }
        shipped += bottleneck;
    }
    // flow on an arc is the capacity its twin has gained
    let plan = flow_arc
        .iter()
        .map(|row| {
            row.iter()
                .map(|a| a.map_or_else(Rational::zero, |a| net.arcs[a ^ 1].cap.clone()))
                .collect()
        })
        .collect();
    (cost, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn line_metric_moves_mass_the_short_way() {
        // points 0, 1, 2 on a line with unit spacing, normalized by 2
        let d: Vec<Vec<Rational>> = (0..3)
            .map(|i: i64| (0..3).map(|j: i64| r((i - j).abs(), 2)).collect())
            .collect();
        let x = [r(1, 1), r(0, 1), r(0, 1)];
        let y = [r(0, 1), r(0, 1), r(1, 1)];
        assert_eq!(min_cost_transport(&x, &y, &d), r(1, 1));
        let y = [r(0, 1), r(1, 2), r(1, 2)];
        assert_eq!(min_cost_transport(&x, &y, &d), r(3, 4));
    }

    #[test]
    fn needs_rerouting_through_residual_arcs() {
        // Greedy cheapest-first would ship 0->0; optimum ships 0->1, 1->0.
        let d = vec![vec![r(0, 1), r(1, 10)], vec![r(1, 10), r(1, 1)]];
        let x = [r(1, 2), r(1, 2)];
        let y = [r(1, 2), r(1, 2)];
        assert_eq!(min_cost_transport(&x, &y, &d), r(1, 10));
        let (_, plan) = transport_plan(&x, &y, &d);
        assert_eq!(plan, vec![vec![r(0, 1), r(1, 2)], vec![r(1, 2), r(0, 1)]]);
    }
}

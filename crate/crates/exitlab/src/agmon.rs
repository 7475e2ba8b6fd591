//! Agmon distance on the grid: shortest paths for the degenerate metric
//! g(x) = |∇f(x)| (tangential |∇_T f| on the boundary), and the two
//! inequality checks that the sharp exit-rate asymptotics require.

use crate::grid::{DomainGrid, Point};
use crate::landscape::Landscape;
use crate::potential::PotentialField;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgmonError {
    #[error("grid graph is disconnected: no path between the query nodes")]
    DisconnectedGraph,
    #[error("landscape carries no hypothesis report")]
    HypothesesNotChecked,
}

/// Weighted grid graph for the Agmon metric. Nodes are all grid nodes of the
/// closed domain; edges join axis neighbors (and diagonal neighbors in 2D)
/// with trapezoid weights `(g(u)+g(v))/2 · |u-v|`.
pub struct AgmonGraph {
    grid: DomainGrid,
    /// Metric value g at every node, row-major `i * ny + j`.
    g: Vec<f64>,
}

impl AgmonGraph {
    pub fn build(p: &PotentialField, grid: &DomainGrid) -> AgmonGraph {
        let mut g = vec![0.0; grid.nx * grid.ny];
        for (i, j) in grid.all_nodes() {
            let x = grid.node_pos(i, j);
            g[i * grid.ny + j] = if grid.is_boundary(i, j) {
                tangential_g(p, grid, i, j, x)
            } else {
                p.grad_norm(x)
            };
        }
        AgmonGraph {
            grid: grid.clone(),
            g,
        }
    }

    pub fn grid(&self) -> &DomainGrid {
        &self.grid
    }

    fn node_id(&self, i: usize, j: usize) -> usize {
        i * self.grid.ny + j
    }

    fn neighbors(&self, i: usize, j: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(8);
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let deltas: &[(i64, i64)] = if self.grid.dim() == 1 {
            &[(-1, 0), (1, 0)]
        } else {
            &[
                (-1, 0),
                (1, 0),
                (0, -1),
                (0, 1),
                (-1, -1),
                (-1, 1),
                (1, -1),
                (1, 1),
            ]
        };
        for &(di, dj) in deltas {
            let ii = i as i64 + di;
            let jj = j as i64 + dj;
            if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                continue;
            }
            let (ii, jj) = (ii as usize, jj as usize);
            let dist = ((di as f64 * self.grid.dx).powi(2)
                + (dj as f64 * self.grid.dy).powi(2))
            .sqrt();
            out.push((ii, jj, dist));
        }
        out
    }

    /// Single-source Dijkstra: distances from the node nearest to `from`.
    pub fn distances_from(&self, from: Point) -> Vec<f64> {
        let (si, sj) = self.grid.nearest_node(from);
        let n = self.grid.nx * self.grid.ny;
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[self.node_id(si, sj)] = 0.0;
        heap.push(HeapItem {
            cost: 0.0,
            node: (si, sj),
        });
        while let Some(HeapItem { cost, node: (i, j) }) = heap.pop() {
            let id = self.node_id(i, j);
            if cost > dist[id] {
                continue;
            }
            let gi = self.g[id];
            for (ii, jj, d) in self.neighbors(i, j) {
                let nid = self.node_id(ii, jj);
                let w = 0.5 * (gi + self.g[nid]) * d;
                let next = cost + w;
                if next < dist[nid] {
                    dist[nid] = next;
                    heap.push(HeapItem {
                        cost: next,
                        node: (ii, jj),
                    });
                }
            }
        }
        dist
    }

    pub fn value_at(&self, dist: &[f64], to: Point) -> f64 {
        let (i, j) = self.grid.nearest_node(to);
        dist[self.node_id(i, j)]
    }
}

// g on the boundary: norm of the tangential gradient. At rectangle corners
// the loop has two tangent directions; the smaller directional slope is used.
fn tangential_g(p: &PotentialField, grid: &DomainGrid, i: usize, j: usize, x: Point) -> f64 {
    if grid.dim() == 1 {
        return 0.0;
    }
    let g = p.grad(x);
    let on_x_face = i == 0 || i == grid.nx - 1;
    let on_y_face = j == 0 || j == grid.ny - 1;
    match (on_x_face, on_y_face) {
        (true, true) => g[0].abs().min(g[1].abs()),
        (true, false) => g[1].abs(),
        (false, true) => g[0].abs(),
        (false, false) => unreachable!(),
    }
}

struct HeapItem {
    cost: f64,
    node: (usize, usize),
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost
    }
}
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: min-heap on cost
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Agmon distance between two points (snapped to nearest grid nodes).
/// The source is canonicalized to the smaller node index so that the pair
/// (x, y) and (y, x) run the identical accumulation and agree bit-for-bit.
pub fn agmon_distance(graph: &AgmonGraph, x: Point, y: Point) -> Result<f64, AgmonError> {
    let nx = graph.grid.nearest_node(x);
    let ny = graph.grid.nearest_node(y);
    let (from, to) = if nx <= ny { (nx, ny) } else { (ny, nx) };
    let dist = graph.distances_from(graph.grid.node_pos(from.0, from.1));
    let v = dist[graph.node_id(to.0, to.1)];
    if v.is_infinite() {
        return Err(AgmonError::DisconnectedGraph);
    }
    Ok(v)
}

/// Per-channel outcome of the theorem-1 inequality checks.
#[derive(Debug, Clone, Serialize)]
pub struct Da2Check {
    pub channel: usize,
    pub d_a_to_complement: f64,
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Th1Report {
    /// f(z_1) - f(x_0) > f(z_n) - f(z_1)
    pub da1_lhs: f64,
    pub da1_rhs: f64,
    pub da1_holds: bool,
    pub da2: Vec<Da2Check>,
    pub all_hold: bool,
}

/// Check the inequalities (barrier dominance and Agmon separation of each
/// channel from the complement of its basin) under which the sharp
/// per-channel exit asymptotics are proved.
pub fn check_th1_conditions(
    landscape: &Landscape,
    graph: &AgmonGraph,
) -> Result<Th1Report, AgmonError> {
    if landscape.boundary_minima.is_empty() {
        return Err(AgmonError::HypothesesNotChecked);
    }
    let zs = &landscape.boundary_minima;
    let x0 = landscape
        .global_minimum()
        .ok_or(AgmonError::HypothesesNotChecked)?;
    let fz1 = zs[0].f_value;
    let fzn = zs[zs.len() - 1].f_value;
    let da1_lhs = fz1 - x0.f_value;
    let da1_rhs = fzn - fz1;
    let da1_holds = da1_lhs > da1_rhs;

    let perim = landscape.grid.perimeter();
    let bnodes = landscape.grid.boundary_nodes();
    let mut da2 = Vec::with_capacity(zs.len());
    for (ci, z) in zs.iter().enumerate() {
        let dist = graph.distances_from(z.location);
        // complement of the open basin arc, as boundary nodes
        let mut dmin = f64::INFINITY;
        for b in &bnodes {
            let inside_basin = if landscape.grid.dim() == 1 {
                (b.arc - z.arc).abs() < 0.5
            } else {
                z.basin.contains(b.arc, perim)
            };
            if !inside_basin {
                dmin = dmin.min(graph.value_at(&dist, b.pos));
            }
        }
        let threshold = (fzn - z.f_value).max(z.f_value - fz1);
        da2.push(Da2Check {
            channel: ci,
            d_a_to_complement: dmin,
            threshold,
            holds: dmin > threshold,
        });
    }
    let all_hold = da1_holds && da2.iter().all(|c| c.holds);
    Ok(Th1Report {
        da1_lhs,
        da1_rhs,
        da1_holds,
        da2,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DomainGrid, DomainShape};
    use approx::assert_relative_eq;

    #[test]
    fn monotone_segment_equals_f_difference() {
        // f = x^2 on [0, 1]: d_a(1, 0) = ∫ 2t dt = 1 = f(1) - f(0)
        let p = PotentialField::polynomial(
            1,
            vec![crate::potential::MonomialTerm { coeff: 1.0, px: 2, py: 0 }],
        );
        let g = DomainGrid::new(DomainShape::Interval { a: 0.0, b: 1.0 }, (2049, 1));
        let graph = AgmonGraph::build(&p, &g);
        let d = agmon_distance(&graph, [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 4.0 * g.dx, "d = {d}");
    }

    #[test]
    fn zero_distance_to_self() {
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (512, 1));
        let graph = AgmonGraph::build(&p, &g);
        assert_eq!(agmon_distance(&graph, [0.3, 0.0], [0.3, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn p1_end_to_end_distance() {
        // monotone ascent/descent pieces through -1, 0, +1:
        // 0.1936 + 1 + 1 + 0.1936 = 2.3872
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (4097, 1));
        let graph = AgmonGraph::build(&p, &g);
        let d = agmon_distance(&graph, [-1.2, 0.0], [1.2, 0.0]).unwrap();
        assert!((d - 2.3872).abs() < 8.0 * g.dx, "d = {d}");
    }

    #[test]
    fn symmetry_is_exact() {
        let p = PotentialField::catalog("P3").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P3").unwrap(), (65, 65));
        let graph = AgmonGraph::build(&p, &g);
        for (a, b) in [([1.0, 0.0], [-1.0, 0.0]), ([0.3, 0.7], [-0.9, -0.2])] {
            let dab = agmon_distance(&graph, a, b).unwrap();
            let dba = agmon_distance(&graph, b, a).unwrap();
            assert_eq!(dab, dba);
        }
    }

    #[test]
    fn triangle_inequality_on_graph() {
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (1025, 1));
        let graph = AgmonGraph::build(&p, &g);
        let pts = [[-1.2, 0.0], [-0.5, 0.0], [0.4, 0.0], [1.1, 0.0]];
        for a in pts {
            for b in pts {
                for c in pts {
                    let ab = agmon_distance(&graph, a, b).unwrap();
                    let ac = agmon_distance(&graph, a, c).unwrap();
                    let cb = agmon_distance(&graph, c, b).unwrap();
                    assert!(ab <= ac + cb + 1e-12);
                }
            }
        }
    }

    #[test]
    fn th1_conditions_p1() {
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (2049, 1));
        let l = Landscape::analyze(&p, &g).unwrap();
        let graph = AgmonGraph::build(&p, &g);
        let r = check_th1_conditions(&l, &graph).unwrap();
        assert!(r.da1_holds); // 0.1936 > 0
        assert!(r.all_hold, "{:?}", r);
        // the separation of an endpoint from the other endpoint is the full
        // double-well Agmon length
        assert!((r.da2[0].d_a_to_complement - 2.3872).abs() < 0.01);
    }

    #[test]
    fn th1_conditions_p3_da1_fails_by_equality() {
        let p = PotentialField::catalog("P3").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P3").unwrap(), (129, 129));
        let l = Landscape::analyze(&p, &g).unwrap();
        let graph = AgmonGraph::build(&p, &g);
        let r = check_th1_conditions(&l, &graph).unwrap();
        // f(z_1) - f(x_0) = 1 and f(z_4) - f(z_1) = 1: strict inequality fails
        assert_relative_eq!(r.da1_lhs, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.da1_rhs, 1.0, epsilon = 1e-9);
        assert!(!r.da1_holds);
        assert!(!r.all_hold);
    }
}

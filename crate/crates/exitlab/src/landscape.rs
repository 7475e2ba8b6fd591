//! Critical-point and boundary analysis of a potential on a bounded domain:
//! Newton-refined critical points with Morse classification, local minima of
//! the boundary restriction (the generalized saddle points), their basins of
//! attraction for the tangential gradient flow, sublevel-set components and
//! the geometric hypothesis checks used by the rate formulas.

use crate::grid::{BoundaryArc, DomainGrid, Face, Point};
use crate::potential::PotentialField;
use serde::Serialize;
use thiserror::Error;

pub const NEWTON_TOL: f64 = 1e-10;
pub const MORSE_TOL: f64 = 1e-8;
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Relative tie tolerance when counting global boundary minima.
pub const TIE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LandscapeError {
    #[error("non-Morse critical point at {location:?}: Hessian eigenvalue {eigenvalue:.3e}")]
    NonMorse { location: Point, eigenvalue: f64 },
    #[error("gradient vanishes on the boundary at {location:?}")]
    GradientVanishesOnBoundary { location: Point },
    #[error("degenerate critical point of the boundary restriction at {location:?}")]
    DegenerateBoundaryCritical { location: Point },
    #[error("sublevel set {{f < {level}}} contains no grid node")]
    EmptySublevel { level: f64 },
}

/// An interior critical point, classified by its Hessian signature.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: Point,
    pub f_value: f64,
    /// Morse index: number of negative Hessian eigenvalues (0 = minimum).
    pub index: usize,
    /// Sorted Hessian eigenvalues (one entry for d = 1).
    pub hess_eigenvalues: Vec<f64>,
}

impl CriticalPoint {
    pub fn is_minimum(&self) -> bool {
        self.index == 0
    }

    pub fn hess_det(&self) -> f64 {
        self.hess_eigenvalues.iter().product()
    }
}

/// A local minimum of `f` restricted to the boundary.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryMinimum {
    pub location: Point,
    pub f_value: f64,
    /// Outward normal derivative of f.
    pub normal_derivative: f64,
    /// Determinant of the tangential Hessian; 1.0 by convention for d = 1.
    pub tangential_hess_det: f64,
    /// Arc-length position on the boundary loop.
    pub arc: f64,
    /// Basin of attraction for the tangential flow: the open arc between the
    /// flanking boundary maxima (d = 2) or the endpoint itself (d = 1).
    pub basin: BoundaryArc,
    /// Position in the ordering f(z_1) <= ... <= f(z_n): 0-based.
    pub rank: usize,
    pub face: Face,
}

impl BoundaryMinimum {
    /// Generalized-saddle membership: local boundary minimum with positive
    /// outward normal derivative.
    pub fn is_generalized_saddle(&self) -> bool {
        self.normal_derivative > 0.0
    }
}

/// One connected component of a sublevel set {f < level}.
#[derive(Debug, Clone, Serialize)]
pub struct SublevelComponent {
    pub id: usize,
    pub node_count: usize,
    /// Indices (into the critical point list) of the minima this component contains.
    pub minima_contained: Vec<usize>,
    pub touches_boundary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentDescriptor {
    pub id: usize,
    pub node_count: usize,
    pub minima_contained: Vec<usize>,
}

/// Outcome of the geometric hypothesis checks.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h_morse: bool,
    pub h_min: bool,
    /// Number of local minima of the boundary restriction.
    pub n: usize,
    /// Number of global minima of the boundary restriction (ties at 1e-9 relative).
    pub n_0: usize,
    /// Number of boundary contacts of the sublevel component holding the argmin.
    pub k_0: usize,
    pub component_c: Option<ComponentDescriptor>,
    /// The contact points of C-closure with the boundary (subset of the z_i).
    pub boundary_contacts: Vec<Point>,
    pub failure_reasons: Vec<String>,
}

/// Full landscape analysis of one (potential, grid) pair.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub potential: PotentialField,
    pub grid: DomainGrid,
    pub critical_points: Vec<CriticalPoint>,
    pub boundary_minima: Vec<BoundaryMinimum>,
    pub report: HypothesisReport,
}

impl Landscape {
    pub fn analyze(potential: &PotentialField, grid: &DomainGrid) -> Result<Landscape, LandscapeError> {
        let critical_points = find_critical_points(potential, grid)?;
        let boundary_minima = boundary_minima(potential, grid)?;
        let report = check_hypotheses(potential, grid, &critical_points, &boundary_minima);
        Ok(Landscape {
            potential: potential.clone(),
            grid: grid.clone(),
            critical_points,
            boundary_minima,
            report,
        })
    }

    /// Global minimum of f over the located critical points.
    pub fn global_minimum(&self) -> Option<&CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|c| c.is_minimum())
            .min_by(|a, b| a.f_value.partial_cmp(&b.f_value).unwrap())
    }

    /// The interior minimum nearest to a given point (used to attribute an
    /// exit channel to the well that feeds it).
    pub fn nearest_minimum(&self, p: Point) -> Option<&CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|c| c.is_minimum())
            .min_by(|a, b| {
                dist2(a.location, p)
                    .partial_cmp(&dist2(b.location, p))
                    .unwrap()
            })
    }

    /// Channel index of a boundary point: containing basin, else nearest z_i.
    pub fn channel_of(&self, p: Point) -> Option<usize> {
        let s = self.grid.arc_of(p);
        let perim = self.grid.perimeter();
        if self.grid.dim() == 1 {
            return self
                .boundary_minima
                .iter()
                .position(|z| (z.arc - s).abs() < 0.5);
        }
        if let Some(i) = self
            .boundary_minima
            .iter()
            .position(|z| z.basin.contains(s, perim))
        {
            return Some(i);
        }
        // separatrix / corner hit: nearest z_i along the loop
        self.boundary_minima
            .iter()
            .enumerate()
            .min_by(|a, b| {
                loop_dist(a.1.arc, s, perim)
                    .partial_cmp(&loop_dist(b.1.arc, s, perim))
                    .unwrap()
            })
            .map(|(i, _)| i)
    }
}

fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn loop_dist(a: f64, b: f64, perim: f64) -> f64 {
    let d = (a - b).abs() % perim;
    d.min(perim - d)
}

/// Locate all distinct critical points reachable by Newton iteration from
/// low-|∇f| seed nodes, classified by Hessian signature.
pub fn find_critical_points(
    p: &PotentialField,
    grid: &DomainGrid,
) -> Result<Vec<CriticalPoint>, LandscapeError> {
    let mut norms: Vec<(f64, Point)> = grid
        .all_nodes()
        .iter()
        .map(|&(i, j)| {
            let x = grid.node_pos(i, j);
            (p.grad_norm(x), x)
        })
        .collect();
    norms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // seeds: nodes with |∇f| below the 10th percentile
    let n_seeds = (norms.len() / 10).max(8).min(norms.len());
    let mut found: Vec<CriticalPoint> = Vec::new();
    for &(_, seed) in norms.iter().take(n_seeds) {
        if let Some(root) = newton(p, seed) {
            if !grid.shape.contains_closed(root) {
                continue;
            }
            if found
                .iter()
                .any(|c| dist2(c.location, root).sqrt() < DEDUP_RADIUS)
            {
                continue;
            }
            let h = p.hess(root);
            let eigs = sym_eigenvalues(h, p.dim());
            if let Some(&bad) = eigs.iter().find(|e| e.abs() < MORSE_TOL) {
                return Err(LandscapeError::NonMorse {
                    location: root,
                    eigenvalue: bad,
                });
            }
            let index = eigs.iter().filter(|&&e| e < 0.0).count();
            found.push(CriticalPoint {
                location: root,
                f_value: p.eval(root),
                index,
                hess_eigenvalues: eigs,
            });
        }
    }
    found.sort_by(|a, b| {
        a.location[0]
            .partial_cmp(&b.location[0])
            .unwrap()
            .then(a.location[1].partial_cmp(&b.location[1]).unwrap())
    });
    Ok(found)
}

fn newton(p: &PotentialField, seed: Point) -> Option<Point> {
    let mut x = seed;
    for _ in 0..80 {
        let g = p.grad(x);
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn < NEWTON_TOL * 1e-2 {
            return Some(x);
        }
        let h = p.hess(x);
        let step = match p.dim() {
            1 => {
                if h[0][0].abs() < 1e-14 {
                    return None;
                }
                [g[0] / h[0][0], 0.0]
            }
            _ => {
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                if det.abs() < 1e-14 {
                    return None;
                }
                [
                    (h[1][1] * g[0] - h[0][1] * g[1]) / det,
                    (h[0][0] * g[1] - h[1][0] * g[0]) / det,
                ]
            }
        };
        x = [x[0] - step[0], x[1] - step[1]];
        if !x[0].is_finite() || !x[1].is_finite() {
            return None;
        }
    }
    let g = p.grad_norm(x);
    if g < NEWTON_TOL {
        Some(x)
    } else {
        None
    }
}

fn sym_eigenvalues(h: [[f64; 2]; 2], dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![h[0][0]];
    }
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let r = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[0][1]).sqrt();
    vec![mean - r, mean + r]
}

/// All local minima of the boundary restriction, ordered by f ascending.
pub fn boundary_minima(
    p: &PotentialField,
    grid: &DomainGrid,
) -> Result<Vec<BoundaryMinimum>, LandscapeError> {
    for b in grid.boundary_nodes() {
        if p.grad_norm(b.pos) < 1e-10 {
            return Err(LandscapeError::GradientVanishesOnBoundary { location: b.pos });
        }
    }
    let mut minima = match grid.dim() {
        1 => boundary_minima_1d(p, grid),
        _ => boundary_minima_2d(p, grid)?,
    };
    minima.sort_by(|a, b| a.f_value.partial_cmp(&b.f_value).unwrap());
    for (rank, z) in minima.iter_mut().enumerate() {
        z.rank = rank;
    }
    Ok(minima)
}

fn boundary_minima_1d(p: &PotentialField, grid: &DomainGrid) -> Vec<BoundaryMinimum> {
    // the boundary of an interval is 0-dimensional: both endpoints are local
    // minima of the restriction, with unit tangential determinant
    grid.boundary_nodes()
        .iter()
        .map(|b| {
            let n = b.faces[0].outward_normal();
            let g = p.grad(b.pos);
            BoundaryMinimum {
                location: b.pos,
                f_value: p.eval(b.pos),
                normal_derivative: g[0] * n[0] + g[1] * n[1],
                tangential_hess_det: 1.0,
                arc: b.arc,
                basin: BoundaryArc { lo: b.arc, hi: b.arc },
                rank: 0,
                face: b.faces[0],
            }
        })
        .collect()
}

/// Critical points of f restricted to the boundary loop: refined locations,
/// loop-maxima arcs (basin separators) and minima records.
struct LoopCritical {
    arc: f64,
    pos: Point,
    f: f64,
    is_max: bool,
    face: Face,
    corner: bool,
}

fn boundary_minima_2d(
    p: &PotentialField,
    grid: &DomainGrid,
) -> Result<Vec<BoundaryMinimum>, LandscapeError> {
    let crits = loop_criticals(p, grid)?;
    let perim = grid.perimeter();
    let maxima: Vec<&LoopCritical> = crits.iter().filter(|c| c.is_max).collect();
    let mut out = Vec::new();
    for c in crits.iter().filter(|c| !c.is_max) {
        if c.corner {
            return Err(LandscapeError::DegenerateBoundaryCritical { location: c.pos });
        }
        // flanking maxima on the loop
        let prev = maxima
            .iter()
            .map(|m| (wrap_pos(c.arc - m.arc, perim), m.arc))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .map(|(_, a)| a)
            .unwrap_or(c.arc);
        let next = maxima
            .iter()
            .map(|m| (wrap_pos(m.arc - c.arc, perim), m.arc))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .map(|(_, a)| a)
            .unwrap_or(c.arc);
        let normal = c.face.outward_normal();
        let tangent = c.face.ccw_tangent();
        let g = p.grad(c.pos);
        let h = p.hess(c.pos);
        let tht = quad_form(h, tangent);
        if tht.abs() < MORSE_TOL {
            return Err(LandscapeError::DegenerateBoundaryCritical { location: c.pos });
        }
        out.push(BoundaryMinimum {
            location: c.pos,
            f_value: c.f,
            normal_derivative: g[0] * normal[0] + g[1] * normal[1],
            tangential_hess_det: tht,
            arc: c.arc,
            basin: BoundaryArc { lo: prev, hi: next },
            rank: 0,
            face: c.face,
        });
    }
    Ok(out)
}

fn wrap_pos(s: f64, p: f64) -> f64 {
    let r = s % p;
    if r <= 0.0 {
        r + p
    } else {
        r
    }
}

fn quad_form(h: [[f64; 2]; 2], t: Point) -> f64 {
    t[0] * t[0] * h[0][0] + 2.0 * t[0] * t[1] * h[0][1] + t[1] * t[1] * h[1][1]
}

/// Walk the boundary loop and extract the critical points of f|_∂Ω: corners
/// are treated as ordinary loop points (arc-length continuation).
fn loop_criticals(
    p: &PotentialField,
    grid: &DomainGrid,
) -> Result<Vec<LoopCritical>, LandscapeError> {
    let nodes = grid.boundary_nodes();
    let m = nodes.len();
    let fvals: Vec<f64> = nodes.iter().map(|b| p.eval(b.pos)).collect();
    let mut out = Vec::new();
    for k in 0..m {
        let fm = fvals[(k + m - 1) % m];
        let f0 = fvals[k];
        let fp = fvals[(k + 1) % m];
        let is_min = f0 < fm && f0 <= fp;
        let is_max = f0 > fm && f0 >= fp;
        if !is_min && !is_max {
            continue;
        }
        let b = &nodes[k];
        if b.corner {
            out.push(LoopCritical {
                arc: b.arc,
                pos: b.pos,
                f: f0,
                is_max,
                face: b.faces[0],
                corner: true,
            });
            continue;
        }
        // refine along the face by Newton on the tangential derivative
        let t = b.faces[0].ccw_tangent();
        let mut x = b.pos;
        for _ in 0..60 {
            let g = p.grad(x);
            let dt = g[0] * t[0] + g[1] * t[1];
            let h = p.hess(x);
            let d2 = quad_form(h, t);
            if d2.abs() < 1e-14 {
                break;
            }
            let step = dt / d2;
            x = [x[0] - step * t[0], x[1] - step * t[1]];
            if dt.abs() < 1e-13 {
                break;
            }
        }
        x = clamp_to_face(x, b.faces[0], grid);
        out.push(LoopCritical {
            arc: grid.arc_of(x),
            pos: x,
            f: p.eval(x),
            is_max,
            face: b.faces[0],
            corner: false,
        });
    }
    // deduplicate refinements that converged to the same point
    out.sort_by(|a, b| a.arc.partial_cmp(&b.arc).unwrap());
    out.dedup_by(|a, b| (a.arc - b.arc).abs() < 10.0 * DEDUP_RADIUS && a.is_max == b.is_max);
    Ok(out)
}

fn clamp_to_face(x: Point, face: Face, grid: &DomainGrid) -> Point {
    let (x0, x1, y0, y1) = match grid.shape {
        crate::grid::DomainShape::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
        _ => unreachable!("faces exist only on rectangles"),
    };
    match face {
        Face::XLow => [x0, x[1].clamp(y0, y1)],
        Face::XHigh => [x1, x[1].clamp(y0, y1)],
        Face::YLow => [x[0].clamp(x0, x1), y0],
        Face::YHigh => [x[0].clamp(x0, x1), y1],
    }
}

/// Basin of attraction of a boundary minimum (recomputed on demand; also
/// stored on the [`BoundaryMinimum`] record).
pub fn boundary_basin(
    z: &BoundaryMinimum,
    _p: &PotentialField,
    grid: &DomainGrid,
) -> BoundaryArc {
    if grid.dim() == 1 {
        BoundaryArc { lo: z.arc, hi: z.arc }
    } else {
        z.basin
    }
}

/// Flood-fill labelling of {f < level}: per-node component id (usize::MAX
/// outside the set) and per-component summaries.
fn flood_fill(
    p: &PotentialField,
    grid: &DomainGrid,
    level: f64,
) -> (Vec<usize>, Vec<SublevelComponent>) {
    let (nx, ny) = (grid.nx, grid.ny);
    let inside = |i: usize, j: usize| p.eval(grid.node_pos(i, j)) < level;
    let mut label = vec![usize::MAX; nx * ny];
    let lin = |i: usize, j: usize| i * ny + j;
    let mut comps: Vec<SublevelComponent> = Vec::new();
    for si in 0..nx {
        for sj in 0..ny {
            if !inside(si, sj) || label[lin(si, sj)] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![(si, sj)];
            label[lin(si, sj)] = id;
            let mut count = 0usize;
            let mut touches = false;
            while let Some((i, j)) = stack.pop() {
                count += 1;
                if grid.is_boundary(i, j) {
                    touches = true;
                }
                let mut neighbors: Vec<(usize, usize)> = Vec::with_capacity(4);
                if i > 0 {
                    neighbors.push((i - 1, j));
                }
                if i + 1 < nx {
                    neighbors.push((i + 1, j));
                }
                if grid.dim() == 2 {
                    if j > 0 {
                        neighbors.push((i, j - 1));
                    }
                    if j + 1 < ny {
                        neighbors.push((i, j + 1));
                    }
                }
                for (ii, jj) in neighbors {
                    if grid.is_boundary(ii, jj) {
                        touches = true;
                    }
                    if inside(ii, jj) && label[lin(ii, jj)] == usize::MAX {
                        label[lin(ii, jj)] = id;
                        stack.push((ii, jj));
                    }
                }
            }
            comps.push(SublevelComponent {
                id,
                node_count: count,
                minima_contained: Vec::new(),
                touches_boundary: touches,
            });
        }
    }
    (label, comps)
}

/// Connected components of the grid sublevel set {f < level} by axis-neighbor
/// flood fill.
pub fn sublevel_components(
    p: &PotentialField,
    grid: &DomainGrid,
    level: f64,
    minima: &[CriticalPoint],
) -> Result<Vec<SublevelComponent>, LandscapeError> {
    let (label, mut comps) = flood_fill(p, grid, level);
    if comps.is_empty() {
        return Err(LandscapeError::EmptySublevel { level });
    }
    for (mi, c) in minima.iter().enumerate() {
        if !c.is_minimum() {
            continue;
        }
        let (i, j) = grid.nearest_node(c.location);
        let id = label[i * grid.ny + j];
        if id != usize::MAX {
            comps[id].minima_contained.push(mi);
        }
    }
    Ok(comps)
}

/// Evaluate the geometric hypotheses; failures are reported, never thrown.
pub fn check_hypotheses(
    p: &PotentialField,
    grid: &DomainGrid,
    criticals: &[CriticalPoint],
    minima: &[BoundaryMinimum],
) -> HypothesisReport {
    let mut reasons = Vec::new();

    // [H1] / [H-Morse]: f and f|_∂Ω Morse, |∇f| != 0 on ∂Ω.
    // Morse-ness is established constructively: find_critical_points and
    // boundary_minima error out on degeneracies, so reaching here with
    // non-empty results means the checks passed on this grid.
    let mut grad_ok = true;
    for b in grid.boundary_nodes() {
        if p.grad_norm(b.pos) < 1e-10 {
            grad_ok = false;
            reasons.push(format!("|∇f| vanishes on ∂Ω near {:?}", b.pos));
            break;
        }
    }
    let h1 = grad_ok;
    let h_morse = h1;

    let n = minima.len();
    let fz1 = minima.first().map(|z| z.f_value).unwrap_or(f64::INFINITY);
    let n_0 = minima
        .iter()
        .filter(|z| z.f_value - fz1 <= TIE_REL_TOL * fz1.abs().max(1.0))
        .count();

    // [H2]: unique interior critical point which is the global minimum,
    // strictly below the boundary minimum.
    let interior_minima: Vec<&CriticalPoint> =
        criticals.iter().filter(|c| c.is_minimum()).collect();
    let mut h2 = true;
    if criticals.len() != 1 || interior_minima.len() != 1 {
        h2 = false;
        reasons.push(format!(
            "[H2] needs a unique interior critical point (found {} critical, {} minima)",
            criticals.len(),
            interior_minima.len()
        ));
    }
    let fmin_interior = interior_minima
        .iter()
        .map(|c| c.f_value)
        .fold(f64::INFINITY, f64::min);
    if !(fz1 > fmin_interior) {
        h2 = false;
        reasons.push("[H2] needs min_∂Ω f > min_Ω f".to_string());
    }
    if n == 0 {
        h2 = false;
        reasons.push("[H2] needs at least one boundary minimum".to_string());
    }

    // [H3]: outward normal derivative positive everywhere on ∂Ω.
    let mut h3 = true;
    'outer: for b in grid.boundary_nodes() {
        let g = p.grad(b.pos);
        for face in &b.faces {
            let nv = face.outward_normal();
            if g[0] * nv[0] + g[1] * nv[1] <= 0.0 {
                h3 = false;
                reasons.push(format!("[H3] fails at {:?}", b.pos));
                break 'outer;
            }
        }
    }

    // [H-Min] on the sublevel set {f < min_∂Ω f}.
    let mut h_min = true;
    let mut component_c = None;
    let mut boundary_contacts = Vec::new();
    let mut k_0 = 0;
    let (label, comps) = flood_fill(p, grid, fz1);
    if comps.is_empty() {
        h_min = false;
        reasons.push("[H-Min] sublevel set {f < min_∂Ω f} is empty".to_string());
    } else {
        // every interior local minimum must lie in the set
        for (mi, c) in criticals.iter().enumerate() {
            if c.is_minimum() && c.f_value >= fz1 {
                h_min = false;
                reasons.push(format!("[H-Min] local minimum {} above min_∂Ω f", mi));
            }
        }
        if comps.iter().any(|c| !c.touches_boundary) {
            h_min = false;
            reasons.push("[H-Min] a component closure of {f < min_∂Ω f} misses ∂Ω".to_string());
        }
        // all global minima of f in one component
        let fglobal = fmin_interior;
        let holder_ids: std::collections::HashSet<usize> = criticals
            .iter()
            .filter(|c| {
                c.is_minimum() && c.f_value - fglobal <= TIE_REL_TOL * fglobal.abs().max(1.0)
            })
            .map(|c| {
                let (i, j) = grid.nearest_node(c.location);
                label[i * grid.ny + j]
            })
            .collect();
        if holder_ids.len() == 1 && !holder_ids.contains(&usize::MAX) {
            let cid = *holder_ids.iter().next().unwrap();
            let c = &comps[cid];
            component_c = Some(ComponentDescriptor {
                id: c.id,
                node_count: c.node_count,
                minima_contained: c.minima_contained.clone(),
            });
            // contacts: global boundary minima with a C-node within reach
            let reach = 2.0 * grid.dx.max(grid.dy);
            for z in minima.iter().take(n_0) {
                let close = grid.all_nodes().into_iter().any(|(i, j)| {
                    label[i * grid.ny + j] == cid
                        && dist2(grid.node_pos(i, j), z.location).sqrt() <= reach
                });
                if close {
                    boundary_contacts.push(z.location);
                }
            }
            k_0 = boundary_contacts.len();
        } else {
            h_min = false;
            reasons.push(format!(
                "[H-Min] global minima split across {} components",
                holder_ids.len()
            ));
        }
    }

    HypothesisReport {
        h1,
        h2,
        h3,
        h_morse,
        h_min,
        n,
        n_0,
        k_0,
        component_c,
        boundary_contacts,
        failure_reasons: reasons,
    }
}

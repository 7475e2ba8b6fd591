//! Bounded domains (interval / rectangle) with regular tensor grids and an
//! explicit boundary description: faces, outward normals, corner flags and a
//! closed arc-length parametrization of the boundary loop (d = 2).

use serde::{Deserialize, Serialize};

/// A point of the ambient space; for `d = 1` the second component is 0.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainShape {
    Interval { a: f64, b: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl DomainShape {
    pub fn dim(&self) -> usize {
        match self {
            DomainShape::Interval { .. } => 1,
            DomainShape::Rectangle { .. } => 2,
        }
    }

    pub fn contains_open(&self, p: Point) -> bool {
        match *self {
            DomainShape::Interval { a, b } => p[0] > a && p[0] < b,
            DomainShape::Rectangle { x0, x1, y0, y1 } => {
                p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1
            }
        }
    }

    pub fn contains_closed(&self, p: Point) -> bool {
        match *self {
            DomainShape::Interval { a, b } => p[0] >= a && p[0] <= b,
            DomainShape::Rectangle { x0, x1, y0, y1 } => {
                p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
            }
        }
    }
}

/// One of the axis-aligned boundary faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Face {
    XLow,
    XHigh,
    YLow,
    YHigh,
}

impl Face {
    pub fn outward_normal(&self) -> Point {
        match self {
            Face::XLow => [-1.0, 0.0],
            Face::XHigh => [1.0, 0.0],
            Face::YLow => [0.0, -1.0],
            Face::YHigh => [0.0, 1.0],
        }
    }

    /// Unit tangent, oriented so the boundary loop runs counterclockwise.
    pub fn ccw_tangent(&self) -> Point {
        match self {
            Face::YLow => [1.0, 0.0],
            Face::XHigh => [0.0, 1.0],
            Face::YHigh => [-1.0, 0.0],
            Face::XLow => [0.0, -1.0],
        }
    }
}

/// A grid node on the boundary with its quadrature weight and loop position.
#[derive(Debug, Clone)]
pub struct BoundaryNode {
    pub index: (usize, usize),
    pub pos: Point,
    /// Arc-length position along the counterclockwise boundary loop (d = 2);
    /// 0.0 / 1.0 labels the left / right endpoint for d = 1.
    pub arc: f64,
    pub faces: Vec<Face>,
    pub corner: bool,
    /// Boundary measure dσ carried by this node (1.0 per endpoint in d = 1;
    /// trapezoid weights with half-weight per face at corners in d = 2).
    pub measure: f64,
}

/// An arc `[lo, hi]` (counterclockwise, mod perimeter) of the boundary loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub lo: f64,
    pub hi: f64,
}

impl BoundaryArc {
    /// Open-arc membership: s strictly between lo and hi going ccw.
    pub fn contains(&self, s: f64, perimeter: f64) -> bool {
        let len = wrap(self.hi - self.lo, perimeter);
        let off = wrap(s - self.lo, perimeter);
        off > 0.0 && off < len
    }

    pub fn length(&self, perimeter: f64) -> f64 {
        wrap(self.hi - self.lo, perimeter)
    }
}

fn wrap(s: f64, p: f64) -> f64 {
    let r = s % p;
    if r < 0.0 {
        r + p
    } else {
        r
    }
}

/// Regular tensor grid over a [`DomainShape`].
#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub shape: DomainShape,
    pub nx: usize,
    pub ny: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dx: f64,
    pub dy: f64,
}

impl DomainGrid {
    /// Build a grid with the given node counts per axis (total nodes,
    /// boundary included). `nodes.1` is ignored for intervals.
    pub fn new(shape: DomainShape, nodes: (usize, usize)) -> Self {
        match shape {
            DomainShape::Interval { a, b } => {
                let nx = nodes.0.max(3);
                let xs = linspace(a, b, nx);
                let dx = xs[1] - xs[0];
                DomainGrid {
                    shape,
                    nx,
                    ny: 1,
                    xs,
                    ys: vec![0.0],
                    dx,
                    dy: 0.0,
                }
            }
            DomainShape::Rectangle { x0, x1, y0, y1 } => {
                let nx = nodes.0.max(3);
                let ny = nodes.1.max(3);
                let xs = linspace(x0, x1, nx);
                let ys = linspace(y0, y1, ny);
                let dx = xs[1] - xs[0];
                let dy = ys[1] - ys[0];
                DomainGrid {
                    shape,
                    nx,
                    ny,
                    xs,
                    ys,
                    dx,
                    dy,
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn node_pos(&self, i: usize, j: usize) -> Point {
        [self.xs[i], self.ys[j.min(self.ny - 1)]]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        match self.dim() {
            1 => i == 0 || i == self.nx - 1,
            _ => i == 0 || i == self.nx - 1 || j == 0 || j == self.ny - 1,
        }
    }

    /// Interior node counts per axis.
    pub fn interior_counts(&self) -> (usize, usize) {
        match self.dim() {
            1 => (self.nx - 2, 1),
            _ => (self.nx - 2, self.ny - 2),
        }
    }

    pub fn n_interior(&self) -> usize {
        let (a, b) = self.interior_counts();
        a * b
    }

    /// Linear index of an interior node.
    pub fn interior_id(&self, i: usize, j: usize) -> usize {
        debug_assert!(!self.is_boundary(i, j));
        match self.dim() {
            1 => i - 1,
            _ => (i - 1) * (self.ny - 2) + (j - 1),
        }
    }

    pub fn interior_nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.n_interior());
        match self.dim() {
            1 => {
                for i in 1..self.nx - 1 {
                    v.push((i, 0));
                }
            }
            _ => {
                for i in 1..self.nx - 1 {
                    for j in 1..self.ny - 1 {
                        v.push((i, j));
                    }
                }
            }
        }
        v
    }

    pub fn all_nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.nx * self.ny);
        for i in 0..self.nx {
            for j in 0..self.ny {
                v.push((i, j));
            }
        }
        v
    }

    /// Cell volume dx (1D) or dx*dy (2D).
    pub fn cell_volume(&self) -> f64 {
        match self.dim() {
            1 => self.dx,
            _ => self.dx * self.dy,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.shape {
            DomainShape::Interval { .. } => 2.0,
            DomainShape::Rectangle { x0, x1, y0, y1 } => 2.0 * ((x1 - x0) + (y1 - y0)),
        }
    }

    /// Arc-length coordinate of a boundary point (d = 2); for d = 1 returns
    /// 0.0 at the left and 1.0 at the right endpoint.
    pub fn arc_of(&self, p: Point) -> f64 {
        match self.shape {
            DomainShape::Interval { a, b } => {
                if (p[0] - a).abs() <= (p[0] - b).abs() {
                    0.0
                } else {
                    1.0
                }
            }
            DomainShape::Rectangle { x0, x1, y0, y1 } => {
                let lx = x1 - x0;
                let ly = y1 - y0;
                // distance to each face decides which segment the point is on
                let dists = [
                    (p[1] - y0).abs(),
                    (p[0] - x1).abs(),
                    (p[1] - y1).abs(),
                    (p[0] - x0).abs(),
                ];
                let face = dists
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap()
                    .0;
                match face {
                    0 => (p[0] - x0).clamp(0.0, lx),
                    1 => lx + (p[1] - y0).clamp(0.0, ly),
                    2 => lx + ly + (x1 - p[0]).clamp(0.0, lx),
                    _ => 2.0 * lx + ly + (y1 - p[1]).clamp(0.0, ly),
                }
            }
        }
    }

    /// All boundary nodes in counterclockwise loop order.
    pub fn boundary_nodes(&self) -> Vec<BoundaryNode> {
        match self.shape {
            DomainShape::Interval { a, b } => vec![
                BoundaryNode {
                    index: (0, 0),
                    pos: [a, 0.0],
                    arc: 0.0,
                    faces: vec![Face::XLow],
                    corner: false,
                    measure: 1.0,
                },
                BoundaryNode {
                    index: (self.nx - 1, 0),
                    pos: [b, 0.0],
                    arc: 1.0,
                    faces: vec![Face::XHigh],
                    corner: false,
                    measure: 1.0,
                },
            ],
            DomainShape::Rectangle { .. } => {
                let mut v = Vec::with_capacity(2 * self.nx + 2 * self.ny - 4);
                let (nx, ny) = (self.nx, self.ny);
                // bottom: (0,0) .. (nx-1, 0)
                for i in 0..nx {
                    v.push(self.make_boundary_node(i, 0));
                }
                // right: (nx-1, 1) .. (nx-1, ny-1)
                for j in 1..ny {
                    v.push(self.make_boundary_node(nx - 1, j));
                }
                // top: (nx-2, ny-1) .. (0, ny-1)
                for i in (0..nx - 1).rev() {
                    v.push(self.make_boundary_node(i, ny - 1));
                }
                // left: (0, ny-2) .. (0, 1)
                for j in (1..ny - 1).rev() {
                    v.push(self.make_boundary_node(0, j));
                }
                v
            }
        }
    }

    fn make_boundary_node(&self, i: usize, j: usize) -> BoundaryNode {
        let mut faces = Vec::with_capacity(2);
        if i == 0 {
            faces.push(Face::XLow);
        }
        if i == self.nx - 1 {
            faces.push(Face::XHigh);
        }
        if j == 0 {
            faces.push(Face::YLow);
        }
        if j == self.ny - 1 {
            faces.push(Face::YHigh);
        }
        let corner = faces.len() == 2;
        let measure = if corner {
            0.5 * (self.dx + self.dy)
        } else if faces[0] == Face::YLow || faces[0] == Face::YHigh {
            self.dx
        } else {
            self.dy
        };
        let pos = self.node_pos(i, j);
        BoundaryNode {
            index: (i, j),
            pos,
            arc: self.arc_of(pos),
            faces,
            corner,
            measure,
        }
    }

    /// Nearest grid node to a point (clamped into the domain).
    pub fn nearest_node(&self, p: Point) -> (usize, usize) {
        let i = ((p[0] - self.xs[0]) / self.dx).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = if self.dim() == 1 {
            0
        } else {
            ((p[1] - self.ys[0]) / self.dy).round().clamp(0.0, (self.ny - 1) as f64) as usize
        };
        (i, j)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * step })
        .collect()
}

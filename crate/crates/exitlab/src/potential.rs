//! Smooth potential fields on R^1 / R^2: value, gradient and Hessian, plus
//! the built-in catalog used throughout the test suites.
//!
//! Catalog entries:
//! * `P1` — symmetric double well `(x²-1)²` on `(-1.2, 1.2)`: two tied wells,
//!   each draining to its own endpoint.
//! * `P2` — `6 sin(x) e^{-x/5}` on `(0, 7.28)`: a deep off-center well whose
//!   exit concentrates on the higher boundary point.
//! * `P3` — `x² + 2y²` on `(-1, 1)²`: a single quadratic well with two
//!   symmetric lowest exit channels.
//! * `P4` — tilted well `x² + 0.1 x³` on `(-1, 1)`: one well, two boundary
//!   channels with distinct barriers.

use crate::grid::{DomainShape, Point};
use serde::{Deserialize, Serialize};

/// A single Gaussian bump `a · exp(-|x-c|² / (2σ²))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub sigma: f64,
}

/// A monomial `c · x^px · y^py`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coeff: f64,
    pub px: u32,
    #[serde(default)]
    pub py: u32,
}

#[derive(Debug, Clone)]
enum Kind {
    DoubleWell,
    DampedSine,
    AnisotropicBowl,
    TiltedWell,
    Polynomial { terms: Vec<MonomialTerm> },
    GaussianSum { dim: usize, terms: Vec<GaussianTerm> },
}

/// Smooth scalar field with analytic gradient and Hessian.
#[derive(Debug, Clone)]
pub struct PotentialField {
    kind: Kind,
    dim: usize,
    pub catalog_id: Option<String>,
}

impl PotentialField {
    pub fn catalog(id: &str) -> Option<PotentialField> {
        let kind = match id {
            "P1" => Kind::DoubleWell,
            "P2" => Kind::DampedSine,
            "P3" => Kind::AnisotropicBowl,
            "P4" => Kind::TiltedWell,
            _ => return None,
        };
        let dim = match kind {
            Kind::AnisotropicBowl => 2,
            _ => 1,
        };
        Some(PotentialField {
            kind,
            dim,
            catalog_id: Some(id.to_string()),
        })
    }

    /// Default domain associated with a catalog potential.
    pub fn default_domain(id: &str) -> Option<DomainShape> {
        match id {
            "P1" => Some(DomainShape::Interval { a: -1.2, b: 1.2 }),
            "P2" => Some(DomainShape::Interval { a: 0.0, b: 7.28 }),
            "P3" => Some(DomainShape::Rectangle {
                x0: -1.0,
                x1: 1.0,
                y0: -1.0,
                y1: 1.0,
            }),
            "P4" => Some(DomainShape::Interval { a: -1.0, b: 1.0 }),
            _ => None,
        }
    }

    pub fn polynomial(dim: usize, terms: Vec<MonomialTerm>) -> PotentialField {
        PotentialField {
            kind: Kind::Polynomial { terms },
            dim,
            catalog_id: None,
        }
    }

    pub fn gaussian_sum(dim: usize, terms: Vec<GaussianTerm>) -> PotentialField {
        PotentialField {
            kind: Kind::GaussianSum { dim, terms },
            dim,
            catalog_id: None,
        }
    }

    /// The zero potential (free Brownian motion), any dimension.
    pub fn flat(dim: usize) -> PotentialField {
        PotentialField {
            kind: Kind::Polynomial { terms: vec![] },
            dim,
            catalog_id: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        match &self.kind {
            Kind::DoubleWell => {
                let u = x * x - 1.0;
                u * u
            }
            Kind::DampedSine => 6.0 * x.sin() * (-x / 5.0).exp(),
            Kind::AnisotropicBowl => x * x + 2.0 * y * y,
            Kind::TiltedWell => x * x + 0.1 * x * x * x,
            Kind::Polynomial { terms, .. } => terms
                .iter()
                .map(|t| t.coeff * x.powi(t.px as i32) * y.powi(t.py as i32))
                .sum(),
            Kind::GaussianSum { terms, dim } => terms
                .iter()
                .map(|t| {
                    let r2 = sq_dist(p, &t.center, *dim);
                    t.amplitude * (-r2 / (2.0 * t.sigma * t.sigma)).exp()
                })
                .sum(),
        }
    }

    pub fn grad(&self, p: Point) -> Point {
        let (x, y) = (p[0], p[1]);
        match &self.kind {
            Kind::DoubleWell => [4.0 * x * (x * x - 1.0), 0.0],
            Kind::DampedSine => {
                let e = (-x / 5.0).exp();
                [6.0 * e * (x.cos() - x.sin() / 5.0), 0.0]
            }
            Kind::AnisotropicBowl => [2.0 * x, 4.0 * y],
            Kind::TiltedWell => [2.0 * x + 0.3 * x * x, 0.0],
            Kind::Polynomial { terms, .. } => {
                let mut g = [0.0, 0.0];
                for t in terms {
                    if t.px > 0 {
                        g[0] += t.coeff
                            * t.px as f64
                            * x.powi(t.px as i32 - 1)
                            * y.powi(t.py as i32);
                    }
                    if t.py > 0 {
                        g[1] += t.coeff
                            * t.py as f64
                            * x.powi(t.px as i32)
                            * y.powi(t.py as i32 - 1);
                    }
                }
                g
            }
            Kind::GaussianSum { terms, dim } => {
                let mut g = [0.0, 0.0];
                for t in terms {
                    let r2 = sq_dist(p, &t.center, *dim);
                    let s2 = t.sigma * t.sigma;
                    let v = t.amplitude * (-r2 / (2.0 * s2)).exp();
                    for k in 0..*dim {
                        let ck = t.center.get(k).copied().unwrap_or(0.0);
                        g[k] += v * (-(p[k] - ck) / s2);
                    }
                }
                g
            }
        }
    }

    /// Symmetric Hessian, returned as `[[fxx, fxy], [fxy, fyy]]`.
    pub fn hess(&self, p: Point) -> [[f64; 2]; 2] {
        let (x, y) = (p[0], p[1]);
        match &self.kind {
            Kind::DoubleWell => [[12.0 * x * x - 4.0, 0.0], [0.0, 0.0]],
            Kind::DampedSine => {
                let e = (-x / 5.0).exp();
                let fxx = 6.0 * e * (-x.sin() - 2.0 * x.cos() / 5.0 + x.sin() / 25.0);
                [[fxx, 0.0], [0.0, 0.0]]
            }
            Kind::AnisotropicBowl => [[2.0, 0.0], [0.0, 4.0]],
            Kind::TiltedWell => [[2.0 + 0.6 * x, 0.0], [0.0, 0.0]],
            Kind::Polynomial { terms, .. } => {
                let mut hxx = 0.0;
                let mut hyy = 0.0;
                let mut hxy = 0.0;
                for t in terms {
                    let (px, py) = (t.px as i32, t.py as i32);
                    if t.px >= 2 {
                        hxx += t.coeff * (px * (px - 1)) as f64 * x.powi(px - 2) * y.powi(py);
                    }
                    if t.py >= 2 {
                        hyy += t.coeff * (py * (py - 1)) as f64 * x.powi(px) * y.powi(py - 2);
                    }
                    if t.px >= 1 && t.py >= 1 {
                        hxy += t.coeff * (px * py) as f64 * x.powi(px - 1) * y.powi(py - 1);
                    }
                }
                [[hxx, hxy], [hxy, hyy]]
            }
            Kind::GaussianSum { terms, dim } => {
                let mut h = [[0.0; 2]; 2];
                for t in terms {
                    let r2 = sq_dist(p, &t.center, *dim);
                    let s2 = t.sigma * t.sigma;
                    let v = t.amplitude * (-r2 / (2.0 * s2)).exp();
                    for a in 0..*dim {
                        let ca = t.center.get(a).copied().unwrap_or(0.0);
                        for b in a..*dim {
                            let cb = t.center.get(b).copied().unwrap_or(0.0);
                            let da = p[a] - ca;
                            let db = p[b] - cb;
                            let mut term = v * da * db / (s2 * s2);
                            if a == b {
                                term -= v / s2;
                            }
                            h[a][b] += term;
                        }
                    }
                }
                h[1][0] = h[0][1];
                h
            }
        }
    }

    /// Evaluate value, gradient and Hessian in one call.
    pub fn eval_all(&self, p: Point) -> (f64, Point, [[f64; 2]; 2]) {
        (self.eval(p), self.grad(p), self.hess(p))
    }

    pub fn grad_norm(&self, p: Point) -> f64 {
        let g = self.grad(p);
        (g[0] * g[0] + g[1] * g[1]).sqrt()
    }
}

fn sq_dist(p: Point, c: &[f64], dim: usize) -> f64 {
    let mut r2 = 0.0;
    for k in 0..dim {
        let d = p[k] - c.get(k).copied().unwrap_or(0.0);
        r2 += d * d;
    }
    r2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Central finite differences of eval, used to validate the analytic
    /// gradient and Hessian entries on a test lattice.
    fn fd_grad(p: &PotentialField, x: Point, step: f64) -> Point {
        let mut g = [0.0, 0.0];
        for k in 0..p.dim() {
            let mut xp = x;
            let mut xm = x;
            xp[k] += step;
            xm[k] -= step;
            g[k] = (p.eval(xp) - p.eval(xm)) / (2.0 * step);
        }
        g
    }

    fn check_grad_on_lattice(p: &PotentialField, lo: Point, hi: Point) {
        let n = 7;
        for a in 0..n {
            for b in 0..(if p.dim() == 2 { n } else { 1 }) {
                let x = [
                    lo[0] + (hi[0] - lo[0]) * a as f64 / (n - 1) as f64,
                    lo[1] + (hi[1] - lo[1]) * b as f64 / (n - 1) as f64,
                ];
                let g = p.grad(x);
                let gfd = fd_grad(p, x, 1e-4);
                for k in 0..p.dim() {
                    let scale = g[k].abs().max(1.0);
                    assert!(
                        (g[k] - gfd[k]).abs() / scale < 1e-5,
                        "grad mismatch at {:?}: {} vs {}",
                        x,
                        g[k],
                        gfd[k]
                    );
                }
                let h = p.hess(x);
                assert_eq!(h[0][1], h[1][0]);
            }
        }
    }

    #[test]
    fn catalog_gradients_match_finite_differences() {
        for id in ["P1", "P2", "P3", "P4"] {
            let p = PotentialField::catalog(id).unwrap();
            let (lo, hi) = match id {
                "P1" => ([-1.2, 0.0], [1.2, 0.0]),
                "P2" => ([0.0, 0.0], [7.28, 0.0]),
                "P3" => ([-1.0, -1.0], [1.0, 1.0]),
                _ => ([-1.0, 0.0], [1.0, 0.0]),
            };
            check_grad_on_lattice(&p, lo, hi);
        }
    }

    #[test]
    fn quadratic_bowl_at_origin() {
        // f = |x|^2 / 2
        let p = PotentialField::polynomial(
            2,
            vec![
                MonomialTerm { coeff: 0.5, px: 2, py: 0 },
                MonomialTerm { coeff: 0.5, px: 0, py: 2 },
            ],
        );
        let (f, g, h) = p.eval_all([0.0, 0.0]);
        assert_eq!(f, 0.0);
        assert_eq!(g, [0.0, 0.0]);
        assert_relative_eq!(h[0][0], 1.0);
        assert_relative_eq!(h[1][1], 1.0);
        assert_relative_eq!(h[0][1], 0.0);
    }

    #[test]
    fn p3_at_unit_point() {
        let p = PotentialField::catalog("P3").unwrap();
        let (f, g, h) = p.eval_all([1.0, 0.0]);
        assert_relative_eq!(f, 1.0);
        assert_relative_eq!(g[0], 2.0);
        assert_relative_eq!(g[1], 0.0);
        assert_relative_eq!(h[0][0], 2.0);
        assert_relative_eq!(h[1][1], 4.0);
    }

    #[test]
    fn p2_stationary_at_tan_root() {
        // the interior minimum solves tan(x) = 5; bisection oracle
        let mut lo = std::f64::consts::PI + 0.1;
        let mut hi = std::f64::consts::PI + 1.5;
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m.tan() - 5.0 > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        let xstar = 0.5 * (lo + hi);
        let p = PotentialField::catalog("P2").unwrap();
        assert!(p.grad([xstar, 0.0])[0].abs() < 1e-8);
        assert_relative_eq!(xstar, 4.514993420534802, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_sum_gradients() {
        let p = PotentialField::gaussian_sum(
            2,
            vec![
                GaussianTerm { amplitude: -1.0, center: vec![0.3, -0.2], sigma: 0.5 },
                GaussianTerm { amplitude: 0.7, center: vec![-0.4, 0.1], sigma: 0.3 },
            ],
        );
        check_grad_on_lattice(&p, [-0.8, -0.8], [0.8, 0.8]);
    }
}

//! Euler-Maruyama simulation of the overdamped dynamics with first-exit
//! detection, sampling from the quasi-stationary density, and the reflected
//! variant used for in-domain equilibration.

use crate::grid::{DomainShape, Point};
use crate::landscape::Landscape;
use crate::potential::PotentialField;
use crate::spectral::SpectralSolution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("no exit within {0} steps: raise max_steps or use accelerated dynamics")]
    MaxStepsExceeded(u64),
    #[error("more than {0} reflections in one step: dt too large for this domain")]
    ReflectionLoop(u32),
}

/// Simulation parameters; trajectories are deterministic in (seed, x0, cfg).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    /// Temperature.
    pub h: f64,
    /// Time step.
    pub dt: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Default step heuristic: min(Δx²/h, 1e-3) for a grid spacing Δx.
    pub fn default_dt(dx: f64, h: f64) -> f64 {
        (dx * dx / h).min(1e-3)
    }
}

/// One sampled exit: time, boundary location, channel (if resolvable).
#[derive(Debug, Clone, Serialize)]
pub struct ExitEvent {
    pub tau: f64,
    pub exit_point: Point,
    pub channel: Option<usize>,
}

/// One explicit Euler-Maruyama step `x' = x - ∇f(x) dt + √(h dt) ξ`.
pub fn em_step<R: Rng + ?Sized>(
    x: Point,
    p: &PotentialField,
    cfg: &SimConfig,
    rng: &mut R,
) -> Point {
    let g = p.grad(x);
    let s = (cfg.h * cfg.dt).sqrt();
    let mut out = [0.0, 0.0];
    for k in 0..p.dim() {
        let xi: f64 = rng.sample(StandardNormal);
        out[k] = x[k] - g[k] * cfg.dt + s * xi;
    }
    out
}

/// Crossing fraction θ ∈ (0, 1] and boundary point of the segment from
/// `a` (inside) to `b` (outside).
fn boundary_crossing(domain: &DomainShape, a: Point, b: Point) -> (f64, Point) {
    match *domain {
        DomainShape::Interval { a: lo, b: hi } => {
            let (target, _) = if b[0] <= lo { (lo, -1.0) } else { (hi, 1.0) };
            let theta = if (b[0] - a[0]).abs() < f64::MIN_POSITIVE {
                1.0
            } else {
                ((target - a[0]) / (b[0] - a[0])).clamp(0.0, 1.0)
            };
            (theta, [target, 0.0])
        }
        DomainShape::Rectangle { x0, x1, y0, y1 } => {
            let mut theta = f64::INFINITY;
            for (axis, lo, hi) in [(0usize, x0, x1), (1, y0, y1)] {
                if b[axis] <= lo && a[axis] > lo {
                    theta = theta.min((a[axis] - lo) / (a[axis] - b[axis]));
                }
                if b[axis] >= hi && a[axis] < hi {
                    theta = theta.min((hi - a[axis]) / (b[axis] - a[axis]));
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            let mut p = [
                a[0] + theta * (b[0] - a[0]),
                a[1] + theta * (b[1] - a[1]),
            ];
            // land exactly on the closest face
            let dists = [
                (p[0] - x0).abs(),
                (x1 - p[0]).abs(),
                (p[1] - y0).abs(),
                (y1 - p[1]).abs(),
            ];
            match dists
                .iter()
                .enumerate()
                .min_by(|u, v| u.1.partial_cmp(v.1).unwrap())
                .unwrap()
                .0
            {
                0 => p[0] = x0,
                1 => p[0] = x1,
                2 => p[1] = y0,
                _ => p[1] = y1,
            }
            p[0] = p[0].clamp(x0, x1);
            p[1] = p[1].clamp(y0, y1);
            (theta, p)
        }
    }
}

/// Simulate until the first iterate leaves Ω; the exit time interpolates the
/// crossing step linearly and the exit point is the segment-boundary
/// intersection. Channel from the basin decomposition when provided.
pub fn sample_exit<R: Rng + ?Sized>(
    x0: Point,
    p: &PotentialField,
    domain: &DomainShape,
    landscape: Option<&Landscape>,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<ExitEvent, SdeError> {
    let mut x = x0;
    for step in 0..cfg.max_steps {
        let next = em_step(x, p, cfg, rng);
        if !domain.contains_open(next) {
            let (theta, exit_point) = boundary_crossing(domain, x, next);
            let tau = (step as f64 + theta) * cfg.dt;
            let channel = landscape.and_then(|l| l.channel_of(exit_point));
            return Ok(ExitEvent {
                tau,
                exit_point,
                channel,
            });
        }
        x = next;
    }
    Err(SdeError::MaxStepsExceeded(cfg.max_steps))
}

/// Exit-channel sampling with a committed-well shortcut: a trajectory that
/// reaches the `absorb_radius` ball around `absorb_center` before leaving Ω
/// is classified as exiting through `committed_channel`. This makes the
/// exit-location law of deeply metastable starts computable: once in the
/// well, the probability of any other channel is exponentially negligible,
/// while the literal exit would take e^{2Δf/h} steps.
#[allow(clippy::too_many_arguments)]
pub fn sample_channel_with_absorption<R: Rng + ?Sized>(
    x0: Point,
    p: &PotentialField,
    domain: &DomainShape,
    landscape: &Landscape,
    absorb_center: Point,
    absorb_radius: f64,
    committed_channel: usize,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<usize, SdeError> {
    let mut x = x0;
    for _ in 0..cfg.max_steps {
        let next = em_step(x, p, cfg, rng);
        if !domain.contains_open(next) {
            let (_, exit_point) = boundary_crossing(domain, x, next);
            return Ok(landscape.channel_of(exit_point).unwrap_or(committed_channel));
        }
        let d2 = (next[0] - absorb_center[0]).powi(2) + (next[1] - absorb_center[1]).powi(2);
        if d2.sqrt() <= absorb_radius {
            return Ok(committed_channel);
        }
        x = next;
    }
    Err(SdeError::MaxStepsExceeded(cfg.max_steps))
}

/// Draw from the discrete quasi-stationary density: inverse CDF over grid
/// cells in 1D, rejection against the cell-maximum envelope in 2D.
pub fn sample_qsd<R: Rng + ?Sized>(sol: &SpectralSolution, rng: &mut R) -> Point {
    let grid = &sol.grid;
    let q = sol.qsd_density();
    match grid.dim() {
        1 => {
            let total: f64 = q.iter().sum();
            let mut u: f64 = rng.gen::<f64>() * total;
            let mut k = 0;
            while k + 1 < q.len() && u > q[k] {
                u -= q[k];
                k += 1;
            }
            let x = grid.xs[k + 1] + (rng.gen::<f64>() - 0.5) * grid.dx;
            [
                x.clamp(grid.xs[0] + 1e-12, grid.xs[grid.nx - 1] - 1e-12),
                0.0,
            ]
        }
        _ => {
            let qmax = q.iter().copied().fold(0.0, f64::max);
            let (nix, niy) = grid.interior_counts();
            loop {
                let i = 1 + rng.gen_range(0..nix);
                let j = 1 + rng.gen_range(0..niy);
                let k = grid.interior_id(i, j);
                if rng.gen::<f64>() * qmax <= q[k] {
                    let p = grid.node_pos(i, j);
                    return [
                        p[0] + (rng.gen::<f64>() - 0.5) * grid.dx,
                        p[1] + (rng.gen::<f64>() - 0.5) * grid.dy,
                    ];
                }
            }
        }
    }
}

const MAX_REFLECTIONS: u32 = 10;

/// One EM step followed by mirror reflection across every violated face,
/// repeated until the iterate is inside the closed domain.
pub fn reflected_step<R: Rng + ?Sized>(
    x: Point,
    p: &PotentialField,
    domain: &DomainShape,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Point, SdeError> {
    let mut next = em_step(x, p, cfg, rng);
    let mut count = 0;
    while !domain.contains_closed(next) {
        if count >= MAX_REFLECTIONS {
            return Err(SdeError::ReflectionLoop(MAX_REFLECTIONS));
        }
        next = mirror(domain, next);
        count += 1;
    }
    Ok(next)
}

fn mirror(domain: &DomainShape, mut x: Point) -> Point {
    match *domain {
        DomainShape::Interval { a, b } => {
            if x[0] < a {
                x[0] = 2.0 * a - x[0];
            }
            if x[0] > b {
                x[0] = 2.0 * b - x[0];
            }
        }
        DomainShape::Rectangle { x0, x1, y0, y1 } => {
            if x[0] < x0 {
                x[0] = 2.0 * x0 - x[0];
            }
            if x[0] > x1 {
                x[0] = 2.0 * x1 - x[0];
            }
            if x[1] < y0 {
                x[1] = 2.0 * y0 - x[1];
            }
            if x[1] > y1 {
                x[1] = 2.0 * y1 - x[1];
            }
        }
    }
    x
}

/// RNG stream for one trajectory: counter-based on (master seed, index), so
/// parallel batches reproduce exactly regardless of scheduling.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Run `n` independent exit trajectories in parallel; `start` maps the
/// per-trajectory RNG to an initial condition (e.g. a QSD sampler).
pub fn run_exit_batch<S>(
    n: usize,
    start: S,
    p: &PotentialField,
    domain: &DomainShape,
    landscape: Option<&Landscape>,
    cfg: &SimConfig,
) -> Result<Vec<ExitEvent>, SdeError>
where
    S: Fn(&mut ChaCha12Rng) -> Point + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(cfg.seed, i as u64);
            let x0 = start(&mut rng);
            sample_exit(x0, p, domain, landscape, cfg, &mut rng)
        })
        .collect()
}

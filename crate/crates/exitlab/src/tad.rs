//! Temperature accelerated dynamics: harvest exit events at a high
//! temperature, extrapolate each first-seen channel's exit time to the low
//! temperature through its barrier, and stop as soon as the probability that
//! an unseen channel could still preempt the current winner drops below a
//! confidence level.

use crate::grid::Point;
use crate::landscape::Landscape;
use crate::sde::{self, SdeError, SimConfig};
use crate::spectral::{self, SpectralError, SpectralSolution};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TadError {
    #[error("simulation budget exceeded after {0} high-temperature exits")]
    BudgetExceeded(usize),
    #[error("exit point {0:?} could not be assigned a channel")]
    ChannelUnresolved(Point),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartMode {
    /// Draw the restart point from the high-temperature quasi-stationary
    /// density (exact local equilibrium, no burn-in).
    SpectralQsd,
    /// Reflected dynamics for a configured burn-in time.
    ReflectedEquilibration,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TadConfig {
    pub h_low: f64,
    pub h_high: f64,
    /// Confidence level: the returned event is wrong with probability <= alpha
    /// under the exponential-clock model and the prefactor bound.
    pub alpha: f64,
    /// Assumed lower bound on every channel prefactor (1/time).
    pub nu_min: f64,
    /// High-temperature simulation parameters (h field is overridden by h_high).
    pub sim: SimConfig,
    pub restart_mode: RestartMode,
    /// Burn-in time for the reflected restart mode.
    pub burn_in: f64,
    /// Cap on the number of high-temperature exits per run.
    pub max_exits: usize,
}

/// Per-channel bookkeeping: first-seen high-T time and its extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelRecord {
    pub channel: usize,
    pub tau_high: f64,
    pub tau_low: f64,
}

/// Final state of one TAD run.
#[derive(Debug, Clone, Serialize)]
pub struct TadOutcome {
    /// Exit time at the low temperature (the extrapolated winner).
    pub exit_time: f64,
    /// Winning channel.
    pub channel: usize,
    pub n_high_t_exits: usize,
    pub t_sim: f64,
    pub t_stop: f64,
    pub records: Vec<ChannelRecord>,
    /// Low-temperature time bought per unit of simulated high-T time.
    pub speedup_estimate: f64,
}

/// Extrapolate a first-passage time from h_high to h_low across a barrier:
/// τ_low = τ_high · e^{2 (1/h_low - 1/h_high) Δf}.
pub fn extrapolate_time(tau_high: f64, delta_f: f64, h_low: f64, h_high: f64) -> f64 {
    tau_high * (2.0 * (1.0 / h_low - 1.0 / h_high) * delta_f).exp()
}

/// High-temperature stop time: once T_sim exceeds this, a channel that has
/// not yet fired would beat the current extrapolated minimum with
/// probability at most alpha, for any barrier, provided its prefactor is at
/// least nu_min:
/// `T_stop = ln(1/α)/ν_min · (ν_min τ_min_low / ln(1/α))^{h_low/h_high}`.
pub fn stop_time(tau_min_low: f64, cfg: &TadConfig) -> f64 {
    let lna = (1.0 / cfg.alpha).ln();
    (lna / cfg.nu_min) * (cfg.nu_min * tau_min_low / lna).powf(cfg.h_low / cfg.h_high)
}

/// Draw a restart point in local equilibrium at the high temperature.
pub fn equilibrate<R: Rng + ?Sized>(
    landscape: &Landscape,
    hot_solution: Option<&SpectralSolution>,
    cfg: &TadConfig,
    rng: &mut R,
) -> Result<Point, TadError> {
    match cfg.restart_mode {
        RestartMode::SpectralQsd => {
            let sol = hot_solution.expect("spectral restart mode needs a hot solution");
            Ok(sde::sample_qsd(sol, rng))
        }
        RestartMode::ReflectedEquilibration => {
            let mut sim = cfg.sim;
            sim.h = cfg.h_high;
            let steps = (cfg.burn_in / sim.dt).ceil() as u64;
            let x0 = landscape
                .global_minimum()
                .map(|c| c.location)
                .unwrap_or([0.0, 0.0]);
            let mut x = x0;
            for _ in 0..steps {
                x = sde::reflected_step(x, &landscape.potential, &landscape.grid.shape, &sim, rng)?;
            }
            Ok(x)
        }
    }
}

/// One full TAD run: returns the extrapolated low-temperature exit event.
///
/// Channels are the boundary minima of the landscape with barriers
/// Δf_j = f(z_j) - f(x_0); each channel's extrapolated time is recorded at
/// its first observation only and never updated.
pub fn tad_run<R: Rng + ?Sized>(
    landscape: &Landscape,
    hot_solution: Option<&SpectralSolution>,
    cfg: &TadConfig,
    rng: &mut R,
) -> Result<TadOutcome, TadError> {
    let x0 = landscape
        .global_minimum()
        .expect("landscape has an interior minimum");
    let n_channels = landscape.boundary_minima.len();
    let mut sim = cfg.sim;
    sim.h = cfg.h_high;

    let mut t_sim = 0.0;
    let mut t_stop = f64::INFINITY;
    let mut tau_low: Vec<Option<f64>> = vec![None; n_channels];
    let mut tau_high_seen: Vec<Option<f64>> = vec![None; n_channels];
    let mut n_exits = 0;

    loop {
        if n_exits >= cfg.max_exits {
            return Err(TadError::BudgetExceeded(n_exits));
        }
        let start = equilibrate(landscape, hot_solution, cfg, rng)?;
        let event = sde::sample_exit(
            start,
            &landscape.potential,
            &landscape.grid.shape,
            Some(landscape),
            &sim,
            rng,
        )?;
        n_exits += 1;
        t_sim += event.tau;
        let j = event
            .channel
            .ok_or(TadError::ChannelUnresolved(event.exit_point))?;
        if tau_low[j].is_none() {
            // first observation of this channel: extrapolate the cumulative
            // simulation clock at which it fired
            let delta_f = {
                // barrier measured from the well that feeds the channel
                let well = landscape
                    .nearest_minimum(landscape.boundary_minima[j].location)
                    .unwrap_or(x0);
                landscape.boundary_minima[j].f_value - well.f_value
            };
            tau_high_seen[j] = Some(t_sim);
            tau_low[j] = Some(extrapolate_time(t_sim, delta_f, cfg.h_low, cfg.h_high));
            // update the winner and the stop clock
            let tau_min = tau_low
                .iter()
                .flatten()
                .copied()
                .fold(f64::INFINITY, f64::min);
            t_stop = stop_time(tau_min, cfg);
        }
        if t_sim > t_stop {
            break;
        }
    }

    let (channel, exit_time) = tau_low
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (i, t)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("at least one channel observed");
    let records = tau_low
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            t.map(|tl| ChannelRecord {
                channel: i,
                tau_high: tau_high_seen[i].unwrap(),
                tau_low: tl,
            })
        })
        .collect();
    Ok(TadOutcome {
        exit_time,
        channel,
        n_high_t_exits: n_exits,
        t_sim,
        t_stop,
        speedup_estimate: exit_time / t_sim,
        records,
    })
}

/// Convenience: solve the high-temperature spectral problem once for the
/// restart sampler of a batch of TAD runs.
pub fn hot_equilibrium_solution(
    landscape: &Landscape,
    cfg: &TadConfig,
) -> Result<SpectralSolution, SpectralError> {
    let a = spectral::assemble_generator(&landscape.potential, &landscape.grid, cfg.h_high)?;
    spectral::principal_eigenpair(&a)
}

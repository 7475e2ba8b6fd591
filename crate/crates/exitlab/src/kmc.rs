//! Kinetic Monte Carlo: holding-time/next-state sampling from a rate table,
//! the equivalent min-of-exponential-clocks sampler, and a jump-chain
//! simulator over a small state graph.

use crate::rates::RateTable;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KmcError {
    #[error("total rate is zero at a non-absorbing state")]
    ZeroTotalRate,
}

/// One jump: holding time T and channel Y.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JumpSample {
    pub holding_time: f64,
    pub channel: usize,
}

/// Sample (T, Y) with T ~ Exp(Σ k_i), Y independent with P[Y=i] ∝ k_i.
pub fn sample_jump<R: Rng + ?Sized>(rates: &RateTable, rng: &mut R) -> Result<JumpSample, KmcError> {
    let ks = rates.rates();
    let total: f64 = ks.iter().sum();
    if total <= 0.0 {
        return Err(KmcError::ZeroTotalRate);
    }
    let holding_time = Exp::new(total).unwrap().sample(rng);
    // categorical by cumulative-sum inversion with a single uniform
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut channel = ks.len() - 1;
    for (i, k) in ks.iter().enumerate() {
        acc += k;
        if u < acc {
            channel = i;
            break;
        }
    }
    Ok(JumpSample {
        holding_time,
        channel,
    })
}

/// Sample (T, Y) as (min_j τ_j, argmin_j τ_j) over independent clocks
/// τ_j ~ Exp(k_j); equal in law to [`sample_jump`]. Ties (a null event)
/// resolve to the lowest index.
pub fn sample_jump_minexp<R: Rng + ?Sized>(
    rates: &RateTable,
    rng: &mut R,
) -> Result<JumpSample, KmcError> {
    let ks = rates.rates();
    if ks.iter().sum::<f64>() <= 0.0 {
        return Err(KmcError::ZeroTotalRate);
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, &k) in ks.iter().enumerate() {
        if k <= 0.0 {
            continue;
        }
        let t = Exp::new(k).unwrap().sample(rng);
        best = match best {
            None => Some((t, i)),
            Some((tb, ib)) => {
                if t < tb {
                    Some((t, i))
                } else {
                    Some((tb, ib))
                }
            }
        };
    }
    let (holding_time, channel) = best.ok_or(KmcError::ZeroTotalRate)?;
    Ok(JumpSample {
        holding_time,
        channel,
    })
}

/// A finite jump-process state space: per-state rate tables, channel targets
/// and an absorbing set.
#[derive(Debug, Clone)]
pub struct StateGraph {
    /// rates[s] holds the outgoing rate table of state s.
    pub rates: Vec<RateTable>,
    /// targets[s][c] is the state reached from s through channel c.
    pub targets: Vec<Vec<usize>>,
    pub absorbing: Vec<bool>,
}

/// A visited state with its entry time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainStep {
    pub state: usize,
    pub entry_time: f64,
}

/// Simulate the jump chain from `start` until the horizon elapses or an
/// absorbing state is entered.
pub fn simulate_chain<R: Rng + ?Sized>(
    graph: &StateGraph,
    start: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<ChainStep>, KmcError> {
    let mut out = vec![ChainStep {
        state: start,
        entry_time: 0.0,
    }];
    let mut state = start;
    let mut t = 0.0;
    while !graph.absorbing[state] {
        let jump = sample_jump(&graph.rates[state], rng)?;
        t += jump.holding_time;
        if t > horizon {
            break;
        }
        state = graph.targets[state][jump.channel];
        out.push(ChainStep {
            state,
            entry_time: t,
        });
    }
    Ok(out)
}

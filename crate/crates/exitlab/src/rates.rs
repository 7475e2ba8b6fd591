//! Closed-form transition-rate formulas: the interior-saddle rate with its
//! curvature prefactor, the boundary (generalized-saddle) rate, the
//! small-temperature asymptotics of the principal eigenvalue and of the
//! eigenfunction integral, the boundary-flux constant, normalized exit
//! weights, and the jump-matrix eigenvalue of the reduced model.
//!
//! Only differences of f enter any of these quantities, so adding a constant
//! to the potential never changes a rate.

use crate::landscape::{BoundaryMinimum, CriticalPoint, Landscape};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Spectral,
    EkBoundary,
    EkInterior,
    User,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateEntry {
    pub channel: usize,
    pub rate: f64,
    pub provenance: Provenance,
}

/// Per-channel rates with provenance, at one temperature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
    pub h: f64,
}

impl RateTable {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.rate).sum()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.rate).collect()
    }
}

/// Saddle-point data entering the interior-saddle prefactor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaddleData {
    pub f_saddle: f64,
    pub f_min: f64,
    /// The negative Hessian eigenvalue at the saddle.
    pub negative_eigenvalue: f64,
    pub det_hess_min: f64,
    /// |det Hess f| at the saddle.
    pub abs_det_hess_saddle: f64,
}

/// Interior-saddle rate `k = [1/2] · |λ(z)|/(2π) · √det H(x0)/√|det H(z)| ·
/// e^{-2Δf/h}`. The optional one-half factor is the recrossing correction
/// that halves the flux when the dividing surface sits at a true saddle.
pub fn ek_rate_interior(s: &SaddleData, h: f64, half_factor: bool) -> f64 {
    let pref = s.negative_eigenvalue.abs() / (2.0 * PI) * (s.det_hess_min / s.abs_det_hess_saddle).sqrt();
    let k = pref * (-2.0 * (s.f_saddle - s.f_min) / h).exp();
    if half_factor {
        0.5 * k
    } else {
        k
    }
}

/// Boundary (generalized-saddle) rate
/// `k = ∂_n f(z) / √(πh) · √det H(x0)/√det H_T(z) · e^{-2(f(z)-f(x0))/h}`.
pub fn ek_rate_boundary(z: &BoundaryMinimum, x0: &CriticalPoint, h: f64) -> f64 {
    ek_rate_boundary_raw(
        z.normal_derivative,
        x0.hess_det(),
        z.tangential_hess_det,
        z.f_value - x0.f_value,
        h,
    )
}

pub fn ek_rate_boundary_raw(
    normal_derivative: f64,
    det_hess_min: f64,
    tangential_hess_det: f64,
    delta_f: f64,
    h: f64,
) -> f64 {
    normal_derivative * (det_hess_min / tangential_hess_det).sqrt() / (PI * h).sqrt()
        * (-2.0 * delta_f / h).exp()
}

/// Principal-eigenvalue asymptotics: the sum of the boundary rates over the
/// global minima of f on ∂Ω, all measured from the global minimum x0.
pub fn lambda_asymptotic(landscape: &Landscape, h: f64) -> f64 {
    let x0 = match landscape.global_minimum() {
        Some(c) => c,
        None => return f64::NAN,
    };
    let n0 = landscape.report.n_0;
    landscape
        .boundary_minima
        .iter()
        .take(n0)
        .map(|z| ek_rate_boundary(z, x0, h))
        .sum()
}

/// Asymptotics of ∫ u_h e^{-2f/h}: `π^{d/4} (det H(x0))^{-1/4} h^{d/4} e^{-f(x0)/h}`.
pub fn uh_integral_asymptotic(x0: &CriticalPoint, h: f64, dim: usize) -> f64 {
    let d4 = dim as f64 / 4.0;
    PI.powf(d4) * x0.hess_det().powf(-0.25) * h.powf(d4) * (-x0.f_value / h).exp()
}

/// Boundary-flux constant
/// `C_i(h) = -(det H(x0))^{1/4} ∂_n f(z_i) 2π^{(d-2)/4} / √det H_T(z_i) · h^{(d-6)/4}`.
pub fn boundary_flux_constant(z: &BoundaryMinimum, x0: &CriticalPoint, h: f64, dim: usize) -> f64 {
    -(x0.hess_det().powf(0.25)) * z.normal_derivative * 2.0 * PI.powf((dim as f64 - 2.0) / 4.0)
        / z.tangential_hess_det.sqrt()
        * h.powf((dim as f64 - 6.0) / 4.0)
}

/// Curvature weight of one channel: `∂_n f(z) / √det H_T(z)`.
fn channel_weight(z: &BoundaryMinimum) -> f64 {
    z.normal_derivative / z.tangential_hess_det.sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitWeight {
    pub channel: usize,
    pub weight: f64,
    /// True when neither set of theorem preconditions held and the value is
    /// advisory only.
    pub advisory: bool,
}

/// Normalized exit weight of a channel.
///
/// When the single-component sublevel condition holds, the weights are the
/// curvature ratios over the boundary contacts of the component C. Otherwise
/// the weights run over the global boundary minima, and channels above the
/// lowest level are suppressed by `e^{-2(f(z_i)-f(z_1))/h}`; if the
/// single-well hypotheses fail too, the value is flagged advisory.
pub fn exit_weight(channel: usize, landscape: &Landscape, h: f64) -> ExitWeight {
    let zs = &landscape.boundary_minima;
    let report = &landscape.report;
    let fz1 = zs[0].f_value;
    if report.h_min && report.k_0 > 0 {
        // weights over the contact points of C
        let contacts: Vec<&BoundaryMinimum> = zs
            .iter()
            .filter(|z| {
                report
                    .boundary_contacts
                    .iter()
                    .any(|c| (c[0] - z.location[0]).abs() < 1e-6 && (c[1] - z.location[1]).abs() < 1e-6)
            })
            .collect();
        let total: f64 = contacts.iter().map(|z| channel_weight(z)).sum();
        let z = &zs[channel];
        let in_contacts = contacts
            .iter()
            .any(|c| (c.location[0] - z.location[0]).abs() < 1e-6);
        let weight = if in_contacts {
            channel_weight(z) / total
        } else {
            0.0
        };
        return ExitWeight {
            channel,
            weight,
            advisory: false,
        };
    }
    // generalized-saddle mode: normalize over the global boundary minima and
    // suppress higher channels exponentially
    let n0 = report.n_0;
    let total: f64 = zs.iter().take(n0).map(channel_weight).sum();
    let z = &zs[channel];
    let weight = channel_weight(z) / total * (-2.0 * (z.f_value - fz1) / h).exp();
    ExitWeight {
        channel,
        weight,
        advisory: !(report.h1 && report.h2 && report.h3),
    }
}

/// Jump-matrix eigenvalue of the reduced model between two wells: identical
/// kernel to the interior-saddle rate without the one-half factor.
pub fn bovier_eigenvalue(s: &SaddleData, h: f64) -> f64 {
    ek_rate_interior(s, h, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainGrid;
    use crate::potential::PotentialField;
    use approx::assert_relative_eq;

    fn p3_landscape() -> Landscape {
        let p = PotentialField::catalog("P3").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P3").unwrap(), (65, 65));
        Landscape::analyze(&p, &g).unwrap()
    }

    #[test]
    fn interior_rate_direct_substitution() {
        // f''(x0)=1, f''(z)=-1, Δf=1, h=0.5, no half factor: (1/2π) e^{-4}
        let s = SaddleData {
            f_saddle: 1.0,
            f_min: 0.0,
            negative_eigenvalue: -1.0,
            det_hess_min: 1.0,
            abs_det_hess_saddle: 1.0,
        };
        let k = ek_rate_interior(&s, 0.5, false);
        assert_relative_eq!(k, 0.0029150244650281935, max_relative = 1e-12);
        assert_relative_eq!(ek_rate_interior(&s, 0.5, true), k / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn prefactor_is_temperature_independent() {
        let s = SaddleData {
            f_saddle: 0.7,
            f_min: -0.1,
            negative_eigenvalue: -2.3,
            det_hess_min: 3.0,
            abs_det_hess_saddle: 1.7,
        };
        let df = s.f_saddle - s.f_min;
        let (h1, h2) = (0.31, 0.62);
        let ratio = ek_rate_interior(&s, h2, false) / ek_rate_interior(&s, h1, false);
        // only the exponential factor moves: k(2h)/k(h) = e^{Δf/h}
        assert_relative_eq!(ratio, (df / h1).exp(), max_relative = 1e-12);
    }

    #[test]
    fn boundary_rate_on_p3_channel() {
        // ∂_n f = 2, det H(x0) = 8, tangential det = 4, Δf = 1, h = 0.5:
        // k = (1/√(π·0.5)) · 2 · √(8/4) · e^{-4} = 2√2/√(π/2) · e^{-4}
        let l = p3_landscape();
        let x0 = l.global_minimum().unwrap();
        let z1 = &l.boundary_minima[0];
        let k = ek_rate_boundary(z1, x0, 0.5);
        assert_relative_eq!(k, 0.04133397070818411, max_relative = 1e-9);
    }

    #[test]
    fn d1_convention_uses_unit_tangential_det() {
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (512, 1));
        let l = Landscape::analyze(&p, &g).unwrap();
        let z = &l.boundary_minima[0];
        assert_eq!(z.tangential_hess_det, 1.0);
        let x0 = l.nearest_minimum(z.location).unwrap();
        let k = ek_rate_boundary(z, x0, 0.25);
        // ∂_n f(1.2) = 2.112, det H = 8, Δf = 0.1936
        let expect = 2.112 * 8.0f64.sqrt() / (PI * 0.25).sqrt() * (-2.0_f64 * 0.1936 / 0.25).exp();
        assert_relative_eq!(k, expect, max_relative = 1e-9);
    }

    #[test]
    fn lambda_asymptotic_sums_channel_rates() {
        let l = p3_landscape();
        let x0 = l.global_minimum().unwrap();
        let lam = lambda_asymptotic(&l, 0.5);
        let sum: f64 = l
            .boundary_minima
            .iter()
            .take(l.report.n_0)
            .map(|z| ek_rate_boundary(z, x0, 0.5))
            .sum();
        assert_eq!(lam, sum);
        // two symmetric lowest channels
        assert_relative_eq!(lam, 2.0 * 0.04133397070818411, max_relative = 1e-9);
    }

    #[test]
    fn uh_integral_asymptotic_values() {
        // d=1, f(x0)=0, f''=1, h=1: π^{1/4}
        let x0 = CriticalPoint {
            location: [0.0, 0.0],
            f_value: 0.0,
            index: 0,
            hess_eigenvalues: vec![1.0],
        };
        assert_relative_eq!(
            uh_integral_asymptotic(&x0, 1.0, 1),
            PI.powf(0.25),
            max_relative = 1e-12
        );
        // scaling in h at fixed landscape: h^{d/4}
        let r = uh_integral_asymptotic(&x0, 0.4, 1) / uh_integral_asymptotic(&x0, 0.1, 1);
        assert_relative_eq!(r, 4.0f64.powf(0.25), max_relative = 1e-12);
    }

    #[test]
    fn boundary_flux_constant_sign_and_scaling() {
        let l = p3_landscape();
        let x0 = l.global_minimum().unwrap();
        let z1 = &l.boundary_minima[0];
        let c = boundary_flux_constant(z1, x0, 0.3, 2);
        assert!(c < 0.0);
        // d=2 scales as h^{-1}
        let r = boundary_flux_constant(z1, x0, 0.2, 2) / boundary_flux_constant(z1, x0, 0.4, 2);
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn flux_constant_reproduces_exit_weight_algebra() {
        // -(h/(2λ_asym)) C_i(h) e^{-(2f(z_i)-f(x_0))/h} / uh_asym equals the
        // normalized curvature weight of channel i (checked at h = 0.3)
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (512, 1));
        let l = Landscape::analyze(&p, &g).unwrap();
        let h = 0.3;
        // the algebraic identity concerns the single-well formulas; feed it
        // a synthetic well so x0 is unique
        let x0 = CriticalPoint {
            location: [-1.0, 0.0],
            f_value: 0.0,
            index: 0,
            hess_eigenvalues: vec![8.0],
        };
        let zs = &l.boundary_minima;
        let lam_asym: f64 = zs.iter().map(|z| ek_rate_boundary(z, &x0, h)).sum();
        let uh_asym = uh_integral_asymptotic(&x0, h, 1);
        for (i, z) in zs.iter().enumerate() {
            let ci = boundary_flux_constant(z, &x0, h, 1);
            let flux = ci * (-(2.0 * z.f_value - x0.f_value) / h).exp();
            let prob = -(h / (2.0 * lam_asym)) * flux / uh_asym;
            let expected = channel_weight(z)
                / zs.iter().map(channel_weight).sum::<f64>()
                * (-2.0 * (z.f_value - zs[0].f_value) / h).exp();
            assert_relative_eq!(prob, expected, max_relative = 1e-10, epsilon = 1e-14);
            let _ = i;
        }
    }

    #[test]
    fn exit_weights_p3() {
        let l = p3_landscape();
        // two symmetric lowest channels: 1/2 each
        let w0 = exit_weight(0, &l, 0.5);
        let w1 = exit_weight(1, &l, 0.5);
        assert_relative_eq!(w0.weight, 0.5, max_relative = 1e-9);
        assert_relative_eq!(w1.weight, 0.5, max_relative = 1e-9);
        assert!(!w0.advisory);
    }

    #[test]
    fn exit_weight_suppression_in_saddle_mode() {
        // force the generalized-saddle branch with a synthetic landscape
        // whose report has h_min = false: use P1 (split wells)
        let p = PotentialField::catalog("P1").unwrap();
        let g = DomainGrid::new(PotentialField::default_domain("P1").unwrap(), (512, 1));
        let l = Landscape::analyze(&p, &g).unwrap();
        let w = exit_weight(0, &l, 0.5);
        assert_relative_eq!(w.weight, 0.5, max_relative = 1e-9);
        // P1 fails [H2], so the saddle-mode value is advisory
        assert!(w.advisory);
    }

    #[test]
    fn rate_invariance_under_potential_shift() {
        let s1 = SaddleData {
            f_saddle: 1.3,
            f_min: 0.2,
            negative_eigenvalue: -0.9,
            det_hess_min: 2.0,
            abs_det_hess_saddle: 0.8,
        };
        let mut s2 = s1;
        s2.f_saddle += 5.0;
        s2.f_min += 5.0;
        assert_relative_eq!(
            ek_rate_interior(&s1, 0.37, false),
            ek_rate_interior(&s2, 0.37, false),
            max_relative = 1e-12
        );
    }

    #[test]
    fn bovier_equals_interior_without_half() {
        let s = SaddleData {
            f_saddle: 1.0,
            f_min: 0.0,
            negative_eigenvalue: -4.0,
            det_hess_min: 8.0,
            abs_det_hess_saddle: 4.0,
        };
        assert_eq!(bovier_eigenvalue(&s, 0.25), ek_rate_interior(&s, 0.25, false));
    }

    #[test]
    fn rates_decrease_in_barrier() {
        let mk = |df: f64| SaddleData {
            f_saddle: df,
            f_min: 0.0,
            negative_eigenvalue: -1.0,
            det_hess_min: 1.0,
            abs_det_hess_saddle: 1.0,
        };
        let ks: Vec<f64> = [0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&df| ek_rate_interior(&mk(df), 0.3, false))
            .collect();
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
    }
}

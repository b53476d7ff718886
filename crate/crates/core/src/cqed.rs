//! Josephson-junction-array waveguide: dispersion relation, phase velocity,
//! and the mapping from hardware values to the dimensionless system
//! description.
//!
//! This module is the only unit boundary in the crate. Everything here works
//! in SI units (henry, farad, meter, rad/s); everything downstream of
//! [`to_system_params`] is dimensionless with `γ = 1`.

use std::f64::consts::PI;

use crate::params::{Parity, SystemParams};
use crate::{Error, Result};

/// Lumped-element description of a junction-array waveguide: each cell is an
/// LC oscillator (`l_j`, `c_j`) shunted to ground through `c_g`, repeated
/// `n_cells` times with pitch `a`.
#[derive(Clone, Copy, Debug)]
pub struct JJArrayParams {
    l_j: f64,
    c_j: f64,
    c_g: f64,
    a: f64,
    n_cells: u32,
}

impl JJArrayParams {
    pub fn new(l_j: f64, c_j: f64, c_g: f64, a: f64, n_cells: u32) -> Result<Self> {
        for (name, value) in [("l_j", l_j), ("c_j", c_j), ("c_g", c_g), ("a", a)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, value, "must be finite and positive"));
            }
        }
        if n_cells < 2 {
            return Err(Error::invalid(
                "n_cells",
                n_cells as f64,
                "need at least two cells",
            ));
        }
        Ok(JJArrayParams {
            l_j,
            c_j,
            c_g,
            a,
            n_cells,
        })
    }

    /// The chain used for all worked numbers: 1 nH junctions of 1 fF, 100 fF
    /// to ground, 10 µm cells, 2000 of them.
    pub fn standard() -> Self {
        JJArrayParams {
            l_j: 1e-9,
            c_j: 1e-15,
            c_g: 100e-15,
            a: 10e-6,
            n_cells: 2000,
        }
    }

    pub fn l_j(&self) -> f64 {
        self.l_j
    }

    pub fn c_j(&self) -> f64 {
        self.c_j
    }

    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    pub fn cell_length(&self) -> f64 {
        self.a
    }

    pub fn n_cells(&self) -> u32 {
        self.n_cells
    }

    /// Plasma frequency `1/√(L_J C_J)` of a single junction, the scale the
    /// band saturates towards.
    pub fn plasma_frequency(&self) -> f64 {
        1.0 / (self.l_j * self.c_j).sqrt()
    }

    /// Top of the propagation band, the dispersion evaluated at `ka = π`.
    pub fn band_edge(&self) -> f64 {
        let r = self.c_g / (2.0 * self.c_j);
        self.plasma_frequency() * (2.0 / (r + 2.0)).sqrt()
    }

    /// Dimensionless wavenumber of the `n`-th standing mode of the finite
    /// chain, `ka = nπ/N` for `n ∈ [1, N]`.
    pub fn mode_ka(&self, n: u32) -> Result<f64> {
        if n < 1 || n > self.n_cells {
            return Err(Error::invalid(
                "n",
                n as f64,
                "mode index must lie in [1, n_cells]",
            ));
        }
        Ok(n as f64 * PI / self.n_cells as f64)
    }
}

/// Angular frequency of the array mode at dimensionless wavenumber
/// `ka ∈ (0, π]`:
/// `ω = ω_plasma √[(1 − cos ka)/(C_g/(2C_J) + (1 − cos ka))]`,
/// strictly increasing in `ka`.
pub fn dispersion(jj: &JJArrayParams, ka: f64) -> Result<f64> {
    if !ka.is_finite() || ka <= 0.0 || ka > PI {
        return Err(Error::invalid("ka", ka, "must lie in (0, pi]"));
    }
    // 2 sin²(ka/2) = 1 − cos ka without the cancellation at small ka,
    // where the acoustic branch must come out linear to full precision.
    let half_sin = (0.5 * ka).sin();
    let u = 2.0 * half_sin * half_sin;
    let r = jj.c_g / (2.0 * jj.c_j);
    Ok(jj.plasma_frequency() * (u / (r + u)).sqrt())
}

/// Phase velocity `v = ω/k` at `omega`, with `k` found by bisecting the
/// monotone dispersion on `ka ∈ (0, π]`. Frequencies above the band edge are
/// rejected with the edge in the error.
pub fn phase_velocity(jj: &JJArrayParams, omega: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::invalid("omega", omega, "must be finite and positive"));
    }
    let band_edge = jj.band_edge();
    if omega > band_edge {
        return Err(Error::OutsideBand { omega, band_edge });
    }
    let mut lo = 0.0f64;
    let mut hi = PI;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dispersion(jj, mid)? < omega {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let ka = 0.5 * (lo + hi);
    Ok(omega * jj.a / ka)
}

/// Hardware description of the two-emitter experiment: transition frequency
/// and decay rate in rad/s, coupling efficiency, physical separation along
/// the array, and the array itself.
#[derive(Clone, Copy, Debug)]
pub struct PhysicalSetup {
    omega0: f64,
    gamma: f64,
    beta: f64,
    d: f64,
    jj: JJArrayParams,
}

impl PhysicalSetup {
    pub fn new(omega0: f64, gamma: f64, beta: f64, d: f64, jj: JJArrayParams) -> Result<Self> {
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(Error::invalid(
                "omega0",
                omega0,
                "must be finite and positive",
            ));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::invalid("gamma", gamma, "must be finite and positive"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid("beta", beta, "must lie in [0, 1]"));
        }
        if !d.is_finite() || d < 0.0 {
            return Err(Error::invalid("d", d, "must be finite and nonnegative"));
        }
        Ok(PhysicalSetup {
            omega0,
            gamma,
            beta,
            d,
            jj,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn separation(&self) -> f64 {
        self.d
    }

    pub fn jj(&self) -> &JJArrayParams {
        &self.jj
    }
}

/// Reduce a hardware setup to the dimensionless description:
/// `η = γd/v(ω₀)`, `φ_p = ω₀d/v(ω₀)`, `ω₀/γ` carried for phase bookkeeping,
/// and the physical `γ` kept for unit restoration on output.
pub fn to_system_params(setup: &PhysicalSetup) -> Result<SystemParams> {
    let ratio = setup.omega0 / setup.gamma;
    if setup.d == 0.0 {
        return SystemParams::physical(setup.gamma, setup.beta, 0.0, ratio);
    }
    let v = phase_velocity(&setup.jj, setup.omega0)?;
    let eta = setup.gamma * setup.d / v;
    SystemParams::physical(setup.gamma, setup.beta, eta, ratio)
}

/// Separation nearest `target_eta` whose propagation phase is an exact even
/// or odd multiple of π at the given frequency ratio. Returns the snapped
/// retardation and the integer `p` with `φ_p = 2pπ` (even) or `(2p+1)π`
/// (odd). Odd parity cannot reach zero separation; its smallest snap is
/// `π/ratio`.
pub fn nearest_commensurate_eta(
    target_eta: f64,
    omega0_over_gamma: f64,
    parity: Parity,
) -> Result<(f64, u64)> {
    let (params, p) = SystemParams::commensurate(0.0, target_eta, omega0_over_gamma, parity)?;
    Ok((params.eta(), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn standard_chain_reference_numbers() {
        let jj = JJArrayParams::standard();
        assert_relative_eq!(jj.plasma_frequency(), 1e12, max_relative = 1e-14);
        assert_relative_eq!(jj.band_edge(), 196116135138.18404, max_relative = 1e-12);

        let omega0 = TWO_PI * 5e9;
        let v = phase_velocity(&jj, omega0).unwrap();
        assert_relative_eq!(v, 995362.868779505, max_relative = 1e-9);
        let ka = omega0 * jj.cell_length() / v;
        assert_relative_eq!(ka, 0.315622849930293, max_relative = 1e-9);
        // About c/300.
        assert!((v / 2.99792458e8 - 1.0 / 300.0).abs() < 2e-4);
    }

    #[test]
    fn acoustic_limit_is_linear() {
        let jj = JJArrayParams::standard();
        let ka = 1e-6;
        let want = ka / (jj.l_j() * jj.c_g()).sqrt();
        assert_relative_eq!(dispersion(&jj, ka).unwrap(), want, max_relative = 1e-11);
        // The velocity at a low frequency approaches a/√(L_J C_g) = 1e6 m/s.
        let omega = dispersion(&jj, ka).unwrap();
        let v = phase_velocity(&jj, omega).unwrap();
        assert_relative_eq!(
            v,
            jj.cell_length() / (jj.l_j() * jj.c_g()).sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn band_edge_formula_and_rejection() {
        let jj = JJArrayParams::standard();
        let edge = jj.band_edge();
        assert_relative_eq!(dispersion(&jj, PI).unwrap(), edge, max_relative = 1e-14);
        assert!(phase_velocity(&jj, edge).is_ok());
        match phase_velocity(&jj, edge * 1.000001) {
            Err(Error::OutsideBand { band_edge, .. }) => {
                assert_relative_eq!(band_edge, edge, max_relative = 1e-15);
            }
            other => panic!("expected an out-of-band rejection, got {other:?}"),
        }
        assert!(dispersion(&jj, 0.0).is_err());
        assert!(dispersion(&jj, PI * 1.0001).is_err());
    }

    #[test]
    fn dispersion_is_strictly_increasing() {
        let jj = JJArrayParams::standard();
        let mut prev = 0.0;
        for i in 1..=500 {
            let ka = PI * i as f64 / 500.0;
            let w = dispersion(&jj, ka).unwrap();
            assert!(w > prev, "ka = {ka}");
            prev = w;
        }
    }

    #[test]
    fn velocity_inversion_round_trips() {
        let jj = JJArrayParams::standard();
        // Interior of the band: dω/d(ka) is bounded away from zero here and
        // the bisection recovers ka to full precision.
        for i in 1..=39 {
            let ka = PI * i as f64 / 40.0;
            let omega = dispersion(&jj, ka).unwrap();
            let v = phase_velocity(&jj, omega).unwrap();
            let back = omega * jj.cell_length() / v;
            assert_relative_eq!(back, ka, max_relative = 1e-10);
        }
        // At the band edge the dispersion is flat, so ka is recovered only to
        // the square-root conditioning limit of f64.
        let omega = dispersion(&jj, PI).unwrap();
        let v = phase_velocity(&jj, omega).unwrap();
        let back = omega * jj.cell_length() / v;
        assert_relative_eq!(back, PI, max_relative = 1e-6);
    }

    #[test]
    fn discrete_modes_tile_the_band() {
        let jj = JJArrayParams::standard();
        assert!(jj.mode_ka(0).is_err());
        assert!(jj.mode_ka(2001).is_err());
        assert_relative_eq!(jj.mode_ka(2000).unwrap(), PI, max_relative = 1e-15);
        let low = dispersion(&jj, jj.mode_ka(1).unwrap()).unwrap();
        let high = dispersion(&jj, jj.mode_ka(2000).unwrap()).unwrap();
        assert!(low < high);
        assert_relative_eq!(high, jj.band_edge(), max_relative = 1e-14);
    }

    #[test]
    fn table_values_give_unit_retardation() {
        let setup = PhysicalSetup::new(
            TWO_PI * 5e9,
            TWO_PI * 10e6,
            0.95,
            1.6e-2,
            JJArrayParams::standard(),
        )
        .unwrap();
        let p = to_system_params(&setup).unwrap();
        assert_relative_eq!(p.omega0_over_gamma(), 500.0, max_relative = 1e-14);
        assert_relative_eq!(p.eta(), 1.00999311977694, max_relative = 1e-9);
        assert_relative_eq!(p.phi_p(), 504.996559888468, max_relative = 1e-9);
        assert_relative_eq!(p.gamma(), TWO_PI * 10e6, max_relative = 1e-15);
        assert_relative_eq!(p.beta(), 0.95, max_relative = 1e-15);
    }

    #[test]
    fn zero_separation_maps_to_zero_phase() {
        let setup = PhysicalSetup::new(
            TWO_PI * 5e9,
            TWO_PI * 10e6,
            0.5,
            0.0,
            JJArrayParams::standard(),
        )
        .unwrap();
        let p = to_system_params(&setup).unwrap();
        assert_eq!(p.eta(), 0.0);
        assert_eq!(p.phi_p(), 0.0);
    }

    #[test]
    fn coherent_unit_rescalings_leave_the_mapping_invariant() {
        let reference = to_system_params(
            &PhysicalSetup::new(
                TWO_PI * 5e9,
                TWO_PI * 10e6,
                0.95,
                1.6e-2,
                JJArrayParams::standard(),
            )
            .unwrap(),
        )
        .unwrap();

        // Impedance rescaling: L ×4, all C ÷4 keeps every frequency and
        // length, so the dimensionless output is identical.
        let jj = JJArrayParams::new(4e-9, 0.25e-15, 25e-15, 10e-6, 2000).unwrap();
        let scaled = to_system_params(
            &PhysicalSetup::new(TWO_PI * 5e9, TWO_PI * 10e6, 0.95, 1.6e-2, jj).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(scaled.eta(), reference.eta(), max_relative = 1e-12);
        assert_relative_eq!(scaled.phi_p(), reference.phi_p(), max_relative = 1e-12);

        // Time rescaling: all inductances ×s² slows every rate by s; feeding
        // the correspondingly slowed ω₀ and γ lands on the same η and φ_p.
        let s = 1e3;
        let jj = JJArrayParams::new(1e-9 * s * s, 1e-15, 100e-15, 10e-6, 2000).unwrap();
        let slowed = to_system_params(
            &PhysicalSetup::new(TWO_PI * 5e9 / s, TWO_PI * 10e6 / s, 0.95, 1.6e-2, jj).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(slowed.eta(), reference.eta(), max_relative = 1e-12);
        assert_relative_eq!(slowed.phi_p(), reference.phi_p(), max_relative = 1e-12);
    }

    #[test]
    fn commensurate_snapping_reference_points() {
        let (eta, p) = nearest_commensurate_eta(0.56, 500.0, Parity::Even).unwrap();
        assert_eq!(p, 45);
        assert_relative_eq!(eta, TWO_PI * 45.0 / 500.0, max_relative = 1e-14);

        let (eta, p) = nearest_commensurate_eta(20.0, 500.0, Parity::Even).unwrap();
        assert_eq!(p, 1592);
        assert_relative_eq!(eta, 20.005662018059803, max_relative = 1e-13);

        let (eta, p) = nearest_commensurate_eta(0.0, 500.0, Parity::Even).unwrap();
        assert_eq!((eta, p), (0.0, 0));

        // Odd parity cannot reach zero separation.
        let (eta, p) = nearest_commensurate_eta(0.0, 500.0, Parity::Odd).unwrap();
        assert_eq!(p, 0);
        assert_relative_eq!(eta, PI / 500.0, max_relative = 1e-15);
    }
}

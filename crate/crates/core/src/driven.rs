//! Weak coherent driving of the symmetric channel: steady-state response,
//! switch-on transient, the excitation landscape over retardation and drive
//! detuning, and the spectrum of the scattered light.
//!
//! The drive couples equally to both emitters, so only the `+` channel
//! responds. Amplitudes are linear in the Rabi rate; the linear-response
//! treatment is trustworthy for `Ω ≲ γ`, which [`DriveParams::is_perturbative`]
//! reports.

use std::f64::consts::PI;

use crate::params::{Parity, Sign, SystemParams};
use crate::series::{
    accel_robust, branch_exp_mode_sum, branch_mode_sq_sum, branch_mode_sum, mode_pairs_for,
    BranchTable,
};
use crate::spectrum::{resonance_peaks, FrequencyGrid, SpectrumPoint};
use crate::{C64, Error, Result};

/// Drive strength and detuning, both in units of `γ`. `detuning_d` is the
/// emitter-minus-drive detuning `(ω₀ − ω_D)/γ`.
#[derive(Clone, Copy, Debug)]
pub struct DriveParams {
    rabi: f64,
    detuning_d: f64,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning_d: f64) -> Result<Self> {
        if !rabi.is_finite() || rabi < 0.0 {
            return Err(Error::invalid("rabi", rabi, "must be finite and >= 0"));
        }
        if !detuning_d.is_finite() {
            return Err(Error::invalid("detuning_d", detuning_d, "must be finite"));
        }
        Ok(Self { rabi, detuning_d })
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn detuning_d(&self) -> f64 {
        self.detuning_d
    }

    /// Whether the linear-response description applies.
    pub fn is_perturbative(&self) -> bool {
        self.rabi <= 1.0
    }
}

/// `λ` image of a detuning for the conjugate-ladder resolvent sums.
fn lambda_of(params: &SystemParams, detuning: f64) -> C64 {
    C64::new(0.5 * params.eta(), -params.eta() * detuning)
}

/// Steady-state amplitude of the driven symmetric channel, closed form:
/// `c̄ = Ω / ([Δ_D + (β/2) sin Ψ] + (i/2)[1 + β cos Ψ])` with `Ψ = ω_D d/v`
/// the round-trip phase at the drive frequency.
pub fn c_plus_steady_closed(params: &SystemParams, drive: &DriveParams) -> Result<C64> {
    let (sin_psi, cos_psi) = params.round_trip_sin_cos(-drive.detuning_d());
    let beta = params.beta();
    let denom = C64::new(
        drive.detuning_d() + 0.5 * beta * sin_psi,
        0.5 * (1.0 + beta * cos_psi),
    );
    if denom.norm() < 1e-12 {
        return Err(Error::Unsupported(
            "the drive is resonant with an undamped dark mode",
        ));
    }
    Ok(drive.rabi() / denom)
}

/// The same steady state summed over the conjugate branch ladder with closed
/// tails: `c̄ = iΩη Σ_n 1/[(1+V_n)(V_n − λ_D)]`, `λ_D = η/2 − iηΔ_D`.
/// Requires `η > 0`.
pub fn c_plus_steady_modes(
    params: &SystemParams,
    drive: &DriveParams,
    n_max: u32,
) -> Result<C64> {
    if params.eta() <= 0.0 {
        return Err(Error::Unsupported(
            "the branch-ladder steady state requires a nonzero retardation",
        ));
    }
    if params.beta() == 0.0 {
        return c_plus_steady_closed(params, drive);
    }
    let lam = lambda_of(params, drive.detuning_d());
    let z = params.lambert_argument(Sign::Plus).conj();
    let table = BranchTable::new(z, mode_pairs_for(lam, n_max as usize))?;
    let value = C64::new(0.0, drive.rabi() * params.eta()) * branch_mode_sum(&table, lam)?;
    // In debug builds every call is checked against the closed form.
    #[cfg(debug_assertions)]
    if let Ok(closed) = c_plus_steady_closed(params, drive) {
        let scale = closed.norm().max(drive.rabi()).max(1e-300);
        debug_assert!(
            (value - closed).norm() <= 1e-7 * scale,
            "ladder steady state drifted from the closed form: {value} vs {closed}"
        );
    }
    Ok(value)
}

/// Ladder form of the steady state as printed in the reference treatment:
/// `c̄ = Ω Σ_n α_n* / [(−Δ_D + Δω_n) + iΓ_n]`, with the drive detuning
/// entering each resonance denominator with the opposite sign and the full
/// (not half) width. This variant does not reproduce the long-time limit of
/// [`c_plus_transient`]; it is kept so the discrepancy against
/// [`c_plus_steady_closed`] can be quantified.
pub fn c_plus_steady_modes_variant(
    params: &SystemParams,
    drive: &DriveParams,
    n_max: u32,
) -> Result<C64> {
    if params.eta() <= 0.0 {
        return Err(Error::Unsupported(
            "the branch-ladder steady state requires a nonzero retardation",
        ));
    }
    if params.beta() == 0.0 {
        return Ok(drive.rabi()
            / C64::new(-drive.detuning_d(), 1.0));
    }
    let eta = params.eta();
    let z = params.lambert_argument(Sign::Plus);
    let term = |n: i32| -> Result<C64> {
        let w = crate::lambert::lambert_w(n, z)?.w;
        let shift = -w.im / eta;
        let width = 1.0 - 2.0 * w.re / eta;
        let alpha_conj = (1.0 + w).finv().conj();
        Ok(drive.rabi() * alpha_conj
            / C64::new(-drive.detuning_d() + shift, width))
    };
    let mut shells = Vec::with_capacity(n_max as usize + 1);
    shells.push(term(0)?);
    for k in 1..=n_max as i32 {
        shells.push(term(k)? + term(-k)?);
    }
    let (value, _err) = accel_robust(&shells);
    Ok(value)
}

/// Switch-on transient of the driven symmetric channel, `c(0) = 0`, through
/// the conjugate branch ladder:
/// `c(t) = iΩη [S(λ_D) − e^{(iΔ_D − 1/2)t} Σ_n e^{V_n t/η}/((1+V_n)(V_n − λ_D))]`.
pub fn c_plus_transient(
    params: &SystemParams,
    drive: &DriveParams,
    t: f64,
    n_max: u32,
) -> Result<C64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be finite and nonnegative"));
    }
    let steady = c_plus_steady_closed(params, drive)?;
    let pole_exp = |rate: C64| (rate * t).exp();
    if params.eta() == 0.0 || params.beta() == 0.0 {
        // Single collective pole: c(t) = c̄ (1 − e^{(iΔ_D − Γ/2)t}).
        let width = 1.0 + params.beta() * params.phase_factor().re;
        let x = C64::new(-0.5 * width, drive.detuning_d());
        return Ok(steady * (C64::new(1.0, 0.0) - pole_exp(x)));
    }
    let eta = params.eta();
    let lam = lambda_of(params, drive.detuning_d());
    let z = params.lambert_argument(Sign::Plus).conj();
    let table = BranchTable::new(z, mode_pairs_for(lam, n_max as usize))?;
    let s_steady = branch_mode_sum(&table, lam)?;
    let (s_ring, _err) = branch_exp_mode_sum(&table, t / eta, lam)?;
    let envelope = pole_exp(C64::new(-0.5, drive.detuning_d()));
    Ok(C64::new(0.0, drive.rabi() * eta) * (s_steady - envelope * s_ring))
}

/// Steady excitation probability `|c₊|²` over a grid of commensurate
/// retardations and drive detunings, with the resonance ladder of each row
/// for overlaying the ridge structure.
#[derive(Clone, Debug)]
pub struct ExcitationMap {
    pub etas: Vec<f64>,
    pub windings: Vec<u64>,
    pub detunings: Vec<f64>,
    /// `probabilities[i][j]` belongs to `etas[i]`, `detunings[j]`.
    pub probabilities: Vec<Vec<f64>>,
    /// Resonance detunings of the symmetric channel per row.
    pub ridges: Vec<Vec<f64>>,
}

pub fn excitation_map(
    beta: f64,
    omega0_over_gamma: f64,
    parity: Parity,
    eta_targets: &[f64],
    detunings: &[f64],
    rabi: f64,
    ridge_branches: u32,
) -> Result<ExcitationMap> {
    let mut map = ExcitationMap {
        etas: Vec::with_capacity(eta_targets.len()),
        windings: Vec::with_capacity(eta_targets.len()),
        detunings: detunings.to_vec(),
        probabilities: Vec::with_capacity(eta_targets.len()),
        ridges: Vec::with_capacity(eta_targets.len()),
    };
    for &target in eta_targets {
        let (params, winding) =
            SystemParams::commensurate(beta, target, omega0_over_gamma, parity)?;
        let row = detunings
            .iter()
            .map(|&detuning_d| {
                let drive = DriveParams::new(rabi, detuning_d)?;
                Ok(c_plus_steady_closed(&params, &drive)?.norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?;
        let ridge = resonance_peaks(&params, Sign::Plus, ridge_branches)?
            .into_iter()
            .map(|p| p.detuning)
            .collect();
        map.etas.push(params.eta());
        map.windings.push(winding);
        map.probabilities.push(row);
        map.ridges.push(ridge);
    }
    Ok(map)
}

/// The coherent (elastic) part of the scattered light: a monochromatic line
/// pinned at the bare transition frequency in the first-order treatment,
/// reported as its detuning from that transition (always `0`) and the summed
/// squared coefficient of the singular kernel over both propagation
/// directions.
#[derive(Clone, Copy, Debug)]
pub struct ElasticLine {
    pub detuning: f64,
    pub weight: f64,
}

/// Spectrum of the light scattered by the weakly driven pair: a smooth
/// inelastic continuum sampled on `grid` plus the elastic line, tagged
/// separately and never smeared onto the grid. `elastic` is `None` when the
/// spectrum was requested with the resonant line filtered out.
#[derive(Clone, Debug)]
pub struct ScatteredSpectrum {
    pub points: Vec<SpectrumPoint>,
    pub elastic: Option<ElasticLine>,
}

/// Scattered-light spectrum at weak driving. Detunings on `grid` are
/// measured from the bare transition; the inelastic continuum rings at the
/// collective resonances offset by the drive. With `filter_resonant` the
/// elastic line is dropped from the report, mirroring a notch filter at the
/// transition frequency; otherwise it is returned as a tagged singular
/// component.
pub fn scattered_spectrum(
    params: &SystemParams,
    drive: &DriveParams,
    grid: &FrequencyGrid,
    filter_resonant: bool,
    n_max: u32,
) -> Result<ScatteredSpectrum> {
    let beta = params.beta();
    let amp_gate = (beta / PI).sqrt() * drive.rabi();

    // Elastic line: the steady dipole radiating through the standing-wave
    // vertex. The first-order amplitude keeps the singular kernel at the
    // bare transition, so the line weight carries the vertex at zero
    // detuning.
    let elastic = if filter_resonant {
        None
    } else {
        let steady = c_plus_steady_closed(params, drive)?;
        let (_, cos_h) = params.half_round_trip_sin_cos(0.0);
        Some(ElasticLine {
            detuning: 0.0,
            weight: 2.0 * (beta / PI) * cos_h * cos_h * steady.norm_sqr(),
        })
    };

    let mut points = Vec::with_capacity(grid.points().len());
    if beta == 0.0 {
        let zero = C64::new(0.0, 0.0);
        for &detuning in grid.points() {
            points.push(SpectrumPoint {
                detuning,
                amplitude_right: zero,
                amplitude_left: zero,
            });
        }
        return Ok(ScatteredSpectrum { points, elastic });
    }

    enum Ladder {
        Single(f64),
        Table(Box<BranchTable>, C64),
    }
    let ladder = if params.eta() == 0.0 {
        Ladder::Single(1.0 + beta * params.phase_factor().re)
    } else {
        let lam_d = lambda_of(params, drive.detuning_d());
        let z = params.lambert_argument(Sign::Plus).conj();
        // Size the ladder for the widest λ on the grid.
        let lam_edge = grid
            .points()
            .iter()
            .map(|&d| lambda_of(params, d + drive.detuning_d()))
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(lam_d);
        let pairs = mode_pairs_for(lam_d, n_max as usize).max(mode_pairs_for(lam_edge, 0));
        Ladder::Table(Box::new(BranchTable::new(z, pairs)?), lam_d)
    };

    for &detuning in grid.points() {
        let (_, cos_h) = params.half_round_trip_sin_cos(detuning);
        let pole_sum = match &ladder {
            Ladder::Single(width) => {
                let dd = C64::new(drive.detuning_d(), 0.5 * width);
                let ds = C64::new(detuning + drive.detuning_d(), 0.5 * width);
                (dd * ds).finv()
            }
            Ladder::Table(table, lam_d) => {
                let lam_s = lambda_of(params, detuning + drive.detuning_d());
                let gap = *lam_d - lam_s;
                let resolvent = if gap.norm() > 1e-6 {
                    (branch_mode_sum(table, *lam_d)? - branch_mode_sum(table, lam_s)?) / gap
                } else {
                    branch_mode_sq_sum(table, *lam_d)?
                };
                // (iη)² restores the per-resonance denominators.
                -params.eta() * params.eta() * resolvent
            }
        };
        // Both directions carry the symmetric channel through the cos vertex.
        let amplitude = -amp_gate * cos_h * pole_sum;
        points.push(SpectrumPoint {
            detuning,
            amplitude_right: amplitude,
            amplitude_left: amplitude,
        });
    }
    Ok(ScatteredSpectrum { points, elastic })
}

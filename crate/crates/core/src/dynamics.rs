//! Collective channel amplitudes `c_±(t)` and the effective single-emitter
//! rates and line shifts built from them.
//!
//! Two independent exact routes are provided. The reflection series counts
//! round trips of the emitted field and terminates after `⌊t/η⌋` terms, so it
//! is the production path at finite time. The branch expansion sums the full
//! Lambert ladder `Σ_n α_n e^{−γ_n t/2}` with the tail machinery; it converges
//! to the same amplitude and exposes the mode structure (rates, shifts,
//! weights) used by the spectral modules.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::lambert::lambert_w;
use crate::params::{InitialState, Sign, SystemParams};
use crate::series::{branch_exp_sum, BranchTable};
use crate::{C64, Error, Result};

/// One rung of the decay ladder for a collective channel.
#[derive(Clone, Copy, Debug)]
pub struct BranchMode {
    pub n: i32,
    pub w: C64,
    /// Complex rate `γ_n = 1 − 2W_n/η`; the real part is the resonance width,
    /// the imaginary part twice the resonance shift.
    pub decay: C64,
    /// Residue weight `α_n = 1/(1 + W_n)`.
    pub weight: C64,
}

/// Ladder `n = −n_max..=n_max` for the channel `sign`. Needs `η > 0`.
pub fn branch_modes(params: &SystemParams, sign: Sign, n_max: u32) -> Result<Vec<BranchMode>> {
    if params.eta() <= 0.0 {
        return Err(Error::Unsupported(
            "the branch ladder requires a nonzero retardation",
        ));
    }
    let z = params.lambert_argument(sign);
    let half_eta = 0.5 * params.eta();
    (-(n_max as i32)..=n_max as i32)
        .map(|n| {
            let w = lambert_w(n, z)?.w;
            Ok(BranchMode {
                n,
                w,
                decay: (C64::new(1.0, 0.0) - w / half_eta),
                weight: (1.0 + w).finv(),
            })
        })
        .collect()
}

/// Exact finite-time amplitude by summing field round trips:
/// `c_±(t) = (1/√2) Σ_n [(∓βe^{iφ_p})^n/n!] ((t−nη)/2)^n e^{−(t−nη)/2}`.
pub fn c_pm_reflection(params: &SystemParams, sign: Sign, t: f64) -> Result<C64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be finite and nonnegative"));
    }
    let beta = params.beta();
    let eta = params.eta();
    if eta == 0.0 {
        // All round trips collapse: c = (1/√2) e^{−(1 ± β)t/2}.
        let rate = 1.0 + sign.signum() * beta * params.phase_factor().re;
        return Ok(C64::new(FRAC_1_SQRT_2 * (-0.5 * rate * t).exp(), 0.0));
    }
    let x = -sign.signum() * beta * params.phase_factor();
    let bounces = (t / eta + 1e-12).floor() as usize;
    let mut sum = C64::new((-0.5 * t).exp(), 0.0);
    let mut xp = C64::new(1.0, 0.0);
    let mut lgamma = 0.0; // ln n!
    for n in 1..=bounces {
        xp *= x;
        lgamma += (n as f64).ln();
        let half = 0.5 * (t - n as f64 * eta);
        if half <= 0.0 {
            continue;
        }
        let log_mag = n as f64 * half.ln() - lgamma - half;
        sum += xp * log_mag.exp();
    }
    Ok(sum * FRAC_1_SQRT_2)
}

/// Branch-ladder amplitude: `c_±(t) = (e^{−t/2}/√2) Σ_n e^{W_n t/η}/(1+W_n)`,
/// summed over the whole ladder with closed tails. The shell sum lands on the
/// Gibbs midpoint at the causal discontinuity `t = 0`, where the value is
/// doubled to restore `c_±(0) = 1/√2`. Needs `η > 0` and `β > 0`.
pub fn c_pm_lambert(params: &SystemParams, sign: Sign, t: f64, n_max: u32) -> Result<C64> {
    let (value, _) = c_pm_lambert_detailed(params, sign, t, n_max)?;
    Ok(value)
}

/// Like [`c_pm_lambert`] but also returns the internal error estimate.
pub fn c_pm_lambert_detailed(
    params: &SystemParams,
    sign: Sign,
    t: f64,
    n_max: u32,
) -> Result<(C64, f64)> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("t", t, "must be finite and nonnegative"));
    }
    if params.eta() <= 0.0 {
        return Err(Error::Unsupported(
            "the branch expansion requires a nonzero retardation",
        ));
    }
    let z = params.lambert_argument(sign);
    if z.norm() == 0.0 {
        // β = 0: a single uncoupled pole.
        return Ok((C64::new(FRAC_1_SQRT_2 * (-0.5 * t).exp(), 0.0), 0.0));
    }
    let tau = t / params.eta();
    let mut k_pairs = (n_max as usize).max(300);
    loop {
        let table = BranchTable::new(z, k_pairs)?;
        let (mut g, err) = branch_exp_sum(&table, tau, 1e-10)?;
        if t == 0.0 {
            g *= 2.0;
        }
        let value = g * C64::new(FRAC_1_SQRT_2 * (-0.5 * t).exp(), 0.0);
        if err <= 2e-8 || k_pairs >= 4800 {
            if err > 1e-6 {
                return Err(Error::NoConvergence {
                    what: "branch ladder sum",
                    achieved: err,
                    required: 1e-6,
                });
            }
            return Ok((value, err));
        }
        k_pairs *= 2;
    }
}

/// Emitter amplitudes `(c₁, c₂)` at time `t` through the reflection route.
pub fn atomic_amplitudes(
    params: &SystemParams,
    state: &InitialState,
    t: f64,
) -> Result<(C64, C64)> {
    let cp = c_pm_reflection(params, Sign::Plus, t)?;
    let cm = c_pm_reflection(params, Sign::Minus, t)?;
    Ok(state.decompose(cp, cm))
}

/// Which emitter an effective single-emitter quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    One,
    Two,
}

fn amplitudes_now_and_delayed(
    params: &SystemParams,
    state: &InitialState,
    atom: Atom,
    t: f64,
) -> Result<(C64, C64)> {
    let (c1, c2) = atomic_amplitudes(params, state, t)?;
    let (d1, d2) = atomic_amplitudes(params, state, t - params.eta())?;
    Ok(match atom {
        Atom::One => (c1, d2),
        Atom::Two => (c2, d1),
    })
}

/// Instantaneous decay rate of one emitter, in units of `γ`:
/// `γ_eff(t) = 1 + Re[β e^{iφ_p} c_other(t−η)/c_self(t)]` once the echo has
/// arrived, and exactly 1 before.
pub fn effective_rate(
    params: &SystemParams,
    state: &InitialState,
    atom: Atom,
    t: f64,
) -> Result<f64> {
    if t < params.eta() {
        return Ok(1.0);
    }
    let (own, delayed) = amplitudes_now_and_delayed(params, state, atom, t)?;
    if own.norm() <= 1e-12 {
        return Err(Error::AmplitudePole {
            t,
            magnitude: own.norm(),
        });
    }
    Ok(1.0 + (params.beta() * params.phase_factor() * delayed / own).re)
}

/// Effective rate of a pure `±` channel, where both emitters share the same
/// amplitude up to the channel sign.
pub fn effective_rate_pm(params: &SystemParams, sign: Sign, t: f64) -> Result<f64> {
    if t < params.eta() {
        return Ok(1.0);
    }
    let own = c_pm_reflection(params, sign, t)?;
    let delayed = c_pm_reflection(params, sign, t - params.eta())?;
    if own.norm() <= 1e-12 {
        return Err(Error::AmplitudePole {
            t,
            magnitude: own.norm(),
        });
    }
    Ok(1.0 + sign.signum() * (params.beta() * params.phase_factor() * delayed / own).re)
}

/// Instantaneous line-pull of one emitter, in units of `γ` and weighted by the
/// instantaneous populations (not normalized):
/// `Δ_eff(t) = β Im[e^{iφ_p} c_self*(t) c_other(t−η)]`, zero before the echo.
pub fn effective_shift(
    params: &SystemParams,
    state: &InitialState,
    atom: Atom,
    t: f64,
) -> Result<f64> {
    if t < params.eta() {
        return Ok(0.0);
    }
    let (own, delayed) = amplitudes_now_and_delayed(params, state, atom, t)?;
    Ok(params.beta() * (params.phase_factor() * own.conj() * delayed).im)
}

/// Line-pull of a pure `±` channel (same population weighting).
pub fn effective_shift_pm(params: &SystemParams, sign: Sign, t: f64) -> Result<f64> {
    if t < params.eta() {
        return Ok(0.0);
    }
    let own = c_pm_reflection(params, sign, t)?;
    let delayed = c_pm_reflection(params, sign, t - params.eta())?;
    Ok(sign.signum() * params.beta() * (params.phase_factor() * own.conj() * delayed).im)
}

/// Rate immediately after the first echo arrives:
/// `γ_eff(η⁺) = 1 ± β cos(φ_p) e^{η/2}`. Exceeds `2` (the zero-separation
/// superradiant bound) whenever `β cos φ_p e^{η/2} > 1`.
pub fn rate_jump(params: &SystemParams, sign: Sign) -> f64 {
    let (_, cos_phi) = params.phase_sin_cos();
    1.0 + sign.signum() * params.beta() * cos_phi * (0.5 * params.eta()).exp()
}

/// Line-pull immediately after the first echo:
/// `Δ_eff(η⁺) = ± (β/2) e^{−η/2} sin φ_p`; exactly zero at parity points.
pub fn shift_jump(params: &SystemParams, sign: Sign) -> f64 {
    let (sin_phi, _) = params.phase_sin_cos();
    sign.signum() * 0.5 * params.beta() * (-0.5 * params.eta()).exp() * sin_phi
}

/// Width of the slowest ladder rung, `Re γ₀^±`: the zeroth-mode approximation
/// to the long-time decay rate.
pub fn rate_zeroth(params: &SystemParams, sign: Sign) -> Result<f64> {
    if params.eta() <= 0.0 {
        return Err(Error::Unsupported(
            "the zeroth-mode rate requires a nonzero retardation",
        ));
    }
    let w0 = lambert_w(0, params.lambert_argument(sign))?.w;
    Ok(1.0 - 2.0 * w0.re / params.eta())
}

/// Retardation beyond which no branch decays faster than the bare emitter:
/// `η_c = 2 W₀(1/(βe))`. Unbounded for `β = 0`.
pub fn critical_eta(beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
        return Err(Error::invalid("beta", beta, "must lie in [0, 1]"));
    }
    if beta == 0.0 {
        return Ok(f64::INFINITY);
    }
    let arg = C64::new(1.0 / (beta * std::f64::consts::E), 0.0);
    let w = lambert_w(0, arg)?.w;
    Ok(2.0 * w.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Parity;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn reflection_two_bounce_value_by_hand() {
        // t = 2, η = 1, β = 0.95, φ_p = 0, plus channel: two terms.
        let p = SystemParams::with_phase(0.95, 1.0, 0.0).unwrap();
        let c = c_pm_reflection(&p, Sign::Plus, 2.0).unwrap();
        let exact = FRAC_1_SQRT_2
            * ((-1.0f64).exp() - 0.95 * 0.5 * (-0.5f64).exp()
                + 0.95 * 0.95 / 2.0 * 0.0 * 1.0);
        assert_abs_diff_eq!(c.re, exact, epsilon = 1e-15);
        assert_eq!(c.im, 0.0);
    }

    #[test]
    fn reflection_initial_value_and_free_segment() {
        let p = SystemParams::with_phase(0.7, 2.0, PI / 3.0).unwrap();
        assert_abs_diff_eq!(
            c_pm_reflection(&p, Sign::Minus, 0.0).unwrap().re,
            FRAC_1_SQRT_2,
            epsilon = 1e-16
        );
        let c = c_pm_reflection(&p, Sign::Minus, 1.9).unwrap();
        assert_abs_diff_eq!(c.re, FRAC_1_SQRT_2 * (-0.95f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn lambert_route_agrees_with_reflection_spotwise() {
        let (p, _) = SystemParams::commensurate(0.95, 1.0, 500.0, Parity::Even).unwrap();
        for t in [0.0, 0.4, 1.7, 3.0, 5.25] {
            let a = c_pm_lambert(&p, Sign::Plus, t, 300).unwrap();
            let b = c_pm_reflection(&p, Sign::Plus, t).unwrap();
            assert!(
                (a - b).norm() < 1e-8,
                "t={t}: lambert {a} vs reflection {b}"
            );
        }
    }

    #[test]
    fn branch_modes_expose_rates_and_weights() {
        let (p, _) = SystemParams::commensurate(0.95, 1.0, 500.0, Parity::Even).unwrap();
        let modes = branch_modes(&p, Sign::Plus, 3).unwrap();
        assert_eq!(modes.len(), 7);
        let m0 = modes.iter().find(|m| m.n == 0).unwrap();
        // Defining relation: W e^W = z.
        let z = p.lambert_argument(Sign::Plus);
        assert!((m0.w * m0.w.exp() - z).norm() < 1e-11 * z.norm().max(1.0));
        assert!((m0.decay - (1.0 - m0.w / (0.5 * p.eta()))).norm() < 1e-14);
        assert!(branch_modes(&SystemParams::with_phase(0.5, 0.0, 0.0).unwrap(), Sign::Plus, 3).is_err());
    }

    #[test]
    fn jumps_match_the_closed_forms() {
        let (p, _) = SystemParams::commensurate(0.95, 0.5, 500.0, Parity::Even).unwrap();
        assert_abs_diff_eq!(
            rate_jump(&p, Sign::Plus),
            1.0 + 0.95 * (0.5 * p.eta()).exp(),
            epsilon = 1e-14
        );
        assert_eq!(shift_jump(&p, Sign::Plus), 0.0);
        assert_eq!(shift_jump(&p, Sign::Minus), 0.0);

        let q = SystemParams::with_phase(0.95, 1.0, PI / 2.0).unwrap();
        assert_abs_diff_eq!(
            shift_jump(&q, Sign::Plus),
            0.5 * 0.95 * (-0.5f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(rate_jump(&q, Sign::Plus), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn effective_rate_is_flat_before_the_echo() {
        let (p, _) = SystemParams::commensurate(0.9, 1.0, 500.0, Parity::Even).unwrap();
        let st = InitialState::atom_one();
        for t in [0.0, 0.3, 0.99 * p.eta()] {
            assert_eq!(effective_rate(&p, &st, Atom::One, t).unwrap(), 1.0);
            assert_eq!(effective_shift(&p, &st, Atom::One, t).unwrap(), 0.0);
        }
        // Just past the echo the pure-channel rate approaches the jump value.
        let jump = rate_jump(&p, Sign::Plus);
        let r = effective_rate_pm(&p, Sign::Plus, p.eta() * (1.0 + 1e-9)).unwrap();
        assert!((r - jump).abs() < 1e-6);
    }

    #[test]
    fn critical_retardation_reference_values() {
        assert_abs_diff_eq!(critical_eta(1.0).unwrap(), 0.55692908552214759, epsilon = 1e-13);
        assert_abs_diff_eq!(critical_eta(0.95).unwrap(), 0.57962585887706486, epsilon = 1e-13);
        assert_abs_diff_eq!(critical_eta(0.5).unwrap(), 0.92611102673109771, epsilon = 1e-13);
        assert_eq!(critical_eta(0.0).unwrap(), f64::INFINITY);
        assert!(critical_eta(1.2).is_err());
    }

    #[test]
    fn superduperradiance_threshold() {
        // βcosφ_p = 1 gives a jump of 1 + e^{η/2} > 2 for any η > 0.
        let (p, _) = SystemParams::commensurate(1.0, 0.8, 500.0, Parity::Even).unwrap();
        assert!(rate_jump(&p, Sign::Plus) > 2.0);
        let (weak, _) = SystemParams::commensurate(0.3, 0.2, 500.0, Parity::Even).unwrap();
        assert!(rate_jump(&weak, Sign::Plus) < 2.0);
    }
}

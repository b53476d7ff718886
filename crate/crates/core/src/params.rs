use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{C64, Error, Result};

/// Default optical-to-decay frequency ratio `ω₀/γ` used when only the phase is given.
pub const DEFAULT_OMEGA0_OVER_GAMMA: f64 = 500.0;

const TWO_PI: f64 = 2.0 * PI;

/// Parity of the propagation phase at the emitter frequency:
/// `Even` means `φ_p = 2pπ`, `Odd` means `φ_p = (2p+1)π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Collective channel label: `Plus` is the symmetric superposition, `Minus`
/// the antisymmetric one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn signum(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

/// sin/cos that treat `±π` exactly, so parity-locked phases keep
/// `sin φ = 0` instead of picking up `sin(π) ≈ 1.2e-16`.
pub(crate) fn exact_sin_cos(x: f64) -> (f64, f64) {
    if x == PI || x == -PI {
        (0.0, -1.0)
    } else {
        x.sin_cos()
    }
}

/// Dimensionless description of the two-emitter waveguide system.
///
/// The propagation phase is stored as a reduced part `φ ∈ (−π, π]` plus an
/// integer winding `p`, with the exact bookkeeping `φ + 2πp = η · (ω₀/γ)`.
/// All trigonometry uses the reduced part, so configurations built through
/// [`SystemParams::commensurate`] evaluate `sin φ_p` and `cos φ_p` exactly.
#[derive(Clone, Copy, Debug)]
pub struct SystemParams {
    gamma: f64,
    beta: f64,
    eta: f64,
    phi_reduced: f64,
    winding: u64,
    omega0_over_gamma: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
        return Err(Error::invalid("beta", beta, "must lie in [0, 1]"));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid("eta", eta, "must be finite and nonnegative"));
    }
    if eta > 1000.0 {
        return Err(Error::invalid(
            "eta",
            eta,
            "retardation too large for double-precision branch sums",
        ));
    }
    Ok(())
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::invalid(
            "omega0_over_gamma",
            ratio,
            "must be finite and positive",
        ));
    }
    Ok(())
}

/// Split a nonnegative angle into a reduced part in `(−π, π]` and a winding count.
fn reduce_phase(full: f64) -> (f64, u64) {
    let w = (full / TWO_PI).round();
    let reduced = full - TWO_PI * w;
    if w < 0.0 {
        // Can only happen for full ∈ [−π, 0); fold into winding 0.
        (full, 0)
    } else if reduced > PI {
        (reduced - TWO_PI, w as u64 + 1)
    } else if reduced <= -PI {
        (reduced + TWO_PI, (w as u64).saturating_sub(1))
    } else {
        (reduced, w as u64)
    }
}

impl SystemParams {
    /// Build from `(β, η, ω₀/γ)` with the propagation phase derived as
    /// `φ_p = η · ω₀/γ` and stored reduced. `γ = 1`.
    pub fn dimensionless(beta: f64, eta: f64, omega0_over_gamma: f64) -> Result<Self> {
        check_beta(beta)?;
        check_eta(eta)?;
        check_ratio(omega0_over_gamma)?;
        let (phi_reduced, winding) = reduce_phase(eta * omega0_over_gamma);
        Ok(SystemParams {
            gamma: 1.0,
            beta,
            eta,
            phi_reduced,
            winding,
            omega0_over_gamma,
        })
    }

    /// Build from an explicit propagation phase. The phase enters the dynamics
    /// only modulo 2π; the winding is chosen as the smallest one that keeps
    /// `ω₀/γ = (φ + 2πp)/η` at or above [`DEFAULT_OMEGA0_OVER_GAMMA`].
    pub fn with_phase(beta: f64, eta: f64, phi_p: f64) -> Result<Self> {
        check_beta(beta)?;
        check_eta(eta)?;
        if !phi_p.is_finite() {
            return Err(Error::invalid("phi_p", phi_p, "must be finite"));
        }
        let (phi_reduced, _) = reduce_phase(phi_p.rem_euclid(TWO_PI));
        if eta == 0.0 {
            if phi_reduced != 0.0 {
                return Err(Error::invalid(
                    "phi_p",
                    phi_p,
                    "zero separation forces a zero propagation phase",
                ));
            }
            return Ok(SystemParams {
                gamma: 1.0,
                beta,
                eta,
                phi_reduced: 0.0,
                winding: 0,
                omega0_over_gamma: DEFAULT_OMEGA0_OVER_GAMMA,
            });
        }
        let p = ((DEFAULT_OMEGA0_OVER_GAMMA * eta - phi_reduced) / TWO_PI).ceil().max(0.0);
        let winding = p as u64;
        let omega0_over_gamma = (phi_reduced + TWO_PI * p) / eta;
        Ok(SystemParams {
            gamma: 1.0,
            beta,
            eta,
            phi_reduced,
            winding,
            omega0_over_gamma,
        })
    }

    /// Snap `eta_target` to the nearest separation whose propagation phase is an
    /// exact parity point (`2pπ` or `(2p+1)π`) at the given frequency ratio.
    /// Returns the parameters and the integer `p`.
    pub fn commensurate(
        beta: f64,
        eta_target: f64,
        omega0_over_gamma: f64,
        parity: Parity,
    ) -> Result<(Self, u64)> {
        check_beta(beta)?;
        check_eta(eta_target)?;
        check_ratio(omega0_over_gamma)?;
        let (eta, p, phi_reduced) = match parity {
            Parity::Even => {
                let p = (eta_target * omega0_over_gamma / TWO_PI).round().max(0.0);
                (TWO_PI * p / omega0_over_gamma, p as u64, 0.0)
            }
            Parity::Odd => {
                let p = ((eta_target * omega0_over_gamma / PI - 1.0) / 2.0)
                    .round()
                    .max(0.0);
                ((2.0 * p + 1.0) * PI / omega0_over_gamma, p as u64, PI)
            }
        };
        check_eta(eta)?;
        Ok((
            SystemParams {
                gamma: 1.0,
                beta,
                eta,
                phi_reduced,
                winding: p,
                omega0_over_gamma,
            },
            p,
        ))
    }

    /// Like [`SystemParams::dimensionless`] but keeping a physical `γ` in rad/s
    /// for unit restoration. The dynamics itself always runs in units of `1/γ`.
    pub fn physical(gamma: f64, beta: f64, eta: f64, omega0_over_gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::invalid("gamma", gamma, "must be finite and positive"));
        }
        let mut p = Self::dimensionless(beta, eta, omega0_over_gamma)?;
        p.gamma = gamma;
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega0_over_gamma(&self) -> f64 {
        self.omega0_over_gamma
    }

    /// Full propagation phase `φ_p = η ω₀/γ` (reporting only; dynamics uses the
    /// reduced part).
    pub fn phi_p(&self) -> f64 {
        self.phi_reduced + TWO_PI * self.winding as f64
    }

    pub fn phi_p_reduced(&self) -> f64 {
        self.phi_reduced
    }

    pub fn winding(&self) -> u64 {
        self.winding
    }

    /// `(sin φ_p, cos φ_p)` evaluated on the reduced phase, exact at parity points.
    pub fn phase_sin_cos(&self) -> (f64, f64) {
        exact_sin_cos(self.phi_reduced)
    }

    /// `e^{iφ_p}` on the reduced phase.
    pub fn phase_factor(&self) -> C64 {
        let (s, c) = self.phase_sin_cos();
        C64::new(c, s)
    }

    /// Argument of the Lambert W branches for the `±` channel:
    /// `z_± = ∓ β (η/2) e^{η/2} e^{iφ_p}`.
    pub fn lambert_argument(&self, sign: Sign) -> C64 {
        let scale = -sign.signum() * self.beta * 0.5 * self.eta * (0.5 * self.eta).exp();
        let z = scale * self.phase_factor();
        // At parity phases the negation above can leave `−0.0` in the
        // imaginary part, which would put `ln z` on the lower lip of the cut;
        // every consumer expects the limit from above.
        if z.im == 0.0 {
            C64::new(z.re, 0.0)
        } else {
            z
        }
    }

    /// Round-trip phase at detuning `Δ = (ω−ω₀)/γ`: `φ_p + Δη`, with the parity
    /// part kept exact. Equals `(ω η/γ) mod 2π` up to the stored winding.
    pub fn round_trip_phase(&self, detuning: f64) -> f64 {
        self.phi_reduced + detuning * self.eta
    }

    /// `(sin, cos)` of the round-trip phase at detuning `Δ`.
    pub fn round_trip_sin_cos(&self, detuning: f64) -> (f64, f64) {
        exact_sin_cos_sum(self.phi_reduced, detuning * self.eta)
    }

    /// `(sin, cos)` of the half round-trip phase `kd/2 = (φ_p + Δη)/2`, including
    /// the parity flip from the winding. Used by the spatial mode profile.
    pub fn half_round_trip_sin_cos(&self, detuning: f64) -> (f64, f64) {
        let half = 0.5 * (self.phi_reduced + detuning * self.eta);
        let (s, c) = half.sin_cos();
        if self.winding % 2 == 0 {
            (s, c)
        } else {
            (-s, -c)
        }
    }
}

/// `(sin, cos)` of `a + b` where `a` may be the exact parity value `π` or `0`.
fn exact_sin_cos_sum(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 {
        b.sin_cos()
    } else if a == PI {
        let (s, c) = b.sin_cos();
        (-s, -c)
    } else {
        (a + b).sin_cos()
    }
}

/// Single-excitation initial state of the emitter pair,
/// `|ψ(0)⟩ = cos θ |eg⟩ + e^{iφ_s} sin θ |ge⟩`.
#[derive(Clone, Copy, Debug)]
pub struct InitialState {
    theta: f64,
    phi_s: f64,
}

impl InitialState {
    pub fn new(theta: f64, phi_s: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta", theta, "must be finite"));
        }
        if !phi_s.is_finite() {
            return Err(Error::invalid("phi_s", phi_s, "must be finite"));
        }
        Ok(InitialState { theta, phi_s })
    }

    /// Equal superposition with zero relative phase; populates only the `+` channel.
    pub fn symmetric() -> Self {
        InitialState {
            theta: 0.25 * PI,
            phi_s: 0.0,
        }
    }

    /// Equal superposition with relative phase π; populates only the `−` channel.
    pub fn antisymmetric() -> Self {
        InitialState {
            theta: 0.25 * PI,
            phi_s: PI,
        }
    }

    /// Excitation initially on the first emitter.
    pub fn atom_one() -> Self {
        InitialState {
            theta: 0.0,
            phi_s: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi_s(&self) -> f64 {
        self.phi_s
    }

    /// `sin θ` and `cos θ`, forced bit-equal at θ = π/4 so the equal-weight
    /// state yields an exactly vanishing channel (the library gates dark
    /// channels on `weight == 0`, and a one-ulp residue would defeat that).
    fn theta_sin_cos(&self) -> (f64, f64) {
        if self.theta == std::f64::consts::FRAC_PI_4 {
            (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
        } else {
            self.theta.sin_cos()
        }
    }

    /// Weight of the symmetric channel, `K_+ = (cos θ + e^{iφ_s} sin θ)/√2`.
    pub fn k_plus(&self) -> C64 {
        let (st, ct) = self.theta_sin_cos();
        let (ss, cs) = exact_sin_cos(self.phi_s);
        C64::new(ct + cs * st, ss * st) * FRAC_1_SQRT_2
    }

    /// Weight of the antisymmetric channel, `K_− = (cos θ − e^{iφ_s} sin θ)/√2`.
    pub fn k_minus(&self) -> C64 {
        let (st, ct) = self.theta_sin_cos();
        let (ss, cs) = exact_sin_cos(self.phi_s);
        C64::new(ct - cs * st, -ss * st) * FRAC_1_SQRT_2
    }

    pub fn weight(&self, sign: Sign) -> C64 {
        match sign {
            Sign::Plus => self.k_plus(),
            Sign::Minus => self.k_minus(),
        }
    }

    /// Map channel amplitudes to emitter amplitudes:
    /// `c₁ = K₊c₊ + K₋c₋`, `c₂ = K₊c₊ − K₋c₋`.
    pub fn decompose(&self, c_plus: C64, c_minus: C64) -> (C64, C64) {
        let a = self.k_plus() * c_plus;
        let b = self.k_minus() * c_minus;
        (a + b, a - b)
    }
}

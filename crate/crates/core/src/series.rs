//! Shared machinery for the branch sums: degree-5 jets along the branch
//! ladder, the complex exponential integral, Euler-Maclaurin tail closures,
//! and Levin/Wynn sequence acceleration.
//!
//! Sums over the branch ladder `n ∈ ℤ` are folded into symmetric shells
//! `a_0 = f(W_0)`, `a_k = f(W_k) + f(W_{−k})` and truncated after `K` shells.
//! The remainder depends on the term family: exponential-type terms
//! `e^{Wτ}/(1+W)` get a midpoint Euler-Maclaurin tail near integer `τ`
//! (its integral piece is exact, an incomplete-gamma recursion in W space
//! with the Stokes constants of the continued contour) and a one-sided
//! geometric Euler transform elsewhere, resolvent-type terms
//! `1/((1+W)(W−λ))` get a closed logarithmic tail, and the mixed family near
//! integer `τ` falls back to Levin-u/Wynn-epsilon acceleration with
//! cross-method error control.

use std::f64::consts::PI;

use crate::lambert::{self, w_continuum};
use crate::{C64, Error, Result};

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

// ---------------------------------------------------------------------------
// Degree-5 truncated Taylor series (jets) with complex coefficients.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub(crate) struct Jet5(pub [C64; 6]);

impl Jet5 {
    fn zero() -> Self {
        Jet5([C64::new(0.0, 0.0); 6])
    }

    pub(crate) fn constant(c: C64) -> Self {
        let mut j = Self::zero();
        j.0[0] = c;
        j
    }

    fn mul(&self, other: &Jet5) -> Jet5 {
        let mut c = Self::zero();
        for i in 0..6 {
            for j in 0..6 - i {
                c.0[i + j] += self.0[i] * other.0[j];
            }
        }
        c
    }

    fn div(&self, other: &Jet5) -> Jet5 {
        let mut c = Self::zero();
        c.0[0] = self.0[0] / other.0[0];
        for k in 1..6 {
            let mut s = self.0[k];
            for j in 1..=k {
                s -= other.0[j] * c.0[k - j];
            }
            c.0[k] = s / other.0[0];
        }
        c
    }

    fn exp(&self) -> Jet5 {
        let mut c = Self::zero();
        c.0[0] = self.0[0].exp();
        for k in 1..6 {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += (j as f64) * self.0[j] * c.0[k - j];
            }
            c.0[k] = s / (k as f64);
        }
        c
    }

    fn ln(&self) -> Jet5 {
        let mut c = Self::zero();
        c.0[0] = self.0[0].ln();
        for k in 1..6 {
            let mut s = self.0[k];
            for j in 1..k {
                s -= (j as f64 / k as f64) * c.0[j] * self.0[k - j];
            }
            c.0[k] = s / self.0[0];
        }
        c
    }
}

/// Taylor coefficients of the branch continuation `W(x+h)` to `h^5`,
/// from the defining ODE `(1+W) W' = 2πi W`.
pub(crate) fn w_jet(z: C64, x: f64) -> Result<Jet5> {
    let mut w = Jet5::zero();
    w.0[0] = w_continuum(z, x)?;
    for k in 0..5 {
        let mut s = two_pi_i() * w.0[k];
        for j in 1..=k {
            s -= w.0[j] * ((k - j + 1) as f64) * w.0[k - j + 1];
        }
        w.0[k + 1] = s / (((k + 1) as f64) * (1.0 + w.0[0]));
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Complex exponential integral.
// ---------------------------------------------------------------------------

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// `Ei(z)` for complex `z` off the positive real axis: power series for
/// `|z| ≤ 12`, otherwise a Lentz continued fraction for `E₁(−z)` plus the
/// half-plane constant `±iπ`.
pub(crate) fn expi(z: C64) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(Error::Unsupported("Ei is singular at 0"));
    }
    if z.norm() <= 12.0 {
        let mut sum = EULER_MASCHERONI + z.ln();
        let mut p = C64::new(1.0, 0.0);
        for k in 1..=160 {
            p *= z / (k as f64);
            let inc = p / (k as f64);
            sum += inc;
            if inc.norm() <= 1e-18 * (1.0 + sum.norm()) {
                return Ok(sum);
            }
        }
        return Ok(sum);
    }
    if z.im == 0.0 && z.re > 0.0 {
        return Err(Error::Unsupported(
            "Ei on the positive real axis is a principal value; not needed here",
        ));
    }
    let w = -z;
    let e1 = e1_lentz(w)?;
    let constant = if z.im > 0.0 {
        C64::new(0.0, PI)
    } else if z.im < 0.0 {
        C64::new(0.0, -PI)
    } else {
        C64::new(0.0, 0.0)
    };
    Ok(-e1 + constant)
}

/// `E₁(w)` by the modified Lentz continued fraction
/// `E₁(w) = e^{−w} / (w + 1 − 1²/(w + 3 − 2²/(w + 5 − …)))`.
fn e1_lentz(w: C64) -> Result<C64> {
    let tiny = C64::new(1e-280, 0.0);
    let mut f = w + 1.0;
    if f.norm() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for k in 1..=500u32 {
        let a = -((k as f64) * (k as f64));
        let b = w + (2.0 * k as f64 + 1.0);
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 5e-16 {
            return Ok((-w).exp() / f);
        }
    }
    Err(Error::NoConvergence {
        what: "continued fraction for E1",
        achieved: f64::NAN,
        required: 5e-16,
    })
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Sine and cosine integrals `(Si(x), Ci(x))` for `x > 0`: the power series
/// where it is still well conditioned, the continued fraction for `E₁(ix)`
/// beyond, through `E₁(ix) = −Ci(x) − i(π/2 − Si(x))`.
pub(crate) fn si_ci(x: f64) -> Result<(f64, f64)> {
    debug_assert!(x > 0.0 && x.is_finite());
    // The seam keeps the alternating series short of serious cancellation.
    if x > 8.0 {
        let e1 = e1_lentz(C64::new(0.0, x))?;
        return Ok((0.5 * PI + e1.im, -e1.re));
    }
    let x2 = x * x;
    let mut si = x;
    let mut ci = 0.0;
    // p = (−1)^k x^{2k+1}/(2k+1)!, q = (−1)^k x^{2k}/(2k)! carried together.
    let mut p = x;
    let mut q = 1.0;
    for k in 1..=60 {
        let two_k = 2.0 * k as f64;
        q *= -x2 / ((two_k - 1.0) * two_k);
        p *= -x2 / (two_k * (two_k + 1.0));
        let dci = q / two_k;
        let dsi = p / (two_k + 1.0);
        ci += dci;
        si += dsi;
        if dci.abs() + dsi.abs() < 1e-18 * (1.0 + si.abs() + ci.abs()) {
            break;
        }
    }
    Ok((si, EULER_GAMMA + x.ln() + ci))
}

// ---------------------------------------------------------------------------
// Euler-Maclaurin tails past K symmetric shells (midpoint form).
// ---------------------------------------------------------------------------

const EM_C1: f64 = 1.0 / 24.0;
const EM_C3: f64 = 7.0 / 5760.0;
const EM_C5: f64 = 31.0 / 967_680.0;

/// Jet of `g_m(x) = exp(m ln z + δW − m ln W)/(1+W)` at branch parameter `x`.
fn exp_term_jet(z: C64, x: f64, m: i64, delta: f64, lnz: C64) -> Result<Jet5> {
    let w = w_jet(z, x)?;
    let lnw = w.ln();
    let mut e = Jet5::zero();
    let mf = m as f64;
    e.0[0] = mf * lnz + delta * w.0[0] - mf * lnw.0[0];
    for k in 1..6 {
        e.0[k] = delta * w.0[k] - mf * lnw.0[k];
    }
    let big_e = e.exp();
    let mut onepw = w;
    onepw.0[0] += 1.0;
    Ok(big_e.div(&onepw))
}

fn em_derivative_corrections(jp: &Jet5, jm: &Jet5) -> C64 {
    let u1 = jp.0[1] - jm.0[1];
    let u3 = 6.0 * (jp.0[3] - jm.0[3]);
    let u5 = 120.0 * (jp.0[5] - jm.0[5]);
    u1 * EM_C1 - u3 * EM_C3 + u5 * EM_C5
}

/// Tail `Σ_{k>K} [g(k) + g(−k)]` for the exponential family
/// `g(n) = e^{W_n τ}/(1+W_n)`, valid for `|τ − round(τ)| ≤ 0.25`.
///
/// The integral piece is exact: in `W` space it reduces to an incomplete-gamma
/// recursion seeded by `Ei(δW)`, evaluated with the logarithm continued along
/// the contour, plus the Stokes constant the contour picks up at infinity.
pub(crate) fn em_tail_exp(z: C64, tau: f64, k_pairs: usize) -> Result<C64> {
    let m = tau.round() as i64;
    let delta = tau - m as f64;
    let lnz = z.ln();
    if m as f64 * lnz.re > 690.0 {
        return Err(Error::Unsupported("branch tail overflows double precision"));
    }
    let xp = k_pairs as f64 + 0.5;
    let jp = exp_term_jet(z, xp, m, delta, lnz)?;
    let jm = exp_term_jet(z, -xp, m, delta, lnz)?;

    let wp = w_continuum(z, xp)?;
    let wm = w_continuum(z, -xp)?;
    // Continued logarithms: ln W = ln z + 2πix − W along the ladder.
    let lnwp = lnz + two_pi_i() * xp - wp;
    let lnwm = lnz - two_pi_i() * xp - wm;

    let a_of = |w: C64, lnw: C64| -> Result<C64> {
        if m == 0 {
            return if delta == 0.0 { Ok(lnw) } else { expi(delta * w) };
        }
        if delta == 0.0 {
            return Ok(-(-(m as f64) * lnw).exp() / m as f64);
        }
        let mut a = expi(delta * w)?;
        for j in 1..=m {
            a = -(delta * w - (j as f64) * lnw).exp() / j as f64 + (delta / j as f64) * a;
        }
        Ok(a)
    };

    let net_inf = if m == 0 && delta == 0.0 {
        C64::new(0.0, PI)
    } else if delta == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        let mut pow = 1.0;
        for _ in 0..m {
            pow *= delta;
        }
        let mut fact = 1.0;
        for j in 2..=m {
            fact *= j as f64;
        }
        C64::new(0.0, 2.0 * PI * delta.signum()) * (pow / fact)
    };

    let zm = ((m as f64) * lnz).exp();
    let integral = zm / two_pi_i() * (net_inf - a_of(wp, lnwp)? + a_of(wm, lnwm)?);
    Ok(integral + em_derivative_corrections(&jp, &jm))
}

// ---------------------------------------------------------------------------
// Geometric-phase tails away from integer τ.
// ---------------------------------------------------------------------------

/// `e^{2πix}` with the argument reduced to its fractional part first, so a
/// large `x` does not feed the trig functions a badly rounded angle.
fn unit_phase(x: f64) -> C64 {
    C64::new(0.0, 2.0 * PI * (x - x.round())).exp()
}

/// Smooth envelope of the exponential family on one side of the ladder:
/// `ψ(x) = exp(τ(ln z − ln W))/(1+W)` at `x = side·(a+j)`, optionally with a
/// further `1/(W−λ)` factor. This is what remains of `e^{Wτ}/(1+W)` once the
/// winding phase `e^{2πinτ}` is pulled out through `W = ln z + 2πin − ln W`;
/// it decays like a power of the index with a slowly drifting phase.
fn exp_envelope_samples(
    z: C64,
    tau: f64,
    side: f64,
    a: usize,
    count: usize,
    lam: Option<C64>,
) -> Result<Vec<C64>> {
    let lnz = z.ln();
    if tau * lnz.re > 690.0 {
        return Err(Error::Unsupported("branch tail overflows double precision"));
    }
    (0..count)
        .map(|j| {
            let x = side * (a + j) as f64;
            let w = w_continuum(z, x)?;
            let lnw = lnz + two_pi_i() * x - w;
            let mut v = (tau * (lnz - lnw)).exp() / (1.0 + w);
            if let Some(l) = lam {
                v /= w - l;
            }
            Ok(v)
        })
        .collect()
}

/// One-sided tail `Σ_{j≥0} q^{a+j} ψ(a+j)` of a unit geometric phase
/// `q = e^{2πiδ'}` times a smooth envelope, by the Euler transform
/// `q^a/(1−q) · Σ_j [q/(1−q)]^j Δ^j ψ(a)`.
///
/// The forward differences of a power-law envelope shrink by a factor
/// `~(τ+j)/a` per order, so the series terminates in a handful of terms
/// whenever `|q/(1−q)|` is moderate; unlike a sampled-sequence accelerant it
/// is immune to the two-phase interference of the paired-shell series at
/// real `z`.
fn euler_tail_one_side(psi: &[C64], delta_side: f64, a: usize) -> (C64, f64) {
    let q = unit_phase(delta_side);
    let omq = C64::new(1.0, 0.0) - q;
    let r = q / omq;
    let pref = unit_phase(delta_side * a as f64) / omq;
    let mut diffs = psi.to_vec();
    let mut sum = C64::new(0.0, 0.0);
    let mut rj = C64::new(1.0, 0.0);
    let mut tail_pair = [0.0_f64; 2];
    for j in 0..diffs.len() {
        let term = rj * diffs[0];
        sum += term;
        tail_pair = [tail_pair[1], term.norm()];
        for i in 0..diffs.len() - 1 - j {
            diffs[i] = diffs[i + 1] - diffs[i];
        }
        rj *= r;
    }
    // Truncation is bounded by the last retained terms; the difference table
    // itself bottoms out at a few hundred ulps of the leading sample.
    let err = pref.norm() * (tail_pair[0].max(tail_pair[1]) + 1e-13 * psi[0].norm());
    (pref * sum, err)
}

/// Tail `Σ_{|n|>K} e^{W_n τ}/(1+W_n)` (times `1/(W_n−λ)` when `lam` is given)
/// for `τ` away from integers, where the sampled winding phase `e^{2πinδ}`
/// rotates fast enough for the one-sided Euler transforms to close both ends
/// of the ladder.
fn euler_tail_exp(z: C64, tau: f64, k_pairs: usize, lam: Option<C64>) -> Result<(C64, f64)> {
    const COUNT: usize = 10;
    let delta = tau - tau.round();
    let a = k_pairs + 1;
    let up = exp_envelope_samples(z, tau, 1.0, a, COUNT, lam)?;
    let lo = exp_envelope_samples(z, tau, -1.0, a, COUNT, lam)?;
    let (tu, eu) = euler_tail_one_side(&up, delta, a);
    let (tl, el) = euler_tail_one_side(&lo, -delta, a);
    Ok((tu + tl, eu + el))
}

/// Guard for resolvent tails: the pole `W = λ` must sit well inside the
/// explicit window and the tail logarithms must stay on the principal sheet.
fn check_mode_window(lam: C64, k_pairs: usize) -> Result<()> {
    let xp = k_pairs as f64 + 0.5;
    if lam.norm() > 0.7 * 2.0 * PI * xp {
        return Err(Error::NoConvergence {
            what: "resolvent tail window",
            achieved: lam.norm(),
            required: 0.7 * 2.0 * PI * xp,
        });
    }
    Ok(())
}

/// Tail of `Σ 1/((1+W_n)(W_n−λ))` past `K` shells: closed logarithmic
/// integral plus jet derivative corrections. The summand decays like a smooth
/// power of the shell index, so this is accurate to machine precision.
pub(crate) fn em_tail_mode(z: C64, lam: C64, k_pairs: usize) -> Result<C64> {
    check_mode_window(lam, k_pairs)?;
    let xp = k_pairs as f64 + 0.5;
    let jet_at = |x: f64| -> Result<Jet5> {
        let w = w_jet(z, x)?;
        let mut onepw = w;
        onepw.0[0] += 1.0;
        let mut wml = w;
        wml.0[0] -= lam;
        Ok(Jet5::constant(C64::new(1.0, 0.0)).div(&onepw.mul(&wml)))
    };
    let jp = jet_at(xp)?;
    let jm = jet_at(-xp)?;
    let wp = w_continuum(z, xp)?;
    let wm = w_continuum(z, -xp)?;
    let integral =
        ((1.0 - lam / wm).ln() - (1.0 - lam / wp).ln()) / (two_pi_i() * lam);
    Ok(integral + em_derivative_corrections(&jp, &jm))
}

/// Tail of `Σ 1/((1+W_n)(W_n−λ)²)` past `K` shells.
pub(crate) fn em_tail_mode_sq(z: C64, lam: C64, k_pairs: usize) -> Result<C64> {
    check_mode_window(lam, k_pairs)?;
    let xp = k_pairs as f64 + 0.5;
    let jet_at = |x: f64| -> Result<Jet5> {
        let w = w_jet(z, x)?;
        let mut onepw = w;
        onepw.0[0] += 1.0;
        let mut wml = w;
        wml.0[0] -= lam;
        let denom = onepw.mul(&wml).mul(&wml);
        Ok(Jet5::constant(C64::new(1.0, 0.0)).div(&denom))
    };
    let jp = jet_at(xp)?;
    let jm = jet_at(-xp)?;
    let wp = w_continuum(z, xp)?;
    let wm = w_continuum(z, -xp)?;
    // Antiderivative of 1/(2πi W (W−λ)²):
    // F(W) = [−ln(1−λ/W)/λ² − 1/(λ(W−λ))]/(2πi); tail = F(Wm) − F(Wp).
    let f_of = |w: C64| -> C64 {
        (-(1.0 - lam / w).ln() / (lam * lam) - 1.0 / (lam * (w - lam))) / two_pi_i()
    };
    Ok(f_of(wm) - f_of(wp) + em_derivative_corrections(&jp, &jm))
}

// ---------------------------------------------------------------------------
// Sequence acceleration.
// ---------------------------------------------------------------------------

/// Recursive Levin-u diagonal; entry `k` uses terms `a_0..a_k`.
pub(crate) fn levin_u_estimates(terms: &[C64]) -> Vec<C64> {
    let beta = 1.0;
    let mut num: Vec<C64> = Vec::with_capacity(terms.len());
    let mut den: Vec<C64> = Vec::with_capacity(terms.len());
    let mut estimates = Vec::with_capacity(terms.len());
    let mut partial = C64::new(0.0, 0.0);
    for (n, &a) in terms.iter().enumerate() {
        partial += a;
        let mut w = (beta + n as f64) * a;
        if w.norm() == 0.0 {
            w = C64::new(1e-300, 0.0);
        }
        num.push(partial / w);
        den.push(C64::new(1.0, 0.0) / w);
        for j in (0..n).rev() {
            let k = n - 1 - j;
            let c = if k > 0 {
                let bjk = beta + (j + k) as f64;
                (beta + j as f64) / bjk * (bjk / (bjk + 1.0)).powi(k as i32)
            } else {
                1.0
            };
            num[j] = num[j + 1] - c * num[j];
            den[j] = den[j + 1] - c * den[j];
        }
        if den[0].norm() > 0.0 {
            estimates.push(num[0] / den[0]);
        } else {
            estimates.push(partial);
        }
    }
    estimates
}

/// Wynn epsilon on the partial sums, advancing one anti-diagonal per term.
///
/// `old[k]` holds the previous anti-diagonal; an exactly converged pair
/// (zero difference) poisons only its own entry, which the even-column
/// scan below skips.
pub(crate) fn wynn_estimates(partials: &[C64]) -> Vec<C64> {
    let mut old: Vec<C64> = Vec::new();
    let mut estimates = Vec::with_capacity(partials.len());
    for (n, &s) in partials.iter().enumerate() {
        let mut new = vec![C64::new(0.0, 0.0); n + 1];
        new[0] = s;
        for k in 1..=n {
            let diff = new[k - 1] - old[k - 1];
            new[k] = if diff.norm() < 1e-290 {
                C64::new(1e300, 0.0)
            } else {
                let carry = if k >= 2 { old[k - 2] } else { C64::new(0.0, 0.0) };
                carry + 1.0 / diff
            };
        }
        // Deepest even column that stayed finite; the raw partial otherwise.
        let mut est = s;
        let mut k = n - (n % 2);
        loop {
            if new[k].norm() < 1e250 {
                est = new[k];
                break;
            }
            if k < 2 {
                break;
            }
            k -= 2;
        }
        estimates.push(est);
        old = new;
    }
    estimates
}

fn best_stabilized(seq: &[C64], fallback: (C64, f64)) -> (C64, f64) {
    let usable = |v: C64| v.re.is_finite() && v.im.is_finite() && v.norm() < 1e250;
    let mut best_value = None;
    let mut best_change = f64::INFINITY;
    for k in 2..seq.len() {
        if !(usable(seq[k]) && usable(seq[k - 1]) && usable(seq[k - 2])) {
            continue;
        }
        let change = (seq[k] - seq[k - 1]).norm() + (seq[k - 1] - seq[k - 2]).norm();
        if change < best_change {
            best_change = change;
            best_value = Some(seq[k]);
        }
    }
    match best_value {
        Some(v) => (v, best_change),
        None => fallback,
    }
}

/// Combine Levin-u and Wynn epsilon: pick the method whose diagonal has
/// stabilized best, and report an error estimate that respects cross-method
/// disagreement so a single confidently wrong accelerant cannot win.
pub(crate) fn accel_robust(terms: &[C64]) -> (C64, f64) {
    let mut partials = Vec::with_capacity(terms.len());
    let mut s = C64::new(0.0, 0.0);
    for &a in terms {
        s += a;
        partials.push(s);
    }
    let fallback = (
        *partials.last().unwrap_or(&C64::new(0.0, 0.0)),
        terms.last().map_or(0.0, |a| a.norm() * terms.len() as f64),
    );
    let lev = levin_u_estimates(terms);
    let eps = wynn_estimates(&partials);
    let (lv, le) = best_stabilized(&lev, fallback);
    let (ev, ee) = best_stabilized(&eps, fallback);
    let cross = (lv - ev).norm();
    if le <= ee {
        (lv, le.max(cross.min(ee)))
    } else {
        (ev, ee.max(cross.min(le)))
    }
}

// ---------------------------------------------------------------------------
// Branch tables: cached W ladders and the shell sums built from them.
// ---------------------------------------------------------------------------

/// Cached Lambert branches for one `z`, in shell order `[W₀, W₁, W₋₁, …]`.
#[derive(Clone, Debug)]
pub(crate) struct BranchTable {
    pub z: C64,
    pub ws: Vec<C64>,
}

impl BranchTable {
    pub(crate) fn new(z: C64, k_pairs: usize) -> Result<Self> {
        // Keep a real argument on the upper lip of the logarithm's cut, in
        // step with the branch values; a `−0.0` here would misalign the
        // analytic tails against the stored ladder by one root.
        let z = if z.im == 0.0 { C64::new(z.re, 0.0) } else { z };
        let mut ws = Vec::with_capacity(2 * k_pairs + 1);
        ws.push(lambert::lambert_w(0, z)?.w);
        for k in 1..=k_pairs as i32 {
            ws.push(lambert::lambert_w(k, z)?.w);
            ws.push(lambert::lambert_w(-k, z)?.w);
        }
        Ok(BranchTable { z, ws })
    }

    pub(crate) fn k_pairs(&self) -> usize {
        (self.ws.len() - 1) / 2
    }

    /// Shell terms of `Σ e^{W τ}/(1+W)`.
    fn exp_shells(&self, tau: f64) -> Vec<C64> {
        self.shells(|w| (w * tau).exp() / (1.0 + w))
    }

    /// Shell terms of `Σ 1/((1+W)(W−λ))`.
    fn mode_shells(&self, lam: C64) -> Vec<C64> {
        self.shells(|w| ((1.0 + w) * (w - lam)).finv())
    }

    fn mode_sq_shells(&self, lam: C64) -> Vec<C64> {
        self.shells(|w| ((1.0 + w) * (w - lam) * (w - lam)).finv())
    }

    fn exp_mode_shells(&self, tau: f64, lam: C64) -> Vec<C64> {
        self.shells(|w| (w * tau).exp() / ((1.0 + w) * (w - lam)))
    }

    fn shells(&self, f: impl Fn(C64) -> C64) -> Vec<C64> {
        let k = self.k_pairs();
        let mut a = Vec::with_capacity(k + 1);
        a.push(f(self.ws[0]));
        for i in 1..=k {
            a.push(f(self.ws[2 * i - 1]) + f(self.ws[2 * i]));
        }
        a
    }
}

/// `G(τ) = Σ_n e^{W_n τ}/(1+W_n)` over the whole ladder, causally regularized:
/// at the discontinuity `τ = 0` the symmetric shell sum lands on the Gibbs
/// midpoint `1/2`, which callers double to recover the causal value.
/// Returns the sum and an error estimate.
pub(crate) fn branch_exp_sum(table: &BranchTable, tau: f64, tol: f64) -> Result<(C64, f64)> {
    let k = table.k_pairs();
    let a = table.exp_shells(tau);
    let s: C64 = a.iter().sum();
    let last = a[k].norm();
    if last < tol / (k as f64) / 100.0 {
        return Ok((s, last * k as f64));
    }
    let delta = tau - tau.round();
    if delta.abs() <= 0.25 {
        let tail = em_tail_exp(table.z, tau, k)?;
        return Ok((s + tail, 7e-9));
    }
    let (tail, err) = euler_tail_exp(table.z, tau, k, None)?;
    Ok((s + tail, err.max(1e-13)))
}

/// `Σ_n 1/((1+W_n)(W_n−λ))` over the whole ladder, tail closed analytically.
pub(crate) fn branch_mode_sum(table: &BranchTable, lam: C64) -> Result<C64> {
    let a = table.mode_shells(lam);
    let s: C64 = a.iter().sum();
    Ok(s + em_tail_mode(table.z, lam, table.k_pairs())?)
}

/// `Σ_n 1/((1+W_n)(W_n−λ)²)` over the whole ladder.
pub(crate) fn branch_mode_sq_sum(table: &BranchTable, lam: C64) -> Result<C64> {
    let a = table.mode_sq_shells(lam);
    let s: C64 = a.iter().sum();
    Ok(s + em_tail_mode_sq(table.z, lam, table.k_pairs())?)
}

/// `Σ_n e^{W_n τ}/((1+W_n)(W_n−λ))`. Decay is one power faster than the bare
/// exponential family. Away from integer `τ` the remainder closes through the
/// geometric Euler transform; near integers the winding phase is slow and the
/// shell series is smooth enough for the sequence accelerants.
pub(crate) fn branch_exp_mode_sum(
    table: &BranchTable,
    tau: f64,
    lam: C64,
) -> Result<(C64, f64)> {
    check_mode_window(lam, table.k_pairs())?;
    let k = table.k_pairs();
    let a = table.exp_mode_shells(tau, lam);
    let s: C64 = a.iter().sum();
    let last = a[k].norm();
    if last < 1e-14 / (k as f64) {
        return Ok((s, last * k as f64));
    }
    let delta = tau - tau.round();
    if delta.abs() >= 0.125 {
        let (tail, err) = euler_tail_exp(table.z, tau, k, Some(lam))?;
        return Ok((s + tail, err.max(1e-13)));
    }
    Ok(accel_robust(&a))
}

/// Shell count needed before a resolvent tail at argument `λ` may be closed.
pub(crate) fn mode_pairs_for(lam: C64, floor: usize) -> usize {
    let needed = (lam.norm() * 1.45 / (2.0 * PI)).ceil() as usize + 60;
    needed.max(floor)
}

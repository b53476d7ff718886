//! Multi-branch complex Lambert W via Halley iteration.
//!
//! Branch `n` follows the standard atlas: `W_n(z) + ln W_n(z) = ln z + 2πin`
//! with the principal logarithm, which pins `Im W_n` to the strip around `2πn`
//! away from the branch point. Seeds come from the asymptotic expansion
//! `L − ln L`, a Taylor series near `z = 0`, or the square-root series at the
//! `z = −1/e` branch point, and every accepted value must pass the defining
//! residual `|w e^w − z| ≤ 1e-12 · max(1, |z|)`, relaxed only by the
//! conditioning factor `|w|·ε` unavoidable on very deep branches.

use std::f64::consts::{E, PI};

use crate::{C64, Error, Result};

const MAX_ITER: usize = 60;
const STEP_TOL: f64 = 1e-14;
const RESIDUAL_TOL: f64 = 1e-12;

/// A converged branch value together with its defining-equation residual.
#[derive(Clone, Copy, Debug)]
pub struct WValue {
    pub branch: i32,
    pub w: C64,
    pub residual: f64,
}

fn halley(z: C64, mut w: C64, max_iter: usize) -> (C64, bool) {
    for _ in 0..max_iter {
        let ew = w.exp();
        let f = w * ew - z;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        if denom.norm() == 0.0 || !denom.is_finite() {
            return (w, false);
        }
        let step = f / denom;
        w -= step;
        if step.norm() <= STEP_TOL * (1.0 + w.norm()) {
            return (w, true);
        }
    }
    (w, false)
}

fn residual_of(w: C64, z: C64) -> f64 {
    (w * w.exp() - z).norm()
}

/// Acceptance threshold on `|w e^w − z|` for a candidate root `w`.
///
/// The residual of an exactly-representable root still carries the phase
/// conditioning of `e^w`: rounding `w` by one ulp moves `e^w` relatively by
/// about `|w|·ε`, so the achievable floor is `|z|·|w|·ε` and a fixed cutoff
/// starts rejecting perfect roots once `|w|` reaches a few thousand. Distinct
/// roots sit `~2π` apart in `w`, so the scaled gate still rejects a wrong
/// root by many orders of magnitude.
fn residual_gate(z: C64, w: C64) -> f64 {
    z.norm().max(1.0) * RESIDUAL_TOL.max(30.0 * f64::EPSILON * (1.0 + w.norm()))
}

/// Branch index recovered from the converged value through the atlas identity.
fn branch_index_of(w: C64, z: C64) -> i32 {
    // A rounding-level imaginary residue next to the negative real axis must
    // not flip the logarithm across its cut.
    let w = if w.im == 0.0 { C64::new(w.re, 0.0) } else { w };
    let k = (w + w.ln() - z.ln()).im / (2.0 * PI);
    k.round() as i32
}

/// Does a converged root belong on sheet `branch`?
///
/// On `z ∈ [−1/e, 0)` the equation has two real roots which the atlas
/// identity cannot tell apart (both round to index 0): the principal branch
/// owns the one in `[−1, 0)` and `W_{−1}` owns the one below `−1`, the single
/// place where `W_{−1}` is real. Everywhere else the identity decides.
fn sheet_matches(branch: i32, w: C64, z: C64) -> bool {
    if z.im == 0.0 && z.re < 0.0 && z.re >= -1.0 / E && w.im.abs() <= 1e-10 {
        return match branch {
            0 => w.re >= -1.0 - 1e-10,
            -1 => w.re <= -1.0 + 1e-10,
            _ => false,
        };
    }
    branch_index_of(w, z) == branch
}

/// Square-root expansion around the branch point `z = −1/e`, sheet picked by `q = ±p`.
fn branch_point_seed(z: C64, negative_sheet: bool) -> C64 {
    let p = (2.0 * (E * z + 1.0)).sqrt();
    let q = if negative_sheet { -p } else { p };
    -1.0 + q - q * q / 3.0 + q * q * q * (11.0 / 72.0) - q * q * q * q * (43.0 / 540.0)
}

fn seeds_for(branch: i32, z: C64) -> Vec<C64> {
    let mut seeds = Vec::with_capacity(3);
    let near_branch_point = (E * z + 1.0).norm() < 0.0625;
    if near_branch_point {
        match branch {
            0 => seeds.push(branch_point_seed(z, false)),
            -1 if z.im >= 0.0 => seeds.push(branch_point_seed(z, true)),
            1 if z.im < 0.0 => seeds.push(branch_point_seed(z, true)),
            _ => {}
        }
    }
    if branch == 0 && z.norm() < 0.5 {
        seeds.push(z * (1.0 - z * (1.0 - 1.5 * z)));
    }
    if branch == -1 && z.im == 0.0 && z.re < 0.0 && z.re >= -1.0 / E {
        // Real lower branch: W_{−1}(x) ≈ ln(−x) − ln(−ln(−x)) for x → 0⁻.
        let l1 = (-z.re).ln();
        if l1 < 0.0 {
            seeds.push(C64::new(l1 - (-l1).ln(), 0.0));
        }
    }
    let l = z.ln() + C64::new(0.0, 2.0 * PI * branch as f64);
    if l.norm() > 1.2 {
        let l1 = l.ln();
        seeds.push(l - l1);
        seeds.push(l - l1 + l1 / l + l1 * (l1 - 2.0) / (2.0 * l * l));
    }
    if branch == 0 && (1.0 + z).norm() > 1e-9 {
        // Crude but placed on the principal sheet for any moderate argument;
        // covers the annulus where the origin series has stopped converging
        // and the asymptotic expansion is not yet trustworthy.
        seeds.push((1.0 + z).ln());
    }
    seeds
}

/// Lambert W on branch `n`. A real `z` is treated as the limit from the
/// upper half plane, so `−0.0` imaginary parts cannot shift the ladder
/// across the negative-axis cut.
pub fn lambert_w(branch: i32, z: C64) -> Result<WValue> {
    if !z.is_finite() {
        return Err(Error::LambertBranch {
            branch,
            z,
            reason: "argument must be finite",
        });
    }
    let z = if z.im == 0.0 { C64::new(z.re, 0.0) } else { z };
    if z.norm() == 0.0 {
        return if branch == 0 {
            Ok(WValue {
                branch,
                w: C64::new(0.0, 0.0),
                residual: 0.0,
            })
        } else {
            Err(Error::LambertBranch {
                branch,
                z,
                reason: "z = 0 is a singular point of every branch but the principal one",
            })
        };
    }

    let mut best: Option<WValue> = None;
    for seed in seeds_for(branch, z) {
        let (mut w, _) = halley(z, seed, MAX_ITER);
        if !w.is_finite() {
            continue;
        }
        // A real argument with a real root must come back exactly real; a
        // complex seed can land with denormal dirt in the imaginary part.
        // Genuine conjugate pairs near the branch point keep |Im w| ≳ √|z + 1/e|
        // and fail the residual check on the axis, so they are never snapped.
        if z.im == 0.0 && w.im != 0.0 && w.im.abs() <= 1e-12 * (1.0 + w.re.abs()) {
            let snapped = C64::new(w.re, 0.0);
            if residual_of(snapped, z) <= residual_gate(z, snapped) {
                w = snapped;
            }
        }
        let residual = residual_of(w, z);
        if residual > residual_gate(z, w) {
            continue;
        }
        if sheet_matches(branch, w, z) {
            let candidate = WValue {
                branch,
                w,
                residual,
            };
            match best {
                Some(b) if b.residual <= residual => {}
                _ => best = Some(candidate),
            }
        }
    }
    best.ok_or(Error::LambertBranch {
        branch,
        z,
        reason: "no seed converged onto the requested sheet",
    })
}

/// All branches `n_min..=n_max`, in that order.
pub fn w_grid(n_min: i32, n_max: i32, z: C64) -> Result<Vec<WValue>> {
    if n_min > n_max {
        return Err(Error::Unsupported("w_grid needs n_min <= n_max"));
    }
    (n_min..=n_max).map(|n| lambert_w(n, z)).collect()
}

/// Continuation of the branch family to real branch parameter `x`:
/// solves `W e^W = z e^{2πix}` on the sheet reached by following the branch
/// ladder, seeded from `L = ln z + 2πix`. Used by the tail machinery at
/// half-integer `x`, far from the branch point.
pub(crate) fn w_continuum(z: C64, x: f64) -> Result<C64> {
    let zx = z * C64::new(0.0, 2.0 * PI * (x - x.round())).exp();
    let l = z.ln() + C64::new(0.0, 2.0 * PI * x);
    let seed = l - l.ln();
    let (w, _) = halley(zx, seed, 80);
    let residual = if w.is_finite() {
        residual_of(w, zx)
    } else {
        f64::INFINITY
    };
    let tol = residual_gate(zx, w);
    if !residual.is_finite() || residual > tol {
        return Err(Error::NoConvergence {
            what: "lambert branch continuation",
            achieved: residual,
            required: tol,
        });
    }
    Ok(w)
}

//! Closed-form transfer across a piece of constant potential.
//!
//! On a piece of length `L` with `V = v`, `ψ'' = (v - κ²)ψ` is solved by the
//! entire functions `C(x) = cos √x` and `S(x) = sin √x / √x` of `x = qL²`,
//! `q = κ² - v` (continued to `cosh`/`sinh` for `x < 0`). The phase is
//! unwrapped by counting zeros of `ψ` inside the piece.

use std::f64::consts::PI;

/// `(C(x), S(x))`.
#[inline]
pub(crate) fn cs(x: f64) -> (f64, f64) {
    if x.abs() < 1e-3 {
        let s = 1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0));
        let c = 1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0 * (1.0 - x / 56.0)));
        (c, s)
    } else if x > 0.0 {
        let w = x.sqrt();
        let (sin, cos) = w.sin_cos();
        (cos, sin / w)
    } else {
        let w = (-x).sqrt();
        (w.cosh(), w.sinh() / w)
    }
}

/// `T(x) = (1 - S(4x)) / (2x)` given `S(4x) = S(x)C(x)`.
#[inline]
fn t_fn(x: f64, s4: f64) -> f64 {
    if x.abs() < 0.1 {
        // Σ_{k≥1} (-1)^{k+1} 4^k x^{k-1} / (2 (2k+1)!)
        let mut term = 1.0 / 3.0;
        let mut sum = term;
        for k in 2..12u32 {
            let kk = f64::from(k);
            term *= -4.0 * x / ((2.0 * kk) * (2.0 * kk + 1.0));
            sum += term;
        }
        sum
    } else {
        (1.0 - s4) / (2.0 * x)
    }
}

/// Result of one constant piece, starting from `r = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PieceStep {
    /// Phase increment `θ_out - θ_in`, computed in the reduced frame.
    pub dtheta: f64,
    pub dlog_r: f64,
    /// `∫ (ψ² + ψ'²/κ²)` over the piece.
    pub int_a: f64,
    /// `∫ 2vψ²` over the piece.
    pub int_b: f64,
}

/// Splits `θ = kπ + θ_r` with `θ_r ∈ [0, π)`.
#[inline]
pub(crate) fn reduce(theta: f64) -> (f64, f64) {
    let k = (theta / PI).floor();
    let mut r = theta - k * PI;
    let mut k = k;
    if r < 0.0 {
        r += PI;
        k -= 1.0;
    } else if r >= PI {
        r -= PI;
        k += 1.0;
    }
    (k, r)
}

/// Transfer across `[0, len]` with `V = v ≠ 0`. With `integrals = false`
/// the `int_*` fields and `dlog_r` may be left at zero.
#[inline]
pub(crate) fn piece(
    v: f64,
    len: f64,
    kappa: f64,
    theta_r: f64,
    integrals: bool,
    log_r: bool,
) -> PieceStep {
    let q = kappa * kappa - v;
    let x = q * len * len;
    let (c, s) = cs(x);
    let (psi0, cos0) = theta_r.sin_cos();
    let p0 = kappa * cos0;
    let psi1 = psi0 * c + p0 * len * s;
    let p1 = -psi0 * q * len * s + p0 * c;
    let phi1 = p1 / kappa;

    let mut frac = psi1.atan2(phi1);
    if frac < 0.0 {
        frac += PI;
    }
    if frac >= PI {
        frac -= PI;
    }

    let out_r = if x < 4.0 {
        // at most one zero of ψ in the piece
        if psi0 > 0.0 && psi1 <= 0.0 {
            PI + frac
        } else {
            frac
        }
    } else {
        // ψ = a sin(ωs + δ): the modified angle advances by exactly ωL
        let omega = q.sqrt();
        let lambda = kappa / omega;
        let phi_r =
            theta_r + ((1.0 - lambda) * psi0 * cos0).atan2(lambda * cos0 * cos0 + psi0 * psi0);
        let phi = phi_r + omega * len;
        let (sp, cp) = phi.sin_cos();
        let approx = phi + ((lambda - 1.0) * sp * cp).atan2(cp * cp + lambda * sp * sp);
        ((approx - frac) / PI).round() * PI + frac
    };

    let mut step = PieceStep {
        dtheta: out_r - theta_r,
        dlog_r: 0.0,
        int_a: 0.0,
        int_b: 0.0,
    };
    if log_r || integrals {
        step.dlog_r = 0.5 * (psi1 * psi1 + phi1 * phi1).ln();
    }
    if integrals {
        let s4 = s * c;
        let t = t_fn(x, s4);
        let half = len * (1.0 + s4) / 2.0;
        let l2s2 = len * len * s * s;
        let l3t = len * len * len * t;
        let psi_sq = psi0 * psi0 * half + psi0 * p0 * l2s2 + p0 * p0 * l3t;
        let dpsi_sq = psi0 * psi0 * q * q * l3t - psi0 * p0 * q * l2s2 + p0 * p0 * half;
        step.int_a = psi_sq + dpsi_sq / (kappa * kappa);
        step.int_b = 2.0 * v * psi_sq;
    }
    step
}

/// Transfer of `(θ, log r)` across a unit cell with constant `V = v`.
pub fn exact_cell_transfer(v: f64, kappa: f64, theta_in: f64, log_r_in: f64) -> (f64, f64) {
    if v == 0.0 {
        return (theta_in + kappa, log_r_in);
    }
    let (k, theta_r) = reduce(theta_in);
    let step = piece(v, 1.0, kappa, theta_r, false, true);
    (k * PI + theta_r + step.dtheta, log_r_in + step.dlog_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entire_functions_match_closed_forms() {
        for x in [-2.0, -1e-3, -1e-4, 0.0, 1e-4, 9.9e-4, 1e-3, 0.5, 3.0, 50.0] {
            let (c, s) = cs(x);
            let (ce, se) = if x > 0.0 {
                (x.sqrt().cos(), x.sqrt().sin() / x.sqrt())
            } else if x < 0.0 {
                ((-x).sqrt().cosh(), (-x).sqrt().sinh() / (-x).sqrt())
            } else {
                (1.0, 1.0)
            };
            assert!((c - ce).abs() < 1e-15 && (s - se).abs() < 1e-15, "x = {x}");
        }
        for x in [-0.3, -0.099, -1e-5, 1e-5, 0.099, 0.3] {
            let (c, s) = cs(x);
            let s4 = cs(4.0 * x).1;
            assert!((s * c - s4).abs() < 1e-15);
            let direct = (1.0 - s4) / (2.0 * x);
            assert!((t_fn(x, s4) - direct).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn reduce_is_consistent() {
        for theta in [0.0, PI, 2.0 * PI - 1e-16, -0.1, 1000.0] {
            let (k, r) = reduce(theta);
            assert!((0.0..PI).contains(&r));
            assert!((k * PI + r - theta).abs() < 1e-12);
        }
    }
}

//! Classical fixed-step RK4 on the Prüfer system together with the
//! quadratures for `J`, `∫V`, `A` and `B`.

use std::f64::consts::PI;

/// `θ, log r, Re J, Im J, ∫V, a, b` where `a, b` are the local
/// contributions to `A, B` divided by `e^{2 log r_0}`.
pub(crate) type Vector = [f64; 7];

#[inline]
fn deriv(y: &Vector, v: f64, kappa: f64, lr0: f64) -> Vector {
    let (s2, c2) = (2.0 * y[0]).sin_cos();
    let sin_sq = 0.5 * (1.0 - c2);
    let w = (2.0 * (y[1] - lr0)).exp();
    [
        kappa - v / kappa * sin_sq,
        v / (2.0 * kappa) * s2,
        v * c2,
        v * s2,
        v,
        w,
        w * v * (1.0 - c2),
    ]
}

#[inline]
fn axpy(y: &Vector, h: f64, k: &Vector) -> Vector {
    let mut out = *y;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

/// Advances `y` over `[s0, s0 + len]` in `steps` RK4 steps of the potential
/// `v(s)`, `s` measured from the cell start.
pub(crate) fn segment(
    y: &mut Vector,
    v: &dyn Fn(f64) -> f64,
    s0: f64,
    len: f64,
    steps: u32,
    kappa: f64,
    lr0: f64,
) {
    let h = len / f64::from(steps);
    for i in 0..steps {
        let s = s0 + h * f64::from(i);
        let (va, vb, vc) = (v(s), v(s + 0.5 * h), v(s + h));
        let k1 = deriv(y, va, kappa, lr0);
        let k2 = deriv(&axpy(y, 0.5 * h, &k1), vb, kappa, lr0);
        let k3 = deriv(&axpy(y, 0.5 * h, &k2), vb, kappa, lr0);
        let k4 = deriv(&axpy(y, h, &k3), vc, kappa, lr0);
        let before = (y[0] / PI).floor();
        for (idx, yi) in y.iter_mut().enumerate() {
            *yi += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
        }
        debug_assert!(
            (y[0] / PI).floor() >= before,
            "phase crossed a multiple of π downward"
        );
    }
}

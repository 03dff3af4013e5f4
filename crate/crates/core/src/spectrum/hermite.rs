//! Monotone piecewise-cubic Hermite interpolation and its inverse.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant through `(x_i, y_i)` with slopes `d_i`, the
/// slopes limited so that strictly increasing data stay increasing.
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// `slopes` are the exact derivatives at the nodes, limited in place.
    pub fn new(x: Vec<f64>, y: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || slopes.len() != n {
            return Err(Error::domain(
                "interpolation needs at least two matching nodes",
            ));
        }
        if let Some(i) = (1..n).find(|&i| !(x[i] > x[i - 1])) {
            return Err(Error::domain(format!(
                "interpolation nodes not increasing at {i}"
            )));
        }
        if let Some(i) = (1..n).find(|&i| !(y[i] > y[i - 1])) {
            return Err(Error::NonMonotone(format!(
                "values not strictly increasing between x = {} and x = {} ({} then {})",
                x[i - 1],
                x[i],
                y[i - 1],
                y[i]
            )));
        }
        let mut d: Vec<f64> = slopes.into_iter().map(|s| s.max(0.0)).collect();
        // Fritsch–Carlson: keep (α, β) = (d_i, d_{i+1}) / secant inside the disc of radius 3
        for i in 0..n - 1 {
            let secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            let (a, b) = (d[i] / secant, d[i + 1] / secant);
            let norm = a.hypot(b);
            if norm > 3.0 {
                let tau = 3.0 / norm;
                d[i] = tau * a * secant;
                d[i + 1] = tau * b * secant;
            }
        }
        Ok(Self { x, y, d })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn eval_on(&self, i: usize, x: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    fn segment(&self, x: f64) -> usize {
        self.x
            .partition_point(|&xi| xi <= x)
            .saturating_sub(1)
            .min(self.x.len() - 2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_on(self.segment(x), x)
    }

    /// The `x` with `p(x) = y` for `y` inside the range.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&y) {
            return Err(Error::domain(format!(
                "{y} outside the interpolated range [{lo}, {hi}]"
            )));
        }
        let i = self
            .y
            .partition_point(|&yi| yi <= y)
            .saturating_sub(1)
            .min(self.y.len() - 2);
        let (mut a, mut b) = (self.x[i], self.x[i + 1]);
        if y == self.y[i] {
            return Ok(a);
        }
        // bisection to the floating-point limit
        loop {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.eval_on(i, m) < y {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_with_exact_slopes() {
        let f = |x: f64| x * x * x / 3.0 + x;
        let df = |x: f64| x * x + 1.0;
        let xs: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let p = MonotoneCubic::new(
            xs.clone(),
            xs.iter().map(|&x| f(x)).collect(),
            xs.iter().map(|&x| df(x)).collect(),
        )
        .unwrap();
        for i in 0..100 {
            let x = -1.0 + 0.02 * i as f64;
            assert!((p.eval(x) - f(x)).abs() < 1e-14);
            let y = f(x);
            assert!((p.inverse(y).unwrap() - x).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_monotone_data() {
        let err = MonotoneCubic::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5], vec![1.0; 3]);
        assert!(matches!(err, Err(Error::NonMonotone(_))));
    }

    #[test]
    fn limiter_keeps_monotonicity() {
        let p = MonotoneCubic::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.01, 1.0],
            vec![5.0, 5.0, 5.0],
        )
        .unwrap();
        let mut last = f64::NEG_INFINITY;
        for i in 0..=200 {
            let v = p.eval(i as f64 / 100.0);
            assert!(v >= last);
            last = v;
        }
    }
}

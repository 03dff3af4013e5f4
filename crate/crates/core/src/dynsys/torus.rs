//! Hyperbolic toral automorphisms in exact fixed-point arithmetic.
//!
//! A point of `T² = R²/Z²` is held as a pair of `P`-bit binary fractions.
//! Multiplication by an integer matrix followed by reduction mod 1 is exact
//! on this grid, but each step magnifies the truncation error of the initial
//! point by the expanding eigenvalue `λ < 4`, so two bits of the budget are
//! spent per step. Running out of budget is an error, never a silent loss.

use num_bigint::BigUint;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::{lane, stream_rng};

/// Arnold's cat map `M = [[2, 1], [1, 1]]`.
pub const CAT_MATRIX: [[i64; 2]; 2] = [[2, 1], [1, 1]];

/// `⌈log2 λ⌉` for the cat map's expanding eigenvalue `λ ≈ 2.618`.
pub const GUARD_BITS_PER_STEP: u32 = 2;

/// Eigenvalues `(λ, 1/λ)` of a 2×2 integer matrix with real spectrum,
/// largest first.
pub fn eigenvalues(m: [[i64; 2]; 2]) -> (f64, f64) {
    let tr = (m[0][0] + m[1][1]) as f64;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

pub fn cat_map_eigenvalues() -> (f64, f64) {
    eigenvalues(CAT_MATRIX)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointT2 {
    x: BigUint,
    y: BigUint,
    bits: u32,
    remaining: u32,
    steps: u64,
}

impl FixedPointT2 {
    /// Budget sufficient for `steps` iterations with 64 bits left over.
    pub fn budget_for(steps: usize) -> u32 {
        GUARD_BITS_PER_STEP * steps as u32 + 64
    }

    pub fn origin(bits: u32) -> Self {
        Self::from_raw(BigUint::default(), BigUint::default(), bits)
    }

    fn from_raw(x: BigUint, y: BigUint, bits: u32) -> Self {
        Self {
            x,
            y,
            bits,
            remaining: bits,
            steps: 0,
        }
    }

    /// A uniformly distributed point with `bits` random binary digits per
    /// coordinate.
    pub fn random(bits: u32, seed: u64, realization: u64) -> Self {
        let mut rng = stream_rng(seed, realization, lane::TORUS);
        let mut draw = || {
            let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
            rng.fill_bytes(&mut bytes);
            BigUint::from_bytes_le(&bytes) & mask(bits)
        };
        let x = draw();
        let y = draw();
        Self::from_raw(x, y, bits)
    }

    /// The point `(xn/xd, yn/yd)` truncated to `bits` binary digits.
    pub fn from_fractions(x: (u64, u64), y: (u64, u64), bits: u32) -> Self {
        let frac = |(num, den): (u64, u64)| {
            assert!(den > 0 && num < den, "fraction {num}/{den} not in [0, 1)");
            (BigUint::from(num) << bits) / BigUint::from(den)
        };
        Self::from_raw(frac(x), frac(y), bits)
    }

    pub fn precision_bits(&self) -> u32 {
        self.bits
    }

    /// Bits of the stored coordinates that still track the true orbit.
    pub fn remaining_bits(&self) -> u32 {
        self.remaining
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn spend(&mut self) -> Result<()> {
        if self.remaining < GUARD_BITS_PER_STEP {
            return Err(Error::PrecisionExhausted {
                steps: self.steps,
                budget: self.bits,
            });
        }
        self.remaining -= GUARD_BITS_PER_STEP;
        self.steps += 1;
        Ok(())
    }

    /// `(x, y) ← (2x + y, x + y) mod 1`.
    pub fn step(&mut self) -> Result<()> {
        self.spend()?;
        let m = mask(self.bits);
        let x = (&self.x << 1u32) + &self.y;
        let y = &self.x + &self.y;
        self.x = x & &m;
        self.y = y & m;
        Ok(())
    }

    /// `(x, y) ← (x - y, 2y - x) mod 1`, the inverse of [`step`](Self::step).
    pub fn step_inverse(&mut self) -> Result<()> {
        self.spend()?;
        let m = mask(self.bits);
        let modulus = BigUint::from(1u32) << self.bits;
        // add enough multiples of the modulus to keep everything non-negative
        let x = &self.x + &modulus - &self.y;
        let y = (&self.y << 1u32) + &modulus - &self.x;
        self.x = x & &m;
        self.y = y & m;
        Ok(())
    }

    /// Leading 53 bits of each coordinate.
    pub fn to_f64(&self) -> (f64, f64) {
        (
            to_unit_f64(&self.x, self.bits),
            to_unit_f64(&self.y, self.bits),
        )
    }
}

/// Functional form of [`FixedPointT2::step`].
pub fn cat_map_step(p: &FixedPointT2) -> Result<FixedPointT2> {
    let mut next = p.clone();
    next.step()?;
    Ok(next)
}

fn mask(bits: u32) -> BigUint {
    (BigUint::from(1u32) << bits) - 1u32
}

fn to_unit_f64(v: &BigUint, bits: u32) -> f64 {
    const MANTISSA: u32 = 53;
    let top: BigUint = if bits > MANTISSA {
        v >> (bits - MANTISSA)
    } else {
        v << (MANTISSA - bits)
    };
    let top = top.iter_u64_digits().next().unwrap_or(0);
    top as f64 / (1u64 << MANTISSA) as f64
}

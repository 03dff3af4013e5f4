//! Lazily materialized binary words and the shift dynamics on them.
//!
//! A one-sided word `(ω_0, ω_1, ...)` encodes `x = Σ ω_i 2^{-i-1}` and the
//! left shift is the doubling map `x ↦ {2x}`. A two-sided word additionally
//! carries `(ω_{-1}, ω_{-2}, ...)` encoding `y = Σ ω_{-i} 2^{-i}`; the left
//! shift is then the baker's map. Shifting only moves an offset, so orbits of
//! any length are exact.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::rng::{lane, stream_rng};

/// Bits used when converting a word to a floating-point coordinate.
pub const COORDINATE_BITS: usize = 53;

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum Tail {
    Constant(u8),
    Random(ChaCha8Rng),
}

impl Tail {
    fn extend(&mut self, bits: &mut Vec<u8>, upto: usize) {
        while bits.len() <= upto {
            match self {
                Tail::Constant(b) => bits.push(*b),
                Tail::Random(rng) => {
                    let chunk = rng.next_u64();
                    bits.extend((0..64).map(|i| ((chunk >> (63 - i)) & 1) as u8));
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BitWord {
    // raw index r >= 0 lives in forward[r], r < 0 in backward[-r - 1]
    forward: Vec<u8>,
    backward: Vec<u8>,
    // logical index i maps to raw index i + offset
    offset: i64,
    two_sided: bool,
    forward_tail: Tail,
    backward_tail: Tail,
}

impl BitWord {
    /// A Lebesgue-typical point of `[0, 1)` as a one-sided word.
    pub fn random_one_sided(seed: u64, realization: u64) -> Self {
        Self {
            forward: Vec::new(),
            backward: Vec::new(),
            offset: 0,
            two_sided: false,
            forward_tail: Tail::Random(stream_rng(seed, realization, lane::WORD_FORWARD)),
            backward_tail: Tail::Constant(0),
        }
    }

    /// A Lebesgue-typical point of the unit square as a two-sided word.
    pub fn random_two_sided(seed: u64, realization: u64) -> Self {
        Self {
            two_sided: true,
            backward_tail: Tail::Random(stream_rng(seed, realization, lane::WORD_BACKWARD)),
            ..Self::random_one_sided(seed, realization)
        }
    }

    /// One-sided word `(bits[0], bits[1], ..., tail, tail, ...)`.
    pub fn from_bits(bits: &[u8], tail: u8) -> Self {
        Self {
            forward: bits.iter().map(|&b| b & 1).collect(),
            backward: Vec::new(),
            offset: 0,
            two_sided: false,
            forward_tail: Tail::Constant(tail & 1),
            backward_tail: Tail::Constant(0),
        }
    }

    /// Two-sided word with `past = (ω_{-1}, ω_{-2}, ...)` and
    /// `future = (ω_0, ω_1, ...)`, padded on both ends with `tail`.
    pub fn two_sided_from(past: &[u8], future: &[u8], tail: u8) -> Self {
        Self {
            backward: past.iter().map(|&b| b & 1).collect(),
            two_sided: true,
            backward_tail: Tail::Constant(tail & 1),
            ..Self::from_bits(future, tail)
        }
    }

    /// One-sided word holding the first `bits` binary digits of `x ∈ [0, 1)`.
    pub fn from_point_x(x: f64, bits: usize) -> Self {
        Self::from_bits(&digits(x, bits), 0)
    }

    /// Two-sided word for the point `(x, y)` of the unit square.
    pub fn from_point(x: f64, y: f64, bits: usize) -> Self {
        Self::two_sided_from(&digits(y, bits), &digits(x, bits), 0)
    }

    pub fn is_two_sided(&self) -> bool {
        self.two_sided
    }

    /// Number of left shifts applied so far.
    pub fn time(&self) -> i64 {
        self.offset
    }

    fn raw(&self, i: i64) -> i64 {
        let raw = i + self.offset;
        assert!(
            self.two_sided || raw >= 0,
            "index {i} is not part of a one-sided word"
        );
        raw
    }

    pub fn bit(&mut self, i: i64) -> u8 {
        let raw = self.raw(i);
        if raw >= 0 {
            let r = raw as usize;
            self.forward_tail.extend(&mut self.forward, r);
            self.forward[r]
        } else {
            let r = (-raw - 1) as usize;
            self.backward_tail.extend(&mut self.backward, r);
            self.backward[r]
        }
    }

    pub fn set_bit(&mut self, i: i64, value: u8) {
        self.bit(i);
        let raw = self.raw(i);
        if raw >= 0 {
            self.forward[raw as usize] = value & 1;
        } else {
            self.backward[(-raw - 1) as usize] = value & 1;
        }
    }

    /// Left shift `(Tω)_i = ω_{i+1}`.
    pub fn shift(&mut self) {
        self.offset += 1;
    }

    pub fn shift_by(&mut self, steps: u64) {
        self.offset += steps as i64;
    }

    /// The bits `ω_first, ..., ω_{first+width-1}` read as a binary integer,
    /// most significant bit first.
    pub fn window_index(&mut self, first: i64, width: usize) -> usize {
        (0..width as i64).fold(0usize, |acc, i| (acc << 1) | self.bit(first + i) as usize)
    }

    /// `x = Σ_{i≥0} ω_i 2^{-i-1}` truncated to [`COORDINATE_BITS`] digits.
    pub fn x(&mut self) -> f64 {
        dyadic_fraction(self, 0, COORDINATE_BITS)
    }

    /// `y = Σ_{i≥1} ω_{-i} 2^{-i}` truncated to [`COORDINATE_BITS`] digits;
    /// zero for one-sided words.
    pub fn y(&mut self) -> f64 {
        if !self.two_sided {
            return 0.0;
        }
        let mut m = 0u64;
        for i in 1..=COORDINATE_BITS as i64 {
            m = (m << 1) | self.bit(-i) as u64;
        }
        m as f64 / (1u64 << COORDINATE_BITS) as f64
    }
}

fn digits(mut x: f64, bits: usize) -> Vec<u8> {
    assert!((0.0..1.0).contains(&x), "coordinate {x} outside [0, 1)");
    (0..bits)
        .map(|_| {
            x *= 2.0;
            if x >= 1.0 {
                x -= 1.0;
                1
            } else {
                0
            }
        })
        .collect()
}

/// `{2^j x}` computed from the digits `ω_j, ..., ω_{j+K-1}`.
///
/// Exact for `K ≤ 53`; longer requests are truncated to 53 digits, the
/// resolution of `f64`.
pub fn dyadic_fraction(word: &mut BitWord, j: i64, k: usize) -> f64 {
    let k = k.min(COORDINATE_BITS);
    let mut m = 0u64;
    for i in 0..k as i64 {
        m = (m << 1) | word.bit(j + i) as u64;
    }
    m as f64 / (1u64 << k) as f64
}

/// One step of the baker's map as a shift of the symbolic word.
pub fn baker_step(word: &BitWord) -> BitWord {
    let mut next = word.clone();
    next.shift();
    next
}

/// The geometric baker's map `C ∘ E` on the unit square: stretch to
/// `[0, 2) × [0, 1/2)` and stack the right half on top of the left half.
pub fn baker_map(x: f64, y: f64) -> (f64, f64) {
    let (x, y) = (2.0 * x, 0.5 * y);
    if x < 1.0 {
        (x, y)
    } else {
        (x - 1.0, y + 0.5)
    }
}

/// The doubling map `x ↦ {2x}`.
pub fn dyadic_map(x: f64) -> f64 {
    let x = 2.0 * x;
    if x >= 1.0 {
        x - 1.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dyadic_fraction_of_one_half() {
        let mut w = BitWord::from_bits(&[1], 0);
        assert_eq!(dyadic_fraction(&mut w, 0, 8), 0.5);
    }

    #[test]
    fn alternate_expansion_of_one_half() {
        let mut w = BitWord::from_bits(&[0], 1);
        assert_eq!(dyadic_fraction(&mut w, 1, 16), 1.0 - 2f64.powi(-16));
        // (0, 1, 1, 1, ...) approaches 1/2 from below
        assert_eq!(dyadic_fraction(&mut w, 0, 53), 0.5 - 2f64.powi(-53));
    }

    #[test]
    fn shift_identity_on_random_word() {
        let mut w = BitWord::random_one_sided(3, 0);
        for j in 0..200 {
            let a = dyadic_fraction(&mut w, j + 1, 40);
            let b = dyadic_fraction(&mut w, j, 41);
            assert_eq!(a, dyadic_map(b));
        }
    }

    #[test]
    fn baker_geometric_examples() {
        assert_eq!(baker_map(0.25, 0.5), (0.5, 0.25));
        assert_eq!(baker_map(0.75, 0.0), (0.5, 0.5));

        let mut w = baker_step(&BitWord::from_point(0.25, 0.5, 8));
        assert_eq!((w.x(), w.y()), (0.5, 0.25));
        let mut w = baker_step(&BitWord::from_point(0.75, 0.0, 8));
        assert_eq!((w.x(), w.y()), (0.5, 0.5));
    }

    #[test]
    fn double_baker_step_is_shift_by_two() {
        let w = BitWord::random_two_sided(11, 2);
        let mut twice = baker_step(&baker_step(&w));
        let mut shifted = w.clone();
        shifted.shift_by(2);
        for i in -70..70 {
            assert_eq!(twice.bit(i), shifted.bit(i));
        }
    }

    #[test]
    fn random_words_do_not_depend_on_access_order() {
        let mut a = BitWord::random_two_sided(5, 9);
        let mut b = BitWord::random_two_sided(5, 9);
        let fwd: Vec<u8> = (0..300).map(|i| a.bit(i)).collect();
        let back: Vec<u8> = (1..300).map(|i| a.bit(-i)).collect();
        let back_b: Vec<u8> = (1..300).rev().map(|i| b.bit(-i)).collect();
        let fwd_b: Vec<u8> = (0..300).rev().map(|i| b.bit(i)).collect();
        assert_eq!(fwd, fwd_b.into_iter().rev().collect::<Vec<_>>());
        assert_eq!(back, back_b.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    #[should_panic]
    fn one_sided_words_have_no_past() {
        BitWord::from_bits(&[1, 0], 0).bit(-1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // Iterating the doubling map on the coordinate and shifting the word
        // agree at every digit that is still inside the 53-bit window.
        #[test]
        fn dyadic_conjugacy(bits in proptest::collection::vec(0u8..2, 53), steps in 0usize..40) {
            let mut w = BitWord::from_bits(&bits, 0);
            let mut x = w.x();
            for _ in 0..steps {
                x = dyadic_map(x);
                w.shift();
            }
            prop_assert_eq!(x, dyadic_fraction(&mut w, 0, 53 - steps));
        }

        #[test]
        fn baker_conjugacy(xb in proptest::collection::vec(0u8..2, 40), yb in proptest::collection::vec(0u8..2, 40), steps in 0usize..12) {
            let mut w = BitWord::two_sided_from(&yb, &xb, 0);
            let (mut x, mut y) = (w.x(), w.y());
            for _ in 0..steps {
                (x, y) = baker_map(x, y);
                w.shift();
            }
            prop_assert_eq!((x, y), (w.x(), w.y()));
        }
    }
}

//! Observables on symbolic words and on the torus, and the quasi-locality
//! diagnostics built on them.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::torus::FixedPointT2;
use super::word::BitWord;
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)` of the unit square carrying a value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rectangle {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub value: f64,
}

impl Rectangle {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x[0] <= x && x < self.x[1] && self.y[0] <= y && y < self.y[1]
    }
}

/// Value of the first rectangle containing `(x, y)`, zero if none does.
pub fn rectangle_value(rectangles: &[Rectangle], x: f64, y: f64) -> f64 {
    rectangle_index(rectangles, x, y).map_or(0.0, |i| rectangles[i].value)
}

fn rectangle_index(rectangles: &[Rectangle], x: f64, y: f64) -> Option<usize> {
    rectangles.iter().position(|r| r.contains(x, y))
}

pub fn validate_rectangles(rectangles: &[Rectangle]) -> Result<()> {
    for r in rectangles {
        let ok = (0.0..=1.0).contains(&r.x[0])
            && (0.0..=1.0).contains(&r.x[1])
            && (0.0..=1.0).contains(&r.y[0])
            && (0.0..=1.0).contains(&r.y[1])
            && r.x[0] < r.x[1]
            && r.y[0] < r.y[1];
        if !ok {
            return Err(Error::config(format!("invalid rectangle {r:?}")));
        }
        if !(r.value.abs() <= 1.0) {
            return Err(Error::config(format!(
                "rectangle value {} exceeds 1",
                r.value
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    Constant {
        value: f64,
    },
    /// Table over the bits `ω_first .. ω_{first+w-1}` (most significant
    /// first); `values.len() = 2^w`.
    BitWindow {
        first: i64,
        values: Vec<f64>,
    },
    /// `x = Σ ω_i 2^{-i-1}`.
    CoordinateX,
    /// `y = Σ ω_{-i} 2^{-i}`; two-sided words only.
    CoordinateY,
    Rectangles {
        rectangles: Vec<Rectangle>,
    },
}

impl Observable {
    pub fn validate(&self, two_sided: bool) -> Result<()> {
        match self {
            Observable::Constant { value } if !(value.abs() <= 1.0) => Err(Error::config(format!(
                "constant observable {value} exceeds 1"
            ))),
            Observable::BitWindow { first, values } => {
                let len = values.len();
                if len < 2 || !len.is_power_of_two() || len > 1 << 24 {
                    return Err(Error::config(format!(
                        "bit-window table length {len} is not a power of two in [2, 2^24]"
                    )));
                }
                if !two_sided && *first < 0 {
                    return Err(Error::config("one-sided words have no negative indices"));
                }
                if let Some(v) = values.iter().find(|v| !(v.abs() <= 1.0)) {
                    return Err(Error::config(format!("bit-window value {v} exceeds 1")));
                }
                Ok(())
            }
            Observable::CoordinateY if !two_sided => {
                Err(Error::config("the y coordinate needs a two-sided word"))
            }
            Observable::Rectangles { rectangles } => validate_rectangles(rectangles),
            _ => Ok(()),
        }
    }

    /// Bits `[lo, hi]` the observable depends on, if finitely many.
    pub fn support(&self) -> Option<(i64, i64)> {
        match self {
            Observable::BitWindow { first, values } => {
                let w = values.len().trailing_zeros() as i64;
                Some((*first, first + w - 1))
            }
            _ => None,
        }
    }

    pub fn eval_word(&self, word: &mut BitWord) -> f64 {
        match self {
            Observable::Constant { value } => *value,
            Observable::BitWindow { first, values } => {
                let w = values.len().trailing_zeros() as usize;
                values[word.window_index(*first, w)]
            }
            Observable::CoordinateX => word.x(),
            Observable::CoordinateY => word.y(),
            Observable::Rectangles { rectangles } => {
                let (x, y) = (word.x(), word.y());
                rectangle_value(rectangles, x, y)
            }
        }
    }

    pub fn eval_point(&self, x: f64, y: f64) -> f64 {
        match self {
            Observable::Constant { value } => *value,
            Observable::CoordinateX => x,
            Observable::CoordinateY => y,
            Observable::Rectangles { rectangles } => rectangle_value(rectangles, x, y),
            Observable::BitWindow { first, values } => {
                let mut word = BitWord::from_point(x, y, 53);
                let w = values.len().trailing_zeros() as usize;
                values[word.window_index(*first, w)]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolicSystem {
    /// Doubling map on one-sided words.
    Dyadic,
    /// Baker's map on two-sided words.
    Baker,
}

impl SymbolicSystem {
    pub fn random_word(self, seed: u64, realization: u64) -> BitWord {
        match self {
            SymbolicSystem::Dyadic => BitWord::random_one_sided(seed, realization),
            SymbolicSystem::Baker => BitWord::random_two_sided(seed, realization),
        }
    }
}

/// Diameters of a cylinder set fixing a block of symbols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderDiameter {
    pub x: f64,
    pub y: Option<f64>,
}

/// Dyadic: cylinders fixing `ω_0 .. ω_{n-1}` are intervals of length `2^{-n}`.
/// Baker: fixing `ω_{-n} .. ω_n` pins `n + 1` digits of `x` and `n` of `y`.
pub fn cylinder_diameter(system: SymbolicSystem, depth: u32) -> Result<CylinderDiameter> {
    if depth == 0 {
        return Err(Error::domain("cylinder depth must be at least 1"));
    }
    let half = |k: u32| 0.5f64.powi(k as i32);
    Ok(match system {
        SymbolicSystem::Dyadic => CylinderDiameter {
            x: half(depth),
            y: None,
        },
        SymbolicSystem::Baker => CylinderDiameter {
            x: half(depth + 1),
            y: Some(half(depth)),
        },
    })
}

/// Monte Carlo lower bound for `Var_I(f) = sup |f(ω') - f(ω)|` over pairs
/// agreeing on `I = [-m, n]` (`I = [0, n]` for the one-sided system).
///
/// Returns exactly zero when `f` only reads bits inside `I`.
pub fn variation_estimate(
    obs: &Observable,
    system: SymbolicSystem,
    window: (u32, u32),
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let two_sided = system == SymbolicSystem::Baker;
    obs.validate(two_sided)?;
    let lo = if two_sided { -(window.0 as i64) } else { 0 };
    let hi = window.1 as i64;
    if let Some((a, b)) = obs.support() {
        if lo <= a && b <= hi {
            return Ok(0.0);
        }
    }
    let mut sup = 0.0f64;
    for s in 0..samples as u64 {
        let mut w = system.random_word(seed, 2 * s);
        let mut w2 = system.random_word(seed, 2 * s + 1);
        for i in lo..=hi {
            let b = w.bit(i);
            w2.set_bit(i, b);
        }
        sup = sup.max((obs.eval_word(&mut w) - obs.eval_word(&mut w2)).abs());
    }
    Ok(sup)
}

/// Pushes `samples` uniform points through one step of the map and bins the
/// image: `bins` cells for the dyadic system, `bins × bins` for the baker's
/// map. Returns the counts.
pub fn pushforward_histogram(
    system: SymbolicSystem,
    samples: usize,
    bins: usize,
    seed: u64,
) -> Vec<u64> {
    let cells = match system {
        SymbolicSystem::Dyadic => bins,
        SymbolicSystem::Baker => bins * bins,
    };
    let mut counts = vec![0u64; cells];
    let bin = |v: f64| ((v * bins as f64) as usize).min(bins - 1);
    for s in 0..samples as u64 {
        let mut w = system.random_word(seed, s);
        w.shift();
        let idx = match system {
            SymbolicSystem::Dyadic => bin(w.x()),
            SymbolicSystem::Baker => bin(w.x()) * bins + bin(w.y()),
        };
        counts[idx] += 1;
    }
    counts
}

/// Largest `|count - expected| / σ` over the bins of a histogram that should
/// be uniform, with binomial `σ`.
pub fn max_uniform_zscore(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let p = 1.0 / counts.len() as f64;
    let expected = total as f64 * p;
    let sigma = (total as f64 * p * (1.0 - p)).sqrt();
    counts
        .iter()
        .map(|&c| (c as f64 - expected).abs() / sigma)
        .fold(0.0, f64::max)
}

fn torus_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Empirical diameter of the cat-map cylinders `∩_{|t|≤n} T^{-t} C_{a_t}`
/// generated by a rectangle partition: sample points, group them by their
/// itinerary, and take the largest coordinate spread inside a group.
/// Points outside every rectangle get their own symbol.
pub fn empirical_cat_cylinder_diameter(
    partition: &[Rectangle],
    depth: u32,
    samples: usize,
    seed: u64,
) -> Result<CylinderDiameter> {
    validate_rectangles(partition)?;
    let steps = 2 * depth as usize;
    let budget = FixedPointT2::budget_for(steps);
    let symbol = |p: &FixedPointT2| {
        let (x, y) = p.to_f64();
        rectangle_index(partition, x, y).map_or(-1, |i| i as i32)
    };
    let mut groups: HashMap<Vec<i32>, Vec<(f64, f64)>> = HashMap::new();
    for s in 0..samples as u64 {
        let start = FixedPointT2::random(budget, seed, s);
        let mut itinerary = Vec::with_capacity(steps + 1);
        let mut back = start.clone();
        for _ in 0..depth {
            back.step_inverse()?;
            itinerary.push(symbol(&back));
        }
        itinerary.reverse();
        let mut fwd = start.clone();
        itinerary.push(symbol(&fwd));
        for _ in 0..depth {
            fwd.step()?;
            itinerary.push(symbol(&fwd));
        }
        groups.entry(itinerary).or_default().push(start.to_f64());
    }
    let (mut dx, mut dy) = (0.0f64, 0.0f64);
    for pts in groups.values() {
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                dx = dx.max(torus_distance(a.0, b.0));
                dy = dy.max(torus_distance(a.1, b.1));
            }
        }
    }
    Ok(CylinderDiameter { x: dx, y: Some(dy) })
}

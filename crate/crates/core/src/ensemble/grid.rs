use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weight triple on an integer lattice: weight `i` is `units[i] / denom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightTriple {
    units: [u32; 3],
    denom: u32,
}

impl WeightTriple {
    pub fn new(units: [u32; 3], denom: u32) -> Result<Self> {
        if denom == 0 || units.iter().sum::<u32>() != denom {
            return Err(Error::Validation(format!(
                "lattice units {units:?} do not sum to {denom}"
            )));
        }
        Ok(WeightTriple { units, denom })
    }

    pub fn units(&self) -> [u32; 3] {
        self.units
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn weights(&self) -> [f64; 3] {
        self.units.map(|u| u as f64 / self.denom as f64)
    }

    /// Exact: the units sum to the denominator by construction.
    pub fn sums_to_one(&self) -> bool {
        self.units.iter().sum::<u32>() == self.denom
    }
}

impl fmt::Display for WeightTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.weights();
        write!(f, "({a:.2}, {b:.2}, {c:.2})")
    }
}

/// Bounds and step of the weight search, in lattice units of `1 / denom`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo_units: u32,
    pub hi_units: u32,
    pub denom: u32,
}

impl Default for GridSpec {
    /// `[0.10, 0.50]` in steps of `0.05`.
    fn default() -> Self {
        GridSpec {
            lo_units: 2,
            hi_units: 10,
            denom: 20,
        }
    }
}

impl GridSpec {
    /// Build from real-valued bounds; `step` must divide 1, `lo` and `hi`.
    pub fn from_bounds(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let as_units = |v: f64, what: &str| -> Result<u32> {
            let u = v / step;
            if !(u.is_finite() && u >= 0.0 && (u - u.round()).abs() < 1e-9) {
                return Err(Error::Validation(format!("{what} {v} is not a multiple of step {step}")));
            }
            Ok(u.round() as u32)
        };
        if step.is_nan() || step <= 0.0 {
            return Err(Error::Validation(format!("step must be positive, got {step}")));
        }
        let spec = GridSpec {
            lo_units: as_units(lo, "lower bound")?,
            hi_units: as_units(hi, "upper bound")?,
            denom: as_units(1.0, "1")?,
        };
        if spec.lo_units > spec.hi_units || spec.hi_units > spec.denom {
            return Err(Error::Validation(format!("invalid bounds [{lo}, {hi}]")));
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightGrid {
    pub spec: GridSpec,
    pub points: Vec<WeightTriple>,
}

/// Every lattice triple within the bounds that sums to one, in
/// lexicographic order.
pub fn enumerate_grid(spec: GridSpec) -> WeightGrid {
    let GridSpec { lo_units: lo, hi_units: hi, denom } = spec;
    let mut points = Vec::new();
    for a in lo..=hi {
        for b in lo..=hi {
            let Some(c) = denom.checked_sub(a + b) else { continue };
            if (lo..=hi).contains(&c) {
                points.push(WeightTriple { units: [a, b, c], denom });
            }
        }
    }
    WeightGrid { spec, points }
}

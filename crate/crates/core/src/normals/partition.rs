//! Partition of the plane into cells carved from nine shifted grids of balls.
//!
//! Layer `l` (1-based) consists of the open balls of radius `rho` around
//! `rho (a_l + 3 j)` for `j` in `Z^2`, with
//! `a = (0,0), (1,0), (2,0), (0,1), (0,2), (1,1), (2,1), (1,2), (2,2)`.
//! A point belongs to the first layer that contains it. Within one layer
//! the balls are `3 rho` apart, so distinct cells of the same layer are at
//! distance at least `rho`. The nine layers together have centers on all
//! of `rho Z^2`, and every point is within `rho / sqrt(2)` of that lattice,
//! so every finite point is covered.
//!
//! Membership is decided on `w / rho`, so that centers are exact integers
//! and boundary cases do not depend on rounding in `rho * k`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::Complex64;

pub const LAYER_OFFSETS: [(i64, i64); 9] = [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2), (1, 1), (2, 1), (1, 2), (2, 2)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PlaneCell {
    Covered {
        layer: u8,
        j: (i64, i64),
    },
    /// Not covered by any ball. Only non-finite or overflowing inputs land
    /// here.
    Uncovered,
}

impl PlaneCell {
    /// Center of the ball defining the cell.
    pub fn center(&self, rho: f64) -> Option<Complex64> {
        match *self {
            PlaneCell::Covered { layer, j } => {
                let (ax, ay) = LAYER_OFFSETS[layer as usize - 1];
                Some(Complex64::new(rho * (ax + 3 * j.0) as f64, rho * (ay + 3 * j.1) as f64))
            }
            PlaneCell::Uncovered => None,
        }
    }
}

/// Lattice index nearest to `t` for a coordinate on `rho (a + 3 Z)`.
fn nearest_index(t: f64, a: i64) -> Option<i64> {
    let j = ((t - a as f64) / 3.0).round();
    if j.is_finite() && j.abs() < (i64::MAX / 4) as f64 {
        Some(j as i64)
    } else {
        None
    }
}

pub fn plane_partition_cell(w: Complex64, rho: f64) -> Result<PlaneCell> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be positive and finite, got {rho}")));
    }
    let (x, y) = (w.re / rho, w.im / rho);
    for (l, &(ax, ay)) in LAYER_OFFSETS.iter().enumerate() {
        let (Some(jx), Some(jy)) = (nearest_index(x, ax), nearest_index(y, ay)) else {
            return Ok(PlaneCell::Uncovered);
        };
        let cell = PlaneCell::Covered {
            layer: l as u8 + 1,
            j: (jx, jy),
        };
        // Distances in units of rho, where centers are exact integers.
        let dx = x - (ax + 3 * jx) as f64;
        let dy = y - (ay + 3 * jy) as f64;
        if dx * dx + dy * dy < 1.0 {
            return Ok(cell);
        }
    }
    Ok(PlaneCell::Uncovered)
}

/// Groups point indices by cell.
pub fn partition_points(points: &[Complex64], rho: f64) -> Result<BTreeMap<PlaneCell, Vec<usize>>> {
    let mut cells: BTreeMap<PlaneCell, Vec<usize>> = BTreeMap::new();
    for (i, &p) in points.iter().enumerate() {
        cells.entry(plane_partition_cell(p, rho)?).or_default().push(i);
    }
    Ok(cells)
}

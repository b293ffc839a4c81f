//! Functions sampled at grid nodes, and the weighted norms
//! `‖u‖_{L^p_{d^m}} = (∫ |u|^p d^m)^{1/p}` (`p = ∞`: the grid supremum of `|u|`).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::QuadratureGrid;
use crate::math::{self, CompensatedSum};

/// Where a field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    RightHandSide,
    Potential,
    Oracle,
}

/// Values at the nodes of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    values: Vec<f64>,
    provenance: Provenance,
    grid_id: u64,
}

impl SampledField {
    pub fn from_values(grid: &QuadratureGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("non-finite value at node {i}")));
        }
        Ok(Self { values, provenance, grid_id: grid.fingerprint() })
    }

    pub fn from_fn(grid: &QuadratureGrid, provenance: Provenance, f: impl Fn(&Point) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.nodes().iter().map(f).collect(), provenance)
    }

    pub fn zeros(grid: &QuadratureGrid, provenance: Provenance) -> Self {
        Self { values: alloc::vec![0.0; grid.len()], provenance, grid_id: grid.fingerprint() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn ensure_on(&self, grid: &QuadratureGrid) -> Result<()> {
        if self.grid_id != grid.fingerprint() || self.values.len() != grid.len() {
            return Err(Error::Mismatch("field belongs to a different grid".into()));
        }
        Ok(())
    }

    /// Nodewise map into a new field with the given provenance.
    pub fn map(&self, provenance: Provenance, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("map produced a non-finite value".into()));
        }
        Ok(Self { values, provenance, grid_id: self.grid_id })
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, provenance: Provenance, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid_id != other.grid_id {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("combination produced a non-finite value".into()));
        }
        Ok(Self { values, provenance, grid_id: self.grid_id })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(math::abs(*v)))
    }

    /// `‖u‖_{L^p_{d^k}}` on `grid`, with `p = f64::INFINITY` for the supremum.
    pub fn weighted_norm(&self, grid: &QuadratureGrid, p: f64, weight_power: u32) -> Result<f64> {
        self.ensure_on(grid)?;
        if !(p >= 1.0) {
            return Err(Error::param(format!("norm exponent p = {p} must be >= 1")));
        }
        if p == f64::INFINITY {
            return Ok(self.max_abs());
        }
        let mut acc = CompensatedSum::new();
        for ((x, w), u) in grid.nodes().iter().zip(grid.weights()).zip(&self.values) {
            let d = 1.0 - x.norm();
            let a = math::abs(*u);
            let up = if p == 1.0 { a } else { math::powf(a, p) };
            acc.add(w * up * math::powi(d, weight_power as i32));
        }
        let s = acc.value();
        Ok(if p == 1.0 { s } else { math::powf(s, 1.0 / p) })
    }

    /// Unweighted `‖u d^s‖_{L^p}` for a real power `s`; `p = ∞` gives `max |u| d^s`.
    pub fn lebesgue_norm(&self, grid: &QuadratureGrid, p: f64, d_power: f64) -> Result<f64> {
        self.ensure_on(grid)?;
        if !(p >= 1.0) {
            return Err(Error::param(format!("norm exponent p = {p} must be >= 1")));
        }
        let nodes = grid.nodes().iter().zip(&self.values);
        if p == f64::INFINITY {
            return Ok(nodes.fold(0.0, |acc, (x, u)| acc.max(math::abs(*u) * math::powf(1.0 - x.norm(), d_power))));
        }
        let mut acc = CompensatedSum::new();
        for ((x, u), w) in nodes.zip(grid.weights()) {
            let g = math::abs(*u) * math::powf(1.0 - x.norm(), d_power);
            acc.add(w * math::powf(g, p));
        }
        Ok(math::powf(acc.value(), 1.0 / p))
    }

    /// `∫ u d^k` (signed).
    pub fn weighted_integral(&self, grid: &QuadratureGrid, weight_power: u32) -> Result<f64> {
        self.ensure_on(grid)?;
        Ok(math::sum(
            grid.nodes()
                .iter()
                .zip(grid.weights())
                .zip(&self.values)
                .map(|((x, w), u)| w * u * math::powi(1.0 - x.norm(), weight_power as i32)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BallProblem;
    use crate::grid::Grading;

    fn grid3(level: u32) -> QuadratureGrid {
        QuadratureGrid::build(&BallProblem::new(3, 1).unwrap(), level, Grading::default()).unwrap()
    }

    #[test]
    fn unit_field_weighted_l1() {
        // 4π ∫_0^1 (1 - r) r² dr = π/3
        let g = grid3(3);
        let one = SampledField::from_fn(&g, Provenance::Oracle, |_| 1.0).unwrap();
        let v = one.weighted_norm(&g, 1.0, 1).unwrap();
        assert!((v - math::PI / 3.0).abs() / (math::PI / 3.0) < 5e-3, "{v}");
    }

    #[test]
    fn zero_and_sup() {
        let g = grid3(2);
        let z = SampledField::zeros(&g, Provenance::Oracle);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(z.weighted_norm(&g, p, 1).unwrap(), 0.0);
        }
        let r = SampledField::from_fn(&g, Provenance::Oracle, |x| x.norm()).unwrap();
        let sups: Vec<f64> = (1..4)
            .map(|l| {
                let g = grid3(l);
                SampledField::from_fn(&g, Provenance::Oracle, |x| x.norm())
                    .unwrap()
                    .weighted_norm(&g, f64::INFINITY, 1)
                    .unwrap()
            })
            .collect();
        assert!(sups.windows(2).all(|w| w[1] >= w[0]));
        assert!(sups[2] > 0.99);
        assert!(r.weighted_norm(&g, 0.5, 1).is_err());
    }

    #[test]
    fn rejects_foreign_and_nonfinite() {
        let g = grid3(1);
        let h = grid3(2);
        let f = SampledField::zeros(&g, Provenance::Oracle);
        assert!(matches!(f.weighted_norm(&h, 1.0, 1), Err(Error::Mismatch(_))));
        assert!(SampledField::from_fn(&g, Provenance::Oracle, |_| f64::NAN).is_err());
    }
}

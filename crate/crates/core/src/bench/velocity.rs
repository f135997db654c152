use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Medium velocity on the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityField {
    /// `(4/3)[1 - 0.5 exp(-0.5 (x1 - 1/2)^2)]`
    Bump1d,
    /// `(4/3)[1 - 0.5 exp(-0.5 ((x1 - 1/2)^2 + (x2 - 1/2)^2))]`
    Bump2d,
    Constant(f64),
}

impl VelocityField {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Self::Bump1d),
            2 => Ok(Self::Bump2d),
            _ => Err(Error::Config(format!("unknown velocity field {id}, expected 1 or 2"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Bump1d => "1".into(),
            Self::Bump2d => "2".into(),
            Self::Constant(c) => format!("const:{c}"),
        }
    }

    pub fn formula(&self) -> String {
        match self {
            Self::Bump1d => "c = (4/3)[1 - 0.5 exp(-0.5 (x1-0.5)^2)]".into(),
            Self::Bump2d => "c = (4/3)[1 - 0.5 exp(-0.5 ((x1-0.5)^2 + (x2-0.5)^2))]".into(),
            Self::Constant(c) => format!("c = {c}"),
        }
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let scale = 4.0 / 3.0;
        match self {
            Self::Bump1d => scale * (1.0 - 0.5 * (-0.5 * (x1 - 0.5).powi(2)).exp()),
            Self::Bump2d => scale * (1.0 - 0.5 * (-0.5 * ((x1 - 0.5).powi(2) + (x2 - 0.5).powi(2))).exp()),
            Self::Constant(c) => *c,
        }
    }

    /// Velocity sampled at the grid nodes.
    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        if grid.dim() != 2 {
            return Err(Error::InvalidGrid("velocity fields live on a 2D grid".into()));
        }
        Field::from_fn(grid.clone(), |x| Complex64::new(self.eval(x[0], x[1]), 0.0))
    }

    /// Wave number `k(x) = omega / c(x)` for `omega = 2 pi * freq`.
    pub fn wave_number(&self, grid: &Grid, freq: f64) -> Result<Field> {
        let omega = 2.0 * PI * freq;
        let mut c = self.sample(grid)?;
        for v in c.values_mut() {
            *v = Complex64::new(omega / v.re, 0.0);
        }
        Ok(c)
    }

    /// `omega / mean(c)`, the mean taken over the grid nodes.
    pub fn reference_wave_number(&self, grid: &Grid, freq: f64) -> Result<f64> {
        let c = self.sample(grid)?;
        let mean = c.values().iter().map(|v| v.re).sum::<f64>() / c.len() as f64;
        Ok(2.0 * PI * freq / mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_and_bounded() {
        for f in [VelocityField::Bump1d, VelocityField::Bump2d] {
            for i in 0..=20 {
                for j in 0..=20 {
                    let c = f.eval(i as f64 / 20.0, j as f64 / 20.0);
                    assert!(c > 0.0 && c <= 4.0 / 3.0);
                }
            }
        }
        assert!((VelocityField::Bump2d.eval(0.5, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            VelocityField::Bump1d.eval(0.5, 0.1),
            VelocityField::Bump1d.eval(0.5, 0.9)
        );
    }

    #[test]
    fn constant_field_reference_matches_pointwise() {
        let g = Grid::dirichlet(&[5, 7]).unwrap();
        let v = VelocityField::Constant(4.0 / 3.0);
        let k = v.wave_number(&g, 0.8).unwrap();
        let kr = v.reference_wave_number(&g, 0.8).unwrap();
        assert!(k.values().iter().all(|z| (z.re - kr).abs() < 1e-13));
        assert!(VelocityField::from_id(3).is_err());
    }
}

//! Discrete Fourier transform with the unnormalized forward convention
//! `y_j = sum_m w^{jm} x_m`, `w = exp(-2 pi i / N)`, and a `1/N` inverse.
//!
//! Arbitrary lengths are handled by `rustfft` (mixed radix, Rader and
//! Bluestein internally). Plans are cached per (length, direction).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::extension::{NdArray, COLUMN_TILE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    direction: Direction,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan")
            .field("len", &self.len)
            .field("direction", &self.direction)
            .finish()
    }
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, Direction), DftPlan>,
}

fn cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            planner: FftPlanner::new(),
            plans: HashMap::new(),
        })
    })
}

impl DftPlan {
    /// Shared plan for `len`, built on first use.
    pub fn cached(len: usize, direction: Direction) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = guard.plans.get(&(len, direction)) {
            return Ok(p.clone());
        }
        let fft = guard.planner.plan_fft(
            len,
            match direction {
                Direction::Forward => FftDirection::Forward,
                Direction::Inverse => FftDirection::Inverse,
            },
        );
        let plan = DftPlan { len, direction, fft };
        guard.plans.insert((len, direction), plan.clone());
        Ok(plan)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Transform every consecutive chunk of `len` values in place.
    pub fn process_batch(&self, data: &mut [Complex64]) -> Result<()> {
        let mut scratch = self.scratch();
        self.process_batch_with(data, &mut scratch)
    }

    fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()]
    }

    fn process_batch_with(&self, data: &mut [Complex64], scratch: &mut [Complex64]) -> Result<()> {
        if !data.len().is_multiple_of(self.len) {
            return Err(Error::ShapeMismatch {
                expected: self.len,
                got: data.len(),
            });
        }
        if data.is_empty() {
            return Ok(());
        }
        self.fft.process_with_scratch(data, scratch);
        if self.direction == Direction::Inverse {
            let s = 1.0 / self.len as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
        Ok(())
    }
}

pub fn dft_forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut y = x.to_vec();
    DftPlan::cached(x.len(), Direction::Forward)?.process_batch(&mut y)?;
    Ok(y)
}

pub fn dft_inverse(y: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut x = y.to_vec();
    DftPlan::cached(y.len(), Direction::Inverse)?.process_batch(&mut x)?;
    Ok(x)
}

/// 1D transform of every line along `axis`, in place.
pub fn dft_axis(a: &mut NdArray, axis: usize, direction: Direction) -> Result<()> {
    if axis >= a.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: a.dim() });
    }
    let len = a.shape[axis];
    let plan = DftPlan::cached(len, direction)?;
    let inner: usize = a.shape[axis + 1..].iter().product();
    if inner == 1 {
        return plan.process_batch(&mut a.data);
    }
    let outer: usize = a.shape[..axis].iter().product();
    let mut scratch = plan.scratch();
    // strided lines are gathered a tile of columns at a time so reads stay
    // contiguous
    let mut buf = vec![Complex64::new(0.0, 0.0); len * COLUMN_TILE.min(inner)];
    for o in 0..outer {
        let block = &mut a.data[o * len * inner..(o + 1) * len * inner];
        for i0 in (0..inner).step_by(COLUMN_TILE) {
            let width = COLUMN_TILE.min(inner - i0);
            let tile = &mut buf[..len * width];
            for k in 0..len {
                let row = &block[k * inner + i0..k * inner + i0 + width];
                for (b, v) in row.iter().enumerate() {
                    tile[b * len + k] = *v;
                }
            }
            plan.process_batch_with(tile, &mut scratch)?;
            for k in 0..len {
                let row = &mut block[k * inner + i0..k * inner + i0 + width];
                for (b, v) in row.iter_mut().enumerate() {
                    *v = tile[b * len + k];
                }
            }
        }
    }
    Ok(())
}

/// Transform along every axis.
pub fn dft_all_axes(a: &mut NdArray, direction: Direction) -> Result<()> {
    for axis in 0..a.dim() {
        dft_axis(a, axis, direction)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn delta_and_constant() {
        assert!(max_diff(&dft_forward(&c(&[1.0, 0.0, 0.0, 0.0])).unwrap(), &c(&[1.0; 4])) < 1e-15);
        assert!(max_diff(&dft_forward(&c(&[1.0; 4])).unwrap(), &c(&[4.0, 0.0, 0.0, 0.0])) < 1e-15);
        assert!(max_diff(&dft_inverse(&c(&[5.0, 0.0, 0.0, 0.0, 0.0])).unwrap(), &c(&[1.0; 5])) < 1e-15);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(dft_forward(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn axis_out_of_range() {
        let mut a = NdArray::zeros(vec![2, 2]);
        assert!(matches!(
            dft_axis(&mut a, 2, Direction::Forward),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn two_dim_delta_becomes_ones() {
        let mut a = NdArray::zeros(vec![3, 5]);
        a.data[0] = Complex64::new(1.0, 0.0);
        dft_all_axes(&mut a, Direction::Forward).unwrap();
        assert!(a.data.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn axis_round_trip() {
        let data: Vec<Complex64> = (0..24).map(|i| Complex64::new(i as f64, -(i as f64).sin())).collect();
        let orig = NdArray::new(vec![2, 3, 4], data).unwrap();
        for axis in 0..3 {
            let mut a = orig.clone();
            dft_axis(&mut a, axis, Direction::Forward).unwrap();
            dft_axis(&mut a, axis, Direction::Inverse).unwrap();
            assert!(max_diff(&a.data, &orig.data) < 1e-13);
        }
    }
}

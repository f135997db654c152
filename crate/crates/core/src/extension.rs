//! Odd/even extensions that turn box boundary-value data into periodic data,
//! the matching restrictions, and per-axis (tensor-product) application.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{strides, AxisBc, Boundary, Field, Grid};

/// Columns gathered together when working on a strided axis.
pub(crate) const COLUMN_TILE: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Odd extension of `f` (length `n`) to length `N = 2n + 2`:
/// `(f_1..f_n, 0, -f_n..-f_1, 0)`.
pub fn extend_odd_1d(f: &[Complex64]) -> Result<Vec<Complex64>> {
    if f.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut g = vec![ZERO; 2 * f.len() + 2];
    odd_into(f, &mut g);
    Ok(g)
}

/// Even extension across a Neumann node at the high end. The input holds
/// `n + 1` values, the output `M = 2n + 1`, with the reflection node doubled.
pub fn extend_even_1d(f: &[Complex64]) -> Result<Vec<Complex64>> {
    if f.len() < 2 {
        return Err(Error::TooShort { min: 2, got: f.len() });
    }
    let mut g = vec![ZERO; 2 * f.len() - 1];
    even_hi_into(f, &mut g);
    Ok(g)
}

/// First `n` entries of `v`.
pub fn restrict_1d(v: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    restrict_1d_at(v, 0, n)
}

/// `n` entries of `v` starting at `offset`.
pub fn restrict_1d_at(v: &[Complex64], offset: usize, n: usize) -> Result<Vec<Complex64>> {
    if offset + n > v.len() {
        return Err(Error::TooShort {
            min: offset + n,
            got: v.len(),
        });
    }
    Ok(v[offset..offset + n].to_vec())
}

fn odd_into(f: &[Complex64], g: &mut [Complex64]) {
    let n = f.len();
    let big = 2 * n + 2;
    g[..n].copy_from_slice(f);
    g[n] = ZERO;
    // 1-based g_j = -f_{N-j} for j = n+2..2n+1
    for j in n + 1..big - 1 {
        g[j] = -f[big - j - 2];
    }
    g[big - 1] = ZERO;
}

fn even_hi_into(f: &[Complex64], g: &mut [Complex64]) {
    let s = f.len();
    let m = 2 * s - 1;
    g[..s - 1].copy_from_slice(&f[..s - 1]);
    g[s - 1] = 2.0 * f[s - 1];
    for i in s..m {
        g[i] = f[m - 1 - i];
    }
}

fn even_lo_into(f: &[Complex64], g: &mut [Complex64]) {
    let s = f.len();
    let m = 2 * s - 1;
    for i in 0..s - 1 {
        g[i] = f[s - 1 - i];
    }
    g[s - 1] = 2.0 * f[0];
    for i in s..m {
        g[i] = f[i - (s - 1)];
    }
}

/// Periodic even extension with both ends reflected; length `2s - 2`.
fn even_both_into(f: &[Complex64], g: &mut [Complex64]) {
    let s = f.len();
    let p = 2 * s - 2;
    g[0] = 2.0 * f[0];
    g[1..s - 1].copy_from_slice(&f[1..s - 1]);
    g[s - 1] = 2.0 * f[s - 1];
    for j in s..p {
        g[j] = f[p - j];
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionKind {
    /// Identity.
    None,
    /// Dirichlet at both ends: `s -> 2s + 2`, periodic.
    Odd,
    /// Neumann node at the high end: `s -> 2s - 1`, Dirichlet at both new ends.
    Even,
    /// Neumann node at the low end: `s -> 2s - 1`.
    EvenLow,
    /// Neumann at both ends: `s -> 2s - 2`, periodic.
    EvenBoth,
}

impl ExtensionKind {
    pub fn target_len(self, source: usize) -> Result<usize> {
        let min = match self {
            ExtensionKind::None | ExtensionKind::Odd => 1,
            ExtensionKind::Even | ExtensionKind::EvenLow => 2,
            ExtensionKind::EvenBoth => 3,
        };
        if source < min {
            return Err(Error::TooShort { min, got: source });
        }
        Ok(match self {
            ExtensionKind::None => source,
            ExtensionKind::Odd => 2 * source + 2,
            ExtensionKind::Even | ExtensionKind::EvenLow => 2 * source - 1,
            ExtensionKind::EvenBoth => 2 * source - 2,
        })
    }

    /// Where the original unknowns sit inside the extended line.
    pub fn restriction_offset(self, source: usize) -> usize {
        match self {
            ExtensionKind::EvenLow => source - 1,
            _ => 0,
        }
    }

    fn extend_line(self, src: &[Complex64], dst: &mut [Complex64]) {
        match self {
            ExtensionKind::None => dst.copy_from_slice(src),
            ExtensionKind::Odd => odd_into(src, dst),
            ExtensionKind::Even => even_hi_into(src, dst),
            ExtensionKind::EvenLow => even_lo_into(src, dst),
            ExtensionKind::EvenBoth => even_both_into(src, dst),
        }
    }

    /// `(source index, factor)` for every entry of the extended line; a zero
    /// factor marks an entry that is identically zero.
    fn line_map(self, s: usize) -> Vec<(usize, f64)> {
        let t = self.target_len(s).expect("plan lengths are validated");
        (0..t)
            .map(|k| match self {
                ExtensionKind::None => (k, 1.0),
                ExtensionKind::Odd if k < s => (k, 1.0),
                ExtensionKind::Odd if k == s || k == t - 1 => (0, 0.0),
                ExtensionKind::Odd => (t - k - 2, -1.0),
                ExtensionKind::Even if k + 1 < s => (k, 1.0),
                ExtensionKind::Even if k + 1 == s => (k, 2.0),
                ExtensionKind::Even => (t - 1 - k, 1.0),
                ExtensionKind::EvenLow if k + 1 < s => (s - 1 - k, 1.0),
                ExtensionKind::EvenLow if k + 1 == s => (0, 2.0),
                ExtensionKind::EvenLow => (k + 1 - s, 1.0),
                ExtensionKind::EvenBoth if k == 0 || k + 1 == s => (k, 2.0),
                ExtensionKind::EvenBoth if k < s => (k, 1.0),
                ExtensionKind::EvenBoth => (t - k, 1.0),
            })
            .collect()
    }

    /// Kind that handles the Neumann ends of an axis (first stage).
    pub fn for_neumann_ends(bc: AxisBc) -> Self {
        match (bc.lo, bc.hi) {
            (Boundary::Dirichlet, Boundary::Dirichlet) => ExtensionKind::None,
            (Boundary::Dirichlet, Boundary::Neumann) => ExtensionKind::Even,
            (Boundary::Neumann, Boundary::Dirichlet) => ExtensionKind::EvenLow,
            (Boundary::Neumann, Boundary::Neumann) => ExtensionKind::EvenBoth,
        }
    }

    fn matches(self, bc: AxisBc) -> bool {
        match self {
            ExtensionKind::None => true,
            ExtensionKind::Odd => bc == AxisBc::DIRICHLET,
            other => other == Self::for_neumann_ends(bc),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisExtension {
    pub kind: ExtensionKind,
    pub source: usize,
    pub target: usize,
}

/// Per-axis extension choice; the tensor product of the 1D maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionPlan {
    axes: Vec<AxisExtension>,
    restriction_shift: usize,
}

impl ExtensionPlan {
    pub fn new(kinds: &[ExtensionKind], source_shape: &[usize]) -> Result<Self> {
        if kinds.len() != source_shape.len() {
            return Err(Error::PlanMismatch(format!(
                "{} kinds for {} axes",
                kinds.len(),
                source_shape.len()
            )));
        }
        let axes = kinds
            .iter()
            .zip(source_shape)
            .map(|(&kind, &source)| {
                Ok(AxisExtension {
                    kind,
                    source,
                    target: kind.target_len(source)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            axes,
            restriction_shift: 0,
        })
    }

    /// Odd extension on every axis of an all-Dirichlet grid.
    pub fn odd(grid: &Grid) -> Result<Self> {
        Self::new(&vec![ExtensionKind::Odd; grid.dim()], &grid.shape())
    }

    /// Shift every restriction window by `shift` entries. Exists so the
    /// verification suite can confirm a wrong index convention is caught.
    #[doc(hidden)]
    pub fn with_restriction_shift(mut self, shift: usize) -> Self {
        self.restriction_shift = shift;
        self
    }

    pub fn axes(&self) -> &[AxisExtension] {
        &self.axes
    }

    pub fn source_shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.source).collect()
    }

    pub fn target_shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.target).collect()
    }

    pub fn extend(&self, x: &NdArray) -> Result<NdArray> {
        if x.shape != self.source_shape() {
            return Err(Error::PlanMismatch(format!(
                "array shape {:?}, plan source {:?}",
                x.shape,
                self.source_shape()
            )));
        }
        (0..self.axes.len()).try_fold(x.clone(), |cur, axis| self.extend_axis(cur, axis))
    }

    pub fn restrict(&self, v: &NdArray) -> Result<NdArray> {
        if v.shape != self.target_shape() {
            return Err(Error::PlanMismatch(format!(
                "array shape {:?}, plan target {:?}",
                v.shape,
                self.target_shape()
            )));
        }
        (0..self.axes.len()).try_fold(v.clone(), |cur, axis| self.restrict_axis(cur, axis))
    }

    /// Extend along one axis only; the other axes may have any length.
    pub fn extend_axis(&self, x: NdArray, axis: usize) -> Result<NdArray> {
        let ext = self.axis_checked(&x, axis, |e| e.source)?;
        match ext.kind {
            ExtensionKind::None => Ok(x),
            kind if axis == 0 => Ok(x.remap_outer(&kind.line_map(ext.source))),
            kind if axis + 1 == x.dim() => x.map_axis(axis, ext.target, |src, dst| kind.extend_line(src, dst)),
            kind => x.remap_axis(axis, &kind.line_map(ext.source)),
        }
    }

    /// Restrict along one axis only; the other axes may have any length.
    pub fn restrict_axis(&self, v: NdArray, axis: usize) -> Result<NdArray> {
        let ext = self.axis_checked(&v, axis, |e| e.target)?;
        if ext.kind == ExtensionKind::None && self.restriction_shift == 0 {
            return Ok(v);
        }
        let off = ext.kind.restriction_offset(ext.source) + self.restriction_shift;
        if off + ext.source > ext.target {
            return Err(Error::TooShort {
                min: off + ext.source,
                got: ext.target,
            });
        }
        let map: Vec<(usize, f64)> = (off..off + ext.source).map(|k| (k, 1.0)).collect();
        if axis == 0 {
            Ok(v.remap_outer(&map))
        } else {
            v.remap_axis(axis, &map)
        }
    }

    fn axis_checked(&self, a: &NdArray, axis: usize, want: impl Fn(&AxisExtension) -> usize) -> Result<AxisExtension> {
        let ext = *self.axes.get(axis).ok_or(Error::AxisOutOfRange {
            axis,
            dim: self.axes.len(),
        })?;
        if a.dim() != self.axes.len() || a.shape[axis] != want(&ext) {
            return Err(Error::PlanMismatch(format!(
                "axis {axis}: array shape {:?}, plan wants length {}",
                a.shape,
                want(&ext)
            )));
        }
        Ok(ext)
    }
}

/// Extend a field; every non-identity axis kind must agree with the grid's
/// boundary tags on that axis.
pub fn extend_field(f: &Field, plan: &ExtensionPlan) -> Result<NdArray> {
    for (axis, ext) in plan.axes().iter().enumerate() {
        if axis >= f.grid().dim() || !ext.kind.matches(f.grid().bc(axis)) {
            return Err(Error::PlanMismatch(format!(
                "axis {axis}: {:?} does not fit the grid boundary tags",
                ext.kind
            )));
        }
    }
    plan.extend(&NdArray::from_field(f))
}

pub fn restrict_field(v: &NdArray, plan: &ExtensionPlan, grid: &Grid) -> Result<Field> {
    let r = plan.restrict(v)?;
    if r.shape != grid.shape() {
        return Err(Error::PlanMismatch(format!(
            "restricted shape {:?}, grid shape {:?}",
            r.shape,
            grid.shape()
        )));
    }
    Field::new(grid.clone(), r.data)
}

/// Dense row-major complex array without boundary semantics; used for
/// extended (periodic) data.
#[derive(Clone, Debug, PartialEq)]
pub struct NdArray {
    pub shape: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl NdArray {
    pub fn new(shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![ZERO; len],
        }
    }

    pub fn from_field(f: &Field) -> Self {
        Self {
            shape: f.grid().shape(),
            data: f.values().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Apply `op` to every line along `axis`, producing lines of length
    /// `out_len`.
    pub fn map_axis(
        &self,
        axis: usize,
        out_len: usize,
        mut op: impl FnMut(&[Complex64], &mut [Complex64]),
    ) -> Result<NdArray> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
        }
        let in_len = self.shape[axis];
        let mut out_shape = self.shape.clone();
        out_shape[axis] = out_len;
        let mut out = NdArray::zeros(out_shape);

        let inner: usize = self.shape[axis + 1..].iter().product();
        let outer: usize = self.shape[..axis].iter().product();
        if inner == 1 {
            for (src, dst) in self.data.chunks_exact(in_len).zip(out.data.chunks_exact_mut(out_len)) {
                op(src, dst);
            }
            return Ok(out);
        }
        let tile = COLUMN_TILE.min(inner);
        let mut src = vec![ZERO; in_len * tile];
        let mut dst = vec![ZERO; out_len * tile];
        for o in 0..outer {
            let block_in = &self.data[o * in_len * inner..(o + 1) * in_len * inner];
            let block_out = &mut out.data[o * out_len * inner..(o + 1) * out_len * inner];
            for i0 in (0..inner).step_by(tile) {
                let width = tile.min(inner - i0);
                for k in 0..in_len {
                    for (b, v) in block_in[k * inner + i0..k * inner + i0 + width].iter().enumerate() {
                        src[b * in_len + k] = *v;
                    }
                }
                for b in 0..width {
                    op(
                        &src[b * in_len..(b + 1) * in_len],
                        &mut dst[b * out_len..(b + 1) * out_len],
                    );
                }
                for k in 0..out_len {
                    for (b, v) in block_out[k * inner + i0..k * inner + i0 + width].iter_mut().enumerate() {
                        *v = dst[b * out_len + k];
                    }
                }
            }
        }
        Ok(out)
    }

    /// New array whose slice `k` along `axis` is `factor * self[.., j, ..]`
    /// for `map[k] = (j, factor)`. Each slice is copied as contiguous rows.
    fn remap_axis(&self, axis: usize, map: &[(usize, f64)]) -> Result<NdArray> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim() });
        }
        let in_len = self.shape[axis];
        let out_len = map.len();
        let mut out_shape = self.shape.clone();
        out_shape[axis] = out_len;
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut out = NdArray::zeros(out_shape);
        if inner == 0 {
            return Ok(out);
        }
        for (block_in, block_out) in self
            .data
            .chunks_exact(in_len * inner)
            .zip(out.data.chunks_exact_mut(out_len * inner))
        {
            for (row_out, &(j, factor)) in block_out.chunks_exact_mut(inner).zip(map) {
                let row_in = &block_in[j * inner..(j + 1) * inner];
                if factor == 1.0 {
                    row_out.copy_from_slice(row_in);
                } else if factor != 0.0 {
                    for (o, i) in row_out.iter_mut().zip(row_in) {
                        *o = i * factor;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `remap_axis` on axis 0, reusing the buffer. Slices along axis 0 are
    /// contiguous, so when every source precedes (or follows) its target the
    /// rows can be rewritten in place from the far end.
    fn remap_outer(mut self, map: &[(usize, f64)]) -> NdArray {
        let inner: usize = self.shape[1..].iter().product();
        let rewrite = |data: &mut Vec<Complex64>, k: usize| {
            let (j, factor) = map[k];
            let row = k * inner..(k + 1) * inner;
            if factor == 0.0 {
                data[row].fill(ZERO);
                return;
            }
            if j != k {
                data.copy_within(j * inner..(j + 1) * inner, row.start);
            }
            if factor != 1.0 {
                data[row].iter_mut().for_each(|v| *v *= factor);
            }
        };
        if map.iter().enumerate().all(|(k, &(j, _))| j <= k) {
            if map.len() > self.shape[0] {
                self.data.resize(map.len() * inner, ZERO);
            }
            (0..map.len()).rev().for_each(|k| rewrite(&mut self.data, k));
        } else if map.iter().enumerate().all(|(k, &(j, _))| j >= k) {
            (0..map.len()).for_each(|k| rewrite(&mut self.data, k));
        } else {
            return self.remap_axis(0, map).expect("axis 0 exists");
        }
        self.data.truncate(map.len() * inner);
        self.shape[0] = map.len();
        self
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn line_maps_match_line_kernels() {
        use ExtensionKind::*;
        for kind in [None, Odd, Even, EvenLow, EvenBoth] {
            for s in 3..9 {
                let src: Vec<Complex64> = (0..s).map(|j| Complex64::new(j as f64 + 1.0, 0.5 - j as f64)).collect();
                let mut want = vec![ZERO; kind.target_len(s).unwrap()];
                kind.extend_line(&src, &mut want);
                let got: Vec<Complex64> = kind.line_map(s).iter().map(|&(j, f)| src[j] * f).collect();
                assert_eq!(got, want, "{kind:?} s={s}");
            }
        }
    }

    #[test]
    fn in_place_outer_remap_matches_copying_remap() {
        use ExtensionKind::*;
        let a = NdArray::new(
            vec![5, 3],
            (0..15).map(|j| Complex64::new(j as f64, 1.0 - j as f64)).collect(),
        )
        .unwrap();
        for kind in [Odd, Even, EvenLow, EvenBoth] {
            let map = kind.line_map(5);
            assert_eq!(a.clone().remap_outer(&map), a.remap_axis(0, &map).unwrap(), "{kind:?}");
        }
        for off in 0..3 {
            let map: Vec<(usize, f64)> = (off..off + 3).map(|k| (k, 1.0)).collect();
            assert_eq!(
                a.clone().remap_outer(&map),
                a.remap_axis(0, &map).unwrap(),
                "offset {off}"
            );
        }
    }

    #[test]
    fn odd_extension_examples() {
        assert_eq!(
            extend_odd_1d(&c(&[1.0, 2.0])).unwrap(),
            c(&[1.0, 2.0, 0.0, -2.0, -1.0, 0.0])
        );
        assert_eq!(extend_odd_1d(&c(&[0.0])).unwrap(), c(&[0.0; 4]));
        assert_eq!(extend_odd_1d(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn odd_extension_is_odd() {
        let f = c(&[0.3, -1.2, 2.5, 0.7, 4.0]);
        let n = f.len();
        let g = extend_odd_1d(&f).unwrap();
        let big = g.len();
        // 1-based: g_j = -g_{N-j} for j = n+2..2n+1, g_{n+1} = g_N = 0
        for j in n + 2..=2 * n + 1 {
            assert_eq!(g[j - 1], -g[big - j - 1]);
        }
        assert_eq!(g[n], ZERO);
        assert_eq!(g[big - 1], ZERO);
    }

    #[test]
    fn even_extension_examples() {
        assert_eq!(extend_even_1d(&c(&[1.5, 2.0])).unwrap(), c(&[1.5, 4.0, 1.5]));
        assert_eq!(
            extend_even_1d(&c(&[1.0, 2.0, 3.0])).unwrap(),
            c(&[1.0, 2.0, 6.0, 2.0, 1.0])
        );
        assert_eq!(extend_even_1d(&c(&[1.0])), Err(Error::TooShort { min: 2, got: 1 }));
    }

    #[test]
    fn even_extension_is_symmetric_off_center() {
        let f = c(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let g = extend_even_1d(&f).unwrap();
        let m = g.len();
        let center = f.len() - 1;
        for j in 0..m {
            if j != center {
                assert_eq!(g[j], g[m - 1 - j]);
            }
        }
    }

    #[test]
    fn restriction_examples() {
        let v = c(&[7.0, 8.0, 9.0, 0.0, -9.0, -8.0]);
        assert_eq!(restrict_1d(&v, 2).unwrap(), c(&[7.0, 8.0]));
        assert_eq!(restrict_1d(&v, 6).unwrap(), v);
        assert!(restrict_1d(&v, 7).is_err());
    }

    #[test]
    fn restriction_inverts_odd_extension_exactly() {
        for n in 1..=64 {
            let f: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(j as f64 * 0.37 - 3.0, 1.0 / (j as f64 + 1.0)))
                .collect();
            assert_eq!(restrict_1d(&extend_odd_1d(&f).unwrap(), n).unwrap(), f);
        }
    }

    #[test]
    fn lower_and_both_end_even_layouts() {
        let f = c(&[1.0, 2.0, 3.0]);
        let mut g = vec![ZERO; 5];
        even_lo_into(&f, &mut g);
        assert_eq!(g, c(&[3.0, 2.0, 2.0, 2.0, 3.0]));
        assert_eq!(ExtensionKind::EvenLow.restriction_offset(3), 2);

        let f = c(&[1.0, 2.0, 3.0, 4.0]);
        let mut g = vec![ZERO; 6];
        even_both_into(&f, &mut g);
        assert_eq!(g, c(&[2.0, 2.0, 3.0, 8.0, 3.0, 2.0]));
    }

    #[test]
    fn field_extension_2d() {
        let grid = Grid::dirichlet(&[2, 2]).unwrap();
        let f = Field::from_real(grid.clone(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let plan = ExtensionPlan::odd(&grid).unwrap();
        let g = extend_field(&f, &plan).unwrap();
        assert_eq!(g.shape, vec![6, 6]);
        // odd along both axes
        for i in 0..6 {
            for j in 0..6 {
                let v = g.data[i * 6 + j];
                let mi = (10 - i) % 6;
                let mj = (10 - j) % 6;
                assert_eq!(v, -g.data[mi * 6 + j]);
                assert_eq!(v, -g.data[i * 6 + mj]);
            }
        }
        let back = restrict_field(&g, &plan, &grid).unwrap();
        assert_eq!(back, f);

        let zero = extend_field(&Field::zeros(grid), &plan).unwrap();
        assert!(zero.data.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn plan_must_fit_grid() {
        let grid = Grid::neumann(&[3]).unwrap();
        let plan = ExtensionPlan::new(&[ExtensionKind::Odd], &grid.shape()).unwrap();
        assert!(extend_field(&Field::zeros(grid), &plan).is_err());
    }
}

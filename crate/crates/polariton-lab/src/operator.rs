//! Sparse Hermitian operator matrices.
//!
//! All Hamiltonians and observables are assembled into [`OperatorMatrix`], a
//! compressed-sparse-row matrix of `Complex64` entries. Assembly goes through
//! [`OperatorBuilder`], which accumulates duplicate entries and verifies the
//! Hermiticity contract on finalization. Matrices are immutable afterwards and
//! safe to share across threads.

use std::collections::HashMap;
use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Hermiticity defect tolerated at assembly time.
pub const HERMITICITY_TOL: f64 = 1e-14;

/// Default cap on the flat dimension of an assembled operator.
pub const MAX_ASSEMBLY_DIM: usize = 4_000_000;

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    dim: usize,
    label: String,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<C64>,
    real: bool,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// True when every stored entry has zero imaginary part, enabling the
    /// real-symmetric fast path in the dense solver.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> OperatorMatrix {
        let mut b = OperatorBuilder::new(dim);
        for i in 0..dim {
            b.add_real(i, i, 1.0);
        }
        b.finalize("identity").expect("identity is Hermitian")
    }

    /// Build from a diagonal.
    pub fn from_diagonal(diag: &[f64], label: &str) -> OperatorMatrix {
        let mut b = OperatorBuilder::new(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            if v != 0.0 {
                b.add_real(i, i, v);
            }
        }
        b.finalize(label).expect("diagonal is Hermitian")
    }

    /// y = H x.
    pub fn matvec(&self, x: ArrayView1<C64>) -> Array1<C64> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut y = Array1::<C64>::zeros(self.dim);
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: ArrayView1<C64>, y: &mut Array1<C64>) {
        let ys = y.as_slice_mut().expect("contiguous output vector");
        if let Some(xs) = x.as_slice() {
            for (row, yr) in ys.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                    acc += self.values[k] * xs[self.col_idx[k] as usize];
                }
                *yr = acc;
            }
        } else {
            // strided views (matrix columns) take the indexed path
            for (row, yr) in ys.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                    acc += self.values[k] * x[self.col_idx[k] as usize];
                }
                *yr = acc;
            }
        }
    }

    /// ⟨bra|H|ket⟩.
    pub fn matrix_element(&self, bra: ArrayView1<C64>, ket: ArrayView1<C64>) -> C64 {
        let hket = self.matvec(ket);
        bra.iter()
            .zip(hket.iter())
            .map(|(b, h)| b.conj() * h)
            .sum()
    }

    /// ⟨ψ|H|ψ⟩ (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, psi: ArrayView1<C64>) -> f64 {
        self.matrix_element(psi, psi).re
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::<C64>::zeros((self.dim, self.dim));
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.col_idx[k] as usize)] = self.values[k];
            }
        }
        m
    }

    pub fn to_dense_real(&self) -> Option<Array2<f64>> {
        if !self.real {
            return None;
        }
        let mut m = Array2::<f64>::zeros((self.dim, self.dim));
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.col_idx[k] as usize)] = self.values[k].re;
            }
        }
        Some(m)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |H_ij − conj(H_ji)| over stored entries, relative to the largest
    /// entry magnitude. Zero for every matrix produced by [`OperatorBuilder`].
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[k] as usize;
                let mirror = self.get(col, row);
                worst = worst.max((self.values[k] - mirror.conj()).norm());
            }
        }
        worst / scale
    }

    fn get(&self, row: usize, col: usize) -> C64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.values[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Iterate stored (row, col, value) triplets in (row, col) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |row| {
            (self.row_ptr[row]..self.row_ptr[row + 1])
                .map(move |k| (row, self.col_idx[k] as usize, self.values[k]))
        })
    }

    /// Write the coordinate-list text form: one `row,col,re,im` line per
    /// stored entry, 0-based indices, sorted by (row, col).
    pub fn write_coordinate_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                writeln!(
                    w,
                    "{},{},{},{}",
                    row, self.col_idx[k], self.values[k].re, self.values[k].im
                )?;
            }
        }
        Ok(())
    }

    /// H + cH' as a new matrix (used for static drive offsets, not in the
    /// propagation hot path).
    pub fn add_scaled(&self, other: &OperatorMatrix, c: f64, label: &str) -> Result<OperatorMatrix> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument(format!(
                "operator dimensions differ: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut b = OperatorBuilder::new(self.dim);
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                b.add(row, self.col_idx[k] as usize, self.values[k]);
            }
            for k in other.row_ptr[row]..other.row_ptr[row + 1] {
                b.add(row, other.col_idx[k] as usize, other.values[k] * c);
            }
        }
        b.finalize(label)
    }
}

/// Accumulating builder; duplicate (i, j) insertions are summed.
pub struct OperatorBuilder {
    dim: usize,
    entries: HashMap<(u32, u32), C64>,
}

impl OperatorBuilder {
    pub fn new(dim: usize) -> OperatorBuilder {
        assert!(dim < u32::MAX as usize, "dimension too large for u32 indices");
        OperatorBuilder {
            dim,
            entries: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.dim && j < self.dim);
        if v != C64::new(0.0, 0.0) {
            *self
                .entries
                .entry((i as u32, j as u32))
                .or_insert(C64::new(0.0, 0.0)) += v;
        }
    }

    pub fn add_real(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, C64::new(v, 0.0));
    }

    /// Add v at (i, j) and conj(v) at (j, i); for i == j the imaginary part
    /// must vanish.
    pub fn add_hermitian(&mut self, i: usize, j: usize, v: C64) {
        if i == j {
            debug_assert!(v.im.abs() <= 1e-15 * v.re.abs().max(1.0));
            self.add(i, j, C64::new(v.re, 0.0));
        } else {
            self.add(i, j, v);
            self.add(j, i, v.conj());
        }
    }

    pub fn finalize(self, label: &str) -> Result<OperatorMatrix> {
        let mut items: Vec<((u32, u32), C64)> = self
            .entries
            .into_iter()
            .filter(|(_, v)| v.norm_sqr() > 0.0)
            .collect();
        items.sort_unstable_by_key(|&(k, _)| k);

        let nnz = items.len();
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for &((i, j), v) in &items {
            row_ptr[i as usize + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for r in 0..self.dim {
            row_ptr[r + 1] += row_ptr[r];
        }

        let real = values.iter().all(|v| v.im == 0.0);
        let m = OperatorMatrix {
            dim: self.dim,
            label: label.to_string(),
            row_ptr,
            col_idx,
            values,
            real,
        };
        let defect = m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::NonHermitian {
                label: label.to_string(),
                defect,
            });
        }
        Ok(m)
    }
}

/// A fixed linear combination Σ cᵢ Hᵢ applied term by term, used by the
/// propagator for time-dependent Hamiltonians without re-assembling matrices.
pub struct OperatorSum<'a> {
    terms: Vec<(f64, &'a OperatorMatrix)>,
    dim: usize,
}

impl<'a> OperatorSum<'a> {
    pub fn new(terms: Vec<(f64, &'a OperatorMatrix)>) -> OperatorSum<'a> {
        assert!(!terms.is_empty());
        let dim = terms[0].1.dim();
        assert!(terms.iter().all(|(_, t)| t.dim() == dim));
        OperatorSum { terms, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matvec(&self, x: ArrayView1<C64>) -> Array1<C64> {
        let mut y = Array1::<C64>::zeros(self.dim);
        let mut tmp = Array1::<C64>::zeros(self.dim);
        for &(c, op) in &self.terms {
            op.matvec_into(x, &mut tmp);
            y.iter_mut().zip(tmp.iter()).for_each(|(yi, ti)| {
                *yi += C64::new(c, 0.0) * ti;
            });
        }
        y
    }

    pub fn expectation(&self, psi: ArrayView1<C64>) -> f64 {
        let hpsi = self.matvec(psi);
        psi.iter()
            .zip(hpsi.iter())
            .map(|(p, h)| (p.conj() * h).re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_accumulates_and_sorts() {
        let mut b = OperatorBuilder::new(3);
        b.add_real(0, 1, 0.5);
        b.add_real(0, 1, 0.5);
        b.add_real(1, 0, 1.0);
        b.add_real(2, 2, 2.0);
        let m = b.finalize("t").unwrap();
        assert_eq!(m.nnz(), 3);
        assert!(m.is_real());
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(d[(2, 2)], C64::new(2.0, 0.0));
    }

    #[test]
    fn non_hermitian_assembly_is_rejected() {
        let mut b = OperatorBuilder::new(2);
        b.add_real(0, 1, 1.0);
        // missing the (1, 0) mirror
        match b.finalize("bad") {
            Err(Error::NonHermitian { .. }) => {}
            other => panic!("expected NonHermitian, got {other:?}"),
        }
    }

    #[test]
    fn complex_hermitian_matvec() {
        let mut b = OperatorBuilder::new(2);
        b.add_hermitian(0, 1, C64::new(0.0, -1.0));
        b.add_real(0, 0, 2.0);
        b.add_real(1, 1, 2.0);
        let m = b.finalize("pauli-ish").unwrap();
        assert!(!m.is_real());
        assert_eq!(m.hermiticity_defect(), 0.0);
        let x = Array1::from(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let y = m.matvec(x.view());
        assert_eq!(y[0], C64::new(2.0, 0.0));
        assert_eq!(y[1], C64::new(0.0, 1.0));
    }

    #[test]
    fn trace_equals_diagonal_sum() {
        let m = OperatorMatrix::from_diagonal(&[1.0, 2.0, 3.5], "d");
        assert!((m.trace() - 6.5).abs() < 1e-15);
    }

    #[test]
    fn coordinate_list_roundtrip_text() {
        let mut b = OperatorBuilder::new(2);
        b.add_hermitian(0, 1, C64::new(0.25, 0.5));
        let m = b.finalize("x").unwrap();
        let mut buf = Vec::new();
        m.write_coordinate_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().starts_with("0,1,0.25,0.5"));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {pos} is {}", data[pos])));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access to the raw buffer. Callers must keep entries finite.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// `out += self * v`, no shape checks beyond debug assertions.
    pub(crate) fn matvec_acc(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o += dot(row, v);
        }
    }

    /// `out += self^T * v`.
    pub(crate) fn matvec_t_acc(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&scale, row) in v.iter().zip(self.data.chunks_exact(self.cols.max(1))) {
            if scale != 0.0 {
                axpy(scale, row, out);
            }
        }
    }

    /// `self += a * b^T`.
    pub(crate) fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (&scale, row) in a.iter().zip(self.data.chunks_exact_mut(self.cols.max(1))) {
            if scale != 0.0 {
                axpy(scale, b, row);
            }
        }
    }
}

/// Matrix-vector product.
pub fn matvec(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if m.cols != v.len() {
        return Err(Error::Shape(format!(
            "matvec: {}x{} matrix with vector of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let mut out = vec![0.0; m.rows];
    m.matvec_acc(v, &mut out);
    Ok(out)
}

/// Elementwise product.
pub fn hadamard(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("hadamard: lengths {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_matvec() {
        assert_eq!(matvec(&Matrix::identity(2), &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn hand_matvec() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(matvec(&m, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn zero_matrix_annihilates() {
        assert_eq!(matvec(&Matrix::zeros(3, 2), &[5.0, -1.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn matvec_shape_error() {
        assert!(matches!(matvec(&Matrix::zeros(2, 3), &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn hadamard_cases() {
        assert_eq!(hadamard(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert_eq!(hadamard(&[1.5, -2.0], &[1.0, 1.0]).unwrap(), vec![1.5, -2.0]);
        assert_eq!(hadamard(&[1.5, -2.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(hadamard(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn constructor_rejects_non_finite() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn transpose_and_outer_kernels() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let mut out = vec![0.0; 3];
        m.matvec_t_acc(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
        let mut z = Matrix::zeros(2, 3);
        z.add_outer(&[1.0, 2.0], &[1.0, 0.0, -1.0]);
        assert_eq!(z.as_slice(), &[1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, n)
    }

    proptest! {
        #[test]
        fn identity_preserves(v in vec_strategy(7)) {
            prop_assert_eq!(matvec(&Matrix::identity(7), &v).unwrap(), v);
        }

        #[test]
        fn matvec_distributes(m in vec_strategy(15), a in vec_strategy(5), b in vec_strategy(5)) {
            let m = Matrix::from_vec(3, 5, m).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = matvec(&m, &sum).unwrap();
            let ra = matvec(&m, &a).unwrap();
            let rb = matvec(&m, &b).unwrap();
            for i in 0..3 {
                let rhs = ra[i] + rb[i];
                let scale: f64 = m.row(i).iter().zip(a.iter().zip(&b)).map(|(w, (x, y))| w.abs() * (x.abs() + y.abs())).sum();
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + scale));
            }
        }

        #[test]
        fn hadamard_commutes_and_associates(a in vec_strategy(6), b in vec_strategy(6), c in vec_strategy(6)) {
            prop_assert_eq!(hadamard(&a, &b).unwrap(), hadamard(&b, &a).unwrap());
            let l = hadamard(&hadamard(&a, &b).unwrap(), &c).unwrap();
            let r = hadamard(&a, &hadamard(&b, &c).unwrap()).unwrap();
            for (x, y) in l.iter().zip(&r) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}

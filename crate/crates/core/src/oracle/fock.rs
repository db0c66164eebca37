//! Truncated-oscillator building blocks. Complex matrices are carried as a
//! (re, im) pair so every product is a real GEMM.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CMat {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl CMat {
    pub fn zeros(r: usize, c: usize) -> Self {
        Self { re: DMatrix::zeros(r, c), im: DMatrix::zeros(r, c) }
    }

    /// Frobenius inner product ⟨self, other⟩ = Σ conj(self) · other.
    pub fn inner(&self, other: &CMat) -> Complex64 {
        Complex64::new(
            self.re.dot(&other.re) + self.im.dot(&other.im),
            self.re.dot(&other.im) - self.im.dot(&other.re),
        )
    }

    /// Squared norm of the last `rows` rows.
    pub fn tail_norm_sq(&self, rows: usize) -> f64 {
        let n = self.re.nrows();
        let start = n.saturating_sub(rows);
        let r = self.re.rows(start, n - start);
        let i = self.im.rows(start, n - start);
        r.norm_squared() + i.norm_squared()
    }

    #[cfg(test)]
    pub fn norm_sq(&self) -> f64 {
        self.re.norm_squared() + self.im.norm_squared()
    }

    pub fn left_mul_real(&mut self, m: &DMatrix<f64>) {
        self.re = m * &self.re;
        self.im = m * &self.im;
    }
}

/// Eigendecomposition of a block Hamiltonian, H = V diag(λ) V†.
#[derive(Debug, Clone)]
pub(crate) enum Eigen {
    Real { v: DMatrix<f64>, lambda: DVector<f64> },
    Complex { vr: DMatrix<f64>, vi: DMatrix<f64>, lambda: DVector<f64> },
}

/// H = −δ a†a + c (a + a†) + i e (a† − a) on n levels.
pub(crate) fn block_eigen(n: usize, delta: f64, c: f64, e: f64) -> Eigen {
    if e == 0.0 {
        let mut h = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = -delta * k as f64;
            if k + 1 < n {
                let s = ((k + 1) as f64).sqrt();
                h[(k + 1, k)] = c * s;
                h[(k, k + 1)] = c * s;
            }
        }
        let eig = SymmetricEigen::new(h);
        Eigen::Real { v: eig.eigenvectors, lambda: eig.eigenvalues }
    } else {
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = Complex64::new(-delta * k as f64, 0.0);
            if k + 1 < n {
                let s = ((k + 1) as f64).sqrt();
                h[(k + 1, k)] = Complex64::new(c * s, e * s);
                h[(k, k + 1)] = Complex64::new(c * s, -e * s);
            }
        }
        let eig = SymmetricEigen::new(h);
        let v = eig.eigenvectors;
        Eigen::Complex { vr: v.map(|z| z.re), vi: v.map(|z| z.im), lambda: eig.eigenvalues }
    }
}

impl Eigen {
    /// X ← e^{−iHt} X
    pub fn propagate(&self, x: &mut CMat, t: f64) {
        match self {
            Eigen::Real { v, lambda } => {
                let mut yr = v.tr_mul(&x.re);
                let mut yi = v.tr_mul(&x.im);
                rotate_rows(&mut yr, &mut yi, lambda, t);
                x.re = v * yr;
                x.im = v * yi;
            }
            Eigen::Complex { vr, vi, lambda } => {
                let mut yr = vr.tr_mul(&x.re) + vi.tr_mul(&x.im);
                let mut yi = vr.tr_mul(&x.im) - vi.tr_mul(&x.re);
                rotate_rows(&mut yr, &mut yi, lambda, t);
                x.re = vr * &yr - vi * &yi;
                x.im = vr * yi + vi * yr;
            }
        }
    }
}

/// Multiplies row k by e^{−iλ_k t}.
fn rotate_rows(yr: &mut DMatrix<f64>, yi: &mut DMatrix<f64>, lambda: &DVector<f64>, t: f64) {
    for (k, &l) in lambda.iter().enumerate() {
        let (s, c) = (l * t).sin_cos();
        for j in 0..yr.ncols() {
            let (a, b) = (yr[(k, j)], yi[(k, j)]);
            yr[(k, j)] = a * c + b * s;
            yi[(k, j)] = b * c - a * s;
        }
    }
}

/// e^{β(a† − a)} on n levels.
pub(crate) fn displacement_operator(n: usize, beta: f64) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::zeros(n, n);
    for j in 0..n.saturating_sub(1) {
        let s = ((j + 1) as f64).sqrt();
        k[(j + 1, j)] = beta * s;
        k[(j, j + 1)] = -beta * s;
    }
    k.exp()
}

/// y = H x for the tridiagonal block Hamiltonian, x and y complex matrices,
/// acting from the left.
pub(crate) fn tridiag_left(delta: f64, c: f64, e: f64, x: &CMat, y: &mut CMat) {
    let n = x.re.nrows();
    for j in 0..x.re.ncols() {
        for k in 0..n {
            let mut r = -delta * k as f64 * x.re[(k, j)];
            let mut i = -delta * k as f64 * x.im[(k, j)];
            if k > 0 {
                // H[k, k−1] = (c + ie)√k
                let s = (k as f64).sqrt();
                let (a, b) = (x.re[(k - 1, j)], x.im[(k - 1, j)]);
                r += s * (c * a - e * b);
                i += s * (c * b + e * a);
            }
            if k + 1 < n {
                // H[k, k+1] = (c − ie)√(k+1)
                let s = ((k + 1) as f64).sqrt();
                let (a, b) = (x.re[(k + 1, j)], x.im[(k + 1, j)]);
                r += s * (c * a + e * b);
                i += s * (c * b - e * a);
            }
            y.re[(k, j)] = r;
            y.im[(k, j)] = i;
        }
    }
}

/// y = x H for the same Hamiltonian acting from the right.
pub(crate) fn tridiag_right(delta: f64, c: f64, e: f64, x: &CMat, y: &mut CMat) {
    let n = x.re.ncols();
    for k in 0..n {
        for r_ in 0..x.re.nrows() {
            let mut r = -delta * k as f64 * x.re[(r_, k)];
            let mut i = -delta * k as f64 * x.im[(r_, k)];
            if k > 0 {
                // (xH)[r, k] gets x[r, k−1] H[k−1, k], H[k−1, k] = (c − ie)√k
                let s = (k as f64).sqrt();
                let (a, b) = (x.re[(r_, k - 1)], x.im[(r_, k - 1)]);
                r += s * (c * a + e * b);
                i += s * (c * b - e * a);
            }
            if k + 1 < n {
                // H[k+1, k] = (c + ie)√(k+1)
                let s = ((k + 1) as f64).sqrt();
                let (a, b) = (x.re[(r_, k + 1)], x.im[(r_, k + 1)]);
                r += s * (c * a - e * b);
                i += s * (c * b + e * a);
            }
            y.re[(r_, k)] = r;
            y.im[(r_, k)] = i;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_h(n: usize, delta: f64, c: f64, e: f64) -> DMatrix<Complex64> {
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = Complex64::new(-delta * k as f64, 0.0);
            if k + 1 < n {
                let s = ((k + 1) as f64).sqrt();
                h[(k + 1, k)] = Complex64::new(c * s, e * s);
                h[(k, k + 1)] = Complex64::new(c * s, -e * s);
            }
        }
        h
    }

    fn to_c(x: &CMat) -> DMatrix<Complex64> {
        x.re.zip_map(&x.im, Complex64::new)
    }

    fn sample(n: usize, m: usize) -> CMat {
        CMat {
            re: DMatrix::from_fn(n, m, |i, j| ((i * 7 + j * 3) as f64 * 0.37).sin()),
            im: DMatrix::from_fn(n, m, |i, j| ((i * 5 + j * 11) as f64 * 0.23).cos()),
        }
    }

    #[test]
    fn tridiagonal_products_match_dense() {
        let (n, delta, c, e) = (7, 0.3, 1.1, -0.4);
        let h = dense_h(n, delta, c, e);
        let x = sample(n, n);
        let mut y = CMat::zeros(n, n);
        tridiag_left(delta, c, e, &x, &mut y);
        assert!((to_c(&y) - &h * to_c(&x)).norm() < 1e-13);
        tridiag_right(delta, c, e, &x, &mut y);
        assert!((to_c(&y) - to_c(&x) * &h).norm() < 1e-13);
    }

    #[test]
    fn propagator_is_unitary_and_matches_expm() {
        let n = 12;
        for &(c, e) in &[(0.7, 0.0), (0.7, 0.3)] {
            let eig = block_eigen(n, 0.2, c, e);
            let mut x = sample(n, 3);
            let before = x.norm_sq();
            let reference = (dense_h(n, 0.2, c, e) * Complex64::new(0.0, -0.9)).exp() * to_c(&x);
            eig.propagate(&mut x, 0.9);
            assert!((x.norm_sq() - before).abs() < 1e-12 * before);
            assert!((to_c(&x) - reference).norm() < 1e-11);
        }
    }

    #[test]
    fn displacement_moves_vacuum() {
        let n = 40;
        let d = displacement_operator(n, 0.5);
        // coherent state amplitude ⟨1|β⟩ = e^{−β²/2} β
        assert!((d[(1, 0)] - (-0.125f64).exp() * 0.5).abs() < 1e-14);
        assert!((d.transpose() * &d - DMatrix::identity(n, n)).norm() < 1e-12);
    }
}

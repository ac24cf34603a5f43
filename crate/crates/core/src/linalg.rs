//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DVector, Dyn, SymmetricEigen};
use num_complex::Complex;

use crate::scalar::{c, cabs, CMatrix, Real};

/// `A^H A`.
pub fn gram<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.ad_mul(a)
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(cabs(*x)))
}

/// `max |A - A^H|` over all entries.
pub fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..n {
            worst = worst.max(cabs(m[(i, j)] - m[(j, i)].conj()));
        }
    }
    worst
}

/// Averages `A` with `A^H` so the result is exactly Hermitian.
pub fn symmetrize<T: Real>(m: &mut CMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for j in 0..n {
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * half;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(j, j)] = c(m[(j, j)].re);
    }
}

pub fn trace_re<T: Real>(m: &CMatrix<T>) -> T {
    m.diagonal().iter().fold(T::zero(), |acc, x| acc + x.re)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum<T: Real> {
    pub values: DVector<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianSpectrum<T> {
    pub fn new(m: &CMatrix<T>) -> Self {
        let n = m.nrows();
        let eig = SymmetricEigen::<Complex<T>, Dyn>::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMatrix::<T>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn min(&self) -> T {
        if self.values.is_empty() {
            T::zero()
        } else {
            self.values[0]
        }
    }

    pub fn max(&self) -> T {
        self.values.iter().last().copied().unwrap_or_else(T::zero)
    }

    /// Sets negative eigenvalues to zero.
    pub fn clip_negative(&mut self) {
        for v in self.values.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
    }

    /// `U diag(lambda) U^H`, made exactly Hermitian.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        let mut out = scaled * self.vectors.adjoint();
        symmetrize(&mut out);
        out
    }

    /// Factor `L = U diag(sqrt(max(lambda, 0)))` with `L L^H = A`.
    pub fn sqrt_factor(&self) -> CMatrix<T> {
        let mut out = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            out.column_mut(j).scale_mut(v.max(T::zero()).sqrt());
        }
        out
    }

    /// `lambda_max / lambda_min`, infinite when the matrix is singular.
    pub fn condition_number(&self) -> T {
        let lo = self.min();
        if lo <= T::zero() {
            T::lit(f64::INFINITY)
        } else {
            self.max() / lo
        }
    }
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hpd_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Option<CMatrix<T>> {
    let chol = Cholesky::new(a.clone())?;
    Some(chol.solve(b))
}

/// `A + s I` for square `A`.
pub fn add_ridge<T: Real>(a: &CMatrix<T>, s: T) -> CMatrix<T> {
    let mut out = a.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += c(s);
    }
    out
}

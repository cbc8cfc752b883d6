//! Minimal dense complex linear algebra.
//!
//! The matrices here are small (array sizes, a few hundred at most) and the
//! formulas matter more than raw speed, so this is a plain row-major
//! `Vec<Complex64>` with exactly the operations the optimizer needs.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![C64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(nrows: usize, ncols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                data.push(f(r, c));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product `a bᵀ` (no conjugation; conjugate the inputs as needed).
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c])
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.ncols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    /// `self · x`.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<C64>()
            })
            .collect()
    }

    /// `selfᴴ · x`.
    pub fn conj_t_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows, "conj_t_matvec dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.ncols];
        for r in 0..self.nrows {
            let xr = x[r];
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.get(r, c).conj() * xr;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    /// `(self + selfᴴ) / 2`; forces an exactly Hermitian matrix.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.nrows, self.ncols);
        Self::from_fn(self.nrows, self.ncols, |r, c| {
            0.5 * (self.get(r, c) + self.get(c, r).conj())
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max |self − otherᴴ| entry; zero iff `self` is the adjoint of `other`.
    pub fn adjoint_deviation(&self, other: &Self) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.ncols, other.nrows));
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                worst = worst.max((self.get(r, c) - other.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// Unconjugated dot product `Σ aᵢ bᵢ`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `Σ conj(aᵢ) bᵢ` (`aᴴ b`).
pub fn hdot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Real quadratic form `Re(xᴴ M x)` of a Hermitian `M`.
pub fn quad_form(m: &CMat, x: &[C64]) -> f64 {
    hdot(x, &m.matvec(x)).re
}

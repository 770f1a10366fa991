//! Small dense complex matrices (n ≲ 10) for the Gramian systems.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn diag_product_abs(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)].norm()).product()
    }

    /// Determinant of the matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Complex64 {
        let n = self.n;
        let sub = CMatrix::from_fn(n - 1, |i, j| {
            let ii = if i < r { i } else { i + 1 };
            let jj = if j < c { j } else { j + 1 };
            self[(ii, jj)]
        });
        sub.det_expansion()
    }

    /// Determinant by cofactor expansion; only for tiny matrices.
    pub fn det_expansion(&self) -> Complex64 {
        match self.n {
            0 => Complex64::new(1.0, 0.0),
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            n => (0..n)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    self[(0, j)] * self.minor(0, j) * sign
                })
                .sum(),
        }
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self.clone())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    fn factor(mut a: CMatrix) -> Self {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        Self {
            lu: a,
            perm,
            sign,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.n;
        (0..n).map(|i| self.lu[(i, i)]).product::<Complex64>() * self.sign
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let yj = y[j];
                y[i] -= l * yj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let yj = y[j];
                y[i] -= u * yj;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.lu.n;
        let mut inv = CMatrix::zeros(n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

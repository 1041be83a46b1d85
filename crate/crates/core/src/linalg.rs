//! Banded matrices and an LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), 0, 0);
        m.data.copy_from_slice(d);
        m
    }

    /// Builds from `(start, weights)` rows; every row must fit in the band.
    pub fn from_rows(n: usize, kl: usize, ku: usize, rows: &[(usize, Vec<f64>)]) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::InvalidInput(format!("{} rows for an {n}x{n} matrix", rows.len())));
        }
        let mut m = Self::zeros(n, kl, ku);
        for (i, (start, w)) in rows.iter().enumerate() {
            m.set_row(i, *start, w)?;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bands(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku && j < self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    /// Column range `[lo, hi]` of row `i` inside the band.
    pub fn row_span(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.kl), (i + self.ku).min(self.n - 1))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::InvalidInput(format!("entry ({i},{j}) outside the band")));
        }
        let k = self.idx(i, j);
        self.data[k] = v;
        Ok(())
    }

    /// Replaces row `i` by `weights` placed from column `start`.
    pub fn set_row(&mut self, i: usize, start: usize, weights: &[f64]) -> Result<()> {
        self.clear_row(i);
        for (k, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                self.set(i, start + k, w)?;
            }
        }
        Ok(())
    }

    pub fn clear_row(&mut self, i: usize) {
        let w = self.width();
        self.data[i * w..(i + 1) * w].fill(0.0);
    }

    /// Row `i` as `(start, weights)` over its band span.
    pub fn row(&self, i: usize) -> (usize, Vec<f64>) {
        let (lo, hi) = self.row_span(i);
        (lo, (lo..=hi).map(|j| self.get(i, j)).collect())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = self.row_span(i);
            let base = self.idx(i, lo);
            *yi = self.data[base..=base + (hi - lo)]
                .iter()
                .zip(&x[lo..=hi])
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    /// self · other, with bandwidths adding.
    pub fn mul(&self, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.kl + other.kl, self.ku + other.ku);
        for i in 0..self.n {
            let (lo, hi) = self.row_span(i);
            for k in lo..=hi {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let (lo2, hi2) = other.row_span(k);
                for j in lo2..=hi2 {
                    let p = out.idx(i, j);
                    out.data[p] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// a·self + b·other.
    pub fn lincomb(&self, a: f64, other: &BandedMatrix, b: f64) -> BandedMatrix {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.kl.max(other.kl), self.ku.max(other.ku));
        for i in 0..self.n {
            for (m, c) in [(self, a), (other, b)] {
                let (lo, hi) = m.row_span(i);
                for j in lo..=hi {
                    let p = out.idx(i, j);
                    out.data[p] += c * m.get(i, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> BandedMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= c);
        m
    }

    /// Multiplies row i by d[i].
    pub fn scale_rows(&self, d: &[f64]) -> BandedMatrix {
        let mut m = self.clone();
        let w = m.width();
        for (i, &di) in d.iter().enumerate() {
            m.data[i * w..(i + 1) * w].iter_mut().for_each(|v| *v *= di);
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// LU with partial pivoting; the upper factor's bandwidth grows to kl + ku.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    u: Vec<f64>,
    lower: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &BandedMatrix) -> Result<BandedLu> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let w = 2 * kl + ku + 1;
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let mut u = vec![0.0; n * w];
        let mut scale = 0.0f64;
        for i in 0..n {
            let (lo, hi) = a.row_span(i);
            for j in lo..=hi {
                let v = a.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite("banded matrix entry"));
                }
                scale = scale.max(v.abs());
                u[at(i, j)] = v;
            }
        }
        let tiny = scale * f64::EPSILON * 1e-3;
        let mut lower = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&x, &y| u[at(x, k)].abs().total_cmp(&u[at(y, k)].abs()))
                .unwrap_or(k);
            let pv = u[at(p, k)];
            if pv.abs() <= tiny || !pv.is_finite() {
                return Err(Error::Singular { pivot: k });
            }
            piv[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    u.swap(at(k, j), at(p, j));
                }
            }
            for r in k + 1..=last {
                let m = u[at(r, k)] / pv;
                lower[k * kl + (r - k - 1)] = m;
                u[at(r, k)] = 0.0;
                if m != 0.0 {
                    for j in k + 1..=right {
                        u[at(r, j)] -= m * u[at(k, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            u,
            lower,
            piv,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        assert_eq!(b.len(), n);
        let w = 2 * kl + ku + 1;
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.lower[k * kl + (r - k - 1)] * bk;
            }
        }
        for i in (0..n).rev() {
            let right = (i + kl + ku).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=right {
                acc -= self.u[at(i, j)] * b[j];
            }
            b[i] = acc / self.u[at(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

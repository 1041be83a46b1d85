use serde::Serialize;

use crate::error::Result;
use crate::exponents::RealPolynomial;
use crate::linalg::BandedMatrix;
use crate::loggrid::{d1_rows, LogGrid};

/// P(D_h) as a banded matrix plus the mass weight e^s.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedOperator {
    pub grid: LogGrid,
    pub poly: RealPolynomial,
    pub matrix: BandedMatrix,
    pub mass: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bandwidth {
    pub lower: usize,
    pub upper: usize,
}

impl BandedOperator {
    pub fn bandwidth(&self) -> Bandwidth {
        let (lower, upper) = self.matrix.bands();
        Bandwidth { lower, upper }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.matvec(u)
    }
}

/// The D_h matrix on `grid`.
pub fn derivative_matrix(grid: &LogGrid) -> Result<BandedMatrix> {
    check(grid)?;
    BandedMatrix::from_rows(grid.count, 4, 4, &d1_rows(grid.count, grid.h()))
}

fn check(grid: &LogGrid) -> Result<()> {
    if grid.count < 10 {
        return Err(crate::Error::GridTooSmall {
            count: grid.count,
            needed: 10,
        });
    }
    Ok(())
}

/// ∏(D_h − r) as a matrix.
pub fn roots_matrix(grid: &LogGrid, roots: &[f64]) -> Result<BandedMatrix> {
    let d = derivative_matrix(grid)?;
    let id = BandedMatrix::identity(grid.count);
    let mut m = id.clone();
    for &r in roots {
        m = d.lincomb(1.0, &id, -r).mul(&m);
    }
    Ok(m)
}

/// P(D_h) by Horner, so L·u agrees with `poly_of_d(u, P)` to rounding.
pub fn assemble(p: &RealPolynomial, grid: LogGrid) -> Result<BandedOperator> {
    let d = derivative_matrix(&grid)?;
    let id = BandedMatrix::identity(grid.count);
    let c = p.coeffs();
    let deg = c.len() - 1;
    let mut m = id.scale(c[deg]);
    for k in (0..deg).rev() {
        m = d.mul(&m).lincomb(1.0, &id, c[k]);
    }
    Ok(BandedOperator {
        grid,
        poly: p.clone(),
        matrix: m,
        mass: grid.x_values(),
    })
}

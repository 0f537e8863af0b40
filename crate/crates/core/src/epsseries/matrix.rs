use super::{Coeff, EpsSeries, Series};
use crate::error::{Error, Result};
use crate::fourier::Frequency;
use crate::scalar::Real;

/// Column of two series.
#[derive(Clone, Debug, PartialEq)]
pub struct Vec2<C>(pub [Series<C>; 2]);

/// 2×2 matrix of series, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<C>(pub [[Series<C>; 2]; 2]);

impl<C: Coeff> Vec2<C> {
    pub fn new(a: Series<C>, b: Series<C>) -> Self {
        Self([a, b])
    }

    pub fn zeros(order: usize) -> Self {
        Self([Series::zeros(order), Series::zeros(order)])
    }

    pub fn add(&self, o: &Self) -> Self {
        Self([self.0[0].add(&o.0[0]), self.0[1].add(&o.0[1])])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self([self.0[0].sub(&o.0[0]), self.0[1].sub(&o.0[1])])
    }

    pub fn window(&self, a: isize, b: usize) -> Result<Self> {
        Ok(Self([self.0[0].window(a, b)?, self.0[1].window(a, b)?]))
    }

    pub fn lead(&self) -> Option<usize> {
        match (self.0[0].lead(), self.0[1].lead()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

impl<C: Coeff> Mat2<C> {
    pub fn new(a: Series<C>, b: Series<C>, c: Series<C>, d: Series<C>) -> Self {
        Self([[a, b], [c, d]])
    }

    pub fn entry(&self, i: usize, j: usize) -> &Series<C> {
        &self.0[i][j]
    }

    pub fn order(&self) -> usize {
        self.0
            .iter()
            .flatten()
            .map(Series::order)
            .min()
            .unwrap_or(0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m = |i: usize, j: usize| self.0[i][j].sub(&o.0[i][j]);
        Self([[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]])
    }

    pub fn mul_mat(&self, o: &Self, out_order: usize) -> Self {
        let e = |i: usize, j: usize| {
            self.0[i][0]
                .mul(&o.0[0][j], out_order)
                .add(&self.0[i][1].mul(&o.0[1][j], out_order))
        };
        Self([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn mul_vec(&self, v: &Vec2<C>, out_order: usize) -> Vec2<C> {
        let e = |i: usize| {
            self.0[i][0]
                .mul(&v.0[0], out_order)
                .add(&self.0[i][1].mul(&v.0[1], out_order))
        };
        Vec2([e(0), e(1)])
    }

    /// Leading (ε⁰) block as a constant real matrix.
    pub fn leading_constant(&self) -> Result<[[Real; 2]; 2]> {
        let c = |i: usize, j: usize| {
            self.0[i][j]
                .coeff(0)
                .as_real()
                .ok_or(Error::NonConstantLeading)
        };
        Ok([[c(0, 0)?, c(0, 1)?], [c(1, 0)?, c(1, 1)?]])
    }

    /// Series inverse: invert the constant leading block, then
    /// `X_n = −A_0^{-1} Σ_{j=1}^{n} A_j X_{n−j}`.
    pub fn invert(&self, out_order: usize) -> Result<Self> {
        let a0 = self.leading_constant()?;
        let inv0 = invert_real(a0)?;
        let order = self.order();
        // Coefficient matrices X_n as [[C; 2]; 2].
        let mut xs: Vec<[[C; 2]; 2]> = Vec::with_capacity(out_order + 1);
        xs.push([
            [C::from_real(inv0[0][0]), C::from_real(inv0[0][1])],
            [C::from_real(inv0[1][0]), C::from_real(inv0[1][1])],
        ]);
        for n in 1..=out_order {
            let mut acc: [[C; 2]; 2] = [[C::zero(), C::zero()], [C::zero(), C::zero()]];
            for j in 1..=n.min(order) {
                let x = &xs[n - j];
                for (i, row) in acc.iter_mut().enumerate() {
                    for (k, slot) in row.iter_mut().enumerate() {
                        for l in 0..2 {
                            let a = self.0[i][l].coeff(j);
                            let b = &x[l][k];
                            if a.is_zero() || b.is_zero() {
                                continue;
                            }
                            *slot = slot.add(&a.mul(b));
                        }
                    }
                }
            }
            let e = |i: usize, k: usize| {
                acc[0][k]
                    .scale(-inv0[i][0])
                    .add(&acc[1][k].scale(-inv0[i][1]))
            };
            xs.push([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]);
        }
        let col = |i: usize, j: usize| Series::from_coeffs(xs.iter().map(|x| x[i][j].clone()).collect());
        Ok(Self([[col(0, 0), col(0, 1)], [col(1, 0), col(1, 1)]]))
    }
}

impl Mat2<crate::fourier::TrigPoly> {
    pub fn rotate(&self, freq: &Frequency, s: i64) -> Self {
        let r = |i: usize, j: usize| self.0[i][j].rotate(freq, s);
        Self([[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]])
    }
}

impl Vec2<crate::fourier::TrigPoly> {
    pub fn rotate(&self, freq: &Frequency, s: i64) -> Self {
        Self([self.0[0].rotate(freq, s), self.0[1].rotate(freq, s)])
    }

    pub fn first(&self) -> &EpsSeries {
        &self.0[0]
    }

    pub fn second(&self) -> &EpsSeries {
        &self.0[1]
    }
}

/// Inverse of a real 2×2 matrix; errors when the determinant vanishes.
pub fn invert_real(a: [[Real; 2]; 2]) -> Result<[[Real; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().map(|x| x.abs()).fold(0.0, Real::max);
    if det == 0.0 || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::SingularLeading { det });
    }
    Ok([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Condition number in the max-row-sum norm.
pub fn condition_real(a: [[Real; 2]; 2]) -> Real {
    let norm = |m: [[Real; 2]; 2]| {
        m.iter()
            .map(|r| r[0].abs() + r[1].abs())
            .fold(0.0, Real::max)
    };
    match invert_real(a) {
        Ok(inv) => norm(a) * norm(inv),
        Err(_) => Real::INFINITY,
    }
}

//! Truncated power series in ε.
//!
//! A [`Series`] of order `N` holds exactly `N + 1` coefficients; anything
//! beyond the order does not exist. Coefficients are either trigonometric
//! polynomials ([`EpsSeries`]) or scalars ([`ScalarSeries`]).

mod compose;
mod matrix;

pub use compose::{compose_perturbation, PerturbationComposer};
pub use matrix::{condition_real, invert_real, Mat2, Vec2};

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::fourier::{Frequency, TrigPoly};
use crate::scalar::Real;

/// Coefficient ring of a [`Series`].
pub trait Coeff: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn from_real(c: Real) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, s: Real) -> Self;
    /// The value if the coefficient is a constant function.
    fn as_real(&self) -> Option<Real>;
    /// Size used for relative comparisons (ℓ¹ majorant for polynomials).
    fn magnitude(&self) -> Real;
}

impl Coeff for Real {
    fn zero() -> Self {
        0.0
    }
    fn from_real(c: Real) -> Self {
        c
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, s: Real) -> Self {
        self * s
    }
    fn as_real(&self) -> Option<Real> {
        Some(*self)
    }
    fn magnitude(&self) -> Real {
        self.abs()
    }
}

impl Coeff for TrigPoly {
    fn zero() -> Self {
        TrigPoly::zero()
    }
    fn from_real(c: Real) -> Self {
        TrigPoly::constant(c)
    }
    fn is_zero(&self) -> bool {
        TrigPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_poly(other)
    }
    fn scale(&self, s: Real) -> Self {
        TrigPoly::scale(self, s)
    }
    fn as_real(&self) -> Option<Real> {
        self.as_constant()
    }
    fn magnitude(&self) -> Real {
        self.norm_rho(0.0)
    }
}

/// `Σ_{n=0}^{order} c_n ε^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    coeffs: Vec<C>,
}

pub type EpsSeries = Series<TrigPoly>;
pub type ScalarSeries = Series<Real>;

impl<C: Coeff> Series<C> {
    pub fn zeros(order: usize) -> Self {
        Self {
            coeffs: vec![C::zero(); order + 1],
        }
    }

    /// Takes ownership of `c_0..=c_N`. An empty vector is the order-0 zero.
    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(C::zero());
        }
        Self { coeffs }
    }

    /// `c ε^n` truncated at `order` (zero if `n > order`).
    pub fn monomial(n: usize, c: C, order: usize) -> Self {
        let mut s = Self::zeros(order);
        if n <= order {
            s.coeffs[n] = c;
        }
        s
    }

    pub fn constant(c: C, order: usize) -> Self {
        Self::monomial(0, c, order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    /// Coefficient `n`, or zero for `n` past the order.
    pub fn coeff_or_zero(&self, n: usize) -> C {
        self.coeffs.get(n).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Smallest `n` with a nonzero coefficient; `None` for the zero series.
    pub fn lead(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.lead().is_none()
    }

    /// Checks that the series is `O(ε^m)` structurally.
    pub fn expect_lead_at_least(&self, m: usize, what: &'static str) -> Result<()> {
        match self.lead() {
            Some(l) if l < m => Err(Error::invariant(
                what,
                format!("lead {l} < required {m}"),
            )),
            _ => Ok(()),
        }
    }

    /// Truncates or zero-pads to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let coeffs = (0..=order).map(|n| self.coeff_or_zero(n)).collect();
        Self { coeffs }
    }

    pub fn map(&self, f: impl FnMut(&C) -> C) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        let order = self.order().min(other.order());
        Self {
            coeffs: (0..=order)
                .map(|n| f(&self.coeffs[n], &other.coeffs[n]))
                .collect(),
        }
    }

    /// Sum truncated at the smaller of the two orders.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, C::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, C::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.scale(-1.0))
    }

    pub fn scale(&self, s: Real) -> Self {
        self.map(|c| c.scale(s))
    }

    /// Cauchy product `c_n = Σ_{j=0}^{n} x_j y_{n−j}` for `n ≤ out_order`.
    /// Terms with a zero factor are skipped; the summation order is fixed
    /// (`j` ascending).
    pub fn mul(&self, other: &Self, out_order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(out_order + 1);
        for n in 0..=out_order {
            let mut acc = C::zero();
            let lo = n.saturating_sub(other.order());
            let hi = n.min(self.order());
            for j in lo..=hi {
                let (a, b) = (&self.coeffs[j], &other.coeffs[n - j]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            coeffs.push(acc);
        }
        Self { coeffs }
    }

    /// Multiplication by `ε^m`, keeping the order.
    pub fn shift_up(&self, m: usize) -> Self {
        let order = self.order();
        let coeffs = (0..=order)
            .map(|n| {
                if n >= m {
                    self.coeffs[n - m].clone()
                } else {
                    C::zero()
                }
            })
            .collect();
        Self { coeffs }
    }

    /// `[x]^{(a,b]}`: keeps coefficients `a < n ≤ b`, zeroes the rest. `a = -1`
    /// keeps everything up to `b`.
    pub fn window(&self, a: isize, b: usize) -> Result<Self> {
        if a < -1 || (a >= 0 && a as usize > b) || b > self.order() {
            return Err(Error::WindowRange {
                a,
                b,
                order: self.order(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if (n as isize) > a && n <= b {
                    c.clone()
                } else {
                    C::zero()
                }
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// Multiplicative inverse to `out_order` by the Neumann recursion
    /// `r_0 = 1/c_0`, `r_n = −(1/c_0) Σ_{j=1}^{n} c_j r_{n−j}`. The leading
    /// coefficient must be a nonzero constant.
    pub fn recip(&self, out_order: usize) -> Result<Self> {
        let c0 = self.coeffs[0].as_real().ok_or(Error::NonConstantLeading)?;
        if c0 == 0.0 {
            return Err(Error::SingularLeading { det: 0.0 });
        }
        let inv0 = 1.0 / c0;
        let mut r: Vec<C> = Vec::with_capacity(out_order + 1);
        r.push(C::from_real(inv0));
        for n in 1..=out_order {
            let mut acc = C::zero();
            for j in 1..=n.min(self.order()) {
                let c = &self.coeffs[j];
                if c.is_zero() || r[n - j].is_zero() {
                    continue;
                }
                acc = acc.add(&c.mul(&r[n - j]));
            }
            r.push(acc.scale(-inv0));
        }
        Ok(Self { coeffs: r })
    }

    /// Largest coefficient magnitude.
    pub fn max_magnitude(&self) -> Real {
        self.coeffs.iter().map(C::magnitude).fold(0.0, Real::max)
    }
}

impl ScalarSeries {
    /// `λ(ε) = 1 − ε^α` truncated at `order`.
    pub fn conformal_factor(alpha: usize, order: usize) -> Self {
        let mut s = Self::constant(1.0, order);
        if alpha <= order {
            s.coeffs[alpha] -= 1.0;
        }
        s
    }

    /// `Σ c_n ε^n` by Horner.
    pub fn eval(&self, eps: Real) -> Real {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * eps + c)
    }

    /// `Σ |c_n| γ^n`, a bound for `sup_{|ε| ≤ γ}`.
    pub fn ball_norm(&self, gamma: Real) -> Real {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * gamma + c.abs())
    }
}

impl EpsSeries {
    /// Promotes scalar coefficients to constant polynomials.
    pub fn from_scalar(s: &ScalarSeries) -> Self {
        Self {
            coeffs: s.coeffs.iter().map(|&c| TrigPoly::constant(c)).collect(),
        }
    }

    /// Product with a scalar series, `c_n = Σ_j x_j s_{n−j}`.
    pub fn mul_scalar(&self, s: &ScalarSeries, out_order: usize) -> Self {
        self.mul(&Self::from_scalar(s), out_order)
    }

    pub fn rotate(&self, freq: &Frequency, s: i64) -> Self {
        self.map(|c| c.rotate(freq, s))
    }

    pub fn derivative(&self) -> Self {
        self.map(TrigPoly::derivative)
    }

    pub fn mean(&self) -> ScalarSeries {
        Series {
            coeffs: self.coeffs.iter().map(TrigPoly::mean).collect(),
        }
    }

    pub fn mean_free(&self) -> Self {
        self.map(TrigPoly::mean_free)
    }

    /// Adds a scalar series to the θ-average of each coefficient.
    pub fn add_scalar(&self, s: &ScalarSeries) -> Self {
        self.add(&Self::from_scalar(s))
    }

    /// `Σ_n x_n(θ) ε^n`.
    pub fn eval(&self, eps: Real, theta: Real) -> Real {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * eps + c.eval(theta))
    }

    /// Maximal trig degree over all coefficients.
    pub fn max_degree(&self) -> usize {
        self.coeffs.iter().map(TrigPoly::degree).max().unwrap_or(0)
    }

    /// `Σ_n ‖x_n‖_ρ γ^n`: the majorant on the strip of width `ρ` times the
    /// ε-disc of radius `γ`.
    pub fn ball_norm(&self, rho: Real, gamma: Real) -> Real {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * gamma + c.norm_rho(rho))
    }

    /// Majorant of each coefficient at strip width `rho`.
    pub fn norms(&self, rho: Real) -> Vec<Real> {
        self.coeffs.iter().map(|c| c.norm_rho(rho)).collect()
    }
}

/// [`EpsSeries::eval`] as a free function.
pub fn eval_series(x: &EpsSeries, eps: Real, theta: Real) -> Real {
    x.eval(eps, theta)
}

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;

use super::Frequency;
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Default pruning threshold. Only exact zeros and denormal dust fall below
/// it; coefficient magnitudes in Lindstedt series span hundreds of decades.
pub const DEFAULT_DROP_TOL: Real = 1e-300;

const TWO_PI: Real = 2.0 * PI;

/// A real-valued trigonometric polynomial `p(θ) = Σ_k ĉ_k e^{2πikθ}`.
///
/// Only the amplitudes for `k ≥ 0` are stored; the negative half is implied
/// by `ĉ_{-k} = conj(ĉ_k)`, so reality holds by construction. `ĉ_0` is kept
/// with zero imaginary part and the last stored amplitude is nonzero, which
/// makes `degree()` exact.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPoly {
    modes: Vec<Cplx>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn constant(c: Real) -> Self {
        Self::from_modes(vec![Complex::new(c, 0.0)])
    }

    /// Builds from amplitudes `ĉ_0, ĉ_1, …`. The imaginary part of `ĉ_0` is
    /// discarded (it must vanish for a real function).
    pub fn from_modes(modes: Vec<Cplx>) -> Self {
        Self::from_modes_with_tol(modes, DEFAULT_DROP_TOL)
    }

    pub fn from_modes_with_tol(mut modes: Vec<Cplx>, drop_tol: Real) -> Self {
        if let Some(c0) = modes.first_mut() {
            c0.im = 0.0;
        }
        let mut p = Self { modes };
        p.prune(drop_tol);
        p
    }

    /// `Σ_k a_k cos(2πkθ) + b_k sin(2πkθ)` from `(k, a_k, b_k)` triples.
    /// Repeated wavenumbers accumulate; `b_0` is ignored.
    pub fn from_cos_sin(terms: &[(usize, Real, Real)]) -> Self {
        let deg = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut modes = vec![Cplx::new(0.0, 0.0); deg + 1];
        for &(k, a, b) in terms {
            if k == 0 {
                modes[0].re += a;
            } else {
                modes[k] += Cplx::new(0.5 * a, -0.5 * b);
            }
        }
        Self::from_modes(modes)
    }

    pub fn cos_mode(k: usize) -> Self {
        Self::from_cos_sin(&[(k, 1.0, 0.0)])
    }

    pub fn sin_mode(k: usize) -> Self {
        Self::from_cos_sin(&[(k, 0.0, 1.0)])
    }

    /// Cosine/sine amplitudes `(k, a_k, b_k)` for `k = 0..=degree`.
    pub fn to_cos_sin(&self) -> Vec<(usize, Real, Real)> {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 {
                    (0, c.re, 0.0)
                } else {
                    (k, 2.0 * c.re, -2.0 * c.im)
                }
            })
            .collect()
    }

    /// Zeroes amplitudes with `|ĉ_k| ≤ drop_tol` and trims the tail. The
    /// amplitude at `-k` is implied, so pruning is symmetric in `±k`.
    pub fn prune(&mut self, drop_tol: Real) {
        for c in self.modes.iter_mut() {
            if c.norm() <= drop_tol {
                *c = Cplx::new(0.0, 0.0);
            }
        }
        while matches!(self.modes.last(), Some(c) if c.re == 0.0 && c.im == 0.0) {
            self.modes.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// Maximal `|k|` with nonzero amplitude; 0 for constants and for zero.
    pub fn degree(&self) -> usize {
        self.modes.len().saturating_sub(1)
    }

    /// Stored amplitudes `ĉ_0..=ĉ_degree`.
    pub fn modes(&self) -> &[Cplx] {
        &self.modes
    }

    /// Amplitude of `e^{2πikθ}` for any integer `k`.
    pub fn mode(&self, k: i64) -> Cplx {
        let idx = k.unsigned_abs() as usize;
        match self.modes.get(idx) {
            Some(c) if k < 0 => c.conj(),
            Some(c) => *c,
            None => Cplx::new(0.0, 0.0),
        }
    }

    pub fn mean(&self) -> Real {
        self.modes.first().map_or(0.0, |c| c.re)
    }

    pub fn mean_free(&self) -> Self {
        let mut modes = self.modes.clone();
        if let Some(c0) = modes.first_mut() {
            *c0 = Cplx::new(0.0, 0.0);
        }
        Self::from_modes(modes)
    }

    /// `true` when the polynomial is a constant (including zero).
    pub fn as_constant(&self) -> Option<Real> {
        match self.modes.len() {
            0 => Some(0.0),
            1 => Some(self.modes[0].re),
            _ => None,
        }
    }

    pub fn scale(&self, s: Real) -> Self {
        Self::from_modes(self.modes.iter().map(|c| c * s).collect())
    }

    /// Adds a constant to the mean.
    pub fn add_constant(&self, c: Real) -> Self {
        let mut modes = self.modes.clone();
        if modes.is_empty() {
            modes.push(Cplx::new(0.0, 0.0));
        }
        modes[0].re += c;
        Self::from_modes(modes)
    }

    /// Modewise multiplier: `ĉ_k ↦ f(k) ĉ_k` for `k ≥ 0`. `f(0)` must be real
    /// and `f(-k) = conj(f(k))` must hold for the result to stay real; callers
    /// guarantee this.
    pub(crate) fn map_modes(&self, mut f: impl FnMut(usize, Cplx) -> Cplx) -> Self {
        Self::from_modes(
            self.modes
                .iter()
                .enumerate()
                .map(|(k, c)| f(k, *c))
                .collect(),
        )
    }

    /// `p ∘ T_{sω}`, i.e. `θ ↦ p(θ + sω)`.
    pub fn rotate(&self, freq: &Frequency, s: i64) -> Self {
        if s == 0 {
            return self.clone();
        }
        self.map_modes(|k, c| c * freq.unit(k as i64 * s))
    }

    /// `θ ↦ p(θ + shift)` for an arbitrary real shift.
    pub fn shift(&self, shift: Real) -> Self {
        self.map_modes(|k, c| {
            let f = fractional_turns(k as Real * shift);
            c * Cplx::from_polar(1.0, TWO_PI * f)
        })
    }

    /// `dp/dθ`: `ĉ_k ↦ 2πik ĉ_k`.
    pub fn derivative(&self) -> Self {
        self.map_modes(|k, c| c * Cplx::new(0.0, TWO_PI * k as Real))
    }

    /// `p(θ)`, summed as `ĉ_0 + 2 Re Σ_{k>0} ĉ_k e^{2πikθ}`.
    pub fn eval(&self, theta: Real) -> Real {
        let Some(c0) = self.modes.first() else {
            return 0.0;
        };
        let t = fractional_turns(theta);
        let step = Cplx::from_polar(1.0, TWO_PI * t);
        let mut acc = 0.0;
        // Horner in z = e^{2πiθ} over k ≥ 1.
        let mut h = Cplx::new(0.0, 0.0);
        for c in self.modes[1..].iter().rev() {
            h = h * step + c;
        }
        if self.modes.len() > 1 {
            acc += 2.0 * (h * step).re;
        }
        c0.re + acc
    }

    /// Full complex sum over `-deg..=deg`, each exponential formed directly.
    /// The imaginary part is roundoff; used to audit [`TrigPoly::eval`].
    pub fn eval_full(&self, theta: Real) -> Cplx {
        let d = self.degree() as i64;
        (-d..=d)
            .map(|k| {
                let f = fractional_turns(k as Real * theta);
                self.mode(k) * Cplx::from_polar(1.0, TWO_PI * f)
            })
            .sum()
    }

    /// Real part of [`TrigPoly::eval_full`], failing if the imaginary part is
    /// larger than `tol` times the ℓ¹ norm.
    pub fn eval_checked(&self, theta: Real, tol: Real) -> Result<Real> {
        let z = self.eval_full(theta);
        let scale = self.norm_rho(0.0).max(Real::MIN_POSITIVE);
        if z.im.abs() > tol * scale {
            return Err(Error::invariant(
                "reality",
                format!("imaginary part {:e} at θ = {theta}", z.im),
            ));
        }
        Ok(z.re)
    }

    /// Fourier majorant `Σ_k |ĉ_k| e^{2π|k|ρ}`, an upper bound for the sup
    /// norm on the strip `|Im θ| ≤ ρ`.
    pub fn norm_rho(&self, rho: Real) -> Real {
        let mut sum = 0.0;
        for (k, c) in self.modes.iter().enumerate().rev() {
            let w = (TWO_PI * k as Real * rho).exp();
            sum += if k == 0 { c.norm() } else { 2.0 * c.norm() * w };
        }
        sum
    }

    /// Drops all modes with `|k| > max_degree`.
    pub fn truncate_degree(&self, max_degree: usize) -> Self {
        let n = self.modes.len().min(max_degree + 1);
        Self::from_modes(self.modes[..n].to_vec())
    }

    fn combine(&self, other: &Self, sign: Real) -> Self {
        let n = self.modes.len().max(other.modes.len());
        let zero = Cplx::new(0.0, 0.0);
        let modes = (0..n)
            .map(|k| {
                let a = self.modes.get(k).copied().unwrap_or(zero);
                let b = other.modes.get(k).copied().unwrap_or(zero);
                a + b * sign
            })
            .collect();
        Self::from_modes(modes)
    }

    /// Mode convolution. Only `n ≥ 0` outputs are formed; each is a sum over
    /// `j ∈ [-deg p, deg p]` in ascending order.
    pub fn mul_poly(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (dp, dq) = (self.degree() as i64, other.degree() as i64);
        let out_deg = dp + dq;
        let mut modes = Vec::with_capacity(out_deg as usize + 1);
        for n in 0..=out_deg {
            let lo = (-dp).max(n - dq);
            let hi = dp.min(n + dq);
            let mut acc = Cplx::new(0.0, 0.0);
            for j in lo..=hi {
                acc += self.mode(j) * other.mode(n - j);
            }
            modes.push(acc);
        }
        Self::from_modes(modes)
    }
}

/// `x mod 1` mapped to `[-1/2, 1/2]`.
pub(crate) fn fractional_turns(x: Real) -> Real {
    x - x.round()
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.mul_poly(rhs)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        TrigPoly {
            modes: self.modes.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        &self + &rhs
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        &self - &rhs
    }
}

impl Mul for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: TrigPoly) -> TrigPoly {
        &self * &rhs
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        -&self
    }
}

impl AddAssign<&TrigPoly> for TrigPoly {
    fn add_assign(&mut self, rhs: &TrigPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&TrigPoly> for TrigPoly {
    fn sub_assign(&mut self, rhs: &TrigPoly) {
        *self = &*self - rhs;
    }
}

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// `(√5 − 1)/2`, the inverse golden ratio.
pub const GOLDEN_MEAN: Real = 0.618_033_988_749_894_8;

/// `k·ω mod 1` in `[-1/2, 1/2]`, with the rounding error of the product
/// recovered by a fused multiply-add. For `k` in the hundreds the naive
/// product loses exactly the digits a small divisor lives in.
pub fn fractional_part_mul(k: i64, omega: Real) -> Real {
    let kf = k as Real;
    let p = kf * omega;
    let err = kf.mul_add(omega, -p);
    let r = p - p.round();
    let f = r + err;
    f - f.round()
}

/// `e^{2πif} − 1` without cancellation: `−2 sin²(πf) + i sin(2πf)`.
fn gap_from_turns(f: Real) -> Cplx {
    let s = (PI * f).sin();
    Cplx::new(-2.0 * s * s, (2.0 * PI * f).sin())
}

/// `min_{1≤k≤k_max} |e^{2πikω} − 1| · k^τ`.
///
/// The true Diophantine constant is the infimum over all `k`, so this is an
/// upper estimate that can only decrease as `k_max` grows.
pub fn estimate_diophantine(omega: Real, tau: Real, k_max: usize) -> Real {
    (1..=k_max as i64)
        .map(|k| gap_from_turns(fractional_part_mul(k, omega)).norm() * (k as Real).powf(tau))
        .fold(Real::INFINITY, Real::min)
}

/// A rotation number `ω` together with Diophantine data `(ν, τ)` and a cache
/// of `e^{2πikω}` and `e^{2πikω} − 1` for `0 ≤ k ≤ k_max`.
#[derive(Clone, Debug)]
pub struct Frequency {
    omega: Real,
    nu: Real,
    tau: Real,
    units: Vec<Cplx>,
    gaps: Vec<Cplx>,
}

impl Frequency {
    /// Validates `|e^{2πikω} − 1| ≥ ν|k|^{−τ}` for every `1 ≤ k ≤ k_max`.
    pub fn new(omega: Real, nu: Real, tau: Real, k_max: usize) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidFrequency(format!("omega = {omega} not in (0, 1)")));
        }
        if !(nu > 0.0 && nu.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidFrequency(format!("need nu > 0, tau > 0 (got {nu}, {tau})")));
        }
        if k_max == 0 {
            return Err(Error::InvalidFrequency("k_max must be at least 1".into()));
        }
        let mut units = Vec::with_capacity(k_max + 1);
        let mut gaps = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max as i64 {
            let f = fractional_part_mul(k, omega);
            let gap = gap_from_turns(f);
            if k > 0 {
                if gap.norm() == 0.0 {
                    return Err(Error::Resonance { k });
                }
                let bound = nu * (k as Real).powf(-tau);
                if gap.norm() < bound {
                    return Err(Error::InvalidFrequency(format!(
                        "Diophantine bound fails at k = {k}: |e^(2πikω) − 1| = {:e} < ν k^-τ = {bound:e}",
                        gap.norm()
                    )));
                }
            }
            units.push(Cplx::new(1.0, 0.0) + gap);
            gaps.push(gap);
        }
        Ok(Self {
            omega,
            nu,
            tau,
            units,
            gaps,
        })
    }

    /// Uses `ν = estimate_diophantine(ω, τ, k_max)`, the largest constant
    /// consistent with the cached range.
    pub fn with_estimated_nu(omega: Real, tau: Real, k_max: usize) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidFrequency(format!("omega = {omega} not in (0, 1)")));
        }
        let nu = estimate_diophantine(omega, tau, k_max.max(1));
        if nu == 0.0 {
            let k = (1..=k_max as i64)
                .find(|&k| fractional_part_mul(k, omega) == 0.0)
                .unwrap_or(0);
            return Err(Error::Resonance { k });
        }
        Self::new(omega, nu, tau, k_max)
    }

    pub fn golden(tau: Real, k_max: usize) -> Result<Self> {
        Self::with_estimated_nu(GOLDEN_MEAN, tau, k_max)
    }

    pub fn omega(&self) -> Real {
        self.omega
    }

    pub fn nu(&self) -> Real {
        self.nu
    }

    pub fn tau(&self) -> Real {
        self.tau
    }

    pub fn k_max(&self) -> usize {
        self.units.len() - 1
    }

    /// `e^{2πimω}` for any integer `m` (computed on the fly past the cache).
    pub fn unit(&self, m: i64) -> Cplx {
        match self.units.get(m.unsigned_abs() as usize) {
            Some(z) if m < 0 => z.conj(),
            Some(z) => *z,
            None => Cplx::new(1.0, 0.0) + gap_from_turns(fractional_part_mul(m, self.omega)),
        }
    }

    /// Cached `e^{2πikω} − 1`, or `None` past `k_max`.
    pub fn gap(&self, k: i64) -> Option<Cplx> {
        self.gaps
            .get(k.unsigned_abs() as usize)
            .map(|z| if k < 0 { z.conj() } else { *z })
    }
}

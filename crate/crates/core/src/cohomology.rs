//! Small-divisor solvers for the three difference equations used by both
//! expansion algorithms:
//!
//! * `φ − φ∘T_ω = η` ([`solve_standard`]),
//! * `L_ω φ = φ∘T_ω − 2φ + φ∘T_{−ω} = η` ([`solve_second_difference`]),
//! * `λ(ε) φ − φ∘T_ω = η` with `λ(ε) = 1 − ε^α`, either as a formal
//!   ε-series ([`solve_parametric_formal`]) or at a fixed numeric ε
//!   ([`solve_parametric_numeric`]).
//!
//! All of them act mode by mode and preserve trigonometric degree.

use crate::epsseries::EpsSeries;
use crate::error::{Error, Result};
use crate::fourier::{Frequency, TrigPoly};
use crate::scalar::{Cplx, Real};

/// Inputs whose mean is at most this fraction of their majorant are treated
/// as mean-free (the mean is projected out).
pub const MEAN_TOLERANCE: Real = 1e-12;

/// Divisors of the three equations, read off a [`Frequency`] cache.
#[derive(Clone, Copy, Debug)]
pub struct DivisorTable<'a> {
    freq: &'a Frequency,
}

impl<'a> DivisorTable<'a> {
    pub fn new(freq: &'a Frequency) -> Self {
        Self { freq }
    }

    fn gap(&self, k: i64) -> Result<Cplx> {
        self.freq.gap(k).ok_or(Error::ModeOutOfRange {
            k,
            k_max: self.freq.k_max(),
        })
    }

    /// `1 − e^{2πikω}`.
    pub fn standard(&self, k: i64) -> Result<Cplx> {
        Ok(-self.gap(k)?)
    }

    /// `2(cos 2πkω − 1)`.
    pub fn second_difference(&self, k: i64) -> Result<Real> {
        Ok(2.0 * self.gap(k)?.re)
    }

    /// `λ(ε) − e^{2πikω} = (1 − e^{2πikω}) − ε^α`.
    pub fn parametric(&self, k: i64, eps: Real, alpha: u32) -> Result<Cplx> {
        Ok(-self.gap(k)? - eps.powi(alpha as i32))
    }
}

/// Projects out a roundoff-sized mean; rejects a genuine one.
fn require_mean_free(eta: &TrigPoly) -> Result<TrigPoly> {
    let mean = eta.mean();
    if mean == 0.0 {
        return Ok(eta.clone());
    }
    let scale = eta.norm_rho(0.0);
    if mean.abs() > MEAN_TOLERANCE * scale {
        return Err(Error::NonZeroMean { mean, scale });
    }
    Ok(eta.mean_free())
}

fn divide_modes(eta: &TrigPoly, mut divisor: impl FnMut(i64) -> Result<Cplx>) -> Result<TrigPoly> {
    let mut modes = Vec::with_capacity(eta.degree() + 1);
    for (k, c) in eta.modes().iter().enumerate() {
        if k == 0 {
            modes.push(Cplx::new(0.0, 0.0));
        } else {
            modes.push(c / divisor(k as i64)?);
        }
    }
    Ok(TrigPoly::from_modes(modes))
}

/// Zero-mean `φ` with `φ − φ∘T_ω = η`: `φ̂_k = η̂_k / (1 − e^{2πikω})`.
pub fn solve_standard(eta: &TrigPoly, freq: &Frequency) -> Result<TrigPoly> {
    let eta = require_mean_free(eta)?;
    let table = DivisorTable::new(freq);
    divide_modes(&eta, |k| table.standard(k))
}

/// Zero-mean `φ` with `L_ω φ = η`: `φ̂_k = η̂_k / (2(cos 2πkω − 1))`.
pub fn solve_second_difference(eta: &TrigPoly, freq: &Frequency) -> Result<TrigPoly> {
    let eta = require_mean_free(eta)?;
    let table = DivisorTable::new(freq);
    divide_modes(&eta, |k| table.second_difference(k).map(|d| Cplx::new(d, 0.0)))
}

/// Formal solution of `λ(ε) φ_ε − φ_ε∘T_ω = η_ε`, `λ = 1 − ε^α`.
///
/// Matching powers of ε gives the triangular system
/// `φ_n − φ_n∘T_ω = η_n + φ_{n−α}`, solved upward in `n`. Every
/// coefficient of `eta` must be mean-free.
pub fn solve_parametric_formal(eta: &EpsSeries, alpha: usize, freq: &Frequency) -> Result<EpsSeries> {
    let order = eta.order();
    let mut phi: Vec<TrigPoly> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let rhs = require_mean_free(eta.coeff(n))?;
        let rhs = if alpha >= 1 && n >= alpha && !phi[n - alpha].is_zero() {
            &rhs + &phi[n - alpha]
        } else {
            rhs
        };
        phi.push(solve_standard(&rhs, freq)?);
    }
    Ok(EpsSeries::from_coeffs(phi))
}

/// `γ_N = (ν/2)^{1/α} (aN)^{−τ/α}`.
pub fn gamma_radius(freq: &Frequency, alpha: u32, degree_bound: usize) -> Real {
    let alpha = alpha as Real;
    (freq.nu() / 2.0).powf(1.0 / alpha) * (degree_bound as Real).powf(-freq.tau() / alpha)
}

/// `λ(ε) φ − φ∘T_ω = η` at a fixed ε with `|ε| ≤ γ_N`, where
/// `aN = degree_bound ≥ deg η`. Every divisor used is checked against
/// `|λ(ε) − e^{2πikω}| ≥ (ν/2)(aN)^{−τ}`.
pub fn solve_parametric_numeric(
    eta: &TrigPoly,
    eps: Real,
    alpha: u32,
    freq: &Frequency,
    degree_bound: usize,
) -> Result<TrigPoly> {
    if eta.degree() > degree_bound {
        return Err(Error::DegreeExceeded {
            degree: eta.degree(),
            bound: degree_bound,
        });
    }
    let gamma = gamma_radius(freq, alpha, degree_bound.max(1));
    if eps.abs() > gamma {
        return Err(Error::EpsOutsideDomain { eps, gamma });
    }
    let eta = require_mean_free(eta)?;
    let table = DivisorTable::new(freq);
    let lower = 0.5 * freq.nu() * (degree_bound.max(1) as Real).powf(-freq.tau());
    divide_modes(&eta, |k| {
        let d = table.parametric(k, eps, alpha)?;
        if d.norm() < lower {
            return Err(Error::invariant(
                "parametric divisor bound",
                format!("|λ(ε) − e^(2πikω)| = {:e} < {lower:e} at k = {k}", d.norm()),
            ));
        }
        Ok(d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::GOLDEN_MEAN;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn freq() -> Frequency {
        Frequency::golden(1.0, 1000).unwrap()
    }

    fn random_mean_free(rng: &mut ChaCha8Rng, deg: usize) -> TrigPoly {
        let terms: Vec<_> = (1..=deg)
            .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        TrigPoly::from_cos_sin(&terms)
    }

    fn rel_residual(res: &TrigPoly, eta: &TrigPoly) -> Real {
        res.norm_rho(0.0) / eta.norm_rho(0.0).max(Real::MIN_POSITIVE)
    }

    #[test]
    fn standard_examples() {
        let f = freq();
        assert!(solve_standard(&TrigPoly::zero(), &f).unwrap().is_zero());
        let phi = solve_standard(&TrigPoly::cos_mode(1), &f).unwrap();
        let expected = Cplx::new(0.5, 0.0) / (Cplx::new(1.0, 0.0) - f.unit(1));
        assert!((phi.mode(1) - expected).norm() < 1e-15);
        assert_eq!(phi.mean(), 0.0);
    }

    #[test]
    fn standard_rejects_mean() {
        let f = freq();
        let eta = TrigPoly::from_cos_sin(&[(0, 0.1, 0.0), (1, 1.0, 0.0)]);
        assert!(matches!(solve_standard(&eta, &f), Err(Error::NonZeroMean { .. })));
        let tiny = TrigPoly::from_cos_sin(&[(0, 1e-15, 0.0), (1, 1.0, 0.0)]);
        assert!(solve_standard(&tiny, &f).is_ok());
    }

    #[test]
    fn mode_past_cache_is_an_error() {
        let f = Frequency::golden(1.0, 8).unwrap();
        let eta = TrigPoly::cos_mode(9);
        assert!(matches!(solve_standard(&eta, &f), Err(Error::ModeOutOfRange { k: 9, .. })));
    }

    #[test]
    fn second_difference_examples() {
        let f = freq();
        assert!(solve_second_difference(&TrigPoly::zero(), &f).unwrap().is_zero());
        let phi = solve_second_difference(&TrigPoly::cos_mode(1), &f).unwrap();
        let d = 2.0 * (2.0 * std::f64::consts::PI * GOLDEN_MEAN).cos() - 2.0;
        assert!((phi.mode(1).re - 0.5 / d).abs() < 1e-15);
        assert_eq!(phi.degree(), 1);
    }

    #[test]
    fn substitution_residuals() {
        let f = freq();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let deg = rng.gen_range(1..=64);
            let eta = random_mean_free(&mut rng, deg);
            let phi = solve_standard(&eta, &f).unwrap();
            let res = &(&phi - &phi.rotate(&f, 1)) - &eta;
            assert!(rel_residual(&res, &eta) < 1e-12);
            assert_eq!(phi.degree(), eta.degree());

            let psi = solve_second_difference(&eta, &f).unwrap();
            let l = &(&psi.rotate(&f, 1) - &psi.scale(2.0)) + &psi.rotate(&f, -1);
            assert!(rel_residual(&(&l - &eta), &eta) < 1e-12);
            assert_eq!(psi.degree(), eta.degree());
        }
    }

    #[test]
    fn linearity() {
        let f = freq();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (e1, e2) = (random_mean_free(&mut rng, 20), random_mean_free(&mut rng, 30));
        let (a, b) = (0.7, -1.3);
        let combo = &e1.scale(a) + &e2.scale(b);
        let lhs = solve_standard(&combo, &f).unwrap();
        let rhs = &solve_standard(&e1, &f).unwrap().scale(a) + &solve_standard(&e2, &f).unwrap().scale(b);
        assert!((&lhs - &rhs).norm_rho(0.0) < 1e-12 * lhs.norm_rho(0.0));
    }

    #[test]
    fn formal_reduces_to_standard_when_alpha_is_large() {
        let f = freq();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let order = 5;
        let eta = EpsSeries::from_coeffs((0..=order).map(|_| random_mean_free(&mut rng, 6)).collect());
        let phi = solve_parametric_formal(&eta, order + 1, &f).unwrap();
        for n in 0..=order {
            assert_eq!(phi.coeff(n), &solve_standard(eta.coeff(n), &f).unwrap());
        }
        assert!(solve_parametric_formal(&EpsSeries::zeros(4), 3, &f).unwrap().is_zero());
    }

    #[test]
    fn formal_satisfies_triangular_system() {
        let f = freq();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (order, alpha) = (9, 3);
        let mut coeffs: Vec<TrigPoly> = (0..=order).map(|_| random_mean_free(&mut rng, 5)).collect();
        coeffs[0] = TrigPoly::zero();
        coeffs[1] = TrigPoly::zero();
        let eta = EpsSeries::from_coeffs(coeffs);
        let phi = solve_parametric_formal(&eta, alpha, &f).unwrap();
        assert_eq!(phi.lead(), eta.lead());
        for n in 0..=order {
            let mut lhs = phi.coeff(n) - &phi.coeff(n).rotate(&f, 1);
            if n >= alpha {
                lhs -= phi.coeff(n - alpha);
            }
            let d = (&lhs - eta.coeff(n)).norm_rho(0.0);
            assert!(d < 1e-12 * (1.0 + eta.coeff(n).norm_rho(0.0)));
        }
    }

    #[test]
    fn numeric_reduces_to_standard_at_zero() {
        let f = freq();
        let eta = TrigPoly::from_cos_sin(&[(1, 0.4, -0.2), (5, 0.1, 0.3)]);
        let a = solve_parametric_numeric(&eta, 0.0, 3, &f, 8).unwrap();
        let b = solve_standard(&eta, &f).unwrap();
        assert!((&a - &b).norm_rho(0.0) < 1e-15);
    }

    #[test]
    fn numeric_domain_and_degree_checks() {
        let f = freq();
        let eta = TrigPoly::cos_mode(3);
        let gamma = gamma_radius(&f, 3, 8);
        assert!(matches!(
            solve_parametric_numeric(&eta, 1.01 * gamma, 3, &f, 8),
            Err(Error::EpsOutsideDomain { .. })
        ));
        assert!(matches!(
            solve_parametric_numeric(&TrigPoly::cos_mode(9), 0.0, 3, &f, 8),
            Err(Error::DegreeExceeded { .. })
        ));
    }

    #[test]
    fn divisor_lower_bound_at_gamma() {
        // golden mean, α = 3, a = 1, N = 8: every |k| ≤ 8 clears (ν/2)·8^{−τ}
        let f = freq();
        let table = DivisorTable::new(&f);
        let gamma = gamma_radius(&f, 3, 8);
        let bound = 0.5 * f.nu() * 8f64.powf(-f.tau());
        for eps in [gamma, -gamma] {
            for k in (-8i64..=8).filter(|&k| k != 0) {
                assert!(table.parametric(k, eps, 3).unwrap().norm() >= bound);
            }
        }
    }

    #[test]
    fn numeric_residual() {
        let f = freq();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let eta = random_mean_free(&mut rng, 8);
        let gamma = gamma_radius(&f, 3, 8);
        for eps in [0.3 * gamma, -0.9 * gamma, gamma] {
            let phi = solve_parametric_numeric(&eta, eps, 3, &f, 8).unwrap();
            let lam = 1.0 - eps.powi(3);
            let res = &(&phi.scale(lam) - &phi.rotate(&f, 1)) - &eta;
            assert!(rel_residual(&res, &eta) < 1e-12);
        }
    }
}

//! Order-by-order Lindstedt expansion of the hull function.
//!
//! Writing the circle as `x_n = θ + u_ε(θ)` with `θ_n = θ_0 + nω`, the map
//! reduces to the scalar hull equation
//!
//! ```text
//! L_ω u + ε^α (ω + u − u∘T_{−ω}) − μ + ε g(θ + u) = 0,
//! L_ω u = u∘T_ω − 2u + u∘T_{−ω}.
//! ```
//!
//! Matching ε^n gives `L_ω u_n = μ_n − ω[n = α] − (u_{n−α} − u_{n−α}∘T_{−ω}) − S_{n−1}`,
//! with `S_{n−1}` the ε^{n−1} coefficient of `g(θ + u_ε)` and `μ_n` fixed by
//! solvability.

use crate::cohomology::solve_second_difference;
use crate::epsseries::{compose_perturbation, EpsSeries, PerturbationComposer, ScalarSeries};
use crate::error::{Error, Result};
use crate::fourier::{Frequency, TrigPoly};
use crate::scalar::Real;

/// The dissipative standard map
/// `f(x, y) = (x + λy + μ − εg(x), λy + μ − εg(x))`, `λ = 1 − ε^α`.
#[derive(Clone, Debug)]
pub struct MapSpec {
    g: TrigPoly,
    g_prime: TrigPoly,
    alpha: usize,
    freq: Frequency,
}

impl MapSpec {
    pub fn new(g: TrigPoly, alpha: usize, freq: Frequency) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidInput("alpha must be at least 1".into()));
        }
        let g_prime = g.derivative();
        Ok(Self {
            g,
            g_prime,
            alpha,
            freq,
        })
    }

    /// `g(θ) = sin(2πθ)`.
    pub fn sine(alpha: usize, freq: Frequency) -> Result<Self> {
        Self::new(TrigPoly::sin_mode(1), alpha, freq)
    }

    pub fn g(&self) -> &TrigPoly {
        &self.g
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn freq(&self) -> &Frequency {
        &self.freq
    }

    pub fn omega(&self) -> Real {
        self.freq.omega()
    }

    /// Degree `a` of the perturbation; 1 for the integrable case `g = 0`.
    pub fn a(&self) -> usize {
        self.g.degree().max(1)
    }

    pub fn lambda(&self, eps: Real) -> Real {
        1.0 - eps.powi(self.alpha as i32)
    }

    pub fn apply(&self, x: Real, y: Real, mu: Real, eps: Real) -> (Real, Real) {
        let y1 = self.lambda(eps) * y + mu - eps * self.g.eval(x);
        (x + y1, y1)
    }

    /// `Df(x, y)`, row-major.
    pub fn jacobian(&self, x: Real, eps: Real) -> [[Real; 2]; 2] {
        let lam = self.lambda(eps);
        let dg = eps * self.g_prime.eval(x);
        [[1.0 - dg, lam], [-dg, lam]]
    }
}

/// `u_ε = Σ u_n ε^n` and `μ_ε = Σ μ_n ε^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HullExpansion {
    pub u: EpsSeries,
    pub mu: ScalarSeries,
}

impl HullExpansion {
    pub fn order(&self) -> usize {
        self.u.order()
    }
}

/// Solves the hull equation through order `n_max`.
pub fn direct_expansion(map: &MapSpec, n_max: usize) -> Result<HullExpansion> {
    let freq = map.freq();
    let alpha = map.alpha();
    let mut composer = PerturbationComposer::new(map.g());
    let mut u = vec![TrigPoly::zero()];
    let mut mu = vec![0.0];
    for n in 1..=n_max {
        let s_prev = composer.layer(n - 1);
        let mut mu_n = s_prev.mean();
        let mut rhs = -&s_prev.mean_free();
        if n == alpha {
            mu_n += map.omega();
        }
        if n >= alpha {
            let v = &u[n - alpha];
            rhs -= &(v - &v.rotate(freq, -1));
        }
        let u_n = solve_second_difference(&rhs, freq)?;
        composer.push(u_n.clone());
        u.push(u_n);
        mu.push(mu_n);
    }
    Ok(HullExpansion {
        u: EpsSeries::from_coeffs(u),
        mu: ScalarSeries::from_coeffs(mu),
    })
}

/// Left side of the hull equation assembled as an ε-series through the
/// order of `h`. Vanishes identically for an exact expansion.
pub fn hull_defect(h: &HullExpansion, map: &MapSpec) -> Result<EpsSeries> {
    let order = h.order();
    let freq = map.freq();
    let u = &h.u;
    let lu = u
        .rotate(freq, 1)
        .sub(&u.scale(2.0))
        .add(&u.rotate(freq, -1));
    let drift = u.sub(&u.rotate(freq, -1)).add_scalar(&ScalarSeries::constant(map.omega(), order));
    let s = compose_perturbation(u, map.g(), order)?;
    Ok(lu
        .add(&drift.shift_up(map.alpha()))
        .sub(&EpsSeries::from_scalar(&h.mu))
        .add(&s.shift_up(1)))
}

/// `K(θ) = (θ + x(θ), y(θ))`; `x` stores the offset from the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub x: EpsSeries,
    pub y: EpsSeries,
}

impl Embedding {
    pub fn order(&self) -> usize {
        self.x.order().min(self.y.order())
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self {
            x: self.x.with_order(order),
            y: self.y.with_order(order),
        }
    }
}

/// `K = (θ + u, ω + u − u∘T_{−ω})`.
pub fn hull_to_embedding(h: &HullExpansion, map: &MapSpec) -> Embedding {
    let order = h.order();
    let y = h
        .u
        .sub(&h.u.rotate(map.freq(), -1))
        .add_scalar(&ScalarSeries::constant(map.omega(), order));
    Embedding { x: h.u.clone(), y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::GOLDEN_MEAN;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine_map() -> MapSpec {
        MapSpec::sine(3, Frequency::golden(1.0, 10_000).unwrap()).unwrap()
    }

    #[test]
    fn order_zero() {
        let h = direct_expansion(&sine_map(), 0).unwrap();
        assert!(h.u.coeff(0).is_zero());
        assert_eq!(*h.mu.coeff(0), 0.0);
        let k = hull_to_embedding(&h, &sine_map());
        assert!(k.x.coeff(0).is_zero());
        assert_eq!(k.y.coeff(0).as_constant(), Some(GOLDEN_MEAN));
    }

    #[test]
    fn drift_at_dissipation_order() {
        let h = direct_expansion(&sine_map(), 8).unwrap();
        assert_eq!(*h.mu.coeff(3), GOLDEN_MEAN);
        // u_1..u_3 are odd, so S_0..S_3 average to zero; the dissipative
        // term breaks the symmetry from u_4 on
        assert!(h.mu.coeff(5).abs() > 1e-3);
        for n in [1, 2, 4] {
            assert!(h.mu.coeff(n).abs() < 1e-15, "μ_{n} = {:e}", h.mu.coeff(n));
        }
    }

    #[test]
    fn first_order_from_mean_free_potential() {
        let g = TrigPoly::from_cos_sin(&[(0, 0.25, 0.0), (1, 0.3, 1.0), (2, 0.1, -0.2)]);
        let map = MapSpec::new(g.clone(), 3, Frequency::golden(1.0, 1000).unwrap()).unwrap();
        let h = direct_expansion(&map, 2).unwrap();
        assert_eq!(*h.mu.coeff(1), 0.25);
        let u1 = solve_second_difference(&-&g.mean_free(), map.freq()).unwrap();
        assert_eq!(h.u.coeff(1), &u1);
    }

    #[test]
    fn first_order_numeric_substitution() {
        // residual of the hull equation at small ε with u ≈ εu_1 is O(ε²)
        let map = sine_map();
        let h = direct_expansion(&map, 1).unwrap();
        let res = |eps: Real| {
            (0..32)
                .map(|i| {
                    let th = i as Real / 32.0;
                    let u = |t: Real| eps * h.u.coeff(1).eval(t);
                    let w = GOLDEN_MEAN;
                    let lu = u(th + w) - 2.0 * u(th) + u(th - w);
                    let mu = eps * h.mu.coeff(1);
                    (lu + eps.powi(3) * (w + u(th) - u(th - w)) - mu + eps * map.g().eval(th + u(th))).abs()
                })
                .fold(0.0, Real::max)
        };
        let (r1, r2) = (res(1e-3), res(1e-4));
        assert!((r1 / r2).log10() > 1.9, "ratio {:e}", r1 / r2);
    }

    #[test]
    fn hull_defect_vanishes_to_roundoff() {
        let map = sine_map();
        let h = direct_expansion(&map, 64).unwrap();
        let d = hull_defect(&h, &map).unwrap();
        for n in 0..=64 {
            let scale = h.u.coeff(n).norm_rho(0.0).max(1.0);
            assert!(d.coeff(n).norm_rho(0.0) <= 1e-10 * scale, "order {n}");
        }
    }

    #[test]
    fn degree_and_mean_laws() {
        let map = sine_map();
        let h = direct_expansion(&map, 40).unwrap();
        for n in 1..=40 {
            let c = h.u.coeff(n);
            assert!(c.degree() <= n);
            assert!(c.mean().abs() <= 1e-13 * c.norm_rho(0.0));
        }
        let g = TrigPoly::from_cos_sin(&[(1, 0.0, 1.0), (2, 0.3, 0.0)]);
        let map2 = MapSpec::new(g, 2, Frequency::golden(1.0, 1000).unwrap()).unwrap();
        let h2 = direct_expansion(&map2, 12).unwrap();
        for n in 1..=12 {
            assert!(h2.u.coeff(n).degree() <= 2 * n);
        }
    }

    #[test]
    fn embedding_y_is_mean_free_past_order_zero() {
        let map = sine_map();
        let k = hull_to_embedding(&direct_expansion(&map, 10).unwrap(), &map);
        for n in 1..=10 {
            assert_eq!(k.y.coeff(n).mean(), 0.0);
        }
    }

    #[test]
    fn jacobian_determinant_is_lambda() {
        let map = MapSpec::new(
            TrigPoly::from_cos_sin(&[(1, 0.4, 1.0), (3, -0.2, 0.1)]),
            3,
            Frequency::golden(1.0, 100).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (x, eps) = (rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5));
            let j = map.jacobian(x, eps);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert!((det - map.lambda(eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn integrable_case_is_flat() {
        let map = MapSpec::new(TrigPoly::zero(), 3, Frequency::golden(1.0, 100).unwrap()).unwrap();
        let h = direct_expansion(&map, 6).unwrap();
        for n in 0..=6 {
            assert!(h.u.coeff(n).is_zero());
        }
        assert_eq!(*h.mu.coeff(3), GOLDEN_MEAN);
        assert_eq!(map.a(), 1);
    }

    #[test]
    fn rejects_zero_alpha() {
        assert!(MapSpec::sine(0, Frequency::golden(1.0, 10).unwrap()).is_err());
    }
}

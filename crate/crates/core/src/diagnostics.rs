//! Measurements on computed series: coefficient norms, Gevrey fits,
//! Diophantine data, ε-domain radii, and invariance residuals evaluated
//! through the map itself.

use nalgebra::{DMatrix, DVector};
use twofloat::{consts::TAU, TwoFloat};

use crate::cohomology::gamma_radius;
use crate::epsseries::{EpsSeries, ScalarSeries};
use crate::error::{Error, Result};
use crate::fourier::{Frequency, TrigPoly};
use crate::lindstedt::{Embedding, MapSpec};
use crate::scalar::{Cplx, Real, UNIT_ROUNDOFF};

pub use crate::fourier::estimate_diophantine;

/// `(n, ‖x_n‖_ρ)` for every coefficient.
pub fn coefficient_norms(x: &EpsSeries, rho: Real) -> Vec<(usize, Real)> {
    x.norms(rho).into_iter().enumerate().collect()
}

/// `(n, max(‖K_{x,n}‖_ρ, ‖K_{y,n}‖_ρ))`, skipping the constant `ω` of `K_y`
/// at order 0.
pub fn embedding_norms(k: &Embedding, rho: Real) -> Vec<(usize, Real)> {
    let order = k.order();
    (0..=order)
        .map(|n| {
            let y = if n == 0 { k.y.coeff(0).mean_free() } else { k.y.coeff(n).clone() };
            (n, k.x.coeff(n).norm_rho(rho).max(y.norm_rho(rho)))
        })
        .collect()
}

/// Least-squares fit `log‖K_n‖ ≈ log C + n log R + σ n log n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GevreyFit {
    pub sigma: Real,
    pub log_r: Real,
    pub log_c: Real,
    pub n_min: usize,
    pub n_max: usize,
    /// Root-mean-square residual of the fit in `log` units.
    pub residual: Real,
    /// The theoretical upper exponent `2τ/α`.
    pub bound: Real,
}

/// `2τ/α`.
pub fn gevrey_bound(map: &MapSpec) -> Real {
    2.0 * map.freq().tau() / map.alpha() as Real
}

/// Fits the Gevrey model over `n_min ≤ n ≤ n_max`.
pub fn fit_gevrey(norms: &[(usize, Real)], n_min: usize, n_max: usize, bound: Real) -> Result<GevreyFit> {
    if n_max < n_min + 8 {
        return Err(Error::InvalidInput(format!(
            "fit window [{n_min}, {n_max}] must span at least 8 orders"
        )));
    }
    let pts: Vec<(Real, Real)> = norms
        .iter()
        .filter(|(n, _)| (n_min..=n_max).contains(n))
        .map(|&(n, v)| {
            if v > 0.0 && v.is_finite() {
                Ok((n as Real, v.ln()))
            } else {
                Err(Error::InvalidInput(format!("norm at order {n} is {v}, fit undefined")))
            }
        })
        .collect::<Result<_>>()?;
    if pts.len() < 3 {
        return Err(Error::InvalidInput("fewer than three orders in the fit window".into()));
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| {
        let n = pts[i].0;
        match j {
            0 => 1.0,
            1 => n,
            _ => n * n.ln(),
        }
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
    let r = &a * &coef - &b;
    Ok(GevreyFit {
        sigma: coef[2],
        log_r: coef[1],
        log_c: coef[0],
        n_min,
        n_max,
        residual: (r.norm_squared() / pts.len() as Real).sqrt(),
        bound,
    })
}

/// `γ_N = (ν/2)^{1/α} (aN)^{−τ/α}`.
pub fn gamma_n(map: &MapSpec, n: usize) -> Real {
    gamma_radius(map.freq(), map.alpha() as u32, map.a() * n)
}

/// `ν̃(λ) = sup_{1 ≤ |k| ≤ k_max} |e^{2πikω} − λ|^{-1} |k|^{−τ}`.
pub fn tilde_nu(lambda: Cplx, freq: &Frequency, k_max: usize) -> Result<Real> {
    let mut sup: Real = 0.0;
    for k in 1..=k_max as i64 {
        let w = (k as Real).powf(-freq.tau());
        for s in [k, -k] {
            let d = (freq.unit(s) - lambda).norm();
            if d == 0.0 {
                return Err(Error::Resonance { k: s });
            }
            sup = sup.max(w / d);
        }
    }
    Ok(sup)
}

/// `λ(ε) = 1 − ε^α` at complex ε.
pub fn lambda_complex(map: &MapSpec, eps: Cplx) -> Cplx {
    Cplx::new(1.0, 0.0) - eps.powu(map.alpha() as u32)
}

/// Membership in `G`: `ν̃(λ(ε)) |λ(ε) − 1|^{N+1} ≤ A`.
pub fn in_g(eps: Cplx, a_bound: Real, n: usize, map: &MapSpec, k_max: usize) -> Result<bool> {
    let lam = lambda_complex(map, eps);
    let gap = (lam - Cplx::new(1.0, 0.0)).norm();
    if gap == 0.0 {
        return Ok(a_bound >= 0.0);
    }
    Ok(tilde_nu(lam, map.freq(), k_max)? * gap.powi(n as i32 + 1) <= a_bound)
}

/// Accuracy of the double-double evaluation, limited by the trigonometric
/// kernels of `twofloat` (measured near `2^{-70}`).
pub const EXTENDED_ROUNDOFF: Real = 1e-21;

/// Invariance residual at one ε.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSample {
    pub eps: Real,
    /// `max_θ |f(K(θ)) − K(θ + ω)|` (max of both components).
    pub residual: Real,
    /// Ten times the evaluation error bound: rounding of the stored
    /// coefficients, `u Σ_{n≥1} max(‖x_n‖, ‖y_n‖, |μ_n|) ε^n`, plus the
    /// extended-precision error on `max_θ |f(K(θ))|`. Samples at or below it
    /// are not fitted.
    pub floor: Real,
    pub fitted: bool,
}

/// `log residual ≈ offset + slope · log ε` over the samples above the floor.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualScan {
    pub samples: Vec<ResidualSample>,
    pub slope: Option<Real>,
    pub offset: Option<Real>,
}

fn dd_trig(p: &TrigPoly, theta: TwoFloat) -> TwoFloat {
    let t = theta - theta.floor();
    let mut acc = TwoFloat::from(0.0);
    for (k, c) in p.modes().iter().enumerate() {
        if k == 0 {
            acc += TwoFloat::from(c.re);
            continue;
        }
        let (s, co) = (TAU * t * TwoFloat::from(k as Real)).sin_cos();
        acc += 2.0 * (TwoFloat::from(c.re) * co - TwoFloat::from(c.im) * s);
    }
    acc
}

fn dd_series(x: &EpsSeries, eps: TwoFloat, theta: TwoFloat) -> TwoFloat {
    x.coeffs()
        .iter()
        .rev()
        .fold(TwoFloat::from(0.0), |acc, c| acc * eps + dd_trig(c, theta))
}

/// Evaluates `f_{ε,μ(ε)}(K(θ)) − K(θ + ω)` for each ε and θ through the
/// map itself, in double-double arithmetic on the stored coefficients.
pub fn residual_scan(
    map: &MapSpec,
    k: &Embedding,
    mu: &ScalarSeries,
    eps_samples: &[Real],
    theta_samples: &[Real],
) -> ResidualScan {
    let omega = TwoFloat::from(map.omega());
    let order = k.order().min(mu.order());
    let scales: Vec<Real> = (0..=order)
        .map(|n| {
            k.x.coeff(n)
                .norm_rho(0.0)
                .max(k.y.coeff(n).norm_rho(0.0))
                .max(mu.coeff(n).abs())
        })
        .collect();
    let samples: Vec<ResidualSample> = eps_samples
        .iter()
        .map(|&e| {
            let eps = TwoFloat::from(e);
            let m = mu
                .coeffs()
                .iter()
                .rev()
                .fold(TwoFloat::from(0.0), |acc, &c| acc * eps + c);
            let lambda = 1.0 - eps.powi(map.alpha() as i32);
            let mut residual: Real = 0.0;
            let mut magnitude: Real = 0.0;
            for &th in theta_samples {
                let th = TwoFloat::from(th);
                let x = th + dd_series(&k.x, eps, th);
                let y = dd_series(&k.y, eps, th);
                let y1 = lambda * y + m - eps * dd_trig(map.g(), x);
                let x1 = x + y1;
                let tx = th + omega + dd_series(&k.x, eps, th + omega);
                let ty = dd_series(&k.y, eps, th + omega);
                residual = residual
                    .max((x1 - tx).abs().hi())
                    .max((y1 - ty).abs().hi());
                magnitude = magnitude.max(x1.abs().hi()).max(y1.abs().hi());
            }
            let stored: Real = scales
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, s)| s * e.abs().powi(n as i32))
                .sum();
            let floor = 10.0 * (UNIT_ROUNDOFF * stored + EXTENDED_ROUNDOFF * magnitude);
            ResidualSample {
                eps: e,
                residual,
                floor,
                fitted: residual > floor && e > 0.0,
            }
        })
        .collect();
    let pts: Vec<(Real, Real)> = samples
        .iter()
        .filter(|s| s.fitted)
        .map(|s| (s.eps.ln(), s.residual.ln()))
        .collect();
    let (slope, offset) = match line_fit(&pts) {
        Some((a, b)) => (Some(b), Some(a)),
        None => (None, None),
    };
    ResidualScan {
        samples,
        slope,
        offset,
    }
}

/// Ordinary least squares `y ≈ a + b x`; needs two distinct abscissae.
fn line_fit(pts: &[(Real, Real)]) -> Option<(Real, Real)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as Real;
    let mx = pts.iter().map(|p| p.0).sum::<Real>() / n;
    let my = pts.iter().map(|p| p.1).sum::<Real>() / n;
    let sxx: Real = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: Real = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: Real, hi: Real, n: usize) -> Vec<Real> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as Real / (n - 1) as Real).exp())
                .collect()
        }
    }
}

/// `n` equispaced angles in `[0, 1)`.
pub fn theta_grid(n: usize) -> Vec<Real> {
    (0..n).map(|i| i as Real / n as Real).collect()
}

/// Per-order relative discrepancy between two solutions:
/// `max(‖Δx_n‖, ‖Δy_n‖, |Δμ_n|) / max(‖x_n‖, ‖y_n‖, |μ_n|)` with norms at
/// `ρ = 0`, over the orders both carry.
pub fn discrepancy(a: (&Embedding, &ScalarSeries), b: (&Embedding, &ScalarSeries)) -> Vec<Real> {
    let order = a.0.order().min(b.0.order()).min(a.1.order()).min(b.1.order());
    (0..=order)
        .map(|n| {
            let dx = (a.0.x.coeff(n) - b.0.x.coeff(n)).norm_rho(0.0);
            let dy = (a.0.y.coeff(n) - b.0.y.coeff(n)).norm_rho(0.0);
            let dm = (a.1.coeff(n) - b.1.coeff(n)).abs();
            let diff = dx.max(dy).max(dm);
            if diff == 0.0 {
                return 0.0;
            }
            let scale = a.0.x.coeff(n).norm_rho(0.0)
                .max(a.0.y.coeff(n).norm_rho(0.0))
                .max(a.1.coeff(n).abs())
                .max(b.0.x.coeff(n).norm_rho(0.0))
                .max(b.0.y.coeff(n).norm_rho(0.0))
                .max(b.1.coeff(n).abs());
            diff / scale
        })
        .collect()
}

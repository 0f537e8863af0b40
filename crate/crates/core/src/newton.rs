//! Coefficient-doubling quasi-Newton step.
//!
//! Given `(K, μ)` solving the invariance equation `f∘K = K∘T_ω` through
//! order `N`, one step produces orders `N+1..2N`. The linearized equation
//! is reduced to constant-coefficient form by the frame
//! `M = [DK | J^{-1} DK 𝒩]`, in which `Df∘K M ≈ (M∘T_ω) [[1, S], [0, λ]]`,
//! and then solved with one standard and two parametric cohomology
//! equations plus a 2×2 series system for the averages.

use crate::cohomology::{gamma_radius, solve_parametric_formal, solve_standard};
use crate::epsseries::{
    compose_perturbation, condition_real, invert_real, EpsSeries, Mat2, ScalarSeries, Vec2,
};
use crate::error::{Error, Result};
use crate::fourier::TrigPoly;
use crate::lindstedt::{direct_expansion, hull_to_embedding, Embedding, HullExpansion, MapSpec};
use crate::scalar::Real;

/// A coefficient counts as zero when it is below this fraction of the
/// combined size of the terms it was assembled from.
pub const LEAD_TOLERANCE: Real = 1e-10;

/// Relative tolerance of the normalization check on produced orders.
pub const NORMALIZATION_TOLERANCE: Real = 1e-12;

/// The symplectic matrix `J`.
pub const J: [[Real; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const J_INV: [[Real; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];

/// Loss-of-domain bookkeeping at step `h`:
/// `δ_h = ρ_0 / 2^{h+2}`, `ρ_{h+1} = ρ_h − δ_h`, `γ̃_h = γ_{N_h}` with `N_h = 2^h N_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub h: usize,
    pub n0: usize,
    pub rho0: Real,
    pub rho: Real,
    pub gamma: Real,
}

impl Schedule {
    pub fn new(map: &MapSpec, n0: usize, rho0: Real) -> Self {
        Self {
            h: 0,
            n0,
            rho0,
            rho: rho0,
            gamma: gamma_radius(map.freq(), map.alpha() as u32, map.a() * n0),
        }
    }

    pub fn delta(&self) -> Real {
        self.rho0 / (1u64 << (self.h + 2)) as Real
    }

    pub fn n(&self) -> usize {
        self.n0 << self.h
    }

    pub fn advance(&self, map: &MapSpec) -> Self {
        let h = self.h + 1;
        Self {
            h,
            rho: self.rho - self.delta(),
            gamma: gamma_radius(map.freq(), map.alpha() as u32, map.a() * (self.n0 << h)),
            ..*self
        }
    }
}

/// `(K, μ)` through order `N`, with the schedule of the step that produced it.
#[derive(Clone, Debug)]
pub struct NewtonState {
    pub map: MapSpec,
    pub k: Embedding,
    pub mu: ScalarSeries,
    pub schedule: Schedule,
}

impl NewtonState {
    pub fn from_hull(hull: &HullExpansion, map: &MapSpec, rho0: Real) -> Self {
        Self {
            map: map.clone(),
            k: hull_to_embedding(hull, map),
            mu: hull.mu.clone(),
            schedule: Schedule::new(map, hull.order(), rho0),
        }
    }

    pub fn n(&self) -> usize {
        self.k.order()
    }
}

/// Per-order sizes used to decide whether a computed coefficient is zero.
fn part_scales(parts: &[&EpsSeries], order: usize) -> Vec<Real> {
    (0..=order)
        .map(|n| {
            parts
                .iter()
                .filter(|p| n <= p.order())
                .map(|p| p.coeff(n).norm_rho(0.0))
                .sum()
        })
        .collect()
}

fn add_scales(a: &[Real], b: &[Real]) -> Vec<Real> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Largest `|x_n| / scale_n` over `n` in `range`.
fn relative_size(x: &EpsSeries, scale: &[Real], range: std::ops::RangeInclusive<usize>) -> Real {
    range
        .map(|n| {
            let v = x.coeff(n).norm_rho(0.0);
            if v == 0.0 {
                0.0
            } else {
                v / scale[n]
            }
        })
        .fold(0.0, Real::max)
}

/// First order whose coefficient exceeds `tol` relative to its scale.
fn relative_lead(x: &EpsSeries, scale: &[Real], tol: Real) -> Option<usize> {
    (0..=x.order()).find(|&n| {
        let v = x.coeff(n).norm_rho(0.0);
        v > 0.0 && v > tol * scale[n]
    })
}

/// Invariance error `E = f∘K − K∘T_ω` with the scales of its constituents.
#[derive(Clone, Debug)]
pub struct Defect {
    pub e: Vec2<TrigPoly>,
    pub scale: [Vec<Real>; 2],
}

impl Defect {
    /// Relative lead of the error: `None` if every order is at roundoff.
    pub fn lead(&self, tol: Real) -> Option<usize> {
        let a = relative_lead(self.e.first(), &self.scale[0], tol);
        let b = relative_lead(self.e.second(), &self.scale[1], tol);
        match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Largest relative coefficient over orders `0..=n`.
    pub fn relative_through(&self, n: usize) -> Real {
        relative_size(self.e.first(), &self.scale[0], 0..=n)
            .max(relative_size(self.e.second(), &self.scale[1], 0..=n))
    }
}

/// `ε g(θ + x)` to `order`, with `x_0 = 0`.
fn perturbation_term(x: &EpsSeries, g: &TrigPoly, order: usize) -> Result<EpsSeries> {
    let inner = compose_perturbation(x, g, order.saturating_sub(1))?;
    Ok(inner.with_order(order).shift_up(1))
}

/// `E = f_{ε,μ}∘K − K∘T_ω` assembled through `order`:
///
/// ```text
/// y' = λ K_y + μ − ε g(θ + K_x),
/// E_x = K_x + y' − ω − K_x∘T_ω,   E_y = y' − K_y∘T_ω.
/// ```
pub fn invariance_error(map: &MapSpec, k: &Embedding, mu: &ScalarSeries, order: usize) -> Result<Defect> {
    let freq = map.freq();
    let kx = k.x.with_order(order);
    let ky = k.y.with_order(order);
    let lam = ScalarSeries::conformal_factor(map.alpha(), order);
    let lam_ky = ky.mul_scalar(&lam, order);
    let mu_s = EpsSeries::from_scalar(&mu.with_order(order));
    let eg = perturbation_term(&kx, map.g(), order)?;
    let y_next = lam_ky.add(&mu_s).sub(&eg);
    let kx_t = kx.rotate(freq, 1);
    let ky_t = ky.rotate(freq, 1);
    let omega = EpsSeries::constant(TrigPoly::constant(map.omega()), order);
    let ex = kx.add(&y_next).sub(&omega).sub(&kx_t);
    let ey = y_next.sub(&ky_t);
    let sy = part_scales(&[&lam_ky, &mu_s, &eg], order);
    let sx = add_scales(&sy, &part_scales(&[&kx, &omega, &kx_t], order));
    let sy = add_scales(&sy, &part_scales(&[&ky_t], order));
    Ok(Defect {
        e: Vec2::new(ex, ey),
        scale: [sx, sy],
    })
}

/// Constant matrix times a vector of series.
fn const_mul(a: [[Real; 2]; 2], v: &Vec2<TrigPoly>) -> Vec2<TrigPoly> {
    let row = |i: usize| v.0[0].scale(a[i][0]).add(&v.0[1].scale(a[i][1]));
    Vec2::new(row(0), row(1))
}

fn dot(a: &Vec2<TrigPoly>, b: &Vec2<TrigPoly>, order: usize) -> EpsSeries {
    a.0[0].mul(&b.0[0], order).add(&a.0[1].mul(&b.0[1], order))
}

/// The automatic-reducibility frame and everything derived from it.
#[derive(Clone, Debug)]
pub struct ReducibilityPack {
    /// `DK`.
    pub alpha: Vec2<TrigPoly>,
    /// `𝒩 = (DKᵀ DK)^{-1}`.
    pub ncal: EpsSeries,
    /// `M = [DK | J^{-1} DK 𝒩]`.
    pub m: Mat2<TrigPoly>,
    /// `(M∘T_ω)^{-1}`.
    pub minv_shift: Mat2<TrigPoly>,
    /// `Df∘K`.
    pub df: Mat2<TrigPoly>,
    /// `Γ = DKᵀ J^{-1} DK`, zero for `d = 1`.
    pub gamma: EpsSeries,
    /// Torsion `S`.
    pub s: EpsSeries,
    /// `Ã = (M∘T_ω)^{-1} D_μ f`.
    pub atilde: Vec2<TrigPoly>,
    pub lambda: ScalarSeries,
}

impl ReducibilityPack {
    /// `R = Df∘K M − (M∘T_ω) [[1, S], [0, λ]]` and per-entry scales.
    pub fn defect(&self, freq: &crate::fourier::Frequency) -> (Mat2<TrigPoly>, [[Vec<Real>; 2]; 2]) {
        let order = self.s.order();
        let lam = EpsSeries::from_scalar(&self.lambda);
        let one = EpsSeries::constant(TrigPoly::constant(1.0), order);
        let b = Mat2::new(one, self.s.clone(), EpsSeries::zeros(order), lam);
        let lhs = self.df.mul_mat(&self.m, order);
        let rhs = self.m.rotate(freq, 1).mul_mat(&b, order);
        let scale = |i: usize, j: usize| add_scales(&part_scales(&[lhs.entry(i, j)], order), &part_scales(&[rhs.entry(i, j)], order));
        (lhs.sub(&rhs), [[scale(0, 0), scale(0, 1)], [scale(1, 0), scale(1, 1)]])
    }

    /// Relative lead of [`defect`](Self::defect) over all four entries.
    pub fn defect_lead(&self, freq: &crate::fourier::Frequency, tol: Real) -> Option<usize> {
        let (r, scale) = self.defect(freq);
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .filter_map(|(i, j)| relative_lead(r.entry(i, j), &scale[i][j], tol))
            .min()
    }
}

/// Builds the frame of Algorithm 1 steps (3)–(9) at `order`.
pub fn build_reducibility(map: &MapSpec, k: &Embedding, order: usize) -> Result<ReducibilityPack> {
    let freq = map.freq();
    let kx = k.x.with_order(order);
    let ky = k.y.with_order(order);
    let one = EpsSeries::constant(TrigPoly::constant(1.0), order);
    let a1 = kx.derivative().add(&one);
    let a2 = ky.derivative();
    let ncal = a1.mul(&a1, order).add(&a2.mul(&a2, order)).recip(order)?;
    let alpha = Vec2::new(a1, a2);
    let j_alpha = const_mul(J_INV, &alpha);
    let v = Vec2::new(j_alpha.0[0].mul(&ncal, order), j_alpha.0[1].mul(&ncal, order));
    let m = Mat2::new(alpha.0[0].clone(), v.0[0].clone(), alpha.0[1].clone(), v.0[1].clone());
    m.leading_constant()
        .and_then(invert_real)
        .map_err(|_| Error::invariant("leading frame", "M_0 is not a constant invertible matrix"))?;
    let minv_shift = m.rotate(freq, 1).invert(order)?;

    let lambda = ScalarSeries::conformal_factor(map.alpha(), order);
    let lam = EpsSeries::from_scalar(&lambda);
    let edg = perturbation_term(&kx, &map.g().derivative(), order)?;
    let df = Mat2::new(one.sub(&edg), lam.clone(), edg.neg(), lam.clone());

    let p = Vec2::new(alpha.0[0].mul(&ncal, order), alpha.0[1].mul(&ncal, order));
    let gamma = dot(&alpha, &j_alpha, order);
    let df_jp = df.mul_vec(&const_mul(J_INV, &p), order);
    let ncal_t = ncal.rotate(freq, 1);
    let twist = ncal_t
        .mul(&gamma.rotate(freq, 1), order)
        .mul(&ncal_t, order)
        .mul_scalar(&lambda, order);
    let s = dot(&p.rotate(freq, 1), &df_jp, order).sub(&twist);
    let atilde = minv_shift.mul_vec(&Vec2::new(one.clone(), one), order);
    Ok(ReducibilityPack {
        alpha,
        ncal,
        m,
        minv_shift,
        df,
        gamma,
        s,
        atilde,
        lambda,
    })
}

/// Diagnostics of one doubling step `N → 2N`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub h: usize,
    pub n_from: usize,
    pub n_to: usize,
    pub rho: Real,
    pub gamma: Real,
    /// Relative lead of the error entering the step (≥ `N+1`).
    pub input_lead: Option<usize>,
    /// Relative lead of the error after the step (≥ `2N+1`).
    pub output_lead: Option<usize>,
    /// Relative lead of the reducibility defect (≥ `N+1`).
    pub reducibility_lead: Option<usize>,
    /// Largest relative residual of the linearized equation over all orders.
    pub audit: Real,
    /// Condition number of the leading averaged block.
    pub block_condition: Real,
    /// `e_h = ‖E‖_{ρ_h, γ̃_h}`.
    pub error_norm: Real,
    /// `d_h = ‖Δ‖_{ρ_{h+1}, γ̃_{h+1}}`.
    pub delta_norm: Real,
    /// `v_h = ‖DΔ‖_{ρ_{h+1}, γ̃_{h+1}}`.
    pub d_delta_norm: Real,
    /// `s_h = sup_{|ε| ≤ γ̃_{h+1}} |σ|` (majorant).
    pub sigma_norm: Real,
    /// `‖R‖_{ρ_h, γ̃_h}` over the four entries.
    pub reducibility_norm: Real,
}

fn solve_standard_series(rhs: &EpsSeries, freq: &crate::fourier::Frequency) -> Result<EpsSeries> {
    let coeffs = rhs
        .coeffs()
        .iter()
        .map(|c| solve_standard(c, freq))
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsSeries::from_coeffs(coeffs))
}

/// Output of the linear solve inside a step, kept for auditing.
struct Correction {
    w: Vec2<TrigPoly>,
    sigma: ScalarSeries,
    block_condition: Real,
}

/// Solves `M∘T_ω ([[1, S], [0, λ]] W − W∘T_ω) + D_μ f σ = −E_win`.
fn solve_linearized(
    map: &MapSpec,
    pack: &ReducibilityPack,
    e_win: &Vec2<TrigPoly>,
    order: usize,
) -> Result<Correction> {
    let freq = map.freq();
    let alpha = map.alpha();
    let et = pack.minv_shift.mul_vec(e_win, order);
    let (et1, et2) = (et.first(), et.second());
    let (at1, at2) = (pack.atilde.first(), pack.atilde.second());
    let s = &pack.s;

    let b_a = solve_parametric_formal(&et2.mean_free().neg(), alpha, freq)?;
    let b_b = solve_parametric_formal(&at2.mean_free().neg(), alpha, freq)?;

    // averages: (λ − 1) W̄_2 = −ε^α W̄_2
    let block = Mat2::new(
        s.mean(),
        s.mul(&b_b, order).mean().add(&at1.mean()),
        ScalarSeries::monomial(alpha, -1.0, order),
        at2.mean(),
    );
    let rhs = Vec2::new(
        s.mul(&b_a, order).mean().add(&et1.mean()).neg(),
        et2.mean().neg(),
    );
    let block_condition = condition_real(block.leading_constant()?);
    let avg = block.invert(order)?.mul_vec(&rhs, order);
    let (w2_bar, sigma) = (avg.0[0].clone(), avg.0[1].clone());

    let w2 = b_a.add(&b_b.mul_scalar(&sigma, order)).add_scalar(&w2_bar);
    let rhs1 = s
        .mul(&w2, order)
        .mean_free()
        .add(&et1.mean_free())
        .add(&at1.mean_free().mul_scalar(&sigma, order))
        .neg();
    let w1_ring = solve_standard_series(&rhs1, freq)?;

    let m0_inv = invert_real(pack.m.leading_constant()?)?;
    let first_row = |x: &EpsSeries, y: &EpsSeries| x.scale(m0_inv[0][0]).add(&y.scale(m0_inv[0][1]));
    let m = &pack.m;
    let denom = first_row(m.entry(0, 0), m.entry(1, 0)).mean();
    let moved = m.mul_vec(&Vec2::new(w1_ring.clone(), w2.clone()), order);
    let numer = first_row(moved.first(), moved.second()).mean();
    let w1_bar = numer.mul(&denom.recip(order)?, order).neg();
    let w1 = w1_ring.add_scalar(&w1_bar);

    Ok(Correction {
        w: Vec2::new(w1, w2),
        sigma,
        block_condition,
    })
}

/// Largest per-order relative residual of the linearized equation.
fn linear_audit(
    map: &MapSpec,
    pack: &ReducibilityPack,
    corr: &Correction,
    e_win: &Vec2<TrigPoly>,
    order: usize,
) -> Real {
    let freq = map.freq();
    let (w1, w2) = (corr.w.first(), corr.w.second());
    let x = Vec2::new(
        w1.add(&pack.s.mul(w2, order)).sub(&w1.rotate(freq, 1)),
        w2.mul_scalar(&pack.lambda, order).sub(&w2.rotate(freq, 1)),
    );
    let mx = pack.m.rotate(freq, 1).mul_vec(&x, order);
    let sig = EpsSeries::from_scalar(&corr.sigma);
    (0..2)
        .map(|i| {
            let res = mx.0[i].add(&sig).add(&e_win.0[i]);
            let scale = part_scales(&[&mx.0[i], &sig, &e_win.0[i]], order);
            relative_size(&res, &scale, 0..=order)
        })
        .fold(0.0, Real::max)
}

fn splice(old: &EpsSeries, new: &EpsSeries, n: usize) -> EpsSeries {
    let coeffs = (0..=new.order())
        .map(|j| if j <= n { old.coeff_or_zero(j) } else { new.coeff(j).clone() })
        .collect();
    EpsSeries::from_coeffs(coeffs)
}

fn vec_ball_norm(v: &Vec2<TrigPoly>, rho: Real, gamma: Real) -> Real {
    v.first().ball_norm(rho, gamma).max(v.second().ball_norm(rho, gamma))
}

/// One step of Algorithm 1: from a state exact through order `N` to one
/// exact through `2N`. Orders `0..=N` are copied unchanged.
pub fn newton_step(state: &NewtonState) -> Result<(NewtonState, StepReport)> {
    let map = &state.map;
    let freq = map.freq();
    let n = state.n();
    if n == 0 {
        return Err(Error::InvalidInput("newton_step needs N ≥ 1".into()));
    }
    let order = 2 * n;
    let k = state.k.with_order(order);
    let mu = state.mu.with_order(order);

    let defect = invariance_error(map, &k, &mu, order)?;
    let input_lead = defect.lead(LEAD_TOLERANCE);
    if matches!(input_lead, Some(l) if l <= n) {
        return Err(Error::invariant(
            "input defect order",
            format!("error has lead {input_lead:?}, expected ≥ {}", n + 1),
        ));
    }
    let e_win = defect.e.window(n as isize, order)?;

    let pack = build_reducibility(map, &k, order)?;
    let (r, _) = pack.defect(freq);
    let reducibility_lead = pack.defect_lead(freq, LEAD_TOLERANCE);
    if matches!(reducibility_lead, Some(l) if l <= n) {
        return Err(Error::invariant(
            "reducibility defect order",
            format!("R has lead {reducibility_lead:?}, expected ≥ {}", n + 1),
        ));
    }

    let corr = solve_linearized(map, &pack, &e_win, order)?;
    let audit = linear_audit(map, &pack, &corr, &e_win, order);
    let delta = pack.m.mul_vec(&corr.w, order).window(n as isize, order)?;
    let sigma = corr.sigma.window(n as isize, order)?;

    let new_k = Embedding {
        x: splice(&state.k.x, delta.first(), n),
        y: splice(&state.k.y, delta.second(), n),
    };
    let new_mu = ScalarSeries::from_coeffs(
        (0..=order)
            .map(|j| if j <= n { state.mu.coeff_or_zero(j) } else { *sigma.coeff(j) })
            .collect(),
    );

    for j in n + 1..=order {
        let c = new_k.x.coeff(j);
        if c.mean().abs() > NORMALIZATION_TOLERANCE * c.norm_rho(0.0) {
            return Err(Error::invariant(
                "normalization",
                format!("mean of K_x at order {j} is {:e}", c.mean()),
            ));
        }
    }

    let post = invariance_error(map, &new_k, &new_mu, order + 1)?;
    let output_lead = post.lead(LEAD_TOLERANCE);
    if matches!(output_lead, Some(l) if l <= order) {
        return Err(Error::invariant(
            "quadratic defect order",
            format!("new error has lead {output_lead:?}, expected ≥ {}", order + 1),
        ));
    }

    let sched = state.schedule;
    let next = sched.advance(map);
    let report = StepReport {
        h: sched.h,
        n_from: n,
        n_to: order,
        rho: sched.rho,
        gamma: sched.gamma,
        input_lead,
        output_lead,
        reducibility_lead,
        audit,
        block_condition: corr.block_condition,
        error_norm: vec_ball_norm(&defect.e, sched.rho, sched.gamma),
        delta_norm: vec_ball_norm(&delta, next.rho, next.gamma),
        d_delta_norm: vec_ball_norm(
            &Vec2::new(delta.first().derivative(), delta.second().derivative()),
            next.rho,
            next.gamma,
        ),
        sigma_norm: sigma.ball_norm(next.gamma),
        reducibility_norm: r
            .0
            .iter()
            .flatten()
            .map(|e| e.ball_norm(sched.rho, sched.gamma))
            .fold(0.0, Real::max),
    };
    Ok((
        NewtonState {
            map: map.clone(),
            k: new_k,
            mu: new_mu,
            schedule: next,
        },
        report,
    ))
}

/// Result of [`run_doubling`].
#[derive(Clone, Debug)]
pub struct Doubling {
    pub state: NewtonState,
    pub steps: Vec<StepReport>,
}

/// Seeds with the direct expansion through `n0` and applies `h` steps,
/// ending at order `2^h n0`.
pub fn run_doubling(map: &MapSpec, n0: usize, h: usize, rho0: Real) -> Result<Doubling> {
    if n0 == 0 {
        return Err(Error::InvalidInput("N0 must be at least 1".into()));
    }
    if !(rho0 > 0.0) {
        return Err(Error::InvalidInput(format!("rho must be positive (got {rho0})")));
    }
    let seed = direct_expansion(map, n0)?;
    let mut state = NewtonState::from_hull(&seed, map, rho0);
    let mut steps = Vec::with_capacity(h);
    for _ in 0..h {
        let (next, report) = newton_step(&state)?;
        steps.push(report);
        state = next;
    }
    Ok(Doubling { state, steps })
}

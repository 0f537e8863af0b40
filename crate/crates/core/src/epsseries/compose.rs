use std::f64::consts::PI;

use super::EpsSeries;
use crate::error::{Error, Result};
use crate::fourier::TrigPoly;
use crate::scalar::{Cplx, Real};

/// Complex-valued trigonometric polynomial on the band of modes
/// `lo..lo + len`. Single-mode compositions `V_k(θ + u)` are not real, so
/// they live here until the `±k` pair is folded back into a [`TrigPoly`].
#[derive(Clone, Debug)]
struct ModeBand {
    lo: i64,
    amps: Vec<Cplx>,
}

impl ModeBand {
    fn single(k: i64, amp: Cplx) -> Self {
        Self { lo: k, amps: vec![amp] }
    }

    fn empty_at(lo: i64) -> Self {
        Self { lo, amps: Vec::new() }
    }

    fn hi(&self) -> i64 {
        self.lo + self.amps.len() as i64 - 1
    }

    fn get(&self, k: i64) -> Cplx {
        let i = k - self.lo;
        if i < 0 {
            return Cplx::new(0.0, 0.0);
        }
        self.amps.get(i as usize).copied().unwrap_or(Cplx::new(0.0, 0.0))
    }

    /// `self += z · (band ⊛ p)` where `p` is real.
    fn accumulate_product(&mut self, band: &ModeBand, p: &TrigPoly, z: Cplx) {
        if band.amps.is_empty() || p.is_zero() {
            return;
        }
        let d = p.degree() as i64;
        let lo = band.lo - d;
        let hi = band.hi() + d;
        self.ensure_range(lo, hi);
        let p_modes: Vec<Cplx> = (-d..=d).map(|j| p.mode(j) * z).collect();
        for (i, b) in band.amps.iter().enumerate() {
            if b.re == 0.0 && b.im == 0.0 {
                continue;
            }
            let base = (band.lo - d - self.lo) as usize + i;
            for (j, pm) in p_modes.iter().enumerate() {
                self.amps[base + j] += b * pm;
            }
        }
    }

    fn ensure_range(&mut self, lo: i64, hi: i64) {
        if self.amps.is_empty() {
            self.lo = lo;
            self.amps = vec![Cplx::new(0.0, 0.0); (hi - lo + 1) as usize];
            return;
        }
        if lo < self.lo {
            let extra = (self.lo - lo) as usize;
            let mut amps = vec![Cplx::new(0.0, 0.0); extra];
            amps.extend_from_slice(&self.amps);
            self.amps = amps;
            self.lo = lo;
        }
        if hi > self.hi() {
            let extra = (hi - self.hi()) as usize;
            self.amps.extend(std::iter::repeat_n(Cplx::new(0.0, 0.0), extra));
        }
    }
}

/// Incremental evaluator of the ε-coefficients `S_n` of `g(θ + u_ε(θ))`.
///
/// For each mode `V_k = ĝ_k e^{2πikθ}` the coefficients `S_n^k` of
/// `V_k(θ + u_ε)` obey
///
/// ```text
/// (n+1) S_{n+1}^k = 2πik Σ_{l=0}^{n} (l+1) u_{l+1} S_{n−l}^k,   S_0^k = V_k,
/// ```
///
/// which follows from `d/dε V_k(θ + u_ε) = 2πik u_ε' V_k(θ + u_ε)`. Only
/// `k > 0` is computed; the `−k` contribution is the complex conjugate
/// function. Modes are reduced in ascending `k`.
///
/// Pushing `u_m` extends the known layers from `S_0..S_{m−1}` to
/// `S_0..S_m`, so an order-`N` expansion costs one recursion layer per order.
#[derive(Clone, Debug)]
pub struct PerturbationComposer {
    u: Vec<TrigPoly>,
    bands: Vec<Vec<ModeBand>>,
    layers: Vec<TrigPoly>,
}

impl PerturbationComposer {
    pub fn new(g: &TrigPoly) -> Self {
        let bands = (1..=g.degree() as i64)
            .map(|k| vec![ModeBand::single(k, g.mode(k))])
            .collect();
        Self {
            u: Vec::new(),
            bands,
            layers: vec![g.clone()],
        }
    }

    /// Number of coefficients `S_n` available.
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer(&self, n: usize) -> &TrigPoly {
        &self.layers[n]
    }

    pub fn layers(&self) -> &[TrigPoly] {
        &self.layers
    }

    /// Supplies `u_m` (with `m` = current [`len`](Self::len)) and returns the
    /// newly computed `S_m`.
    pub fn push(&mut self, u_next: TrigPoly) -> &TrigPoly {
        self.u.push(u_next);
        let m = self.layers.len();
        debug_assert_eq!(self.u.len(), m);
        let mut folded: Vec<Cplx> = Vec::new();
        for (idx, bands_k) in self.bands.iter_mut().enumerate() {
            let k = idx as i64 + 1;
            let mut next = ModeBand::empty_at(k);
            for l in 0..m {
                // (l+1) u_{l+1} S^k_{m−1−l} scaled by 2πik / m
                let z = Cplx::new(0.0, 2.0 * PI * k as Real * (l + 1) as Real / m as Real);
                next.accumulate_product(&bands_k[m - 1 - l], &self.u[l], z);
            }
            fold_into(&mut folded, &next);
            bands_k.push(next);
        }
        self.layers.push(TrigPoly::from_modes(folded));
        self.layers.last().expect("layer just pushed")
    }
}

/// Adds `band + conj-reflect(band)` to the nonnegative-mode amplitudes.
fn fold_into(out: &mut Vec<Cplx>, band: &ModeBand) {
    if band.amps.is_empty() {
        return;
    }
    let top = band.lo.abs().max(band.hi().abs()) as usize;
    if out.len() <= top {
        out.resize(top + 1, Cplx::new(0.0, 0.0));
    }
    for (n, slot) in out.iter_mut().enumerate() {
        let n = n as i64;
        *slot += band.get(n) + band.get(-n).conj();
    }
}

/// The ε-expansion `S_n`, `n ≤ out_order`, of `g(θ + u_ε(θ))`.
///
/// Requires `u_0 = 0`; each `S_n` then has degree at most `deg g · (n+1)`
/// when `deg u_n ≤ deg g · n`.
pub fn compose_perturbation(u: &EpsSeries, g: &TrigPoly, out_order: usize) -> Result<EpsSeries> {
    if !u.coeff(0).is_zero() {
        return Err(Error::NonZeroBase);
    }
    let mut composer = PerturbationComposer::new(g);
    for m in 1..=out_order {
        composer.push(u.coeff_or_zero(m));
    }
    Ok(EpsSeries::from_coeffs(composer.layers().to_vec()))
}

//! s-ordered characteristic functions on harmonic-resolved polar grids,
//! the Fourier pair to quasiprobabilities, Weyl reconstruction and pairing
//! integrals.
//!
//! A characteristic function of a phase-covariant image of a Fock-space
//! state is stored as angular harmonics: `χ(r e^{iθ}) = Σ_k f_k(r) e^{ikθ}`,
//! with harmonic `k` collecting the matrix elements `ρ_{mp}` with `p − m = k`.
//! Every angular integral is then exact and only one-dimensional radial
//! Gauss–Legendre quadrature carries error.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{FockDim, TruncatedState};
use crate::linalg::CMat;
use crate::special::{bessel_j_sequence, displacement_table, gauss_legendre, ln_factorials};
use crate::{Error, Result};

/// Largest source tail accepted by [`char_fn`].
pub const MAX_SOURCE_TAIL: f64 = 1e-6;

/// Ordering parameter `s ∈ [−1, 1]`: P at 1, Wigner at 0, Q at −1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OrderingParam(f64);

impl OrderingParam {
    pub const P: OrderingParam = OrderingParam(1.0);
    pub const WIGNER: OrderingParam = OrderingParam(0.0);
    pub const Q: OrderingParam = OrderingParam(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::OrderingOutOfRange(s));
        }
        Ok(Self(s))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The dual ordering `−s`.
    pub fn dual(self) -> Self {
        Self(-self.0)
    }
}

/// Radial Gauss–Legendre nodes on `[0, R]` plus the number of retained
/// angular harmonics `k ∈ [−K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cutoff: f64,
    max_harmonic: usize,
}

impl PolarGrid {
    pub fn new(cutoff: f64, radial_nodes: usize, max_harmonic: usize) -> Result<Self> {
        if !(cutoff > 0.0) || radial_nodes == 0 {
            return Err(Error::InvalidChannel("polar grid needs R > 0 and at least one node"));
        }
        let (nodes, weights) = gauss_legendre(radial_nodes, 0.0, cutoff);
        Ok(Self {
            nodes,
            weights,
            cutoff,
            max_harmonic,
        })
    }

    /// Default grid for a truncation: `R = 8`, 200 nodes, `K = N`.
    pub fn for_dim(dim: FockDim) -> Self {
        Self::new(8.0, 200, dim.get()).expect("default grid is valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    pub fn harmonic_count(&self) -> usize {
        2 * self.max_harmonic + 1
    }

    /// Same harmonic content with cutoff and node count both doubled.
    pub fn doubled(&self) -> Self {
        Self::new(self.cutoff * 2.0, self.nodes.len() * 2, self.max_harmonic)
            .expect("doubling a valid grid")
    }
}

/// Phase-covariant Gaussian action on the symmetric-ordered characteristic
/// function: `χ₀(ξ) ↦ χ₀(scale·ξ)·exp(−noise·|ξ|²/2)`.
///
/// Every map in the channel zoo compiles to one of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussAction {
    pub scale: f64,
    pub noise: f64,
}

impl GaussAction {
    pub const IDENTITY: GaussAction = GaussAction {
        scale: 1.0,
        noise: 0.0,
    };

    /// `self` followed by `next`.
    pub fn then(self, next: GaussAction) -> GaussAction {
        GaussAction {
            scale: self.scale * next.scale,
            noise: self.noise * next.scale * next.scale + next.noise,
        }
    }

    /// Maps the Gaussian exponent `c` of `poly·exp(c|ξ|²/2)` at `s = 0`.
    pub fn map_exponent(self, c: f64) -> f64 {
        self.scale * self.scale * c - self.noise
    }

    /// Width of the image of a thermal-form Gaussian `χ₀ = exp(−v|ξ|²/2)`.
    pub fn map_width(self, v: f64) -> f64 {
        self.scale * self.scale * v + self.noise
    }

    /// Hilbert–Schmidt adjoint up to the positive factor `scale⁻²`, or `None`
    /// for the pinch map.
    pub fn adjoint(self) -> Option<GaussAction> {
        if self.scale == 0.0 {
            return None;
        }
        let inv = 1.0 / self.scale;
        Some(GaussAction {
            scale: inv,
            noise: self.noise * inv * inv,
        })
    }
}

/// What a characteristic function was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum CharFnSource {
    /// A truncated Fock-space operator.
    Fock(TruncatedState),
    /// The Gaussian `χ₀ = exp(−v|ξ|²/2)` (any real `v`).
    Gaussian { v: f64 },
}

/// Symbolic characteristic function: a source plus a compiled action.
/// Values are evaluated on demand at any radius, which is what lets scaled
/// arguments `χ₀(aξ)` be sampled exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFn {
    source: CharFnSource,
    action: GaussAction,
}

impl CharFn {
    pub fn of_state(rho: &TruncatedState) -> Self {
        Self {
            source: CharFnSource::Fock(rho.clone()),
            action: GaussAction::IDENTITY,
        }
    }

    pub fn gaussian(v: f64) -> Self {
        Self {
            source: CharFnSource::Gaussian { v },
            action: GaussAction::IDENTITY,
        }
    }

    pub fn source(&self) -> &CharFnSource {
        &self.source
    }

    pub fn action(&self) -> GaussAction {
        self.action
    }

    pub fn with_action(&self, action: GaussAction) -> Self {
        Self {
            source: self.source.clone(),
            action: self.action.then(action),
        }
    }

    /// Gaussian exponent `c` at `s = 0` such that `|χ₀| ≲ poly·exp(c|ξ|²/2)`.
    pub fn exponent(&self) -> f64 {
        let c0 = match &self.source {
            CharFnSource::Fock(_) => -1.0,
            CharFnSource::Gaussian { v } => -v,
        };
        self.action.map_exponent(c0)
    }

    /// Highest harmonic carried by the source.
    pub fn max_harmonic(&self) -> usize {
        match &self.source {
            CharFnSource::Fock(rho) => rho.dim().get() - 1,
            CharFnSource::Gaussian { .. } => 0,
        }
    }

    pub fn source_tail(&self) -> f64 {
        match &self.source {
            CharFnSource::Fock(rho) => rho.tail(),
            CharFnSource::Gaussian { .. } => 0.0,
        }
    }

    /// Harmonics `f_k(r)` for `k ∈ [−kmax, kmax]` of `χ₀` written into `out`
    /// (length `2·kmax + 1`).
    pub(crate) fn harmonics_at(&self, r: f64, kmax: usize, ln_fact: &[f64], out: &mut [Complex64]) {
        let damping = (-self.action.noise * r * r / 2.0).exp();
        self.source_harmonics_at(r, kmax, ln_fact, out);
        for v in out.iter_mut() {
            *v *= damping;
        }
    }

    /// The harmonics without the added-noise factor `exp(−y r²/2)`.
    fn source_harmonics_at(&self, r: f64, kmax: usize, ln_fact: &[f64], out: &mut [Complex64]) {
        let zero = Complex64::new(0.0, 0.0);
        out.iter_mut().for_each(|v| *v = zero);
        let a = self.action.scale;
        let rs = a.abs() * r;
        match &self.source {
            CharFnSource::Gaussian { v } => {
                out[kmax] = Complex64::new((-v * rs * rs / 2.0).exp(), 0.0);
            }
            CharFnSource::Fock(rho) => {
                let n = rho.dim().get();
                let table = displacement_table(n, n, rs, ln_fact);
                // f_k = Σ_{p−m=k} ρ_{mp} ⟨p|D(r)|m⟩
                for m in 0..n {
                    for p in 0..n {
                        let k = p as isize - m as isize;
                        if k.unsigned_abs() > kmax {
                            continue;
                        }
                        let d = table[p * n + m];
                        if d == 0.0 {
                            continue;
                        }
                        out[(k + kmax as isize) as usize] += rho.get(m, p) * d;
                    }
                }
                if a < 0.0 {
                    for (idx, v) in out.iter_mut().enumerate() {
                        if (idx as isize - kmax as isize).rem_euclid(2) == 1 {
                            *v = -*v;
                        }
                    }
                }
            }
        }
    }

    /// `ln max_k |f_k(r)|`, safe where the added-noise factor alone would
    /// overflow.
    pub(crate) fn ln_envelope(&self, r: f64, ln_fact: &[f64], buf: &mut [Complex64]) -> f64 {
        let kmax = (buf.len() - 1) / 2;
        let ln_gauss = match &self.source {
            CharFnSource::Gaussian { v } => {
                let rs = self.action.scale * r;
                -v * rs * rs / 2.0
            }
            CharFnSource::Fock(_) => {
                self.source_harmonics_at(r, kmax, ln_fact, buf);
                buf.iter().map(|z| z.norm()).fold(0.0, f64::max).ln()
            }
        };
        ln_gauss - self.action.noise * r * r / 2.0
    }

    /// `χ_s(ξ)` at an arbitrary point.
    pub fn eval(&self, xi: Complex64, s: OrderingParam) -> Complex64 {
        let kmax = self.max_harmonic();
        let lf = ln_factorials(2 * kmax + 4);
        let mut h = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
        let r = xi.norm();
        self.harmonics_at(r, kmax, &lf, &mut h);
        let theta = xi.arg();
        let ordering = (s.0 * r * r / 2.0).exp();
        h.iter()
            .enumerate()
            .map(|(idx, f)| {
                let k = idx as f64 - kmax as f64;
                f * Complex64::from_polar(1.0, k * theta)
            })
            .sum::<Complex64>()
            * ordering
    }

    fn sample(&self, grid: &PolarGrid, s: f64) -> Vec<Complex64> {
        let kmax = grid.max_harmonic;
        let hc = grid.harmonic_count();
        let nn = grid.nodes.len();
        let lf = ln_factorials(2 * self.max_harmonic().max(kmax) + 4);
        let mut values = vec![Complex64::new(0.0, 0.0); hc * nn];
        let mut h = vec![Complex64::new(0.0, 0.0); hc];
        for (i, &r) in grid.nodes.iter().enumerate() {
            self.harmonics_at(r, kmax, &lf, &mut h);
            let ordering = (s * r * r / 2.0).exp();
            for k in 0..hc {
                values[k * nn + i] = h[k] * ordering;
            }
        }
        values
    }
}

/// Sampled `χ_s` on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFnGrid {
    ordering: OrderingParam,
    grid: PolarGrid,
    values: Vec<Complex64>,
    exponent: f64,
    source_tail: f64,
    charfn: CharFn,
}

impl CharFnGrid {
    pub fn sample(charfn: CharFn, s: OrderingParam, grid: PolarGrid) -> Self {
        let values = charfn.sample(&grid, s.0);
        Self {
            ordering: s,
            exponent: charfn.exponent() + s.0,
            source_tail: charfn.source_tail(),
            grid,
            values,
            charfn,
        }
    }

    pub fn ordering(&self) -> OrderingParam {
        self.ordering
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Exponent `c` at this grid's ordering.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn source_tail(&self) -> f64 {
        self.source_tail
    }

    pub fn charfn(&self) -> &CharFn {
        &self.charfn
    }

    /// `f_k(r_i)` for harmonic `k`; zero outside the retained range.
    pub fn value(&self, k: isize, node: usize) -> Complex64 {
        let kmax = self.grid.max_harmonic as isize;
        if k.abs() > kmax {
            return Complex64::new(0.0, 0.0);
        }
        self.values[(k + kmax) as usize * self.grid.nodes.len() + node]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `χ_s(0)`, equal to the source trace.
    pub fn at_origin(&self) -> Complex64 {
        self.charfn.eval(Complex64::new(0.0, 0.0), self.ordering)
    }

    /// Re-evaluates the same function with `action` applied after the
    /// current one, keeping this grid's ordering.
    pub fn with_action(&self, action: GaussAction) -> Self {
        Self::sample(self.charfn.with_action(action), self.ordering, self.grid.clone())
    }

    fn resampled(&self, grid: PolarGrid) -> Self {
        Self::sample(self.charfn.clone(), self.ordering, grid)
    }
}

/// `χ_s(ξ; ρ)` sampled on `grid`.
pub fn char_fn(rho: &TruncatedState, s: OrderingParam, grid: &PolarGrid) -> Result<CharFnGrid> {
    if rho.tail().abs() > MAX_SOURCE_TAIL {
        return Err(Error::TailTooLarge(rho.tail()));
    }
    Ok(CharFnGrid::sample(CharFn::of_state(rho), s, grid.clone()))
}

/// Multiplies every sample by `exp((s_new − s_old)|ξ|²/2)`.
pub fn convert_ordering(chi: &CharFnGrid, s_new: OrderingParam) -> CharFnGrid {
    let delta = s_new.0 - chi.ordering.0;
    let nn = chi.grid.nodes.len();
    let factors: Vec<f64> = chi.grid.nodes.iter().map(|r| (delta * r * r / 2.0).exp()).collect();
    let values = chi
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| v * factors[idx % nn])
        .collect();
    CharFnGrid {
        ordering: s_new,
        grid: chi.grid.clone(),
        values,
        exponent: chi.exponent + delta,
        source_tail: chi.source_tail,
        charfn: chi.charfn.clone(),
    }
}

/// Quasiprobability samples on a polar α-grid (diagnostics and plotting).
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiprobGrid {
    pub ordering: OrderingParam,
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    /// `values[j * angles.len() + l]` is `Λ_s(radii[j] e^{i angles[l]})`.
    pub values: Vec<f64>,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

impl QuasiprobGrid {
    pub fn points(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let na = self.angles.len();
        self.values.iter().enumerate().map(move |(idx, &v)| {
            let alpha = Complex64::from_polar(self.radii[idx / na], self.angles[idx % na]);
            (alpha, v)
        })
    }

    /// `∫Λ d²α` by the α-grid's radial rule and the angular trapezoid rule.
    pub fn integral(&self, radial_weights: &[f64]) -> f64 {
        let na = self.angles.len();
        let dphi = 2.0 * PI / na as f64;
        let mut total = 0.0;
        for (j, (&rj, &wj)) in self.radii.iter().zip(radial_weights).enumerate() {
            let ring: f64 = self.values[j * na..(j + 1) * na].iter().sum();
            total += wj * rj * ring * dphi;
        }
        total
    }
}

/// `Λ_s(α) = π⁻² ∫ exp(αξ* − α*ξ) χ_s(ξ) d²ξ` on the radial nodes of
/// `alpha_grid` and `2K+1` equally spaced angles.
pub fn quasiprob_from_charfn(chi: &CharFnGrid, alpha_grid: &PolarGrid) -> Result<QuasiprobGrid> {
    if chi.exponent >= 0.0 {
        return Err(Error::DivergentReconstruction {
            exponent: chi.exponent,
        });
    }
    let kmax = chi.grid.max_harmonic;
    let nn = chi.grid.nodes.len();
    let na = alpha_grid.harmonic_count();
    let angles: Vec<f64> = (0..na).map(|l| 2.0 * PI * l as f64 / na as f64).collect();
    let radii = alpha_grid.nodes.clone();
    let mut values = Vec::with_capacity(radii.len() * na);
    let mut max_imag: f64 = 0.0;
    for &rho in &radii {
        // I_k = Σ_i w_i r_i f_k(r_i) J_k(2 ρ r_i)
        let mut moments = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
        for i in 0..nn {
            let r = chi.grid.nodes[i];
            let wr = chi.grid.weights[i] * r;
            let j = bessel_j_sequence(kmax, 2.0 * rho * r);
            for (idx, m) in moments.iter_mut().enumerate() {
                let k = idx as isize - kmax as isize;
                let jk = if k >= 0 {
                    j[k as usize]
                } else if k % 2 == 0 {
                    j[(-k) as usize]
                } else {
                    -j[(-k) as usize]
                };
                *m += chi.values[idx * nn + i] * (wr * jk);
            }
        }
        for &phi in &angles {
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, m) in moments.iter().enumerate() {
                let k = idx as f64 - kmax as f64;
                acc += m * Complex64::from_polar(1.0, k * phi);
            }
            acc *= 2.0 / PI;
            max_imag = max_imag.max(acc.im.abs());
            values.push(acc.re);
        }
    }
    Ok(QuasiprobGrid {
        ordering: chi.ordering,
        radii,
        angles,
        values,
        max_imag,
    })
}

/// Knobs shared by every quadrature pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Minimum radial cutoff `R`.
    pub cutoff: f64,
    /// Node count at the minimum cutoff; scaled proportionally when the
    /// cutoff grows.
    pub radial_nodes: usize,
    /// Largest relative shift tolerated under grid doubling.
    pub doubling_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            cutoff: 8.0,
            radial_nodes: 200,
            doubling_tol: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn doubled(self) -> Self {
        Self {
            cutoff: self.cutoff * 2.0,
            radial_nodes: self.radial_nodes * 2,
            ..self
        }
    }

    pub(crate) fn grid_for(&self, needed_cutoff: f64, max_harmonic: usize) -> PolarGrid {
        let cutoff = self.cutoff.max(needed_cutoff);
        let nodes = ((self.radial_nodes as f64) * cutoff / self.cutoff).ceil() as usize;
        PolarGrid::new(cutoff, nodes.max(8), max_harmonic).expect("valid grid")
    }
}

const ENVELOPE_STEP: f64 = 0.25;
const ENVELOPE_MAX_R: f64 = 80.0;
const LN_ENVELOPE_FLOOR: f64 = -41.4465; // ln 1e-18

/// Smallest cutoff beyond which the integrand envelope stays below
/// `1e−18·max(1, peak)` on a 0.25-spaced scan; `ln_envelope` returns the
/// logarithm of the envelope.
pub(crate) fn envelope_cutoff(mut ln_envelope: impl FnMut(f64) -> f64) -> f64 {
    let steps = (ENVELOPE_MAX_R / ENVELOPE_STEP) as usize;
    let samples: Vec<f64> = (0..=steps)
        .map(|j| ln_envelope(j as f64 * ENVELOPE_STEP))
        .collect();
    let peak = samples.iter().cloned().fold(0.0, f64::max);
    let floor = LN_ENVELOPE_FLOOR + peak;
    let mut cutoff = ENVELOPE_MAX_R;
    for j in (0..=steps).rev() {
        if !(samples[j] < floor) {
            break;
        }
        cutoff = j as f64 * ENVELOPE_STEP;
    }
    cutoff + 1.0
}

fn ln_kernel(dim: usize, r: f64, lf: &[f64]) -> f64 {
    displacement_table(dim, dim, r, lf)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .ln()
}

/// Weyl inversion of `χ₀` samples on `grid` into an `n×n` matrix:
/// `ρ_nq = 2(−1)^{n−q} ∫ f_{q−n}(r) ⟨n|D(r)|q⟩ r dr`.
fn weyl_inversion(values: &[Complex64], grid: &PolarGrid, n: usize) -> CMat {
    let kmax = grid.max_harmonic as isize;
    let nn = grid.nodes.len();
    let lf = ln_factorials(2 * n + 4);
    let mut out = CMat::zeros(n, n);
    for (i, (&r, &w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
        let table = displacement_table(n, n, r, &lf);
        let wr = w * r;
        for row in 0..n {
            for col in 0..n {
                let k = col as isize - row as isize;
                if k.abs() > kmax {
                    continue;
                }
                let f = values[(k + kmax) as usize * nn + i];
                out[(row, col)] += f * (wr * table[row * n + col]);
            }
        }
    }
    for row in 0..n {
        for col in 0..n {
            let sign = if (row + col) % 2 == 0 { 2.0 } else { -2.0 };
            out[(row, col)] *= sign;
        }
    }
    out
}

fn hermitian_state(m: CMat) -> TruncatedState {
    let n = m.rows();
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let tail = 1.0 - h.trace().re;
    TruncatedState::from_parts(h, tail)
}

fn doubling_shift(a: &CMat, b: &CMat) -> f64 {
    let scale = a.max_abs().max(1.0);
    a.sub(b).max_abs() / scale
}

/// Weyl inversion `ρ = π⁻¹ ∫ χ₀(ξ) D(−ξ) d²ξ` on the grid of `chi`, checked
/// against a doubled grid.
pub fn reconstruct_state(chi: &CharFnGrid, dim: FockDim) -> Result<TruncatedState> {
    reconstruct_state_with_tol(chi, dim, QuadratureConfig::default().doubling_tol)
}

pub fn reconstruct_state_with_tol(
    chi: &CharFnGrid,
    dim: FockDim,
    doubling_tol: f64,
) -> Result<TruncatedState> {
    let exponent = chi.charfn.exponent();
    if exponent >= 0.0 {
        return Err(Error::DivergentReconstruction { exponent });
    }
    let chi0 = convert_ordering(chi, OrderingParam::WIGNER);
    let n = dim.get();
    let first = weyl_inversion(&chi0.values, &chi0.grid, n);
    let refined = chi0.resampled(chi0.grid.doubled());
    let second = weyl_inversion(&refined.values, &refined.grid, n);
    let shift = doubling_shift(&first, &second);
    if shift > doubling_tol {
        return Err(Error::QuadratureUnderresolved { shift });
    }
    Ok(hermitian_state(first))
}

/// Reconstruction with an automatically sized grid: the cutoff is chosen
/// from the envelope of `|χ₀|·max|⟨n|D|q⟩|`.
pub fn reconstruct_auto(cf: &CharFn, dim: FockDim, quad: &QuadratureConfig) -> Result<TruncatedState> {
    let exponent = cf.exponent();
    if exponent >= 0.0 {
        return Err(Error::DivergentReconstruction { exponent });
    }
    let n = dim.get();
    let kmax = cf.max_harmonic().min(n - 1);
    let lf = ln_factorials(2 * (n.max(cf.max_harmonic() + 1)) + 4);
    let mut buf = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
    let needed = envelope_cutoff(|r| cf.ln_envelope(r, &lf, &mut buf) + ln_kernel(n, r, &lf));
    let grid = quad.grid_for(needed, kmax);
    let chi = CharFnGrid::sample(cf.clone(), OrderingParam::WIGNER, grid);
    reconstruct_state_with_tol(&chi, dim, quad.doubling_tol)
}

/// `Tr(A·B) = 2 ∫ Σ_k (−1)^k f^A_k(r) f^B_{−k}(r) r dr` for two symbolic
/// characteristic functions, with the orderings `s` on `A` and `−s` on `B`
/// carried explicitly.
pub fn trace_product(a: &CharFn, b: &CharFn, s: OrderingParam, quad: &QuadratureConfig) -> Result<f64> {
    let kmax = a.max_harmonic().min(b.max_harmonic());
    let lf = ln_factorials(2 * (a.max_harmonic().max(b.max_harmonic()) + 1) + 4);
    let mut buf_a = vec![Complex64::new(0.0, 0.0); 2 * a.max_harmonic() + 1];
    let mut buf_b = vec![Complex64::new(0.0, 0.0); 2 * b.max_harmonic() + 1];
    let needed = envelope_cutoff(|r| a.ln_envelope(r, &lf, &mut buf_a) + b.ln_envelope(r, &lf, &mut buf_b));
    let first = trace_product_on(a, b, s, &quad.grid_for(needed, kmax));
    let second = trace_product_on(a, b, s, &quad.doubled().grid_for(needed, kmax));
    let shift = (first - second).abs() / first.abs().max(1.0);
    if shift > quad.doubling_tol {
        return Err(Error::QuadratureUnderresolved { shift });
    }
    Ok(first)
}

fn trace_product_on(a: &CharFn, b: &CharFn, s: OrderingParam, grid: &PolarGrid) -> f64 {
    let kmax = grid.max_harmonic;
    let nn = grid.nodes.len();
    let va = a.sample(grid, s.0);
    let vb = b.sample(grid, -s.0);
    let mut total = Complex64::new(0.0, 0.0);
    for idx in 0..grid.harmonic_count() {
        let k = idx as isize - kmax as isize;
        let mirror = (-k + kmax as isize) as usize;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        for i in 0..nn {
            let wr = grid.weights[i] * grid.nodes[i];
            total += va[idx * nn + i] * vb[mirror * nn + i] * (sign * wr);
        }
    }
    2.0 * total.re
}

/// `∫ Λ_s(α; ρ) Λ_{−s}(α; σ) d²α = Tr(ρσ)/π` by harmonic-resolved radial
/// quadrature of the characteristic functions.
pub fn pairing(rho: &TruncatedState, sigma: &TruncatedState, s: OrderingParam) -> Result<f64> {
    pairing_with(rho, sigma, s, &QuadratureConfig::default())
}

pub fn pairing_with(
    rho: &TruncatedState,
    sigma: &TruncatedState,
    s: OrderingParam,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(trace_product(&CharFn::of_state(rho), &CharFn::of_state(sigma), s, quad)? / PI)
}

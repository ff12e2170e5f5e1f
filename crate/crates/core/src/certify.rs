//! Positivity and complete-positivity certificates: output-eigenvalue and
//! pairing witnesses, Choi spectra, CP threshold bisection and the overlap
//! of Wigner functions taken at two values of ħ.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{apply_to_state_with, transfer_tensor, ChannelSpec};
use crate::fock::{make_state, FockDim, StateKind, TruncatedState};
use crate::gaussian::Family;
use crate::linalg::{hermitian_eigen, CMat};
use crate::quasiprob::{trace_product, CharFn, OrderingParam, QuadratureConfig};
use crate::{Error, Result};

/// Eigen-witness threshold.
pub const TOL_POS: f64 = 1e-7;

/// Choi eigenvalues above `−CHOI_TOL` count as non-negative when bisecting.
pub const CHOI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    OutputEigen,
    Pairing,
    ChoiEigen,
    GaussianScalar,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::OutputEigen => "output_eigen",
            WitnessKind::Pairing => "pairing",
            WitnessKind::ChoiEigen => "choi_eigen",
            WitnessKind::GaussianScalar => "gaussian_scalar",
        })
    }
}

/// A negative number certifying that a map is not positive (or not CP).
/// `input` is a descriptor from which the value can be recomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub input: String,
    pub value: f64,
    pub tolerance: f64,
}

/// A probe together with the descriptor that rebuilds it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    pub descriptor: String,
    pub state: TruncatedState,
}

impl ProbeState {
    pub fn new(kind: StateKind, dim: FockDim) -> Result<Self> {
        Ok(Self {
            descriptor: format!("{kind}"),
            state: make_state(kind, dim)?,
        })
    }
}

/// Vacuum, `|1⟩ … |6⟩` and `|α=1⟩` in dimension `dim`, plus `random`
/// seeded random pure states in dimension 8.
pub fn standard_probes(dim: FockDim, random: usize, seed: u64) -> Result<Vec<ProbeState>> {
    let mut probes = Vec::new();
    probes.push(ProbeState::new(StateKind::Vacuum, dim)?);
    for k in 1..=6usize.min(dim.get() - 1) {
        probes.push(ProbeState::new(StateKind::Fock(k), dim)?);
    }
    if dim.get() >= 16 {
        probes.push(ProbeState::new(StateKind::Coherent(Complex64::new(1.0, 0.0)), dim)?);
    }
    let small = FockDim::new(8)?;
    for j in 0..random as u64 {
        probes.push(ProbeState::new(StateKind::RandomPure(seed.wrapping_add(j)), small)?);
    }
    Ok(probes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub quad: QuadratureConfig,
    pub tol_pos: f64,
    /// Fock partners `|0⟩ … |k⟩` tried by the pairing fallback.
    pub pairing_partners: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            tol_pos: TOL_POS,
            pairing_partners: 6,
        }
    }
}

fn survives(first: f64, again: f64) -> bool {
    (again - first).abs() < 0.1 * first.abs()
}

fn min_output_eigen(spec: &ChannelSpec, rho: &TruncatedState, quad: &QuadratureConfig) -> Result<f64> {
    Ok(apply_to_state_with(spec, rho, rho.dim(), quad)?.spectrum()?.min())
}

/// Searches the probes for a negative output eigenvalue. Probes whose image
/// is not trace class are paired against Fock states instead.
pub fn positivity_probe(spec: &ChannelSpec, probes: &[ProbeState], cfg: &ProbeConfig) -> Result<Option<Witness>> {
    spec.validate()?;
    let convergent = spec.output_exponent() < 0.0;
    for probe in probes {
        if convergent {
            let value = min_output_eigen(spec, &probe.state, &cfg.quad)?;
            if value < -cfg.tol_pos {
                let again = min_output_eigen(spec, &probe.state, &cfg.quad.doubled())?;
                if survives(value, again) {
                    return Ok(Some(Witness {
                        kind: WitnessKind::OutputEigen,
                        input: probe.descriptor.clone(),
                        value,
                        tolerance: cfg.tol_pos,
                    }));
                }
                log::debug!("discarded eigen-witness {value:e} for {} (refined {again:e})", probe.descriptor);
            }
        } else {
            let partner_dim = FockDim::new(cfg.pairing_partners + 2)?;
            for k in 0..=cfg.pairing_partners {
                let sigma = make_state(StateKind::Fock(k), partner_dim)?;
                let value = pairing_probe_with(spec, &probe.state, &sigma, &cfg.quad)?;
                if value < -cfg.tol_pos {
                    let again = pairing_probe_with(spec, &probe.state, &sigma, &cfg.quad.doubled())?;
                    if survives(value, again) {
                        return Ok(Some(Witness {
                            kind: WitnessKind::Pairing,
                            input: format!("{}|fock:{k}", probe.descriptor),
                            value,
                            tolerance: cfg.tol_pos,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// `Tr(Φ(ρ)σ)` from the characteristic functions, without reconstructing
/// `Φ(ρ)`. Converges for every scaling map because `σ` supplies its own
/// Gaussian decay.
pub fn pairing_probe(spec: &ChannelSpec, rho: &TruncatedState, sigma: &TruncatedState) -> Result<f64> {
    pairing_probe_with(spec, rho, sigma, &QuadratureConfig::default())
}

pub fn pairing_probe_with(
    spec: &ChannelSpec,
    rho: &TruncatedState,
    sigma: &TruncatedState,
    quad: &QuadratureConfig,
) -> Result<f64> {
    spec.validate()?;
    let image = CharFn::of_state(rho).with_action(spec.action());
    let s = match *spec {
        ChannelSpec::Scaling { s, .. } => OrderingParam::new(s)?,
        _ => OrderingParam::WIGNER,
    };
    trace_product(&image, &CharFn::of_state(sigma), s, quad)
}

/// Both arrangements of the duality integral on seeded random pure pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub s: f64,
    pub a: f64,
    /// `(Tr(Γ_{s,a}(ρ)σ), a⁻² Tr(ρ Γ̃_{s,a}(σ)))` per trial.
    pub pairs: Vec<(f64, f64)>,
    pub max_abs_diff: f64,
    pub sign_consistent: bool,
}

pub fn duality_check(s: f64, a: f64, trials: usize, seed: u64, dim: FockDim, quad: &QuadratureConfig) -> Result<DualityReport> {
    let direct = ChannelSpec::scaling(s, a)?;
    let dual = ChannelSpec::dual_scaling(s, a)?;
    let ordering = OrderingParam::new(s)?;
    let mut pairs = Vec::with_capacity(trials);
    let mut max_abs_diff: f64 = 0.0;
    let mut sign_consistent = true;
    for t in 0..trials as u64 {
        let rho = make_state(StateKind::RandomPure(seed.wrapping_add(2 * t)), dim)?;
        let sigma = make_state(StateKind::RandomPure(seed.wrapping_add(2 * t + 1)), dim)?;
        let lhs = trace_product(
            &CharFn::of_state(&rho).with_action(direct.action()),
            &CharFn::of_state(&sigma),
            ordering,
            quad,
        )?;
        let rhs = trace_product(
            &CharFn::of_state(&rho),
            &CharFn::of_state(&sigma).with_action(dual.action()),
            ordering.dual(),
            quad,
        )? / (a * a);
        max_abs_diff = max_abs_diff.max((lhs - rhs).abs());
        if (lhs < -TOL_POS) != (rhs < -TOL_POS) {
            sign_consistent = false;
        }
        pairs.push((lhs, rhs));
    }
    Ok(DualityReport {
        s,
        a,
        pairs,
        max_abs_diff,
        sign_consistent,
    })
}

/// One block of the Choi matrix with fixed `δ = n − m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiBlock {
    pub delta: isize,
    /// `(n, m)` labels of the rows (and columns) of `matrix`.
    pub labels: Vec<(usize, usize)>,
    pub matrix: CMat,
    pub eigenvalues: Vec<f64>,
}

/// `J = Σ_{m,p} Φ(|m⟩⟨p|) ⊗ |m⟩⟨p|` restricted to a `d`-level probe, stored
/// by blocks of constant `n − m`; row `(n, m)`, column `(q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    blocks: Vec<ChoiBlock>,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[ChoiBlock] {
        &self.blocks
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.trace().re).sum()
    }

    /// `⟨n, m|J|q, p⟩`.
    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> f64 {
        let delta = row.0 as isize - row.1 as isize;
        if delta != col.0 as isize - col.1 as isize {
            return 0.0;
        }
        let block = &self.blocks[(delta + self.d as isize - 1) as usize];
        let i = block.labels.iter().position(|l| *l == row).expect("label in block");
        let j = block.labels.iter().position(|l| *l == col).expect("label in block");
        block.matrix[(i, j)].re
    }

    /// The full `d²×d²` matrix, row index `n·d + m`.
    pub fn full(&self) -> CMat {
        let d = self.d;
        let mut j = CMat::zeros(d * d, d * d);
        for block in &self.blocks {
            for (a, &(n, m)) in block.labels.iter().enumerate() {
                for (b, &(q, p)) in block.labels.iter().enumerate() {
                    j[(n * d + m, q * d + p)] = block.matrix[(a, b)];
                }
            }
        }
        j
    }
}

pub fn choi(spec: &ChannelSpec, d: FockDim, quad: &QuadratureConfig) -> Result<ChoiMatrix> {
    let t = transfer_tensor(spec, d, d, quad)?;
    let n_levels = d.get();
    let mut blocks = Vec::with_capacity(2 * n_levels - 1);
    for delta in -(n_levels as isize - 1)..=(n_levels as isize - 1) {
        let labels: Vec<(usize, usize)> = (0..n_levels)
            .filter_map(|m| {
                let n = m as isize + delta;
                (n >= 0 && (n as usize) < n_levels).then_some((n as usize, m))
            })
            .collect();
        let size = labels.len();
        let mut matrix = CMat::zeros(size, size);
        for (i, &(n, m)) in labels.iter().enumerate() {
            for (j, &(q, p)) in labels.iter().enumerate() {
                matrix[(i, j)] = Complex64::new(t.get(n, q, m, p), 0.0);
            }
        }
        for i in 0..size {
            for j in i + 1..size {
                let v = (matrix[(i, j)] + matrix[(j, i)]) * 0.5;
                matrix[(i, j)] = v;
                matrix[(j, i)] = v;
            }
        }
        let eigenvalues = hermitian_eigen(&matrix, 1e-12)?.eigenvalues;
        blocks.push(ChoiBlock {
            delta,
            labels,
            matrix,
            eigenvalues,
        });
    }
    Ok(ChoiMatrix { d: n_levels, blocks })
}

/// Bisection in `b` of the sign of the Choi minimum eigenvalue for the
/// noisy family; returns the crossing to within `tol_b`.
pub fn cp_bracket(
    family: Family,
    kappa: f64,
    b_lo: f64,
    b_hi: f64,
    tol_b: f64,
    d: FockDim,
    quad: &QuadratureConfig,
) -> Result<f64> {
    family.check(kappa)?;
    let is_cp = |b: f64| -> Result<bool> { Ok(choi(&family.spec(kappa, b)?, d, quad)?.min_eigenvalue() >= -CHOI_TOL) };
    let (mut lo, mut hi) = (b_lo, b_hi);
    let lo_cp = is_cp(lo)?;
    if lo_cp == is_cp(hi)? {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol_b {
        let mid = 0.5 * (lo + hi);
        if is_cp(mid)? == lo_cp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Tr(Γ_{0,√a²}(|1⟩⟨1|) |0⟩⟨0|)`: the overlap of the single-photon Wigner
/// function at one value of ħ with the vacuum Wigner function at another,
/// `ħ₁/ħ₂ = a²`.
pub fn planck_overlap(a_sq: f64) -> Result<f64> {
    if !(a_sq > 0.0) || !a_sq.is_finite() {
        return Err(Error::InvalidChannel("a^2 must be positive"));
    }
    let d = FockDim::new(2)?;
    let spec = ChannelSpec::scaling(0.0, a_sq.sqrt())?;
    pairing_probe(
        &spec,
        &make_state(StateKind::Fock(1), d)?,
        &make_state(StateKind::Vacuum, d)?,
    )
}

//! The channel zoo: scaling maps, their duals, classical noise, quantum
//! limited attenuator and amplifier, compositions, Kraus sets, transfer
//! tensors and the reduction of 2×2 scaling matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{FockDim, FockOperator, TruncatedState};
use crate::linalg::CMat;
use crate::quasiprob::{envelope_cutoff, reconstruct_auto, CharFn, CharFnGrid, GaussAction, QuadratureConfig};
use crate::special::{displacement_table, ln_factorials};
use crate::{Error, Result};

/// Phase-covariant single-mode map. Parameters are plain reals; use
/// [`ChannelSpec::validate`] (done by every constructor and by parsing)
/// before acting.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// `Γ_{s,a}`: `Λ_s(α) ↦ a⁻² Λ_s(α/a)`.
    Scaling { s: f64, a: f64 },
    /// `Γ̃_{s,a}`: `χ_{−s}(ξ) ↦ χ_{−s}(ξ/a)`.
    DualScaling { s: f64, a: f64 },
    /// `B₂(b)`: Gaussian convolution with width `b` (negative allowed).
    ClassicalNoise { b: f64 },
    QLAttenuator { kappa: f64 },
    QLAmplifier { kappa: f64 },
    /// `B₂(b) ∘ Γ_{0,κ}` with `|κ| ≤ 1`.
    NoisyAttenuator { kappa: f64, b: f64 },
    /// `B₂(b) ∘ Γ_{0,κ}` with `|κ| ≥ 1`.
    NoisyAmplifier { kappa: f64, b: f64 },
    /// Applied right to left.
    Compose(Vec<ChannelSpec>),
}

fn finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidChannel("parameters must be finite"))
    }
}

fn ordering(s: f64) -> Result<()> {
    finite(s)?;
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::OrderingOutOfRange(s));
    }
    Ok(())
}

impl ChannelSpec {
    pub fn scaling(s: f64, a: f64) -> Result<Self> {
        Self::Scaling { s, a }.validated()
    }

    pub fn dual_scaling(s: f64, a: f64) -> Result<Self> {
        Self::DualScaling { s, a }.validated()
    }

    pub fn noise(b: f64) -> Result<Self> {
        Self::ClassicalNoise { b }.validated()
    }

    pub fn attenuator(kappa: f64) -> Result<Self> {
        Self::QLAttenuator { kappa }.validated()
    }

    pub fn amplifier(kappa: f64) -> Result<Self> {
        Self::QLAmplifier { kappa }.validated()
    }

    pub fn noisy_attenuator(kappa: f64, b: f64) -> Result<Self> {
        Self::NoisyAttenuator { kappa, b }.validated()
    }

    pub fn noisy_amplifier(kappa: f64, b: f64) -> Result<Self> {
        Self::NoisyAmplifier { kappa, b }.validated()
    }

    pub fn identity() -> Self {
        Self::Scaling { s: 0.0, a: 1.0 }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Scaling { s, a } => {
                ordering(s)?;
                finite(a)
            }
            ChannelSpec::DualScaling { s, a } => {
                ordering(s)?;
                finite(a)?;
                if a == 0.0 {
                    return Err(Error::InvalidChannel("dual scaling needs a != 0"));
                }
                Ok(())
            }
            ChannelSpec::ClassicalNoise { b } => finite(b),
            ChannelSpec::QLAttenuator { kappa } => attenuator_kappa(kappa),
            ChannelSpec::QLAmplifier { kappa } => amplifier_kappa(kappa),
            ChannelSpec::NoisyAttenuator { kappa, b } => {
                finite(b)?;
                attenuator_kappa(kappa)
            }
            ChannelSpec::NoisyAmplifier { kappa, b } => {
                finite(b)?;
                amplifier_kappa(kappa)
            }
            ChannelSpec::Compose(ref parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidChannel("empty composition"));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
        }
    }

    /// The compiled action on `χ₀`.
    pub fn action(&self) -> GaussAction {
        match *self {
            ChannelSpec::Scaling { s, a } => GaussAction {
                scale: a,
                noise: s * (1.0 - a * a),
            },
            ChannelSpec::DualScaling { s, a } => ChannelSpec::Scaling { s: -s, a: 1.0 / a }.action(),
            ChannelSpec::ClassicalNoise { b } => GaussAction { scale: 1.0, noise: b },
            ChannelSpec::QLAttenuator { kappa } => ChannelSpec::Scaling { s: 1.0, a: kappa }.action(),
            ChannelSpec::QLAmplifier { kappa } => ChannelSpec::Scaling { s: -1.0, a: kappa }.action(),
            ChannelSpec::NoisyAttenuator { kappa, b } | ChannelSpec::NoisyAmplifier { kappa, b } => {
                GaussAction { scale: kappa, noise: b }
            }
            ChannelSpec::Compose(ref parts) => parts
                .iter()
                .rev()
                .fold(GaussAction::IDENTITY, |acc, p| acc.then(p.action())),
        }
    }

    /// Exponent of the image of a Fock-space operator; the output is trace
    /// class iff this is negative.
    pub fn output_exponent(&self) -> f64 {
        self.action().map_exponent(-1.0)
    }
}

fn attenuator_kappa(kappa: f64) -> Result<()> {
    finite(kappa)?;
    if kappa.abs() > 1.0 {
        return Err(Error::InvalidChannel("attenuator needs |kappa| <= 1"));
    }
    Ok(())
}

fn amplifier_kappa(kappa: f64) -> Result<()> {
    finite(kappa)?;
    if kappa.abs() < 1.0 {
        return Err(Error::InvalidChannel("amplifier needs |kappa| >= 1"));
    }
    Ok(())
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelSpec::Scaling { s, a } => write!(f, "scale:{s}:{a}"),
            ChannelSpec::DualScaling { s, a } => write!(f, "dual:{s}:{a}"),
            ChannelSpec::ClassicalNoise { b } => write!(f, "noise:{b}"),
            ChannelSpec::QLAttenuator { kappa } => write!(f, "att:{kappa}"),
            ChannelSpec::QLAmplifier { kappa } => write!(f, "amp:{kappa}"),
            ChannelSpec::NoisyAttenuator { kappa, b } => write!(f, "att:{kappa}:{b}"),
            ChannelSpec::NoisyAmplifier { kappa, b } => write!(f, "amp:{kappa}:{b}"),
            ChannelSpec::Compose(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_single(text: &str) -> Result<ChannelSpec> {
    let bad = || Error::Parse(format!("malformed channel `{text}`"));
    let mut parts = text.trim().split(':');
    let head = parts.next().ok_or_else(bad)?;
    let nums: Vec<f64> = parts
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let spec = match (head, nums.as_slice()) {
        ("scale", &[s, a]) => ChannelSpec::Scaling { s, a },
        ("dual", &[s, a]) => ChannelSpec::DualScaling { s, a },
        ("noise", &[b]) => ChannelSpec::ClassicalNoise { b },
        ("att", &[kappa]) => ChannelSpec::QLAttenuator { kappa },
        ("att", &[kappa, b]) => ChannelSpec::NoisyAttenuator { kappa, b },
        ("amp", &[kappa]) => ChannelSpec::QLAmplifier { kappa },
        ("amp", &[kappa, b]) => ChannelSpec::NoisyAmplifier { kappa, b },
        _ => return Err(bad()),
    };
    spec.validated()
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let pieces: Vec<&str> = text.split('*').collect();
        if pieces.len() == 1 {
            return parse_single(pieces[0]);
        }
        let parts = pieces.into_iter().map(parse_single).collect::<Result<Vec<_>>>()?;
        Ok(ChannelSpec::Compose(parts))
    }
}

/// `χ ↦ Φ(χ)` at the grid's own ordering.
pub fn apply_charfn(spec: &ChannelSpec, chi: &CharFnGrid) -> CharFnGrid {
    chi.with_action(spec.action())
}

/// `Φ(ρ)` through characteristic function, action and Weyl inversion, in
/// the input dimension with default quadrature.
pub fn apply_to_state(spec: &ChannelSpec, rho: &TruncatedState) -> Result<TruncatedState> {
    apply_to_state_with(spec, rho, rho.dim(), &QuadratureConfig::default())
}

pub fn apply_to_state_with(
    spec: &ChannelSpec,
    rho: &TruncatedState,
    out_dim: FockDim,
    quad: &QuadratureConfig,
) -> Result<TruncatedState> {
    let action = spec.action();
    if action == GaussAction::IDENTITY && out_dim == rho.dim() {
        return Ok(rho.clone());
    }
    reconstruct_auto(&CharFn::of_state(rho).with_action(action), out_dim, quad)
}

/// `Γ_{s,a} = B₂(s(1−a²)) ∘ Γ_{0,a}`.
pub fn decompose(spec: &ChannelSpec) -> Result<ChannelSpec> {
    match *spec {
        ChannelSpec::Scaling { s, a } => Ok(ChannelSpec::Compose(vec![
            ChannelSpec::ClassicalNoise { b: s * (1.0 - a * a) },
            ChannelSpec::Scaling { s: 0.0, a },
        ])),
        _ => Err(Error::InvalidChannel("only scaling maps decompose")),
    }
}

/// Kraus operators of a completely positive map in the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<FockOperator>,
    source: ChannelSpec,
}

impl KrausSet {
    pub fn operators(&self) -> &[FockOperator] {
        &self.operators
    }

    pub fn source(&self) -> &ChannelSpec {
        &self.source
    }

    /// `Σ_k A_k ρ A_k†`.
    pub fn apply(&self, rho: &TruncatedState) -> Result<TruncatedState> {
        let n = rho.dim().get();
        let mut out = CMat::zeros(n, n);
        for op in &self.operators {
            if op.dim() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: op.dim().get(),
                    found: n,
                });
            }
            let term = op.amplitudes().matmul(rho.amplitudes()).matmul(&op.amplitudes().adjoint());
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += term[(i, j)];
                }
            }
        }
        TruncatedState::from_matrix(out)
    }

    /// `max |Σ A_k†A_k − 𝟙|` over the lowest `levels` rows and columns.
    pub fn completeness_defect(&self, levels: usize) -> f64 {
        let n = self.operators[0].dim().get();
        let mut sum = CMat::zeros(n, n);
        for op in &self.operators {
            let t = op.amplitudes().adjoint().matmul(op.amplitudes());
            for i in 0..n {
                for j in 0..n {
                    sum[(i, j)] += t[(i, j)];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..levels.min(n) {
            for j in 0..levels.min(n) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[(i, j)] - target).norm());
            }
        }
        worst
    }
}

fn attenuator_operator(kappa: f64, k: usize, n: usize, lf: &[f64]) -> CMat {
    let mut a = CMat::zeros(n, n);
    let loss = 1.0 - kappa * kappa;
    for level in k..n {
        let binom = (0.5 * (lf[level] - lf[k] - lf[level - k])).exp();
        let amp = binom * loss.powf(k as f64 / 2.0) * kappa.powi((level - k) as i32);
        a[(level - k, level)] = Complex64::new(amp, 0.0);
    }
    a
}

/// Kraus set of the quantum-limited attenuator with transmissivity `κ²`.
pub fn kraus_attenuator(kappa: f64, dim: FockDim) -> Result<KrausSet> {
    attenuator_kappa(kappa)?;
    let n = dim.get();
    let lf = ln_factorials(n + 1);
    let count = if kappa.abs() == 1.0 { 1 } else { n };
    let operators = (0..count)
        .map(|k| FockOperator::new(attenuator_operator(kappa, k, n, &lf)))
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausSet {
        operators,
        source: ChannelSpec::QLAttenuator { kappa },
    })
}

/// Kraus set of the quantum-limited amplifier with gain `κ²`: adjoints of
/// the attenuator operators at `1/κ`, rescaled so the vacuum keeps unit
/// trace.
pub fn kraus_amplifier(kappa: f64, dim: FockDim) -> Result<KrausSet> {
    amplifier_kappa(kappa)?;
    let n = dim.get();
    let mu = 1.0 / kappa;
    let lf = ln_factorials(n + 1);
    if kappa.abs() == 1.0 {
        let op = FockOperator::new(attenuator_operator(mu, 0, n, &lf))?;
        return Ok(KrausSet {
            operators: vec![op],
            source: ChannelSpec::QLAmplifier { kappa },
        });
    }
    // ‖A_k†|0⟩‖² = (1 − μ²)^k, summed without truncation.
    let loss = 1.0 - mu * mu;
    let mut norm = 0.0;
    let mut term = 1.0;
    while term > 1e-18 {
        norm += term;
        term *= loss;
    }
    let scale = Complex64::new(1.0 / norm.sqrt(), 0.0);
    let operators = (0..n)
        .map(|k| FockOperator::new(attenuator_operator(mu, k, n, &lf).adjoint().scale(scale)))
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausSet {
        operators,
        source: ChannelSpec::QLAmplifier { kappa },
    })
}

/// Kraus set for any spec that is a quantum-limited channel or a unitary.
pub fn kraus_set(spec: &ChannelSpec, dim: FockDim) -> Result<KrausSet> {
    spec.validate()?;
    let GaussAction { scale, noise } = spec.action();
    if noise < 0.0 {
        return Err(Error::NoKrausRepresentation("negative added noise is not completely positive"));
    }
    let tol = 1e-12;
    let mut set = if (noise - (1.0 - scale * scale)).abs() <= tol && scale.abs() <= 1.0 {
        kraus_attenuator(scale, dim)?
    } else if (noise - (scale * scale - 1.0)).abs() <= tol && scale.abs() >= 1.0 {
        kraus_amplifier(scale, dim)?
    } else {
        return Err(Error::NoKrausRepresentation("only quantum-limited channels and unitaries"));
    };
    set.source = spec.clone();
    Ok(set)
}

/// `T[n][q][m][p] = ⟨n|Φ(|m⟩⟨p|)|q⟩` for `m, p < d_in` and `n, q < d_out`.
/// Entries with `n − q ≠ m − p` vanish by phase covariance and are stored as
/// exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTensor {
    d_in: usize,
    d_out: usize,
    data: Vec<f64>,
}

impl TransferTensor {
    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    pub fn output_dim(&self) -> usize {
        self.d_out
    }

    fn index(&self, n: usize, q: usize, m: usize, p: usize) -> usize {
        ((n * self.d_out + q) * self.d_in + m) * self.d_in + p
    }

    pub fn get(&self, n: usize, q: usize, m: usize, p: usize) -> f64 {
        self.data[self.index(n, q, m, p)]
    }

    /// `Φ(ρ)` for an input in dimension `d_in`, truncated to `d_out`.
    pub fn apply(&self, rho: &TruncatedState) -> Result<TruncatedState> {
        if rho.dim().get() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: rho.dim().get(),
            });
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for n in 0..self.d_out {
            for q in 0..self.d_out {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..self.d_in {
                    let p = m as isize - (n as isize - q as isize);
                    if p < 0 || p as usize >= self.d_in {
                        continue;
                    }
                    acc += rho.get(m, p as usize) * self.get(n, q, m, p as usize);
                }
                out[(n, q)] = acc;
            }
        }
        TruncatedState::from_matrix(out)
    }
}

fn tensor_on_grid(action: GaussAction, d_in: usize, d_out: usize, cutoff: f64, nodes: usize) -> Vec<f64> {
    let (r, w) = crate::special::gauss_legendre(nodes, 0.0, cutoff);
    let lf = ln_factorials(2 * d_in.max(d_out) + 4);
    let mut data = vec![0.0; d_out * d_out * d_in * d_in];
    let flip = action.scale < 0.0;
    let scale = action.scale.abs();
    for (&ri, &wi) in r.iter().zip(&w) {
        let t_in = displacement_table(d_in, d_in, scale * ri, &lf);
        let t_out = displacement_table(d_out, d_out, ri, &lf);
        let weight = wi * ri * (-action.noise * ri * ri / 2.0).exp();
        for n in 0..d_out {
            for q in 0..d_out {
                let kernel = weight * t_out[n * d_out + q];
                if kernel == 0.0 {
                    continue;
                }
                let delta = n as isize - q as isize;
                for m in 0..d_in {
                    let p = m as isize - delta;
                    if p < 0 || p as usize >= d_in {
                        continue;
                    }
                    let p = p as usize;
                    let idx = ((n * d_out + q) * d_in + m) * d_in + p;
                    data[idx] += kernel * t_in[p * d_in + m];
                }
            }
        }
    }
    for n in 0..d_out {
        for q in 0..d_out {
            let delta = n as isize - q as isize;
            let mut sign = if delta.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
            // (sgn a)^{p−m} with p − m = q − n
            if flip && delta.rem_euclid(2) == 1 {
                sign = -sign;
            }
            for m in 0..d_in {
                for p in 0..d_in {
                    data[((n * d_out + q) * d_in + m) * d_in + p] *= sign;
                }
            }
        }
    }
    data
}

/// Transfer tensor by radial quadrature of the operator units, with the
/// cutoff chosen from the integrand envelope and a grid-doubling check.
pub fn transfer_tensor(
    spec: &ChannelSpec,
    d_in: FockDim,
    d_out: FockDim,
    quad: &QuadratureConfig,
) -> Result<TransferTensor> {
    spec.validate()?;
    let exponent = spec.output_exponent();
    if exponent >= 0.0 {
        return Err(Error::DivergentReconstruction { exponent });
    }
    let action = spec.action();
    let (di, dout) = (d_in.get(), d_out.get());
    let lf = ln_factorials(2 * di.max(dout) + 4);
    let ln_max = |t: Vec<f64>| t.iter().fold(0.0f64, |m, v| m.max(v.abs())).ln();
    let needed = envelope_cutoff(|r| {
        ln_max(displacement_table(di, di, action.scale.abs() * r, &lf)) - action.noise * r * r / 2.0
            + ln_max(displacement_table(dout, dout, r, &lf))
    });
    let grid = quad.grid_for(needed, 0);
    let doubled = quad.doubled().grid_for(needed, 0);
    let first = tensor_on_grid(action, di, dout, grid.cutoff(), grid.nodes().len());
    let second = tensor_on_grid(action, di, dout, doubled.cutoff(), doubled.nodes().len());
    let scale = first.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let shift = first
        .iter()
        .zip(&second)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;
    if shift > quad.doubling_tol {
        return Err(Error::QuadratureUnderresolved { shift });
    }
    Ok(TransferTensor {
        d_in: di,
        d_out: dout,
        data: first,
    })
}

/// `S₁·K·S₂ = a𝟙` (sign +1) or `aσ₃` (sign −1) with symplectic `S₁, S₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMatrixReduction {
    pub k: [[f64; 2]; 2],
    pub s1: [[f64; 2]; 2],
    pub s2: [[f64; 2]; 2],
    pub a: f64,
    pub sign: i8,
}

fn mat_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub fn det2(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl ScalingMatrixReduction {
    /// `a𝟙` or `aσ₃`.
    pub fn target(&self) -> [[f64; 2]; 2] {
        [[self.a, 0.0], [0.0, self.a * self.sign as f64]]
    }

    /// `max |S₁KS₂ − target|`.
    pub fn residual(&self) -> f64 {
        let prod = mat_mul(mat_mul(self.s1, self.k), self.s2);
        let t = self.target();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((prod[i][j] - t[i][j]).abs());
            }
        }
        worst
    }
}

pub fn reduce_scaling_matrix(k: [[f64; 2]; 2]) -> Result<ScalingMatrixReduction> {
    let det = det2(k);
    if !(det.abs() > 1e-12) {
        return Err(Error::SingularMatrix(det.abs()));
    }
    let a = det.abs().sqrt();
    let inv = [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]];
    let mut s2 = [[a * inv[0][0], a * inv[0][1]], [a * inv[1][0], a * inv[1][1]]];
    let sign = if det > 0.0 { 1 } else { -1 };
    if sign < 0 {
        // right-multiply by σ₃
        s2[0][1] = -s2[0][1];
        s2[1][1] = -s2[1][1];
    }
    Ok(ScalingMatrixReduction {
        k,
        s1: [[1.0, 0.0], [0.0, 1.0]],
        s2,
        a,
        sign,
    })
}

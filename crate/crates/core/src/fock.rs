//! Truncated single-mode Fock space: dimensions, states, operators and
//! displacement-operator matrix elements.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{hermitian_eigen, CMat, SpectralResult};
use crate::special::{laguerre_functions, ln_factorials};
use crate::{Error, Result};

/// Tolerance on Hermiticity when accepting externally supplied matrices.
pub const TOL_HERM: f64 = 1e-10;

/// Tail mass above which coherent and thermal constructors refuse.
pub const MAX_CONSTRUCTOR_TAIL: f64 = 1e-6;

/// Truncation dimension `N`; the basis is `|0⟩ … |N−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockDim(usize);

impl FockDim {
    pub const DEFAULT: FockDim = FockDim(40);

    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for FockDim {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Hermitian `N×N` matrix in the Fock basis. Positivity is deliberately not
/// an invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    dim: FockDim,
    amplitudes: CMat,
    tail: f64,
}

impl TruncatedState {
    /// Accepts a matrix that is Hermitian within [`TOL_HERM`] and stores its
    /// exactly Hermitian part. The recorded tail is `1 − Re Tr M`.
    pub fn from_matrix(amplitudes: CMat) -> Result<Self> {
        let n = amplitudes.rows();
        if amplitudes.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: amplitudes.cols(),
            });
        }
        let dim = FockDim::new(n)?;
        let defect = amplitudes.hermiticity_defect();
        if defect > TOL_HERM * amplitudes.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(amplitudes[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (amplitudes[(i, j)] + amplitudes[(j, i)].conj()) * 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        let tail = 1.0 - m.trace().re;
        Ok(Self {
            dim,
            amplitudes: m,
            tail,
        })
    }

    pub(crate) fn from_parts(amplitudes: CMat, tail: f64) -> Self {
        let dim = FockDim(amplitudes.rows());
        Self {
            dim,
            amplitudes,
            tail,
        }
    }

    /// Pure state `|ψ⟩⟨ψ|`; the tail is `1 − ⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let dim = FockDim::new(psi.len())?;
        let n = psi.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        Ok(Self {
            dim,
            amplitudes: m,
            tail: 1.0 - norm,
        })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &CMat {
        &self.amplitudes
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.amplitudes[(m, n)]
    }

    /// Truncation tail mass `1 − Tr ρ` recorded at construction.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn trace(&self) -> f64 {
        self.amplitudes.trace().re
    }

    pub fn is_normalized(&self, tol_trace: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol_trace
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim.0).map(|i| self.amplitudes[(i, i)].re).collect()
    }

    pub fn spectrum(&self) -> Result<SpectralResult> {
        hermitian_spectrum(&self.amplitudes)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        check_same_dim(self.dim, other.dim)?;
        let diff = self.amplitudes.sub(&other.amplitudes);
        let sr = hermitian_spectrum(&diff)?;
        Ok(0.5 * sr.eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// `Tr(ρσ)`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        check_same_dim(self.dim, other.dim)?;
        let n = self.dim.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.amplitudes[(i, j)] * other.amplitudes[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// Largest `|ρ_mn − σ_mn|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_dim(self.dim, other.dim)?;
        Ok(self.amplitudes.sub(&other.amplitudes).max_abs())
    }

    /// Copy into a larger or smaller truncation; rows/columns beyond the
    /// target dimension are dropped.
    pub fn resized(&self, dim: FockDim) -> Self {
        let n = dim.0;
        let k = n.min(self.dim.0);
        let mut m = CMat::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = self.amplitudes[(i, j)];
            }
        }
        let tail = 1.0 - m.trace().re;
        Self {
            dim,
            amplitudes: m,
            tail,
        }
    }
}

fn check_same_dim(a: FockDim, b: FockDim) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a.0,
            found: b.0,
        });
    }
    Ok(())
}

/// Arbitrary operator in the Fock basis (Kraus operators, operator units).
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: FockDim,
    amplitudes: CMat,
}

impl FockOperator {
    pub fn new(amplitudes: CMat) -> Result<Self> {
        if amplitudes.rows() != amplitudes.cols() {
            return Err(Error::DimensionMismatch {
                expected: amplitudes.rows(),
                found: amplitudes.cols(),
            });
        }
        let dim = FockDim::new(amplitudes.rows())?;
        Ok(Self { dim, amplitudes })
    }

    /// Operator unit `|m⟩⟨p|`.
    pub fn unit(dim: FockDim, m: usize, p: usize) -> Self {
        let mut a = CMat::zeros(dim.0, dim.0);
        a[(m, p)] = Complex64::new(1.0, 0.0);
        Self { dim, amplitudes: a }
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &CMat {
        &self.amplitudes
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            amplitudes: self.amplitudes.adjoint(),
        }
    }
}

/// State constructors understood by [`make_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    Vacuum,
    Fock(usize),
    Coherent(Complex64),
    Thermal(f64),
    RandomPure(u64),
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::Vacuum => write!(f, "vacuum"),
            StateKind::Fock(n) => write!(f, "fock:{n}"),
            StateKind::Coherent(z) if z.im == 0.0 => write!(f, "coherent:{}", z.re),
            StateKind::Coherent(z) => write!(f, "coherent:{}:{}", z.re, z.im),
            StateKind::Thermal(v) => write!(f, "thermal:{v}"),
            StateKind::RandomPure(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(alloc::format!("unknown state descriptor `{text}`"));
        let mut parts = text.trim().split(':');
        let head = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match (head, rest.as_slice()) {
            ("vacuum", []) => Ok(StateKind::Vacuum),
            ("fock", [n]) => Ok(StateKind::Fock(n.parse().map_err(|_| bad())?)),
            ("coherent", [re]) => Ok(StateKind::Coherent(Complex64::new(num(re)?, 0.0))),
            ("coherent", [re, im]) => Ok(StateKind::Coherent(Complex64::new(num(re)?, num(im)?))),
            ("thermal", [v]) => Ok(StateKind::Thermal(num(v)?)),
            ("random", [seed]) => Ok(StateKind::RandomPure(seed.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Builds one of the standard states in dimension `dim`.
pub fn make_state(kind: StateKind, dim: FockDim) -> Result<TruncatedState> {
    let n = dim.0;
    match kind {
        StateKind::Vacuum => make_state(StateKind::Fock(0), dim),
        StateKind::Fock(k) => {
            if k >= n {
                return Err(Error::StateDoesNotFit("Fock index not below the truncation"));
            }
            let mut diag = alloc::vec![0.0; n];
            diag[k] = 1.0;
            Ok(TruncatedState::from_parts(CMat::from_diagonal(&diag), 0.0))
        }
        StateKind::Thermal(v) => {
            if !(v >= 1.0) {
                return Err(Error::UnphysicalThermal(v));
            }
            let diag = geometric_diagonal(v, n);
            let ratio = (v - 1.0) / (v + 1.0);
            let tail = ratio.powi(n as i32);
            if tail > MAX_CONSTRUCTOR_TAIL {
                return Err(Error::StateDoesNotFit("thermal tail exceeds 1e-6"));
            }
            Ok(TruncatedState::from_parts(CMat::from_diagonal(&diag), tail))
        }
        StateKind::Coherent(alpha) => {
            let mut psi = Vec::with_capacity(n);
            let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
            for k in 0..n {
                psi.push(c);
                c = c * alpha / ((k + 1) as f64).sqrt();
            }
            let state = TruncatedState::from_pure(&psi)?;
            if state.tail > MAX_CONSTRUCTOR_TAIL {
                return Err(Error::StateDoesNotFit("coherent tail exceeds 1e-6"));
            }
            if state.tail > 1e-10 {
                log::warn!("coherent state {alpha} leaves tail mass {:e} at N = {n}", state.tail);
            }
            Ok(state)
        }
        StateKind::RandomPure(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut psi: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in psi.iter_mut() {
                *z /= norm;
            }
            let mut state = TruncatedState::from_pure(&psi)?;
            state.tail = 0.0;
            Ok(state)
        }
    }
}

/// Photon-number law of the Gaussian with `χ₀ = exp(−v|ξ|²/2)`:
/// `p_k = 2/(1+v) · ((v−1)/(v+1))^k`. For `0 < v < 1` the law continues
/// analytically and alternates in sign.
pub fn geometric_diagonal(v: f64, n: usize) -> Vec<f64> {
    let ratio = (v - 1.0) / (v + 1.0);
    let mut p = 2.0 / (1.0 + v);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(p);
        p *= ratio;
    }
    out
}

/// `⟨m|D(ξ)|n⟩` evaluated through the normalised Laguerre recurrence.
pub fn displacement_element(m: usize, n: usize, xi: Complex64) -> Complex64 {
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let k = hi - lo;
    let x = xi.norm_sqr();
    let lf = ln_factorials(hi + 1);
    let mut buf = alloc::vec![0.0; lo + 1];
    laguerre_functions(k, x, &lf, &mut buf);
    let magnitude = buf[lo];
    if k == 0 || x == 0.0 {
        return Complex64::new(magnitude, 0.0);
    }
    let theta = xi.arg();
    if m >= n {
        Complex64::from_polar(magnitude, k as f64 * theta)
    } else {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::from_polar(sign * magnitude, -(k as f64) * theta)
    }
}

/// Spectral decomposition of a Hermitian matrix (ascending eigenvalues).
pub fn hermitian_spectrum(m: &CMat) -> Result<SpectralResult> {
    hermitian_eigen(m, TOL_HERM)
}

/// Half-period rotation `a → −a`: `M′[m][n] = (−1)^{m+n} M[m][n]`.
pub fn parity_conjugate(rho: &TruncatedState) -> TruncatedState {
    let n = rho.dim.0;
    let mut m = rho.amplitudes.clone();
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 1 {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
    TruncatedState {
        dim: rho.dim,
        amplitudes: m,
        tail: rho.tail,
    }
}

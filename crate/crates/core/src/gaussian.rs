//! Exact Gaussian fast path: covariance propagation, thermal positivity,
//! two-mode squeezed vacua, PPT and classicality tests, and the analytic
//! CP / EB / NB thresholds of the noisy attenuator and amplifier.
//!
//! Convention: `χ₀(Λ) = exp(−½ ΛᵀVΛ)`, vacuum `V = 𝟙`, quadratures ordered
//! `(q₁, p₁, q₂, p₂)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::ChannelSpec;
use crate::linalg::{hermitian_eigen, symmetric_eigenvalues, CMat};
use crate::quasiprob::{GaussAction, OrderingParam};
use crate::{Error, Result};

/// Tolerance band used by every threshold comparison.
pub const THRESHOLD_TOL: f64 = 1e-9;

/// Slack on the PPT and classicality margins. Their slope in `b` can be
/// small, so this is kept well below [`THRESHOLD_TOL`].
pub const MARGIN_TOL: f64 = 1e-12;

/// Gaussian state (or analytic continuation) of one or two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    modes: usize,
    v: Vec<f64>,
    mean: Vec<f64>,
}

impl CovarianceModel {
    /// Single-mode thermal form `V = v𝟙`.
    pub fn thermal(v: f64) -> Self {
        Self {
            modes: 1,
            v: vec![v, 0.0, 0.0, v],
            mean: vec![0.0; 2],
        }
    }

    pub fn vacuum(modes: usize) -> Self {
        let n = 2 * modes;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Self {
            modes,
            v,
            mean: vec![0.0; n],
        }
    }

    /// Symmetric `2m×2m` matrix in row-major order.
    pub fn from_matrix(modes: usize, v: Vec<f64>) -> Result<Self> {
        let n = 2 * modes;
        if !(modes == 1 || modes == 2) || v.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: v.len(),
            });
        }
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((v[i * n + j] - v[j * n + i]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self {
            modes,
            v,
            mean: vec![0.0; n],
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &[f64] {
        &self.v
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.v[i * 2 * self.modes + j]
    }

    fn size(&self) -> usize {
        2 * self.modes
    }

    /// Smallest eigenvalue of `V + iΩ`; physical iff non-negative.
    pub fn physicality_margin(&self) -> Result<f64> {
        uncertainty_margin(&self.v, self.size())
    }
}

fn uncertainty_margin(v: &[f64], n: usize) -> Result<f64> {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(v[i * n + j], 0.0);
        }
    }
    for k in 0..n / 2 {
        let (q, p) = (2 * k, 2 * k + 1);
        m[(q, p)] += Complex64::new(0.0, 1.0);
        m[(p, q)] -= Complex64::new(0.0, 1.0);
    }
    Ok(hermitian_eigen(&m, 1e-12)?.min())
}

/// `V ↦ XVXᵀ + Y` with `X = a`, `Y = y` on the acted mode.
pub fn propagate(spec: &ChannelSpec, g: &CovarianceModel, acting_mode: usize) -> Result<CovarianceModel> {
    if acting_mode >= g.modes {
        return Err(Error::DimensionMismatch {
            expected: g.modes,
            found: acting_mode + 1,
        });
    }
    Ok(propagate_action(spec.action(), g, acting_mode))
}

pub(crate) fn propagate_action(action: GaussAction, g: &CovarianceModel, acting_mode: usize) -> CovarianceModel {
    let n = g.size();
    let acted = |i: usize| i / 2 == acting_mode;
    let mut v = g.v.clone();
    for i in 0..n {
        for j in 0..n {
            let mut x = 1.0;
            if acted(i) {
                x *= action.scale;
            }
            if acted(j) {
                x *= action.scale;
            }
            v[i * n + j] *= x;
            if i == j && acted(i) {
                v[i * n + j] += action.noise;
            }
        }
    }
    let mean = g
        .mean
        .iter()
        .enumerate()
        .map(|(i, m)| if acted(i) { m * action.scale } else { *m })
        .collect();
    CovarianceModel {
        modes: g.modes,
        v,
        mean,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    Positive,
    NonPositive,
}

/// Whether the Gaussian with s-ordered width `b` (so `v = b + s`) is a
/// positive operator, i.e. `b ≥ 1 − s`.
pub fn thermal_positivity(b: f64, s: OrderingParam) -> Positivity {
    if b + s.get() >= 1.0 - THRESHOLD_TOL {
        Positivity::Positive
    } else {
        Positivity::NonPositive
    }
}

/// Vacuum-based positivity witnesses of a compiled action: the width of
/// `Φ(|0⟩⟨0|)` and the width of `Φ†(|0⟩⟨0|)`. The map is non-positive as
/// soon as either is below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumWitness {
    pub forward: f64,
    pub adjoint: Option<f64>,
}

impl VacuumWitness {
    pub fn of(action: GaussAction) -> Self {
        Self {
            forward: action.map_width(1.0),
            adjoint: action.adjoint().map(|adj| adj.map_width(1.0)),
        }
    }

    /// Smallest width; below one means non-positive.
    pub fn min_width(&self) -> f64 {
        match self.adjoint {
            Some(adj) => self.forward.min(adj),
            None => self.forward,
        }
    }

    /// Most negative matrix element among `⟨k|Φ(|0⟩⟨0|)|k⟩` and
    /// `⟨0|Φ(|k⟩⟨k|)|0⟩ = a⁻² p_k(Φ†)`, or `None` if all are non-negative
    /// or the Gaussian is not normalisable against Fock states.
    pub fn most_negative(&self, action: GaussAction) -> Option<f64> {
        let mut worst: Option<f64> = None;
        let mut consider = |v: f64, factor: f64| {
            if v <= -1.0 || v >= 1.0 {
                if v < -1.0 {
                    let p0 = factor * 2.0 / (1.0 + v);
                    worst = Some(worst.map_or(p0, |w: f64| w.min(p0)));
                }
                return;
            }
            let p1 = factor * 2.0 / (1.0 + v) * (v - 1.0) / (v + 1.0);
            worst = Some(worst.map_or(p1, |w: f64| w.min(p1)));
        };
        consider(self.forward, 1.0);
        if let Some(adj) = self.adjoint {
            consider(adj, 1.0 / (action.scale * action.scale));
        }
        worst.filter(|w| *w < 0.0)
    }
}

/// Two-mode squeezed vacuum with squeezing `r`.
pub fn tmsv(r: f64) -> Result<CovarianceModel> {
    if !(r >= 0.0) {
        return Err(Error::InvalidChannel("squeezing must be non-negative"));
    }
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    #[rustfmt::skip]
    let v = vec![
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ];
    CovarianceModel::from_matrix(2, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PptVerdict {
    Npt,
    Ppt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalityVerdict {
    Classical,
    Nonclassical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Test<V> {
    pub verdict: V,
    pub margin: f64,
}

/// Simon criterion: flip the sign of the second mode's momentum and test
/// the uncertainty relation.
pub fn ppt_test(g: &CovarianceModel) -> Result<Test<PptVerdict>> {
    if g.modes != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: g.modes,
        });
    }
    let mut v = g.v.clone();
    for j in 0..4 {
        if j != 3 {
            v[3 * 4 + j] = -v[3 * 4 + j];
            v[j * 4 + 3] = -v[j * 4 + 3];
        }
    }
    let margin = uncertainty_margin(&v, 4)?;
    let verdict = if margin >= -MARGIN_TOL {
        PptVerdict::Ppt
    } else {
        PptVerdict::Npt
    };
    Ok(Test { verdict, margin })
}

/// The Glauber P-function is a non-negative Gaussian iff `V ≥ 𝟙`.
pub fn classicality_test(g: &CovarianceModel) -> Result<Test<ClassicalityVerdict>> {
    let n = g.size();
    let mut v = g.v.clone();
    for i in 0..n {
        v[i * n + i] -= 1.0;
    }
    let margin = symmetric_eigenvalues(n, &v)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let verdict = if margin >= -MARGIN_TOL {
        ClassicalityVerdict::Classical
    } else {
        ClassicalityVerdict::Nonclassical
    };
    Ok(Test { verdict, margin })
}

/// Noisy single-mode families `B₂(b) ∘ Γ_{0,κ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Attenuator,
    Amplifier,
}

impl Family {
    pub fn spec(self, kappa: f64, b: f64) -> Result<ChannelSpec> {
        match self {
            Family::Attenuator => ChannelSpec::noisy_attenuator(kappa, b),
            Family::Amplifier => ChannelSpec::noisy_amplifier(kappa, b),
        }
    }

    pub fn check(self, kappa: f64) -> Result<()> {
        let ok = match self {
            Family::Attenuator => kappa.abs() <= 1.0,
            Family::Amplifier => kappa.abs() >= 1.0,
        };
        if ok && kappa.is_finite() {
            Ok(())
        } else {
            Err(Error::FamilyMismatch(match self {
                Family::Attenuator => "attenuator needs |kappa| <= 1",
                Family::Amplifier => "amplifier needs |kappa| >= 1",
            }))
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Attenuator => "att",
            Family::Amplifier => "amp",
        })
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "att" | "attenuator" => Ok(Family::Attenuator),
            "amp" | "amplifier" => Ok(Family::Amplifier),
            _ => Err(Error::Parse(alloc::format!("unknown family `{s}`"))),
        }
    }
}

/// Where a queried `b` sits relative to one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    At,
    Above,
}

impl Side {
    fn of(b: f64, threshold: f64) -> Self {
        if (b - threshold).abs() <= THRESHOLD_TOL {
            Side::At
        } else if b < threshold {
            Side::Below
        } else {
            Side::Above
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub family: Family,
    pub kappa: f64,
    pub b: f64,
    pub cp_threshold: f64,
    pub eb_threshold: f64,
    pub nb_threshold: f64,
    pub cp: Side,
    pub eb: Side,
    pub nb: Side,
}

pub fn threshold_report(family: Family, kappa: f64, b: f64) -> Result<ThresholdReport> {
    family.check(kappa)?;
    let k2 = kappa * kappa;
    let cp_threshold = (1.0 - k2).abs();
    let eb_threshold = 1.0 + k2;
    Ok(ThresholdReport {
        family,
        kappa,
        b,
        cp_threshold,
        eb_threshold,
        nb_threshold: eb_threshold,
        cp: Side::of(b, cp_threshold),
        eb: Side::of(b, eb_threshold),
        nb: Side::of(b, eb_threshold),
    })
}

/// Complete positivity of a Gaussian action: `y ≥ |1 − a²|`.
pub fn cp_margin(action: GaussAction) -> f64 {
    action.noise - (1.0 - action.scale * action.scale).abs()
}

/// PPT and classicality margins of `(id ⊗ Φ)(tmsv(r))`.
pub fn entanglement_margins(action: GaussAction, r: f64) -> Result<(Test<PptVerdict>, Test<ClassicalityVerdict>)> {
    let out = propagate_action(action, &tmsv(r)?, 1);
    Ok((ppt_test(&out)?, classicality_test(&out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_mode_propagation() {
        let vac = CovarianceModel::vacuum(1);
        let out = propagate(&ChannelSpec::scaling(0.0, 2.0).unwrap(), &vac, 0).unwrap();
        assert_abs_diff_eq!(out.get(0, 0), 4.0, epsilon = 0.0);
        let att = propagate(&ChannelSpec::attenuator(0.3).unwrap(), &vac, 0).unwrap();
        assert_abs_diff_eq!(att.get(1, 1), 1.0, epsilon = 1e-15);
        let half = propagate(&ChannelSpec::scaling(0.0, 0.5).unwrap(), &vac, 0).unwrap();
        assert_abs_diff_eq!(half.get(0, 0), 0.25, epsilon = 0.0);
        assert!(propagate(&ChannelSpec::identity(), &vac, 1).is_err());
    }

    #[test]
    fn thermal_positivity_examples() {
        assert_eq!(thermal_positivity(1.0, OrderingParam::WIGNER), Positivity::Positive);
        assert_eq!(thermal_positivity(0.25, OrderingParam::WIGNER), Positivity::NonPositive);
        assert_eq!(thermal_positivity(7.0, OrderingParam::WIGNER), Positivity::Positive);
        // vacuum Q-function width is 2
        assert_eq!(thermal_positivity(2.0, OrderingParam::Q), Positivity::Positive);
    }

    #[test]
    fn tmsv_is_pure_and_entangled() {
        let g = tmsv(0.5).unwrap();
        assert_abs_diff_eq!(g.get(0, 0), 1.0f64.cosh(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.physicality_margin().unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(ppt_test(&g).unwrap().verdict, PptVerdict::Npt);
        assert_eq!(ppt_test(&tmsv(0.0).unwrap()).unwrap().verdict, PptVerdict::Ppt);
    }

    #[test]
    fn classicality_examples() {
        let vac = CovarianceModel::vacuum(1);
        let t = classicality_test(&vac).unwrap();
        assert_eq!(t.verdict, ClassicalityVerdict::Classical);
        assert_abs_diff_eq!(t.margin, 0.0, epsilon = 0.0);
        let (_, c) = entanglement_margins(GaussAction { scale: 1.0, noise: 1.0 }, 0.5).unwrap();
        assert_eq!(c.verdict, ClassicalityVerdict::Nonclassical);
        let (p, c) = entanglement_margins(GaussAction { scale: 1.2, noise: 2.5 }, 1.0).unwrap();
        assert_eq!(c.verdict, ClassicalityVerdict::Classical);
        assert_eq!(p.verdict, PptVerdict::Ppt);
    }

    #[test]
    fn reports() {
        let r = threshold_report(Family::Attenuator, 0.6, 1.0).unwrap();
        assert_abs_diff_eq!(r.cp_threshold, 0.64, epsilon = 1e-15);
        assert_abs_diff_eq!(r.eb_threshold, 1.36, epsilon = 1e-15);
        let amp = threshold_report(Family::Amplifier, 1.2, 2.44).unwrap();
        assert_eq!(amp.eb, Side::At);
        assert_eq!(amp.cp, Side::Above);
        assert!(matches!(
            threshold_report(Family::Amplifier, 0.5, 1.0),
            Err(Error::FamilyMismatch(_))
        ));
    }

    #[test]
    fn vacuum_witness_values() {
        let half = GaussAction { scale: 0.5, noise: 0.0 };
        let w = VacuumWitness::of(half);
        assert_abs_diff_eq!(w.most_negative(half).unwrap(), -0.96, epsilon = 1e-12);
        let dil = GaussAction { scale: 2f64.sqrt(), noise: 0.0 };
        let w = VacuumWitness::of(dil);
        assert_abs_diff_eq!(w.most_negative(dil).unwrap(), -2.0 / 9.0, epsilon = 1e-12);
        let att = GaussAction { scale: 0.6, noise: 0.64 };
        assert_eq!(VacuumWitness::of(att).most_negative(att), None);
    }
}

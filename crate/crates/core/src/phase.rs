//! Analytic phase diagram of scaling maps and of the noisy attenuator and
//! amplifier families, plus per-point numerical cross-checks.

use alloc::vec::Vec;
use core::fmt;

use crate::certify::{choi, positivity_probe, standard_probes, ProbeConfig, Witness, WitnessKind};
use crate::channels::ChannelSpec;
use crate::fock::FockDim;
use crate::gaussian::{cp_margin, entanglement_margins, ClassicalityVerdict, Family, PptVerdict, VacuumWitness};
use crate::quasiprob::GaussAction;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    CpUnitary,
    Cp,
    Np,
    EbNb,
    PinchVacuum,
    PinchNp,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CpUnitary => "CP_unitary",
            Verdict::Cp => "CP",
            Verdict::Np => "NP",
            Verdict::EbNb => "EB_NB",
            Verdict::PinchVacuum => "pinch_vacuum",
            Verdict::PinchNp => "pinch_NP",
        })
    }
}

impl core::str::FromStr for Verdict {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "CP_unitary" => Verdict::CpUnitary,
            "CP" => Verdict::Cp,
            "NP" => Verdict::Np,
            "EB_NB" => Verdict::EbNb,
            "pinch_vacuum" => Verdict::PinchVacuum,
            "pinch_NP" => Verdict::PinchNp,
            _ => return Err(crate::Error::Parse(alloc::format!("unknown verdict `{s}`"))),
        })
    }
}

/// Quadrant labels of the scaling-map diagram. Regions 1 and 3 are
/// compositions of two non-positive maps; 2 and 4 put a CP noise map after
/// a non-positive scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    One,
    Two,
    Three,
    Four,
    Boundary,
    None,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionTag::One => "1",
            RegionTag::Two => "2",
            RegionTag::Three => "3",
            RegionTag::Four => "4",
            RegionTag::Boundary => "boundary",
            RegionTag::None => "none",
        })
    }
}

impl core::str::FromStr for RegionTag {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "1" => RegionTag::One,
            "2" => RegionTag::Two,
            "3" => RegionTag::Three,
            "4" => RegionTag::Four,
            "boundary" => RegionTag::Boundary,
            "none" => RegionTag::None,
            _ => return Err(crate::Error::Parse(alloc::format!("unknown region `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointParams {
    Scaling { s: f64, a: f64 },
    Noisy { family: Family, kappa: f64, b: f64 },
}

impl PointParams {
    pub fn spec(&self) -> Result<ChannelSpec> {
        match *self {
            PointParams::Scaling { s, a } => ChannelSpec::scaling(s, a),
            PointParams::Noisy { family, kappa, b } => family.spec(kappa, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRecord {
    pub params: PointParams,
    pub analytic: Verdict,
    pub region: RegionTag,
    /// `None` until evaluated, or when no numerical route exists.
    pub numeric: Option<Verdict>,
    pub witness: Option<Witness>,
    pub margin_ppt: Option<f64>,
    pub margin_classical: Option<f64>,
    /// Distance to the nearest analytic threshold in the swept parameters.
    pub boundary_distance: f64,
    /// Whether the full Fock/Choi tier ran at this point.
    pub fock_checked: bool,
}

impl ClassificationRecord {
    pub fn in_band(&self, band: f64) -> bool {
        self.boundary_distance < band
    }

    pub fn agrees(&self) -> bool {
        self.numeric == Some(self.analytic)
    }

    /// Disagreement outside the boundary band.
    pub fn is_mismatch(&self, band: f64) -> bool {
        !self.agrees() && !self.in_band(band)
    }
}

fn unit(a: f64) -> bool {
    (a.abs() - 1.0).abs() <= 1e-12
}

/// Analytic verdict for `Γ_{s,a}`.
pub fn classify_scaling(s: f64, a: f64) -> ClassificationRecord {
    let abs_a = a.abs();
    let (analytic, region) = if a == 0.0 {
        let v = if s == 1.0 { Verdict::PinchVacuum } else { Verdict::PinchNp };
        (v, RegionTag::None)
    } else if unit(a) {
        (Verdict::CpUnitary, RegionTag::None)
    } else if (s == 1.0 && abs_a < 1.0) || (s == -1.0 && abs_a > 1.0) {
        (Verdict::Cp, RegionTag::None)
    } else if s == 0.0 {
        (Verdict::Np, RegionTag::Boundary)
    } else {
        let tag = match (abs_a < 1.0, s < 0.0) {
            (true, true) => RegionTag::One,
            (true, false) => RegionTag::Two,
            (false, false) => RegionTag::Three,
            (false, true) => RegionTag::Four,
        };
        (Verdict::Np, tag)
    };
    ClassificationRecord {
        params: PointParams::Scaling { s, a },
        analytic,
        region,
        numeric: None,
        witness: None,
        margin_ppt: None,
        margin_classical: None,
        boundary_distance: scaling_distance(s, a, analytic),
        fock_checked: false,
    }
}

/// Distance from an NP point to the CP set: the unitary lines `|a| = 1`,
/// the pinch line `a = 0`, and the CP segments `s = 1` (`|a| < 1`) and
/// `s = −1` (`|a| > 1`). Points lying on the CP set are exact and get an
/// infinite distance.
fn scaling_distance(s: f64, a: f64, analytic: Verdict) -> f64 {
    if analytic != Verdict::Np {
        return f64::INFINITY;
    }
    let abs_a = a.abs();
    let to_line = if abs_a < 1.0 { 1.0 - s } else { 1.0 + s };
    (abs_a - 1.0).abs().min(abs_a).min(to_line)
}

/// Three-zone verdict for `B₂(b) ∘ Γ_{0,κ}`.
pub fn classify_noisy(family: Family, kappa: f64, b: f64) -> Result<ClassificationRecord> {
    family.check(kappa)?;
    let k2 = kappa * kappa;
    let cp = (1.0 - k2).abs();
    let eb = 1.0 + k2;
    let tol = crate::gaussian::THRESHOLD_TOL;
    let analytic = if b >= eb - tol {
        Verdict::EbNb
    } else if b >= cp - tol {
        Verdict::Cp
    } else {
        Verdict::Np
    };
    Ok(ClassificationRecord {
        params: PointParams::Noisy { family, kappa, b },
        analytic,
        region: RegionTag::None,
        numeric: None,
        witness: None,
        margin_ppt: None,
        margin_classical: None,
        boundary_distance: (b - cp).abs().min((b - eb).abs()),
        fock_checked: false,
    })
}

/// Analytic verdict for an arbitrary phase-covariant action `(a, y)`:
/// NP below `y = |1 − a²|`, EB_NB from `y = 1 + a²`, CP in between.
pub fn classify_action(action: GaussAction) -> Verdict {
    let tol = crate::gaussian::THRESHOLD_TOL;
    let (a, y) = (action.scale, action.noise);
    if a == 0.0 {
        return if (y - 1.0).abs() <= tol {
            Verdict::PinchVacuum
        } else if y > 1.0 {
            Verdict::EbNb
        } else {
            Verdict::PinchNp
        };
    }
    if y < (1.0 - a * a).abs() - tol {
        Verdict::Np
    } else if y >= 1.0 + a * a - tol {
        Verdict::EbNb
    } else if unit(a) && y.abs() <= tol {
        Verdict::CpUnitary
    } else {
        Verdict::Cp
    }
}

/// Knobs of the numerical tiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub dim: FockDim,
    pub choi_dim: FockDim,
    pub probe: ProbeConfig,
    pub random_probes: usize,
    pub seed: u64,
    /// Squeezing of the two-mode probes for EB/NB.
    pub tmsv_r: [f64; 3],
    pub choi_tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            dim: FockDim::DEFAULT,
            choi_dim: FockDim::new(12).expect("valid"),
            probe: ProbeConfig::default(),
            random_probes: 10,
            seed: 0,
            tmsv_r: [0.2, 0.5, 1.0],
            choi_tol: 1e-8,
        }
    }
}

fn gaussian_witness(action: GaussAction, tol: f64) -> Option<Witness> {
    let vac = VacuumWitness::of(action);
    vac.most_negative(action).filter(|v| *v < -tol).map(|value| Witness {
        kind: WitnessKind::GaussianScalar,
        input: alloc::string::String::from("vacuum"),
        value,
        tolerance: tol,
    })
}

/// Numeric verdict of the Gaussian tier: CP if `y ≥ |1 − a²|`, NP if a
/// vacuum witness is negative.
fn gaussian_verdict(action: GaussAction, tol: f64) -> (Option<Verdict>, Option<Witness>) {
    if action.scale == 0.0 {
        // constant map onto the Gaussian of width y
        let v = action.noise;
        if (v - 1.0).abs() <= crate::gaussian::THRESHOLD_TOL {
            return (Some(Verdict::PinchVacuum), None);
        }
        if v <= -1.0 {
            return (None, None);
        }
        let w = gaussian_witness(action, tol);
        return (w.as_ref().map(|_| Verdict::PinchNp), w);
    }
    if let Some(w) = gaussian_witness(action, tol) {
        return (Some(Verdict::Np), Some(w));
    }
    if cp_margin(action) >= -crate::gaussian::THRESHOLD_TOL {
        let unitary = action.noise.abs() <= crate::gaussian::THRESHOLD_TOL && unit(action.scale);
        return (Some(if unitary { Verdict::CpUnitary } else { Verdict::Cp }), None);
    }
    (None, None)
}

/// The Fock tier: probe search, then the Choi spectrum if no witness.
fn fock_verdict(spec: &ChannelSpec, cfg: &EvalConfig) -> Result<(Option<Verdict>, Option<Witness>)> {
    let probes = standard_probes(cfg.dim, cfg.random_probes, cfg.seed)?;
    if let Some(w) = positivity_probe(spec, &probes, &cfg.probe)? {
        return Ok((Some(Verdict::Np), Some(w)));
    }
    if spec.output_exponent() >= 0.0 {
        return Ok((None, None));
    }
    let j = choi(spec, cfg.choi_dim, &cfg.probe.quad)?;
    let min = j.min_eigenvalue();
    if min < -cfg.choi_tol {
        let w = Witness {
            kind: WitnessKind::ChoiEigen,
            input: alloc::format!("choi:{}", cfg.choi_dim.get()),
            value: min,
            tolerance: cfg.choi_tol,
        };
        return Ok((Some(Verdict::Np), Some(w)));
    }
    let unitary = j.max_eigenvalue() >= j.trace() * (1.0 - 1e-8);
    Ok((Some(if unitary { Verdict::CpUnitary } else { Verdict::Cp }), None))
}

fn merge(
    gauss: (Option<Verdict>, Option<Witness>),
    fock: Option<(Option<Verdict>, Option<Witness>)>,
) -> (Option<Verdict>, Option<Witness>) {
    match fock {
        None => gauss,
        Some((fv, fw)) => {
            if gauss.0.is_some() && fv.is_some() && gauss.0 != fv {
                // the tiers disagree: report the discrepancy as no verdict
                log::warn!("Gaussian tier says {:?}, Fock tier says {:?}", gauss.0, fv);
                return (None, fw.or(gauss.1));
            }
            (fv.or(gauss.0), fw.or(gauss.1))
        }
    }
}

/// Analytic verdict plus numerical verdict; the Fock/Choi tier runs when
/// `full` is set.
pub fn evaluate_scaling(s: f64, a: f64, full: bool, cfg: &EvalConfig) -> Result<ClassificationRecord> {
    let mut rec = classify_scaling(s, a);
    let spec = ChannelSpec::scaling(s, a)?;
    let gauss = gaussian_verdict(spec.action(), cfg.probe.tol_pos);
    let fock = if full && a != 0.0 { Some(fock_verdict(&spec, cfg)?) } else { None };
    rec.fock_checked = fock.is_some();
    let (numeric, witness) = merge(gauss, fock);
    rec.numeric = numeric;
    rec.witness = witness;
    Ok(rec)
}

pub fn evaluate_noisy(family: Family, kappa: f64, b: f64, full: bool, cfg: &EvalConfig) -> Result<ClassificationRecord> {
    let mut rec = classify_noisy(family, kappa, b)?;
    let spec = family.spec(kappa, b)?;
    let action = spec.action();
    let mut ppt_min = f64::INFINITY;
    let mut cl_min = f64::INFINITY;
    let mut separable = true;
    for &r in &cfg.tmsv_r {
        let (p, c) = entanglement_margins(action, r)?;
        ppt_min = ppt_min.min(p.margin);
        cl_min = cl_min.min(c.margin);
        separable &= p.verdict == PptVerdict::Ppt && c.verdict == ClassicalityVerdict::Classical;
    }
    rec.margin_ppt = Some(ppt_min);
    rec.margin_classical = Some(cl_min);
    let witness = gaussian_witness(action, cfg.probe.tol_pos);
    let cp = cp_margin(action) >= -crate::gaussian::THRESHOLD_TOL;
    let mut numeric = match (&witness, cp) {
        (Some(_), false) => Some(Verdict::Np),
        (None, true) if separable => Some(Verdict::EbNb),
        (None, true) => Some(Verdict::Cp),
        _ => None,
    };
    rec.witness = witness;
    if full {
        rec.fock_checked = true;
        let (fv, fw) = fock_verdict(&spec, cfg)?;
        let fock_np = fv == Some(Verdict::Np);
        let gauss_np = numeric == Some(Verdict::Np);
        if fv.is_none() || fock_np != gauss_np {
            log::warn!("Gaussian tier says {numeric:?}, Fock tier says {fv:?} at {family} {kappa} {b}");
            numeric = None;
        }
        if fw.is_some() {
            rec.witness = fw;
        }
    }
    rec.numeric = numeric;
    Ok(rec)
}

/// Boundary cells of a noisy sweep column: the first `b` values at which
/// the numeric verdict leaves NP and enters EB_NB.
pub fn zone_edges(records: &[ClassificationRecord]) -> (Option<f64>, Option<f64>) {
    let b_of = |r: &ClassificationRecord| match r.params {
        PointParams::Noisy { b, .. } => b,
        PointParams::Scaling { .. } => f64::NAN,
    };
    let cp = records.iter().find(|r| r.numeric.is_some() && r.numeric != Some(Verdict::Np)).map(b_of);
    let eb = records.iter().find(|r| r.numeric == Some(Verdict::EbNb)).map(b_of);
    (cp, eb)
}

/// Sorted distinct values, for grouping sweep columns.
pub fn columns(records: &[ClassificationRecord]) -> Vec<f64> {
    let mut ks: Vec<f64> = records
        .iter()
        .map(|r| match r.params {
            PointParams::Noisy { kappa, .. } => kappa,
            PointParams::Scaling { a, .. } => a,
        })
        .collect();
    ks.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    ks.dedup();
    ks
}

//! On-disk formats: states, characteristic-function and quasiprobability
//! grids, sweep tables and the JSON summaries printed by the CLI.

use std::io::Write;

use quasiscale_core::certify::{ChoiMatrix, Witness};
use quasiscale_core::channels::ScalingMatrixReduction;
use quasiscale_core::fock::TruncatedState;
use quasiscale_core::gaussian::{Side, ThresholdReport};
use quasiscale_core::linalg::CMat;
use quasiscale_core::phase::{ClassificationRecord, PointParams};
use quasiscale_core::quasiprob::{CharFnGrid, QuasiprobGrid};
use quasiscale_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::Error;

/// `{"dim": N, "amplitudes": [[re, im], ...]}` with amplitudes row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&TruncatedState> for StateFile {
    fn from(rho: &TruncatedState) -> Self {
        Self {
            dim: rho.dim().get(),
            amplitudes: rho.amplitudes().as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl StateFile {
    pub fn into_state(self) -> Result<TruncatedState, Error> {
        if self.amplitudes.len() != self.dim * self.dim {
            return Err(Error::Format(format!(
                "state file has {} amplitudes for dimension {}",
                self.amplitudes.len(),
                self.dim
            )));
        }
        let data = self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(TruncatedState::from_matrix(CMat::from_row_major(self.dim, self.dim, data))?)
    }
}

pub fn state_to_json(rho: &TruncatedState) -> Result<String, Error> {
    Ok(serde_json::to_string(&StateFile::from(rho))?)
}

pub fn state_from_json(text: &str) -> Result<TruncatedState, Error> {
    serde_json::from_str::<StateFile>(text)?.into_state()
}

#[derive(Debug, Clone, Serialize)]
pub struct Harmonic {
    pub k: isize,
    pub values: Vec<[f64; 2]>,
}

/// Debug dump of a sampled characteristic function, one entry per harmonic.
#[derive(Debug, Clone, Serialize)]
pub struct CharFnDump {
    pub ordering: f64,
    pub cutoff: f64,
    pub exponent: f64,
    pub source_tail: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub harmonics: Vec<Harmonic>,
}

impl From<&CharFnGrid> for CharFnDump {
    fn from(chi: &CharFnGrid) -> Self {
        let grid = chi.grid();
        let kmax = grid.max_harmonic() as isize;
        let harmonics = (-kmax..=kmax)
            .map(|k| Harmonic {
                k,
                values: (0..grid.nodes().len())
                    .map(|i| {
                        let z = chi.value(k, i);
                        [z.re, z.im]
                    })
                    .collect(),
            })
            .collect();
        Self {
            ordering: chi.ordering().get(),
            cutoff: grid.cutoff(),
            exponent: chi.exponent(),
            source_tail: chi.source_tail(),
            nodes: grid.nodes().to_vec(),
            weights: grid.weights().to_vec(),
            harmonics,
        }
    }
}

pub fn charfn_to_json(chi: &CharFnGrid) -> Result<String, Error> {
    Ok(serde_json::to_string(&CharFnDump::from(chi))?)
}

/// `re_alpha,im_alpha,value` rows.
pub fn write_quasiprob_csv<W: Write>(grid: &QuasiprobGrid, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re_alpha", "im_alpha", "value"])?;
    for (alpha, v) in grid.points() {
        w.serialize((alpha.re, alpha.im, v))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub kind: String,
    pub input: String,
    pub value: f64,
    pub tolerance: f64,
}

impl From<&Witness> for WitnessSummary {
    fn from(w: &Witness) -> Self {
        Self {
            kind: w.kind.to_string(),
            input: w.input.clone(),
            value: w.value,
            tolerance: w.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiBlockSummary {
    pub delta: isize,
    pub size: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiSummary {
    pub channel: String,
    pub dim: usize,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub blocks: Vec<ChoiBlockSummary>,
}

impl ChoiSummary {
    pub fn new(channel: String, j: &ChoiMatrix) -> Self {
        let blocks = j
            .blocks()
            .iter()
            .map(|b| ChoiBlockSummary {
                delta: b.delta,
                size: b.labels.len(),
                min_eigenvalue: b.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
                max_eigenvalue: b.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect();
        Self {
            channel,
            dim: j.dim(),
            trace: j.trace(),
            min_eigenvalue: j.min_eigenvalue(),
            max_eigenvalue: j.max_eigenvalue(),
            blocks,
        }
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Below => "below",
        Side::At => "at",
        Side::Above => "above",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub family: String,
    pub kappa: f64,
    pub b: f64,
    pub cp_threshold: f64,
    pub eb_threshold: f64,
    pub nb_threshold: f64,
    pub cp: String,
    pub eb: String,
    pub nb: String,
}

impl From<&ThresholdReport> for ThresholdSummary {
    fn from(r: &ThresholdReport) -> Self {
        Self {
            family: r.family.to_string(),
            kappa: r.kappa,
            b: r.b,
            cp_threshold: r.cp_threshold,
            eb_threshold: r.eb_threshold,
            nb_threshold: r.nb_threshold,
            cp: side_name(r.cp).into(),
            eb: side_name(r.eb).into(),
            nb: side_name(r.nb).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub k: [[f64; 2]; 2],
    pub s1: [[f64; 2]; 2],
    pub s2: [[f64; 2]; 2],
    pub a: f64,
    pub sign: i8,
    pub residual: f64,
}

impl From<&ScalingMatrixReduction> for ReductionSummary {
    fn from(r: &ScalingMatrixReduction) -> Self {
        Self {
            k: r.k,
            s1: r.s1,
            s2: r.s2,
            a: r.a,
            sign: r.sign,
            residual: r.residual(),
        }
    }
}

/// One row of a scaling sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub s: f64,
    pub a: f64,
    pub analytic: String,
    pub region: String,
    pub numeric: Option<String>,
    pub witness_kind: Option<String>,
    pub witness_value: Option<f64>,
}

/// One row of a noisy attenuator/amplifier sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRow {
    pub family: String,
    pub kappa: f64,
    pub b: f64,
    pub analytic: String,
    pub numeric: Option<String>,
    pub margin_ppt: Option<f64>,
    pub margin_classical: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Scaling(ScalingRow),
    Noisy(NoisyRow),
}

impl From<&ClassificationRecord> for Row {
    fn from(rec: &ClassificationRecord) -> Self {
        let numeric = rec.numeric.map(|v| v.to_string());
        match rec.params {
            PointParams::Scaling { s, a } => Row::Scaling(ScalingRow {
                s,
                a,
                analytic: rec.analytic.to_string(),
                region: rec.region.to_string(),
                numeric,
                witness_kind: rec.witness.as_ref().map(|w| w.kind.to_string()),
                witness_value: rec.witness.as_ref().map(|w| w.value),
            }),
            PointParams::Noisy { family, kappa, b } => Row::Noisy(NoisyRow {
                family: family.to_string(),
                kappa,
                b,
                analytic: rec.analytic.to_string(),
                numeric,
                margin_ppt: rec.margin_ppt,
                margin_classical: rec.margin_classical,
            }),
        }
    }
}

pub const SCALING_HEADER: [&str; 7] = ["s", "a", "analytic", "region", "numeric", "witness_kind", "witness_value"];
pub const NOISY_HEADER: [&str; 7] = ["family", "kappa", "b", "analytic", "numeric", "margin_ppt", "margin_classical"];

fn split(records: &[ClassificationRecord]) -> (Vec<ScalingRow>, Vec<NoisyRow>) {
    let mut scaling = Vec::new();
    let mut noisy = Vec::new();
    for rec in records {
        match Row::from(rec) {
            Row::Scaling(r) => scaling.push(r),
            Row::Noisy(r) => noisy.push(r),
        }
    }
    (scaling, noisy)
}

fn mixed() -> Error {
    Error::Format("a sweep table cannot mix scaling and noisy records".into())
}

/// Sweep table with the fixed header of its kind. An empty table gets the
/// scaling header.
pub fn write_sweep_csv<W: Write>(records: &[ClassificationRecord], out: W) -> Result<(), Error> {
    let (scaling, noisy) = split(records);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    match (scaling.is_empty(), noisy.is_empty()) {
        (_, true) => {
            w.write_record(SCALING_HEADER)?;
            for r in &scaling {
                w.serialize(r)?;
            }
        }
        (true, false) => {
            w.write_record(NOISY_HEADER)?;
            for r in &noisy {
                w.serialize(r)?;
            }
        }
        (false, false) => return Err(mixed()),
    }
    w.flush()?;
    Ok(())
}

/// JSON array with the same fields as the CSV table.
pub fn sweep_to_json(records: &[ClassificationRecord]) -> Result<String, Error> {
    let (scaling, noisy) = split(records);
    match (scaling.is_empty(), noisy.is_empty()) {
        (_, true) => Ok(serde_json::to_string_pretty(&scaling)?),
        (true, false) => Ok(serde_json::to_string_pretty(&noisy)?),
        (false, false) => Err(mixed()),
    }
}

pub fn read_scaling_csv(text: &str) -> Result<Vec<ScalingRow>, Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

pub fn read_noisy_csv(text: &str) -> Result<Vec<NoisyRow>, Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

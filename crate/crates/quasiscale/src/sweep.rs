//! Grid sweeps over the scaling-map plane and the noisy families.

use std::fmt;
use std::str::FromStr;

use quasiscale_core::gaussian::Family;
use quasiscale_core::phase::{
    classify_noisy, classify_scaling, evaluate_noisy, evaluate_scaling, zone_edges, ClassificationRecord, EvalConfig,
    PointParams,
};
use rayon::prelude::*;

use crate::Error;

/// Inclusive `lo:hi:count` axis. A single-point axis needs `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self, Error> {
        let bad = |why| Error::Range(format!("{lo}:{hi}:{count}"), why);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(bad("endpoints must be finite"));
        }
        if count == 0 {
            return Err(bad("count must be positive"));
        }
        if count == 1 && lo != hi {
            return Err(bad("a range with distinct endpoints needs at least two points"));
        }
        if hi < lo {
            return Err(bad("hi must not be below lo"));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn point(v: f64) -> Result<Self, Error> {
        Self::new(v, v, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }

    /// Grid spacing; zero for a single point.
    pub fn step(&self) -> f64 {
        if self.count == 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.count - 1) as f64
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        let bad = || Error::Range(text.to_string(), "expected lo:hi:count");
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(bad());
        };
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        let count = count.trim().parse().map_err(|_| bad())?;
        Range::new(lo, hi, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axes {
    /// Rows in `s` order, `a` varying fastest.
    Scaling { s: Range, a: Range },
    /// Columns in `κ` order, `b` varying fastest.
    Noisy { family: Family, kappa: Range, b: Range },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub axes: Axes,
    /// Points closer than this to an analytic threshold are never counted
    /// as mismatches.
    pub band: f64,
    /// Run the Fock/Choi tier at every `fock_every`-th point and at every
    /// in-band point; 0 disables it.
    pub fock_every: usize,
    pub eval: EvalConfig,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(axes: Axes) -> Self {
        Self {
            axes,
            band: 0.02,
            fock_every: 4,
            eval: EvalConfig::default(),
            jobs: 0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.band > 0.0) {
            return Err(Error::Format(format!("band must be positive, got {}", self.band)));
        }
        if let Axes::Noisy { family, kappa, .. } = self.axes {
            for k in kappa.values() {
                family.check(k)?;
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<PointParams> {
        match self.axes {
            Axes::Scaling { s, a } => {
                let av = a.values();
                s.values()
                    .into_iter()
                    .flat_map(|s| av.iter().map(move |&a| PointParams::Scaling { s, a }))
                    .collect()
            }
            Axes::Noisy { family, kappa, b } => {
                let bv = b.values();
                kappa
                    .values()
                    .into_iter()
                    .flat_map(|kappa| bv.iter().map(move |&b| PointParams::Noisy { family, kappa, b }))
                    .collect()
            }
        }
    }

    fn evaluate(&self, idx: usize, p: PointParams) -> Result<ClassificationRecord, Error> {
        let every = self.fock_every;
        let near = |distance: f64| distance < self.band;
        Ok(match p {
            PointParams::Scaling { s, a } => {
                let full = every > 0 && (idx.is_multiple_of(every) || near(classify_scaling(s, a).boundary_distance));
                evaluate_scaling(s, a, full, &self.eval)?
            }
            PointParams::Noisy { family, kappa, b } => {
                let full = every > 0 && (idx.is_multiple_of(every) || near(classify_noisy(family, kappa, b)?.boundary_distance));
                evaluate_noisy(family, kappa, b, full, &self.eval)?
            }
        })
    }

    /// Command line that re-runs the single point `rec` with the same
    /// numerical settings.
    pub fn reproduction(&self, rec: &ClassificationRecord) -> String {
        let e = &self.eval;
        let fock = if rec.fock_checked { "--every 1" } else { "--every 0" };
        let axes = match rec.params {
            PointParams::Scaling { s, a } => format!("scan scaling --s {s}:{s}:1 --a {a}:{a}:1"),
            PointParams::Noisy { family, kappa, b } => format!("scan {family} --kappa {kappa}:{kappa}:1 --b {b}:{b}:1"),
        };
        format!(
            "{axes} {fock} --dim {} --choi-dim {} --random-probes {} --radial-nodes {} --cutoff {} --tol {} --seed {}",
            e.dim.get(),
            e.choi_dim.get(),
            e.random_probes,
            e.probe.quad.radial_nodes,
            e.probe.quad.cutoff,
            e.probe.tol_pos,
            e.seed
        )
    }
}

/// Numeric zone edges of one `κ` column next to the analytic thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnEdges {
    pub kappa: f64,
    pub cp_edge: Option<f64>,
    pub eb_edge: Option<f64>,
    pub cp_threshold: f64,
    pub eb_threshold: f64,
    /// `b` spacing of the column.
    pub cell: f64,
}

impl ColumnEdges {
    /// Both edges sit within one grid cell above their thresholds.
    pub fn within_cell(&self) -> bool {
        let ok = |edge: Option<f64>, t: f64| match edge {
            Some(e) => e >= t - 1e-9 && e - t <= self.cell + 1e-9,
            None => false,
        };
        ok(self.cp_edge, self.cp_threshold) && ok(self.eb_edge, self.eb_threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    /// Grid order, independent of scheduling.
    pub records: Vec<ClassificationRecord>,
}

impl SweepOutcome {
    pub fn mismatches(&self) -> Vec<&ClassificationRecord> {
        self.records.iter().filter(|r| r.is_mismatch(self.config.band)).collect()
    }

    pub fn fock_checked(&self) -> usize {
        self.records.iter().filter(|r| r.fock_checked).count()
    }

    /// Per-column edges of a noisy sweep; empty for scaling sweeps.
    pub fn columns(&self) -> Vec<ColumnEdges> {
        let Axes::Noisy { b, .. } = self.config.axes else {
            return Vec::new();
        };
        self.records
            .chunks(b.count)
            .map(|col| {
                let kappa = match col[0].params {
                    PointParams::Noisy { kappa, .. } => kappa,
                    PointParams::Scaling { .. } => unreachable!("noisy sweep"),
                };
                let (cp_edge, eb_edge) = zone_edges(col);
                let k2 = kappa * kappa;
                ColumnEdges {
                    kappa,
                    cp_edge,
                    eb_edge,
                    cp_threshold: (1.0 - k2).abs(),
                    eb_threshold: 1.0 + k2,
                    cell: b.step(),
                }
            })
            .collect()
    }

    /// Fails with a reproduction descriptor of the first out-of-band
    /// mismatch.
    pub fn check(&self) -> Result<(), Error> {
        let bad = self.mismatches();
        match bad.first() {
            None => Ok(()),
            Some(first) => Err(Error::Mismatch {
                count: bad.len(),
                first: self.config.reproduction(first),
            }),
        }
    }
}

/// Evaluates every grid point on a pool of `config.jobs` threads.
pub fn run(config: &SweepConfig) -> Result<SweepOutcome, Error> {
    config.validate()?;
    let points = config.points();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let records = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(idx, &p)| config.evaluate(idx, p))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    log::info!("evaluated {} points", records.len());
    Ok(SweepOutcome {
        config: *config,
        records,
    })
}

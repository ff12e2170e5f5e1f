//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use quasiscale::sweep::{self, Axes, SweepConfig};
use quasiscale_core::certify::{
    choi, cp_bracket, duality_check, planck_overlap, positivity_probe, ProbeConfig, ProbeState, WitnessKind,
};
use quasiscale_core::channels::{
    apply_charfn, apply_to_state, decompose, det2, kraus_amplifier, kraus_attenuator, reduce_scaling_matrix,
    ChannelSpec,
};
use quasiscale_core::fock::{make_state, parity_conjugate, FockDim, StateKind, TruncatedState};
use quasiscale_core::gaussian::{entanglement_margins, ClassicalityVerdict, Family, PptVerdict};
use quasiscale_core::quasiprob::{
    char_fn, pairing, quasiprob_from_charfn, reconstruct_state, OrderingParam, PolarGrid, QuadratureConfig,
};
use quasiscale_core::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn dim(n: usize) -> FockDim {
    FockDim::new(n).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Eigenvalues of the width-`v` Gaussian state: `2/(v+1)·((v−1)/(v+1))^k`.
fn geometric_eigen(v: f64, k: i32) -> f64 {
    2.0 / (v + 1.0) * ((v - 1.0) / (v + 1.0)).powi(k)
}

fn scaling_diagram() -> Outcome {
    let cfg = SweepConfig::new(Axes::Scaling {
        s: "-1:1:21".parse().map_err(err)?,
        a: "0.25:2:21".parse().map_err(err)?,
    });
    ensure(cfg.eval.dim.get() == 40 && cfg.eval.choi_dim.get() == 12, || "unexpected defaults".into())?;
    let start = Instant::now();
    let out = sweep::run(&cfg).map_err(err)?;
    let elapsed = start.elapsed();
    let bad = out.mismatches();
    ensure(out.records.len() == 441, || format!("{} points", out.records.len()))?;
    ensure(bad.is_empty(), || {
        format!("{} mismatches, first: {}", bad.len(), cfg.reproduction(bad[0]))
    })?;
    ensure(out.fock_checked() > 0, || "Fock tier never ran".into())?;
    ensure(elapsed <= Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "441 points, {} with Fock/Choi checks, 0 mismatches, {:.1} s",
        out.fock_checked(),
        elapsed.as_secs_f64()
    ))
}

fn vacuum_witness() -> Outcome {
    let d = dim(40);
    let vacuum = [ProbeState::new(StateKind::Vacuum, d).map_err(err)?];
    let cfg = ProbeConfig::default();
    let spec = ChannelSpec::scaling(0.0, 0.5).map_err(err)?;
    let w = positivity_probe(&spec, &vacuum, &cfg).map_err(err)?.ok_or("no witness")?;
    let oracle = geometric_eigen(0.25, 1);
    ensure(w.kind == WitnessKind::OutputEigen, || format!("witness kind {}", w.kind))?;
    ensure((w.value - oracle).abs() <= 1e-6, || format!("min eigenvalue {} vs {oracle}", w.value))?;

    let mut checked = 0;
    for &s in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
        for &a in &[0.3, 0.5, 0.7, 0.85, 0.95, 1.05, 1.2, 1.5, 1.8, 2.2] {
            let spec = ChannelSpec::scaling(s, a).map_err(err)?;
            let flagged = positivity_probe(&spec, &vacuum, &cfg).map_err(err)?.is_some();
            let predicted = a * a * (1.0 - s) + s < 1.0;
            ensure(flagged == predicted, || format!("(s={s}, a={a}): flagged={flagged}"))?;
            checked += 1;
        }
    }
    Ok(format!("value {:.9}, {checked}-point grid agrees", w.value))
}

fn ql_channels() -> Outcome {
    let quad = QuadratureConfig::default();
    let mut worst_eig = f64::INFINITY;
    let mut worst_td: f64 = 0.0;
    let d = dim(40);
    for (kappa, spec, kraus) in [0.3, 0.6, 0.9]
        .into_iter()
        .map(|k| (k, ChannelSpec::attenuator(k), kraus_attenuator(k, d)))
        .chain([1.2, 2.0].into_iter().map(|k| (k, ChannelSpec::amplifier(k), kraus_amplifier(k, d))))
    {
        let spec = spec.map_err(err)?;
        let kraus = kraus.map_err(err)?;
        let j = choi(&spec, dim(12), &quad).map_err(err)?;
        worst_eig = worst_eig.min(j.min_eigenvalue());
        ensure(j.min_eigenvalue() >= -1e-8, || format!("{spec}: Choi min {}", j.min_eigenvalue()))?;
        for n in 0..=5 {
            let rho = make_state(StateKind::Fock(n), d).map_err(err)?;
            let a = kraus.apply(&rho).map_err(err)?;
            let b = apply_to_state(&spec, &rho).map_err(err)?;
            let td = a.trace_distance(&b).map_err(err)?;
            worst_td = worst_td.max(td);
            ensure(td <= 1e-7, || format!("kappa={kappa}, fock {n}: trace distance {td:e}"))?;
        }
    }
    Ok(format!("Choi min {worst_eig:e}, Kraus/char-fn distance {worst_td:e}"))
}

fn cp_thresholds() -> Outcome {
    let quad = QuadratureConfig::default();
    let att = cp_bracket(Family::Attenuator, 0.6, 0.0, 1.0, 1e-4, dim(12), &quad).map_err(err)?;
    let amp = cp_bracket(Family::Amplifier, 1.2, 0.0, 1.0, 1e-4, dim(12), &quad).map_err(err)?;
    ensure((att - 0.64).abs() <= 1e-3, || format!("attenuator crossing {att}"))?;
    ensure((amp - 0.44).abs() <= 1e-3, || format!("amplifier crossing {amp}"))?;
    Ok(format!("attenuator 0.6 -> {att:.5}, amplifier 1.2 -> {amp:.5}"))
}

/// Smallest `b` in `[lo, hi]` at which `flipped` holds, to `1e-12`.
fn bisect(mut lo: f64, mut hi: f64, flipped: impl Fn(f64) -> bool) -> Result<f64, String> {
    ensure(!flipped(lo) && flipped(hi), || format!("no flip in [{lo}, {hi}]"))?;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if flipped(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn eb_nb_thresholds() -> Outcome {
    let mut worst: f64 = 0.0;
    for &kappa in &[0.5, 0.8, 1.0, 1.2, 2.0] {
        let family = if kappa <= 1.0 { Family::Attenuator } else { Family::Amplifier };
        let oracle = 1.0 + kappa * kappa;
        for &r in &[0.2, 0.5, 1.0] {
            let margins = |b: f64| entanglement_margins(family.spec(kappa, b).unwrap().action(), r).unwrap();
            let ppt = bisect(0.0, 2.0 * oracle, |b| margins(b).0.verdict == PptVerdict::Ppt)?;
            let cl = bisect(0.0, 2.0 * oracle, |b| margins(b).1.verdict == ClassicalityVerdict::Classical)?;
            for (what, at) in [("PPT", ppt), ("classicality", cl)] {
                worst = worst.max((at - oracle).abs());
                ensure((at - oracle).abs() <= 1e-9, || format!("kappa={kappa}, r={r}: {what} flips at {at}"))?;
            }
        }
    }
    Ok(format!("15 probes, largest offset from 1+kappa^2 is {worst:e}"))
}

fn decomposition() -> Outcome {
    let mut rng = StdRng::seed_from_u64(12);
    let grid = PolarGrid::new(6.0, 48, 8).map_err(err)?;
    let mut worst: f64 = 0.0;
    for t in 0..20u64 {
        let s = rng.random_range(-1.0..=1.0);
        let a = rng.random_range(-2.5..2.5);
        let rho = make_state(StateKind::RandomPure(t), dim(8)).map_err(err)?;
        let chi = char_fn(&rho, OrderingParam::WIGNER, &grid).map_err(err)?;
        let spec = ChannelSpec::scaling(s, a).map_err(err)?;
        let direct = apply_charfn(&spec, &chi);
        let split = apply_charfn(&decompose(&spec).map_err(err)?, &chi);
        for (x, y) in direct.values().iter().zip(split.values()) {
            let diff = (x - y).norm() / x.norm().max(1.0);
            worst = worst.max(diff);
        }
        ensure(worst <= 1e-12, || format!("(s={s}, a={a}): deviation {worst:e}"))?;
    }
    Ok(format!("20 pairs, largest deviation {worst:e}"))
}

fn planck() -> Outcome {
    let oracle = |a2: f64| {
        let c = 1.0 + 1.0 / a2;
        2.0 / (a2 * c * c) * (1.0 - a2) / a2
    };
    let two = planck_overlap(2.0).map_err(err)?;
    let one = planck_overlap(1.0).map_err(err)?;
    ensure((two - oracle(2.0)).abs() <= 1e-6, || format!("a^2=2 gives {two}"))?;
    ensure((two + 2.0 / 9.0).abs() <= 1e-6, || format!("a^2=2 gives {two}"))?;
    ensure(one.abs() <= 1e-10, || format!("a^2=1 gives {one}"))?;
    let spec = ChannelSpec::scaling(0.0, 2f64.sqrt()).map_err(err)?;
    let fock1 = make_state(StateKind::Fock(1), dim(8)).map_err(err)?;
    let reconstructed = apply_to_state(&spec, &fock1).map_err(err)?.get(0, 0).re;
    ensure((reconstructed - two).abs() <= 1e-6, || format!("reconstruction gives {reconstructed}"))?;
    Ok(format!("pairing {two:.9}, reconstruction {reconstructed:.9}, a^2=1 -> {one:e}"))
}

fn duality() -> Outcome {
    let quad = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for &(s, a) in &[(0.5, 0.7), (-0.5, 1.4), (0.0, 2.0)] {
        let rep = duality_check(s, a, 20, 2024, dim(8), &quad).map_err(err)?;
        worst = worst.max(rep.max_abs_diff);
        ensure(rep.max_abs_diff <= 1e-8, || format!("(s={s}, a={a}): difference {:e}", rep.max_abs_diff))?;
        ensure(rep.sign_consistent, || format!("(s={s}, a={a}): witness signs differ"))?;
    }
    Ok(format!("60 pairs, largest difference {worst:e}, signs consistent"))
}

fn k_reduction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let mut done = 0;
    let mut worst: f64 = 0.0;
    while done < 100 {
        let k = [
            [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
        ];
        if det2(k).abs() < 1e-3 {
            continue;
        }
        let red = reduce_scaling_matrix(k).map_err(err)?;
        let res = red.residual();
        let d1 = (det2(red.s1) - 1.0).abs();
        let d2 = (det2(red.s2) - 1.0).abs();
        worst = worst.max(res);
        ensure(res <= 1e-10, || format!("{k:?}: residual {res:e}"))?;
        ensure(d1 <= 1e-12 && d2 <= 1e-12, || format!("{k:?}: det offsets {d1:e}, {d2:e}"))?;
        done += 1;
    }
    Ok(format!("100 matrices, largest residual {worst:e}"))
}

fn properties() -> Outcome {
    let grid = PolarGrid::new(12.0, 300, 12).map_err(err)?;
    let d = dim(12);
    let mut round: f64 = 0.0;
    let mut pair: f64 = 0.0;
    let mut parity: f64 = 0.0;
    for seed in 0..5u64 {
        let rho = make_state(StateKind::RandomPure(seed), dim(8)).map_err(err)?;
        let sigma = make_state(StateKind::RandomPure(seed + 100), dim(8)).map_err(err)?;
        for &s in &[-1.0, -0.5, 0.0, 0.5] {
            let ord = OrderingParam::new(s).map_err(err)?;
            let chi = char_fn(&rho.resized(d), ord, &grid).map_err(err)?;
            let back = reconstruct_state(&chi, d).map_err(err)?;
            round = round.max(back.max_abs_diff(&rho.resized(d)).map_err(err)?);
            let p = pairing(&rho, &sigma, ord).map_err(err)?;
            pair = pair.max((p * PI - rho.overlap(&sigma).map_err(err)?).abs());
        }
        let big = rho.resized(dim(16));
        for &(s, a) in &[(0.5, 0.8), (-0.3, 1.3), (0.0, 1.1)] {
            let neg = apply_to_state(&ChannelSpec::scaling(s, -a).map_err(err)?, &big).map_err(err)?;
            let pos = apply_to_state(&ChannelSpec::scaling(s, a).map_err(err)?, &big).map_err(err)?;
            parity = parity.max(neg.max_abs_diff(&parity_conjugate(&pos)).map_err(err)?);
        }
    }
    ensure(round <= 1e-8, || format!("round trip {round:e}"))?;
    ensure(pair <= 1e-8, || format!("pairing {pair:e}"))?;
    ensure(parity <= 1e-9, || format!("parity {parity:e}"))?;

    let divergent = |r: Result<TruncatedState, Error>| matches!(r, Err(Error::DivergentReconstruction { .. }));
    let vacuum = make_state(StateKind::Vacuum, dim(8)).map_err(err)?;
    let fock = make_state(StateKind::Fock(2), dim(8)).map_err(err)?;
    let glauber = char_fn(&fock, OrderingParam::P, &grid).map_err(err)?;
    let flags = [
        divergent(apply_to_state(&ChannelSpec::scaling(-1.0, 0.5).map_err(err)?, &vacuum)),
        divergent(apply_to_state(&ChannelSpec::noise(-1.5).map_err(err)?, &vacuum)),
        divergent(apply_to_state(&ChannelSpec::scaling(-1.0, 0.25).map_err(err)?, &fock)),
        matches!(
            quasiprob_from_charfn(&glauber, &grid),
            Err(Error::DivergentReconstruction { .. })
        ),
    ];
    ensure(flags.iter().all(|&f| f), || format!("divergence flags {flags:?}"))?;
    Ok(format!(
        "round trip {round:e}, pairing {pair:e}, parity {parity:e}, {} divergent requests flagged",
        flags.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("scaling-map phase diagram sweep", scaling_diagram),
        ("vacuum witness", vacuum_witness),
        ("quantum-limited channels are CP", ql_channels),
        ("CP thresholds of noisy channels", cp_thresholds),
        ("EB/NB thresholds", eb_nb_thresholds),
        ("noise decomposition", decomposition),
        ("Planck overlap", planck),
        ("duality", duality),
        ("K-matrix reduction", k_reduction),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

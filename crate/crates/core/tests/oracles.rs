//! Closed-form and independently coded reference values.

use approx::assert_abs_diff_eq;
use quasiscale_core::certify::{choi, cp_bracket, duality_check, pairing_probe, planck_overlap};
use quasiscale_core::channels::{
    apply_charfn, apply_to_state, apply_to_state_with, decompose, kraus_amplifier, kraus_attenuator, transfer_tensor,
    ChannelSpec,
};
use quasiscale_core::fock::{make_state, parity_conjugate, FockDim, StateKind, TruncatedState};
use quasiscale_core::gaussian::{entanglement_margins, Family};
use quasiscale_core::quasiprob::{char_fn, reconstruct_state, CharFn, GaussAction, OrderingParam, PolarGrid, QuadratureConfig};
use quasiscale_core::{Complex64, Error};

fn dim(n: usize) -> FockDim {
    FockDim::new(n).unwrap()
}

/// `p_k = 2/(1+v)·((v−1)/(v+1))^k`, written out term by term.
fn geometric(v: f64, k: usize) -> f64 {
    let mut p = 2.0 / (1.0 + v);
    for _ in 0..k {
        p *= (v - 1.0) / (v + 1.0);
    }
    p
}

/// `⟨1|Γ_{0,a}(·)|…⟩` overlap from the Gaussian radial integral
/// `∫ (1 − a²r²) e^{−(1+a²) r²/2} r dr`, done by hand.
fn planck_closed_form(a_sq: f64) -> f64 {
    2.0 * (1.0 - a_sq) / ((1.0 + a_sq) * (1.0 + a_sq))
}

#[test]
fn half_scaling_of_vacuum_has_geometric_diagonal() {
    let vac = make_state(StateKind::Vacuum, dim(40)).unwrap();
    let out = apply_to_state(&ChannelSpec::scaling(0.0, 0.5).unwrap(), &vac).unwrap();
    for (k, p) in out.diagonal().iter().enumerate() {
        assert_abs_diff_eq!(*p, geometric(0.25, k), epsilon = 1e-10);
    }
    assert_abs_diff_eq!(out.spectrum().unwrap().min(), -0.96, epsilon = 1e-6);
}

#[test]
fn planck_overlap_matches_closed_form() {
    for &a_sq in &[0.25, 0.5, 1.0, 2.0, 3.0] {
        assert_abs_diff_eq!(planck_overlap(a_sq).unwrap(), planck_closed_form(a_sq), epsilon = 1e-10);
        // the other printed form: (2/(a²c²))(1−a²)/a² with c = 1 + 1/a²
        let c = 1.0 + 1.0 / a_sq;
        assert_abs_diff_eq!(planck_closed_form(a_sq), 2.0 / (a_sq * c * c) * (1.0 - a_sq) / a_sq, epsilon = 1e-14);
    }
    assert_abs_diff_eq!(planck_overlap(2.0).unwrap(), -2.0 / 9.0, epsilon = 1e-6);
    assert!(planck_overlap(1.0).unwrap().abs() <= 1e-10);
}

#[test]
fn planck_value_by_reconstruction() {
    let f1 = make_state(StateKind::Fock(1), dim(40)).unwrap();
    let out = apply_to_state(&ChannelSpec::scaling(0.0, 2f64.sqrt()).unwrap(), &f1).unwrap();
    assert_abs_diff_eq!(out.get(0, 0).re, -2.0 / 9.0, epsilon = 1e-9);
}

#[test]
fn kraus_two_term_oracle() {
    for &kappa in &[0.3, 0.8] {
        let k2: f64 = kappa * kappa;
        let f1 = make_state(StateKind::Fock(1), dim(12)).unwrap();
        let out = kraus_attenuator(kappa, dim(12)).unwrap().apply(&f1).unwrap();
        assert_abs_diff_eq!(out.get(0, 0).re, 1.0 - k2, epsilon = 1e-14);
        assert_abs_diff_eq!(out.get(1, 1).re, k2, epsilon = 1e-14);
    }
}

#[test]
fn amplifier_on_vacuum_is_thermal() {
    let d = dim(40);
    let vac = make_state(StateKind::Vacuum, d).unwrap();
    let by_kraus = kraus_amplifier(2.0, d).unwrap().apply(&vac).unwrap();
    let by_charfn = apply_to_state(&ChannelSpec::amplifier(2.0).unwrap(), &vac).unwrap();
    for k in 0..40 {
        let p = 0.25 * 0.75f64.powi(k as i32);
        assert_abs_diff_eq!(by_kraus.get(k, k).re, p, epsilon = 1e-12);
        assert_abs_diff_eq!(by_charfn.get(k, k).re, p, epsilon = 1e-10);
    }
    let f2 = make_state(StateKind::Fock(2), dim(80)).unwrap();
    let out = kraus_amplifier(1.5, dim(80)).unwrap().apply(&f2).unwrap();
    assert!((out.trace() - 1.0).abs() < 1e-8);
}

#[test]
fn coherent_state_through_attenuator() {
    let d = dim(30);
    let alpha = Complex64::new(0.9, -0.4);
    let kappa = 0.7;
    let rho = make_state(StateKind::Coherent(alpha), d).unwrap();
    let want = make_state(StateKind::Coherent(alpha * kappa), d).unwrap();
    let kraus = kraus_attenuator(kappa, d).unwrap().apply(&rho).unwrap();
    let charfn = apply_to_state(&ChannelSpec::attenuator(kappa).unwrap(), &rho).unwrap();
    assert!(kraus.trace_distance(&want).unwrap() < 1e-8);
    assert!(charfn.trace_distance(&want).unwrap() < 1e-8);
}

#[test]
fn kraus_and_charfn_routes_agree() {
    let d = dim(40);
    let specs = [
        (ChannelSpec::attenuator(0.3).unwrap(), kraus_attenuator(0.3, d).unwrap()),
        (ChannelSpec::attenuator(0.6).unwrap(), kraus_attenuator(0.6, d).unwrap()),
        (ChannelSpec::attenuator(0.9).unwrap(), kraus_attenuator(0.9, d).unwrap()),
        (ChannelSpec::amplifier(1.2).unwrap(), kraus_amplifier(1.2, d).unwrap()),
        (ChannelSpec::amplifier(2.0).unwrap(), kraus_amplifier(2.0, d).unwrap()),
    ];
    for (spec, kraus) in &specs {
        for n in 0..=5 {
            let rho = make_state(StateKind::Fock(n), d).unwrap();
            let a = kraus.apply(&rho).unwrap();
            let b = apply_to_state(spec, &rho).unwrap();
            let dist = a.trace_distance(&b).unwrap();
            assert!(dist <= 1e-7, "{spec} on fock {n}: {dist:e}");
        }
    }
}

#[test]
fn transfer_tensor_preserves_trace() {
    let quad = QuadratureConfig::default();
    for spec in [
        ChannelSpec::attenuator(0.6).unwrap(),
        ChannelSpec::scaling(0.0, 0.8).unwrap(),
        ChannelSpec::amplifier(1.2).unwrap(),
    ] {
        let t = transfer_tensor(&spec, dim(6), dim(60), &quad).unwrap();
        for m in 0..6 {
            for p in 0..6 {
                let tr: f64 = (0..60).map(|n| t.get(n, n, m, p)).sum();
                let want = if m == p { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(tr, want, epsilon = 1e-8);
            }
        }
    }
    let t = transfer_tensor(&ChannelSpec::attenuator(0.6).unwrap(), dim(6), dim(6), &quad).unwrap();
    assert_abs_diff_eq!(t.get(0, 0, 1, 1), 0.64, epsilon = 1e-10);
    for n in 0..6 {
        for q in 0..6 {
            for m in 0..6 {
                for p in 0..6 {
                    if n as isize - q as isize != m as isize - p as isize {
                        assert_eq!(t.get(n, q, m, p), 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn transfer_tensor_agrees_with_state_route() {
    let d = dim(10);
    let quad = QuadratureConfig::default();
    let spec = ChannelSpec::scaling(0.4, 1.3).unwrap();
    let rho = make_state(StateKind::RandomPure(11), d).unwrap();
    let via_tensor = transfer_tensor(&spec, d, d, &quad).unwrap().apply(&rho).unwrap();
    let via_charfn = apply_to_state_with(&spec, &rho, d, &quad).unwrap();
    assert!(via_tensor.max_abs_diff(&via_charfn).unwrap() < 1e-10);
}

#[test]
fn choi_of_quantum_limited_channels_is_psd() {
    let quad = QuadratureConfig::default();
    for spec in [
        ChannelSpec::attenuator(0.3).unwrap(),
        ChannelSpec::attenuator(0.6).unwrap(),
        ChannelSpec::attenuator(0.9).unwrap(),
        ChannelSpec::amplifier(1.2).unwrap(),
        ChannelSpec::amplifier(2.0).unwrap(),
    ] {
        let j = choi(&spec, dim(12), &quad).unwrap();
        assert!(j.min_eigenvalue() >= -1e-8, "{spec}: {}", j.min_eigenvalue());
    }
    let att = choi(&ChannelSpec::attenuator(0.6).unwrap(), dim(12), &quad).unwrap();
    assert_abs_diff_eq!(att.trace(), 12.0, epsilon = 1e-8);
}

#[test]
fn cp_thresholds_by_bisection() {
    let quad = QuadratureConfig::default();
    let tol = 1e-4;
    let att = cp_bracket(Family::Attenuator, 0.6, 0.3, 1.0, tol, dim(12), &quad).unwrap();
    assert_abs_diff_eq!(att, 0.64, epsilon = 1e-3);
    let amp = cp_bracket(Family::Amplifier, 1.2, 0.1, 1.0, tol, dim(12), &quad).unwrap();
    assert_abs_diff_eq!(amp, 0.44, epsilon = 1e-3);
    let unit = cp_bracket(Family::Attenuator, 1.0, -0.5, 0.5, tol, dim(12), &quad).unwrap();
    assert_abs_diff_eq!(unit, 0.0, epsilon = 1e-3);
    assert!(matches!(
        cp_bracket(Family::Attenuator, 0.6, 1.0, 2.0, tol, dim(12), &quad),
        Err(Error::NoSignChange { .. })
    ));
}

#[test]
fn cp_threshold_stable_under_probe_doubling() {
    let quad = QuadratureConfig::default();
    let small = cp_bracket(Family::Amplifier, 1.2, 0.1, 1.0, 1e-4, dim(8), &quad).unwrap();
    let large = cp_bracket(Family::Amplifier, 1.2, 0.1, 1.0, 1e-4, dim(16), &quad).unwrap();
    assert!((small - large).abs() <= 1e-4);
}

/// Bisection for the sign flip of a margin, written independently of the
/// library's classifier.
fn flip(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) < 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn entanglement_breaking_flip_points() {
    for &kappa in &[0.5, 0.8, 1.0, 1.2, 2.0] {
        for &r in &[0.2, 0.5, 1.0] {
            let k2: f64 = kappa * kappa;
            let action = |b: f64| GaussAction { scale: kappa, noise: b };
            let ppt = flip(|b| entanglement_margins(action(b), r).unwrap().0.margin, 0.0, 10.0);
            let cl = flip(|b| entanglement_margins(action(b), r).unwrap().1.margin, 0.0, 10.0);
            assert_abs_diff_eq!(ppt, 1.0 + k2, epsilon = 1e-9);
            assert_abs_diff_eq!(cl, 1.0 + k2, epsilon = 1e-9);
        }
    }
}

#[test]
fn classicality_schur_complement() {
    // (a=1, b=1) on tmsv(0.5): per quadrature the 2×2 block of V − 𝟙 has
    // determinant (cosh 2r − 1)(b − 1 − a²) < 0.
    let c = 1.0f64.cosh();
    let s = 1.0f64.sinh();
    let (a, b) = (1.0, 1.0);
    let det = (c - 1.0) * (a * a * c + b - 1.0) - a * a * s * s;
    assert_abs_diff_eq!(det, (c - 1.0) * (b - 1.0 - a * a), epsilon = 1e-12);
    let (_, cl) = entanglement_margins(GaussAction { scale: a, noise: b }, 0.5).unwrap();
    assert!(cl.margin < 0.0);
}

#[test]
fn fast_path_matches_fock_path() {
    let d = dim(40);
    let quad = QuadratureConfig::default();
    for (v_in, spec) in [
        (1.0, ChannelSpec::attenuator(0.6).unwrap()),
        (2.0, ChannelSpec::amplifier(1.2).unwrap()),
        (1.0, ChannelSpec::noisy_attenuator(0.5, 1.0).unwrap()),
        (1.5, ChannelSpec::scaling(0.3, 0.8).unwrap()),
    ] {
        let rho = if v_in == 1.0 {
            make_state(StateKind::Vacuum, d).unwrap()
        } else {
            make_state(StateKind::Thermal(v_in), d).unwrap()
        };
        let out = apply_to_state_with(&spec, &rho, d, &quad).unwrap();
        let v_out = spec.action().map_width(v_in);
        for (k, p) in out.diagonal().iter().enumerate() {
            assert_abs_diff_eq!(*p, geometric(v_out, k), epsilon = 1e-7);
        }
    }
}

#[test]
fn decomposition_is_exact_on_grids() {
    let rho = make_state(StateKind::RandomPure(3), dim(10)).unwrap();
    let grid = PolarGrid::new(6.0, 40, 10).unwrap();
    for &(s, a) in &[(0.3, 0.6), (-1.0, 2.0), (1.0, 0.2), (-0.7, -1.4)] {
        let spec = ChannelSpec::scaling(s, a).unwrap();
        let chi = char_fn(&rho, OrderingParam::new(-0.5).unwrap(), &grid).unwrap();
        let direct = apply_charfn(&spec, &chi);
        let split = apply_charfn(&decompose(&spec).unwrap(), &chi);
        for (x, y) in direct.values().iter().zip(split.values()) {
            assert!((x - y).norm() <= 1e-12);
        }
    }
}

#[test]
fn sign_covariance() {
    let d = dim(16);
    let rho = make_state(StateKind::RandomPure(5), d).unwrap();
    for &(s, a) in &[(0.5, 0.7), (-0.3, 1.4), (1.0, 0.4)] {
        let neg = apply_to_state(&ChannelSpec::scaling(s, -a).unwrap(), &rho).unwrap();
        let spec = ChannelSpec::scaling(s, a).unwrap();
        let outside = parity_conjugate(&apply_to_state(&spec, &rho).unwrap());
        let inside = apply_to_state(&spec, &parity_conjugate(&rho)).unwrap();
        assert!(neg.max_abs_diff(&outside).unwrap() <= 1e-9);
        assert!(neg.max_abs_diff(&inside).unwrap() <= 1e-9);
    }
}

#[test]
fn pairing_is_overlap_over_pi() {
    let d = dim(10);
    for seed in 0..4u64 {
        let rho = make_state(StateKind::RandomPure(seed), d).unwrap();
        let sigma = make_state(StateKind::RandomPure(seed + 100), d).unwrap();
        let direct = rho.overlap(&sigma).unwrap();
        for &s in &[-1.0, 0.0, 0.5] {
            let p = quasiscale_core::quasiprob::pairing(&rho, &sigma, OrderingParam::new(s).unwrap()).unwrap();
            assert_abs_diff_eq!(p * std::f64::consts::PI, direct, epsilon = 1e-8);
        }
    }
}

#[test]
fn pairing_probe_examples() {
    let d = dim(8);
    let vac = make_state(StateKind::Vacuum, d).unwrap();
    let f1 = make_state(StateKind::Fock(1), d).unwrap();
    let rho = make_state(StateKind::RandomPure(9), d).unwrap();
    let id = pairing_probe(&ChannelSpec::scaling(0.4, 1.0).unwrap(), &rho, &vac).unwrap();
    assert_abs_diff_eq!(id, rho.overlap(&vac).unwrap(), epsilon = 1e-10);
    let p = pairing_probe(&ChannelSpec::scaling(0.0, 2f64.sqrt()).unwrap(), &f1, &vac).unwrap();
    assert_abs_diff_eq!(p, -2.0 / 9.0, epsilon = 1e-10);
    // Φ(|0⟩⟨0|) formally has width v = a² − (1 − a²) = −1/2
    let q = pairing_probe(&ChannelSpec::scaling(-1.0, 0.5).unwrap(), &vac, &f1).unwrap();
    assert_abs_diff_eq!(q, geometric(-0.5, 1), epsilon = 1e-9);
    assert!(q < 0.0);
}

#[test]
fn two_routes_agree() {
    let d = dim(20);
    let quad = QuadratureConfig::default();
    for &(s, a) in &[(0.5, 0.7), (-0.5, 1.4), (1.0, 0.3)] {
        let spec = ChannelSpec::scaling(s, a).unwrap();
        let rho = make_state(StateKind::RandomPure(21), dim(8)).unwrap().resized(d);
        let sigma = make_state(StateKind::Fock(2), d).unwrap();
        let direct = apply_to_state_with(&spec, &rho, d, &quad).unwrap().overlap(&sigma).unwrap();
        let paired = pairing_probe(&spec, &rho, &sigma).unwrap();
        assert_abs_diff_eq!(direct, paired, epsilon = 1e-7);
    }
}

#[test]
fn duality_arrangements_agree() {
    let quad = QuadratureConfig::default();
    for &(s, a) in &[(0.5, 0.7), (-0.5, 1.4), (0.0, 2.0), (0.0, 0.5), (1.0, 0.7)] {
        let report = duality_check(s, a, 20, 42, dim(8), &quad).unwrap();
        assert!(report.max_abs_diff <= 1e-8, "{s} {a}: {:e}", report.max_abs_diff);
        assert!(report.sign_consistent);
    }
}

#[test]
fn divergent_requests_are_flagged() {
    let d = dim(12);
    let vac = make_state(StateKind::Vacuum, d).unwrap();
    for spec in [
        ChannelSpec::scaling(-1.0, 0.5).unwrap(),
        ChannelSpec::scaling(-1.0, 0.7).unwrap(),
        ChannelSpec::scaling(0.0, 0.0).unwrap(),
        ChannelSpec::noise(-1.5).unwrap(),
    ] {
        assert!(matches!(apply_to_state(&spec, &vac), Err(Error::DivergentReconstruction { .. })), "{spec}");
        assert!(matches!(
            transfer_tensor(&spec, d, d, &QuadratureConfig::default()),
            Err(Error::DivergentReconstruction { .. })
        ));
    }
    let chi = char_fn(&vac, OrderingParam::WIGNER, &PolarGrid::new(6.0, 40, 4).unwrap()).unwrap();
    let out = apply_charfn(&ChannelSpec::scaling(-1.0, 0.5).unwrap(), &chi);
    assert!(matches!(reconstruct_state(&out, d), Err(Error::DivergentReconstruction { .. })));
}

#[test]
fn pinch_map_outputs() {
    let d = dim(12);
    let rho = make_state(StateKind::RandomPure(1), d).unwrap();
    let vac = make_state(StateKind::Vacuum, d).unwrap();
    let out = apply_to_state(&ChannelSpec::scaling(1.0, 0.0).unwrap(), &rho).unwrap();
    assert!(out.max_abs_diff(&vac).unwrap() < 1e-10);
    let half = apply_to_state(&ChannelSpec::scaling(0.5, 0.0).unwrap(), &rho).unwrap();
    for (k, p) in half.diagonal().iter().enumerate() {
        assert_abs_diff_eq!(*p, geometric(0.5, k), epsilon = 1e-10);
    }
}

#[test]
fn gaussian_source_and_fock_source_agree() {
    let d = dim(40);
    let quad = QuadratureConfig::default();
    let thermal = make_state(StateKind::Thermal(2.0), d).unwrap();
    let a = quasiscale_core::quasiprob::reconstruct_auto(&CharFn::of_state(&thermal), d, &quad).unwrap();
    let b = quasiscale_core::quasiprob::reconstruct_auto(&CharFn::gaussian(2.0), d, &quad).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-8);
    assert!(a.max_abs_diff(&thermal).unwrap() < 1e-10);
}

#[test]
fn round_trip_through_each_ordering() {
    let d = dim(16);
    let rho: TruncatedState = make_state(StateKind::RandomPure(77), dim(10)).unwrap().resized(d);
    let grid = PolarGrid::new(12.0, 300, 16).unwrap();
    for &s in &[-1.0, -0.5, 0.0, 0.5] {
        let chi = char_fn(&rho, OrderingParam::new(s).unwrap(), &grid).unwrap();
        let back = reconstruct_state(&chi, d).unwrap();
        assert!(back.max_abs_diff(&rho).unwrap() <= 1e-8);
    }
}

//! Special functions and quadrature rules used by the phase-space kernels.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// `ln k!` for `k = 0..len`, accumulated as a running sum of logarithms.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len.max(1));
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..len {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Normalised associated-Laguerre functions
///
/// `φ_m^{(k)}(x) = sqrt(m!/(m+k)!) · x^{k/2} · e^{-x/2} · L_m^{(k)}(x)`
///
/// for `m = 0..count`, written into `out`. These are exactly the real
/// displacement matrix elements `⟨m+k|D(r)|m⟩` at `x = r²`. The recurrence
/// runs on the normalised functions so no factorial is ever formed.
pub fn laguerre_functions(k: usize, x: f64, ln_fact: &[f64], out: &mut [f64]) {
    let count = out.len();
    if count == 0 {
        return;
    }
    let phi0 = if x == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * k as f64 * x.ln() - 0.5 * x - 0.5 * ln_fact[k]).exp()
    };
    out[0] = phi0;
    if count == 1 {
        return;
    }
    let kf = k as f64;
    out[1] = (1.0 + kf - x) * phi0 / (1.0 + kf).sqrt();
    for m in 1..count - 1 {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + kf - x) * out[m] - (mf * (mf + kf)).sqrt() * out[m - 1])
            / ((mf + 1.0) * (mf + 1.0 + kf)).sqrt();
        out[m + 1] = next;
    }
}

/// Real displacement matrix `d[n][m] = ⟨n|D(r)|m⟩` for `n < rows`, `m < cols`
/// and real `r ≥ 0`, stored row-major.
///
/// For `n < m` the element is `(−1)^{m−n} d[m][n]`.
pub fn displacement_table(rows: usize, cols: usize, r: f64, ln_fact: &[f64]) -> Vec<f64> {
    let mut table = vec![0.0; rows * cols];
    let x = r * r;
    let mut buf = vec![0.0; rows.max(cols)];
    // n >= m, k = n - m
    for k in 0..rows {
        let count = cols.min(rows - k);
        if count == 0 {
            continue;
        }
        laguerre_functions(k, x, ln_fact, &mut buf[..count]);
        for m in 0..count {
            table[(m + k) * cols + m] = buf[m];
        }
    }
    // n < m, k = m - n
    for k in 1..cols {
        let count = rows.min(cols - k);
        if count == 0 {
            continue;
        }
        laguerre_functions(k, x, ln_fact, &mut buf[..count]);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for n in 0..count {
            table[n * cols + n + k] = sign * buf[n];
        }
    }
    table
}

/// Gauss–Legendre nodes and weights on `[lo, hi]`, nodes ascending.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // z is the i-th largest root.
        x[n - 1 - i] = mid + half * z;
        x[i] = mid - half * z;
        w[i] = half * weight;
        w[n - 1 - i] = half * weight;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Integer-order Bessel functions `J_0(x) … J_kmax(x)` by Miller's backward
/// recurrence normalised with `J_0 + 2 Σ J_{2j} = 1`.
pub fn bessel_j_sequence(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = {
        let base = (kmax as f64).max(ax) + 40.0 + 4.0 * ax.sqrt();
        let s = base as usize;
        s + (s % 2)
    };
    let mut next = 0.0_f64;
    let mut cur = 1e-300_f64;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k (unnormalised), next = J_{k+1}
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        let idx = k - 1;
        if idx <= kmax {
            out[idx] = cur;
        }
        if idx > 0 && idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

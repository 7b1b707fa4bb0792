//! Initial states built from the unit-frequency ladder `b = (q + i p)/sqrt(2 hbar)`.
//!
//! Its coherent states have exactly the isotropic Husimi width used for the
//! classical densities. In the number basis of an oscillator with frequency
//! `w`, `b = mu a + nu a+` with `mu = (1/sqrt w + sqrt w)/2`,
//! `nu = (1/sqrt w - sqrt w)/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{DensitySpec, Factor, FactorKind};

use super::operators::FockBasis;

/// Truncation loss above this is an error.
pub const MAX_TRUNCATION_LOSS: f64 = 1e-8;

/// Normalised amplitudes of a factor in the `w` number basis,
/// computed on `len` levels (untruncated as far as the caller cares).
fn mode_amplitudes(f: &Factor, omega: f64, hbar: f64, len: usize) -> Vec<Complex64> {
    let sw = omega.sqrt();
    let (mu, nu) = (0.5 * (1.0 / sw + sw), 0.5 * (1.0 / sw - sw));
    let beta = Complex64::new(f.q, f.p) / (2.0 * hbar).sqrt();
    // b |beta> = beta |beta>:  mu sqrt(n+1) c[n+1] + nu sqrt(n) c[n-1] = beta c[n]
    let mut c = vec![Complex64::new(0.0, 0.0); len + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for n in 0..len {
        let prev = if n > 0 {
            c[n - 1] * (nu * (n as f64).sqrt())
        } else {
            Complex64::new(0.0, 0.0)
        };
        c[n + 1] = (beta * c[n] - prev) / (mu * ((n + 1) as f64).sqrt());
        // keep the recursion in range; the overall scale is fixed below
        if c[n + 1].norm() > 1e100 {
            for v in c.iter_mut().take(n + 2) {
                *v *= 1e-100;
            }
        }
    }
    c.truncate(len);
    if f.kind == FactorKind::Fock {
        // b+ = mu a+ + nu a applied to the vacuum of b
        let vac = c.clone();
        for (n, slot) in c.iter_mut().enumerate() {
            let up = if n > 0 {
                vac[n - 1] * (mu * (n as f64).sqrt())
            } else {
                Complex64::new(0.0, 0.0)
            };
            let down = if n + 1 < len {
                vac[n + 1] * (nu * ((n + 1) as f64).sqrt())
            } else {
                Complex64::new(0.0, 0.0)
            };
            *slot = up + down;
        }
    }
    let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    c.iter().map(|v| v / norm).collect()
}

/// Amplitudes on levels `0..=n_max` and the probability left above `n_max`.
pub fn mode_state(f: &Factor, omega: f64, hbar: f64, n_max: usize) -> (Vec<Complex64>, f64, usize) {
    let beta2 = (f.q * f.q + f.p * f.p) / (2.0 * hbar);
    let len = (3 * n_max + 200).max((8.0 * beta2) as usize + 200);
    let full = mode_amplitudes(f, omega, hbar, len);
    let mut tail = 0.0;
    let mut required = len;
    for n in (0..len).rev() {
        if tail + full[n].norm_sqr() >= MAX_TRUNCATION_LOSS {
            required = n;
            break;
        }
        tail += full[n].norm_sqr();
    }
    let loss: f64 = full[n_max + 1..].iter().map(|v| v.norm_sqr()).sum();
    let mut kept = full[..=n_max].to_vec();
    let norm = kept.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    kept.iter_mut().for_each(|v| *v /= norm);
    (kept, loss, required)
}

/// Product state for `spec` on `basis`.
pub fn initial_state(
    spec: &DensitySpec,
    omegas: (f64, f64),
    hbar: f64,
    basis: FockBasis,
) -> Result<Vec<Complex64>> {
    let (a, la, ra) = mode_state(&spec.factors[0], omegas.0, hbar, basis.n1_max);
    let (b, lb, rb) = mode_state(&spec.factors[1], omegas.1, hbar, basis.n2_max);
    for (loss, required) in [(la, ra), (lb, rb)] {
        if loss > MAX_TRUNCATION_LOSS {
            return Err(Error::Truncation { loss, required });
        }
    }
    let mut psi = Vec::with_capacity(basis.dim());
    for x in &a {
        for y in &b {
            psi.push(x * y);
        }
    }
    Ok(psi)
}

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::operators::Hamiltonian;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Bases up to this dimension are diagonalised; larger ones use Chebyshev.
pub const DENSE_LIMIT: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Eigen,
    Chebyshev,
}

/// `psi(t) = exp(-i H t / hbar) psi0` at a sequence of times.
pub enum Propagator {
    Eigen {
        energies: DVector<f64>,
        vectors: DMatrix<f64>,
        /// `V^T psi0`, split into real and imaginary parts.
        coeffs: (DVector<f64>, DVector<f64>),
        hbar: f64,
    },
    Chebyshev(Chebyshev),
}

impl Propagator {
    pub fn new(h: &Hamiltonian, psi0: &[Complex64], method: Method) -> Result<Self> {
        let dense = match method {
            Method::Auto => h.dim() <= DENSE_LIMIT,
            Method::Eigen => true,
            Method::Chebyshev => false,
        };
        if !dense {
            return Ok(Propagator::Chebyshev(Chebyshev::new(
                h.clone(),
                psi0.to_vec(),
            )));
        }
        let eig = SymmetricEigen::try_new(h.dense(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Convergence("symmetric eigensolver did not converge".into()))?;
        let re = DVector::from_iterator(psi0.len(), psi0.iter().map(|c| c.re));
        let im = DVector::from_iterator(psi0.len(), psi0.iter().map(|c| c.im));
        let coeffs = (eig.eigenvectors.tr_mul(&re), eig.eigenvectors.tr_mul(&im));
        Ok(Propagator::Eigen {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            coeffs,
            hbar: h.hbar,
        })
    }

    /// State at `t`. Chebyshev propagation is incremental, so times should not decrease.
    pub fn state(&mut self, t: f64) -> Vec<Complex64> {
        match self {
            Propagator::Eigen {
                energies,
                vectors,
                coeffs,
                hbar,
            } => {
                let n = energies.len();
                let mut re = DVector::zeros(n);
                let mut im = DVector::zeros(n);
                for k in 0..n {
                    let (s, c) = (-energies[k] * t / *hbar).sin_cos();
                    let z = Complex64::new(c, s) * Complex64::new(coeffs.0[k], coeffs.1[k]);
                    re[k] = z.re;
                    im[k] = z.im;
                }
                let (a, b) = (&*vectors * re, &*vectors * im);
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| Complex64::new(*x, *y))
                    .collect()
            }
            Propagator::Chebyshev(c) => c.advance_to(t),
        }
    }
}

/// Chebyshev expansion of the propagator, advanced step by step.
pub struct Chebyshev {
    h: Hamiltonian,
    psi: Vec<Complex64>,
    t: f64,
    center: f64,
    half_width: f64,
}

/// Largest Bessel argument per sub-step.
const MAX_ARGUMENT: f64 = 200.0;

impl Chebyshev {
    pub fn new(h: Hamiltonian, psi0: Vec<Complex64>) -> Self {
        let r = h.spectral_bound() * (1.0 + 1e-9) + 1e-300;
        Self {
            h,
            psi: psi0,
            t: 0.0,
            center: 0.0,
            half_width: r,
        }
    }

    pub fn advance_to(&mut self, t: f64) -> Vec<Complex64> {
        let span = t - self.t;
        if span != 0.0 {
            let z_total = self.half_width * span.abs() / self.h.hbar;
            let pieces = (z_total / MAX_ARGUMENT).ceil().max(1.0) as usize;
            for _ in 0..pieces {
                self.step(span / pieces as f64);
            }
            self.t = t;
        }
        self.psi.clone()
    }

    fn step(&mut self, tau: f64) {
        let z = self.half_width * tau.abs() / self.h.hbar;
        let coeffs = bessel_series(z);
        let sign = tau.signum();
        let n = self.psi.len();
        let mut scratch = Vec::new();
        let mut hx = vec![ZERO; n];
        // X = (H - center) / half_width has spectrum inside [-1, 1]
        let mut apply_x = |v: &[Complex64], out: &mut Vec<Complex64>| {
            self.h.apply(v, &mut hx, &mut scratch);
            for i in 0..n {
                out[i] = (hx[i] - v[i] * self.center) / self.half_width;
            }
        };
        let mut prev = self.psi.clone();
        let mut cur = vec![ZERO; n];
        apply_x(&prev, &mut cur);
        // exp(-i s z X) = J0(z) + 2 sum_k (-i s)^k Jk(z) Tk(X)
        let phase = |k: usize| match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -sign),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, sign),
        };
        let mut acc: Vec<Complex64> = prev.iter().map(|v| v * coeffs[0]).collect();
        let c1 = phase(1) * (2.0 * coeffs.get(1).copied().unwrap_or(0.0));
        for i in 0..n {
            acc[i] += cur[i] * c1;
        }
        let mut next = vec![ZERO; n];
        for (k, &jk) in coeffs.iter().enumerate().skip(2) {
            apply_x(&cur, &mut next);
            for i in 0..n {
                next[i] = next[i] * 2.0 - prev[i];
            }
            let c = phase(k) * (2.0 * jk);
            for i in 0..n {
                acc[i] += next[i] * c;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        let global = Complex64::from_polar(1.0, -self.center * tau / self.h.hbar);
        self.psi = acc.into_iter().map(|v| v * global).collect();
    }
}

/// `J_0(z) ... J_K(z)` with `K` large enough that the tail is below `1e-16`.
pub fn bessel_series(z: f64) -> Vec<f64> {
    if z == 0.0 {
        return vec![1.0];
    }
    let k_max = (z + 12.0 * z.cbrt() + 30.0).ceil() as usize;
    let start = k_max + 30 + (z.sqrt() as usize) * 2;
    // Miller's backward recurrence J_{k-1} = (2k/z) J_k - J_{k+1}
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / z * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    // J0 + 2 sum J_{2k} = 1
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    let mut out: Vec<f64> = j[..=k_max].iter().map(|v| v / norm).collect();
    while out.len() > 2 && out.last().is_some_and(|v| v.abs() < 1e-18) {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operators::{build_hamiltonian, FockBasis};
    use crate::fock::states::initial_state;
    use crate::types::{DensitySpec, Factor, ModelKind, ModelSpec};

    #[test]
    fn bessel_values() {
        let j = bessel_series(1.0);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_series(50.0);
        assert!((j[0] - 0.055_812_327_669_251_86).abs() < 1e-14);
        assert!((j[10] - (-0.113_847_849_149_469)).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_agrees_with_eigen() {
        let model = ModelSpec::nelson(0.1);
        let basis = FockBasis::new(40, 12);
        let h = build_hamiltonian(&model, basis).unwrap();
        let psi0 = initial_state(
            &DensitySpec::new(Factor::gaussian(0.0, 0.25), Factor::gaussian(0.1, 0.0)),
            (model.omega1, model.omega2),
            model.hbar,
            basis,
        )
        .unwrap();
        let mut a = Propagator::new(&h, &psi0, Method::Eigen).unwrap();
        let mut b = Propagator::new(&h, &psi0, Method::Chebyshev).unwrap();
        for t in [0.0, 0.5, 1.7, 4.0] {
            let (x, y) = (a.state(t), b.state(t));
            let d: f64 = x
                .iter()
                .zip(&y)
                .map(|(u, v)| (u - v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(d < 1e-11, "t={t} d={d}");
        }
    }

    #[test]
    fn number_states_only_acquire_phase_without_coupling() {
        let model = ModelSpec::new(ModelKind::Bilinear, 0.0).with_hbar(0.5);
        let basis = FockBasis::new(4, 4);
        let h = build_hamiltonian(&model, basis).unwrap();
        let mut psi0 = vec![ZERO; basis.dim()];
        psi0[basis.index(2, 1)] = Complex64::new(1.0, 0.0);
        let mut p = Propagator::new(&h, &psi0, Method::Eigen).unwrap();
        let psi = p.state(2.3);
        assert!((psi[basis.index(2, 1)].norm() - 1.0).abs() < 1e-13);
        let e = 0.5 * 4.0;
        let want = Complex64::from_polar(1.0, -e * 2.3 / 0.5);
        assert!((psi[basis.index(2, 1)] - want).norm() < 1e-12);
    }
}

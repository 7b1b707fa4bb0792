//! Single-mode ladder algebra and Hamiltonians as sums of Kronecker products.
//!
//! With `q = sqrt(hbar/2w)(a + a+)` and `p = i P`, `P = sqrt(hbar w/2)(a+ - a)`
//! real antisymmetric, every Hamiltonian here is a real symmetric matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{ModelKind, ModelSpec};

/// Number basis `|n1, n2>` with `n_k <= n_k_max`, flat index `n1 (n2_max + 1) + n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n1_max: usize,
    pub n2_max: usize,
}

impl FockBasis {
    pub fn new(n1_max: usize, n2_max: usize) -> Self {
        Self { n1_max, n2_max }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1_max + 1, self.n2_max + 1)
    }

    pub fn dim(&self) -> usize {
        (self.n1_max + 1) * (self.n2_max + 1)
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n2_max + 1) + n2
    }

    #[inline]
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / (self.n2_max + 1), index % (self.n2_max + 1))
    }
}

/// Row-sorted sparse square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMode {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMode {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self {
            n: m.nrows(),
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            entries: (0..n).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Row sums of absolute values.
    fn row_abs(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        for &(i, _, v) in &self.entries {
            r[i] += v.abs();
        }
        r
    }
}

/// Quadrature and momentum matrices of one mode.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    /// `q`.
    pub q: DMatrix<f64>,
    /// `P` with `p = i P`.
    pub p: DMatrix<f64>,
    pub q2: DMatrix<f64>,
    /// `p^2 = -P^2`.
    pub p2: DMatrix<f64>,
    /// `(q P + P q)/2`; the symmetrised `q p` equals `i` times this.
    pub qp_sym: DMatrix<f64>,
}

impl ModeOperators {
    /// Operators on levels `0..=n_max`, built in a larger basis and cut so
    /// that products carry no truncation artefacts.
    pub fn new(n_max: usize, omega: f64, hbar: f64) -> Self {
        let ext = n_max + 4;
        let mut a = DMatrix::<f64>::zeros(ext, ext);
        for n in 1..ext {
            a[(n - 1, n)] = (n as f64).sqrt();
        }
        let ad = a.transpose();
        let q = (&a + &ad) * (hbar / (2.0 * omega)).sqrt();
        let p = (&ad - &a) * (hbar * omega / 2.0).sqrt();
        let q2 = &q * &q;
        let p2 = -(&p * &p);
        let qp_sym = (&q * &p + &p * &q) * 0.5;
        let cut = |m: DMatrix<f64>| m.view((0, 0), (n_max + 1, n_max + 1)).into_owned();
        Self {
            q: cut(q),
            p: cut(p),
            q2: cut(q2),
            p2: cut(p2),
            qp_sym: cut(qp_sym),
        }
    }

    /// `(p^2 + w^2 q^2)/2`.
    pub fn oscillator(&self, omega: f64) -> DMatrix<f64> {
        (&self.p2 + &self.q2 * (omega * omega)) * 0.5
    }
}

/// `coeff * A (x) B`.
#[derive(Debug, Clone, PartialEq)]
pub struct KronTerm {
    pub coeff: f64,
    pub a: SparseMode,
    pub b: SparseMode,
}

/// A real symmetric Hamiltonian on a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub basis: FockBasis,
    pub hbar: f64,
    pub terms: Vec<KronTerm>,
}

/// Assembles `H` for the model, checking symmetry of the dense form.
pub fn build_hamiltonian(model: &ModelSpec, basis: FockBasis) -> Result<Hamiltonian> {
    let (n1, n2) = basis.dims();
    let m1 = ModeOperators::new(basis.n1_max, model.omega1, model.hbar);
    let m2 = ModeOperators::new(basis.n2_max, model.omega2, model.hbar);
    let s = SparseMode::from_dense;
    let mut terms = vec![
        KronTerm {
            coeff: 1.0,
            a: s(&m1.oscillator(model.omega1)),
            b: SparseMode::identity(n2),
        },
        KronTerm {
            coeff: 1.0,
            a: SparseMode::identity(n1),
            b: s(&m2.oscillator(model.omega2)),
        },
    ];
    match model.kind {
        ModelKind::Bilinear => terms.push(KronTerm {
            coeff: model.lambda,
            a: s(&m1.q),
            b: s(&m2.q),
        }),
        ModelKind::Rwa => {
            terms.push(KronTerm {
                coeff: model.lambda,
                a: s(&m1.q),
                b: s(&m2.q),
            });
            // p1 p2 = (i P1)(i P2) = -P1 P2
            terms.push(KronTerm {
                coeff: -model.lambda,
                a: s(&m1.p),
                b: s(&m2.p),
            });
        }
        ModelKind::Nelson => {
            // -(q1 p1 + p1 q1)/2 p2 = -(i Q)(i P2) = Q P2 with Q = (q1 P1 + P1 q1)/2
            terms.push(KronTerm {
                coeff: 1.0,
                a: s(&m1.qp_sym),
                b: s(&m2.p),
            });
            terms.push(KronTerm {
                coeff: 0.5,
                a: s(&m1.q2),
                b: s(&m2.q2),
            });
        }
    }
    let h = Hamiltonian {
        basis,
        hbar: model.hbar,
        terms,
    };
    if basis.dim() <= 4096 {
        let d = h.dense();
        let asym = (&d - d.transpose()).amax();
        if asym > 1e-12 * d.amax().max(1.0) {
            return Err(Error::Convergence(format!(
                "assembled Hamiltonian is not Hermitian (asymmetry {asym:e})"
            )));
        }
    }
    Ok(h)
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let (_, n2) = self.basis.dims();
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for term in &self.terms {
            for &(i1, j1, av) in &term.a.entries {
                for &(i2, j2, bv) in &term.b.entries {
                    h[(i1 * n2 + i2, j1 * n2 + j2)] += term.coeff * av * bv;
                }
            }
        }
        h
    }

    /// `out = H psi` using `(A (x) B) vec(C) = A C B^T`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let (n1, n2) = self.basis.dims();
        out.fill(Complex64::new(0.0, 0.0));
        scratch.resize(n1 * n2, Complex64::new(0.0, 0.0));
        for term in &self.terms {
            scratch.fill(Complex64::new(0.0, 0.0));
            for &(i2, j2, bv) in &term.b.entries {
                for j1 in 0..n1 {
                    scratch[j1 * n2 + i2] += psi[j1 * n2 + j2] * bv;
                }
            }
            for &(i1, j1, av) in &term.a.entries {
                let c = term.coeff * av;
                let (src, dst) = (
                    &scratch[j1 * n2..(j1 + 1) * n2],
                    &mut out[i1 * n2..(i1 + 1) * n2],
                );
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * c;
                }
            }
        }
    }

    /// Upper bound on the spectral radius from absolute row sums.
    pub fn spectral_bound(&self) -> f64 {
        let (n1, n2) = self.basis.dims();
        let mut rows = vec![0.0; n1 * n2];
        for term in &self.terms {
            let (ra, rb) = (term.a.row_abs(), term.b.row_abs());
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    rows[i1 * n2 + i2] += term.coeff.abs() * ra[i1] * rb[i2];
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `<psi|H|psi>` for normalised `psi`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut out, &mut Vec::new());
        psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

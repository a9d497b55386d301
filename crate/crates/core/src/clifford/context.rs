use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest mode count accepted by [`CliffordContext::new`]. At n = 12 a dense
/// element is a 4096 x 4096 complex matrix (256 MiB).
pub const DEFAULT_MAX_MODES: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A matrix with exactly one nonzero entry per row: row `r` holds `phases[r]`
/// in column `cols[r]`. Generators and all basis products `Q^alpha` have this
/// shape, which makes multiplication by them O(dim^2).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Monomial {
    pub cols: Vec<usize>,
    pub phases: Vec<Complex64>,
}

impl Monomial {
    fn identity(dim: usize) -> Self {
        Monomial {
            cols: (0..dim).collect(),
            phases: vec![ONE; dim],
        }
    }

    /// `self * other`
    fn compose(&self, other: &Monomial) -> Monomial {
        let (cols, phases) = self
            .cols
            .iter()
            .zip(&self.phases)
            .map(|(&k, &p)| (other.cols[k], p * other.phases[k]))
            .unzip();
        Monomial { cols, phases }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.cols.len();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (r, (&c, &p)) in self.cols.iter().zip(&self.phases).enumerate() {
            m[(r, c)] = p;
        }
        m
    }

    /// `self * a`
    pub fn left_mul(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = self.cols.len();
        DMatrix::from_fn(dim, dim, |r, c| self.phases[r] * a[(self.cols[r], c)])
    }

    /// `a * self`
    pub fn right_mul(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = self.cols.len();
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for (k, (&c, &p)) in self.cols.iter().zip(&self.phases).enumerate() {
            for r in 0..dim {
                out[(r, c)] = a[(r, k)] * p;
            }
        }
        out
    }

    /// `tr(self^* a)`
    pub fn trace_inner(&self, a: &DMatrix<Complex64>) -> Complex64 {
        self.cols
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(r, (&c, &p))| p.conj() * a[(r, c)])
            .sum()
    }
}

/// The Clifford algebra over R^n realised on (C^2)^{(x) n}.
///
/// `Q_{j+1}` (0-based `j`) is `U (x) ... (x) U (x) Q (x) I (x) ... (x) I` with `Q`
/// in tensor slot `j`, `Q = [[0,1],[1,0]]` and `U = diag(1,-1)`. Basis
/// elements `Q^alpha = Q_1^{alpha_1} ... Q_n^{alpha_n}` are indexed by the
/// bitmask `alpha` with bit `i` standing for `alpha_{i+1}`.
#[derive(Debug)]
pub struct CliffordContext {
    n: usize,
    dim: usize,
    generators: Vec<DMatrix<Complex64>>,
    generator_monomials: Vec<Monomial>,
    basis: Vec<Monomial>,
    parity: Vec<f64>,
}

impl CliffordContext {
    /// Build the algebra of `n` fermionic modes, `1 <= n <= 12`.
    pub fn new(n: usize) -> Result<Arc<Self>> {
        Self::with_max_modes(n, DEFAULT_MAX_MODES)
    }

    /// Same as [`CliffordContext::new`] with a caller-chosen memory gate.
    pub fn with_max_modes(n: usize, max: usize) -> Result<Arc<Self>> {
        if n == 0 || n > max || n > 30 {
            return Err(Error::ModeCount { n, max });
        }
        let dim = 1usize << n;

        let generator_monomials: Vec<Monomial> = (0..n)
            .map(|j| {
                // tensor slot k acts on bit (n - 1 - k) of the basis index
                let flip = 1usize << (n - 1 - j);
                let cols = (0..dim).map(|b| b ^ flip).collect();
                let phases = (0..dim)
                    .map(|b| {
                        let before = (b >> (n - j)).count_ones();
                        if before.is_multiple_of(2) {
                            ONE
                        } else {
                            -ONE
                        }
                    })
                    .collect();
                Monomial { cols, phases }
            })
            .collect();

        let basis = (0..dim)
            .map(|mask| {
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .fold(Monomial::identity(dim), |acc, i| {
                        acc.compose(&generator_monomials[i])
                    })
            })
            .collect();

        let parity = (0..dim)
            .map(|b: usize| if b.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect();

        let ctx = CliffordContext {
            n,
            dim,
            generators: generator_monomials.iter().map(Monomial::to_dense).collect(),
            generator_monomials,
            basis,
            parity,
        };
        let car = ctx.car_residual();
        assert!(car < 1e-12, "CAR violated at construction (residual {car:e})");
        Ok(Arc::new(ctx))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix dimension 2^n. The algebra itself also has complex dimension 2^n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense matrix of `Q_{i+1}`.
    pub fn generator(&self, i: usize) -> Result<&DMatrix<Complex64>> {
        self.generators.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            n: self.n,
        })
    }

    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.generators
    }

    /// Dense matrix of `Q^alpha`.
    pub fn basis_matrix(&self, mask: usize) -> DMatrix<Complex64> {
        self.basis[mask].to_dense()
    }

    pub(crate) fn basis_monomial(&self, mask: usize) -> &Monomial {
        &self.basis[mask]
    }

    pub(crate) fn generator_monomial(&self, i: usize) -> &Monomial {
        &self.generator_monomials[i]
    }

    /// Diagonal of the grading unitary `U (x) ... (x) U`; conjugation by it is `Gamma`.
    pub(crate) fn parity(&self) -> &[f64] {
        &self.parity
    }

    /// Sign `s` with `(Q^alpha)^* = s Q^alpha`, namely `(-1)^{k(k-1)/2}` for `k = |alpha|`.
    pub fn adjoint_sign(mask: usize) -> f64 {
        let k = mask.count_ones();
        if (k * k.saturating_sub(1) / 2).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Max Frobenius residual of `Q_iQ_j + Q_jQ_i - 2 delta_ij I` over all pairs.
    pub fn car_residual(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let (qi, qj) = (&self.generators[i], &self.generators[j]);
                let mut m = qi * qj + qj * qi;
                if i == j {
                    m -= &id * Complex64::new(2.0, 0.0);
                }
                worst = worst.max(m.norm());
            }
        }
        worst
    }
}

impl PartialEq for CliffordContext {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

//! Named states and seeded random generators.
//!
//! The incoherent basis is the computational basis throughout.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::qmat::{check_dims, ComplexMatrix, DensityMatrix, PureState};

/// `(1/√d) Σ_k |k>`.
pub fn maximally_coherent(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::BadDimension(format!("maximally coherent state needs d >= 2, got {d}")));
    }
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    PureState::new(vec![a; d], vec![d])
}

/// The Bell basis in the order `|φ+>, |φ->, |ψ+>, |ψ->`.
pub fn bell_states() -> [PureState; 4] {
    let s = FRAC_1_SQRT_2;
    let make = |a: [f64; 4]| PureState::from_real(&a, vec![2, 2]).expect("Bell state is normalized");
    [
        make([s, 0.0, 0.0, s]),
        make([s, 0.0, 0.0, -s]),
        make([0.0, s, s, 0.0]),
        make([0.0, s, -s, 0.0]),
    ]
}

/// The nine orthonormal product states of the 3×3 domino basis.
#[derive(Clone, Debug)]
pub struct DominoFamily {
    /// `|ψ_i> = |α_i> ⊗ |β_i>`, in the listed order `i = 1..9`.
    pub states: Vec<PureState>,
    pub alpha: Vec<PureState>,
    pub beta: Vec<PureState>,
}

impl DominoFamily {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn qutrit(amps: [f64; 3]) -> PureState {
    PureState::from_real(&amps, vec![3]).expect("qutrit is normalized")
}

pub fn domino_states() -> DominoFamily {
    let s = FRAC_1_SQRT_2;
    let k0 = [1.0, 0.0, 0.0];
    let k1 = [0.0, 1.0, 0.0];
    let k2 = [0.0, 0.0, 1.0];
    let p01 = [s, s, 0.0];
    let m01 = [s, -s, 0.0];
    let p12 = [0.0, s, s];
    let m12 = [0.0, s, -s];
    let pairs = [
        (k1, k1),
        (k0, p01),
        (k0, m01),
        (k2, p12),
        (k2, m12),
        (p12, k0),
        (m12, k0),
        (p01, k2),
        (m01, k2),
    ];
    let alpha: Vec<PureState> = pairs.iter().map(|(a, _)| qutrit(*a)).collect();
    let beta: Vec<PureState> = pairs.iter().map(|(_, b)| qutrit(*b)).collect();
    let states = alpha.iter().zip(&beta).map(|(a, b)| a.tensor(b)).collect();
    DominoFamily { states, alpha, beta }
}

/// `(1/9) Σ_i |i><i|^R ⊗ |ψ_i><ψ_i|^{AB}` with dims `(9, 3, 3)`.
pub fn merging_state() -> DensityMatrix {
    let family = domino_states();
    let mut m = ComplexMatrix::zeros(81, 81);
    for (i, psi) in family.states.iter().enumerate() {
        let flagged = PureState::basis(&[9], i).tensor(psi);
        let a = flagged.amplitudes();
        m += &ComplexMatrix::outer(a, a).scale_real(1.0 / 9.0);
    }
    DensityMatrix::new(m, vec![9, 3, 3]).expect("merging state is valid")
}

/// `Σ_ij c_ij |ii><jj|` on a `d × d` system.
pub fn maximally_correlated(coeffs: &ComplexMatrix) -> Result<DensityMatrix> {
    let d = coeffs.rows();
    DensityMatrix::new(coeffs.clone(), vec![d]).map_err(|e| Error::InvalidCoefficients(Box::new(e)))?;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = coeffs[(i, j)];
        }
    }
    DensityMatrix::new(m, vec![d, d])
}

/// `|ψ_j> = (1/√d) Σ_k e^{2πi jk/d} |k>` for `j = 0..d`.
pub fn fourier_mc_basis(d: usize) -> Result<Vec<PureState>> {
    if d < 2 {
        return Err(Error::BadDimension(format!("Fourier basis needs d >= 2, got {d}")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|j| {
            let amps = (0..d)
                .map(|k| C64::from_polar(norm, 2.0 * PI * (j * k) as f64 / d as f64))
                .collect();
            PureState::new(amps, vec![d])
        })
        .collect()
}

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * FRAC_1_SQRT_2
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Orthonormalizes the columns of `m` in place (modified Gram–Schmidt).
/// Returns false when a column is numerically dependent on earlier ones.
pub(crate) fn gram_schmidt(m: &mut ComplexMatrix) -> bool {
    let cols = m.cols();
    for c in 0..cols {
        let mut v = m.column(c);
        for _ in 0..2 {
            for p in 0..c {
                let u = m.column(p);
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(&u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return false;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        m.set_column(c, &v);
    }
    true
}

/// Haar-random `rows × cols` isometry (`cols <= rows`) from a Ginibre matrix.
pub(crate) fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    loop {
        let mut g = gaussian_matrix(rng, rows, cols);
        if gram_schmidt(&mut g) {
            return g;
        }
    }
}

pub(crate) fn random_pure_with<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<PureState> {
    let n: usize = dims.iter().product();
    check_dims(dims, n)?;
    let amps = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(amps, dims.to_vec())
}

pub(crate) fn random_density_with<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    rank: usize,
) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    check_dims(dims, n)?;
    if rank == 0 || rank > n {
        return Err(Error::BadRank { rank, dim: n });
    }
    let g = gaussian_matrix(rng, n, rank);
    let m = &g * &g.adjoint();
    Ok(DensityMatrix::from_unnormalized(m, dims.to_vec()))
}

/// Haar-distributed pure state.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    random_pure_with(&mut seeded(seed), dims)
}

/// Ginibre-distributed mixed state `GG^dagger / Tr(GG^dagger)` of the given rank.
pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut seeded(seed), dims, rank)
}

/// Haar-random unitary of order `d`.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_isometry(&mut seeded(seed), d, d)
}

/// Random quantum-incoherent state `Σ_j p_j σ_j^A ⊗ |j><j|^B` on dims `(d_a, d_b)`.
pub fn random_qi_state(d_a: usize, d_b: usize, seed: u64) -> Result<DensityMatrix> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::BadDimension(format!("invalid dims ({d_a}, {d_b})")));
    }
    let mut rng = seeded(seed);
    let weights: Vec<f64> = (0..d_b).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (j, w) in weights.iter().enumerate() {
        let sigma = random_density_with(&mut rng, &[d_a], d_a)?;
        let flag = ComplexMatrix::outer(
            &ComplexMatrix::basis_vector(d_b, j),
            &ComplexMatrix::basis_vector(d_b, j),
        );
        m += &sigma.matrix().kron(&flag).scale_real(w / total);
    }
    DensityMatrix::new(m, vec![d_a, d_b])
}

//! Coherence and correlation quantifiers.
//!
//! All values are in bits. A [`Bipartition`] names which subsystems form the
//! `A` side and which form the `B` side; quantum-incoherent quantities always
//! dephase the `B` side.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::qmat::{
    digits, eig_hermitian, normalize_subsystems, partial_trace, relative_entropy, shannon_entropy,
    trace_norm, von_neumann_entropy, binary_entropy, ComplexMatrix, DensityMatrix, PureState,
};
use crate::states::{gram_schmidt, seeded};

/// Disjoint, exhaustive split of the subsystems into an `A` and a `B` side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    /// `a` may be empty; `b` may not.
    pub fn new(a: &[usize], b: &[usize], count: usize) -> Result<Self> {
        let a_sorted = normalize_subsystems(a, count)?;
        let b_sorted = normalize_subsystems(b, count)?;
        if a_sorted.len() != a.len() || b_sorted.len() != b.len() {
            return Err(Error::BadBipartition("repeated subsystem index".into()));
        }
        if b_sorted.is_empty() {
            return Err(Error::BadBipartition("the B side must be non-empty".into()));
        }
        if a_sorted.iter().any(|i| b_sorted.contains(i)) {
            return Err(Error::BadBipartition("A and B overlap".into()));
        }
        if a_sorted.len() + b_sorted.len() != count {
            return Err(Error::BadBipartition(format!(
                "A and B must cover all {count} subsystems"
            )));
        }
        Ok(Self {
            a: a_sorted,
            b: b_sorted,
        })
    }

    /// The usual two-party split `A = {0}`, `B = {1}`.
    pub fn two_party() -> Self {
        Self { a: vec![0], b: vec![1] }
    }

    /// Parses `"A=0;B=1,2"`. Whitespace is ignored and `A=` may be empty.
    pub fn parse(spec: &str, count: usize) -> Result<Self> {
        let mut a = None;
        let mut b = None;
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, list) = part
                .split_once('=')
                .ok_or_else(|| Error::BadBipartition(format!("expected KEY=LIST, got {part:?}")))?;
            let indices = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::BadBipartition(format!("bad subsystem index {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "A" | "a" => a = Some(indices),
                "B" | "b" => b = Some(indices),
                other => return Err(Error::BadBipartition(format!("unknown side {other:?}"))),
            }
        }
        let b = b.ok_or_else(|| Error::BadBipartition("missing B=...".into()))?;
        let a = a.unwrap_or_else(|| (0..count).filter(|i| !b.contains(i)).collect());
        Self::new(&a, &b, count)
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        let count = rho.dims().len();
        if self.a.len() + self.b.len() != count {
            return Err(Error::BadBipartition(format!(
                "split covers {} subsystems, state has {count}",
                self.a.len() + self.b.len()
            )));
        }
        Ok(())
    }
}

/// How a reported value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    /// Best value found by a heuristic maximizer; a certified lower bound.
    Optimized,
    /// Numerical minimization used to cross-check a closed form.
    Oracle,
}

/// A named scalar with the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub name: String,
    pub value: f64,
    pub method: Method,
    pub inputs: BTreeMap<String, String>,
}

impl MeasureReport {
    pub fn new(name: impl Into<String>, value: f64, method: Method) -> Self {
        Self {
            name: name.into(),
            value,
            method,
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.inputs.insert(key.into(), value.into());
        self
    }
}

/// Rounding below zero by at most 1e-9 is clamped; anything larger signals a bug.
pub(crate) fn clamp_measure(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -1e-9 {
        Ok(0.0)
    } else {
        Err(Error::NegativeMeasure { name, value })
    }
}

pub(crate) fn dephase_matrix(m: &ComplexMatrix, dims: &[usize], subsystems: &[usize]) -> Result<ComplexMatrix> {
    let subs = normalize_subsystems(subsystems, dims.len())?;
    let n = m.rows();
    let labels: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let d = digits(i, dims);
            subs.iter().map(|&s| d[s]).collect()
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        if labels[r] == labels[c] {
            m[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Zeroes every coherence between different incoherent basis states of the
/// selected subsystems. The empty set is the identity map.
pub fn dephase(rho: &DensityMatrix, subsystems: &[usize]) -> Result<DensityMatrix> {
    let m = dephase_matrix(rho.matrix(), rho.dims(), subsystems)?;
    Ok(DensityMatrix::from_parts(m, rho.dims().to_vec()))
}

/// Relative entropy of coherence `S(Δ(ρ)) - S(ρ)` with respect to the full
/// product incoherent basis.
pub fn c_r(rho: &DensityMatrix) -> Result<f64> {
    let diag: Vec<f64> = (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect();
    clamp_measure("relative entropy of coherence", shannon_entropy(diag) - von_neumann_entropy(rho)?)
}

/// Distillable coherence; equal to [`c_r`].
pub fn distillable_coherence(rho: &DensityMatrix) -> Result<f64> {
    c_r(rho)
}

/// `C_r` of a pure state: the Shannon entropy of its incoherent-basis populations.
pub fn pure_coherence(psi: &PureState) -> f64 {
    shannon_entropy(psi.probabilities())
}

/// QI relative entropy `S(Δ^B(ρ)) - S(ρ)`.
pub fn qi_relative_entropy(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    split.check(rho)?;
    let dephased = dephase(rho, split.b())?;
    clamp_measure(
        "QI relative entropy",
        von_neumann_entropy(&dephased)? - von_neumann_entropy(rho)?,
    )
}

/// Numerical minimum of `S(ρ‖σ)` over quantum-incoherent states
/// `σ = Σ_j p_j σ_j^A ⊗ |j><j|^B`.
///
/// Used only to cross-check [`qi_relative_entropy`]. The probabilities are a
/// softmax of free reals and each `σ_j^A = G_j G_j^† / Tr` for a free complex
/// `G_j`; 32 random starts are refined with Nelder–Mead.
pub fn qi_relative_entropy_oracle(rho: &DensityMatrix, split: &Bipartition, seed: u64) -> Result<f64> {
    const STARTS: usize = 32;
    split.check(rho)?;
    if rho.dim() > 16 {
        return Err(Error::DimensionTooLarge(rho.dim()));
    }
    let perm: Vec<usize> = split.a().iter().chain(split.b()).copied().collect();
    let rho = rho.permute(&perm)?;
    let d_a: usize = split.a().iter().map(|&i| rho_dim(&rho, &perm, i)).product();
    let d_b = rho.dim() / d_a;
    let per_block = 2 * d_a * d_a;
    let n_params = d_b + d_b * per_block;

    let sigma_of = |x: &[f64]| -> DensityMatrix {
        let logits = &x[..d_b];
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let wsum: f64 = w.iter().sum();
        let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
        for j in 0..d_b {
            let p = &x[d_b + j * per_block..d_b + (j + 1) * per_block];
            let g = ComplexMatrix::from_fn(d_a, d_a, |r, c| {
                let k = 2 * (r * d_a + c);
                C64::new(p[k], p[k + 1])
            });
            let gg = &g * &g.adjoint();
            let tr = gg.trace().re.max(1e-300);
            let flag = ComplexMatrix::outer(
                &ComplexMatrix::basis_vector(d_b, j),
                &ComplexMatrix::basis_vector(d_b, j),
            );
            m += &gg.kron(&flag).scale_real(w[j] / wsum / tr);
        }
        DensityMatrix::from_parts(m.hermitian_part(), rho.dims().to_vec())
    };
    let objective = |x: &[f64]| relative_entropy(&rho, &sigma_of(x)).unwrap_or(f64::INFINITY);

    let mut rng = seeded(seed);
    let opts = NelderMeadOptions {
        max_evals: 400 * n_params,
        f_tol: 1e-13,
        initial_step: 0.5,
        restarts: 6,
    };
    let mut best = f64::INFINITY;
    for _ in 0..STARTS {
        let x0: Vec<f64> = (0..n_params).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, fx) = nelder_mead(objective, &x0, opts);
        best = best.min(fx);
    }
    Ok(best)
}

fn rho_dim(permuted: &DensityMatrix, perm: &[usize], original: usize) -> usize {
    let pos = perm.iter().position(|&p| p == original).expect("index is in the permutation");
    permuted.dims()[pos]
}

/// `I^{A:B}(ρ) = S(ρ^A) + S(ρ^B) - S(ρ)`.
pub fn mutual_information(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    split.check(rho)?;
    let s_b = von_neumann_entropy(&partial_trace(rho, split.b())?)?;
    let s_a = if split.a().is_empty() {
        0.0
    } else {
        von_neumann_entropy(&partial_trace(rho, split.a())?)?
    };
    clamp_measure("mutual information", s_a + s_b - von_neumann_entropy(rho)?)
}

/// Basis-dependent discord `I^{A:B}(ρ) - I^{A:B}(Δ^B(ρ))`.
pub fn basis_dependent_discord(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    let dephased = dephase(rho, split.b())?;
    clamp_measure(
        "basis-dependent discord",
        mutual_information(rho, split)? - mutual_information(&dephased, split)?,
    )
}

/// Best pure-state decomposition found by the coherence-of-assistance search.
#[derive(Clone, Debug)]
pub struct Assistance {
    /// Average coherence of `ensemble`; a lower bound on `C_a`.
    pub value: f64,
    pub ensemble: Vec<(f64, PureState)>,
}

impl Assistance {
    /// `Σ p_i |ψ_i><ψ_i|`.
    pub fn average_state(&self) -> ComplexMatrix {
        let n = self.ensemble.first().map_or(0, |(_, psi)| psi.dim());
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, psi) in &self.ensemble {
            m += &ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()).scale_real(*p);
        }
        m
    }
}

/// Default number of restarts for [`coherence_of_assistance`].
pub const DEFAULT_ASSISTANCE_BUDGET: usize = 64;

/// Maximizes the average coherence `Σ p_i C_r(ψ_i)` over decompositions of `ρ`.
///
/// Decompositions are generated by measuring the purification ancilla of
/// dimension `d²` in an orthonormal basis `U|k>`. The eigen-ensemble and the
/// Fourier basis are always tried; `budget` random starts follow, each refined
/// with Nelder–Mead. The result is a lower bound on `C_a(ρ)` that never falls
/// below the eigen-ensemble average.
pub fn coherence_of_assistance(rho: &DensityMatrix, budget: usize, seed: u64) -> Result<Assistance> {
    let eig = eig_hermitian(rho.matrix())?;
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&k| eig.values[k] > 1e-12).collect();
    let weighted: Vec<Vec<C64>> = support
        .iter()
        .map(|&k| {
            let s = eig.values[k].sqrt();
            eig.vectors.column(k).into_iter().map(|z| z * s).collect()
        })
        .collect();
    let r = weighted.len();
    if r == 1 {
        let psi = PureState::normalized(weighted[0].clone(), rho.dims().to_vec())?;
        return Ok(Assistance {
            value: pure_coherence(&psi),
            ensemble: vec![(1.0, psi)],
        });
    }
    let m = (d * d).max(r);

    // Outcome k leaves Σ_i conj(U_ik) √λ_i |v_i>.
    let branches = |u: &ComplexMatrix| -> Vec<(f64, Vec<C64>)> {
        (0..m)
            .map(|k| {
                let mut v = vec![C64::new(0.0, 0.0); d];
                for (i, w) in weighted.iter().enumerate() {
                    let coef = u[(i, k)].conj();
                    for (x, y) in v.iter_mut().zip(w) {
                        *x += coef * y;
                    }
                }
                let p = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                (p, v)
            })
            .collect()
    };
    let average = |u: &ComplexMatrix| -> f64 {
        branches(u)
            .into_iter()
            .filter(|(p, _)| *p > 1e-300)
            .map(|(p, v)| p * shannon_entropy(v.iter().map(|z| z.norm_sqr() / p)))
            .sum()
    };
    let unitary_of = |x: &[f64]| -> Option<ComplexMatrix> {
        let mut u = ComplexMatrix::from_fn(m, m, |r, c| {
            let k = 2 * (r * m + c);
            C64::new(x[k], x[k + 1])
        });
        gram_schmidt(&mut u).then_some(u)
    };
    let params_of = |u: &ComplexMatrix| -> Vec<f64> {
        u.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
    };
    let objective = |x: &[f64]| unitary_of(x).map_or(f64::INFINITY, |u| -average(&u));

    let fourier = ComplexMatrix::from_fn(m, m, |r, c| {
        C64::from_polar(1.0 / (m as f64).sqrt(), 2.0 * PI * (r * c) as f64 / m as f64)
    });
    let mut starts = vec![params_of(&ComplexMatrix::identity(m)), params_of(&fourier)];
    let mut rng = seeded(seed);
    for _ in 0..budget {
        starts.push((0..2 * m * m).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let opts = NelderMeadOptions {
        max_evals: 150 * 2 * m * m,
        f_tol: 1e-12,
        initial_step: 0.3,
        restarts: 2,
    };
    let mut best_u = ComplexMatrix::identity(m);
    let mut best = average(&best_u);
    for x0 in starts {
        let (x, _) = nelder_mead(objective, &x0, opts);
        if let Some(u) = unitary_of(&x) {
            let v = average(&u);
            if v > best {
                best = v;
                best_u = u;
            }
        }
    }
    let ensemble = branches(&best_u)
        .into_iter()
        .filter(|(p, _)| *p > 1e-14)
        .map(|(p, v)| Ok((p, PureState::normalized(v, rho.dims().to_vec())?)))
        .collect::<Result<Vec<_>>>()?;
    let value = ensemble.iter().map(|(p, psi)| p * pure_coherence(psi)).sum();
    Ok(Assistance { value, ensemble })
}

/// Both sides of the QI relative entropy continuity inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuityCheck {
    /// `T = ‖ρ - σ‖ / 2`.
    pub trace_distance: f64,
    /// `2 T log2 d + 2 h(T)` with `d` the total dimension.
    pub bound: f64,
    /// `|C_r^{X|Y}(ρ) - C_r^{X|Y}(σ)|`.
    pub difference: f64,
    /// False when `T > 1/2`, where the bound is no longer monotone in `T`.
    pub in_regime: bool,
}

pub fn continuity_bound(rho: &DensityMatrix, sigma: &DensityMatrix, split: &Bipartition) -> Result<ContinuityCheck> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch("continuity bound needs equal dims".into()));
    }
    let t = (trace_norm(&(rho.matrix() - sigma.matrix()))? / 2.0).min(1.0);
    let d = rho.dim() as f64;
    let bound = 2.0 * t * d.log2() + 2.0 * binary_entropy(t);
    let difference = (qi_relative_entropy(rho, split)? - qi_relative_entropy(sigma, split)?).abs();
    Ok(ContinuityCheck {
        trace_distance: t,
        bound,
        difference,
        in_regime: t <= 0.5 + 1e-12,
    })
}

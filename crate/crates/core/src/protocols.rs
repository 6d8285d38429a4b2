//! Runnable versions of the constructive arguments: incoherent teleportation,
//! assisted distillation, the steering witness, the SQI → SI and ancilla
//! reductions, domino discrimination and the merging witness.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::channels::{
    classify, is_incoherent_operator, run_protocol, ChannelClass, KrausChannel, Leaf, LocalProtocol, Party,
    ProductKrausChannel, Restriction, INCOHERENCE_TOL,
};
use crate::error::{Error, Result};
use crate::measures::{c_r, coherence_of_assistance, pure_coherence, qi_relative_entropy, Bipartition, MeasureReport, Method};
use crate::optim::golden_section;
use crate::qmat::{eig_hermitian, partial_trace_matrix, trace_norm, ComplexMatrix, DensityMatrix, PureState};
use crate::states::{bell_states, domino_states, fourier_mc_basis, merging_state};

/// Outcome ensemble of a protocol run plus named summary numbers.
#[derive(Clone, Debug)]
pub struct ProtocolResult {
    pub outcomes: Vec<Leaf>,
    pub metrics: BTreeMap<String, f64>,
    /// Local unitaries attached to outcomes, in outcome order (Bob's
    /// corrections in teleportation, the phase unitaries in MC distillation).
    pub corrections: Vec<ComplexMatrix>,
}

impl ProtocolResult {
    fn new(outcomes: Vec<Leaf>) -> Self {
        Self {
            outcomes,
            metrics: BTreeMap::new(),
            corrections: Vec::new(),
        }
    }

    fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|l| l.probability).sum()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ket_bra(ket: &[C64], bra: &PureState) -> ComplexMatrix {
    ComplexMatrix::outer(ket, bra.amplitudes())
}

fn bipartite_dims(dims: &[usize], what: &str) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::BadDimension(format!(
            "{what} needs exactly two subsystems, got dims {dims:?}"
        ))),
    }
}

/// Orthonormal basis of the complement of the span of `vectors` (which must
/// be orthonormal) in dimension `d`.
fn orthogonal_complement(vectors: &[Vec<C64>], d: usize) -> Result<Vec<Vec<C64>>> {
    let mut proj = ComplexMatrix::identity(d);
    for v in vectors {
        proj = &proj - &ComplexMatrix::outer(v, v);
    }
    let eig = eig_hermitian(&proj.hermitian_part())?;
    Ok((0..d)
        .filter(|&k| eig.values[k] > 0.5)
        .map(|k| eig.vectors.column(k))
        .collect())
}

fn bob_marginal(leaf: &Leaf, bob: &[usize]) -> Result<DensityMatrix> {
    leaf.state.partial_trace(bob)
}

/// Pauli corrections for Bell outcomes `φ+, φ-, ψ+, ψ-`: `I, σ3, σ1, iσ2`.
pub fn teleport_corrections() -> [ComplexMatrix; 4] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let m = |v: [C64; 4]| ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2");
    [
        ComplexMatrix::identity(2),
        m([one, z, z, -one]),
        m([z, one, one, z]),
        m([z, one, -one, z]),
    ]
}

/// Alice's Bell-basis instrument `K_i = |00><φ_i|` on `A'A`.
pub fn teleport_instrument() -> KrausChannel {
    let target = ComplexMatrix::basis_vector(4, 0);
    let ops = bell_states().iter().map(|phi| ket_bra(&target, phi)).collect();
    KrausChannel::new(ops, vec![2, 2], vec![2, 2]).expect("Bell basis is complete")
}

fn teleport_protocol() -> Result<LocalProtocol> {
    let mut p = LocalProtocol::new(vec![2, 2], vec![2], Restriction::Licc);
    p.push_round(Party::A, vec![teleport_instrument()], vec![])?;
    let fixes = teleport_corrections()
        .into_iter()
        .map(|u| KrausChannel::unitary(u, &[2]))
        .collect::<Result<Vec<_>>>()?;
    p.push_round(Party::B, fixes, vec![0, 1, 2, 3])?;
    Ok(p)
}

/// Runs the teleportation script on `ρ^{A'} ⊗ |φ+><φ+|^{AB}` and returns the
/// leaves reduced to Bob's qubit.
fn teleport_leaves(input: &DensityMatrix) -> Result<Vec<Leaf>> {
    if input.dim() != 2 {
        return Err(Error::BadDimension(format!(
            "teleportation takes one qubit, got dims {:?}",
            input.dims()
        )));
    }
    let input = DensityMatrix::from_parts(input.matrix().clone(), vec![2]);
    let phi_plus = bell_states()[0].to_density();
    let start = input.tensor(&phi_plus);
    let p = teleport_protocol()?;
    run_protocol(&p, &start)?
        .into_iter()
        .map(|leaf| {
            let state = bob_marginal(&leaf, &[2])?;
            Ok(Leaf { state, ..leaf })
        })
        .collect()
}

/// Teleports a qubit with one Bell pair, a 4-outcome incoherent measurement
/// on Alice's side and an incoherent Pauli correction on Bob's side.
///
/// Metrics: `min_fidelity`, `max_probability_error` (distance of each outcome
/// probability from 1/4).
pub fn incoherent_teleport(psi: &PureState) -> Result<ProtocolResult> {
    let leaves = teleport_leaves(&psi.to_density())?;
    let psi = PureState::new(psi.amplitudes().to_vec(), vec![2])?;
    let min_fidelity = leaves
        .iter()
        .map(|l| l.state.fidelity_with(&psi))
        .fold(f64::INFINITY, f64::min);
    let prob_err = leaves
        .iter()
        .map(|l| (l.probability - 0.25).abs())
        .fold(0.0, f64::max);
    let mut result = ProtocolResult::new(leaves)
        .metric("min_fidelity", min_fidelity)
        .metric("max_probability_error", prob_err);
    result.corrections = teleport_corrections().to_vec();
    Ok(result)
}

/// The branch-averaged teleportation channel applied to a one-qubit state.
pub fn teleport_channel(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let leaves = teleport_leaves(rho)?;
    let parts: Vec<(f64, &DensityMatrix)> = leaves.iter().map(|l| (l.probability, &l.state)).collect();
    DensityMatrix::mixture(&parts)
}

/// Alice's vectors `ẽ_i` with `(<ẽ_i| ⊗ I)|Ψ> = √p_i |ψ_i>`, built from the
/// Schmidt form of `Ψ`, plus a basis of the unused part of Alice's space.
fn steering_vectors(psi: &PureState, ensemble: &[(f64, PureState)]) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let (da, db) = bipartite_dims(psi.dims(), "assisted distillation")?;
    let rho_b = psi.to_density().partial_trace(&[1])?;
    let eig = eig_hermitian(rho_b.matrix())?;
    let amp = psi.amplitudes();
    let mut schmidt = Vec::new();
    for k in 0..db {
        let lambda = eig.values[k];
        if lambda <= 1e-12 {
            continue;
        }
        let b = eig.vectors.column(k);
        // |a_k> = (I ⊗ <b_k|)|Ψ> / √λ_k
        let a: Vec<C64> = (0..da)
            .map(|x| (0..db).map(|y| amp[x * db + y] * b[y].conj()).sum::<C64>() / lambda.sqrt())
            .collect();
        schmidt.push((lambda, a, b));
    }
    let vectors = ensemble
        .iter()
        .map(|(p, phi)| {
            let mut e = vec![c(0.0, 0.0); da];
            for (lambda, a, b) in &schmidt {
                let overlap: C64 = b.iter().zip(phi.amplitudes()).map(|(x, y)| x.conj() * y).sum();
                let u = overlap * (p / lambda).sqrt();
                for (ex, ax) in e.iter_mut().zip(a) {
                    *ex += u.conj() * ax;
                }
            }
            e
        })
        .collect();
    let support: Vec<Vec<C64>> = schmidt.into_iter().map(|(_, a, _)| a).collect();
    Ok((vectors, orthogonal_complement(&support, da)?))
}

/// Assisted coherence distillation from a bipartite pure state.
///
/// Alice measures with `K_i = |i mod d_A><ẽ_i|`, which steers Bob into member
/// `i` of `ensemble` with its weight. Without an ensemble the decomposition
/// found by [`coherence_of_assistance`] on `ρ^B` is used (`budget`, `seed`).
///
/// Metrics: `average_coherence` (from the simulated post-states),
/// `ensemble_coherence`, `ensemble_gap`.
pub fn assisted_distill_pure(
    psi: &PureState,
    ensemble: Option<&[(f64, PureState)]>,
    budget: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    let (da, db) = bipartite_dims(psi.dims(), "assisted distillation")?;
    let rho_b = psi.to_density().partial_trace(&[1])?;
    let owned;
    let ensemble = match ensemble {
        Some(e) => e,
        None => {
            owned = coherence_of_assistance(&rho_b, budget, seed)?.ensemble;
            &owned
        }
    };
    let mut avg = ComplexMatrix::zeros(db, db);
    for (p, phi) in ensemble {
        if phi.dim() != db {
            return Err(Error::DimensionMismatch(format!(
                "ensemble member has dimension {}, Bob has {db}",
                phi.dim()
            )));
        }
        avg += &ComplexMatrix::outer(phi.amplitudes(), phi.amplitudes()).scale_real(*p);
    }
    let gap = trace_norm(&(&avg - rho_b.matrix()))?;
    if gap > 1e-8 {
        return Err(Error::EnsembleMismatch(gap));
    }

    let (vectors, complement) = steering_vectors(psi, ensemble)?;
    let mut ops: Vec<ComplexMatrix> = vectors
        .iter()
        .enumerate()
        .map(|(i, e)| ComplexMatrix::outer(&ComplexMatrix::basis_vector(da, i % da), e))
        .collect();
    let n_ensemble = ops.len();
    ops.extend(
        complement
            .iter()
            .map(|f| ComplexMatrix::outer(&ComplexMatrix::basis_vector(da, 0), f)),
    );
    let instrument = KrausChannel::new(ops, vec![da], vec![da])?;
    let mut p = LocalProtocol::new(vec![da], vec![db], Restriction::Licc);
    p.push_round(Party::A, vec![instrument], vec![])?;
    let leaves = run_protocol(&p, &psi.to_density())?
        .into_iter()
        .map(|leaf| {
            let state = bob_marginal(&leaf, &[1])?;
            let label = leaf.transcript.first().copied().filter(|&o| o < n_ensemble);
            Ok(Leaf { state, label, ..leaf })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut average = 0.0;
    for leaf in &leaves {
        average += leaf.probability * c_r(&leaf.state)?;
    }
    let target: f64 = ensemble
        .iter()
        .map(|(p, phi)| p * pure_coherence(phi))
        .sum();
    Ok(ProtocolResult::new(leaves)
        .metric("average_coherence", average)
        .metric("ensemble_coherence", target)
        .metric("ensemble_gap", gap))
}

/// Assisted distillation from a maximally correlated state `Σ c_ij |ii><jj|`
/// (optionally rotated by a unitary `u` on Alice's side).
///
/// Alice measures `K_j = |j><ψ_j| U^†` in the Fourier basis; every outcome
/// leaves Bob in `U_j^† C U_j` with `U_j = Σ_k e^{2πi jk/d} |k><k|`, so each
/// outcome carries the full `S(Δ^B ρ) - S(ρ)` bits. The `U_j` are returned
/// as `corrections`.
///
/// Metrics: `target` (the QI relative entropy), `max_deviation` (largest
/// per-outcome `|C_r - target|`), `max_correction_error` (largest entry error
/// of `U_j ρ_j U_j^† = C`).
pub fn assisted_distill_mc(rho: &DensityMatrix, u: Option<&ComplexMatrix>) -> Result<ProtocolResult> {
    let (da, db) = bipartite_dims(rho.dims(), "maximally correlated distillation")?;
    if da != db || da < 2 {
        return Err(Error::BadDimension(format!(
            "maximally correlated states need equal local dims >= 2, got {:?}",
            rho.dims()
        )));
    }
    let d = da;
    let u = match u {
        Some(u) => {
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch(format!("unitary must be {d}x{d}")));
            }
            if !(&u.adjoint() * u).approx_eq(&ComplexMatrix::identity(d), 1e-9) {
                return Err(Error::BadDimension("supplied u is not unitary".into()));
            }
            u.clone()
        }
        None => ComplexMatrix::identity(d),
    };
    let undo = u.adjoint().kron(&ComplexMatrix::identity(d));
    let aligned = undo.sandwich(rho.matrix());
    let stray: f64 = (0..d * d)
        .filter(|&r| r / d != r % d)
        .map(|r| aligned[(r, r)].re.abs())
        .sum();
    if stray > 1e-9 {
        return Err(Error::NotMaximallyCorrelated(stray));
    }
    let coeffs = ComplexMatrix::from_fn(d, d, |i, j| aligned[(i * d + i, j * d + j)]);

    let basis = fourier_mc_basis(d)?;
    let ops = basis
        .iter()
        .enumerate()
        .map(|(j, psi)| &ket_bra(&ComplexMatrix::basis_vector(d, j), psi) * &u.adjoint())
        .collect();
    let mut p = LocalProtocol::new(vec![d], vec![d], Restriction::Licc);
    p.push_round(Party::A, vec![KrausChannel::new(ops, vec![d], vec![d])?], vec![])?;
    let leaves = run_protocol(&p, rho)?
        .into_iter()
        .map(|leaf| {
            let state = bob_marginal(&leaf, &[1])?;
            let label = leaf.transcript.first().copied();
            Ok(Leaf { state, label, ..leaf })
        })
        .collect::<Result<Vec<_>>>()?;

    let target = qi_relative_entropy(rho, &Bipartition::two_party())?;
    let phases: Vec<ComplexMatrix> = (0..d)
        .map(|j| {
            let diag: Vec<C64> = (0..d)
                .map(|k| C64::from_polar(1.0, 2.0 * PI * (j * k) as f64 / d as f64))
                .collect();
            ComplexMatrix::diagonal(&diag)
        })
        .collect();
    let mut deviation: f64 = 0.0;
    let mut correction_error: f64 = 0.0;
    for leaf in &leaves {
        deviation = deviation.max((c_r(&leaf.state)? - target).abs());
        let j = leaf.label.unwrap_or(0);
        correction_error = correction_error.max(phases[j].sandwich(leaf.state.matrix()).max_abs_diff(&coeffs));
    }
    let mut result = ProtocolResult::new(leaves)
        .metric("target", target)
        .metric("max_deviation", deviation)
        .metric("max_correction_error", correction_error);
    result.corrections = phases;
    Ok(result)
}

/// An Alice-side incoherent operator that leaves Bob coherent.
#[derive(Clone, Debug)]
pub struct SteeringWitness {
    /// `|n><e|` on Alice's space; rank one, hence incoherent.
    pub kraus_op: ComplexMatrix,
    pub probability: f64,
    pub bob_post_state: DensityMatrix,
    /// `C_r` of `bob_post_state`, in bits.
    pub bob_coherence: f64,
}

impl SteeringWitness {
    /// Completes the witness to a full incoherent instrument by adding
    /// `|0><f|` for an orthonormal basis `{f}` of the complement of `<e|`.
    pub fn instrument(&self) -> Result<KrausChannel> {
        let d = self.kraus_op.cols();
        let row = (0..d)
            .find(|&r| (0..d).any(|c| self.kraus_op[(r, c)].norm() > 0.0))
            .unwrap_or(0);
        let e: Vec<C64> = (0..d).map(|c| self.kraus_op[(row, c)].conj()).collect();
        let mut ops = vec![self.kraus_op.clone()];
        for f in orthogonal_complement(&[e], d)? {
            ops.push(ComplexMatrix::outer(&ComplexMatrix::basis_vector(d, 0), &f));
        }
        KrausChannel::new(ops, vec![d], vec![d])
    }
}

/// Probability below which a steering branch is ignored.
pub const STEERING_MIN_PROBABILITY: f64 = 1e-10;
/// Bob coherence a steering branch must exceed.
pub const STEERING_MIN_COHERENCE: f64 = 1e-8;
/// Default grid size for the angle scan in [`find_steering_measurement`].
pub const DEFAULT_THETA_GRID: usize = 64;

/// Searches for a rank-one Alice operator `|n><e|` after which Bob's state is
/// coherent.
///
/// Writes `ρ = Σ_ij |e_i><e_j| ⊗ N_ij` in the eigenbasis of `ρ^A`. The
/// diagonal candidates are the `e_i`; for every pair `k < l` the candidates
/// are `cos θ e_k + sin θ e_l` and `cos θ e_k + i sin θ e_l`, scanned on a
/// `theta_grid`-point grid over `(0, π/2)` and refined by golden-section
/// search. The best candidate wins. Returns `None` when no candidate reaches
/// [`STEERING_MIN_COHERENCE`], which happens exactly for QI states up to
/// numerical tolerance.
pub fn find_steering_measurement(rho: &DensityMatrix, theta_grid: usize) -> Result<Option<SteeringWitness>> {
    let (da, db) = bipartite_dims(rho.dims(), "steering")?;
    let rho_a = rho.partial_trace(&[0])?;
    let basis = eig_hermitian(rho_a.matrix())?.vectors;
    let e: Vec<Vec<C64>> = (0..da).map(|k| basis.column(k)).collect();

    // Bob's unnormalized state after Alice projects onto |v>.
    let steer = |v: &[C64]| -> ComplexMatrix {
        ComplexMatrix::from_fn(db, db, |r, s| {
            let mut acc = c(0.0, 0.0);
            for x in 0..da {
                for y in 0..da {
                    acc += v[x].conj() * rho.matrix()[(x * db + r, y * db + s)] * v[y];
                }
            }
            acc
        })
    };
    let score = |v: &[C64]| -> f64 {
        let m = steer(v);
        let p = m.trace().re;
        if p <= STEERING_MIN_PROBABILITY {
            return 0.0;
        }
        let post = DensityMatrix::from_unnormalized(m, vec![db]);
        c_r(&post).unwrap_or(0.0)
    };

    let mut best: Option<(f64, Vec<C64>, usize)> = None;
    let consider = |v: Vec<C64>, target: usize, best: &mut Option<(f64, Vec<C64>, usize)>| {
        let s = score(&v);
        if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
            *best = Some((s, v, target));
        }
    };
    for (i, ei) in e.iter().enumerate() {
        consider(ei.clone(), i, &mut best);
    }
    let grid = theta_grid.max(1);
    for k in 0..da {
        for l in k + 1..da {
            for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
                let vec_at = |t: f64| -> Vec<C64> {
                    e[k].iter()
                        .zip(&e[l])
                        .map(|(a, b)| a * t.cos() + phase * b * t.sin())
                        .collect()
                };
                let h = FRAC_PI_2 / grid as f64;
                let (mut t_best, mut s_best) = (h / 2.0, f64::NEG_INFINITY);
                for g in 0..grid {
                    let t = (g as f64 + 0.5) * h;
                    let s = score(&vec_at(t));
                    if s > s_best {
                        t_best = t;
                        s_best = s;
                    }
                }
                let lo = (t_best - h).max(1e-9);
                let hi = (t_best + h).min(FRAC_PI_2 - 1e-9);
                let (t, _) = golden_section(|t| -score(&vec_at(t)), lo, hi, 1e-10);
                let t = if score(&vec_at(t)) >= s_best { t } else { t_best };
                consider(vec_at(t), k, &mut best);
            }
        }
    }

    let Some((coherence, v, target)) = best else {
        return Ok(None);
    };
    if coherence <= STEERING_MIN_COHERENCE {
        return Ok(None);
    }
    let m = steer(&v);
    let probability = m.trace().re;
    let bob_post_state = DensityMatrix::from_unnormalized(m, vec![db]);
    let kraus_op = ComplexMatrix::outer(&ComplexMatrix::basis_vector(da, target), &v);
    Ok(Some(SteeringWitness {
        kraus_op,
        probability,
        bob_coherence: c_r(&bob_post_state)?,
        bob_post_state,
    }))
}

/// Pinches Alice's output of an SQI channel: pairs `(Π_j A_i, B_i)` for
/// every incoherent projector `Π_j`. The result is SI and leaves Bob's
/// marginal unchanged. Pairs that vanish are dropped.
pub fn sqi_to_si_reduce(ch: &ProductKrausChannel) -> Result<ProductKrausChannel> {
    if !classify(ch, INCOHERENCE_TOL).separable_quantum_incoherent {
        return Err(Error::NotSqi);
    }
    let mut pairs = Vec::new();
    for (a, b) in ch.pairs() {
        for j in 0..a.rows() {
            let pa = ComplexMatrix::from_fn(a.rows(), a.cols(), |r, s| {
                if r == j {
                    a[(r, s)]
                } else {
                    c(0.0, 0.0)
                }
            });
            if pa.max_abs() > 1e-14 {
                pairs.push((pa, b.clone()));
            }
        }
    }
    ProductKrausChannel::with_output_dims(
        pairs,
        ch.a_dims().to_vec(),
        ch.a_out_dims().to_vec(),
        ch.b_dims().to_vec(),
        ch.b_out_dims().to_vec(),
    )
}

fn split_ancilla(dims: &[usize], ancilla: &[usize], what: &str) -> Result<Vec<usize>> {
    if ancilla.is_empty() || dims.len() <= ancilla.len() || !dims.ends_with(ancilla) {
        return Err(Error::DimensionMismatch(format!(
            "{what} dims {dims:?} must end with ancilla dims {ancilla:?} after at least one data subsystem"
        )));
    }
    Ok(dims[..dims.len() - ancilla.len()].to_vec())
}

/// `(I ⊗ <l|) K (I ⊗ |0>)` for every ancilla output label `l`.
fn contract_ancilla(k: &ComplexMatrix, out_data: usize, in_data: usize, anc: usize) -> Vec<ComplexMatrix> {
    (0..anc)
        .map(|l| ComplexMatrix::from_fn(out_data, in_data, |x, y| k[(x * anc + l, y * anc)]))
        .collect()
}

/// Removes incoherent ancillas from an SI channel on `(AA') × (BB')`.
///
/// Alice's ancilla `A'` (dims `a_ancilla`) and Bob's `B'` sit after the data
/// subsystems and start in `|0>`. The output pairs are
/// `A_kl = (I ⊗ <l|) Ã_k (I ⊗ |0>)` and `B_km` likewise, so the reduced
/// channel reproduces `Tr_{A'B'} Λ̃(ρ ⊗ |00><00|)` and stays SI.
pub fn ancilla_reduce(
    ch_tilde: &ProductKrausChannel,
    a_ancilla: &[usize],
    b_ancilla: &[usize],
) -> Result<ProductKrausChannel> {
    if !classify(ch_tilde, INCOHERENCE_TOL).separable_incoherent {
        return Err(Error::NotSi);
    }
    let a_in = split_ancilla(ch_tilde.a_dims(), a_ancilla, "Alice input")?;
    let a_out = split_ancilla(ch_tilde.a_out_dims(), a_ancilla, "Alice output")?;
    let b_in = split_ancilla(ch_tilde.b_dims(), b_ancilla, "Bob input")?;
    let b_out = split_ancilla(ch_tilde.b_out_dims(), b_ancilla, "Bob output")?;
    let na: usize = a_ancilla.iter().product();
    let nb: usize = b_ancilla.iter().product();
    let dims = |d: &[usize]| d.iter().product::<usize>();
    let mut pairs = Vec::new();
    for (at, bt) in ch_tilde.pairs() {
        let a_parts = contract_ancilla(at, dims(&a_out), dims(&a_in), na);
        let b_parts = contract_ancilla(bt, dims(&b_out), dims(&b_in), nb);
        for a in &a_parts {
            if a.max_abs() <= 1e-14 {
                continue;
            }
            for b in &b_parts {
                if b.max_abs() > 1e-14 {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
    }
    ProductKrausChannel::with_output_dims(pairs, a_in, a_out, b_in, b_out)
}

/// `ρ^{AB} ⊗ |0><0|^{A'} ⊗ |0><0|^{B'}` ordered as `A, A', B, B'`, the layout
/// expected by [`ancilla_reduce`]'s input channel. The first `a_count`
/// subsystems of `rho` are Alice's.
pub fn attach_ancillas(
    rho: &DensityMatrix,
    a_count: usize,
    a_ancilla: &[usize],
    b_ancilla: &[usize],
) -> Result<DensityMatrix> {
    let n = rho.dims().len();
    if a_count == 0 || a_count >= n {
        return Err(Error::BadDimension(format!(
            "Alice must own between 1 and {} of the {n} subsystems",
            n - 1
        )));
    }
    let zeros = |dims: &[usize]| DensityMatrix::basis(dims, 0);
    let extended = rho.tensor(&zeros(a_ancilla)).tensor(&zeros(b_ancilla));
    // current order: A.., B.., A'.., B'..
    let (na, nb, naa) = (a_count, n - a_count, a_ancilla.len());
    let perm: Vec<usize> = (0..na)
        .chain(n..n + naa)
        .chain(na..na + nb)
        .chain(n + naa..n + naa + b_ancilla.len())
        .collect();
    extended.permute(&perm)
}

/// The SI channel `Σ_i |i><α_i| ⊗ |i><β_i|` that identifies each domino
/// state; outputs are 9-dimensional classical registers on each side.
pub fn domino_channel() -> ProductKrausChannel {
    let family = domino_states();
    let pairs = family
        .alpha
        .iter()
        .zip(&family.beta)
        .enumerate()
        .map(|(i, (a, b))| {
            let flag = ComplexMatrix::basis_vector(9, i);
            (ket_bra(&flag, a), ket_bra(&flag, b))
        })
        .collect();
    ProductKrausChannel::with_output_dims(pairs, vec![3], vec![9], vec![3], vec![9])
        .expect("domino basis is complete")
}

/// `‖Σ_i |α_i><α_i| ⊗ |β_i><β_i| - I_9‖_∞`.
pub fn domino_completeness_residual() -> f64 {
    domino_channel().completeness_residual()
}

/// Runs [`domino_channel`] as an instrument on an arbitrary two-qutrit state.
/// Leaf labels are the 1-based outcome; the metric `outcome_k` holds the
/// probability of outcome `k`.
pub fn discriminate_domino_state(rho: &DensityMatrix) -> Result<ProtocolResult> {
    let ch = domino_channel();
    let rho = DensityMatrix::from_parts(rho.matrix().clone(), vec![3, 3]);
    let leaves: Vec<Leaf> = ch
        .apply_instrument(&rho)?
        .into_iter()
        .map(|o| Leaf {
            probability: o.probability,
            state: o.state,
            transcript: vec![o.index],
            label: Some(o.index + 1),
        })
        .collect();
    let mut result = ProtocolResult::new(leaves);
    for k in 1..=9 {
        let p = result
            .outcomes
            .iter()
            .filter(|l| l.label == Some(k))
            .map(|l| l.probability)
            .sum();
        result.metrics.insert(format!("outcome_{k}"), p);
    }
    Ok(result)
}

/// Discriminates domino state `input_index` (1-based, `1..=9`).
///
/// Metrics: `success_probability` and `post_state_fidelity` with `|jj>`.
pub fn discriminate_domino(input_index: usize) -> Result<ProtocolResult> {
    let family = domino_states();
    if !(1..=family.len()).contains(&input_index) {
        return Err(Error::BadDimension(format!(
            "domino index must be in 1..=9, got {input_index}"
        )));
    }
    let j = input_index - 1;
    let result = discriminate_domino_state(&family.states[j].to_density())?;
    let flag = PureState::basis(&[9, 9], j * 9 + j);
    let fidelity = result
        .outcomes
        .iter()
        .find(|l| l.label == Some(input_index))
        .map_or(0.0, |l| l.state.fidelity_with(&flag));
    let success = result.metrics[&format!("outcome_{input_index}")];
    Ok(result
        .metric("success_probability", success)
        .metric("post_state_fidelity", fidelity))
}

/// The merging operation with Alice on `A A'` and Bob on `B`:
/// `K_ij = |α_i><α_i|^A ⊗ |β_i><j|^{A'} ⊗ |0><β_i|^B`. Bob's parts are rank
/// one (incoherent); Alice's are not, so the channel is SQI but not SI.
pub fn merging_channel() -> ProductKrausChannel {
    let family = domino_states();
    let zero = ComplexMatrix::basis_vector(3, 0);
    let mut pairs = Vec::new();
    for (a, b) in family.alpha.iter().zip(&family.beta) {
        let proj = ket_bra(a.amplitudes(), a);
        for j in 0..3 {
            let shift = ComplexMatrix::outer(b.amplitudes(), &ComplexMatrix::basis_vector(3, j));
            pairs.push((proj.kron(&shift), ket_bra(&zero, b)));
        }
    }
    ProductKrausChannel::new(pairs, vec![3, 3], vec![3]).expect("merging operators are complete")
}

/// The two QI relative entropies of the merging state, their ordering and a
/// simulation of the SQI merge.
#[derive(Clone, Debug, Serialize)]
pub struct MergingWitness {
    /// `C_r^{R|AB}`.
    pub r_ab: MeasureReport,
    /// `C_r^{RB|A}`.
    pub rb_a: MeasureReport,
    /// `C_r^{R|AB} > C_r^{RB|A}`: an SI merge, which could not increase the
    /// QI relative entropy across `RB|A`, cannot produce the target.
    pub contradiction: bool,
    pub merge_class: ChannelClass,
    /// Trace-norm distance between the merged `R A A'` state and `ρ^{RAB}`
    /// with `B` relabeled as `A'`.
    pub merge_gap: f64,
    /// Subsystem order `R, A, A', B` taken from `R, A, B, A'` before the merge.
    pub relabel: Vec<usize>,
}

/// Applies `ch` (acting on the last three subsystems `A, A', B`) block-wise
/// in `R`, then traces out `B`.
fn merge_on_blocks(state: &DensityMatrix, ch: &KrausChannel) -> Result<ComplexMatrix> {
    let r = state.dims()[0];
    let n = state.dim() / r;
    let n_out = n / 3;
    let m = state.matrix();
    let mut out = ComplexMatrix::zeros(r * n_out, r * n_out);
    for x in 0..r {
        for y in 0..r {
            let block = ComplexMatrix::from_fn(n, n, |i, j| m[(x * n + i, y * n + j)]);
            if block.max_abs() < 1e-15 {
                continue;
            }
            let mut mapped = ComplexMatrix::zeros(n, n);
            for k in ch.ops() {
                mapped += &(&(k * &block) * &k.adjoint());
            }
            let (reduced, _) = partial_trace_matrix(&mapped, &[3, 3, 3], &[0, 1])?;
            for i in 0..n_out {
                for j in 0..n_out {
                    out[(x * n_out + i, y * n_out + j)] = reduced[(i, j)];
                }
            }
        }
    }
    Ok(out)
}

pub fn merging_witness() -> Result<MergingWitness> {
    let rho = merging_state();
    let r_ab_split = Bipartition::new(&[0], &[1, 2], 3)?;
    let rb_a_split = Bipartition::new(&[0, 2], &[1], 3)?;
    let r_ab = MeasureReport::new("qire", qi_relative_entropy(&rho, &r_ab_split)?, Method::ClosedForm)
        .with_input("state", "merging")
        .with_input("split", "A=0;B=1,2");
    let rb_a = MeasureReport::new("qire", qi_relative_entropy(&rho, &rb_a_split)?, Method::ClosedForm)
        .with_input("state", "merging")
        .with_input("split", "A=0,2;B=1");

    let relabel = vec![0, 1, 3, 2];
    let start = rho.tensor(&DensityMatrix::basis(&[3], 0)).permute(&relabel)?;
    let ch = merging_channel();
    let merged = merge_on_blocks(&start, &ch.to_kraus())?;
    let merge_gap = trace_norm(&(&merged - rho.matrix()))?;
    Ok(MergingWitness {
        contradiction: r_ab.value > rb_a.value,
        r_ab,
        rb_a,
        merge_class: ch.classify(INCOHERENCE_TOL),
        merge_gap,
        relabel,
    })
}

/// Every Kraus operator the constructions label incoherent, by name; used to
/// check the incoherence claims in one place.
pub fn labeled_incoherent_operators() -> Vec<(String, ComplexMatrix)> {
    let mut out = Vec::new();
    for (i, k) in teleport_instrument().ops().iter().enumerate() {
        out.push((format!("teleport K_{i}"), k.clone()));
    }
    for (i, u) in teleport_corrections().iter().enumerate() {
        out.push((format!("teleport correction {i}"), u.clone()));
    }
    for (i, (a, b)) in domino_channel().pairs().iter().enumerate() {
        out.push((format!("domino A_{}", i + 1), a.clone()));
        out.push((format!("domino B_{}", i + 1), b.clone()));
    }
    for (i, (_, b)) in merging_channel().pairs().iter().enumerate() {
        out.push((format!("merging Bob part {i}"), b.clone()));
    }
    out
}

/// True iff every operator of [`labeled_incoherent_operators`] passes the
/// incoherence predicate.
pub fn all_labeled_operators_incoherent() -> bool {
    labeled_incoherent_operators()
        .iter()
        .all(|(_, k)| is_incoherent_operator(k, INCOHERENCE_TOL))
}

//! Kraus channels, the incoherent operation classes and local protocols with
//! classical communication.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{check_dims, eig_hermitian, ComplexMatrix, DensityMatrix};
use crate::states::{complex_gaussian, haar_isometry, seeded};

/// Default modulus threshold for [`is_incoherent_operator`].
pub const INCOHERENCE_TOL: f64 = 1e-9;
/// Completeness residual accepted by channel constructors.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Instrument outcomes at or below this probability are dropped.
pub const PRUNE_PROBABILITY: f64 = 1e-12;

/// True iff every column has at most one entry with modulus above `tol`,
/// i.e. `K|m> ∝ |n>` for every incoherent basis state `|m>`.
pub fn is_incoherent_operator(k: &ComplexMatrix, tol: f64) -> bool {
    (0..k.cols()).all(|c| (0..k.rows()).filter(|&r| k[(r, c)].norm() > tol).count() <= 1)
}

fn completeness_residual(ops: &[ComplexMatrix]) -> f64 {
    let n = ops.first().map_or(0, |k| k.cols());
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in ops {
        sum += &(&k.adjoint() * k);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(n))
}

/// A completely positive trace-preserving map `ρ ↦ Σ_l K_l ρ K_l^†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::IncompleteChannel(1.0));
        }
        let n_in: usize = in_dims.iter().product();
        let n_out: usize = out_dims.iter().product();
        check_dims(&in_dims, n_in)?;
        check_dims(&out_dims, n_out)?;
        if let Some(k) = ops.iter().find(|k| k.cols() != n_in || k.rows() != n_out) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, channel is {n_out}x{n_in}",
                k.rows(),
                k.cols()
            )));
        }
        let residual = completeness_residual(&ops);
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel(residual));
        }
        Ok(Self { ops, in_dims, out_dims })
    }

    /// Single-subsystem channel whose dims are read off the operator shape.
    pub fn from_ops(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let (rows, cols) = ops.first().map_or((0, 0), |k| (k.rows(), k.cols()));
        Self::new(ops, vec![cols.max(1)], vec![rows.max(1)])
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            ops: vec![ComplexMatrix::identity(n)],
            in_dims: dims.to_vec(),
            out_dims: dims.to_vec(),
        }
    }

    pub fn unitary(u: ComplexMatrix, dims: &[usize]) -> Result<Self> {
        Self::new(vec![u], dims.to_vec(), dims.to_vec())
    }

    /// The fully dephasing channel `Σ_k |k><k| · |k><k|`.
    pub fn dephasing(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        let ops = (0..n)
            .map(|k| {
                let e = ComplexMatrix::basis_vector(n, k);
                ComplexMatrix::outer(&e, &e)
            })
            .collect();
        Self {
            ops,
            in_dims: dims.to_vec(),
            out_dims: dims.to_vec(),
        }
    }

    /// Re-tags the subsystem structure without touching the operators.
    pub fn with_dims(self, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        Self::new(self.ops, in_dims, out_dims)
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `‖Σ K^† K - I‖_∞`.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.ops)
    }

    pub fn is_incoherent(&self, tol: f64) -> bool {
        self.ops.iter().all(|k| is_incoherent_operator(k, tol))
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.ops[0].cols() {
            return Err(Error::DimensionMismatch(format!(
                "channel takes dimension {}, state has {}",
                self.ops[0].cols(),
                rho.dim()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho)?;
        let n = self.ops[0].rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in &self.ops {
            out += &k.sandwich(rho.matrix());
        }
        Ok(DensityMatrix::from_parts(out.hermitian_part(), self.out_dims.clone()))
    }

    /// Keeps each outcome separately: probability `Tr[K_l ρ K_l^†]` and the
    /// normalized post-measurement state. Outcomes with probability at most
    /// [`PRUNE_PROBABILITY`] are omitted.
    pub fn apply_instrument(&self, rho: &DensityMatrix) -> Result<Vec<Outcome>> {
        self.check_input(rho)?;
        let mut outcomes = Vec::new();
        for (index, k) in self.ops.iter().enumerate() {
            let m = k.sandwich(rho.matrix());
            let p = m.trace().re;
            if p > PRUNE_PROBABILITY {
                outcomes.push(Outcome {
                    probability: p,
                    state: DensityMatrix::from_unnormalized(m, self.out_dims.clone()),
                    index,
                });
            }
        }
        Ok(outcomes)
    }
}

/// One retained outcome of an instrument.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub probability: f64,
    pub state: DensityMatrix,
    pub index: usize,
}

/// Membership flags for the operation classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChannelClass {
    /// Every Kraus operator (as a whole) is incoherent.
    pub incoherent: bool,
    /// A product Kraus decomposition is known.
    pub separable: bool,
    /// Separable with incoherent operators on both parties.
    #[serde(rename = "si")]
    pub separable_incoherent: bool,
    /// Separable with incoherent operators on Bob's side.
    #[serde(rename = "sqi")]
    pub separable_quantum_incoherent: bool,
}

/// A channel given by product Kraus operators `A_i ⊗ B_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductKrausChannel {
    pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
    a_in: Vec<usize>,
    a_out: Vec<usize>,
    b_in: Vec<usize>,
    b_out: Vec<usize>,
}

impl ProductKrausChannel {
    /// Product channel whose local operators preserve each party's dims.
    pub fn new(pairs: Vec<(ComplexMatrix, ComplexMatrix)>, a_dims: Vec<usize>, b_dims: Vec<usize>) -> Result<Self> {
        Self::with_output_dims(pairs, a_dims.clone(), a_dims, b_dims.clone(), b_dims)
    }

    pub fn with_output_dims(
        pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
        a_in: Vec<usize>,
        a_out: Vec<usize>,
        b_in: Vec<usize>,
        b_out: Vec<usize>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::IncompleteChannel(1.0));
        }
        for dims in [&a_in, &a_out, &b_in, &b_out] {
            check_dims(dims, dims.iter().product())?;
        }
        let shape = |dims_out: &[usize], dims_in: &[usize]| -> (usize, usize) {
            (dims_out.iter().product(), dims_in.iter().product())
        };
        let a_shape = shape(&a_out, &a_in);
        let b_shape = shape(&b_out, &b_in);
        for (a, b) in &pairs {
            if (a.rows(), a.cols()) != a_shape || (b.rows(), b.cols()) != b_shape {
                return Err(Error::DimensionMismatch(format!(
                    "pair shapes {}x{} and {}x{} do not match party dims",
                    a.rows(),
                    a.cols(),
                    b.rows(),
                    b.cols()
                )));
            }
        }
        let ch = Self {
            pairs,
            a_in,
            a_out,
            b_in,
            b_out,
        };
        let residual = ch.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel(residual));
        }
        Ok(ch)
    }

    pub fn pairs(&self) -> &[(ComplexMatrix, ComplexMatrix)] {
        &self.pairs
    }

    pub fn a_dims(&self) -> &[usize] {
        &self.a_in
    }

    pub fn b_dims(&self) -> &[usize] {
        &self.b_in
    }

    pub fn a_out_dims(&self) -> &[usize] {
        &self.a_out
    }

    pub fn b_out_dims(&self) -> &[usize] {
        &self.b_out
    }

    /// `‖Σ A_i^†A_i ⊗ B_i^†B_i - I‖_∞`.
    pub fn completeness_residual(&self) -> f64 {
        let na: usize = self.a_in.iter().product();
        let nb: usize = self.b_in.iter().product();
        let mut sum = ComplexMatrix::zeros(na * nb, na * nb);
        for (a, b) in &self.pairs {
            sum += &(&a.adjoint() * a).kron(&(&b.adjoint() * b));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(na * nb))
    }

    /// The channel as plain Kraus operators `A_i ⊗ B_i` on dims `a ++ b`.
    pub fn to_kraus(&self) -> KrausChannel {
        let ops = self.pairs.iter().map(|(a, b)| a.kron(b)).collect();
        KrausChannel {
            ops,
            in_dims: self.a_in.iter().chain(&self.b_in).copied().collect(),
            out_dims: self.a_out.iter().chain(&self.b_out).copied().collect(),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.to_kraus().apply(rho)
    }

    pub fn apply_instrument(&self, rho: &DensityMatrix) -> Result<Vec<Outcome>> {
        self.to_kraus().apply_instrument(rho)
    }

    pub fn classify(&self, tol: f64) -> ChannelClass {
        classify(self, tol)
    }
}

/// Classifies a product channel. Separability always holds; SI needs every
/// `A_i` and `B_i` incoherent, SQI only every `B_i`.
pub fn classify(ch: &ProductKrausChannel, tol: f64) -> ChannelClass {
    let a_ok = ch.pairs.iter().all(|(a, _)| is_incoherent_operator(a, tol));
    let b_ok = ch.pairs.iter().all(|(_, b)| is_incoherent_operator(b, tol));
    let incoherent = ch
        .pairs
        .iter()
        .all(|(a, b)| is_incoherent_operator(&a.kron(b), tol));
    ChannelClass {
        incoherent,
        separable: true,
        separable_incoherent: a_ok && b_ok,
        separable_quantum_incoherent: b_ok,
    }
}

/// Classifies a channel without product structure; only the incoherence flag
/// can be decided.
pub fn classify_kraus(ch: &KrausChannel, tol: f64) -> ChannelClass {
    ChannelClass {
        incoherent: ch.is_incoherent(tol),
        ..ChannelClass::default()
    }
}

/// Turns incoherent operators `R_l` into a complete incoherent channel.
///
/// When `M = Σ R_l^† R_l` is diagonal the operators become `R_l M^{-1/2}`,
/// which rescales columns and keeps every pattern. Otherwise (two columns of
/// one operator share a target) the operators are scaled by `‖M‖^{-1/2}` and
/// the deficit `I - Σ K^†K = Σ_k c_k |w_k><w_k|` is filled with the rank-one
/// incoherent operators `√c_k |0><w_k|`.
pub fn complete_incoherent_kraus(raw: &[ComplexMatrix]) -> Result<KrausChannel> {
    let first = raw.first().ok_or(Error::SingularNormalizer(0.0))?;
    let (rows, cols) = (first.rows(), first.cols());
    if let Some(k) = raw.iter().find(|k| (k.rows(), k.cols()) != (rows, cols)) {
        return Err(Error::DimensionMismatch(format!(
            "raw operators have shapes {rows}x{cols} and {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    if let Some(i) = raw.iter().position(|k| !is_incoherent_operator(k, INCOHERENCE_TOL)) {
        return Err(Error::NotIncoherentInput(i));
    }
    let mut m = ComplexMatrix::zeros(cols, cols);
    for k in raw {
        m += &(&k.adjoint() * k);
    }
    let min_diag = (0..cols).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    if min_diag < 1e-12 {
        return Err(Error::SingularNormalizer(min_diag));
    }
    let scale_tol = 1e-12 * m.max_abs();
    let ops = if m.is_diagonal(scale_tol) {
        let inv_sqrt: Vec<C64> = (0..cols)
            .map(|i| C64::new(1.0 / m[(i, i)].re.sqrt(), 0.0))
            .collect();
        let d = ComplexMatrix::diagonal(&inv_sqrt);
        raw.iter().map(|k| k * &d).collect()
    } else {
        let eig = eig_hermitian(&m)?;
        let s = 1.0 / eig.values[0].sqrt();
        let mut ops: Vec<ComplexMatrix> = raw.iter().map(|k| k.scale_real(s)).collect();
        let deficit = &ComplexMatrix::identity(cols) - &m.scale_real(s * s);
        let rest = eig_hermitian(&deficit.hermitian_part())?;
        let target = ComplexMatrix::basis_vector(rows, 0);
        for (k, &c) in rest.values.iter().enumerate() {
            if c > 1e-15 {
                let w = rest.vectors.column(k);
                ops.push(ComplexMatrix::outer(&target, &w).scale_real(c.sqrt()));
            }
        }
        ops
    };
    KrausChannel::from_ops(ops)
}

fn random_incoherent_raw<R: Rng + ?Sized>(rng: &mut R, n: usize, n_kraus: usize) -> Vec<ComplexMatrix> {
    (0..n_kraus)
        .map(|_| {
            let mut k = ComplexMatrix::zeros(n, n);
            for c in 0..n {
                let r = rng.random_range(0..n);
                k[(r, c)] = complex_gaussian(rng);
            }
            k
        })
        .collect()
}

pub(crate) fn random_incoherent_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    n_kraus: usize,
) -> Result<KrausChannel> {
    if n_kraus == 0 {
        return Err(Error::BadDimension("a channel needs at least one Kraus operator".into()));
    }
    let n: usize = dims.iter().product();
    check_dims(dims, n)?;
    let mut last = Error::SingularNormalizer(0.0);
    for _ in 0..16 {
        match complete_incoherent_kraus(&random_incoherent_raw(rng, n, n_kraus)) {
            Ok(ch) => return ch.with_dims(dims.to_vec(), dims.to_vec()),
            Err(e @ Error::SingularNormalizer(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Random incoherent channel: each raw operator sends every column to a random
/// row with a complex-Gaussian amplitude, then [`complete_incoherent_kraus`]
/// restores completeness.
pub fn random_incoherent_channel(dims: &[usize], n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    random_incoherent_channel_with(&mut seeded(seed), dims, n_kraus)
}

/// Random general instrument with `n_outcomes` outcomes, cut from a
/// Haar-random isometry.
pub(crate) fn random_instrument_with<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    n_outcomes: usize,
) -> Result<KrausChannel> {
    let d: usize = dims.iter().product();
    let v = haar_isometry(rng, d * n_outcomes, d);
    let ops = (0..n_outcomes)
        .map(|l| ComplexMatrix::from_fn(d, d, |r, c| v[(l * d + r, c)]))
        .collect();
    KrausChannel::new(ops, dims.to_vec(), dims.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    fn name(self) -> &'static str {
        match self {
            Party::A => "A",
            Party::B => "B",
        }
    }
}

/// Which parties must act incoherently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Restriction {
    /// No constraint (LOCC).
    None,
    /// Bob's instruments must be incoherent (LQICC).
    Lqicc,
    /// Both parties' instruments must be incoherent (LICC).
    Licc,
}

/// One round: the acting party picks an instrument from `branches` according
/// to the previous round's outcome.
#[derive(Clone, Debug)]
pub struct Round {
    pub party: Party,
    pub branches: Vec<KrausChannel>,
    /// `route[o]` is the branch used after previous outcome `o`. Empty for the
    /// first round, which must have a single branch.
    pub route: Vec<usize>,
}

/// A script of party-local instruments with one-way classical control.
#[derive(Clone, Debug)]
pub struct LocalProtocol {
    a_dims: Vec<usize>,
    b_dims: Vec<usize>,
    restriction: Restriction,
    rounds: Vec<Round>,
    terminal: Option<Vec<usize>>,
}

impl LocalProtocol {
    pub fn new(a_dims: Vec<usize>, b_dims: Vec<usize>, restriction: Restriction) -> Self {
        Self {
            a_dims,
            b_dims,
            restriction,
            rounds: Vec::new(),
            terminal: None,
        }
    }

    pub fn a_dims(&self) -> &[usize] {
        &self.a_dims
    }

    pub fn b_dims(&self) -> &[usize] {
        &self.b_dims
    }

    pub fn restriction(&self) -> Restriction {
        self.restriction
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    fn party_dims(&self, party: Party) -> &[usize] {
        match party {
            Party::A => &self.a_dims,
            Party::B => &self.b_dims,
        }
    }

    /// Appends a round after checking locality and that the route covers
    /// every outcome of the previous round.
    pub fn push_round(&mut self, party: Party, branches: Vec<KrausChannel>, route: Vec<usize>) -> Result<()> {
        if branches.is_empty() {
            return Err(Error::BadProtocol("round without instruments".into()));
        }
        let dims = self.party_dims(party);
        if let Some(ch) = branches.iter().find(|ch| ch.in_dims() != dims || ch.out_dims() != dims) {
            return Err(Error::BadProtocol(format!(
                "instrument on party {} has dims {:?}, party has {dims:?}",
                party.name(),
                ch.in_dims()
            )));
        }
        match self.rounds.last() {
            None => {
                if branches.len() != 1 || !route.is_empty() {
                    return Err(Error::BadProtocol("the first round takes a single instrument and no route".into()));
                }
            }
            Some(prev) => {
                let outcomes = prev.branches.iter().map(KrausChannel::len).max().unwrap_or(0);
                if route.len() != outcomes {
                    return Err(Error::BadProtocol(format!(
                        "route has {} entries, previous round has {outcomes} outcomes",
                        route.len()
                    )));
                }
                if let Some(&bad) = route.iter().find(|&&b| b >= branches.len()) {
                    return Err(Error::BadProtocol(format!("route targets missing branch {bad}")));
                }
            }
        }
        self.rounds.push(Round { party, branches, route });
        Ok(())
    }

    /// Relabels leaves by the final outcome: `labels[o]` for last outcome `o`.
    pub fn with_terminal(mut self, labels: Vec<usize>) -> Self {
        self.terminal = Some(labels);
        self
    }

    fn embed(&self, party: Party, k: &ComplexMatrix) -> ComplexMatrix {
        let na: usize = self.a_dims.iter().product();
        let nb: usize = self.b_dims.iter().product();
        match party {
            Party::A => k.kron(&ComplexMatrix::identity(nb)),
            Party::B => ComplexMatrix::identity(na).kron(k),
        }
    }

    fn branch_of(&self, round: usize, transcript: &[usize]) -> usize {
        match transcript.last() {
            None => 0,
            Some(&o) => self.rounds[round].route[o],
        }
    }

    /// Compiles the script into a product channel: each outcome path
    /// contributes `(A-ops composed) ⊗ (B-ops composed)`.
    pub fn to_product_channel(&self) -> Result<ProductKrausChannel> {
        let na: usize = self.a_dims.iter().product();
        let nb: usize = self.b_dims.iter().product();
        let mut pairs = Vec::new();
        let mut stack = vec![(0usize, Vec::<usize>::new(), ComplexMatrix::identity(na), ComplexMatrix::identity(nb))];
        while let Some((round, transcript, a, b)) = stack.pop() {
            if round == self.rounds.len() {
                pairs.push((a, b));
                continue;
            }
            let r = &self.rounds[round];
            let ch = &r.branches[self.branch_of(round, &transcript)];
            for (o, k) in ch.ops().iter().enumerate() {
                let mut t = transcript.clone();
                t.push(o);
                match r.party {
                    Party::A => stack.push((round + 1, t, k * &a, b.clone())),
                    Party::B => stack.push((round + 1, t, a.clone(), k * &b)),
                }
            }
        }
        ProductKrausChannel::new(pairs, self.a_dims.clone(), self.b_dims.clone())
    }
}

/// A terminal branch of a protocol run.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub probability: f64,
    pub state: DensityMatrix,
    /// Outcome index of every round.
    pub transcript: Vec<usize>,
    pub label: Option<usize>,
}

/// Expands every branch of `p` on `rho` depth-first.
pub fn run_protocol(p: &LocalProtocol, rho: &DensityMatrix) -> Result<Vec<Leaf>> {
    let expected: Vec<usize> = p.a_dims.iter().chain(&p.b_dims).copied().collect();
    if rho.dim() != expected.iter().product::<usize>() {
        return Err(Error::DimensionMismatch(format!(
            "protocol acts on dims {expected:?}, state has {:?}",
            rho.dims()
        )));
    }
    for (i, r) in p.rounds.iter().enumerate() {
        let must = match (p.restriction, r.party) {
            (Restriction::Licc, _) | (Restriction::Lqicc, Party::B) => true,
            _ => false,
        };
        if must && !r.branches.iter().all(|ch| ch.is_incoherent(INCOHERENCE_TOL)) {
            return Err(Error::IncoherenceViolation {
                round: i,
                party: r.party.name(),
            });
        }
    }
    let start = DensityMatrix::from_parts(rho.matrix().clone(), expected);
    let mut leaves = Vec::new();
    expand(p, 0, start, 1.0, Vec::new(), &mut leaves)?;
    Ok(leaves)
}

fn expand(
    p: &LocalProtocol,
    round: usize,
    state: DensityMatrix,
    prob: f64,
    transcript: Vec<usize>,
    leaves: &mut Vec<Leaf>,
) -> Result<()> {
    if round == p.rounds.len() {
        let label = match (&p.terminal, transcript.last()) {
            (Some(labels), Some(&o)) => labels.get(o).copied(),
            _ => None,
        };
        leaves.push(Leaf {
            probability: prob,
            state,
            transcript,
            label,
        });
        return Ok(());
    }
    let r = &p.rounds[round];
    let ch = &r.branches[p.branch_of(round, &transcript)];
    for (o, k) in ch.ops().iter().enumerate() {
        let m = p.embed(r.party, k).sandwich(state.matrix());
        let q = m.trace().re;
        if q <= PRUNE_PROBABILITY {
            continue;
        }
        let mut t = transcript.clone();
        t.push(o);
        let next = DensityMatrix::from_unnormalized(m, state.dims().to_vec());
        expand(p, round + 1, next, prob * q, t, leaves)?;
    }
    Ok(())
}

/// Averages the leaves back into the channel output `Σ p ρ_leaf`.
pub fn average_leaves(leaves: &[Leaf]) -> Result<DensityMatrix> {
    let parts: Vec<(f64, &DensityMatrix)> = leaves.iter().map(|l| (l.probability, &l.state)).collect();
    DensityMatrix::mixture(&parts)
}

/// Random LQICC script: rounds alternate between a general two-outcome
/// instrument on `A` and a random two-outcome incoherent instrument on `B`,
/// each branch chosen by the previous outcome. Such scripts are SQI.
pub fn random_sqi_channel(a_dims: &[usize], b_dims: &[usize], rounds: usize, seed: u64) -> Result<LocalProtocol> {
    if rounds == 0 {
        return Err(Error::BadProtocol("at least one round is required".into()));
    }
    let mut rng = seeded(seed);
    let mut p = LocalProtocol::new(a_dims.to_vec(), b_dims.to_vec(), Restriction::Lqicc);
    let mut prev_outcomes = 0;
    for r in 0..rounds {
        let party = if r % 2 == 0 { Party::A } else { Party::B };
        // completion may add outcomes beyond the two requested; route by parity
        let (n_branches, route) = if r == 0 { (1, vec![]) } else { (2, (0..prev_outcomes).map(|o| o % 2).collect()) };
        let branches = (0..n_branches)
            .map(|_| match party {
                Party::A => random_instrument_with(&mut rng, a_dims, 2),
                Party::B => random_incoherent_channel_with(&mut rng, b_dims, 2),
            })
            .collect::<Result<Vec<KrausChannel>>>()?;
        prev_outcomes = branches.iter().map(KrausChannel::len).max().unwrap_or(0);
        p.push_round(party, branches, route)?;
    }
    Ok(p)
}

/// Random SI channel: an incoherent instrument on `A` followed by one of two
/// random incoherent channels on `B` chosen by outcome parity, compiled to
/// product form.
pub fn random_si_channel(a_dims: &[usize], b_dims: &[usize], seed: u64) -> Result<ProductKrausChannel> {
    let mut rng = seeded(seed);
    let mut p = LocalProtocol::new(a_dims.to_vec(), b_dims.to_vec(), Restriction::Licc);
    let first = random_incoherent_channel_with(&mut rng, a_dims, 2)?;
    let route = (0..first.len()).map(|o| o % 2).collect();
    p.push_round(Party::A, vec![first], vec![])?;
    let branches = (0..2)
        .map(|_| random_incoherent_channel_with(&mut rng, b_dims, 2))
        .collect::<Result<Vec<_>>>()?;
    p.push_round(Party::B, branches, route)?;
    p.to_product_channel()
}

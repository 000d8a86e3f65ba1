//! Frames, phase-retrievability testing, and retrievable-subspace
//! certificates for the averaging channel.
//!
//! A family {Aⱼ} of Hermitian measurement operators does phase retrieval
//! on ℂᵏ when the data ⟨x, Aⱼx⟩ determines the state xx*. Injectivity
//! failures live in the real space of Hermitian matrices: x and y collide
//! exactly when xx* − yy* is trace-orthogonal to every Aⱼ, and a matrix
//! in that kernel splits as xx* − yy* iff it has at most one positive and
//! at most one negative eigenvalue. [`pr_falsifier`] decides
//! retrievability exactly when the kernel has dimension ≤ 1 or the
//! ambient dimension is 2, and otherwise runs a seeded search over the
//! kernel sphere for a low-inertia element, returning an honest
//! `Undecided` verdict when the budget runs out. Every emitted
//! counterexample is re-verified against the measurements before it
//! leaves the module.
//!
//! For the averaging channel Φ_π the retrievability index, the largest
//! dimension of a subspace on which Φ_π is injective on pure states, is
//! bounded below by max(max mᵢ, ⌊d/4⌋+1), and both bounds come with
//! constructions. [`multiplicity_pr_witness`] verifies the multiplicity
//! subspace through its closed-form output blocks, which expose the full
//! Gram matrix of the coefficient vector. [`subspace_pr_witness`] threads
//! a phase-retrievable frame across the isotypic types, one rank-one map
//! per type, and certifies the frame with the falsifier.
//! [`range_measurement_equivalence`] cross-validates the two equivalent
//! views on multiplicity-free representations: channel injectivity on
//! range(T) against phase retrieval by the pulled-back measurements
//! {Tᵢ*Tᵢ}.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::decompose::{group_average, IsotypicDecomposition};
use crate::invariants::{beta_closed, pass_tolerance};
use crate::linalg::{self, CMatrix, CVector};
use crate::rep::Representation;
use crate::seeding::{child_rng, child_seed};
use crate::{Result, TwirlError};

/// Ambient-dimension cap for the falsifier's eigen-searches.
pub const MAX_FALSIFIER_DIM: usize = 8;

/// Random restarts the falsifier spends before conceding.
pub const FALSIFIER_RESTARTS: usize = 64;

/// Two measurement lists closer than this count as colliding.
pub const COLLISION_MEAS_TOL: f64 = 1e-10;

/// Two states further apart than this count as genuinely different.
pub const COLLISION_STATE_TOL: f64 = 1e-4;

/// A finite list of vectors in ℂⁿ.
#[derive(Debug, Clone)]
pub struct Frame {
    n: usize,
    vectors: Vec<CVector>,
}

impl Frame {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let n = vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| TwirlError::InvalidParameter("empty frame".to_string()))?;
        if n == 0 {
            return Err(TwirlError::InvalidParameter(
                "zero-dimensional frame vectors".to_string(),
            ));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(TwirlError::DimensionMismatch(
                "frame vectors have mixed lengths".to_string(),
            ));
        }
        Ok(Frame { n, vectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// Σⱼ fⱼfⱼ*.
    pub fn frame_operator(&self) -> CMatrix {
        self.vectors
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, f| {
                acc + linalg::outer(f, f)
            })
    }
}

/// Spectral data of the frame operator plus the similarity to a Parseval
/// frame.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    /// Smallest eigenvalue of the frame operator (the optimal lower frame
    /// bound; zero for non-frames).
    pub lower_bound: f64,
    /// Largest eigenvalue (the optimal upper frame bound).
    pub upper_bound: f64,
    pub is_frame: bool,
    pub is_parseval: bool,
    /// S^{-1/2}fⱼ, which form a Parseval frame; present only for frames.
    pub parseval_vectors: Option<Vec<CVector>>,
}

/// Frame bounds as extreme eigenvalues of Σfⱼfⱼ*, the Parseval test
/// Σfⱼfⱼ* = I, and the canonical Parseval-ization.
pub fn frame_analysis(frame: &Frame) -> Result<FrameAnalysis> {
    let s = frame.frame_operator();
    let (evals, _) = linalg::hermitian_eigen_sorted(&s);
    let lower = evals.first().copied().unwrap_or(0.0).max(0.0);
    let upper = evals.last().copied().unwrap_or(0.0);
    if upper <= 0.0 {
        return Err(TwirlError::InvalidInput(
            "zero frame operator".to_string(),
        ));
    }
    let is_frame = lower > 1e-10 * upper;
    let n = frame.n();
    let is_parseval = linalg::fro_norm(&(&s - linalg::identity(n))) <= 1e-9 * n as f64;
    let parseval_vectors = if is_frame {
        let inv_sqrt = linalg::psd_inv_sqrt(&s, 1e-12).ok_or_else(|| {
            TwirlError::InvalidInput("frame operator numerically singular".to_string())
        })?;
        Some(frame.vectors.iter().map(|f| &inv_sqrt * f).collect())
    } else {
        None
    };
    Ok(FrameAnalysis {
        lower_bound: lower,
        upper_bound: upper,
        is_frame,
        is_parseval,
        parseval_vectors,
    })
}

/// A finite list of Hermitian measurement operators on ℂᵏ.
#[derive(Debug, Clone)]
pub struct OperatorFrame {
    k: usize,
    operators: Vec<CMatrix>,
}

impl OperatorFrame {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let k = operators
            .first()
            .map(|a| a.nrows())
            .ok_or_else(|| TwirlError::InvalidParameter("empty operator frame".to_string()))?;
        if k == 0 {
            return Err(TwirlError::InvalidParameter(
                "zero-dimensional measurement operators".to_string(),
            ));
        }
        for a in &operators {
            if a.nrows() != k || a.ncols() != k {
                return Err(TwirlError::DimensionMismatch(
                    "measurement operators have mixed shapes".to_string(),
                ));
            }
            let defect = linalg::fro_norm(&(a - a.adjoint()));
            if defect > 1e-9 * k as f64 {
                return Err(TwirlError::InvalidParameter(format!(
                    "measurement operator not Hermitian: defect {defect:.3e}"
                )));
            }
        }
        Ok(OperatorFrame { k, operators })
    }

    /// The rank-one measurements {fⱼfⱼ*} of a vector frame.
    pub fn from_frame(frame: &Frame) -> Self {
        OperatorFrame {
            k: frame.n(),
            operators: frame
                .vectors()
                .iter()
                .map(|f| linalg::outer(f, f))
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    /// Each operator PSD and Σ Fⱼ = I, within tol per unit of dimension.
    pub fn is_povm(&self, tol: f64) -> bool {
        let slack = tol * self.k as f64;
        let mut sum = CMatrix::zeros(self.k, self.k);
        for a in &self.operators {
            let (evals, _) = linalg::hermitian_eigen_sorted(a);
            if evals.first().copied().unwrap_or(0.0) < -slack {
                return false;
            }
            sum += a;
        }
        linalg::fro_norm(&(sum - linalg::identity(self.k))) <= slack
    }

    /// Phaseless measurements ⟨x, Aⱼx⟩ (real because Aⱼ is Hermitian).
    pub fn measure(&self, x: &CVector) -> Vec<f64> {
        self.operators
            .iter()
            .map(|a| x.dotc(&(a * x)).re)
            .collect()
    }
}

/// Real-orthonormal basis of the Hermitian matrices on ℂᵏ under ⟨A,B⟩ =
/// tr(AB): diagonal units, then symmetric and antisymmetric pair
/// combinations in lexicographic order.
fn hermitian_basis(k: usize) -> Vec<CMatrix> {
    let s = 1.0 / 2.0_f64.sqrt();
    let mut basis = Vec::with_capacity(k * k);
    for i in 0..k {
        basis.push(linalg::matrix_unit(k, i, i));
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mut sym = CMatrix::zeros(k, k);
            sym[(i, j)] = linalg::cr(s);
            sym[(j, i)] = linalg::cr(s);
            basis.push(sym);
            let mut asym = CMatrix::zeros(k, k);
            asym[(i, j)] = linalg::c(0.0, s);
            asym[(j, i)] = linalg::c(0.0, -s);
            basis.push(asym);
        }
    }
    basis
}

/// Orthonormal basis of the null space of a real matrix, via SVD with a
/// relative singular-value threshold.
fn real_null_space(mat: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let cols = mat.ncols();
    let rows = mat.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (mat.nrows(), cols)).copy_from(mat);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, s| a.max(*s));
    let threshold = rel_tol * smax;
    let mut null = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= threshold {
            null.push(v_t.row(i).transpose());
        }
    }
    null
}

/// Real-orthonormal basis of {H Hermitian : tr(AⱼH) = 0 for all j} inside
/// the k²-dimensional real space of Hermitian matrices.
pub fn hermitian_kernel(m: &OperatorFrame) -> Vec<CMatrix> {
    let k = m.k();
    let basis = hermitian_basis(k);
    let mut constraints = DMatrix::zeros(m.operators().len(), basis.len());
    for (j, a) in m.operators().iter().enumerate() {
        for (t, b) in basis.iter().enumerate() {
            // tr(AB) is real for Hermitian A, B.
            constraints[(j, t)] = linalg::trace(&(a * b)).re;
        }
    }
    real_null_space(&constraints, 1e-8)
        .into_iter()
        .map(|c| combine_hermitian(&basis, &c))
        .collect()
}

fn combine_hermitian(basis: &[CMatrix], coeffs: &DVector<f64>) -> CMatrix {
    let k = basis[0].nrows();
    let mut h = CMatrix::zeros(k, k);
    for (b, c) in basis.iter().zip(coeffs.iter()) {
        h += b.scale(*c);
    }
    h
}

/// Outcome of a phase-retrievability decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrVerdict {
    Retrievable,
    CounterexampleFound,
    Undecided,
}

impl PrVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrVerdict::Retrievable => "retrievable",
            PrVerdict::CounterexampleFound => "counterexample-found",
            PrVerdict::Undecided => "undecided",
        }
    }
}

/// Result of a retrievability test or witness construction.
#[derive(Debug, Clone)]
pub struct PrCertificate {
    pub verdict: PrVerdict,
    /// Dimension of the Hermitian collision kernel, when one was computed.
    pub kernel_dim: Option<usize>,
    /// Verified colliding pair: equal measurements, different states.
    pub counterexample: Option<(CVector, CVector)>,
    /// Objective evaluations consumed by the search tier.
    pub evaluations: usize,
    pub restarts_used: usize,
    /// Whether an exact tier decided the verdict.
    pub exact: bool,
    /// Orthonormal basis of the exhibited subspace, for witnesses.
    pub subspace: Option<Vec<CVector>>,
    /// The map ℂᵏ → H whose range the witness subspace is, when built
    /// from one.
    pub range_map: Option<CMatrix>,
    pub residuals: BTreeMap<String, f64>,
}

impl PrCertificate {
    fn search(verdict: PrVerdict, kernel_dim: usize, outcome: &KernelOutcome) -> Self {
        PrCertificate {
            verdict,
            kernel_dim: Some(kernel_dim),
            counterexample: outcome.pair.clone(),
            evaluations: outcome.evaluations,
            restarts_used: outcome.restarts_used,
            exact: outcome.exact,
            subspace: None,
            range_map: None,
            residuals: BTreeMap::new(),
        }
    }
}

struct KernelOutcome {
    verdict: PrVerdict,
    pair: Option<(CVector, CVector)>,
    evaluations: usize,
    restarts_used: usize,
    exact: bool,
}

/// Splits a Hermitian matrix with at most one positive and at most one
/// negative eigenvalue as xx* − yy*. Returns None for other inertias.
fn split_pair(h: &CMatrix, rel_tol: f64) -> Option<(CVector, CVector)> {
    let (evals, evecs) = linalg::hermitian_eigen_sorted(h);
    let scale = evals.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if scale == 0.0 {
        return None;
    }
    let tau = rel_tol * scale;
    let pos: Vec<usize> = (0..evals.len()).filter(|i| evals[*i] > tau).collect();
    let neg: Vec<usize> = (0..evals.len()).filter(|i| evals[*i] < -tau).collect();
    if pos.len() > 1 || neg.len() > 1 {
        return None;
    }
    let dim = h.nrows();
    let x = pos
        .first()
        .map(|i| evecs.column(*i).into_owned().scale(evals[*i].sqrt()))
        .unwrap_or_else(|| CVector::zeros(dim));
    let y = neg
        .first()
        .map(|i| evecs.column(*i).into_owned().scale((-evals[*i]).sqrt()))
        .unwrap_or_else(|| CVector::zeros(dim));
    Some((x, y))
}

/// Sum of all-but-two-extreme |eigenvalues|: zero exactly on the matrices
/// split_pair accepts.
fn middle_mass(h: &CMatrix) -> f64 {
    let (evals, _) = linalg::hermitian_eigen_sorted(h);
    let k = evals.len();
    if k <= 2 {
        return 0.0;
    }
    evals[1..k - 1].iter().map(|e| e.abs()).sum()
}

/// For two definite 2×2 Hermitian matrices, a real t with h₁ + t·h₂
/// singular; such t always exists because the minimal eigenvalue changes
/// sign along the pencil.
fn definite_pencil_singular(h1: &CMatrix, h2: &CMatrix) -> Option<CMatrix> {
    let det = |a: &CMatrix| (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
    let p0 = det(h1);
    let p2 = det(h2);
    let p1 = (h1[(0, 0)] * h2[(1, 1)] + h2[(0, 0)] * h1[(1, 1)]
        - h1[(0, 1)] * h2[(1, 0)]
        - h2[(0, 1)] * h1[(1, 0)])
        .re;
    let disc = p1 * p1 - 4.0 * p0 * p2;
    if disc < 0.0 {
        return None;
    }
    let t = if p2.abs() > 1e-14 {
        let q = -0.5 * (p1 + p1.signum() * disc.sqrt());
        if q.abs() > 1e-300 {
            // Of the two roots q/p2 and p0/q, q/p2 avoids cancellation.
            q / p2
        } else {
            0.0
        }
    } else if p1.abs() > 1e-14 {
        -p0 / p1
    } else {
        return None;
    };
    Some(h1 + h2.scale(t))
}

/// Searches span{kernel} for an element splitting as xx* − yy*, with
/// exact tiers for dimension ≤ 1 kernels and 2×2 ambient spaces and a
/// seeded pattern search otherwise. `verify` must confirm a candidate
/// pair before it is accepted.
fn falsify_kernel(
    kernel: &[CMatrix],
    ambient: usize,
    seed: u64,
    budget: usize,
    verify: &mut dyn FnMut(&CVector, &CVector) -> bool,
) -> KernelOutcome {
    let d = kernel.len();
    let mut evaluations = 0;
    if d == 0 {
        return KernelOutcome {
            verdict: PrVerdict::Retrievable,
            pair: None,
            evaluations,
            restarts_used: 0,
            exact: true,
        };
    }

    for h in kernel {
        if let Some((x, y)) = split_pair(h, 1e-10) {
            if verify(&x, &y) {
                return KernelOutcome {
                    verdict: PrVerdict::CounterexampleFound,
                    pair: Some((x, y)),
                    evaluations,
                    restarts_used: 0,
                    exact: true,
                };
            }
        }
    }

    if d == 1 {
        // The only direction (up to sign and scale) has too many nonzero
        // eigenvalues of one sign: no collision exists.
        return KernelOutcome {
            verdict: PrVerdict::Retrievable,
            pair: None,
            evaluations,
            restarts_used: 0,
            exact: true,
        };
    }

    if ambient == 2 {
        // Every basis element is definite, so some pencil combination is
        // singular, hence rank one, hence a collision.
        for j in 1..d {
            if let Some(h) = definite_pencil_singular(&kernel[0], &kernel[j]) {
                if let Some((x, y)) = split_pair(&h, 1e-10) {
                    if verify(&x, &y) {
                        return KernelOutcome {
                            verdict: PrVerdict::CounterexampleFound,
                            pair: Some((x, y)),
                            evaluations,
                            restarts_used: 0,
                            exact: true,
                        };
                    }
                }
            }
        }
    }

    let objective = |c: &DVector<f64>, evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        middle_mass(&combine_hermitian(kernel, c))
    };

    for r in 0..FALSIFIER_RESTARTS {
        if evaluations >= budget {
            return KernelOutcome {
                verdict: PrVerdict::Undecided,
                pair: None,
                evaluations,
                restarts_used: r,
                exact: false,
            };
        }
        let mut rng = child_rng(seed, &format!("falsifier-restart:{r}"));
        let mut c = DVector::from_fn(d, |_, _| linalg::gaussian(&mut rng));
        let norm = c.norm();
        if norm < 1e-12 {
            continue;
        }
        c /= norm;
        let mut f = objective(&c, &mut evaluations);
        let mut step = 0.5;
        while step > 1e-10 && f > 1e-12 && evaluations < budget {
            let mut improved = false;
            'sweep: for t in 0..d {
                for sign in [1.0_f64, -1.0] {
                    if evaluations >= budget {
                        break 'sweep;
                    }
                    let mut c2 = c.clone();
                    c2[t] += sign * step;
                    let n2 = c2.norm();
                    if n2 < 1e-12 {
                        continue;
                    }
                    c2 /= n2;
                    let f2 = objective(&c2, &mut evaluations);
                    if f2 < f - 1e-15 {
                        c = c2;
                        f = f2;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if f <= 1e-11 {
            let h = combine_hermitian(kernel, &c);
            if let Some((x, y)) = split_pair(&h, 1e-9) {
                if verify(&x, &y) {
                    return KernelOutcome {
                        verdict: PrVerdict::CounterexampleFound,
                        pair: Some((x, y)),
                        evaluations,
                        restarts_used: r + 1,
                        exact: false,
                    };
                }
            }
        }
    }

    KernelOutcome {
        verdict: PrVerdict::Undecided,
        pair: None,
        evaluations,
        restarts_used: FALSIFIER_RESTARTS,
        exact: false,
    }
}

/// Decides whether the measurements determine every state xx* on ℂᵏ,
/// exactly when possible and by seeded falsification search otherwise.
/// A returned counterexample is always independently re-verified:
/// measurements within [`COLLISION_MEAS_TOL`], states further apart than
/// [`COLLISION_STATE_TOL`].
pub fn pr_falsifier(m: &OperatorFrame, seed: u64, budget: usize) -> Result<PrCertificate> {
    if m.k() > MAX_FALSIFIER_DIM {
        return Err(TwirlError::SizeLimit(format!(
            "falsifier dimension {} exceeds cap {MAX_FALSIFIER_DIM}",
            m.k()
        )));
    }
    let kernel = hermitian_kernel(m);
    let mut verify = |x: &CVector, y: &CVector| {
        let mx = m.measure(x);
        let my = m.measure(y);
        let gap = mx
            .iter()
            .zip(&my)
            .fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        let dist = linalg::fro_norm(&(linalg::outer(x, x) - linalg::outer(y, y)));
        gap <= COLLISION_MEAS_TOL && dist > COLLISION_STATE_TOL
    };
    let outcome = falsify_kernel(&kernel, m.k(), seed, budget, &mut verify);
    Ok(PrCertificate::search(outcome.verdict, kernel.len(), &outcome))
}

/// Lower bound on the retrievability index of Φ_π:
/// max(max mᵢ, ⌊d/4⌋ + 1).
pub fn pr_lower_bound(dec: &IsotypicDecomposition) -> usize {
    beta_closed(dec).max(dec.d / 4 + 1)
}

/// Shortest length at which generic frames for ℂⁿ do phase retrieval:
/// 4n − 4 for n ≥ 2 (an upper bound for the true minimum, used as a
/// surrogate since exact values are unknown), and 1 for n ≤ 1.
pub fn minimal_frame_length_bound(n: usize) -> usize {
    if n <= 1 {
        n
    } else {
        4 * n - 4
    }
}

/// The k with bound(k) ≤ d < bound(k+1) under the 4n−4 surrogate; for
/// multiplicity-free representations with one-dimensional types this is
/// the conjectured exact retrievability index, conditional on the
/// surrogate.
pub fn pr_bracket(d: usize) -> usize {
    if d == 0 {
        0
    } else {
        d / 4 + 1
    }
}

/// Certifies the multiplicity subspace M = U*(ℂ^{m_{i*}} ⊗ u): channel
/// outputs of states in M carry the coefficient Gram matrix aᵢāⱼ/nᵢ* on
/// their block entries, so the state is recoverable up to phase.
/// Verifies the block formula, the Gram-based reconstruction, collision
/// trials, and phase invariance over `trials` seeded draws.
pub fn multiplicity_pr_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
    trials: usize,
    seed: u64,
) -> Result<PrCertificate> {
    if rep.dim() != dec.total_dim() {
        return Err(TwirlError::DimensionMismatch(format!(
            "representation dim {} vs decomposition dim {}",
            rep.dim(),
            dec.total_dim()
        )));
    }
    let i_star = dec
        .multiplicities
        .iter()
        .enumerate()
        .max_by(|(ia, ma), (ib, mb)| ma.cmp(mb).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .ok_or_else(|| TwirlError::InvalidParameter("empty decomposition".to_string()))?;
    let m = dec.multiplicities[i_star];
    let n = dec.dimensions[i_star];
    let dim = rep.dim();
    let slots: Vec<Vec<CVector>> = (0..m)
        .map(|p| (0..n).map(|l| dec.block_vector(i_star, p, l)).collect())
        .collect();
    let basis: Vec<CVector> = slots.iter().map(|s| s[0].clone()).collect();

    let mut rng = child_rng(seed, "multiplicity-witness");
    let mut worst_block = 0.0_f64;
    let mut worst_recon = 0.0_f64;
    let mut worst_phase = 0.0_f64;
    let mut worst_violation = 0.0_f64;

    let state_from = |a: &CVector| -> CVector {
        let mut x = CVector::zeros(dim);
        for (p, col) in basis.iter().enumerate() {
            x += col * a[p];
        }
        x
    };

    let mut previous: Option<(CVector, CMatrix)> = None;
    for trial in 0..trials {
        let a = linalg::random_unit_vector(&mut rng, m);
        let x = state_from(&a);
        let output = group_average(rep, &linalg::outer(&x, &x));

        // Block formula: type-i* block (p,q) is a_p·conj(a_q)/n · I.
        let mut expected = CMatrix::zeros(dim, dim);
        for p in 0..m {
            for q in 0..m {
                let coef = a[p] * a[q].conj() / linalg::cr(n as f64);
                for l in 0..n {
                    expected += linalg::outer(&slots[p][l], &slots[q][l]) * coef;
                }
            }
        }
        worst_block = worst_block.max(linalg::fro_norm(&(&output - &expected)));

        // Reconstruction: the Gram matrix read off the output has aa* as
        // its only spectral content.
        let mut gram = CMatrix::zeros(m, m);
        for p in 0..m {
            for q in 0..m {
                gram[(p, q)] = basis[p].dotc(&(&output * &basis[q])) * linalg::cr(n as f64);
            }
        }
        let (evals, evecs) = linalg::hermitian_eigen_sorted(&gram);
        let top = evals.last().copied().unwrap_or(0.0).max(0.0);
        let recovered = evecs.column(m - 1).into_owned().scale(top.sqrt());
        worst_recon = worst_recon.max(linalg::fro_norm(
            &(linalg::outer(&recovered, &recovered) - linalg::outer(&a, &a)),
        ));

        // Phase invariance: a global phase moves neither the state nor
        // the output.
        let theta = 2.0 * std::f64::consts::PI * (trial as f64 + 0.5) / trials.max(1) as f64;
        let y = &x * Complex64::from_polar(1.0, theta);
        let phased = group_average(rep, &linalg::outer(&y, &y));
        worst_phase = worst_phase
            .max(linalg::fro_norm(&(&phased - &output)))
            .max(linalg::fro_norm(
                &(linalg::outer(&y, &y) - linalg::outer(&x, &x)),
            ));

        // Collision trial against the previous draw.
        if let Some((px, poutput)) = &previous {
            let gap = linalg::fro_norm(&(&output - poutput));
            if gap <= COLLISION_MEAS_TOL {
                let dist = linalg::fro_norm(
                    &(linalg::outer(&x, &x) - linalg::outer(px, px)),
                );
                if dist > 1e-6 {
                    worst_violation = worst_violation.max(dist);
                }
            }
        }
        previous = Some((x, output));
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("block_formula".to_string(), worst_block);
    residuals.insert("reconstruction".to_string(), worst_recon);
    residuals.insert("phase_invariance".to_string(), worst_phase);
    residuals.insert("injectivity_violation".to_string(), worst_violation);
    let threshold = pass_tolerance(dim);
    let worst = residuals.values().fold(0.0_f64, |acc, r| acc.max(*r));
    if worst > threshold {
        return Err(TwirlError::WitnessFailed {
            kind: "multiplicity-retrievable-subspace".to_string(),
            residual: worst,
            threshold,
        });
    }
    Ok(PrCertificate {
        verdict: PrVerdict::Retrievable,
        kernel_dim: None,
        counterexample: None,
        evaluations: trials,
        restarts_used: 0,
        exact: false,
        subspace: Some(basis),
        range_map: None,
        residuals,
    })
}

/// Builds a retrievable subspace of dimension ⌊d/4⌋+1 by threading a
/// phase-retrievable frame {ξᵢ} for ℂᵏ across the types: T = Σᵢ wᵢξᵢ*
/// with wᵢ a unit vector in the first copy of type i, M = range(T). The
/// frame takes the canonical basis for its first k vectors and seeded
/// generic vectors after that, and is certified by the falsifier
/// (retrievable, or undecided with no collision found).
pub fn subspace_pr_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
    seed: u64,
) -> Result<PrCertificate> {
    if rep.dim() != dec.total_dim() {
        return Err(TwirlError::DimensionMismatch(format!(
            "representation dim {} vs decomposition dim {}",
            rep.dim(),
            dec.total_dim()
        )));
    }
    let d = dec.d;
    let k = d / 4 + 1;
    let dim = rep.dim();
    let anchors: Vec<CVector> = (0..d).map(|i| dec.block_vector(i, 0, 0)).collect();

    let mut last_error = None;
    for attempt in 0..5 {
        let mut rng = child_rng(seed, &format!("subspace-frame:{attempt}"));
        let mut xi: Vec<CVector> = (0..k.min(d)).map(|i| linalg::basis_vector(k, i)).collect();
        for _ in k.min(d)..d {
            xi.push(linalg::random_unit_vector(&mut rng, k));
        }

        let frame = Frame::new(xi.clone())?;
        let measurements = OperatorFrame::from_frame(&frame);
        let falsifier = pr_falsifier(
            &measurements,
            child_seed(seed, &format!("subspace-falsify:{attempt}")),
            20_000,
        )?;
        if falsifier.verdict == PrVerdict::CounterexampleFound {
            last_error = Some(TwirlError::CertificateFailed(format!(
                "frame draw {attempt} is not phase retrievable"
            )));
            continue;
        }

        let mut t = CMatrix::zeros(dim, k);
        for (w, x) in anchors.iter().zip(&xi) {
            t += linalg::outer(w, x);
        }
        let svals = linalg::singular_values(&t);
        let sigma_k = svals.get(k - 1).copied().unwrap_or(0.0);
        if sigma_k <= 1e-6 {
            last_error = Some(TwirlError::CertificateFailed(format!(
                "threaded map rank-deficient on draw {attempt} (σ_{k} = {sigma_k:.3e})"
            )));
            continue;
        }
        let subspace = linalg::column_space_basis(&t, 1e-8);

        // Spot-check channel injectivity on M with seeded pairs.
        let mut worst_violation = 0.0_f64;
        for _ in 0..50 {
            let xc = linalg::random_unit_vector(&mut rng, k);
            let yc = linalg::random_unit_vector(&mut rng, k);
            let x = &t * xc;
            let y = &t * yc;
            let gap = linalg::fro_norm(
                &(group_average(rep, &linalg::outer(&x, &x))
                    - group_average(rep, &linalg::outer(&y, &y))),
            );
            if gap <= COLLISION_MEAS_TOL {
                let dist =
                    linalg::fro_norm(&(linalg::outer(&x, &x) - linalg::outer(&y, &y)));
                if dist > 1e-6 {
                    worst_violation = worst_violation.max(dist);
                }
            }
        }
        if worst_violation > 0.0 {
            return Err(TwirlError::WitnessFailed {
                kind: "frame-threaded-subspace".to_string(),
                residual: worst_violation,
                threshold: 1e-6,
            });
        }

        let mut residuals = BTreeMap::new();
        residuals.insert("injectivity_violation".to_string(), 0.0);
        residuals.insert(
            "rank_defect".to_string(),
            (k - subspace.len().min(k)) as f64,
        );
        return Ok(PrCertificate {
            verdict: falsifier.verdict,
            kernel_dim: falsifier.kernel_dim,
            counterexample: None,
            evaluations: falsifier.evaluations,
            restarts_used: falsifier.restarts_used,
            exact: falsifier.exact,
            subspace: Some(subspace),
            range_map: Some(t),
            residuals,
        });
    }
    Err(last_error.unwrap_or_else(|| {
        TwirlError::CertificateFailed("subspace witness construction failed".to_string())
    }))
}

/// Two-sided report for the range/measurement equivalence on
/// multiplicity-free representations.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub channel_side: PrCertificate,
    pub measurement_side: PrCertificate,
    /// Mutual projection residual between the two collision kernels,
    /// which coincide in exact arithmetic.
    pub kernel_mismatch: f64,
    /// Both sides found a counterexample, or neither did within budget.
    pub agree: bool,
}

/// Runs both sides of the equivalence for M = range(T): channel-side
/// pure-state injectivity of Φ_π on M, and measurement-side phase
/// retrieval by {Tᵢ*Tᵢ} with Tᵢ = PᵢT. The two collision kernels are
/// compared directly, and both are searched with the same falsifier
/// machinery.
pub fn range_measurement_equivalence(
    rep: &Representation,
    dec: &IsotypicDecomposition,
    t: &CMatrix,
    seed: u64,
    budget: usize,
) -> Result<EquivalenceReport> {
    if dec.multiplicities.iter().any(|m| *m != 1) {
        return Err(TwirlError::InvalidParameter(
            "equivalence check requires a multiplicity-free representation".to_string(),
        ));
    }
    if rep.dim() != dec.total_dim() || t.nrows() != rep.dim() {
        return Err(TwirlError::DimensionMismatch(format!(
            "map is {}x{}, space dim is {}",
            t.nrows(),
            t.ncols(),
            rep.dim()
        )));
    }
    let k = t.ncols();
    if k > MAX_FALSIFIER_DIM {
        return Err(TwirlError::SizeLimit(format!(
            "coordinate dimension {k} exceeds cap {MAX_FALSIFIER_DIM}"
        )));
    }
    let svals = linalg::singular_values(t);
    let smax = svals.first().copied().unwrap_or(0.0);
    let smin = svals.get(k - 1).copied().unwrap_or(0.0);
    if smax <= 0.0 || smin <= 1e-8 * smax {
        return Err(TwirlError::InvalidParameter(
            "map is not of full column rank".to_string(),
        ));
    }

    // Measurement side: pulled-back operators Tᵢ*Tᵢ.
    let pulled: Vec<CMatrix> = dec
        .projections
        .iter()
        .map(|p| {
            let ti = p * t;
            ti.adjoint() * ti
        })
        .collect();
    let measurements = OperatorFrame::new(pulled)?;
    let measurement_side = pr_falsifier(
        &measurements,
        child_seed(seed, "equivalence-measurement"),
        budget,
    )?;

    // Channel side: kernel of Q ↦ Φ_π(T Q T*) over Hermitian Q.
    let basis = hermitian_basis(k);
    let dim = rep.dim();
    let mut images = DMatrix::zeros(2 * dim * dim, basis.len());
    for (col, b) in basis.iter().enumerate() {
        let v = group_average(rep, &(t * b * t.adjoint()));
        for (row, entry) in v.iter().enumerate() {
            images[(row, col)] = entry.re;
            images[(dim * dim + row, col)] = entry.im;
        }
    }
    let channel_coeffs = real_null_space(&images, 1e-8);
    let channel_kernel: Vec<CMatrix> = channel_coeffs
        .iter()
        .map(|c| combine_hermitian(&basis, c))
        .collect();

    let mut verify = |xc: &CVector, yc: &CVector| {
        let x = t * xc;
        let y = t * yc;
        let gap = linalg::fro_norm(
            &(group_average(rep, &linalg::outer(&x, &x))
                - group_average(rep, &linalg::outer(&y, &y))),
        );
        let dist = linalg::fro_norm(&(linalg::outer(&x, &x) - linalg::outer(&y, &y)));
        gap <= COLLISION_MEAS_TOL && dist > COLLISION_STATE_TOL
    };
    let channel_outcome = falsify_kernel(
        &channel_kernel,
        k,
        child_seed(seed, "equivalence-channel"),
        budget,
        &mut verify,
    );
    let mut channel_side =
        PrCertificate::search(channel_outcome.verdict, channel_kernel.len(), &channel_outcome);
    if let Some((xc, yc)) = &channel_outcome.pair {
        // Report the collision as vectors of H, inside M.
        channel_side.counterexample = Some((t * xc, t * yc));
    }

    // Kernel agreement: mutual projection in Hermitian coordinates.
    let measurement_kernel = hermitian_kernel(&measurements);
    let coords = |h: &CMatrix| -> DVector<f64> {
        DVector::from_fn(basis.len(), |t_idx, _| {
            linalg::trace(&(&basis[t_idx] * h)).re
        })
    };
    let ca: Vec<DVector<f64>> = channel_kernel.iter().map(&coords).collect();
    let cb: Vec<DVector<f64>> = measurement_kernel.iter().map(&coords).collect();
    let mut mismatch = 0.0_f64;
    for (from, onto) in [(&ca, &cb), (&cb, &ca)] {
        for v in from.iter() {
            let mut residual = v.clone();
            for b in onto.iter() {
                let coef = b.dot(&residual);
                residual -= b * coef;
            }
            mismatch = mismatch.max(residual.norm());
        }
    }

    let found_a = channel_side.verdict == PrVerdict::CounterexampleFound;
    let found_b = measurement_side.verdict == PrVerdict::CounterexampleFound;
    Ok(EquivalenceReport {
        agree: found_a == found_b,
        kernel_mismatch: mismatch,
        channel_side,
        measurement_side,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::decompose::isotypic_decomposition;
    use crate::fixtures;
    use crate::group::FiniteGroup;
    use crate::linalg::{c, cr};

    fn regular(group: FiniteGroup) -> Representation {
        Representation::regular(Arc::new(group)).unwrap()
    }

    fn random_frame(n: usize, count: usize, salt: &str) -> Frame {
        let mut rng = child_rng(7, salt);
        Frame::new(
            (0..count)
                .map(|_| linalg::random_unit_vector(&mut rng, n))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn orthonormal_basis_is_parseval() {
        let frame = Frame::new((0..3).map(|i| linalg::basis_vector(3, i)).collect()).unwrap();
        let report = frame_analysis(&frame).unwrap();
        assert!((report.lower_bound - 1.0).abs() < 1e-12);
        assert!((report.upper_bound - 1.0).abs() < 1e-12);
        assert!(report.is_frame);
        assert!(report.is_parseval);
    }

    #[test]
    fn doubled_basis_is_tight_with_bound_two() {
        let mut vectors: Vec<CVector> = (0..3).map(|i| linalg::basis_vector(3, i)).collect();
        vectors.extend((0..3).map(|i| linalg::basis_vector(3, i)));
        let report = frame_analysis(&Frame::new(vectors).unwrap()).unwrap();
        assert!((report.lower_bound - 2.0).abs() < 1e-12);
        assert!((report.upper_bound - 2.0).abs() < 1e-12);
        assert!(!report.is_parseval);
        let scaled = report.parseval_vectors.unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((scaled[0][0].re - s).abs() < 1e-12);
        // The rescaled family really is Parseval.
        let again = frame_analysis(&Frame::new(scaled).unwrap()).unwrap();
        assert!(again.is_parseval);
    }

    #[test]
    fn three_vectors_cannot_frame_c4() {
        let report = frame_analysis(&random_frame(4, 3, "short-frame")).unwrap();
        assert!(!report.is_frame);
        assert!(report.parseval_vectors.is_none());
    }

    #[test]
    fn kernel_of_pauli_complete_set_is_zero() {
        let e11 = linalg::matrix_unit(2, 0, 0);
        let e22 = linalg::matrix_unit(2, 1, 1);
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = cr(1.0);
        x[(1, 0)] = cr(1.0);
        let mut y = CMatrix::zeros(2, 2);
        y[(0, 1)] = c(0.0, -1.0);
        y[(1, 0)] = c(0.0, 1.0);
        let frame = OperatorFrame::new(vec![e11, e22, x, y]).unwrap();
        assert!(frame.is_povm(1e-9) == false);
        assert_eq!(hermitian_kernel(&frame).len(), 0);
    }

    #[test]
    fn kernel_of_identity_is_trace_zero_space() {
        let frame = OperatorFrame::new(vec![linalg::identity(2)]).unwrap();
        let kernel = hermitian_kernel(&frame);
        assert_eq!(kernel.len(), 3);
        for h in &kernel {
            assert!(linalg::trace(h).norm() < 1e-12);
            assert!(linalg::fro_norm(&(h - h.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn kernel_of_three_generic_rank_ones_in_c2() {
        let frame = OperatorFrame::from_frame(&random_frame(2, 3, "generic-three"));
        assert_eq!(hermitian_kernel(&frame).len(), 1);
    }

    #[test]
    fn falsifier_four_generic_vectors_c2_retrievable() {
        let frame = OperatorFrame::from_frame(&random_frame(2, 4, "generic-four"));
        let cert = pr_falsifier(&frame, 0, 100_000).unwrap();
        assert_eq!(cert.verdict, PrVerdict::Retrievable);
        assert_eq!(cert.kernel_dim, Some(0));
        assert!(cert.exact);
    }

    #[test]
    fn falsifier_small_c2_families_always_collide() {
        for count in 1..=3 {
            for seed in 0..10 {
                let mut rng = child_rng(seed, &format!("small-family:{count}"));
                let frame = Frame::new(
                    (0..count)
                        .map(|_| linalg::random_unit_vector(&mut rng, 2))
                        .collect(),
                )
                .unwrap();
                let cert =
                    pr_falsifier(&OperatorFrame::from_frame(&frame), seed, 10_000).unwrap();
                assert_eq!(
                    cert.verdict,
                    PrVerdict::CounterexampleFound,
                    "{count} vectors, seed {seed}"
                );
                let (x, y) = cert.counterexample.unwrap();
                // Independent soundness re-check.
                let ops = OperatorFrame::from_frame(&frame);
                let gap = ops
                    .measure(&x)
                    .iter()
                    .zip(ops.measure(&y))
                    .fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
                assert!(gap <= COLLISION_MEAS_TOL);
                let dist =
                    linalg::fro_norm(&(linalg::outer(&x, &x) - linalg::outer(&y, &y)));
                assert!(dist > COLLISION_STATE_TOL);
            }
        }
    }

    #[test]
    fn falsifier_identity_measurement_collides() {
        let frame = OperatorFrame::new(vec![linalg::identity(2)]).unwrap();
        let cert = pr_falsifier(&frame, 3, 10_000).unwrap();
        assert_eq!(cert.verdict, PrVerdict::CounterexampleFound);
        assert_eq!(cert.kernel_dim, Some(3));
    }

    #[test]
    fn falsifier_search_finds_collision_in_c3() {
        // Three rank-one measurements leave a 6-dimensional kernel in the
        // 9-dimensional Hermitian space: the randomized tier must dig out
        // a low-inertia element.
        let frame = OperatorFrame::from_frame(&random_frame(3, 3, "c3-three"));
        let cert = pr_falsifier(&frame, 11, 100_000).unwrap();
        assert_eq!(cert.verdict, PrVerdict::CounterexampleFound);
        assert!(!cert.exact);
        let (x, y) = cert.counterexample.unwrap();
        let gap = frame
            .measure(&x)
            .iter()
            .zip(frame.measure(&y))
            .fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        assert!(gap <= COLLISION_MEAS_TOL);
    }

    #[test]
    fn falsifier_honest_undecided() {
        // Measurements whose kernel is span{I, diag(1,1,−1,−1)}: every
        // kernel element has doubled eigenvalues, so no collision exists,
        // but no exact tier applies either.
        let mut ops = Vec::new();
        let s = 1.0 / 2.0_f64.sqrt();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let mut sym = CMatrix::zeros(4, 4);
                sym[(i, j)] = cr(s);
                sym[(j, i)] = cr(s);
                ops.push(sym);
                let mut asym = CMatrix::zeros(4, 4);
                asym[(i, j)] = c(0.0, s);
                asym[(j, i)] = c(0.0, -s);
                ops.push(asym);
            }
        }
        let mut d1 = CMatrix::zeros(4, 4);
        d1[(0, 0)] = cr(s);
        d1[(1, 1)] = cr(-s);
        ops.push(d1);
        let mut d2 = CMatrix::zeros(4, 4);
        d2[(2, 2)] = cr(s);
        d2[(3, 3)] = cr(-s);
        ops.push(d2);

        let frame = OperatorFrame::new(ops).unwrap();
        let cert = pr_falsifier(&frame, 5, 3_000).unwrap();
        assert_eq!(cert.verdict, PrVerdict::Undecided);
        assert_eq!(cert.kernel_dim, Some(2));
        assert!(cert.counterexample.is_none());
    }

    #[test]
    fn falsifier_is_deterministic() {
        let frame = OperatorFrame::from_frame(&random_frame(3, 3, "c3-determinism"));
        let a = pr_falsifier(&frame, 29, 50_000).unwrap();
        let b = pr_falsifier(&frame, 29, 50_000).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.evaluations, b.evaluations);
        let (ax, ay) = a.counterexample.unwrap();
        let (bx, by) = b.counterexample.unwrap();
        assert_eq!(ax, bx);
        assert_eq!(ay, by);
    }

    #[test]
    fn phase_invariance_of_measurements() {
        let frame = OperatorFrame::from_frame(&random_frame(3, 5, "phase-check"));
        let mut rng = child_rng(2, "phase-x");
        let x = linalg::random_unit_vector(&mut rng, 3);
        let y = &x * Complex64::from_polar(1.0, 1.234);
        let gap = frame
            .measure(&x)
            .iter()
            .zip(frame.measure(&y))
            .fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        assert!(gap < 1e-12);
    }

    #[test]
    fn lower_bound_examples() {
        let s3 = regular(FiniteGroup::symmetric(3).unwrap());
        let dec = isotypic_decomposition(&s3, 0).unwrap();
        assert_eq!(pr_lower_bound(&dec), 2);

        let z5 = regular(FiniteGroup::cyclic(5).unwrap());
        let dec5 = isotypic_decomposition(&z5, 0).unwrap();
        assert_eq!(dec5.d, 5);
        assert_eq!(pr_lower_bound(&dec5), 2);

        let irr = fixtures::s3_standard_rep();
        let dec1 = isotypic_decomposition(&irr, 0).unwrap();
        assert_eq!(pr_lower_bound(&dec1), 1);
    }

    #[test]
    fn frame_length_bounds() {
        assert_eq!(minimal_frame_length_bound(1), 1);
        assert_eq!(minimal_frame_length_bound(2), 4);
        assert_eq!(minimal_frame_length_bound(3), 8);
        assert_eq!(pr_bracket(4), 2);
        assert_eq!(pr_bracket(3), 1);
        assert_eq!(pr_bracket(5), 2);
    }

    #[test]
    fn multiplicity_witness_on_three_copies() {
        let sigma = fixtures::s3_standard_rep();
        let rep = Representation::direct_sum(&[(&sigma, 3)]).unwrap();
        let dec = isotypic_decomposition(&rep, 6).unwrap();
        let cert = multiplicity_pr_witness(&rep, &dec, 200, 8).unwrap();
        assert_eq!(cert.verdict, PrVerdict::Retrievable);
        assert_eq!(cert.subspace.as_ref().unwrap().len(), 3);
        assert!(cert.residuals["block_formula"] < 1e-9);
        assert!(cert.residuals["reconstruction"] < 1e-9);
        assert!(cert.residuals["phase_invariance"] < 1e-10);
        assert_eq!(cert.residuals["injectivity_violation"], 0.0);
    }

    #[test]
    fn multiplicity_witness_single_copy_is_vacuous() {
        let rep = fixtures::s3_standard_rep();
        let dec = isotypic_decomposition(&rep, 1).unwrap();
        let cert = multiplicity_pr_witness(&rep, &dec, 50, 2).unwrap();
        assert_eq!(cert.subspace.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn subspace_witness_four_characters() {
        let rep = regular(FiniteGroup::cyclic(4).unwrap());
        let dec = isotypic_decomposition(&rep, 3).unwrap();
        assert_eq!(dec.d, 4);
        let cert = subspace_pr_witness(&rep, &dec, 14).unwrap();
        assert_eq!(cert.verdict, PrVerdict::Retrievable);
        assert_eq!(cert.subspace.as_ref().unwrap().len(), 2);
        assert_eq!(cert.kernel_dim, Some(0));
    }

    #[test]
    fn subspace_witness_beats_beta_on_five_characters() {
        let rep = regular(FiniteGroup::cyclic(5).unwrap());
        let dec = isotypic_decomposition(&rep, 4).unwrap();
        let cert = subspace_pr_witness(&rep, &dec, 9).unwrap();
        assert_eq!(cert.subspace.as_ref().unwrap().len(), 2);
        assert!(cert.subspace.as_ref().unwrap().len() > beta_closed(&dec));
    }

    #[test]
    fn subspace_witness_single_type() {
        let rep = fixtures::s3_standard_rep();
        let dec = isotypic_decomposition(&rep, 0).unwrap();
        let cert = subspace_pr_witness(&rep, &dec, 0).unwrap();
        assert_eq!(cert.subspace.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn equivalence_on_full_two_character_space_collides() {
        let rep = regular(FiniteGroup::cyclic(2).unwrap());
        let dec = isotypic_decomposition(&rep, 0).unwrap();
        let v1 = dec.block_vector(0, 0, 0);
        let v2 = dec.block_vector(1, 0, 0);
        let mut t = CMatrix::zeros(2, 2);
        t.set_column(0, &v1);
        t.set_column(1, &v2);
        let report = range_measurement_equivalence(&rep, &dec, &t, 17, 10_000).unwrap();
        assert!(report.agree);
        assert_eq!(report.channel_side.verdict, PrVerdict::CounterexampleFound);
        assert_eq!(
            report.measurement_side.verdict,
            PrVerdict::CounterexampleFound
        );
        assert!(report.kernel_mismatch < 1e-8);

        // The colliding pair in closed form: equal unit weights on both
        // characters, with the second sign flipped.
        let x = &v1 + &v2;
        let y = &v1 - &v2;
        let gap = linalg::fro_norm(
            &(group_average(&rep, &linalg::outer(&x, &x))
                - group_average(&rep, &linalg::outer(&y, &y))),
        );
        assert!(gap < 1e-12);
        let dist = linalg::fro_norm(&(linalg::outer(&x, &x) - linalg::outer(&y, &y)));
        assert!(dist > 0.5);
    }

    #[test]
    fn equivalence_trivial_one_dimensional_coordinates() {
        let rep = regular(FiniteGroup::cyclic(2).unwrap());
        let dec = isotypic_decomposition(&rep, 0).unwrap();
        let x = (dec.block_vector(0, 0, 0) + dec.block_vector(1, 0, 0)).unscale(2.0_f64.sqrt());
        let mut t = CMatrix::zeros(2, 1);
        t.set_column(0, &x);
        let report = range_measurement_equivalence(&rep, &dec, &t, 23, 5_000).unwrap();
        assert!(report.agree);
        assert_eq!(report.channel_side.verdict, PrVerdict::Retrievable);
        assert_eq!(report.measurement_side.verdict, PrVerdict::Retrievable);
    }

    #[test]
    fn equivalence_on_witness_subspace_of_five_characters() {
        let rep = regular(FiniteGroup::cyclic(5).unwrap());
        let dec = isotypic_decomposition(&rep, 4).unwrap();
        let cert = subspace_pr_witness(&rep, &dec, 9).unwrap();
        let t = cert.range_map.unwrap();
        let report = range_measurement_equivalence(&rep, &dec, &t, 31, 20_000).unwrap();
        assert!(report.agree);
        assert_ne!(report.channel_side.verdict, PrVerdict::CounterexampleFound);
        assert_ne!(
            report.measurement_side.verdict,
            PrVerdict::CounterexampleFound
        );
        assert!(report.kernel_mismatch < 1e-8);
    }

    #[test]
    fn equivalence_rejects_multiplicities() {
        let sigma = fixtures::s3_standard_rep();
        let rep = Representation::direct_sum(&[(&sigma, 2)]).unwrap();
        let dec = isotypic_decomposition(&rep, 2).unwrap();
        let t = CMatrix::identity(4, 1);
        let err = range_measurement_equivalence(&rep, &dec, &t, 0, 100).unwrap_err();
        assert!(matches!(err, TwirlError::InvalidParameter(_)));
    }
}

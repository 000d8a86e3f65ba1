//! Channel invariants of the averaging channel, each paired with an
//! explicit witness that is re-verified against the definition.
//!
//! Four integers control the zero-error behaviour of
//! Φ_π(T) = (1/|G|) Σ_g π(g) T π(g)*, and all four are read directly off
//! the isotypic structure π ≅ ⊕ᵢ mᵢ πᵢ with nᵢ = dim πᵢ:
//!
//! * `alpha` = Σmᵢ: the largest number of orthonormal vectors whose
//!   outputs Φ_π(xx*) are pairwise trace-orthogonal, i.e. perfectly
//!   distinguishable after one use of the channel.
//! * `beta` = max mᵢ: the largest dimension of a subspace satisfying the
//!   Knill–Laflamme error-correction condition for the Kraus family
//!   {π(g)/√|G|}.
//! * `gamma` = Σnᵢ: the largest family {xₐ} with Φ_π(xₐ x_b*) = 0 for
//!   every a ≠ b.
//! * `tau` = max nᵢ: the largest dimension of a subspace M on which
//!   Φ_π(xy*) = 0 for every orthogonal pair x, y ∈ M.
//!
//! The zero-error capacity collapses to its one-shot value log₂(alpha)
//! because alpha is multiplicative under tensor powers;
//! [`capacity_tensor_check`] confirms the multiplicativity at a chosen
//! power by decomposing the tensor product from scratch.
//!
//! The closed forms are cheap; the work here is honesty. Every number
//! ships with a constructed witness (vectors or a subspace projection)
//! and a [`WitnessCertificate`] whose residuals re-verify the defining
//! property, so a defective decomposition surfaces as a loud certificate
//! failure instead of a silently wrong invariant.

use std::collections::BTreeMap;

use crate::channel::QuantumChannel;
use crate::decompose::{
    self, group_average, isotypic_decomposition, multiplicity_crosscheck, IsotypicDecomposition,
};
use crate::group;
use crate::linalg::{self, CMatrix, CVector};
use crate::rep::Representation;
use crate::seeding::child_rng;
use crate::{Result, TwirlError};

/// Residual expected from witness construction, per unit of dimension.
pub const CONSTRUCTION_TOL: f64 = 1e-9;

/// Certificate pass threshold, per unit of dimension. Two orders of
/// magnitude above the construction budget so only genuine defects trip it.
pub const PASS_TOL: f64 = 1e-7;

/// Pass threshold for a witness on a dim-`dim` space.
pub fn pass_tolerance(dim: usize) -> f64 {
    PASS_TOL * dim as f64
}

/// What a witness claims to exhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Orthonormal vectors with pairwise trace-orthogonal channel outputs.
    IndependentSet,
    /// Subspace satisfying the Knill–Laflamme condition.
    CodeSubspace,
    /// Vectors annihilated pairwise by the channel.
    OrthogonalFamily,
    /// Subspace whose orthogonal pairs are annihilated by the channel.
    TauSubspace,
}

impl WitnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessKind::IndependentSet => "independent-set",
            WitnessKind::CodeSubspace => "code-subspace",
            WitnessKind::OrthogonalFamily => "orthogonal-family",
            WitnessKind::TauSubspace => "tau-subspace",
        }
    }
}

/// A verified witness: the constructed vectors (and subspace projection
/// where relevant), named verification residuals, and the threshold they
/// were held to.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub kind: WitnessKind,
    /// Witness vectors; for subspace witnesses, an orthonormal basis.
    pub vectors: Vec<CVector>,
    /// Projection onto the witness subspace, when the claim is about one.
    pub projection: Option<CMatrix>,
    /// Hermitian matrix [a_ij] with P Eᵢ*Eⱼ P = a_ij P, for code checks.
    pub kl_matrix: Option<CMatrix>,
    /// Named verification residuals; pass requires all ≤ `threshold`.
    pub residuals: BTreeMap<String, f64>,
    pub threshold: f64,
    pub pass: bool,
}

impl WitnessCertificate {
    pub fn worst_residual(&self) -> f64 {
        self.residuals.values().fold(0.0_f64, |acc, r| acc.max(*r))
    }
}

/// Invariants of Φ_π together with the witnesses backing them.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub tau: usize,
    pub capacity_bits: f64,
    pub alpha_witness: WitnessCertificate,
    pub code_witness: WitnessCertificate,
    pub gamma_witness: WitnessCertificate,
    pub tau_witness: WitnessCertificate,
    pub decomposition: IsotypicDecomposition,
}

/// Logarithm base for capacity figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    /// Bits (default).
    Two,
    /// Nats.
    Natural,
}

/// Largest number of inputs perfectly distinguishable after the channel:
/// Σmᵢ.
pub fn alpha_closed(dec: &IsotypicDecomposition) -> usize {
    dec.multiplicities.iter().sum()
}

/// Largest correctable-code dimension: max mᵢ.
pub fn beta_closed(dec: &IsotypicDecomposition) -> usize {
    dec.multiplicities.iter().copied().max().unwrap_or(0)
}

/// Largest family annihilated pairwise by the channel: Σnᵢ.
pub fn gamma_closed(dec: &IsotypicDecomposition) -> usize {
    dec.dimensions.iter().sum()
}

/// Largest subspace whose orthogonal pairs the channel annihilates:
/// max nᵢ.
pub fn tau_closed(dec: &IsotypicDecomposition) -> usize {
    dec.dimensions.iter().copied().max().unwrap_or(0)
}

/// Zero-error capacity log(Σmᵢ) in the requested base.
pub fn zero_error_capacity(dec: &IsotypicDecomposition, base: LogBase) -> f64 {
    let alpha = alpha_closed(dec) as f64;
    match base {
        LogBase::Two => alpha.log2(),
        LogBase::Natural => alpha.ln(),
    }
}

fn ensure_matching(rep: &Representation, dec: &IsotypicDecomposition) -> Result<()> {
    if rep.dim() != dec.total_dim() {
        return Err(TwirlError::DimensionMismatch(format!(
            "representation dim {} vs decomposition dim {}",
            rep.dim(),
            dec.total_dim()
        )));
    }
    Ok(())
}

fn orthonormality_defect(vectors: &[CVector]) -> f64 {
    let mut worst = 0.0_f64;
    for (a, xa) in vectors.iter().enumerate() {
        for (b, xb) in vectors.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((xa.dotc(xb) - linalg::cr(target)).norm());
        }
    }
    worst
}

fn seal_witness(
    kind: WitnessKind,
    vectors: Vec<CVector>,
    projection: Option<CMatrix>,
    kl_matrix: Option<CMatrix>,
    residuals: BTreeMap<String, f64>,
    dim: usize,
) -> Result<WitnessCertificate> {
    let threshold = pass_tolerance(dim);
    let cert = WitnessCertificate {
        kind,
        vectors,
        projection,
        kl_matrix,
        residuals,
        threshold,
        pass: false,
    };
    let worst = cert.worst_residual();
    if worst > threshold {
        return Err(TwirlError::WitnessFailed {
            kind: kind.as_str().to_string(),
            residual: worst,
            threshold,
        });
    }
    Ok(WitnessCertificate { pass: true, ..cert })
}

/// Constructs Σmᵢ orthonormal vectors (one per multiplicity slot, each
/// carrying the first basis vector of its type) and verifies both
/// equivalent characterizations of independence: ⟨x_b, π(g) x_a⟩ = 0 for
/// all g and a ≠ b, and pairwise trace-orthogonality of the outputs
/// Φ_π(x x*).
pub fn alpha_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
) -> Result<WitnessCertificate> {
    ensure_matching(rep, dec)?;
    let mut vectors = Vec::new();
    for i in 0..dec.d {
        for j in 0..dec.multiplicities[i] {
            vectors.push(dec.block_vector(i, j, 0));
        }
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("orthonormality".to_string(), orthonormality_defect(&vectors));

    let mut worst_group = 0.0_f64;
    for g in 0..rep.group().order() {
        let pg = rep.matrix(g);
        for (a, xa) in vectors.iter().enumerate() {
            let pg_xa = pg * xa;
            for (b, xb) in vectors.iter().enumerate() {
                if a == b {
                    continue;
                }
                worst_group = worst_group.max(xb.dotc(&pg_xa).norm());
            }
        }
    }
    residuals.insert("group_orthogonality".to_string(), worst_group);

    let outputs: Vec<CMatrix> = vectors
        .iter()
        .map(|x| group_average(rep, &linalg::outer(x, x)))
        .collect();
    let mut worst_out = 0.0_f64;
    for a in 0..outputs.len() {
        for b in 0..a {
            worst_out = worst_out.max(linalg::trace_inner(&outputs[a], &outputs[b]).norm());
        }
    }
    residuals.insert("output_orthogonality".to_string(), worst_out);

    seal_witness(
        WitnessKind::IndependentSet,
        vectors,
        None,
        None,
        residuals,
        rep.dim(),
    )
}

/// Builds the code subspace spanned by the multiplicity slots of a type
/// with maximal mᵢ and verifies the Knill–Laflamme form for the Kraus
/// family {π(g)/√|G|}: P π(g) P = c_g P with c_g = tr(P π(g) P)/tr P.
pub fn code_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
) -> Result<WitnessCertificate> {
    ensure_matching(rep, dec)?;
    let i_star = dec
        .multiplicities
        .iter()
        .enumerate()
        .max_by(|(ia, ma), (ib, mb)| ma.cmp(mb).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .ok_or_else(|| TwirlError::InvalidParameter("empty decomposition".to_string()))?;
    let m = dec.multiplicities[i_star];
    let vectors: Vec<CVector> = (0..m).map(|j| dec.block_vector(i_star, j, 0)).collect();
    let p = vectors
        .iter()
        .fold(CMatrix::zeros(rep.dim(), rep.dim()), |acc, v| {
            acc + linalg::outer(v, v)
        });

    let mut residuals = BTreeMap::new();
    residuals.insert("orthonormality".to_string(), orthonormality_defect(&vectors));
    residuals.insert(
        "projection_defect".to_string(),
        linalg::fro_norm(&(&p * &p - &p)) + linalg::fro_norm(&(&p - &p.adjoint())),
    );

    let tr_p = linalg::trace(&p).re;
    let mut worst_kl = 0.0_f64;
    for g in 0..rep.group().order() {
        let pgp = &p * rep.matrix(g) * &p;
        let c_g = linalg::trace(&pgp) / linalg::cr(tr_p);
        worst_kl = worst_kl.max(linalg::fro_norm(&(&pgp - &p * c_g)));
    }
    residuals.insert("knill_laflamme".to_string(), worst_kl);

    seal_witness(
        WitnessKind::CodeSubspace,
        vectors,
        Some(p),
        None,
        residuals,
        rep.dim(),
    )
}

/// Checks whether the range of `p` is a correctable code for `phi`.
///
/// Verifies P Eᵢ*Eⱼ P = a_ij P across all Kraus pairs, records the matrix
/// A = [a_ij] and its hermiticity defect, and cross-checks the equivalent
/// output-orthogonality form: for an orthonormal basis {x_k} of range P
/// (taken from the spectral decomposition of P), the outputs Φ(x_k x_k*)
/// must be pairwise trace-orthogonal. Unlike the witness constructors this
/// reports failure in the certificate instead of erroring, so it can probe
/// subspaces that are not codes.
pub fn verify_code(
    phi: &QuantumChannel,
    p: &CMatrix,
    tol: Option<f64>,
) -> Result<WitnessCertificate> {
    let n = phi.in_dim();
    if p.nrows() != n || p.ncols() != n {
        return Err(TwirlError::DimensionMismatch(format!(
            "projection is {}x{}, channel input dim is {}",
            p.nrows(),
            p.ncols(),
            n
        )));
    }
    let threshold = tol.unwrap_or_else(|| pass_tolerance(n));
    let proj_defect = linalg::fro_norm(&(p * p - p)) + linalg::fro_norm(&(p - p.adjoint()));
    if proj_defect > threshold.max(PASS_TOL * n as f64) {
        return Err(TwirlError::InvalidParameter(format!(
            "not an orthogonal projection: defect {proj_defect:.3e}"
        )));
    }
    let tr_p = linalg::trace(p).re;
    if tr_p < 0.5 {
        return Err(TwirlError::InvalidParameter(
            "projection has rank zero".to_string(),
        ));
    }

    let kraus: Vec<CMatrix> = match phi.kraus() {
        Some(k) => k.to_vec(),
        None => phi.kraus_from_choi(),
    };
    let r = kraus.len();
    let mut a = CMatrix::zeros(r, r);
    let mut worst_kl = 0.0_f64;
    for i in 0..r {
        for j in 0..r {
            let m = p * kraus[i].adjoint() * &kraus[j] * p;
            let a_ij = linalg::trace(&m) / linalg::cr(tr_p);
            a[(i, j)] = a_ij;
            worst_kl = worst_kl.max(linalg::fro_norm(&(&m - p * a_ij)));
        }
    }

    let (evals, evecs) = linalg::hermitian_eigen_sorted(p);
    let basis: Vec<CVector> = evals
        .iter()
        .enumerate()
        .filter(|(_, ev)| **ev > 0.5)
        .map(|(k, _)| evecs.column(k).into_owned())
        .collect();
    let mut outputs = Vec::with_capacity(basis.len());
    for x in &basis {
        outputs.push(phi.apply(&linalg::outer(x, x))?);
    }
    let mut worst_out = 0.0_f64;
    for i in 0..outputs.len() {
        for j in 0..i {
            worst_out = worst_out.max(linalg::trace_inner(&outputs[i], &outputs[j]).norm());
        }
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("projection_defect".to_string(), proj_defect);
    residuals.insert("knill_laflamme".to_string(), worst_kl);
    residuals.insert(
        "hermiticity".to_string(),
        linalg::fro_norm(&(&a - &a.adjoint())),
    );
    residuals.insert("output_orthogonality".to_string(), worst_out);

    let pass = residuals.values().all(|r| *r <= threshold);
    Ok(WitnessCertificate {
        kind: WitnessKind::CodeSubspace,
        vectors: basis,
        projection: Some(p.clone()),
        kl_matrix: Some(a),
        residuals,
        threshold,
        pass,
    })
}

/// Constructs Σnᵢ vectors annihilated pairwise by Φ_π: within type i the
/// j-th basis vector of Hᵢ rides in multiplicity slot j mod mᵢ. Verifies
/// both ‖Φ_π(xₐ x_b*)‖ = 0 and the equivalent commutant-orthogonality
/// ⟨xₐ, B x_b⟩ = 0 over a computed commutant basis.
pub fn gamma_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
) -> Result<WitnessCertificate> {
    ensure_matching(rep, dec)?;
    let mut vectors = Vec::new();
    for i in 0..dec.d {
        let m = dec.multiplicities[i];
        for j in 0..dec.dimensions[i] {
            vectors.push(dec.block_vector(i, j % m, j));
        }
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("orthonormality".to_string(), orthonormality_defect(&vectors));

    let mut worst_zero = 0.0_f64;
    for (a, xa) in vectors.iter().enumerate() {
        for (b, xb) in vectors.iter().enumerate() {
            if a == b {
                continue;
            }
            let out = group_average(rep, &linalg::outer(xa, xb));
            worst_zero = worst_zero.max(linalg::fro_norm(&out));
        }
    }
    residuals.insert("zero_output".to_string(), worst_zero);

    let commutant = decompose::commutant_basis(rep);
    let mut worst_comm = 0.0_f64;
    for bk in &commutant.basis {
        for (a, xa) in vectors.iter().enumerate() {
            for (b, xb) in vectors.iter().enumerate() {
                if a == b {
                    continue;
                }
                worst_comm = worst_comm.max(xa.dotc(&(bk * xb)).norm());
            }
        }
    }
    residuals.insert("commutant_orthogonality".to_string(), worst_comm);

    seal_witness(
        WitnessKind::OrthogonalFamily,
        vectors,
        None,
        None,
        residuals,
        rep.dim(),
    )
}

/// Builds the subspace M carried by the first multiplicity slot of a type
/// with maximal nᵢ and verifies that Φ_π annihilates every trace-zero
/// operator on M; those span exactly {xy* : x ⟂ y, x,y ∈ M}, so this
/// certifies Φ_π(xy*) = 0 for all orthogonal pairs in M.
pub fn tau_witness(
    rep: &Representation,
    dec: &IsotypicDecomposition,
) -> Result<WitnessCertificate> {
    ensure_matching(rep, dec)?;
    let i_star = dec
        .dimensions
        .iter()
        .enumerate()
        .max_by(|(ia, na), (ib, nb)| na.cmp(nb).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .ok_or_else(|| TwirlError::InvalidParameter("empty decomposition".to_string()))?;
    let l = dec.dimensions[i_star];
    let vectors: Vec<CVector> = (0..l).map(|k| dec.block_vector(i_star, 0, k)).collect();
    let p = vectors
        .iter()
        .fold(CMatrix::zeros(rep.dim(), rep.dim()), |acc, v| {
            acc + linalg::outer(v, v)
        });

    let mut residuals = BTreeMap::new();
    residuals.insert("orthonormality".to_string(), orthonormality_defect(&vectors));

    let mut ops: Vec<CMatrix> = Vec::new();
    for a in 0..l {
        for b in 0..l {
            if a != b {
                ops.push(linalg::outer(&vectors[a], &vectors[b]));
            }
        }
    }
    for a in 0..l.saturating_sub(1) {
        ops.push(
            linalg::outer(&vectors[a], &vectors[a]) - linalg::outer(&vectors[a + 1], &vectors[a + 1]),
        );
    }
    let mut worst_kill = 0.0_f64;
    for op in &ops {
        worst_kill = worst_kill.max(linalg::fro_norm(&group_average(rep, op)));
    }
    residuals.insert("trace_zero_kill".to_string(), worst_kill);

    seal_witness(
        WitnessKind::TauSubspace,
        vectors,
        Some(p),
        None,
        residuals,
        rep.dim(),
    )
}

/// Randomized non-improvement probe for an independent-set witness: draws
/// `tries` unit vectors from the orthocomplement of the witness span and
/// counts how many would verify as an extension of the set. A correct
/// witness of maximal size yields zero.
pub fn alpha_extension_probe(
    rep: &Representation,
    cert: &WitnessCertificate,
    tries: usize,
    seed: u64,
) -> Result<usize> {
    if cert.kind != WitnessKind::IndependentSet {
        return Err(TwirlError::InvalidParameter(format!(
            "extension probe expects an independent-set witness, got {}",
            cert.kind.as_str()
        )));
    }
    let dim = rep.dim();
    let k = cert.vectors.len();
    if k >= dim {
        return Ok(0);
    }
    let mut all = cert.vectors.clone();
    for i in 0..dim {
        all.push(linalg::basis_vector(dim, i));
    }
    let onb = linalg::orthonormalize(&all, 1e-8);
    let complement = &onb[k.min(onb.len())..];
    if complement.is_empty() {
        return Ok(0);
    }

    let mut rng = child_rng(seed, "alpha-extension-probe");
    let mut spurious = 0;
    for _ in 0..tries {
        let mut y = CVector::zeros(dim);
        for b in complement {
            y += b * linalg::gaussian_complex(&mut rng);
        }
        let norm = y.norm();
        if norm < 1e-12 {
            continue;
        }
        let y = y.unscale(norm);
        let mut worst = 0.0_f64;
        for g in 0..rep.group().order() {
            let py = rep.matrix(g) * &y;
            for xa in &cert.vectors {
                worst = worst.max(xa.dotc(&py).norm());
            }
        }
        if worst <= cert.threshold {
            spurious += 1;
        }
    }
    Ok(spurious)
}

/// Outcome of the capacity multiplicativity check on a tensor power.
#[derive(Debug, Clone)]
pub struct TensorCheckReport {
    pub copies: usize,
    pub base_alpha: usize,
    pub tensor_alpha: usize,
    pub expected_alpha: usize,
    pub base_types: usize,
    pub tensor_types: usize,
    pub expected_types: usize,
    /// Tensor multiplicities match the multiset of products of base
    /// multiplicities.
    pub multiplicities_match: bool,
    pub pass: bool,
}

/// Decomposes π^⊠copies over G^copies and verifies alpha's
/// multiplicativity: α = (Σmᵢ)^copies with d^copies pairwise inequivalent
/// types whose multiplicities are exactly the products of the base ones.
pub fn capacity_tensor_check(
    rep: &Representation,
    copies: usize,
    seed: u64,
) -> Result<TensorCheckReport> {
    if copies == 0 {
        return Err(TwirlError::InvalidParameter(
            "tensor check needs at least one copy".to_string(),
        ));
    }
    let order_pow = (rep.group().order() as u128).pow(copies as u32);
    if order_pow > group::MAX_ORDER as u128 {
        return Err(TwirlError::SizeLimit(format!(
            "product group order {order_pow} exceeds cap {}",
            group::MAX_ORDER
        )));
    }
    let dim_pow = (rep.dim() as u128).pow(copies as u32);
    if dim_pow > decompose::MAX_DECOMPOSE_DIM as u128 {
        return Err(TwirlError::SizeLimit(format!(
            "tensor power dim {dim_pow} exceeds cap {}",
            decompose::MAX_DECOMPOSE_DIM
        )));
    }

    let base_dec = isotypic_decomposition(rep, crate::seeding::child_seed(seed, "tensor-base"))?;
    let mut power = rep.clone();
    for _ in 1..copies {
        power = Representation::outer_tensor(&power, rep)?;
    }
    let tensor_dec =
        isotypic_decomposition(&power, crate::seeding::child_seed(seed, "tensor-power"))?;

    let base_alpha = alpha_closed(&base_dec);
    let tensor_alpha = alpha_closed(&tensor_dec);
    let expected_alpha = base_alpha.pow(copies as u32);
    let expected_types = base_dec.d.pow(copies as u32);

    let mut expected_mults = vec![1_usize];
    for _ in 0..copies {
        let mut next = Vec::with_capacity(expected_mults.len() * base_dec.d);
        for &acc in &expected_mults {
            for &m in &base_dec.multiplicities {
                next.push(acc * m);
            }
        }
        expected_mults = next;
    }
    expected_mults.sort_unstable();
    let mut got_mults = tensor_dec.multiplicities.clone();
    got_mults.sort_unstable();
    let multiplicities_match = expected_mults == got_mults;

    let pass = tensor_alpha == expected_alpha
        && tensor_dec.d == expected_types
        && multiplicities_match;
    Ok(TensorCheckReport {
        copies,
        base_alpha,
        tensor_alpha,
        expected_alpha,
        base_types: base_dec.d,
        tensor_types: tensor_dec.d,
        expected_types,
        multiplicities_match,
        pass,
    })
}

/// Decomposes π, computes all closed-form invariants, and constructs and
/// verifies every witness. Any certificate failure propagates as an error.
pub fn full_report(rep: &Representation, seed: u64) -> Result<InvariantReport> {
    let dec = isotypic_decomposition(rep, seed)?;
    multiplicity_crosscheck(rep, &dec)?;
    let alpha = alpha_closed(&dec);
    let beta = beta_closed(&dec);
    let gamma = gamma_closed(&dec);
    let tau = tau_closed(&dec);
    let capacity_bits = zero_error_capacity(&dec, LogBase::Two);
    let alpha_cert = alpha_witness(rep, &dec)?;
    let code_cert = code_witness(rep, &dec)?;
    let gamma_cert = gamma_witness(rep, &dec)?;
    let tau_cert = tau_witness(rep, &dec)?;
    Ok(InvariantReport {
        alpha,
        beta,
        gamma,
        tau,
        capacity_bits,
        alpha_witness: alpha_cert,
        code_witness: code_cert,
        gamma_witness: gamma_cert,
        tau_witness: tau_cert,
        decomposition: dec,
    })
}

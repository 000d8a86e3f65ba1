//! Quantum channels in Kraus and Choi form, twirling channels built from
//! representations, and covariance certification.
//!
//! Conventions, fixed once for the whole crate:
//! - A channel maps in_dim×in_dim matrices to out_dim×out_dim matrices as
//!   Φ(T) = Σᵢ AᵢTAᵢ* with Kraus operators Aᵢ of shape out×in.
//! - The Choi matrix is the block matrix C = [Φ(E_ij)]: block row i, block
//!   column j holds Φ(E_ij), so C = Σ_ij E_ij ⊗ Φ(E_ij) with total side
//!   length in·out. Under column-major vectorization C = Σᵢ vec(Aᵢ)vec(Aᵢ)*.
//! - Averages over a group always run in element-index order, so results are
//!   bit-reproducible.

use crate::decompose;
use crate::error::TwirlError;
use crate::linalg::{self, CMatrix};
use crate::rep::Representation;
use crate::Result;

/// Default validation tolerance for channels.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Relative singular-value / eigenvalue threshold for Choi rank counting.
const RANK_REL_TOL: f64 = 1e-8;

/// Completely positive trace-preserving map between matrix spaces.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Option<Vec<CMatrix>>,
    choi: Option<CMatrix>,
    tolerance: f64,
    certificate: CptpCertificate,
}

/// Validation data attached to every constructed channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpCertificate {
    /// ‖Σᵢ Aᵢ*Aᵢ − I‖_F (or the equivalent partial-trace defect in Choi form).
    pub trace_preservation_defect: f64,
    /// Most negative Choi eigenvalue, relative to ‖C‖; 0 when the channel
    /// was built from Kraus operators (positivity is then structural).
    pub min_choi_eigenvalue: f64,
    pub pass: bool,
}

/// Certificate from [`is_covariant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceCertificate {
    /// max over g and matrix units of ‖Φ(π(g)Bπ(g)*) − σ(g)Φ(B)σ(g)*‖_F
    pub max_defect: f64,
    pub pass: bool,
}

/// Certificate from [`range_equals_commutant`].
#[derive(Debug, Clone)]
pub struct RangeCommutantCertificate {
    pub range_dim: usize,
    pub commutant_dim: usize,
    /// worst residual of a twirl output after projection onto the commutant
    pub range_into_commutant: f64,
    /// worst residual of a commutant basis element after projection onto the
    /// twirl's range
    pub commutant_into_range: f64,
    /// max ‖Φ(Φ(B)) − Φ(B)‖_F over the operator basis
    pub idempotence_defect: f64,
    pub pass: bool,
}

impl QuantumChannel {
    /// Channel from Kraus operators (all out×in). Complete positivity is
    /// structural; trace preservation is checked against the tolerance.
    pub fn from_kraus(kraus: Vec<CMatrix>, tolerance: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| TwirlError::InvalidChannel("empty Kraus list".into()))?;
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(TwirlError::InvalidChannel("zero-dimensional space".into()));
        }
        for a in &kraus {
            if a.shape() != (out_dim, in_dim) {
                return Err(TwirlError::DimensionMismatch(format!(
                    "Kraus operator is {}×{}, expected {out_dim}×{in_dim}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for a in &kraus {
            sum += a.adjoint() * a;
        }
        let defect = linalg::fro_norm(&(sum - linalg::identity(in_dim)));
        if defect > tolerance * in_dim as f64 {
            return Err(TwirlError::NotTracePreserving { defect });
        }
        Ok(QuantumChannel {
            in_dim,
            out_dim,
            kraus: Some(kraus),
            choi: None,
            tolerance,
            certificate: CptpCertificate {
                trace_preservation_defect: defect,
                min_choi_eigenvalue: 0.0,
                pass: true,
            },
        })
    }

    /// Channel from its Choi matrix; checks positivity (eigenvalues no more
    /// negative than −tol·‖C‖) and trace preservation (tr_out C = I).
    pub fn from_choi(choi: CMatrix, in_dim: usize, out_dim: usize, tolerance: f64) -> Result<Self> {
        let side = in_dim * out_dim;
        if choi.shape() != (side, side) {
            return Err(TwirlError::DimensionMismatch(format!(
                "Choi matrix is {}×{}, expected {side}×{side}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let (vals, _) = linalg::hermitian_eigen_sorted(&choi);
        let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1e-300);
        let min_rel = vals[0] / scale;
        if min_rel < -tolerance.max(RANK_REL_TOL) {
            return Err(TwirlError::NotCompletelyPositive {
                min_eigenvalue: vals[0],
            });
        }
        // partial trace over the output factor: entry (i,j) is tr Φ(E_ij)
        let mut pt = CMatrix::zeros(in_dim, in_dim);
        for i in 0..in_dim {
            for j in 0..in_dim {
                for k in 0..out_dim {
                    pt[(i, j)] += choi[(i * out_dim + k, j * out_dim + k)];
                }
            }
        }
        let defect = linalg::fro_norm(&(pt - linalg::identity(in_dim)));
        if defect > tolerance * in_dim as f64 {
            return Err(TwirlError::NotTracePreserving { defect });
        }
        Ok(QuantumChannel {
            in_dim,
            out_dim,
            kraus: None,
            choi: Some(choi),
            tolerance,
            certificate: CptpCertificate {
                trace_preservation_defect: defect,
                min_choi_eigenvalue: min_rel,
                pass: true,
            },
        })
    }

    /// The identity channel on ℂⁿ.
    pub fn identity(n: usize) -> Self {
        Self::from_kraus(vec![linalg::identity(n)], DEFAULT_TOLERANCE)
            .expect("identity channel is CPTP")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn certificate(&self) -> &CptpCertificate {
        &self.certificate
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    /// Φ(T) = Σᵢ AᵢTAᵢ*, or the block-wise contraction of the Choi matrix
    /// when only that form is stored.
    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.shape() != (self.in_dim, self.in_dim) {
            return Err(TwirlError::DimensionMismatch(format!(
                "input is {}×{}, channel expects {}×{}",
                t.nrows(),
                t.ncols(),
                self.in_dim,
                self.in_dim
            )));
        }
        if let Some(kraus) = &self.kraus {
            let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
            for a in kraus {
                acc += a * t * a.adjoint();
            }
            return Ok(acc);
        }
        let choi = self.choi.as_ref().expect("channel stores kraus or choi");
        let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
        for i in 0..self.in_dim {
            for j in 0..self.in_dim {
                let block = choi.view((i * self.out_dim, j * self.out_dim), (self.out_dim, self.out_dim));
                acc += block.scale(1.0) * t[(i, j)];
            }
        }
        Ok(acc)
    }

    /// Choi matrix C = [Φ(E_ij)], assembled from Kraus operators as
    /// Σᵢ vec(Aᵢ)vec(Aᵢ)* or returned as stored.
    pub fn choi_matrix(&self) -> CMatrix {
        if let Some(choi) = &self.choi {
            return choi.clone();
        }
        let kraus = self.kraus.as_ref().expect("channel stores kraus or choi");
        let side = self.in_dim * self.out_dim;
        let mut c = CMatrix::zeros(side, side);
        for a in kraus {
            let v = linalg::vec_mat(a);
            c += linalg::outer(&v, &v);
        }
        c
    }

    /// Rank of the Choi matrix with a relative threshold of 1e-8; this is
    /// the minimal number of Kraus operators.
    pub fn choi_rank(&self) -> usize {
        linalg::rank_with_tol(&self.choi_matrix(), RANK_REL_TOL)
    }

    /// Minimal Kraus family recovered from the Choi eigendecomposition.
    pub fn kraus_from_choi(&self) -> Vec<CMatrix> {
        let choi = self.choi_matrix();
        let (vals, vecs) = linalg::hermitian_eigen_sorted(&choi);
        let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1e-300);
        let mut out = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam > RANK_REL_TOL * scale {
                let col = vecs.column(k).scale(lam.sqrt());
                out.push(linalg::unvec_mat(&col.into(), self.out_dim, self.in_dim));
            }
        }
        out
    }
}

/// The channel Φ_π(T) = (1/|G|) Σ_g π(g) T π(g)*, or its two-representation
/// sibling Φ_{π,σ}(T) = (1/|G|) Σ_g π(g) T σ(g)* acting on dim_π×dim_σ
/// matrices. The latter is completely positive but trace preserving only
/// when the two representations coincide.
#[derive(Debug, Clone)]
pub struct TwirlingChannel {
    pi: Representation,
    sigma: Option<Representation>,
    trace_preserving: bool,
}

/// Φ_π for a single representation: CPTP, unital, idempotent, self-adjoint.
pub fn twirling_channel(pi: &Representation) -> TwirlingChannel {
    TwirlingChannel {
        pi: pi.clone(),
        sigma: None,
        trace_preserving: true,
    }
}

/// Φ_{π,σ} on rectangular matrices; the zero map exactly when π and σ share
/// no equivalent irreducible component.
pub fn bimodule_map(pi: &Representation, sigma: &Representation) -> Result<TwirlingChannel> {
    if !pi.same_group(sigma) {
        return Err(TwirlError::MismatchedGroups);
    }
    let same = pi.dim() == sigma.dim()
        && (0..pi.group().order()).all(|g| pi.matrix(g) == sigma.matrix(g));
    Ok(TwirlingChannel {
        pi: pi.clone(),
        sigma: if same { None } else { Some(sigma.clone()) },
        trace_preserving: same,
    })
}

impl TwirlingChannel {
    pub fn representation(&self) -> &Representation {
        &self.pi
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Input shape (rows, cols) of matrices this map acts on.
    pub fn input_shape(&self) -> (usize, usize) {
        let cols = self.sigma.as_ref().map_or(self.pi.dim(), |s| s.dim());
        (self.pi.dim(), cols)
    }

    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.shape() != self.input_shape() {
            return Err(TwirlError::DimensionMismatch(format!(
                "input is {}×{}, map expects {}×{}",
                t.nrows(),
                t.ncols(),
                self.input_shape().0,
                self.input_shape().1
            )));
        }
        Ok(match &self.sigma {
            None => decompose::group_average(&self.pi, t),
            // group_average conjugates by one representation; the π≠σ case
            // averages π(g)·T·σ(g)*, which is pair_average with sides swapped
            Some(sigma) => decompose::pair_average(sigma, &self.pi, t),
        })
    }

    /// View as a quantum channel with Kraus family {π(g)/√|G|}. Only the
    /// single-representation form is a channel.
    pub fn to_quantum_channel(&self) -> Result<QuantumChannel> {
        if !self.trace_preserving {
            return Err(TwirlError::InvalidChannel(
                "two-representation averaging map is not trace preserving".into(),
            ));
        }
        let order = self.pi.group().order() as f64;
        let kraus = (0..self.pi.group().order())
            .map(|g| self.pi.matrix(g).unscale(order.sqrt()))
            .collect();
        QuantumChannel::from_kraus(kraus, self.pi.tolerance().max(DEFAULT_TOLERANCE))
    }
}

/// Twirl an arbitrary channel: Ψ(T) = (1/|G|) Σ_g σ(g)* Φ(π(g) T π(g)*) σ(g).
/// Kraus operators of Ψ are {σ(g)* B π(g) / √|G|} over Kraus B of Φ.
pub fn twirl_channel(
    phi: &QuantumChannel,
    pi: &Representation,
    sigma: &Representation,
) -> Result<QuantumChannel> {
    if !pi.same_group(sigma) {
        return Err(TwirlError::MismatchedGroups);
    }
    if phi.in_dim() != pi.dim() || phi.out_dim() != sigma.dim() {
        return Err(TwirlError::DimensionMismatch(format!(
            "channel is {}→{}, representations have dims {} and {}",
            phi.in_dim(),
            phi.out_dim(),
            pi.dim(),
            sigma.dim()
        )));
    }
    let base = match phi.kraus() {
        Some(k) => k.to_vec(),
        None => phi.kraus_from_choi(),
    };
    let order = pi.group().order();
    let scale = (order as f64).sqrt();
    let mut kraus = Vec::with_capacity(order * base.len());
    for g in 0..order {
        let left = sigma.matrix(g).adjoint();
        for b in &base {
            kraus.push(&left * b * pi.matrix(g) / linalg::cr(scale));
        }
    }
    QuantumChannel::from_kraus(kraus, phi.tolerance())
}

/// Measure covariance: Φ(π(g) B π(g)*) = σ(g) Φ(B) σ(g)* over all g and a
/// full matrix-unit basis B.
pub fn is_covariant(
    phi: &QuantumChannel,
    pi: &Representation,
    sigma: &Representation,
    tol: f64,
) -> Result<CovarianceCertificate> {
    if !pi.same_group(sigma) {
        return Err(TwirlError::MismatchedGroups);
    }
    if phi.in_dim() != pi.dim() || phi.out_dim() != sigma.dim() {
        return Err(TwirlError::DimensionMismatch(
            "representation dims do not match the channel".into(),
        ));
    }
    let n = pi.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let b = linalg::matrix_unit(n, i, j);
            let phi_b = phi.apply(&b)?;
            for g in 0..pi.group().order() {
                let rotated = pi.matrix(g) * &b * pi.matrix(g).adjoint();
                let lhs = phi.apply(&rotated)?;
                let rhs = sigma.matrix(g) * &phi_b * sigma.matrix(g).adjoint();
                worst = worst.max(linalg::fro_norm(&(lhs - rhs)));
            }
        }
    }
    Ok(CovarianceCertificate {
        max_defect: worst,
        pass: worst <= tol,
    })
}

/// Certify that the range of Φ_π is exactly the commutant of π and that the
/// twirl is idempotent on a full operator basis.
pub fn range_equals_commutant(pi: &Representation) -> RangeCommutantCertificate {
    let n = pi.dim();
    let commutant = decompose::commutant_basis(pi);
    let mut outputs = Vec::new();
    let mut idem = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let out = decompose::group_average(pi, &linalg::matrix_unit(n, i, j));
            let twice = decompose::group_average(pi, &out);
            idem = idem.max(linalg::fro_norm(&(&twice - &out)));
            outputs.push(out);
        }
    }
    let range_vecs: Vec<linalg::CVector> = outputs.iter().map(linalg::vec_mat).collect();
    let range_basis = linalg::orthonormalize(&range_vecs, 1e-8);

    let project_residual = |v: &linalg::CVector, basis: &[linalg::CVector]| -> f64 {
        let mut w = v.clone();
        for b in basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
        w.norm()
    };

    let comm_vecs: Vec<linalg::CVector> = commutant.basis.iter().map(linalg::vec_mat).collect();
    let mut range_into_commutant = 0.0_f64;
    for v in &range_vecs {
        if v.norm() < 1e-12 {
            continue;
        }
        range_into_commutant =
            range_into_commutant.max(project_residual(v, &comm_vecs) / v.norm());
    }
    let mut commutant_into_range = 0.0_f64;
    for v in &comm_vecs {
        commutant_into_range = commutant_into_range.max(project_residual(v, &range_basis));
    }

    let pass = range_basis.len() == commutant.dim()
        && range_into_commutant <= 1e-8
        && commutant_into_range <= 1e-8
        && idem <= 1e-9;
    RangeCommutantCertificate {
        range_dim: range_basis.len(),
        commutant_dim: commutant.dim(),
        range_into_commutant,
        commutant_into_range,
        idempotence_defect: idem,
        pass,
    }
}

//! Isotypic decomposition of unitary representations, commutants, and
//! intertwiner spaces.
//!
//! The decomposition algorithm never touches character tables. It draws a
//! seeded random Hermitian element of the commutant, splits the space along
//! its eigenspaces (which are invariant), and recurses until every block is
//! irreducible; blocks are then grouped by equivalence and aligned copy by
//! copy with unitary intertwiners. Character inner products appear only as
//! cross-checks.
//!
//! Both the commutant and intertwiner computations exploit that averaging a
//! matrix over the group action is an orthogonal projection onto the
//! solution space of the stacked linear constraints, so an orthonormal basis
//! of the image of that averaging map is exactly a basis of the null space
//! the constraints define.

use crate::error::TwirlError;
use crate::linalg::{self, CMatrix};
use crate::rep::Representation;
use crate::seeding;
use crate::Result;
use num_complex::Complex64;

/// Dimension cap for [`isotypic_decomposition`]; the null-space and
/// alignment steps are dense and O(dim⁶) worst case.
pub const MAX_DECOMPOSE_DIM: usize = 256;

/// Relative eigenvalue-clustering threshold for random commutant elements.
const CLUSTER_REL_TOL: f64 = 1e-8;
/// Clusters closer than this multiple of the threshold count as ambiguous.
const CLUSTER_SAFETY: f64 = 10.0;
const MAX_SPLIT_RETRIES: usize = 5;
/// |⟨χ,χ⟩ − 1| bound for declaring a block irreducible.
const CHAR_TOL: f64 = 1e-6;

/// Orthonormal basis (trace inner product) of a space of operators cut out
/// by linear constraints, such as a commutant or an intertwiner space.
#[derive(Debug, Clone)]
pub struct OperatorSpaceBasis {
    pub rows: usize,
    pub cols: usize,
    pub basis: Vec<CMatrix>,
}

impl OperatorSpaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest pairwise orthonormality defect |⟨Bᵢ,Bⱼ⟩ − δᵢⱼ|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((linalg::trace_inner(a, b) - linalg::cr(expected)).norm());
            }
        }
        worst
    }
}

/// Result of splitting a representation into isotypic components: on the
/// block side the group acts as ⊕ᵢ (I_{mᵢ} ⊗ πᵢ(g)), and `u` maps the
/// original space onto that block layout.
#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    /// Number of inequivalent irreducible types.
    pub d: usize,
    /// Copies of each type (m₁..m_d).
    pub multiplicities: Vec<usize>,
    /// Dimension of each type (n₁..n_d).
    pub dimensions: Vec<usize>,
    /// Block-diagonalizing unitary: u·π(g)·u* = ⊕ᵢ (I_{mᵢ} ⊗ πᵢ(g)).
    pub u: CMatrix,
    /// Orthogonal projections onto the isotypic subspaces, in the original
    /// coordinates.
    pub projections: Vec<CMatrix>,
    /// One irreducible representative per type, nᵢ×nᵢ.
    pub types: Vec<Representation>,
}

impl IsotypicDecomposition {
    pub fn total_dim(&self) -> usize {
        self.multiplicities
            .iter()
            .zip(&self.dimensions)
            .map(|(m, n)| m * n)
            .sum()
    }

    /// Row offset of type i's block: Σ_{j<i} mⱼnⱼ.
    pub fn block_offset(&self, i: usize) -> usize {
        (0..i)
            .map(|j| self.multiplicities[j] * self.dimensions[j])
            .sum()
    }

    /// Column of u* holding copy `j`, basis vector `l` of type `i`; this is
    /// the original-space vector representing e_j ⊗ f_l.
    pub fn block_vector(&self, i: usize, j: usize, l: usize) -> linalg::CVector {
        let col = self.block_offset(i) + j * self.dimensions[i] + l;
        self.u.row(col).adjoint()
    }
}

/// Report from [`multiplicity_crosscheck`].
#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    /// |⟨χ_π, χᵢ⟩ − mᵢ| per type.
    pub multiplicity_residuals: Vec<f64>,
    /// Σ mᵢnᵢ compared against dim H.
    pub dimension_matches: bool,
}

/// Average of g ↦ π(g) T π(g)*, the conditional expectation onto the
/// commutant of π.
pub fn group_average(rep: &Representation, t: &CMatrix) -> CMatrix {
    let order = rep.group().order();
    let mut acc = CMatrix::zeros(rep.dim(), rep.dim());
    for g in 0..order {
        acc += rep.matrix(g) * t * rep.matrix(g).adjoint();
    }
    acc.unscale(order as f64)
}

/// Average of g ↦ σ(g) X π(g)*, the projection onto the intertwiner space
/// Hom(π,σ). Fixed points are exactly the X with Xπ(g) = σ(g)X.
pub(crate) fn pair_average(pi: &Representation, sigma: &Representation, x: &CMatrix) -> CMatrix {
    let order = pi.group().order();
    let mut acc = CMatrix::zeros(sigma.dim(), pi.dim());
    for g in 0..order {
        acc += sigma.matrix(g) * x * pi.matrix(g).adjoint();
    }
    acc.unscale(order as f64)
}

/// Orthonormal basis of the image of an averaging projection, built by
/// feeding every matrix unit through it.
fn projection_image_basis(
    rows: usize,
    cols: usize,
    mut project: impl FnMut(&CMatrix) -> CMatrix,
) -> Vec<CMatrix> {
    let mut vectors: Vec<linalg::CVector> = Vec::new();
    for j in 0..cols {
        for i in 0..rows {
            let out = project(&linalg::matrix_unit_rect(rows, cols, i, j));
            let v = linalg::vec_mat(&out);
            if v.norm() > 1e-12 {
                vectors.push(v);
            }
        }
    }
    linalg::orthonormalize(&vectors, 1e-8)
        .into_iter()
        .map(|v| linalg::unvec_mat(&v, rows, cols))
        .collect()
}

/// Orthonormal basis of the commutant {T : Tπ(g) = π(g)T for all g}.
/// Contains I/√dim at minimum; dimension equals Σ mᵢ².
pub fn commutant_basis(rep: &Representation) -> OperatorSpaceBasis {
    let n = rep.dim();
    let basis = projection_image_basis(n, n, |e| group_average(rep, e));
    OperatorSpaceBasis {
        rows: n,
        cols: n,
        basis,
    }
}

/// Orthonormal basis of span{π(g) : g ∈ G}. The span is already closed
/// under products, so it is the full algebra generated by the image;
/// dimension equals Σ nᵢ².
pub fn algebra_basis(rep: &Representation) -> OperatorSpaceBasis {
    let vectors: Vec<linalg::CVector> = (0..rep.group().order())
        .map(|g| linalg::vec_mat(rep.matrix(g)))
        .collect();
    let basis = linalg::orthonormalize(&vectors, 1e-8)
        .into_iter()
        .map(|v| linalg::unvec_mat(&v, rep.dim(), rep.dim()))
        .collect();
    OperatorSpaceBasis {
        rows: rep.dim(),
        cols: rep.dim(),
        basis,
    }
}

/// Orthonormal basis of Hom(π,σ) = {T : Tπ(g) = σ(g)T}. Empty exactly when
/// π and σ share no equivalent subrepresentation.
pub fn intertwiner_space(
    pi: &Representation,
    sigma: &Representation,
) -> Result<OperatorSpaceBasis> {
    if !pi.same_group(sigma) {
        return Err(TwirlError::MismatchedGroups);
    }
    let basis = projection_image_basis(sigma.dim(), pi.dim(), |e| pair_average(pi, sigma, e));
    Ok(OperatorSpaceBasis {
        rows: sigma.dim(),
        cols: pi.dim(),
        basis,
    })
}

struct Leaf {
    isometry: CMatrix,
    rep: Representation,
}

/// Split one reducible invariant subspace along the eigenspaces of a random
/// Hermitian commutant element. Returns orthonormal eigenspace isometries.
fn split_invariant(rep: &Representation, seed: u64, path: &str) -> Result<Vec<CMatrix>> {
    let k = rep.dim();
    let mut last_threshold = 0.0;
    for attempt in 0..MAX_SPLIT_RETRIES {
        let mut rng = seeding::child_rng(seed, &format!("split:{path}:{attempt}"));
        let x = CMatrix::from_fn(k, k, |_, _| linalg::gaussian_complex(&mut rng));
        let h = (&x + x.adjoint()).scale(0.5);
        let r = group_average(rep, &h);
        let (vals, vecs) = linalg::hermitian_eigen_sorted(&r);
        let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        if scale < 1e-12 {
            continue;
        }
        let threshold = CLUSTER_REL_TOL * scale;
        last_threshold = threshold;

        let mut boundaries = vec![0usize];
        for i in 1..k {
            if vals[i] - vals[i - 1] > threshold {
                boundaries.push(i);
            }
        }
        boundaries.push(k);
        let ambiguous = (1..boundaries.len() - 1).any(|b| {
            let gap = vals[boundaries[b]] - vals[boundaries[b] - 1];
            gap < CLUSTER_SAFETY * threshold
        });
        if ambiguous || boundaries.len() == 2 {
            continue;
        }

        let mut isometries = Vec::with_capacity(boundaries.len() - 1);
        for w in boundaries.windows(2) {
            let cols: Vec<linalg::CVector> =
                (w[0]..w[1]).map(|c| vecs.column(c).into()).collect();
            isometries.push(CMatrix::from_columns(&cols));
        }
        return Ok(isometries);
    }
    Err(TwirlError::DegenerateCommutantElement {
        retries: MAX_SPLIT_RETRIES,
        threshold: last_threshold,
    })
}

fn collect_leaves(
    full: &Representation,
    isometry: CMatrix,
    seed: u64,
    path: String,
    out: &mut Vec<Leaf>,
) -> Result<()> {
    let sub = full.restricted(&isometry)?;
    let chi = sub.character()?;
    if (chi.norm_sqr() - 1.0).abs() < CHAR_TOL {
        out.push(Leaf {
            isometry,
            rep: sub,
        });
        return Ok(());
    }
    let splits = split_invariant(&sub, seed, &path)?;
    for (idx, w) in splits.into_iter().enumerate() {
        collect_leaves(full, &isometry * &w, seed, format!("{path}/{idx}"), out)?;
    }
    Ok(())
}

/// Unitary intertwiner aligning `from` with `to`, with the phase of its
/// largest-magnitude entry fixed to be real positive. `None` when the two
/// irreducibles are inequivalent.
fn unitary_intertwiner(
    from: &Representation,
    to: &Representation,
    seed: u64,
    salt: &str,
) -> Option<CMatrix> {
    for attempt in 0..3 {
        let mut rng = seeding::child_rng(seed, &format!("align:{salt}:{attempt}"));
        let x = CMatrix::from_fn(to.dim(), from.dim(), |_, _| linalg::gaussian_complex(&mut rng));
        let t = pair_average(from, to, &x);
        if linalg::fro_norm(&t) > 1e-6 {
            let u = linalg::polar_unitary(&t);
            return Some(fix_phase(u));
        }
    }
    None
}

/// Multiply by a global phase so the largest-magnitude entry is real
/// positive (first such entry in column-major order on ties).
fn fix_phase(mut u: CMatrix) -> CMatrix {
    let mut best = Complex64::new(1.0, 0.0);
    let mut best_norm = -1.0;
    for v in u.iter() {
        if v.norm() > best_norm {
            best_norm = v.norm();
            best = *v;
        }
    }
    let phase = best / best.norm();
    u.iter_mut().for_each(|v| *v /= phase);
    u
}

/// Compare two character-value lists lexicographically on a 1e-9 grid.
fn character_key(values: &[Complex64]) -> Vec<(i64, i64)> {
    values
        .iter()
        .map(|v| ((v.re / 1e-9).round() as i64, (v.im / 1e-9).round() as i64))
        .collect()
}

/// Decompose π into isotypic components. Deterministic for a fixed
/// `(π, seed)` pair, down to the exact bits of `u`.
pub fn isotypic_decomposition(
    rep: &Representation,
    seed: u64,
) -> Result<IsotypicDecomposition> {
    let dim = rep.dim();
    if dim > MAX_DECOMPOSE_DIM {
        return Err(TwirlError::SizeLimit(format!(
            "decomposition dimension {dim} exceeds cap {MAX_DECOMPOSE_DIM}"
        )));
    }

    let mut leaves = Vec::new();
    collect_leaves(rep, linalg::identity(dim), seed, "0".into(), &mut leaves)?;

    // Group leaves into equivalence clusters. Intertwiner existence is the
    // deciding test; characters must agree with it.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut leaf_chars: Vec<Vec<Complex64>> = Vec::with_capacity(leaves.len());
    for leaf in &leaves {
        leaf_chars.push(leaf.rep.character()?.values);
    }
    'leaves: for (li, leaf) in leaves.iter().enumerate() {
        for cluster in clusters.iter_mut() {
            let rep_leaf = &leaves[cluster[0]];
            if leaf.rep.dim() != rep_leaf.rep.dim() {
                continue;
            }
            let salt = format!("cluster:{li}:{}", cluster[0]);
            let intertwined =
                unitary_intertwiner(&leaf.rep, &rep_leaf.rep, seed, &salt).is_some();
            let chars_match =
                character_key(&leaf_chars[li]) == character_key(&leaf_chars[cluster[0]]);
            if intertwined != chars_match {
                return Err(TwirlError::DecompositionFailed(format!(
                    "intertwiner test and character test disagree for blocks {} and {}",
                    li, cluster[0]
                )));
            }
            if intertwined {
                cluster.push(li);
                continue 'leaves;
            }
        }
        clusters.push(vec![li]);
    }

    // Deterministic type order: by dimension, then by character values.
    clusters.sort_by(|a, b| {
        let (la, lb) = (&leaves[a[0]], &leaves[b[0]]);
        la.rep
            .dim()
            .cmp(&lb.rep.dim())
            .then_with(|| character_key(&leaf_chars[a[0]]).cmp(&character_key(&leaf_chars[b[0]])))
    });

    let d = clusters.len();
    let mut multiplicities = Vec::with_capacity(d);
    let mut dimensions = Vec::with_capacity(d);
    let mut types = Vec::with_capacity(d);
    // Columns of u*: for each type, copies in discovery order, each aligned
    // to the representative so the block action is I_m ⊗ πᵢ(g).
    let mut u_star_cols: Vec<linalg::CVector> = Vec::with_capacity(dim);
    let mut projections = Vec::with_capacity(d);

    for cluster in &clusters {
        let rep_leaf = &leaves[cluster[0]];
        let n = rep_leaf.rep.dim();
        multiplicities.push(cluster.len());
        dimensions.push(n);
        types.push(rep_leaf.rep.clone());

        let mut block_cols: Vec<linalg::CVector> = Vec::with_capacity(cluster.len() * n);
        for (copy, &li) in cluster.iter().enumerate() {
            let leaf = &leaves[li];
            let w = if li == cluster[0] {
                leaf.isometry.clone()
            } else {
                let salt = format!("final:{li}:{}", cluster[0]);
                let s = unitary_intertwiner(&leaf.rep, &rep_leaf.rep, seed, &salt)
                    .ok_or_else(|| {
                        TwirlError::DecompositionFailed(format!(
                            "lost intertwiner while aligning copy {copy}"
                        ))
                    })?;
                &leaf.isometry * s.adjoint()
            };
            for l in 0..n {
                block_cols.push(w.column(l).into());
            }
        }
        let mut p = CMatrix::zeros(dim, dim);
        for col in &block_cols {
            p += linalg::outer(col, col);
        }
        projections.push(p);
        u_star_cols.extend(block_cols);
    }

    let u_star = CMatrix::from_columns(&u_star_cols);
    Ok(IsotypicDecomposition {
        d,
        multiplicities,
        dimensions,
        u: u_star.adjoint(),
        projections,
        types,
    })
}

/// Independent consistency check: multiplicities must match the character
/// inner products ⟨χ_π, χᵢ⟩ and the block dimensions must fill the space.
pub fn multiplicity_crosscheck(
    rep: &Representation,
    dec: &IsotypicDecomposition,
) -> Result<CrosscheckReport> {
    let chi = rep.character()?;
    let mut residuals = Vec::with_capacity(dec.d);
    for (i, t) in dec.types.iter().enumerate() {
        let chi_i = t.character()?;
        let overlap = chi.inner(&chi_i)?;
        let residual = (overlap - linalg::cr(dec.multiplicities[i] as f64)).norm();
        if residual > 1e-6 {
            return Err(TwirlError::DecompositionInconsistent(format!(
                "type {i}: character overlap {:.6} vs multiplicity {}",
                overlap.re, dec.multiplicities[i]
            )));
        }
        residuals.push(residual);
    }
    let dimension_matches = dec.total_dim() == rep.dim();
    if !dimension_matches {
        return Err(TwirlError::DecompositionInconsistent(format!(
            "Σ mᵢnᵢ = {} but dim H = {}",
            dec.total_dim(),
            rep.dim()
        )));
    }
    Ok(CrosscheckReport {
        multiplicity_residuals: residuals,
        dimension_matches,
    })
}

/// Worst-case block-diagonalization residual
/// max_g ‖u π(g) u* − ⊕ᵢ(I_{mᵢ}⊗πᵢ(g))‖_F.
pub fn block_residual(rep: &Representation, dec: &IsotypicDecomposition) -> f64 {
    let dim = rep.dim();
    let u_star = dec.u.adjoint();
    let mut worst = 0.0_f64;
    for g in 0..rep.group().order() {
        let transformed = &dec.u * rep.matrix(g) * &u_star;
        let mut block = CMatrix::zeros(dim, dim);
        let mut off = 0;
        for i in 0..dec.d {
            let (m, n) = (dec.multiplicities[i], dec.dimensions[i]);
            for _ in 0..m {
                block
                    .view_mut((off, off), (n, n))
                    .copy_from(dec.types[i].matrix(g));
                off += n;
            }
        }
        worst = worst.max(linalg::fro_norm(&(transformed - block)));
    }
    worst
}

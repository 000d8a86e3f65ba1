//! Unitary representations of finite groups: construction, validation,
//! sums, outer tensor products, and characters.
//!
//! A [`Representation`] stores one dim×dim complex matrix per group element,
//! indexed by the group's element order. Constructors only check shapes;
//! [`Representation::validate`] measures how far the family is from a
//! unitary homomorphism and is the gate serialized inputs must pass.

use std::sync::Arc;

use crate::error::TwirlError;
use crate::group::FiniteGroup;
use crate::linalg::{self, CMatrix};
use crate::Result;
use num_complex::Complex64;

/// Default validation tolerance; defect bounds scale as tolerance·dim.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// The regular representation acts on ℂ^|G|; cap |G| to keep it dense-friendly.
pub const MAX_REGULAR_ORDER: usize = 200;
/// Cap on the dimension of an outer tensor product.
pub const MAX_TENSOR_DIM: usize = 256;

#[derive(Debug, Clone)]
pub struct Representation {
    group: Arc<FiniteGroup>,
    dim: usize,
    matrices: Vec<CMatrix>,
    tolerance: f64,
}

/// Defect measurements from [`Representation::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepValidation {
    /// max over (g,h) of ‖π(g)π(h) − π(gh)‖_F
    pub homomorphism_defect: f64,
    /// max over g of ‖π(g)π(g)* − I‖_F
    pub unitarity_defect: f64,
    pub pass: bool,
}

/// A function constant on conjugacy classes, stored per class together with
/// the class sizes needed for inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFunction {
    pub values: Vec<Complex64>,
    pub class_sizes: Vec<usize>,
    pub group_order: usize,
}

impl ClassFunction {
    /// ⟨χ, ψ⟩ = (1/|G|) Σ_g χ(g)·conj(ψ(g)), summed class by class.
    pub fn inner(&self, other: &ClassFunction) -> Result<Complex64> {
        if self.class_sizes != other.class_sizes || self.group_order != other.group_order {
            return Err(TwirlError::MismatchedGroups);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&a, &b), &size) in self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.class_sizes)
        {
            acc += a * b.conj() * (size as f64);
        }
        Ok(acc / self.group_order as f64)
    }

    /// Self inner product ⟨χ, χ⟩, which is real for any character.
    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).expect("same class structure").re
    }
}

impl Representation {
    /// Wrap per-element matrices after shape checks only. Call
    /// [`validate`](Self::validate) to measure homomorphism and unitarity
    /// defects.
    pub fn from_matrices(
        group: Arc<FiniteGroup>,
        matrices: Vec<CMatrix>,
        tolerance: f64,
    ) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(TwirlError::DimensionMismatch(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        if tolerance < 0.0 {
            return Err(TwirlError::InvalidParameter(
                "tolerance must be nonnegative".into(),
            ));
        }
        let dim = matrices.first().map_or(0, |m| m.nrows());
        if dim == 0 {
            return Err(TwirlError::InvalidParameter(
                "representation dimension must be positive".into(),
            ));
        }
        for (g, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(TwirlError::DimensionMismatch(format!(
                    "matrix for element {} is {}×{}, expected {dim}×{dim}",
                    group.label(g),
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Representation {
            group,
            dim,
            matrices,
            tolerance,
        })
    }

    /// Left-translation permutation matrices on ℂ^|G|.
    pub fn regular(group: Arc<FiniteGroup>) -> Result<Self> {
        let n = group.order();
        if n > MAX_REGULAR_ORDER {
            return Err(TwirlError::SizeLimit(format!(
                "regular representation needs order <= {MAX_REGULAR_ORDER}, got {n}"
            )));
        }
        let matrices = (0..n)
            .map(|g| {
                let mut m = CMatrix::zeros(n, n);
                for h in 0..n {
                    m[(group.mul(g, h), h)] = linalg::cr(1.0);
                }
                m
            })
            .collect();
        Self::from_matrices(group, matrices, DEFAULT_TOLERANCE)
    }

    /// 0/1 matrices of a permutation action. `action[g]` lists the image of
    /// each point under g; the family must satisfy
    /// `action[g·h] = action[g] ∘ action[h]`.
    pub fn permutation(group: Arc<FiniteGroup>, action: &[Vec<usize>]) -> Result<Self> {
        let n = group.order();
        if action.len() != n {
            return Err(TwirlError::InvalidAction(format!(
                "{} permutations for a group of order {n}",
                action.len()
            )));
        }
        let points = action.first().map_or(0, |p| p.len());
        if points == 0 {
            return Err(TwirlError::InvalidAction("empty point set".into()));
        }
        for (g, p) in action.iter().enumerate() {
            if p.len() != points {
                return Err(TwirlError::InvalidAction(format!(
                    "permutation for element {} has wrong length",
                    group.label(g)
                )));
            }
            let mut seen = vec![false; points];
            for &x in p {
                if x >= points || seen[x] {
                    return Err(TwirlError::InvalidAction(format!(
                        "element {} does not act by a permutation",
                        group.label(g)
                    )));
                }
                seen[x] = true;
            }
        }
        for g in 0..n {
            for h in 0..n {
                let gh = group.mul(g, h);
                let composes = (0..points).all(|x| action[gh][x] == action[g][action[h][x]]);
                if !composes {
                    return Err(TwirlError::InvalidAction(format!(
                        "action is not a homomorphism at pair ({}, {})",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
        let matrices = (0..n)
            .map(|g| {
                let mut m = CMatrix::zeros(points, points);
                for x in 0..points {
                    m[(action[g][x], x)] = linalg::cr(1.0);
                }
                m
            })
            .collect();
        Self::from_matrices(group, matrices, DEFAULT_TOLERANCE)
    }

    /// Block-diagonal sum Σ mᵢ·πᵢ. All parts must share one group.
    pub fn direct_sum(parts: &[(&Representation, usize)]) -> Result<Self> {
        let (first, _) = parts
            .first()
            .ok_or_else(|| TwirlError::InvalidParameter("empty direct sum".into()))?;
        for (p, _) in parts {
            if !p.same_group(first) {
                return Err(TwirlError::MismatchedGroups);
            }
        }
        let dim: usize = parts.iter().map(|(p, m)| p.dim * m).sum();
        if dim == 0 {
            return Err(TwirlError::InvalidParameter(
                "direct sum with zero total multiplicity".into(),
            ));
        }
        let order = first.group.order();
        let tolerance = parts
            .iter()
            .map(|(p, _)| p.tolerance)
            .fold(0.0_f64, f64::max);
        let matrices = (0..order)
            .map(|g| {
                let mut m = CMatrix::zeros(dim, dim);
                let mut off = 0;
                for (p, mult) in parts {
                    for _ in 0..*mult {
                        m.view_mut((off, off), (p.dim, p.dim))
                            .copy_from(&p.matrices[g]);
                        off += p.dim;
                    }
                }
                m
            })
            .collect();
        Self::from_matrices(first.group.clone(), matrices, tolerance)
    }

    /// Representation of G×H sending (g,h) to πA(g) ⊗ πB(h). Builds the
    /// product group; its element (a,b) has index a·|H| + b, matching
    /// [`FiniteGroup::direct_product`].
    pub fn outer_tensor(a: &Representation, b: &Representation) -> Result<Self> {
        let dim = a.dim * b.dim;
        if dim > MAX_TENSOR_DIM {
            return Err(TwirlError::SizeLimit(format!(
                "tensor dimension {dim} exceeds cap {MAX_TENSOR_DIM}"
            )));
        }
        let product = Arc::new(FiniteGroup::direct_product(&a.group, &b.group)?);
        let hb = b.group.order();
        let matrices = (0..product.order())
            .map(|x| linalg::kron(&a.matrices[x / hb], &b.matrices[x % hb]))
            .collect();
        Self::from_matrices(product, matrices, a.tolerance.max(b.tolerance))
    }

    /// Measure the worst homomorphism and unitarity defects over all pairs
    /// and elements. Passing means both are at most tolerance·dim.
    pub fn validate(&self) -> RepValidation {
        let n = self.group.order();
        let eye = linalg::identity(self.dim);
        let mut hom = 0.0_f64;
        let mut unit = 0.0_f64;
        for g in 0..n {
            unit = unit.max(linalg::fro_norm(
                &(&self.matrices[g] * self.matrices[g].adjoint() - &eye),
            ));
            for h in 0..n {
                let gh = self.group.mul(g, h);
                hom = hom.max(linalg::fro_norm(
                    &(&self.matrices[g] * &self.matrices[h] - &self.matrices[gh]),
                ));
            }
        }
        let bound = self.tolerance * self.dim as f64;
        RepValidation {
            homomorphism_defect: hom,
            unitarity_defect: unit,
            pass: hom <= bound && unit <= bound,
        }
    }

    /// Character as a class function, cross-checked for constancy on each
    /// conjugacy class.
    pub fn character(&self) -> Result<ClassFunction> {
        let traces: Vec<Complex64> = self.matrices.iter().map(linalg::trace).collect();
        let cc = self.group.conjugacy_classes();
        let bound = self.tolerance * self.dim as f64;
        let mut values = Vec::with_capacity(cc.classes.len());
        let mut class_sizes = Vec::with_capacity(cc.classes.len());
        for class in &cc.classes {
            let rep_trace = traces[class[0]];
            for &g in class {
                if (traces[g] - rep_trace).norm() > bound {
                    return Err(TwirlError::InvalidRepresentation(format!(
                        "trace not constant on the conjugacy class of {}",
                        self.group.label(class[0])
                    )));
                }
            }
            let mean: Complex64 =
                class.iter().map(|&g| traces[g]).sum::<Complex64>() / class.len() as f64;
            values.push(mean);
            class_sizes.push(class.len());
        }
        Ok(ClassFunction {
            values,
            class_sizes,
            group_order: self.group.order(),
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn set_tolerance(&mut self, tolerance: f64) {
        self.tolerance = tolerance;
    }

    pub fn same_group(&self, other: &Representation) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group == other.group
    }

    /// Conjugated copy U π(g) U*; `u` must be dim×dim unitary.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(TwirlError::DimensionMismatch(format!(
                "conjugator is {}×{}, expected {}×{}",
                u.nrows(),
                u.ncols(),
                self.dim,
                self.dim
            )));
        }
        let ua = u.adjoint();
        let matrices = self.matrices.iter().map(|m| u * m * &ua).collect();
        Self::from_matrices(self.group.clone(), matrices, self.tolerance)
    }

    /// Restriction of every π(g) to an invariant subspace given by an
    /// isometry (columns orthonormal): g ↦ V* π(g) V.
    pub fn restricted(&self, isometry: &CMatrix) -> Result<Self> {
        if isometry.nrows() != self.dim {
            return Err(TwirlError::DimensionMismatch(format!(
                "isometry has {} rows, expected {}",
                isometry.nrows(),
                self.dim
            )));
        }
        let va = isometry.adjoint();
        let matrices = self.matrices.iter().map(|m| &va * m * isometry).collect();
        Self::from_matrices(self.group.clone(), matrices, self.tolerance)
    }
}

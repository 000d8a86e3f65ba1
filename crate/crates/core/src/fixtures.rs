//! Shared constructions for unit tests.

use std::sync::Arc;

use crate::group::FiniteGroup;
use crate::linalg::{cr, CMatrix};
use crate::rep::Representation;

/// One-dimensional representation from real scalar values per element.
pub fn one_dim_rep(group: Arc<FiniteGroup>, values: &[f64]) -> Representation {
    let matrices = values
        .iter()
        .map(|&v| CMatrix::from_row_slice(1, 1, &[cr(v)]))
        .collect();
    Representation::from_matrices(group, matrices, 1e-9).unwrap()
}

/// The 2-dimensional irreducible component of the natural S_3 action on 3
/// points: permutation matrices restricted to the complement of (1,1,1).
pub fn s3_standard_rep() -> Representation {
    let s3 = Arc::new(FiniteGroup::symmetric(3).unwrap());
    let action: Vec<Vec<usize>> = s3
        .labels()
        .iter()
        .map(|l| l.bytes().map(|b| (b - b'0') as usize).collect())
        .collect();
    let natural = Representation::permutation(s3, &action).unwrap();
    let s2 = 1.0 / 2.0_f64.sqrt();
    let s6 = 1.0 / 6.0_f64.sqrt();
    let basis = CMatrix::from_row_slice(
        3,
        2,
        &[cr(s2), cr(s6), cr(-s2), cr(s6), cr(0.0), cr(-2.0 * s6)],
    );
    natural.restricted(&basis).unwrap()
}

/// The quaternion group Q_8 = {1, -1, i, -i, j, -j, k, -k} from its Cayley
/// table, indices in that listing order.
pub fn quaternion_group() -> FiniteGroup {
    // encode ±{1,i,j,k} as (sign, axis) with axis 0..4 ↦ 1,i,j,k
    let idx = |sign: bool, axis: usize| axis * 2 + usize::from(sign);
    let mul = |a: usize, b: usize| -> usize {
        let (sa, xa) = (a % 2 == 1, a / 2);
        let (sb, xb) = (b % 2 == 1, b / 2);
        // quaternion unit multiplication table for axes 1,i,j,k
        let (s, x) = match (xa, xb) {
            (0, x) => (false, x),
            (x, 0) => (false, x),
            (1, 1) => (true, 0),
            (2, 2) => (true, 0),
            (3, 3) => (true, 0),
            (1, 2) => (false, 3),
            (2, 1) => (true, 3),
            (2, 3) => (false, 1),
            (3, 2) => (true, 1),
            (3, 1) => (false, 2),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        };
        idx(s ^ sa ^ sb, x)
    };
    let labels: Vec<String> = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let table: Vec<Vec<usize>> = (0..8)
        .map(|a| (0..8).map(|b| mul(a, b)).collect())
        .collect();
    FiniteGroup::from_cayley_table(labels, table).unwrap()
}

//! Exact finite-group arithmetic over explicit multiplication tables.
//!
//! A [`FiniteGroup`] stores one row per element: `table[g][h]` is the index
//! of the product `g·h`. Element order is fixed at construction and is part
//! of the serialized format; everything downstream (representation matrices,
//! twirling sums) indexes by it. Every constructor funnels through the same
//! validation: Latin-square check, identity and inverses, associativity
//! (exhaustive up to order 200, seeded triple sampling above).

use crate::error::TwirlError;
use crate::seeding;
use crate::Result;
use rand::Rng;

/// Hard cap on group order; keeps table storage and |G|-sized sums tractable.
pub const MAX_ORDER: usize = 10_000;
/// Largest n accepted by the symmetric-group builder (|S_6| = 720).
pub const MAX_SYMMETRIC_N: usize = 6;
/// Orders up to this bound get exhaustive associativity checking; above it,
/// at least 10·order² seeded random triples are tested instead.
const EXHAUSTIVE_ASSOC_BOUND: usize = 200;

/// A finite group given by labels and a full Cayley table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    /// Row-major order×order: entry at g*order + h is the index of g·h.
    table: Vec<u32>,
    order: usize,
    identity: usize,
    inverses: Vec<usize>,
}

/// Partition of a group's elements into conjugacy classes.
///
/// Classes are sorted by their smallest member, which doubles as the class
/// representative; each class lists its members in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyClasses {
    pub classes: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
}

impl ConjugacyClasses {
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    /// Class index of each element.
    pub fn class_of(&self, order: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; order];
        for (c, class) in self.classes.iter().enumerate() {
            for &g in class {
                of[g] = c;
            }
        }
        of
    }
}

impl FiniteGroup {
    /// Cyclic group ℤ_n under addition mod n.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TwirlError::InvalidParameter(
                "cyclic group needs n >= 1".into(),
            ));
        }
        check_order_cap(n)?;
        let labels = (0..n).map(|i| i.to_string()).collect();
        let table = build_table(n, |g, h| (g + h) % n);
        Self::validated(labels, table, n)
    }

    /// Dihedral group D_n of order 2n: rotations r0..r{n-1} first, then
    /// reflections sr0..sr{n-1}, where srA stands for s·r^a and s·r·s = r⁻¹.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(TwirlError::InvalidParameter(
                "dihedral group needs n >= 2".into(),
            ));
        }
        check_order_cap(2 * n)?;
        let mut labels: Vec<String> = (0..n).map(|a| format!("r{a}")).collect();
        labels.extend((0..n).map(|a| format!("sr{a}")));
        // Element ε·n + a encodes s^ε r^a.
        let table = build_table(2 * n, |g, h| {
            let (eg, a) = (g / n, g % n);
            let (eh, b) = (h / n, h % n);
            // s^i r^a · s^j r^b = s^{i+j} r^{(-1)^j a + b}
            let exp = if eh == 0 { (a + b) % n } else { (n + b - a) % n };
            ((eg + eh) % 2) * n + exp
        });
        Self::validated(labels, table, 2 * n)
    }

    /// Symmetric group S_n with elements enumerated in lexicographic
    /// one-line order; table entry g·h is the composition g∘h.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TwirlError::InvalidParameter(
                "symmetric group needs n >= 1".into(),
            ));
        }
        if n > MAX_SYMMETRIC_N {
            return Err(TwirlError::SizeLimit(format!(
                "symmetric group builder accepts n <= {MAX_SYMMETRIC_N}, got {n}"
            )));
        }
        let perms = lexicographic_permutations(n);
        let order = perms.len();
        let labels: Vec<String> = perms.iter().map(|p| permutation_label(p)).collect();
        let index_of = |p: &[u8]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
        let table = build_table(order, |g, h| {
            let composed: Vec<u8> = (0..n).map(|x| perms[g][perms[h][x] as usize]).collect();
            index_of(&composed)
        });
        Self::validated(labels, table, order)
    }

    /// Direct product G×H with component-wise multiplication. Element
    /// a·|H| + b encodes the pair (a, b).
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<Self> {
        let order = g.order * h.order;
        check_order_cap(order)?;
        let mut labels = Vec::with_capacity(order);
        for a in 0..g.order {
            for b in 0..h.order {
                labels.push(format!("({},{})", g.labels[a], h.labels[b]));
            }
        }
        let table = build_table(order, |x, y| {
            let (a1, b1) = (x / h.order, x % h.order);
            let (a2, b2) = (y / h.order, y % h.order);
            g.mul(a1, a2) * h.order + h.mul(b1, b2)
        });
        Self::validated(labels, table, order)
    }

    /// Build and fully validate a group from an explicit Cayley table.
    pub fn from_cayley_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let order = table.len();
        if order == 0 {
            return Err(TwirlError::InvalidTable("empty table".into()));
        }
        check_order_cap(order)?;
        if labels.len() != order {
            return Err(TwirlError::InvalidParameter(format!(
                "{} labels for a table of order {order}",
                labels.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(TwirlError::InvalidParameter(format!(
                    "duplicate element label {a:?}"
                )));
            }
        }
        let mut flat = Vec::with_capacity(order * order);
        for (g, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(TwirlError::InvalidTable(format!(
                    "row {g} has length {} in a table of order {order}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= order {
                    return Err(TwirlError::InvalidTable(format!(
                        "entry {v} out of range in row {g}"
                    )));
                }
                flat.push(v as u32);
            }
        }
        Self::validated(labels, flat, order)
    }

    fn validated(labels: Vec<String>, table: Vec<u32>, order: usize) -> Result<Self> {
        // Latin square: each row and column hits every index exactly once.
        for g in 0..order {
            let mut row_seen = vec![false; order];
            let mut col_seen = vec![false; order];
            for h in 0..order {
                let r = table[g * order + h] as usize;
                let c = table[h * order + g] as usize;
                if row_seen[r] {
                    return Err(TwirlError::InvalidTable(format!(
                        "row {g} repeats entry {r}"
                    )));
                }
                if col_seen[c] {
                    return Err(TwirlError::InvalidTable(format!(
                        "column {g} repeats entry {c}"
                    )));
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }

        let identity = (0..order)
            .find(|&e| (0..order).all(|g| table[e * order + g] as usize == g && table[g * order + e] as usize == g))
            .ok_or_else(|| TwirlError::NotAGroup("no two-sided identity".into()))?;

        let mut inverses = vec![0usize; order];
        for g in 0..order {
            let inv = (0..order)
                .find(|&h| {
                    table[g * order + h] as usize == identity
                        && table[h * order + g] as usize == identity
                })
                .ok_or_else(|| {
                    TwirlError::NotAGroup(format!("element {:?} has no two-sided inverse", labels[g]))
                })?;
            inverses[g] = inv;
        }

        let check = |g: usize, h: usize, k: usize| -> Result<()> {
            let gh = table[g * order + h] as usize;
            let hk = table[h * order + k] as usize;
            if table[gh * order + k] != table[g * order + hk] {
                return Err(TwirlError::NotAGroup(format!(
                    "associativity fails at ({:?}, {:?}, {:?})",
                    labels[g], labels[h], labels[k]
                )));
            }
            Ok(())
        };
        if order <= EXHAUSTIVE_ASSOC_BOUND {
            for g in 0..order {
                for h in 0..order {
                    for k in 0..order {
                        check(g, h, k)?;
                    }
                }
            }
        } else {
            let mut rng = seeding::child_rng(order as u64, "associativity-sample");
            for _ in 0..10 * order * order {
                check(
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                    rng.gen_range(0..order),
                )?;
            }
        }

        Ok(FiniteGroup {
            labels,
            table,
            order,
            identity,
            inverses,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h] as usize
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Table row for element g, as plain indices.
    pub fn table_row(&self, g: usize) -> Vec<usize> {
        (0..self.order).map(|h| self.mul(g, h)).collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|g| (g..self.order).all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    /// Smallest k ≥ 1 with g^k = identity.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Partition into conjugacy classes under h ↦ g·h·g⁻¹.
    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        let mut class_of = vec![usize::MAX; self.order];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for h in 0..self.order {
            if class_of[h] != usize::MAX {
                continue;
            }
            let idx = classes.len();
            let mut members: Vec<usize> = (0..self.order)
                .map(|g| self.mul(self.mul(g, h), self.inverses[g]))
                .collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                class_of[m] = idx;
            }
            classes.push(members);
        }
        let representatives = classes.iter().map(|c| c[0]).collect();
        ConjugacyClasses {
            classes,
            representatives,
        }
    }
}

fn check_order_cap(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(TwirlError::SizeLimit(format!(
            "group order {order} exceeds cap {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn build_table(order: usize, mul: impl Fn(usize, usize) -> usize) -> Vec<u32> {
    let mut table = Vec::with_capacity(order * order);
    for g in 0..order {
        for h in 0..order {
            table.push(mul(g, h) as u32);
        }
    }
    table
}

/// All permutations of {0..n-1} in lexicographic one-line order.
fn lexicographic_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut current: Vec<u8> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                current.push(x as u8);
                rec(n, current, used, out);
                current.pop();
                used[x] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

fn permutation_label(p: &[u8]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_basics() {
        assert!(FiniteGroup::cyclic(0).is_err());
        let g1 = FiniteGroup::cyclic(1).unwrap();
        assert_eq!(g1.order(), 1);
        assert_eq!(g1.identity(), 0);

        let g2 = FiniteGroup::cyclic(2).unwrap();
        assert_eq!(g2.inverse(0), 0);
        assert_eq!(g2.inverse(1), 1);

        let g4 = FiniteGroup::cyclic(4).unwrap();
        assert_eq!(g4.inverse(1), 3);
        assert_eq!(g4.mul(3, 2), 1);
    }

    #[test]
    fn dihedral_klein_four() {
        let d2 = FiniteGroup::dihedral(2).unwrap();
        assert_eq!(d2.order(), 4);
        for g in 0..4 {
            assert_eq!(d2.inverse(g), g);
        }
        assert!(d2.is_abelian());
    }

    #[test]
    fn dihedral_class_structure() {
        // Frozen class data for D_3 (= S_3): sizes 1, 2, 3.
        let d3 = FiniteGroup::dihedral(3).unwrap();
        assert_eq!(d3.order(), 6);
        let cc = d3.conjugacy_classes();
        let mut sizes: Vec<usize> = cc.classes.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);

        let d4 = FiniteGroup::dihedral(4).unwrap();
        assert_eq!(d4.conjugacy_classes().count(), 5);
    }

    #[test]
    fn dihedral_relations() {
        // s r s⁻¹ = r⁻¹ and reflections are involutions, for several n.
        for n in 2..=6 {
            let d = FiniteGroup::dihedral(n).unwrap();
            let r = 1 % n; // rotation by one step (identity when n = 1)
            let s = n;
            assert_eq!(d.mul(s, s), d.identity());
            let conj = d.mul(d.mul(s, r), d.inverse(s));
            assert_eq!(conj, d.inverse(r));
        }
    }

    #[test]
    fn symmetric_small() {
        let s2 = FiniteGroup::symmetric(2).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        assert_eq!(s2.table_row(0), z2.table_row(0));
        assert_eq!(s2.table_row(1), z2.table_row(1));

        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        let cc = s3.conjugacy_classes();
        assert_eq!(cc.count(), 3);
        let mut sizes: Vec<usize> = cc.classes.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);

        assert!(matches!(
            FiniteGroup::symmetric(7),
            Err(TwirlError::SizeLimit(_))
        ));
    }

    #[test]
    fn symmetric_composition_convention() {
        // In S_3 with lexicographic one-line enumeration, element "120" maps
        // 0→1, 1→2, 2→0. Composing it with itself gives "201".
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let p120 = s3.labels().iter().position(|l| l == "120").unwrap();
        let p201 = s3.labels().iter().position(|l| l == "201").unwrap();
        assert_eq!(s3.mul(p120, p120), p201);
        assert_eq!(s3.element_order(p120), 3);
    }

    #[test]
    fn direct_products() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let k4 = FiniteGroup::direct_product(&z2, &z2).unwrap();
        assert_eq!(k4.order(), 4);
        for g in 0..4 {
            assert_eq!(k4.inverse(g), g);
        }

        // ℤ_2 × ℤ_3 is cyclic of order 6: some element has order 6.
        let z6ish = FiniteGroup::direct_product(&z2, &z3).unwrap();
        let max_order = (0..6).map(|g| z6ish.element_order(g)).max().unwrap();
        assert_eq!(max_order, 6);

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let s3s3 = FiniteGroup::direct_product(&s3, &s3).unwrap();
        assert_eq!(s3s3.order(), 36);
        // Class count multiplies: 3 × 3.
        assert_eq!(s3s3.conjugacy_classes().count(), 9);
    }

    #[test]
    fn cayley_table_validation() {
        let t = FiniteGroup::from_cayley_table(vec!["e".into()], vec![vec![0]]).unwrap();
        assert_eq!(t.order(), 1);

        let z2 = FiniteGroup::from_cayley_table(
            vec!["e".into(), "a".into()],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        assert_eq!(z2.inverse(1), 1);

        assert!(matches!(
            FiniteGroup::from_cayley_table(
                vec!["e".into(), "a".into()],
                vec![vec![0, 1], vec![1, 1]],
            ),
            Err(TwirlError::InvalidTable(_))
        ));

        // Relabeled ℤ_3 whose identity sits at index 1; identity detection
        // must find it rather than assume index 0.
        let relabeled = FiniteGroup::from_cayley_table(
            vec!["a".into(), "e".into(), "b".into()],
            vec![vec![2, 0, 1], vec![0, 1, 2], vec![1, 2, 0]],
        )
        .unwrap();
        assert_eq!(relabeled.identity(), 1);
    }

    #[test]
    fn nonassociative_latin_square_rejected() {
        // Order-5 Latin square with identity (row/col 0) failing associativity:
        // the loop from the Cayley table of the smallest nonassociative loop.
        let table = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let labels = (0..5).map(|i| i.to_string()).collect();
        match FiniteGroup::from_cayley_table(labels, table) {
            Err(TwirlError::NotAGroup(msg)) => assert!(msg.contains("associativity")),
            other => panic!("expected not-a-group, got {other:?}"),
        }
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let z6 = FiniteGroup::cyclic(6).unwrap();
        let cc = z6.conjugacy_classes();
        assert_eq!(cc.count(), 6);
        assert!(cc.classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn class_sizes_divide_order() {
        for g in [
            FiniteGroup::dihedral(5).unwrap(),
            FiniteGroup::symmetric(4).unwrap(),
        ] {
            let cc = g.conjugacy_classes();
            for c in &cc.classes {
                assert_eq!(g.order() % c.len(), 0);
            }
            let total: usize = cc.classes.iter().map(|c| c.len()).sum();
            assert_eq!(total, g.order());
        }
    }
}

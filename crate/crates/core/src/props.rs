//! Decision procedures: MDS, involutory, orthogonal, and the diagonal
//! scaling relations behind semi-involutory (`A^-1 = D1 A D2`) and
//! semi-orthogonal (`A^-T = D1 A D2`) matrices.
//!
//! Associated diagonal pairs are only determined up to one nonzero scalar
//! per connected component of the bipartite graph on rows and columns whose
//! edges are the nonzero entries. [`diagonal_scaling_solve`] returns the
//! canonical representative with `d1 = 1` at each component's anchor row.
//! For circulants there is always a representative with `D1^n = k1 I` and
//! `D2^n = k2 I`; [`DiagonalPair::power_normalized`] finds it. On a
//! connected pattern (every MDS matrix) the two coincide up to one global
//! scalar, which leaves traces' vanishing and periodicity unchanged.

use std::collections::VecDeque;

use crate::circulant::{as_circulant, Circulant};
use crate::error::{Error, Result};
use crate::field::{Element, Field};
use crate::matrix::{det_in_place, DiagonalMatrix, Matrix};

/// Outcome of the MDS test. `witness` holds the row and column sets of the
/// first singular square submatrix found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsVerdict {
    pub is_mds: bool,
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

/// Checks every square submatrix, smallest first, stopping at the first
/// singular one.
pub fn is_mds(a: &Matrix) -> Result<MdsVerdict> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("MDS test needs a square matrix".into()));
    }
    let n = a.rows();
    let f = a.field();
    // 1x1 layer: zero entries
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j).is_zero() {
                return Ok(MdsVerdict {
                    is_mds: false,
                    witness: Some((vec![i], vec![j])),
                });
            }
        }
    }
    let mut buf = vec![Element::ZERO; n * n];
    for size in 2..=n {
        let subsets = combinations(n, size);
        for rows in &subsets {
            for cols in &subsets {
                for (r, &i) in rows.iter().enumerate() {
                    for (c, &j) in cols.iter().enumerate() {
                        buf[r * size + c] = a.get(i, j);
                    }
                }
                if det_in_place(f, &mut buf[..size * size], size).is_zero() {
                    return Ok(MdsVerdict {
                        is_mds: false,
                        witness: Some((rows.clone(), cols.clone())),
                    });
                }
            }
        }
    }
    Ok(MdsVerdict {
        is_mds: true,
        witness: None,
    })
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// `A^2 = I`.
pub fn is_involutory(a: &Matrix) -> bool {
    a.is_square() && a.mul(a).map(|sq| sq.is_identity()).unwrap_or(false)
}

/// `A A^T = A^T A = I`.
pub fn is_orthogonal(a: &Matrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let t = a.transpose();
    let left = a.mul(&t).map(|m| m.is_identity()).unwrap_or(false);
    left && t.mul(a).map(|m| m.is_identity()).unwrap_or(false)
}

/// Which row of each connected component gets `d1 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Anchor {
    #[default]
    First,
    Last,
}

/// A connected block of the nonzero pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Row whose `d1` entry was fixed during solving, if the block has rows.
    pub anchor: Option<usize>,
}

/// Nonsingular diagonals `(D1, D2)` with `B = D1 A D2` for some `(A, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalPair {
    pub d1: DiagonalMatrix,
    pub d2: DiagonalMatrix,
    components: Vec<Component>,
}

impl DiagonalPair {
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn anchors(&self) -> Vec<usize> {
        self.components.iter().filter_map(|c| c.anchor).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// `(c D1, c^-1 D2)`, the scalar freedom of the relation.
    pub fn rescaled(&self, c: Element) -> Result<DiagonalPair> {
        let f = self.d1.field();
        let c_inv = f.inv(c)?;
        Ok(DiagonalPair {
            d1: self.d1.scale(c),
            d2: self.d2.scale(c_inv),
            components: self.components.clone(),
        })
    }

    /// Whether `b = D1 a D2` holds entrywise.
    pub fn relates(&self, a: &Matrix, b: &Matrix) -> bool {
        a.sandwich(&self.d1, &self.d2).map(|m| &m == b).unwrap_or(false)
    }

    /// Rescales each component so that `D1^n` and `D2^n` are both scalar
    /// matrices, with the first component left untouched. `None` if no
    /// per-component rescaling achieves that.
    pub fn power_normalized(&self) -> Option<DiagonalPair> {
        let f = self.d1.field().clone();
        let n = self.d1.len() as u64;
        let pw = |x: Element| f.pow(x, n);
        let common = |xs: &mut dyn Iterator<Item = Element>| -> Option<Option<Element>> {
            let mut seen = None;
            for x in xs {
                match seen {
                    None => seen = Some(x),
                    Some(s) if s != x => return None,
                    _ => {}
                }
            }
            Some(seen)
        };
        // per-component constant n-th powers of d1 and d2
        let mut powers = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let dp = common(&mut comp.rows.iter().map(|&i| pw(self.d1.get(i))))?;
            let ep = common(&mut comp.cols.iter().map(|&j| pw(self.d2.get(j))))?;
            powers.push((dp, ep));
        }
        let mut d1 = self.d1.entries().to_vec();
        let mut d2 = self.d2.entries().to_vec();
        let (mut k1, mut k2) = (None, None);
        for (comp, &(dp, ep)) in self.components.iter().zip(&powers) {
            // scale factor lambda: d -> lambda d, e -> e / lambda
            let fits = |lambda: Element| -> bool {
                let ln = pw(lambda);
                let ok1 = match (k1, dp) {
                    (Some(k), Some(p)) => f.mul(ln, p) == k,
                    _ => true,
                };
                let ok2 = match (k2, ep) {
                    (Some(k), Some(p)) => f.mul(ln, k) == p,
                    _ => true,
                };
                ok1 && ok2
            };
            let lambda = if fits(Element::ONE) {
                Element::ONE
            } else {
                f.nonzero_elements().find(|&l| fits(l))?
            };
            let lambda_inv = f.inv(lambda).ok()?;
            for &i in &comp.rows {
                d1[i] = f.mul(lambda, d1[i]);
            }
            for &j in &comp.cols {
                d2[j] = f.mul(lambda_inv, d2[j]);
            }
            if k1.is_none() {
                k1 = dp.map(|p| f.mul(pw(lambda), p));
            }
            if k2.is_none() {
                k2 = ep.map(|p| f.mul(pw(lambda_inv), p));
            }
        }
        Some(DiagonalPair {
            d1: DiagonalMatrix::from_vec_unchecked(&f, d1),
            d2: DiagonalMatrix::from_vec_unchecked(&f, d2),
            components: self.components.clone(),
        })
    }
}

/// Finds nonsingular diagonals with `b = D1 a D2`, canonicalized with
/// `d1 = 1` at the smallest row of each component.
pub fn diagonal_scaling_solve(a: &Matrix, b: &Matrix) -> Result<Option<DiagonalPair>> {
    diagonal_scaling_solve_anchored(a, b, Anchor::First)
}

pub fn diagonal_scaling_solve_anchored(
    a: &Matrix,
    b: &Matrix,
    anchor: Anchor,
) -> Result<Option<DiagonalPair>> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "scaling {}x{} onto {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.field() != b.field() {
        return Err(Error::FieldMismatch);
    }
    let f = a.field();
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j).is_zero() != b.get(i, j).is_zero() {
                return Ok(None);
            }
        }
    }

    // d1 = rows, d2 = cols; None = not yet assigned
    let mut d: Vec<Option<Element>> = vec![None; n];
    let mut e: Vec<Option<Element>> = vec![None; n];
    let mut components = Vec::new();
    let row_order: Vec<usize> = match anchor {
        Anchor::First => (0..n).collect(),
        Anchor::Last => (0..n).rev().collect(),
    };
    for &start in &row_order {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Element::ONE);
        let mut comp = Component {
            rows: vec![start],
            cols: Vec::new(),
            anchor: Some(start),
        };
        // queue of (is_row, index)
        let mut queue = VecDeque::from([(true, start)]);
        while let Some((is_row, idx)) = queue.pop_front() {
            for other in 0..n {
                let (i, j) = if is_row { (idx, other) } else { (other, idx) };
                let (x, y) = (a.get(i, j), b.get(i, j));
                if x.is_zero() {
                    continue;
                }
                // ratio r = y / x = d_i e_j
                let r = f.div(y, x)?;
                if is_row && e[j].is_none() {
                    e[j] = Some(f.div(r, d[i].expect("row assigned"))?);
                    comp.cols.push(j);
                    queue.push_back((false, j));
                } else if !is_row && d[i].is_none() {
                    d[i] = Some(f.div(r, e[j].expect("col assigned"))?);
                    comp.rows.push(i);
                    queue.push_back((true, i));
                }
            }
        }
        comp.rows.sort_unstable();
        comp.cols.sort_unstable();
        components.push(comp);
    }
    for (j, ej) in e.iter_mut().enumerate() {
        if ej.is_none() {
            *ej = Some(Element::ONE);
            components.push(Component {
                rows: Vec::new(),
                cols: vec![j],
                anchor: None,
            });
        }
    }
    components.sort_by_key(|c| (c.rows.first().copied(), c.cols.first().copied()));
    let d1 = DiagonalMatrix::from_vec_unchecked(f, d.into_iter().map(Option::unwrap).collect());
    let d2 = DiagonalMatrix::from_vec_unchecked(f, e.into_iter().map(Option::unwrap).collect());
    let pair = DiagonalPair { d1, d2, components };
    // every edge, tree or not, must satisfy the relation
    Ok(pair.relates(a, b).then_some(pair))
}

/// `A^-T = D1 A D2`.
pub fn semi_orthogonal_check(a: &Matrix) -> Result<Option<DiagonalPair>> {
    let inv = a.inverse()?;
    semi_orthogonal_with_inverse(a, &inv)
}

/// `A^-1 = D1 A D2`.
pub fn semi_involutory_check(a: &Matrix) -> Result<Option<DiagonalPair>> {
    let inv = a.inverse()?;
    semi_involutory_with_inverse(a, &inv)
}

pub fn semi_orthogonal_with_inverse(a: &Matrix, inv: &Matrix) -> Result<Option<DiagonalPair>> {
    diagonal_scaling_solve(a, &inv.transpose())
}

pub fn semi_involutory_with_inverse(a: &Matrix, inv: &Matrix) -> Result<Option<DiagonalPair>> {
    diagonal_scaling_solve(a, inv)
}

/// `k` with `D^n = k I`, if the `n`-th powers of all entries agree.
pub fn power_scalar(d: &DiagonalMatrix, n: u64) -> Option<Element> {
    let f = d.field();
    let mut it = d.entries().iter().map(|&x| f.pow(x, n));
    let k = it.next()?;
    it.all(|x| x == k).then_some(k)
}

/// `d_i != d_{i+n}` for every `i` of an order-`2n` diagonal.
pub fn is_nonperiodic(d: &DiagonalMatrix) -> Result<bool> {
    let len = d.len();
    if len % 2 == 1 {
        return Err(Error::OddOrder(len));
    }
    let half = len / 2;
    Ok((0..half).all(|i| d.get(i) != d.get(i + half)))
}

/// Order classes of circulant semi-orthogonal matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    /// odd order
    Odd,
    /// `n = 2^d`
    Pow2,
    /// `n = 0 mod 4`, not a power of two
    Mod4Zero,
    /// `n = 2 mod 4`, `n > 2`
    Mod4Two,
}

impl Category {
    pub fn of_order(n: usize) -> Category {
        if n % 2 == 1 {
            Category::Odd
        } else if n.is_power_of_two() {
            Category::Pow2
        } else if n.is_multiple_of(4) {
            Category::Mod4Zero
        } else {
            Category::Mod4Two
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Odd => "ODD",
            Category::Pow2 => "POW2",
            Category::Mod4Zero => "MOD4_ZERO",
            Category::Mod4Two => "MOD4_TWO",
        }
    }
}

/// Result of one semi-property test.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SemiResult {
    /// Power-normalized pair when one exists, else the canonical pair.
    pub pair: Option<DiagonalPair>,
    pub k1: Option<Element>,
    pub k2: Option<Element>,
}

impl SemiResult {
    pub fn from_canonical(pair: Option<DiagonalPair>) -> SemiResult {
        let Some(pair) = pair else {
            return SemiResult::default();
        };
        let n = pair.d1.len() as u64;
        let pair = pair.power_normalized().unwrap_or(pair);
        SemiResult {
            k1: power_scalar(&pair.d1, n),
            k2: power_scalar(&pair.d2, n),
            pair: Some(pair),
        }
    }

    pub fn found(&self) -> bool {
        self.pair.is_some()
    }

    pub fn trace_d1(&self) -> Option<Element> {
        self.pair.as_ref().map(|p| p.d1.trace())
    }

    pub fn trace_d2(&self) -> Option<Element> {
        self.pair.as_ref().map(|p| p.d2.trace())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub field: Field,
    pub order: usize,
    pub first_row: Option<Vec<Element>>,
    pub category: Category,
    pub nonsingular: bool,
    pub mds: MdsVerdict,
    pub involutory: bool,
    pub orthogonal: bool,
    pub semi_involutory: SemiResult,
    pub semi_orthogonal: SemiResult,
    /// Periodicity of the semi-orthogonal diagonals, for even orders.
    pub nonperiodic_d1: Option<bool>,
    pub nonperiodic_d2: Option<bool>,
}

pub fn classify(c: &Circulant) -> Result<Classification> {
    classify_matrix(&c.build())
}

/// Runs every test on a square matrix. Singular input is recorded, not an
/// error.
pub fn classify_matrix(a: &Matrix) -> Result<Classification> {
    let mds = is_mds(a)?;
    let n = a.rows();
    let (nonsingular, si, so) = match a.inverse() {
        Ok(inv) => (
            true,
            SemiResult::from_canonical(semi_involutory_with_inverse(a, &inv)?),
            SemiResult::from_canonical(semi_orthogonal_with_inverse(a, &inv)?),
        ),
        Err(Error::Singular) => (false, SemiResult::default(), SemiResult::default()),
        Err(e) => return Err(e),
    };
    let periodicity = |d: Option<&DiagonalMatrix>| d.and_then(|d| is_nonperiodic(d).ok());
    Ok(Classification {
        field: a.field().clone(),
        order: n,
        first_row: as_circulant(a).map(|c| c.first_row().to_vec()),
        category: Category::of_order(n),
        nonsingular,
        mds,
        involutory: is_involutory(a),
        orthogonal: is_orthogonal(a),
        nonperiodic_d1: periodicity(so.pair.as_ref().map(|p| &p.d1)),
        nonperiodic_d2: periodicity(so.pair.as_ref().map(|p| &p.d2)),
        semi_involutory: si,
        semi_orthogonal: so,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(b: u16) -> Element {
        Element::from_bits(b)
    }

    fn gf(m: u32, poly: u32) -> Field {
        Field::new(m, poly).unwrap()
    }

    fn circ(f: &Field, row: &[u16]) -> Matrix {
        Circulant::new(f, row.iter().map(|&b| e(b)).collect()).unwrap().build()
    }

    /// Every square submatrix, no early exit.
    fn mds_by_definition(a: &Matrix) -> bool {
        let n = a.rows();
        (1..=n).all(|k| {
            let subsets = combinations(n, k);
            subsets.iter().all(|r| {
                subsets
                    .iter()
                    .all(|c| !a.submatrix(r, c).unwrap().det().unwrap().is_zero())
            })
        })
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(5, 5), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn aes_is_mds_only() {
        let a = circ(&gf(8, 0x11B), &[2, 3, 1, 1]);
        assert!(is_mds(&a).unwrap().is_mds);
        assert!(!is_involutory(&a));
        assert!(!is_orthogonal(&a));
    }

    #[test]
    fn identity_is_not_mds() {
        let f = gf(3, 0xB);
        let i = Matrix::identity(&f, 3);
        let v = is_mds(&i).unwrap();
        assert!(!v.is_mds);
        let (r, c) = v.witness.unwrap();
        assert_eq!(i.submatrix(&r, &c).unwrap().det().unwrap(), Element::ZERO);
        assert_eq!((r.len(), c.len()), (1, 1));
        assert!(is_involutory(&i) && is_orthogonal(&i));
        // n = 1
        assert!(is_mds(&Matrix::identity(&f, 1)).unwrap().is_mds);
        assert!(!is_involutory(&Matrix::new(&f, 1, 1, vec![e(2)]).unwrap()));
    }

    #[test]
    fn two_by_two_mds_over_gf4() {
        let f = gf(2, 0x7);
        for a in f.elements() {
            for b in f.elements() {
                let m = circ(&f, &[a.bits(), b.bits()]);
                // 1x1 entries and the 2x2 determinant a^2 + b^2
                let oracle = !a.is_zero() && !b.is_zero() && !(f.square(a) + f.square(b)).is_zero();
                assert_eq!(is_mds(&m).unwrap().is_mds, oracle, "({a:?}, {b:?})");
                assert_eq!(oracle, !a.is_zero() && !b.is_zero() && a != b);
            }
        }
    }

    #[test]
    fn mds_matches_definition_on_small_space() {
        let f = gf(3, 0xB);
        for x in 0..512u16 {
            let m = circ(&f, &[x & 7, x >> 3 & 7, x >> 6 & 7]);
            let v = is_mds(&m).unwrap();
            assert_eq!(v.is_mds, mds_by_definition(&m));
            assert_eq!(v.is_mds, v.witness.is_none());
        }
    }

    #[test]
    fn identity_pairs() {
        let f = gf(8, 0x11D);
        let i = Matrix::identity(&f, 3);
        let pair = diagonal_scaling_solve(&i, &i).unwrap().unwrap();
        assert_eq!(pair.d1, DiagonalMatrix::identity(&f, 3));
        assert_eq!(pair.d2, DiagonalMatrix::identity(&f, 3));
        assert_eq!(pair.anchors(), vec![0, 1, 2]);
        let so = semi_orthogonal_check(&i).unwrap().unwrap();
        assert_eq!(so.d1, DiagonalMatrix::identity(&f, 3));
        let si = semi_involutory_check(&i).unwrap().unwrap();
        assert_eq!(si.d2, DiagonalMatrix::identity(&f, 3));
    }

    #[test]
    fn zero_pattern_mismatch() {
        let f = gf(3, 0xB);
        let a = Matrix::new(&f, 2, 2, vec![e(1), e(0), e(1), e(1)]).unwrap();
        let b = Matrix::new(&f, 2, 2, vec![e(1), e(1), e(1), e(1)]).unwrap();
        assert_eq!(diagonal_scaling_solve(&a, &b), Ok(None));
        let wide = Matrix::zeros(&f, 2, 3);
        assert!(matches!(diagonal_scaling_solve(&a, &wide), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn inconsistent_cycle_is_rejected() {
        // rank-one ratio pattern broken in one entry
        let f = gf(3, 0xB);
        let a = Matrix::new(&f, 2, 2, vec![e(1); 4]).unwrap();
        let b = Matrix::new(&f, 2, 2, vec![e(1), e(1), e(1), e(2)]).unwrap();
        assert_eq!(diagonal_scaling_solve(&a, &b), Ok(None));
    }

    #[test]
    fn example_one_scaling() {
        let f = gf(8, 0x11D);
        let a = circ(&f, &[2, 3, 6]);
        let target = a.inverse().unwrap().transpose();
        let pair = diagonal_scaling_solve(&a, &target).unwrap().unwrap();
        assert!(pair.is_connected());
        assert_eq!(pair.d1.get(0), Element::ONE);
        let c = e(0xE2);
        let scaled = pair.rescaled(c).unwrap();
        assert_eq!(scaled.d1, DiagonalMatrix::scalar(&f, e(0xE2), 3));
        assert_eq!(scaled.d2, DiagonalMatrix::scalar(&f, e(0x5A), 3));
        assert_eq!(power_scalar(&scaled.d1, 3), Some(f.pow(e(0xE2), 3)));
    }

    #[test]
    fn singular_semi_checks() {
        let f = gf(2, 0x7);
        let a = circ(&f, &[1, 1, 0]);
        assert_eq!(semi_orthogonal_check(&a), Err(Error::Singular));
        assert_eq!(semi_involutory_check(&a), Err(Error::Singular));
    }

    #[test]
    fn power_scalar_cases() {
        let f = gf(8, 0x11B);
        let c = e(0x53);
        assert_eq!(power_scalar(&DiagonalMatrix::scalar(&f, c, 4), 4), Some(f.pow(c, 4)));
        for a in f.nonzero_elements() {
            let d = DiagonalMatrix::new(&f, vec![Element::ONE, a]).unwrap();
            assert_eq!(power_scalar(&d, 2).is_some(), a == Element::ONE);
        }
    }

    #[test]
    fn periodicity() {
        let f = gf(3, 0xB);
        let d = |v: &[u16]| DiagonalMatrix::new(&f, v.iter().map(|&x| e(x)).collect()).unwrap();
        assert_eq!(is_nonperiodic(&d(&[5, 5])), Ok(false));
        assert_eq!(is_nonperiodic(&d(&[1, 2, 3, 4])), Ok(true));
        assert_eq!(is_nonperiodic(&d(&[1, 2, 3, 2])), Ok(false));
        assert_eq!(is_nonperiodic(&d(&[1, 2, 1, 4])), Ok(false));
        assert_eq!(is_nonperiodic(&d(&[6; 6])), Ok(false));
        assert_eq!(is_nonperiodic(&d(&[1, 2, 3])), Err(Error::OddOrder(3)));
    }

    #[test]
    fn categories() {
        assert_eq!(Category::of_order(4), Category::Pow2);
        assert_eq!(Category::of_order(2), Category::Pow2);
        assert_eq!(Category::of_order(6), Category::Mod4Two);
        assert_eq!(Category::of_order(12), Category::Mod4Zero);
        assert_eq!(Category::of_order(5), Category::Odd);
        assert_eq!(Category::of_order(1), Category::Odd);
    }

    #[test]
    fn classify_example_two() {
        let f = gf(8, 0x11D);
        let c = Circulant::from_hex(&f, "0x01,0x0B,0x0B,0x0A,0x99").unwrap();
        let cl = classify(&c).unwrap();
        assert_eq!(cl.category, Category::Odd);
        assert!(cl.mds.is_mds);
        assert!(cl.nonsingular);
        assert!(cl.semi_orthogonal.found());
        // both traces vanish for this row, whatever the scaling
        assert!(cl.semi_orthogonal.trace_d1().unwrap().is_zero());
        assert!(cl.semi_orthogonal.trace_d2().unwrap().is_zero());
        assert!(cl.semi_orthogonal.k1.is_some() && cl.semi_orthogonal.k2.is_some());
        assert_eq!(cl.nonperiodic_d1, None);
    }

    #[test]
    fn classify_singular() {
        let f = gf(2, 0x7);
        let cl = classify(&Circulant::from_hex(&f, "0x1,0x1").unwrap()).unwrap();
        assert!(!cl.nonsingular);
        assert!(!cl.mds.is_mds);
        assert!(!cl.semi_orthogonal.found());
        assert_eq!(cl.category, Category::Pow2);
    }

    #[test]
    fn disconnected_pattern_normalization() {
        // circulant(a, 0, b, 0) splits into even and odd index blocks
        let f = gf(3, 0xB);
        for a in f.nonzero_elements() {
            for b in f.nonzero_elements() {
                let m = circ(&f, &[a.bits(), 0, b.bits(), 0]);
                let Ok(Some(pair)) = semi_orthogonal_check(&m) else {
                    continue;
                };
                assert_eq!(pair.components().len(), 2);
                let norm = pair.power_normalized().expect("circulant pair normalizes");
                let target = m.inverse().unwrap().transpose();
                assert!(norm.relates(&m, &target));
                assert!(power_scalar(&norm.d1, 4).is_some());
                assert!(power_scalar(&norm.d2, 4).is_some());
                assert!(norm.d1.trace().is_zero() && norm.d2.trace().is_zero());
            }
        }
    }

    fn mds_circulant_gf8(n: usize) -> impl Strategy<Value = Matrix> {
        let f = gf(8, 0x11D);
        proptest::collection::vec(1u16..256, n).prop_map(move |row| circ(&f, &row))
    }

    proptest! {
        #[test]
        fn sandwich_exactness_and_scalar_freedom(
            a in (2usize..6).prop_flat_map(mds_circulant_gf8),
            c in 1u16..256,
        ) {
            let f = a.field().clone();
            let Ok(inv) = a.inverse() else { return Ok(()); };
            for target in [inv.clone(), inv.transpose()] {
                if let Some(pair) = diagonal_scaling_solve(&a, &target).unwrap() {
                    prop_assert!(pair.d1.is_nonsingular() && pair.d2.is_nonsingular());
                    prop_assert!(pair.relates(&a, &target));
                    let moved = pair.rescaled(e(c)).unwrap();
                    prop_assert!(moved.relates(&a, &target));
                    let last = diagonal_scaling_solve_anchored(&a, &target, Anchor::Last)
                        .unwrap()
                        .unwrap();
                    // no zero entries, so a single component and a constant quotient
                    let q = f.div(last.d1.get(0), pair.d1.get(0)).unwrap();
                    for i in 0..a.rows() {
                        prop_assert_eq!(last.d1.get(i), f.mul(q, pair.d1.get(i)));
                        prop_assert_eq!(pair.d2.get(i), f.mul(q, last.d2.get(i)));
                    }
                    let n = a.rows() as u64;
                    prop_assert!(power_scalar(&pair.d1, n).is_some());
                    prop_assert!(power_scalar(&pair.d2, n).is_some());
                    prop_assert_eq!(pair.d1.trace().is_zero(), last.d1.trace().is_zero());
                }
            }
        }

        #[test]
        fn mds_is_invariant_under_scaling_and_transpose(
            a in (2usize..5).prop_flat_map(mds_circulant_gf8),
            d in proptest::collection::vec(1u16..256, 8),
        ) {
            let f = a.field().clone();
            let n = a.rows();
            let d1 = DiagonalMatrix::new(&f, d[..n].iter().map(|&x| e(x)).collect()).unwrap();
            let d2 = DiagonalMatrix::new(&f, d[4..4 + n].iter().map(|&x| e(x)).collect()).unwrap();
            let base = is_mds(&a).unwrap().is_mds;
            prop_assert_eq!(is_mds(&a.transpose()).unwrap().is_mds, base);
            prop_assert_eq!(is_mds(&a.sandwich(&d1, &d2).unwrap()).unwrap().is_mds, base);
        }
    }
}

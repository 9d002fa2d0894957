//! Circulant construction and the structural sums used by the trace
//! arguments.

use crate::error::{Error, Result};
use crate::field::{Element, Field};
use crate::matrix::Matrix;

/// `circulant(c_0, ..., c_{n-1})`, entry `(i, j)` being `c_{(j - i) mod n}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Circulant {
    first_row: Vec<Element>,
    field: Field,
}

impl Circulant {
    pub fn new(field: &Field, first_row: Vec<Element>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::EmptyRow);
        }
        if let Some(bad) = first_row.iter().find(|&&e| !field.contains(e)) {
            return Err(Error::OutOfRange {
                value: format!("{:#x}", bad.bits()),
                m: field.degree(),
            });
        }
        Ok(Circulant {
            first_row,
            field: field.clone(),
        })
    }

    /// Parses `0x02,0x03,0x06`.
    pub fn from_hex(field: &Field, list: &str) -> Result<Self> {
        Circulant::new(field, field.parse_list(list)?)
    }

    pub fn order(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[Element] {
        &self.first_row
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn build(&self) -> Matrix {
        let n = self.order();
        Matrix::from_fn(&self.field, n, n, |i, j| self.first_row[(j + n - i) % n])
    }

    /// Eigenvalue of the all-ones vector.
    pub fn row_sum(&self) -> Element {
        self.first_row.iter().sum()
    }

    /// `(a_0 + a_2 + ... + a_{n-2}, a_1 + a_3 + ... + a_{n-1})`: the row sums
    /// of the two interleaved circulant blocks of half order.
    pub fn interleaved_sums(&self) -> Result<(Element, Element)> {
        let n = self.order();
        if n % 2 == 1 {
            return Err(Error::OddOrder(n));
        }
        let even = self.first_row.iter().step_by(2).sum();
        let odd = self.first_row.iter().skip(1).step_by(2).sum();
        Ok((even, odd))
    }

    /// First row of the transpose: `(c_0, c_{n-1}, ..., c_1)`.
    pub fn transposed(&self) -> Circulant {
        let n = self.order();
        let row = (0..n).map(|j| self.first_row[(n - j) % n]).collect();
        Circulant {
            first_row: row,
            field: self.field.clone(),
        }
    }
}

/// True iff `a[i][j]` depends only on `(j - i) mod n`.
pub fn is_circulant(a: &Matrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    (1..n).all(|i| (0..n).all(|j| a.get(i, j) == a.get(0, (j + n - i) % n)))
}

/// Recovers the defining row of a circulant matrix.
pub fn as_circulant(a: &Matrix) -> Option<Circulant> {
    is_circulant(a).then(|| Circulant {
        first_row: a.row(0).to_vec(),
        field: a.field().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(b: u16) -> Element {
        Element::from_bits(b)
    }

    #[test]
    fn aes_matrix() {
        let f = Field::new(8, 0x11B).unwrap();
        let c = Circulant::from_hex(&f, "0x02,0x03,0x01,0x01").unwrap();
        let m = c.build();
        let expected = [
            [2, 3, 1, 1],
            [1, 2, 3, 1],
            [1, 1, 2, 3],
            [3, 1, 1, 2],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(m.get(i, j), e(v));
            }
        }
        assert!(is_circulant(&m));
        assert_eq!(c.row_sum(), e(0x01));
        assert_eq!(c.interleaved_sums(), Ok((e(0x03), e(0x02))));
    }

    #[test]
    fn example_one_layout() {
        let f = Field::new(8, 0x11D).unwrap();
        let c = Circulant::from_hex(&f, "0x02,0x03,0x06").unwrap();
        let m = c.build();
        // second row is (c_2, c_0, c_1)
        assert_eq!(m.row(1), &[e(0x06), e(0x02), e(0x03)]);
        assert_eq!(m.row(2), &[e(0x03), e(0x06), e(0x02)]);
        assert_eq!(c.interleaved_sums(), Err(Error::OddOrder(3)));
    }

    #[test]
    fn degenerate_orders() {
        let f = Field::new(2, 0x7).unwrap();
        let c = Circulant::new(&f, vec![e(3)]).unwrap();
        assert_eq!(c.build(), Matrix::new(&f, 1, 1, vec![e(3)]).unwrap());
        assert_eq!(c.row_sum(), e(3));
        assert_eq!(Circulant::new(&f, vec![]), Err(Error::EmptyRow));
        let ones = Circulant::new(&f, vec![e(1), e(1)]).unwrap();
        assert_eq!(ones.row_sum(), Element::ZERO);
        assert_eq!(ones.build().det(), Ok(Element::ZERO));
        assert_eq!(
            Circulant::new(&f, vec![e(1), e(2), e(1), e(2)]).unwrap().interleaved_sums(),
            Ok((Element::ZERO, Element::ZERO))
        );
    }

    #[test]
    fn circulant_detection() {
        let f = Field::new(3, 0xB).unwrap();
        assert!(is_circulant(&Matrix::identity(&f, 4)));
        let m = Matrix::new(&f, 2, 2, vec![e(1), e(0), e(1), e(1)]).unwrap();
        assert!(!is_circulant(&m));
        assert!(as_circulant(&m).is_none());
        assert!(!is_circulant(&Matrix::zeros(&f, 2, 3)));
    }

    fn row_pair() -> impl Strategy<Value = (Field, Vec<Element>, Vec<Element>)> {
        let f = Field::new(8, 0x11D).unwrap();
        (1usize..7).prop_flat_map(move |n| {
            let f = f.clone();
            (
                proptest::collection::vec(any::<u8>(), n),
                proptest::collection::vec(any::<u8>(), n),
            )
                .prop_map(move |(a, b)| {
                    let conv = |v: Vec<u8>| v.into_iter().map(|x| e(x.into())).collect();
                    (f.clone(), conv(a), conv(b))
                })
        })
    }

    proptest! {
        #[test]
        fn circulant_algebra((f, r1, r2) in row_pair()) {
            let a = Circulant::new(&f, r1).unwrap();
            let b = Circulant::new(&f, r2).unwrap();
            let (ma, mb) = (a.build(), b.build());
            let ab = ma.mul(&mb).unwrap();
            prop_assert!(is_circulant(&ab));
            prop_assert_eq!(&ab, &mb.mul(&ma).unwrap());
            prop_assert_eq!(ma.transpose(), a.transposed().build());
            let ones = vec![Element::ONE; a.order()];
            let image = ma.mul_vec(&ones).unwrap();
            prop_assert!(image.iter().all(|&x| x == a.row_sum()));
            if a.row_sum().is_zero() {
                prop_assert_eq!(ma.det().unwrap(), Element::ZERO);
            }
        }
    }
}

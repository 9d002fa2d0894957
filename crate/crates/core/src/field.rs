//! Arithmetic in GF(2^m) for 1 <= m <= 16.
//!
//! Elements are polynomials over GF(2) stored as little-endian coefficient
//! bits: bit `k` of an [`Element`] is the coefficient of `x^k`. A [`Field`]
//! is fixed by its extension degree and a reduction polynomial in the same
//! encoding, e.g. `8:0x11D` for `x^8 + x^4 + x^3 + x^2 + 1`.
//!
//! Multiplication goes through log/antilog tables built once at
//! construction; [`Field::mul_schoolbook`] is the shift-and-reduce route and
//! the two are cross-checked by the tests.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 16;

/// A field element as a coefficient bit pattern.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Element(u16);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    /// Wraps raw bits without checking them against a field.
    pub const fn from_bits(bits: u16) -> Self {
        Element(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

// addition is XOR in every binary field
impl Add for Element {
    type Output = Element;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Element) -> Element {
        Element(self.0 ^ rhs.0)
    }
}

impl AddAssign for Element {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Element) {
        self.0 ^= rhs.0;
    }
}

impl Sum for Element {
    fn sum<I: Iterator<Item = Element>>(iter: I) -> Element {
        iter.fold(Element::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Element> for Element {
    fn sum<I: Iterator<Item = &'a Element>>(iter: I) -> Element {
        iter.fold(Element::ZERO, |acc, x| acc + *x)
    }
}

struct Tables {
    m: u32,
    poly: u32,
    generator: u16,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled so sums of logs need no reduction.
    exp: Vec<u16>,
    fault: Option<(u16, u16)>,
}

/// A binary extension field GF(2^m). Cheap to clone and safe to share
/// between threads.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.m == other.inner.m
                && self.inner.poly == other.inner.poly
                && self.inner.fault == other.inner.fault)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({self})")
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:#X}", self.inner.m, self.inner.poly)
    }
}

impl FromStr for Field {
    type Err = Error;

    /// Parses `m:POLYHEX`, e.g. `8:0x11D`.
    fn from_str(s: &str) -> Result<Self> {
        let (m, poly) = s
            .split_once(':')
            .ok_or_else(|| Error::BadSyntax(s.to_string()))?;
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| Error::BadSyntax(s.to_string()))?;
        let poly = parse_hex(poly.trim()).ok_or_else(|| Error::BadSyntax(s.to_string()))?;
        let poly = u32::try_from(poly).map_err(|_| Error::DegreeMismatch { m, poly: u32::MAX })?;
        Field::new(m, poly)
    }
}

impl Field {
    /// Builds GF(2^m) after checking that `poly` is irreducible.
    pub fn new(m: u32, poly: u32) -> Result<Self> {
        Self::with_trust(m, poly, false)
    }

    /// Builds GF(2^m) without the irreducibility test.
    pub fn new_trusted(m: u32, poly: u32) -> Result<Self> {
        Self::with_trust(m, poly, true)
    }

    pub fn with_trust(m: u32, poly: u32, trust: bool) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::BadDegree(m));
        }
        if poly >> m != 1 {
            return Err(Error::DegreeMismatch { m, poly });
        }
        if !trust && !is_irreducible(m, poly) {
            return Err(Error::Reducible { poly });
        }
        let generator = find_generator(m, poly).ok_or(Error::Reducible { poly })?;
        let q = 1usize << m;
        let group = q - 1;
        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u32; q];
        let mut x: u16 = 1;
        for i in 0..group {
            exp[i] = x;
            exp[i + group] = x;
            log[x as usize] = i as u32;
            x = schoolbook(m, poly, x, generator);
        }
        Ok(Field {
            inner: Arc::new(Tables {
                m,
                poly,
                generator,
                log,
                exp,
                fault: None,
            }),
        })
    }

    /// Returns a copy whose table multiplication of `a` and `b` (in either
    /// order) has its lowest bit flipped. Used by negative-control tests only.
    #[doc(hidden)]
    pub fn with_injected_fault(&self, a: Element, b: Element) -> Field {
        let t = &self.inner;
        Field {
            inner: Arc::new(Tables {
                m: t.m,
                poly: t.poly,
                generator: t.generator,
                log: t.log.clone(),
                exp: t.exp.clone(),
                fault: Some((a.0, b.0)),
            }),
        }
    }

    pub fn degree(&self) -> u32 {
        self.inner.m
    }

    pub fn poly(&self) -> u32 {
        self.inner.poly
    }

    /// Number of elements, `q = 2^m`.
    pub fn size(&self) -> u32 {
        1 << self.inner.m
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> Element {
        Element(self.inner.generator)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.size()).map(|b| Element(b as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Element> {
        (1..self.size()).map(|b| Element(b as u16))
    }

    /// Validates raw bits as an element of this field.
    pub fn element(&self, bits: u32) -> Result<Element> {
        if bits >= self.size() {
            return Err(Error::OutOfRange {
                value: format!("{bits:#x}"),
                m: self.inner.m,
            });
        }
        Ok(Element(bits as u16))
    }

    pub fn contains(&self, a: Element) -> bool {
        u32::from(a.0) < self.size()
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a.0 == 0 || b.0 == 0 {
            return Element::ZERO;
        }
        let t = &*self.inner;
        let idx = t.log[a.0 as usize] + t.log[b.0 as usize];
        let r = t.exp[idx as usize];
        match t.fault {
            Some((x, y)) if (x, y) == (a.0, b.0) || (y, x) == (a.0, b.0) => Element(r ^ 1),
            _ => Element(r),
        }
    }

    /// Shift-and-reduce multiplication, independent of the tables.
    pub fn mul_schoolbook(&self, a: Element, b: Element) -> Element {
        Element(schoolbook(self.inner.m, self.inner.poly, a.0, b.0))
    }

    #[inline]
    pub fn square(&self, a: Element) -> Element {
        self.mul(a, a)
    }

    pub fn inv(&self, a: Element) -> Result<Element> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let t = &*self.inner;
        let group = (self.size() - 1) as usize;
        Ok(Element(t.exp[group - t.log[a.0 as usize] as usize]))
    }

    /// `a / b`.
    pub fn div(&self, a: Element, b: Element) -> Result<Element> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Square-and-multiply; `pow(0, 0) = 1`.
    pub fn pow(&self, a: Element, mut k: u64) -> Element {
        let mut base = a;
        let mut acc = Element::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: Element) -> Result<u32> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let group = self.size() - 1;
        let mut order = group;
        for p in prime_factors(group) {
            while order.is_multiple_of(p) && self.pow(a, u64::from(order / p)) == Element::ONE {
                order /= p;
            }
        }
        Ok(order)
    }

    pub fn is_primitive(&self, a: Element) -> bool {
        self.order_of(a)
            .map(|o| o == self.size() - 1)
            .unwrap_or(false)
    }

    /// Hex digits needed to print any element of this field.
    pub fn hex_width(&self) -> usize {
        self.inner.m.div_ceil(4) as usize
    }

    /// Formats as `0x`-prefixed uppercase hex, zero-padded to the field width.
    pub fn format_element(&self, a: Element) -> String {
        format!("0x{:0w$X}", a.0, w = self.hex_width())
    }

    /// Parses a `0x`-prefixed hex literal.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let v = parse_hex(s.trim()).ok_or_else(|| Error::BadSyntax(s.to_string()))?;
        if v >= u64::from(self.size()) {
            return Err(Error::OutOfRange {
                value: s.trim().to_string(),
                m: self.inner.m,
            });
        }
        Ok(Element(v as u16))
    }

    /// Parses a comma-separated list of hex elements.
    pub fn parse_list(&self, s: &str) -> Result<Vec<Element>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| self.parse_element(t))
            .collect()
    }

    pub fn format_list(&self, xs: &[Element]) -> Vec<String> {
        xs.iter().map(|&x| self.format_element(x)).collect()
    }
}

/// Parses `0x`-prefixed hex into a u64. Values wider than 64 bits map to
/// `u64::MAX` so callers report them as out of range rather than as syntax.
fn parse_hex(s: &str) -> Option<u64> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let significant = digits.trim_start_matches('0');
    if significant.len() > 16 {
        return Some(u64::MAX);
    }
    u64::from_str_radix(digits, 16).ok()
}

fn schoolbook(m: u32, poly: u32, a: u16, b: u16) -> u16 {
    let mut a = u32::from(a);
    let mut b = u32::from(b);
    let mut r = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    r as u16
}

fn find_generator(m: u32, poly: u32) -> Option<u16> {
    let group = (1u32 << m) - 1;
    if group == 1 {
        return Some(1);
    }
    let factors = prime_factors(group);
    (2..=group).map(|g| g as u16).find(|&g| {
        factors.iter().all(|&p| {
            let mut acc: u16 = 1;
            let mut base = g;
            let mut k = group / p;
            while k > 0 {
                if k & 1 == 1 {
                    acc = schoolbook(m, poly, acc, base);
                }
                base = schoolbook(m, poly, base, base);
                k >>= 1;
            }
            acc != 1
        })
    })
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// GF(2)[x] helpers for the irreducibility test. Polynomials fit in u64 since
// every product is reduced below degree 2m <= 32.

fn poly_degree(a: u64) -> i32 {
    63 - a.leading_zeros() as i32
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

fn poly_mulmod(a: u64, b: u64, modulus: u64) -> u64 {
    let mut r = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a = poly_mod(a << 1, modulus);
    }
    poly_mod(r, modulus)
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// `x^(2^k) mod f`.
fn x_pow_pow2(k: u32, f: u64) -> u64 {
    let mut r = poly_mod(0b10, f);
    for _ in 0..k {
        r = poly_mulmod(r, r, f);
    }
    r
}

/// Rabin's test: `x^(2^m) = x (mod f)` and `gcd(x^(2^(m/p)) - x, f) = 1`
/// for each prime `p | m`.
fn is_irreducible(m: u32, poly: u32) -> bool {
    let f = u64::from(poly);
    let x = poly_mod(0b10, f);
    if x_pow_pow2(m, f) != x {
        return false;
    }
    prime_factors(m)
        .into_iter()
        .all(|p| poly_gcd(f, x_pow_pow2(m / p, f) ^ x) == 1)
}

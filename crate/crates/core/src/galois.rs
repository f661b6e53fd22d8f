//! Arithmetic over small finite fields.
//!
//! Two families are supported: prime fields `GF(p)` with `p < 2^16`, and
//! binary extension fields `GF(2^m)` with `1 <= m <= 16`. Elements are plain
//! integers in `[0, q)`; for extension fields the integer is the bitmask of
//! polynomial coefficients, so `0b10` is the class of `x`. The integer encoding
//! gives every field a canonical total order, which the plurality code uses to
//! break ties.
//!
//! Fields are cheap to clone (the tables live behind an `Arc`) and immutable
//! after construction.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element in canonical integer form. Every supported order fits.
pub type Symbol = u16;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Default irreducible (in fact primitive) polynomials for `GF(2^m)`, indexed by `m`.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

/// How the field is represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    /// Characteristic two; `poly` is the reduction polynomial as a bitmask,
    /// including the leading term.
    BinaryExtension { poly: u32 },
}

/// Serialized form of a field: `{"q": 16, "poly": 19}`; `poly` is omitted for prime fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub q: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<u32>,
}

struct Tables {
    order: u32,
    kind: FieldKind,
    // Extension fields only: exp has length 2(q-1) so log a + log b never wraps.
    exp: Vec<Symbol>,
    log: Vec<u32>,
    inv: Vec<Symbol>,
}

/// A finite field `GF(q)`.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl Field {
    /// Builds `GF(q)` of the given kind, validating the order and polynomial.
    pub fn new(q: u32, kind: FieldKind) -> Result<Field> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(Error::InvalidFieldOrder(q));
        }
        match kind {
            FieldKind::Prime => {
                if !is_prime(q) {
                    return Err(Error::InvalidFieldOrder(q));
                }
                Ok(Field(Arc::new(prime_tables(q))))
            }
            FieldKind::BinaryExtension { poly } => {
                if !q.is_power_of_two() {
                    return Err(Error::InvalidFieldOrder(q));
                }
                let m = q.trailing_zeros();
                if poly_degree(poly) != Some(m) || !is_irreducible_gf2(poly) {
                    return Err(Error::ReduciblePolynomial { poly, degree: m });
                }
                Ok(Field(Arc::new(extension_tables(q, poly))))
            }
        }
    }

    pub fn prime(p: u32) -> Result<Field> {
        Field::new(p, FieldKind::Prime)
    }

    /// `GF(2^m)` with the shipped default polynomial.
    pub fn binary(m: u32) -> Result<Field> {
        if !(1..=16).contains(&m) {
            return Err(Error::InvalidFieldOrder(1u32.checked_shl(m).unwrap_or(0)));
        }
        Field::new(1 << m, FieldKind::BinaryExtension { poly: DEFAULT_POLYS[m as usize] })
    }

    /// Prime field if `q` is prime, otherwise `GF(2^m)` with the default polynomial.
    pub fn from_order(q: u32) -> Result<Field> {
        if is_prime(q) {
            Field::prime(q)
        } else if q.is_power_of_two() && (2..=MAX_ORDER).contains(&q) {
            Field::binary(q.trailing_zeros())
        } else {
            Err(Error::InvalidFieldOrder(q))
        }
    }

    pub fn from_descriptor(desc: FieldDescriptor) -> Result<Field> {
        match desc.poly {
            None => Field::prime(desc.q),
            Some(poly) => Field::new(desc.q, FieldKind::BinaryExtension { poly }),
        }
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            q: self.order(),
            poly: match self.kind() {
                FieldKind::Prime => None,
                FieldKind::BinaryExtension { poly } => Some(poly),
            },
        }
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.0.order
    }

    pub fn kind(&self) -> FieldKind {
        self.0.kind
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Symbol> {
        (0..self.order()).map(|v| v as Symbol)
    }

    #[inline]
    pub fn contains(&self, a: u32) -> bool {
        a < self.order()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        match self.0.kind {
            FieldKind::Prime => ((a as u32 + b as u32) % self.0.order) as Symbol,
            FieldKind::BinaryExtension { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        match self.0.kind {
            FieldKind::Prime if a != 0 => (self.0.order - a as u32) as Symbol,
            _ => a,
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        match self.0.kind {
            FieldKind::Prime => ((a as u32 * b as u32) % self.0.order) as Symbol,
            FieldKind::BinaryExtension { .. } => {
                if a == 0 || b == 0 {
                    0
                } else {
                    let t = &*self.0;
                    t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
                }
            }
        }
    }

    /// Multiplicative inverse; `inv(0)` is an error.
    #[inline]
    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            Err(Error::ZeroInverse)
        } else {
            Ok(self.0.inv[a as usize])
        }
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` with the convention `0^0 = 1`.
    pub fn pow(&self, a: Symbol, mut e: u64) -> Symbol {
        let mut base = a;
        let mut acc: Symbol = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Wraps a raw value as a field-tagged element, checking the range.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if !self.contains(value) {
            return Err(Error::ElementOutOfRange {
                value,
                order: self.order(),
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            value: value as Symbol,
        })
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.order() == other.order() && self.kind() == other.kind())
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FieldKind::Prime => write!(f, "GF({})", self.order()),
            FieldKind::BinaryExtension { poly } => write!(f, "GF({}; {:#x})", self.order(), poly),
        }
    }
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = FieldDescriptor::deserialize(d)?;
        Field::from_descriptor(desc).map_err(serde::de::Error::custom)
    }
}

/// An element carrying its field, for operations that must reject mixed-field operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Symbol,
}

impl FieldElement {
    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn with(&self, value: Symbol) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        self.with(self.field.pow(self.value, e))
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

/// Remainder of `a` modulo `b` over GF(2)[x].
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of degree
/// `1..=deg/2`.
pub fn is_irreducible_gf2(poly: u32) -> bool {
    let Some(m) = poly_degree(poly) else {
        return false;
    };
    if m == 0 {
        return false;
    }
    for d in 1..=m / 2 {
        for low in 0..(1u32 << d) {
            let divisor = (1u32 << d) | low;
            if poly_rem(poly, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Carry-less product reduced modulo `poly`.
fn clmul_mod(a: u32, b: u32, poly: u32, m: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << m) != 0 {
            a ^= poly;
        }
    }
    acc
}

fn prime_tables(p: u32) -> Tables {
    let mut inv = vec![0 as Symbol; p as usize];
    if p > 1 {
        inv[1] = 1;
    }
    // inv[i] = -(p / i) * inv[p mod i]
    for i in 2..p as u64 {
        let pp = p as u64;
        inv[i as usize] = ((pp - (pp / i) * inv[(pp % i) as usize] as u64 % pp) % pp) as Symbol;
    }
    Tables {
        order: p,
        kind: FieldKind::Prime,
        exp: Vec::new(),
        log: Vec::new(),
        inv,
    }
}

fn extension_tables(q: u32, poly: u32) -> Tables {
    let m = q.trailing_zeros();
    let group = (q - 1) as usize;
    let mut exp = vec![0 as Symbol; 2 * group.max(1)];
    let mut log = vec![0u32; q as usize];
    // The polynomial is irreducible but not necessarily primitive, so search
    // for a generator of the multiplicative group.
    let mut found = false;
    for g in 1..q {
        let mut x = 1u32;
        let mut ok = true;
        for (i, slot) in exp.iter_mut().take(group).enumerate() {
            if i > 0 && x == 1 {
                ok = false;
                break;
            }
            *slot = x as Symbol;
            x = clmul_mod(x, g, poly, m);
        }
        if ok && x == 1 {
            found = true;
            break;
        }
    }
    assert!(found, "irreducible polynomial must admit a generator");
    for i in 0..group {
        exp[group + i] = exp[i];
        log[exp[i] as usize] = i as u32;
    }
    let mut inv = vec![0 as Symbol; q as usize];
    for a in 1..q as usize {
        let l = log[a] as usize;
        inv[a] = exp[(group - l) % group];
    }
    Tables {
        order: q,
        kind: FieldKind::BinaryExtension { poly },
        exp,
        log,
        inv,
    }
}

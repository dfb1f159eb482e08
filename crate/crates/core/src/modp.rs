//! The toy Schnorr group: squares mod 23, of prime order 11.

use std::ops::{Add, Mul, Neg, Sub};

use crate::group::{Group, GroupId};

const P: u32 = 23;
const Q: u32 = 11;

/// Order-11 subgroup of `Z_23^*` with `g1 = 2` and `g2 = 3`.
///
/// Small enough for exhaustive checks; offers no security at all.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TestGroup;

/// Element of the order-11 subgroup, stored as its residue mod 23.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModPElement(u8);

/// Scalar mod 11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModQScalar(u8);

impl ModPElement {
    pub fn value(self) -> u8 {
        self.0
    }

    /// Returns the element with residue `value`, if it lies in the subgroup.
    pub fn new(value: u8) -> Option<Self> {
        let v = u32::from(value);
        (v > 0 && v < P && pow_mod(v, Q) == 1).then_some(Self(value))
    }

    /// All 11 subgroup members in increasing residue order.
    pub fn all() -> impl Iterator<Item = Self> {
        (1..P as u8).filter_map(Self::new)
    }
}

impl ModQScalar {
    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..Q as u8).map(Self)
    }
}

fn pow_mod(base: u32, mut exp: u32) -> u32 {
    let mut acc = 1;
    let mut b = base % P;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % P;
        }
        b = b * b % P;
        exp >>= 1;
    }
    acc
}

impl Add for ModQScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(((u32::from(self.0) + u32::from(rhs.0)) % Q) as u8)
    }
}

impl Sub for ModQScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(((u32::from(self.0) + Q - u32::from(rhs.0)) % Q) as u8)
    }
}

impl Mul for ModQScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(((u32::from(self.0) * u32::from(rhs.0)) % Q) as u8)
    }
}

impl Neg for ModQScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self(((Q - u32::from(self.0)) % Q) as u8)
    }
}

impl Group for TestGroup {
    type Scalar = ModQScalar;
    type Element = ModPElement;

    const ID: GroupId = GroupId::TestModP;
    const ELEMENT_LEN: usize = 1;
    const SCALAR_LEN: usize = 1;

    fn g1() -> ModPElement {
        ModPElement(2)
    }

    fn g2() -> ModPElement {
        ModPElement(3)
    }

    fn identity() -> ModPElement {
        ModPElement(1)
    }

    fn op(a: &ModPElement, b: &ModPElement) -> ModPElement {
        ModPElement((u32::from(a.0) * u32::from(b.0) % P) as u8)
    }

    fn inverse(a: &ModPElement) -> ModPElement {
        ModPElement(pow_mod(u32::from(a.0), P - 2) as u8)
    }

    fn pow(base: &ModPElement, exp: &ModQScalar) -> ModPElement {
        ModPElement(pow_mod(u32::from(base.0), u32::from(exp.0)) as u8)
    }

    fn scalar(n: u64) -> ModQScalar {
        ModQScalar((n % u64::from(Q)) as u8)
    }

    fn invert_scalar(s: &ModQScalar) -> Option<ModQScalar> {
        if s.0 == 0 {
            return None;
        }
        // Fermat: s^(q-2)
        let mut acc = ModQScalar(1);
        for _ in 0..Q - 2 {
            acc = acc * *s;
        }
        Some(acc)
    }

    fn reduce_wide(bytes: &[u8; 64]) -> ModQScalar {
        let r = bytes.iter().fold(0_u32, |acc, &b| (acc * 256 + u32::from(b)) % Q);
        ModQScalar(r as u8)
    }

    fn encode_element(e: &ModPElement) -> Vec<u8> {
        vec![e.0]
    }

    fn decode_element(bytes: &[u8]) -> Option<ModPElement> {
        match bytes {
            [b] => ModPElement::new(*b),
            _ => None,
        }
    }

    fn encode_scalar(s: &ModQScalar) -> Vec<u8> {
        vec![s.0]
    }

    fn decode_scalar(bytes: &[u8]) -> Option<ModQScalar> {
        match bytes {
            [b] if u32::from(*b) < Q => Some(ModQScalar(*b)),
            _ => None,
        }
    }

    fn order_be() -> Vec<u8> {
        vec![Q as u8]
    }

    fn structure() -> String {
        format!("squares mod {P}")
    }
}

//! Exact field scalars: arbitrary-precision rationals and prime residues.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::{EngineError, Result};

/// Coefficient field of a polynomial ring.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldKind {
    Rationals,
    /// Prime field F_p, p < 2^31.
    Prime(u32),
}

impl FieldKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldKind::Rationals => Ok(()),
            FieldKind::Prime(p) => {
                if *p < 2 || !is_prime_u32(*p) {
                    Err(EngineError::Structural(format!("{p} is not prime")))
                } else if *p >= 1 << 31 {
                    Err(EngineError::Structural(format!("prime {p} too large")))
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn is_prime_u32(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of the coefficient field.
///
/// Rationals are kept in lowest terms with positive denominator
/// (maintained by `BigRational`); prime-field residues live in `[0, p)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Fp { value: u64, modulus: u32 },
}

impl Scalar {
    pub fn zero(field: FieldKind) -> Self {
        match field {
            FieldKind::Rationals => Scalar::Rat(BigRational::zero()),
            FieldKind::Prime(p) => Scalar::Fp { value: 0, modulus: p },
        }
    }

    pub fn one(field: FieldKind) -> Self {
        match field {
            FieldKind::Rationals => Scalar::Rat(BigRational::one()),
            FieldKind::Prime(p) => Scalar::Fp { value: 1, modulus: p },
        }
    }

    pub fn from_i64(field: FieldKind, v: i64) -> Self {
        match field {
            FieldKind::Rationals => Scalar::Rat(BigRational::from(BigInt::from(v))),
            FieldKind::Prime(p) => {
                let m = p as i64;
                let r = ((v % m) + m) % m;
                Scalar::Fp { value: r as u64, modulus: p }
            }
        }
    }

    pub fn from_fraction(field: FieldKind, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(EngineError::Structural("zero denominator".into()));
        }
        match field {
            FieldKind::Rationals => Ok(Scalar::Rat(BigRational::new(
                BigInt::from(num),
                BigInt::from(den),
            ))),
            FieldKind::Prime(_) => {
                let n = Scalar::from_i64(field, num);
                let d = Scalar::from_i64(field, den);
                n.div(&d)
            }
        }
    }

    pub fn field(&self) -> FieldKind {
        match self {
            Scalar::Rat(_) => FieldKind::Rationals,
            Scalar::Fp { modulus, .. } => FieldKind::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { value, .. } => *value == 1,
        }
    }

    fn check_same(&self, other: &Scalar) -> Result<()> {
        if self.field() != other.field() {
            return Err(EngineError::Internal("mixed coefficient fields".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same(other)?;
        Ok(match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { value: a, modulus: p }, Scalar::Fp { value: b, .. }) => Scalar::Fp {
                value: (a + b) % (*p as u64),
                modulus: *p,
            },
            _ => unreachable!(),
        })
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Fp { value, modulus } => {
                let p = *modulus as u64;
                Scalar::Fp { value: (p - value) % p, modulus: *modulus }
            }
        }
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same(other)?;
        Ok(match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { value: a, modulus: p }, Scalar::Fp { value: b, .. }) => Scalar::Fp {
                value: (a * b) % (*p as u64),
                modulus: *p,
            },
            _ => unreachable!(),
        })
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(EngineError::Structural("inverse of zero".into()));
        }
        Ok(match self {
            Scalar::Rat(a) => Scalar::Rat(a.recip()),
            Scalar::Fp { value, modulus } => {
                let p = *modulus as u64;
                Scalar::Fp { value: mod_pow(*value, p - 2, p), modulus: *modulus }
            }
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.mul(&other.inv()?)
    }

    /// Reduce a rational scalar mod p; fails when p divides the denominator.
    pub fn to_prime_field(&self, p: u32) -> Result<Scalar> {
        match self {
            Scalar::Fp { .. } => Err(EngineError::Structural("already a prime-field scalar".into())),
            Scalar::Rat(r) => {
                let pb = BigInt::from(p);
                let den = r.denom();
                if (den % &pb).is_zero() {
                    return Err(EngineError::Structural(format!("denominator divisible by {p}")));
                }
                let num_mod = r.numer().mod_floor_u(&pb);
                let den_mod = den.mod_floor_u(&pb);
                let n = Scalar::Fp { value: num_mod, modulus: p };
                let d = Scalar::Fp { value: den_mod, modulus: p };
                n.div(&d)
            }
        }
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

trait ModFloorU {
    fn mod_floor_u(&self, p: &BigInt) -> u64;
}

impl ModFloorU for BigInt {
    fn mod_floor_u(&self, p: &BigInt) -> u64 {
        use num_integer::Integer;
        let r = self.mod_floor(p);
        let digits = r.to_u64_digits();
        if digits.1.is_empty() { 0 } else { digits.1[0] }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Scalar {
    pub fn is_negative_display(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_negative(),
            Scalar::Fp { .. } => false,
        }
    }

    /// Absolute value for display purposes (rationals only).
    pub fn abs_display(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.abs()),
            s => s.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arith_reduces() {
        let f = FieldKind::Rationals;
        let a = Scalar::from_fraction(f, 1, 2).unwrap();
        let b = Scalar::from_fraction(f, 1, 3).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s, Scalar::from_fraction(f, 5, 6).unwrap());
        assert_eq!(a.mul(&b).unwrap(), Scalar::from_fraction(f, 1, 6).unwrap());
    }

    #[test]
    fn prime_field_inverse() {
        let f = FieldKind::Prime(7);
        let a = Scalar::from_i64(f, 3);
        let inv = a.inv().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Scalar::one(f));
    }

    #[test]
    fn primality_gate() {
        assert!(FieldKind::Prime(31).validate().is_ok());
        assert!(FieldKind::Prime(6).validate().is_err());
        assert!(FieldKind::Prime(1).validate().is_err());
    }

    #[test]
    fn rational_to_prime_field() {
        let a = Scalar::from_fraction(FieldKind::Rationals, -1, 2).unwrap();
        let r = a.to_prime_field(7).unwrap();
        // -1/2 = 6 * 4 = 24 = 3 mod 7
        assert_eq!(r, Scalar::from_i64(FieldKind::Prime(7), 3));
    }
}

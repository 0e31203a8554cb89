//! Exact arithmetic in the completions of `Q`: valuations, square-free
//! parts, Legendre classification, square classes and Hilbert symbols.
//!
//! All symbol and evaluation maps in this crate take values in the
//! additively written group `(1/2)Z/Z`, see [`HalfInt`].  A square class
//! of `Q*` is canonicalized as a signed square-free integer, a square
//! class of `Q_p*` as a valuation parity together with a unit class, and
//! a square class of `R*` as a sign.
//!
//! # Examples
//!
//! ```
//! use kummer::localfields::{square_class, Field};
//!
//! // 45 = 3^2 * 5: the square-free part is 5
//! let c = square_class(45, 1, Field::Rational).unwrap();
//! assert!(!c.is_square());
//! let c2 = square_class(5, 1, Field::Rational).unwrap();
//! assert!(c.mul(&c2).is_square());
//!
//! // -1 is a square in Q_13 (13 = 1 mod 4) but not in Q_7
//! assert!(square_class(-1, 1, Field::Padic(13)).unwrap().is_square());
//! assert!(!square_class(-1, 1, Field::Padic(7)).unwrap().is_square());
//! ```
//!
//! ```
//! use kummer::localfields::{hilbert, hilbert_global_sum, HalfInt, Place};
//!
//! // (-1, -1) ramifies exactly at 2 and infinity
//! assert_eq!(hilbert(-1, -1, Place::Finite(2)).unwrap(), HalfInt::HALF);
//! assert_eq!(hilbert(-1, -1, Place::Real).unwrap(), HalfInt::HALF);
//! assert_eq!(hilbert(-1, -1, Place::Finite(5)).unwrap(), HalfInt::ZERO);
//!
//! // the product formula: the sum over all places vanishes
//! assert_eq!(hilbert_global_sum(-6, 35).unwrap(), HalfInt::ZERO);
//! ```

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// A place of `Q`: a finite prime or the real place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    /// The finite place attached to a prime `p >= 2`.
    Finite(i64),
    /// The archimedean place.
    Real,
}

/// A field in which square classes are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    /// The rational numbers themselves.
    Rational,
    /// The completion `Q_p`.
    Padic(i64),
    /// The completion `R`.
    Real,
}

impl Field {
    pub fn place(self) -> Option<Place> {
        match self {
            Field::Rational => None,
            Field::Padic(p) => Some(Place::Finite(p)),
            Field::Real => Some(Place::Real),
        }
    }
}

/// An element of `(1/2)Z/Z`, the value group of Hilbert symbols and of
/// all local evaluation maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct HalfInt(bool);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(false);
    pub const HALF: HalfInt = HalfInt(true);

    pub fn from_bit(bit: u8) -> HalfInt {
        HalfInt(bit & 1 == 1)
    }

    pub fn bit(self) -> u8 {
        self.0 as u8
    }

    pub fn is_zero(self) -> bool {
        !self.0
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for HalfInt {
    fn sum<I: Iterator<Item = HalfInt>>(iter: I) -> HalfInt {
        iter.fold(HalfInt::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if self.0 { "1/2" } else { "0" })
    }
}

/// A square class in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SquareClass {
    /// Class of `Q*`: a signed square-free integer, never zero.
    Rational(i128),
    /// Class of `Q_p*`.  For odd `p` the unit class is a Legendre bit
    /// (0 = square unit, 1 = non-square unit); for `p = 2` it is the
    /// residue of the unit part in `{1,3,5,7}` mod 8.
    Padic { p: i64, val_parity: u8, unit: u8 },
    /// Class of `R*`: the sign.
    Real(i8),
}

impl SquareClass {
    /// The class of squares in the respective field.
    pub fn is_square(&self) -> bool {
        match *self {
            SquareClass::Rational(r) => r == 1,
            SquareClass::Padic { p, val_parity, unit } => {
                val_parity == 0 && if p == 2 { unit == 1 } else { unit == 0 }
            }
            SquareClass::Real(s) => s > 0,
        }
    }

    /// Group law of `k*/k*^2`; both classes must live in the same field.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        match (*self, *other) {
            (SquareClass::Rational(a), SquareClass::Rational(b)) => {
                SquareClass::Rational(mul_squarefree(a, b))
            }
            (
                SquareClass::Padic { p, val_parity: v1, unit: u1 },
                SquareClass::Padic { p: q, val_parity: v2, unit: u2 },
            ) if p == q => {
                let unit = if p == 2 { (u1 * u2) % 8 } else { u1 ^ u2 };
                SquareClass::Padic { p, val_parity: v1 ^ v2, unit }
            }
            (SquareClass::Real(a), SquareClass::Real(b)) => SquareClass::Real(a * b),
            _ => panic!("square classes of different fields"),
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(mut n: i128, p: i64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Valuation together with the unit part: `n = p^v * u`.
pub fn val_unit(mut n: i128, p: i64) -> (u32, i128) {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    (v, n)
}

fn val_unit_big(n: &BigInt, p: i64) -> (u32, BigInt) {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut u = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = u.div_rem(&p);
        if r.is_zero() {
            u = q;
            v += 1;
        } else {
            return (v, u);
        }
    }
}

/// Trial-division factorization of `|n|` into `(prime, exponent)` pairs,
/// in increasing prime order.
pub fn factor(n: i128) -> Vec<(i64, u32)> {
    assert!(n != 0, "factor of zero");
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: i128 = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d as i64, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n as i64, 1));
    }
    out
}

/// Signed square-free part: the unique square-free `s` with `n/s` a
/// positive perfect square and `sign(s) = sign(n)`.
pub fn squarefree_part(n: i128) -> Result<i128> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut s: i128 = if n < 0 { -1 } else { 1 };
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            s *= p as i128;
        }
    }
    Ok(s)
}

/// Product of two signed square-free integers, reduced to square-free
/// form again.  Since the inputs share no square factors, cancelling the
/// gcd twice is exact: `(s1/g) * (s2/g)` is square-free.
pub fn mul_squarefree(s1: i128, s2: i128) -> i128 {
    let g = s1.abs().gcd(&s2.abs());
    (s1 / g) * (s2 / g)
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn rem_nonneg(n: i128, m: i64) -> u64 {
    let r = (n % m as i128 + m as i128) % m as i128;
    r as u64
}

fn rem_nonneg_big(n: &BigInt, m: i64) -> u64 {
    let r = ((n % m) + m) % m;
    r.to_u64().unwrap()
}

/// Legendre classification of a unit mod an odd prime:
/// 0 if `u` is a quadratic residue mod `p`, 1 otherwise.
pub fn legendre_class(u: i128, p: i64) -> Result<u8> {
    if p == 2 || p < 2 {
        return Err(Error::NotOddPrime(p));
    }
    let r = rem_nonneg(u, p);
    if r == 0 {
        return Err(Error::NotAUnit { p, n: (u % p as i128) as i64 });
    }
    Ok(legendre_bit_of_residue(r, p as u64))
}

fn legendre_bit_of_residue(r: u64, p: u64) -> u8 {
    // Euler's criterion.
    if powmod(r, (p - 1) / 2, p) == 1 {
        0
    } else {
        1
    }
}

/// `(p-1)/2 mod 2` for odd `p`; the epsilon of the closed-form odd
/// Hilbert symbol.
fn eps_odd_prime(p: i64) -> u8 {
    (((p - 1) / 2) % 2) as u8
}

/// `(u-1)/2 mod 2` for odd `u` given by its residue mod 8.
fn eps2(u_mod8: u8) -> u8 {
    (((u_mod8 as i32 - 1) / 2) % 2) as u8
}

/// `(u^2-1)/8 mod 2` for odd `u` given by its residue mod 8.
fn omega2(u_mod8: u8) -> u8 {
    match u_mod8 % 8 {
        1 | 7 => 0,
        3 | 5 => 1,
        _ => unreachable!("even residue"),
    }
}

/// Canonical square class of the nonzero rational `num/den` in the given
/// field.  Over `Q` this requires factoring `num*den`; over completions
/// only valuations and small residues are used.
pub fn square_class(num: i128, den: i128, field: Field) -> Result<SquareClass> {
    if num == 0 || den == 0 {
        return Err(Error::ZeroArgument);
    }
    // num/den and num*den differ by the square den^2.
    let n = num.checked_mul(den).expect("square_class overflow");
    match field {
        Field::Rational => Ok(SquareClass::Rational(squarefree_part(n)?)),
        Field::Real => Ok(SquareClass::Real(if n > 0 { 1 } else { -1 })),
        Field::Padic(p) => {
            let (v, u) = val_unit(n, p);
            let unit = if p == 2 {
                rem_nonneg(u, 8) as u8
            } else {
                legendre_bit_of_residue(rem_nonneg(u, p), p as u64)
            };
            Ok(SquareClass::Padic { p, val_parity: (v % 2) as u8, unit })
        }
    }
}

/// Square class of a nonzero `BigInt` in a completion.  (Over `Q` use
/// [`square_class`]; canonicalizing an arbitrary-precision integer over
/// `Q` amounts to factoring it.)
pub fn square_class_big(n: &BigInt, field: Field) -> Result<SquareClass> {
    if n.is_zero() {
        return Err(Error::ZeroArgument);
    }
    match field {
        Field::Rational => {
            let small = n
                .to_i128()
                .ok_or_else(|| Error::InvalidInput("rational square class needs i128 range".into()))?;
            square_class(small, 1, Field::Rational)
        }
        Field::Real => Ok(SquareClass::Real(if n.is_positive() { 1 } else { -1 })),
        Field::Padic(p) => {
            let (v, u) = val_unit_big(n, p);
            let unit = if p == 2 {
                rem_nonneg_big(&u, 8) as u8
            } else {
                legendre_bit_of_residue(rem_nonneg_big(&u, p), p as u64)
            };
            Ok(SquareClass::Padic { p, val_parity: (v % 2) as u8, unit })
        }
    }
}

/// Hilbert symbol of two square classes of the same completion, valued
/// in `(1/2)Z/Z`.  Closed forms: for odd `p` and `a = p^alpha u`,
/// `b = p^beta v` the bit is `alpha beta eps(p) + beta leg(u) + alpha leg(v)`;
/// for `p = 2` it is `eps(u)eps(v) + alpha omega(v) + beta omega(u)`;
/// over `R` the symbol is 1/2 iff both arguments are negative.
pub fn hilbert_classes(a: &SquareClass, b: &SquareClass) -> HalfInt {
    match (*a, *b) {
        (SquareClass::Real(s), SquareClass::Real(t)) => HalfInt(s < 0 && t < 0),
        (
            SquareClass::Padic { p, val_parity: al, unit: u },
            SquareClass::Padic { p: q, val_parity: be, unit: v },
        ) if p == q => {
            let bit = if p == 2 {
                eps2(u) * eps2(v) + al * omega2(v) + be * omega2(u)
            } else {
                al * be * eps_odd_prime(p) + be * u + al * v
            };
            HalfInt::from_bit(bit)
        }
        _ => panic!("hilbert symbol of classes from different places"),
    }
}

/// Hilbert symbol of two nonzero integers at a place.
pub fn hilbert(a: i128, b: i128, place: Place) -> Result<HalfInt> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroArgument);
    }
    let field = match place {
        Place::Finite(p) => Field::Padic(p),
        Place::Real => Field::Real,
    };
    Ok(hilbert_classes(&square_class(a, 1, field)?, &square_class(b, 1, field)?))
}

/// Hilbert symbol of two nonzero rationals at a place.
pub fn hilbert_rat(a: (i128, i128), b: (i128, i128), place: Place) -> Result<HalfInt> {
    if a.0 == 0 || a.1 == 0 || b.0 == 0 || b.1 == 0 {
        return Err(Error::ZeroArgument);
    }
    hilbert(
        a.0.checked_mul(a.1).expect("hilbert_rat overflow"),
        b.0.checked_mul(b.1).expect("hilbert_rat overflow"),
        place,
    )
}

/// Hilbert symbol of two nonzero arbitrary-precision integers at a place.
pub fn hilbert_big(a: &BigInt, b: &BigInt, place: Place) -> Result<HalfInt> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let field = match place {
        Place::Finite(p) => Field::Padic(p),
        Place::Real => Field::Real,
    };
    Ok(hilbert_classes(&square_class_big(a, field)?, &square_class_big(b, field)?))
}

/// The places where `(a,b)` can be nonzero: the real place, 2, and the
/// odd primes dividing `a` or `b`.
pub fn hilbert_support(a: i128, b: i128) -> Vec<Place> {
    let mut places = vec![Place::Real, Place::Finite(2)];
    let mut primes: Vec<i64> = factor(a).into_iter().map(|(p, _)| p).collect();
    primes.extend(factor(b).into_iter().map(|(p, _)| p));
    primes.sort_unstable();
    primes.dedup();
    for p in primes {
        if p != 2 {
            places.push(Place::Finite(p));
        }
    }
    places
}

/// Sum of `(a,b)` over all places; zero by the product formula.
pub fn hilbert_global_sum(a: i128, b: i128) -> Result<HalfInt> {
    let mut sum = HalfInt::ZERO;
    for place in hilbert_support(a, b) {
        sum += hilbert(a, b, place)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(4).unwrap(), 1);
        assert_eq!(squarefree_part(-275).unwrap(), -11);
        assert_eq!(squarefree_part(900).unwrap(), 1);
        assert_eq!(squarefree_part(-24).unwrap(), -6);
        assert_eq!(squarefree_part(12).unwrap(), 3);
        assert!(squarefree_part(0).is_err());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_class(1, 7).unwrap(), 0);
        // squares mod 5 are {1,4}
        assert_eq!(legendre_class(2, 5).unwrap(), 1);
        assert_eq!(legendre_class(-128, 5).unwrap(), 1);
        assert!(legendre_class(10, 5).is_err());
        assert!(legendre_class(3, 2).is_err());
    }

    #[test]
    fn legendre_matches_enumeration() {
        for &p in &[3i64, 5, 7, 11, 13] {
            let squares: std::collections::HashSet<u64> =
                (1..p as u64).map(|x| x * x % p as u64).collect();
            for u in 1..p as i128 {
                let expected = if squares.contains(&(u as u64)) { 0 } else { 1 };
                assert_eq!(legendre_class(u, p).unwrap(), expected, "u={u} p={p}");
            }
        }
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(square_class(50, 1, Field::Rational).unwrap(), SquareClass::Rational(2));
        // nu_5(1230) = 1, unit 246 = 1 mod 5 is a residue
        assert_eq!(
            square_class(1230, 1, Field::Padic(5)).unwrap(),
            SquareClass::Padic { p: 5, val_parity: 1, unit: 0 }
        );
        assert_eq!(square_class(-1, 1, Field::Real).unwrap(), SquareClass::Real(-1));
        // 17 = 1 mod 8 is a 2-adic square
        let c = square_class(17, 1, Field::Padic(2)).unwrap();
        assert_eq!(c, SquareClass::Padic { p: 2, val_parity: 0, unit: 1 });
        assert!(c.is_square());
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert(-128, 1230, Place::Finite(5)).unwrap(), HalfInt::HALF);
        assert_eq!(hilbert(9, -77, Place::Finite(7)).unwrap(), HalfInt::ZERO);
        assert_eq!(hilbert(9, -77, Place::Real).unwrap(), HalfInt::ZERO);
        assert_eq!(hilbert(-1, -1, Place::Real).unwrap(), HalfInt::HALF);
        // product formula instance for (-2, 15)
        assert_eq!(hilbert_global_sum(-2, 15).unwrap(), HalfInt::ZERO);
    }

    #[test]
    fn hilbert_symmetry_and_bilinearity_small() {
        let places = [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(5)];
        for a in [-10i128, -3, -1, 2, 6, 15] {
            for b in [-7i128, -2, 3, 5, 12] {
                for pl in places {
                    let ab = hilbert(a, b, pl).unwrap();
                    assert_eq!(ab, hilbert(b, a, pl).unwrap());
                    for c in [-5i128, 2, 7] {
                        let ac = hilbert(a, c, pl).unwrap();
                        let abc = hilbert(a, b * c, pl).unwrap();
                        assert_eq!(abc, ab + ac, "a={a} b={b} c={c} {pl:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn big_matches_small() {
        for a in [-48i128, -5, 7, 90] {
            for b in [-27i128, 11, 20] {
                for pl in [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(5)] {
                    assert_eq!(
                        hilbert(a, b, pl).unwrap(),
                        hilbert_big(&BigInt::from(a), &BigInt::from(b), pl).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn class_mul_is_group_law() {
        let c50 = square_class(50, 1, Field::Rational).unwrap();
        let c12 = square_class(12, 1, Field::Rational).unwrap();
        let c600 = square_class(600, 1, Field::Rational).unwrap();
        assert_eq!(c50.mul(&c12), c600);
        assert_eq!(mul_squarefree(6, 10), 15);
        assert_eq!(mul_squarefree(-6, 6), -1);
    }
}

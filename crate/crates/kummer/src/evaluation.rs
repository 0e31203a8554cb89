//! Local evaluation of 2-torsion Brauer classes: point evaluation as a
//! sum of Hilbert symbols, the box-subdivision algorithm computing the
//! colouring of `S(Q_p)`, fast constancy criteria, the set of primes
//! where a class obstructs approximation, and admissible adelic value
//! vectors.
//!
//! # Examples
//!
//! ```
//! use kummer::localfields::{HalfInt, Place};
//! use kummer::evaluation::evaluate_point;
//! use kummer::surface::KummerSurface;
//!
//! let s = KummerSurface::new(1, 25, -25, -36).unwrap();
//! let alpha = s.brauer_class(0b0001).unwrap();
//!
//! // (17, 5) is a 5-adic point with invariant 1/2 ...
//! let v = evaluate_point(&s, &alpha, Place::Finite(5), (17, 1), (5, 1)).unwrap();
//! assert_eq!(v, HalfInt::HALF);
//!
//! // ... while (1/25, 5) lands on invariant 0
//! let v = evaluate_point(&s, &alpha, Place::Finite(5), (1, 25), (5, 1)).unwrap();
//! assert_eq!(v, HalfInt::ZERO);
//! ```
//!
//! ```
//! use kummer::evaluation::{colouring, constancy, relevant_primes, Constancy};
//! use kummer::surface::KummerSurface;
//!
//! let s = KummerSurface::new(1, 25, -25, -36).unwrap();
//! let alpha = s.brauer_class(0b0001).unwrap();
//!
//! let c = colouring(&s, &alpha, 5).unwrap();
//! assert!(!c.constant());        // both colours occur at 5
//! assert!(c.measure_is_exact()); // boxes + empties tile Z_5^2 exactly
//!
//! // constancy prefers closed-form fast paths over the boxes
//! assert_eq!(constancy(&s, &alpha, 11).unwrap(), Constancy::ConstantZero);
//! // 5 is therefore the only relevant prime
//! let ps: Vec<i64> = relevant_primes(&s, &alpha).unwrap().into_iter().collect();
//! assert_eq!(ps, vec![5]);
//! ```

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::localfields::{
    factor, hilbert_big, hilbert_classes, square_class, square_class_big, Field, HalfInt, Place,
    SquareClass,
};
use crate::surface::{kernel, BrauerClass, KummerSurface};
use crate::{Error, Result};

/// A residue box `{(x,u) : x = x0, u = u0 (mod p^e)}` inside `Z_p^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PadicBox {
    pub x0: i128,
    pub u0: i128,
    pub p: i64,
    pub e: u32,
}

/// The colouring of `S(Q_p)` by a class's evaluation map, as far as it
/// is described by boxes in `Z_p^2` plus the colour-0 tail region
/// `nu_p(x) < 0 or nu_p(u) < 0` (thresholds `< -2` for `p = 2`).
#[derive(Debug, Clone, Serialize)]
pub struct Colouring {
    pub p: i64,
    pub surface: KummerSurface,
    pub vector: u8,
    /// The neighborhood level of the singular-point constancy lemma.
    pub level: u32,
    /// Maximal subdivision level before a diagnostic is raised.
    pub cap: u32,
    pub boxes0: Vec<PadicBox>,
    pub boxes_half: Vec<PadicBox>,
    /// Provably empty boxes, kept for exact measure bookkeeping.
    pub empty: Vec<PadicBox>,
    /// The tail region always carries colour 0.
    pub tail0: bool,
}

impl Colouring {
    /// Constant evaluation on the described region.
    pub fn constant(&self) -> bool {
        self.boxes_half.is_empty()
    }

    /// Exact check that the three box lists tile the unit square:
    /// sum of `p^(-2e)` over all boxes equals 1.
    pub fn measure_is_exact(&self) -> bool {
        let p = BigUint::from(self.p as u64);
        let mut total = BigUint::zero();
        for bx in self.boxes0.iter().chain(&self.boxes_half).chain(&self.empty) {
            total += p.pow(2 * (self.cap - bx.e));
        }
        total == p.pow(2 * self.cap)
    }

    /// Lookup structure mapping residues to colours.
    pub fn index(&self) -> ColouringIndex<'_> {
        let mut map = HashMap::new();
        for (code, list) in
            [(Colour::Zero, &self.boxes0), (Colour::Half, &self.boxes_half), (Colour::Empty, &self.empty)]
        {
            for bx in list {
                map.insert((bx.e, bx.x0, bx.u0), code);
            }
        }
        ColouringIndex { colouring: self, map }
    }

    /// Deterministic line-oriented serialization: a header, one record
    /// `colour x0 u0 e` per box, and the closing tail marker.
    pub fn serialize(&self) -> String {
        let s = self.surface;
        let mut out = format!(
            "p {} class {} surface {} {} {} {}\n",
            self.p, self.vector, s.a, s.b, s.ap, s.bp
        );
        let mut records: Vec<(u32, i128, i128, &str)> = Vec::new();
        for bx in &self.boxes0 {
            records.push((bx.e, bx.x0, bx.u0, "0"));
        }
        for bx in &self.boxes_half {
            records.push((bx.e, bx.x0, bx.u0, "1/2"));
        }
        records.sort_unstable();
        for (e, x0, u0, colour) in records {
            out.push_str(&format!("{colour} {x0} {u0} {e}\n"));
        }
        out.push_str("tail 0\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Colour {
    Zero,
    Half,
    Empty,
}

/// Residue-to-colour lookup into a fixed colouring.
pub struct ColouringIndex<'a> {
    colouring: &'a Colouring,
    map: HashMap<(u32, i128, i128), Colour>,
}

impl ColouringIndex<'_> {
    /// The colour of the box containing the integral point `(x, u)`,
    /// or `None` if the point fell into a provably empty box.
    pub fn colour_at(&self, x: i128, u: i128) -> Option<HalfInt> {
        let p = self.colouring.p as i128;
        let mut pe: i128 = 1;
        for e in 1..=self.colouring.cap {
            pe *= p;
            let key = (e, x.rem_euclid(pe), u.rem_euclid(pe));
            match self.map.get(&key) {
                Some(Colour::Zero) => return Some(HalfInt::ZERO),
                Some(Colour::Half) => return Some(HalfInt::HALF),
                Some(Colour::Empty) => return None,
                None => continue,
            }
        }
        unreachable!("point not covered by any box")
    }
}

/// The level `l = max nu_p` over the six coefficient expressions; the
/// evaluation map is constant on the set of points with both `x` and
/// `u` congruent to roots modulo `p^(l+1)` (`p^(l+3)` for `p = 2`).
pub fn appr_level(s: &KummerSurface, p: i64) -> u32 {
    let vals = [s.a, s.b, s.a - s.b, s.ap, s.bp, s.ap - s.bp];
    vals.iter().map(|&n| crate::localfields::valuation(n as i128, p)).max().unwrap()
}

/// Evaluation of a class at a point `(x, u)` of the surface over the
/// completion at `place`, as the sum of the Hilbert symbols
/// `((x-mu)(x-b), (u-nu)(u-b'))` over the symbol pairs of the class.
///
/// Coordinates are rationals `(numerator, denominator)`; a zero
/// denominator means the point at infinity, where the value is 0.
pub fn evaluate_point(
    s: &KummerSurface,
    alpha: &BrauerClass,
    place: Place,
    x: (i128, i128),
    u: (i128, i128),
) -> Result<HalfInt> {
    if (x.0 == 0 && x.1 == 0) || (u.0 == 0 && u.1 == 0) {
        return Err(Error::BadPoint("coordinate 0/0".into()));
    }
    if x.1 == 0 || u.1 == 0 {
        // Both symbol slots of the coordinate at infinity are squares.
        return Ok(HalfInt::ZERO);
    }
    let field = match place {
        Place::Finite(p) => Field::Padic(p),
        Place::Real => Field::Real,
    };
    let (a, b, ap, bp) = s.coeffs();
    let lin = |n: i128, d: i128, r: i64| BigInt::from(n) - BigInt::from(r as i128) * BigInt::from(d);

    // A point with z != 0 exists above (x, u) iff f(x) g(u) is a
    // nonzero square; up to squares f(x) ~ xn (xn - a xd)(xn - b xd) xd.
    let fx = lin(x.0, x.1, 0) * lin(x.0, x.1, a) * lin(x.0, x.1, b) * BigInt::from(x.1);
    let gu = lin(u.0, u.1, 0) * lin(u.0, u.1, ap) * lin(u.0, u.1, bp) * BigInt::from(u.1);
    if fx.is_zero() || gu.is_zero() {
        return Err(Error::BadPoint("evaluation at the ramification locus".into()));
    }
    if !square_class_big(&(fx * gu), field)?.is_square() {
        return Err(Error::BadPoint("no local point above (x, u)".into()));
    }

    let mut sum = HalfInt::ZERO;
    for &(mu, nu) in &alpha.pairs {
        // (x-mu)(x-b) ~ (xn - mu xd)(xn - b xd) up to the square xd^2.
        let sx = lin(x.0, x.1, mu) * lin(x.0, x.1, b);
        let su = lin(u.0, u.1, nu) * lin(u.0, u.1, bp);
        sum += hilbert_big(&sx, &su, place)?;
    }
    Ok(sum)
}

/// Sum of the evaluations over all places; zero on rational points of
/// the surface by the product formula.
pub fn global_sum(
    s: &KummerSurface,
    alpha: &BrauerClass,
    x: (i128, i128),
    u: (i128, i128),
) -> Result<HalfInt> {
    let (_, b, _, bp) = s.coeffs();
    let mut primes: BTreeSet<i64> = BTreeSet::new();
    primes.insert(2);
    for &(mu, nu) in &alpha.pairs {
        let sx = (x.0 - mu as i128 * x.1)
            .checked_mul(x.0 - b as i128 * x.1)
            .ok_or_else(|| Error::InvalidInput("slot value exceeds i128".into()))?;
        let su = (u.0 - nu as i128 * u.1)
            .checked_mul(u.0 - bp as i128 * u.1)
            .ok_or_else(|| Error::InvalidInput("slot value exceeds i128".into()))?;
        if sx == 0 || su == 0 {
            return Err(Error::BadPoint("evaluation at the ramification locus".into()));
        }
        for n in [sx, su, x.1 * x.1, u.1 * u.1] {
            for (p, _) in factor(n) {
                primes.insert(p);
            }
        }
    }
    let mut sum = evaluate_point(s, alpha, Place::Real, x, u)?;
    for p in primes {
        sum += evaluate_point(s, alpha, Place::Finite(p), x, u)?;
    }
    Ok(sum)
}

/// Does a point with `z != 0` exist above `(x, u)` in the completion?
pub fn has_local_point(s: &KummerSurface, field: Field, x: i128, u: i128) -> Result<bool> {
    let (a, b, ap, bp) = s.coeffs();
    let fx = BigInt::from(x) * BigInt::from(x - a as i128) * BigInt::from(x - b as i128);
    let gu = BigInt::from(u) * BigInt::from(u - ap as i128) * BigInt::from(u - bp as i128);
    if fx.is_zero() || gu.is_zero() {
        return Ok(false);
    }
    Ok(square_class_big(&(fx * gu), field)?.is_square())
}

fn val_or_inf(n: i128, p: i64) -> u32 {
    if n == 0 {
        u32::MAX
    } else {
        crate::localfields::valuation(n, p)
    }
}

/// Square class of a linear factor value on a box, if it is constant
/// there.  The class of `x - r` is constant on `x = x0 (mod p^e)` iff
/// `e >= nu_p(x0 - r) + delta`, units in `1 + p^delta Z_p` being squares.
struct FactorClass {
    determined: bool,
    class: Option<SquareClass>,
}

fn factor_class(n: i128, p: i64, e: u32, delta: u32) -> FactorClass {
    let v = val_or_inf(n, p);
    if v == u32::MAX || e < v + delta {
        return FactorClass { determined: false, class: None };
    }
    FactorClass { determined: true, class: Some(square_class(n, 1, Field::Padic(p)).unwrap()) }
}

fn combine(parts: &[&FactorClass]) -> Option<SquareClass> {
    let mut acc: Option<SquareClass> = None;
    for part in parts {
        if !part.determined {
            return None;
        }
        let c = part.class.unwrap();
        acc = Some(match acc {
            None => c,
            Some(a) => a.mul(&c),
        });
    }
    acc
}

/// Decide the value of one symbol `((x-mu)(x-b), (u-nu)(u-b'))` on a
/// box, if possible.  Besides the symbol as written, two rewritten
/// forms obtained from the surface equation are tried: with
/// `mubar = {0,a} \ {mu}` and `nubar = {0,a'} \ {nu}` one has, at every
/// point with `z != 0`,
///
/// ```text
/// ((x-mu)(x-b), (u-nu)(u-b'))  =  ((x-mu)(x-b), -(x-mubar)(u-nubar))
///                              =  (-(x-mubar)(u-nubar), (u-nu)(u-b'))
/// ```
///
/// since the product of the two slots differs from `-(x-mubar)(u-nubar)`
/// by the square `z^2 / ((x-mubar)(u-nubar))^2` and `(f, -fg) = (f, g)`.
#[allow(clippy::too_many_arguments)]
fn decide_symbol(
    s: &KummerSurface,
    p: i64,
    delta: u32,
    x0: i128,
    u0: i128,
    e: u32,
    mu: i64,
    nu: i64,
) -> Option<HalfInt> {
    let (a, b, ap, bp) = s.coeffs();
    let mubar = if mu == 0 { a } else { 0 };
    let nubar = if nu == 0 { ap } else { 0 };

    let fc = |n: i128| factor_class(n, p, e, delta);
    let x1 = fc(x0 - mu as i128);
    let x2 = fc(x0 - b as i128);
    let u1 = fc(u0 - nu as i128);
    let u2 = fc(u0 - bp as i128);
    let c1 = fc(x0 - mubar as i128);
    let c2 = fc(u0 - nubar as i128);
    let minus_one = square_class(-1, 1, Field::Padic(p)).unwrap();

    let slot_x = combine(&[&x1, &x2]);
    let slot_u = combine(&[&u1, &u2]);
    let cross = combine(&[&c1, &c2]).map(|c| c.mul(&minus_one));

    for (left, right) in [(&slot_x, &slot_u), (&slot_x, &cross), (&cross, &slot_u)] {
        if let Some(l) = left {
            if l.is_square() {
                return Some(HalfInt::ZERO);
            }
        }
        if let Some(r) = right {
            if r.is_square() {
                return Some(HalfInt::ZERO);
            }
        }
        if let (Some(l), Some(r)) = (left, right) {
            return Some(hilbert_classes(l, r));
        }
    }
    None
}

/// The box-subdivision colouring algorithm.  Starting from the `p^2`
/// residue boxes of level 1, each box is in turn deleted if provably
/// empty, sent to colour 0 if inside the singular-point constancy
/// neighborhood, decided by the symbol-wise constancy test, or split
/// into its `p^2` children.
///
/// Requires `alpha.vector` to lie in the kernel over `Q_p`; otherwise
/// the evaluation is not constant near the singular points and the
/// subdivision cannot terminate.
pub fn colouring(s: &KummerSurface, alpha: &BrauerClass, p: i64) -> Result<Colouring> {
    if p < 2 || factor(p as i128).len() != 1 || factor(p as i128)[0].1 != 1 {
        return Err(Error::NotPrime(p));
    }
    if !kernel(s, Field::Padic(p)).contains(alpha.vector) {
        return Err(Error::NotInKernel(alpha.vector));
    }
    let l = appr_level(s, p);
    let (t, delta, shift) = if p == 2 { (l + 3, 3, 3) } else { (l + 1, 1, 0) };
    let cap = 2 * (l + shift) + 8;
    let (a, b, ap, bp) = s.coeffs();
    let x_roots = [0i128, a as i128, b as i128];
    let u_roots = [0i128, ap as i128, bp as i128];

    let mut boxes0 = Vec::new();
    let mut boxes_half = Vec::new();
    let mut empty = Vec::new();
    let mut work: VecDeque<(i128, i128, u32)> = VecDeque::new();
    for x0 in 0..p as i128 {
        for u0 in 0..p as i128 {
            work.push_back((x0, u0, 1));
        }
    }

    while let Some((x0, u0, e)) = work.pop_front() {
        let pe = (p as i128).pow(e);
        let make = |x0, u0, e| PadicBox { x0, u0, p, e };

        // Emptiness: no root of f or g inside the box, and the class of
        // f(x) g(u) determined constant non-square.  A determined square
        // class conversely certifies a point with z != 0.
        let x_root_in = x_roots.iter().any(|&r| (x0 - r).rem_euclid(pe) == 0);
        let u_root_in = u_roots.iter().any(|&r| (u0 - r).rem_euclid(pe) == 0);
        let mut fg_square = false;
        if !x_root_in && !u_root_in {
            let parts: Vec<FactorClass> = x_roots
                .iter()
                .map(|&r| factor_class(x0 - r, p, e, delta))
                .chain(u_roots.iter().map(|&r| factor_class(u0 - r, p, e, delta)))
                .collect();
            let refs: Vec<&FactorClass> = parts.iter().collect();
            if let Some(cls) = combine(&refs) {
                if !cls.is_square() {
                    empty.push(make(x0, u0, e));
                    continue;
                }
                fg_square = true;
            }
        }
        let certified_nonempty = x_root_in || u_root_in || fg_square;

        // Singular-point neighborhood: colour 0.
        if e >= t
            && x_roots.iter().any(|&r| val_or_inf(x0 - r, p) >= t)
            && u_roots.iter().any(|&r| val_or_inf(u0 - r, p) >= t)
        {
            boxes0.push(make(x0, u0, e));
            continue;
        }

        // Symbol-wise constancy.
        let mut total = HalfInt::ZERO;
        let mut decided = true;
        for &(mu, nu) in &alpha.pairs {
            match decide_symbol(s, p, delta, x0, u0, e, mu, nu) {
                Some(v) => total += v,
                None => {
                    decided = false;
                    break;
                }
            }
        }
        if decided {
            if total.is_zero() {
                boxes0.push(make(x0, u0, e));
                continue;
            }
            // A 1/2 verdict is only meaningful on a certified nonempty
            // box; an undetectedly empty box would corrupt the
            // constancy verdict.  Otherwise fall through to subdivide.
            if certified_nonempty {
                boxes_half.push(make(x0, u0, e));
                continue;
            }
        }

        // Subdivide.
        if e >= cap {
            return Err(Error::LevelCapExceeded { p, cap });
        }
        for i in 0..p as i128 {
            for j in 0..p as i128 {
                work.push_back((x0 + i * pe, u0 + j * pe, e + 1));
            }
        }
    }

    Ok(Colouring {
        p,
        surface: *s,
        vector: alpha.vector,
        level: l,
        cap,
        boxes0,
        boxes_half,
        empty,
        tail0: true,
    })
}

/// Verdict of [`constancy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Constancy {
    /// The evaluation map is constant on `S(Q_p)`; the constant value
    /// is 0 by the normalization at infinity.
    ConstantZero,
    NonConstant,
}

/// Is the evaluation map of `alpha` constant on `S(Q_p)`?
///
/// Decision order: good-reduction short-circuit; for odd `p`, the
/// residue criterion after moving the class to `e_1` by a coordinate
/// change and clearing even valuations (constant when `a = b != 0` or
/// `a' = b' != 0 (mod p)`; non-constant when `a != b`, `a' != b'` and
/// not all four coefficients are units); otherwise the full colouring.
pub fn constancy(s: &KummerSurface, alpha: &BrauerClass, p: i64) -> Result<Constancy> {
    if alpha.vector == 0 {
        return Ok(Constancy::ConstantZero);
    }
    let (a, b, ap, bp) = s.coeffs();
    if p > 2 {
        let bad = (2 * a as i128 * b as i128 * (a - b) as i128)
            .checked_mul(ap as i128 * bp as i128 * (ap - bp) as i128)
            .expect("coefficient product exceeds i128");
        if bad % p as i128 != 0 {
            return Ok(Constancy::ConstantZero);
        }
        if let Some(verdict) = residue_criterion(s, alpha, p) {
            return Ok(verdict);
        }
    }
    let col = colouring(s, alpha, p)?;
    Ok(if col.constant() { Constancy::ConstantZero } else { Constancy::NonConstant })
}

/// The residue fast path: search for a translation sending the class
/// vector to `e_1`, divide out even powers of `p` sidewise, and apply
/// the criterion if its hypotheses hold.
fn residue_criterion(s: &KummerSurface, alpha: &BrauerClass, p: i64) -> Option<Constancy> {
    for &mu0 in &[0, s.a, s.b] {
        for &nu0 in &[0, s.ap, s.bp] {
            let (s1, t) = crate::surface::translated(s, mu0, nu0, false, false);
            if t.apply_to_vector(alpha.vector) != 0b0001 {
                continue;
            }
            // x -> p^2k x rescaling divides both a and b by p^2k and
            // fixes e_1; same on the primed side.
            let reduce = |m: i64, n: i64| {
                let k = val_or_inf(m as i128, p).min(val_or_inf(n as i128, p)) / 2;
                let q = (p as i64).pow(2 * k);
                (m / q, n / q)
            };
            let (na, nb) = reduce(s1.a, s1.b);
            let (nap, nbp) = reduce(s1.ap, s1.bp);
            let eq = |m: i64, n: i64| (m - n) % p == 0;
            let unit = |m: i64| m % p != 0;
            if (eq(na, nb) && unit(na)) || (eq(nap, nbp) && unit(nap)) {
                return Some(Constancy::ConstantZero);
            }
            if !eq(na, nb)
                && !eq(nap, nbp)
                && !(unit(na) && unit(nb) && unit(nap) && unit(nbp))
            {
                return Some(Constancy::NonConstant);
            }
        }
    }
    None
}

/// The bad primes of the two curves at which the class's evaluation map
/// is non-constant; the real place never contributes.
pub fn relevant_primes(s: &KummerSurface, alpha: &BrauerClass) -> Result<BTreeSet<i64>> {
    let e = crate::ellcurve::CurveAB::new(s.a, s.b)?;
    let ep = crate::ellcurve::CurveAB::new(s.ap, s.bp)?;
    let mut bad: BTreeSet<i64> = crate::ellcurve::bad_primes(&e);
    bad.extend(crate::ellcurve::bad_primes(&ep));
    let mut out = BTreeSet::new();
    for p in bad {
        if constancy(s, alpha, p)? == Constancy::NonConstant {
            out.insert(p);
        }
    }
    Ok(out)
}

/// All local value vectors at `l` relevant primes compatible with the
/// product formula: coordinate sum 0, hence `2^(l-1)` of the `2^l`
/// tuples.
pub fn admissible_vectors(l: usize) -> Vec<Vec<HalfInt>> {
    let mut out = Vec::new();
    for mask in 0u64..(1 << l) {
        if mask.count_ones() % 2 == 0 {
            out.push((0..l).map(|i| HalfInt::from_bit((mask >> i) as u8 & 1)).collect());
        }
    }
    out
}

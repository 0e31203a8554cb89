//! Utilities for elliptic curves in the model `y^2 = x(x-a)(x-b)`:
//! bad primes, point counts over prime fields, j-invariants, and the
//! congruence heuristics used to filter isogenous pairs out of the
//! survey.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::localfields::factor;
use crate::{Error, Result};

/// The curve `y^2 = x(x-a)(x-b)`; full rational 2-torsion by model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CurveAB {
    pub a: i64,
    pub b: i64,
}

impl CurveAB {
    pub fn new(a: i64, b: i64) -> Result<CurveAB> {
        if a == 0 || b == 0 {
            return Err(Error::DegenerateSurface("curve coefficient zero".into()));
        }
        if a == b {
            return Err(Error::DegenerateSurface("a = b".into()));
        }
        Ok(CurveAB { a, b })
    }
}

/// The primes dividing `2 a b (a-b)`; a prime is absent iff the curve
/// has good reduction there.
pub fn bad_primes(e: &CurveAB) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    out.insert(2);
    for n in [e.a, e.b, e.a - e.b] {
        for (p, _) in factor(n as i128) {
            out.insert(p);
        }
    }
    out
}

/// Does `e` have good reduction at the odd prime `p`?
pub fn good_at(e: &CurveAB, p: i64) -> bool {
    p > 2 && e.a % p != 0 && e.b % p != 0 && (e.a - e.b) % p != 0
}

/// `#E(F_p)` and `a_p = p + 1 - #E(F_p)` by exhaustive enumeration with
/// quadratic-character classification.  Requires good reduction.
pub fn count_points(e: &CurveAB, p: i64) -> Result<(i64, i64)> {
    if !good_at(e, p) {
        return Err(Error::InvalidInput(format!("p = {p} is not an odd good prime")));
    }
    let pu = p as usize;
    let mut is_square = vec![false; pu];
    for x in 0..p as u64 {
        is_square[((x * x) % p as u64) as usize] = true;
    }
    let a = ((e.a % p) + p) % p;
    let b = ((e.b % p) + p) % p;
    let mut count: i64 = 1; // point at infinity
    for x in 0..p {
        let f = (x * ((x - a + p) % p) % p) * ((x - b + p) % p) % p;
        if f == 0 {
            count += 1;
        } else if is_square[f as usize] {
            count += 2;
        }
    }
    let ap = p + 1 - count;
    debug_assert!(ap * ap <= 4 * p, "Hasse bound violated");
    debug_assert!(count % 4 == 0, "full 2-torsion forces 4 | #E(F_p)");
    Ok((count, ap))
}

/// `a_p` for all odd good primes `p <= bound`, in increasing order.
pub fn ap_list(e: &CurveAB, bound: i64) -> Vec<(i64, i64)> {
    primes_up_to(bound)
        .into_iter()
        .filter(|&p| good_at(e, p))
        .map(|p| (p, count_points(e, p).unwrap().1))
        .collect()
}

/// `j = 256 (a^2 - ab + b^2)^3 / (a^2 b^2 (a-b)^2)`, the j-invariant of
/// the Legendre-type model.
pub fn j_invariant(e: &CurveAB) -> Ratio<i128> {
    let (a, b) = (e.a as i128, e.b as i128);
    let c = a * a - a * b + b * b;
    Ratio::new(256 * c * c * c, a * a * b * b * (a - b) * (a - b))
}

/// Result of the congruence heuristics comparing two curves.  All three
/// flags are necessary-condition tests up to the prime bound, not
/// proofs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsogenyReport {
    pub q_isogenous: bool,
    pub geometrically_isogenous: bool,
    pub prime_bound: i64,
    pub l_torsion_hom: BTreeMap<i64, bool>,
}

/// Odd torsion levels scanned by [`isogeny_flags`].
pub const TORSION_LEVELS: [i64; 3] = [3, 5, 7];

/// Heuristic isogeny tests: `q_isogenous` iff `a_p` agrees at every
/// common good odd prime up to the bound; `geometrically_isogenous` iff
/// `a_p^2` agrees (isogeny up to quadratic twist); `l_torsion_hom[l]`
/// iff `#E(F_p) = #E'(F_p) mod l` at every such prime `p != l`.
pub fn isogeny_flags(e: &CurveAB, ep: &CurveAB, prime_bound: i64) -> Result<IsogenyReport> {
    if prime_bound < 100 {
        return Err(Error::PrimeBoundTooSmall(prime_bound));
    }
    let mut q_isog = true;
    let mut geom = true;
    let mut l_hom: BTreeMap<i64, bool> = TORSION_LEVELS.iter().map(|&l| (l, true)).collect();
    for p in primes_up_to(prime_bound) {
        if !good_at(e, p) || !good_at(ep, p) {
            continue;
        }
        let (n1, a1) = count_points(e, p)?;
        let (n2, a2) = count_points(ep, p)?;
        if a1 != a2 {
            q_isog = false;
        }
        if a1 * a1 != a2 * a2 {
            geom = false;
        }
        for &l in &TORSION_LEVELS {
            if p != l && (n1 - n2) % l != 0 {
                l_hom.insert(l, false);
            }
        }
        if !q_isog && !geom && l_hom.values().all(|&v| !v) {
            break;
        }
    }
    if q_isog {
        geom = true;
    }
    Ok(IsogenyReport { q_isogenous: q_isog, geometrically_isogenous: geom, prime_bound, l_torsion_hom: l_hom })
}

/// Primes up to `n` inclusive by Eratosthenes.
pub fn primes_up_to(n: i64) -> Vec<i64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            let mut m = p * p;
            while m <= n {
                sieve[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as i64).collect()
}

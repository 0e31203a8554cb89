//! Rational point search on `w^2 = f(x,y) g(u,v)` for products of two
//! binary quartics `f_{ab}(x,y) = x y (x-ay)(x-by)`: square-free sieve
//! table, hash-join on square-class representatives, memory-friendly
//! multiplicative paging, the smooth-solutions mode, and exact
//! verification.
//!
//! # Examples
//!
//! ```
//! use kummer::pointsearch::{build_squarefree_table, form_square_class, BinaryQuartic};
//!
//! let table = build_squarefree_table(1000).unwrap();
//! let curve = BinaryQuartic::new(1, 25).unwrap();
//!
//! // factors 17, 1, 16, -8 -> square-free parts (17, 1, 1, -2) -> p3 = -34
//! let (p3, _hash) = form_square_class(17, 1, &curve, &table).unwrap();
//! assert_eq!(p3, -34);
//! assert_eq!(curve.eval(17, 1), -34 * 64); // -34 * 8^2
//! ```
//!
//! ```
//! use kummer::pointsearch::{naive_search, BinaryQuartic, SearchMode, SearchTask};
//!
//! let task = SearchTask::new(
//!     vec![BinaryQuartic::new(1, 25).unwrap(), BinaryQuartic::new(-25, -36).unwrap()],
//!     20,
//!     SearchMode::Full,
//! ).unwrap();
//! let solutions = naive_search(&task).unwrap();
//! assert!(solutions.iter().any(|s| (s.i, s.j) == (1, 2)));
//! ```

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;

use crate::localfields::{mul_squarefree, HalfInt, Place};
use crate::surface::{BrauerClass, KummerSurface};
use crate::{Error, Result};

/// The form `f_{ab}(x,y) = x y (x - ay)(x - by)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryQuartic {
    pub a: i64,
    pub b: i64,
}

impl BinaryQuartic {
    pub fn new(a: i64, b: i64) -> Result<BinaryQuartic> {
        if a == 0 || b == 0 {
            return Err(Error::ZeroArgument);
        }
        if a == b {
            return Err(Error::DegenerateSurface("a = b".into()));
        }
        Ok(BinaryQuartic { a, b })
    }

    /// The four linear factor values at `(x, y)`.
    pub fn factors(&self, x: i64, y: i64) -> [i64; 4] {
        [x, y, x - self.a * y, x - self.b * y]
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        self.factors(x, y).iter().map(|&f| f as i128).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchMode {
    Full,
    /// Only solutions whose common square class is free of primes above
    /// the bad-prime bound.
    SmoothOnly,
}

/// A simultaneous search over several quartics up to a height bound.
#[derive(Debug, Clone, Serialize)]
pub struct SearchTask {
    pub curves: Vec<BinaryQuartic>,
    pub bound: i64,
    pub mode: SearchMode,
    /// Override for the bad-prime bound `C`; default `2 max |a|,|b|`.
    pub smooth_bound: Option<i64>,
}

impl SearchTask {
    pub fn new(curves: Vec<BinaryQuartic>, bound: i64, mode: SearchMode) -> Result<SearchTask> {
        if curves.is_empty() || bound < 1 {
            return Err(Error::InvalidInput("empty task".into()));
        }
        Ok(SearchTask { curves, bound, mode, smooth_bound: None })
    }

    fn max_coeff(&self) -> i64 {
        self.curves.iter().map(|c| c.a.abs().max(c.b.abs())).max().unwrap()
    }

    /// Bound for the absolute values of all linear factors.
    pub fn factor_bound(&self) -> i64 {
        self.bound * (1 + self.max_coeff())
    }

    /// The bad-prime bound `C`.
    pub fn smooth_c(&self) -> i64 {
        self.smooth_bound.unwrap_or(2 * self.max_coeff())
    }
}

/// A non-trivial solution: `f_i(x,y) f_j(u,v)` is a nonzero square.
/// `(x, y)` and `(u, v)` are the canonical representatives (`y, v >= 1`,
/// coprime); `class_rep` is the common signed square-free class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Solution {
    pub i: usize,
    pub j: usize,
    pub x: i64,
    pub y: i64,
    pub u: i64,
    pub v: i64,
    pub class_rep: i128,
}

impl Solution {
    fn sort_key(&self) -> (usize, usize, i64, i64, i64, i64, bool, bool) {
        (self.i, self.j, self.x.abs(), self.y, self.u.abs(), self.v, self.x < 0, self.u < 0)
    }
}

/// Square-free parts and smallest prime factors of `1..=L` by linear
/// sieve.
pub struct SieveTables {
    pub limit: i64,
    sf: Vec<u32>,
    spf: Vec<u32>,
}

const TABLE_BUDGET: u64 = 1 << 27;

pub fn build_squarefree_table(limit: i64) -> Result<SieveTables> {
    if limit < 1 {
        return Err(Error::InvalidInput("table limit must be positive".into()));
    }
    if limit as u64 > TABLE_BUDGET {
        return Err(Error::TableBudget { requested: limit as u64, budget: TABLE_BUDGET });
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let ip = i * p as usize;
            if p > spf[i] || ip > n {
                break;
            }
            spf[ip] = p;
        }
    }
    let mut sf = vec![0u32; n + 1];
    if n >= 1 {
        sf[1] = 1;
    }
    for i in 2..=n {
        let p = spf[i] as usize;
        let rest = i / p;
        sf[i] = if sf[rest] % p as u32 == 0 { sf[rest] / p as u32 } else { sf[rest] * p as u32 };
    }
    Ok(SieveTables { limit, sf, spf })
}

impl SieveTables {
    /// Signed square-free part of a nonzero `n` with `|n| <= limit`.
    pub fn squarefree(&self, n: i64) -> i64 {
        debug_assert!(n != 0 && n.abs() <= self.limit);
        let s = self.sf[n.unsigned_abs() as usize] as i64;
        if n < 0 {
            -s
        } else {
            s
        }
    }

    pub fn smallest_prime_factor(&self, n: i64) -> i64 {
        debug_assert!(n >= 2 && n <= self.limit);
        self.spf[n as usize] as i64
    }

    /// Does `n` contain a prime `> c` to odd order?
    fn has_rough_odd_part(&self, n: i64, c: i64) -> bool {
        let mut s = self.sf[n.unsigned_abs() as usize];
        while s > 1 {
            let p = self.spf[s as usize];
            if p as i64 > c {
                return true;
            }
            s /= p;
        }
        false
    }
}

/// The square-class representative `p3` of `f(x,y)` together with its
/// word-sized hash.  The reduction chain keeps every intermediate
/// square-free: for square-free `s, t` the product `(s/g)(t/g)` with
/// `g = gcd(s,t)` is square-free again.
pub fn form_square_class(
    x: i64,
    y: i64,
    curve: &BinaryQuartic,
    table: &SieveTables,
) -> Result<(i128, u64)> {
    let factors = curve.factors(x, y);
    if factors.iter().any(|&f| f == 0) {
        return Err(Error::TrivialPoint);
    }
    let m: Vec<i128> = factors.iter().map(|&f| table.squarefree(f) as i128).collect();
    let p1 = mul_squarefree(m[0], m[1]);
    let p2 = mul_squarefree(m[2], m[3]);
    let p3 = mul_squarefree(p1, p2);
    Ok((p3, p3 as u64))
}

/// Exact check that `f_i(x,y) f_j(u,v)` is a nonzero perfect square:
/// pairwise gcd cancellation across the eight factor values until they
/// are pairwise coprime, then each residual must be plus-or-minus a
/// square with positive sign product.  A wide-arithmetic square test
/// runs alongside and must agree.
pub fn verify_solution(
    ci: &BinaryQuartic,
    cj: &BinaryQuartic,
    x: i64,
    y: i64,
    u: i64,
    v: i64,
) -> bool {
    let mut vals: Vec<i128> = ci
        .factors(x, y)
        .into_iter()
        .chain(cj.factors(u, v))
        .map(|f| f as i128)
        .collect();
    let ok = if vals.iter().any(|&f| f == 0) {
        false
    } else {
        loop {
            let mut changed = false;
            for i in 0..8 {
                for j in (i + 1)..8 {
                    let g = vals[i].abs().gcd(&vals[j].abs());
                    if g > 1 {
                        vals[i] /= g;
                        vals[j] /= g;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sign_positive = vals.iter().filter(|&&f| f < 0).count() % 2 == 0;
        sign_positive && vals.iter().all(|&f| is_square_i128(f.abs()))
    };
    // exact fallback
    let wide = BigInt::from(ci.eval(x, y)) * BigInt::from(cj.eval(u, v));
    let wide_ok = wide.is_positive() && {
        let r = wide.sqrt();
        &r * &r == wide
    };
    assert_eq!(ok, wide_ok, "gcd square test disagrees with wide arithmetic");
    ok
}

fn is_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i128;
    for c in r.saturating_sub(2)..=r + 2 {
        if c * c == n {
            return true;
        }
    }
    false
}

/// A stored candidate: hash word, coordinates, curve index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Quadruple {
    h: u64,
    x: i64,
    y: i64,
    i: usize,
}

/// Sort a batch of quadruples by hash, inspect the collision groups,
/// and emit every verified solution pair.
fn collide_and_emit(
    mut batch: Vec<Quadruple>,
    task: &SearchTask,
    table: &SieveTables,
    out: &mut BTreeSet<Solution>,
) {
    batch.sort_by_key(|q| q.h);
    let mut start = 0;
    while start < batch.len() {
        let mut end = start + 1;
        while end < batch.len() && batch[end].h == batch[start].h {
            end += 1;
        }
        for s in start..end {
            for t in (s + 1)..end {
                let (q1, q2) = (batch[s], batch[t]);
                emit_pair(q1, q2, task, table, out);
            }
        }
        start = end;
    }
}

fn emit_pair(
    q1: Quadruple,
    q2: Quadruple,
    task: &SearchTask,
    table: &SieveTables,
    out: &mut BTreeSet<Solution>,
) {
    // The same point on the same curve pairs with itself trivially
    // (f^2 is always a square); such pairs are not solutions of
    // interest and are dropped.
    if q1.i == q2.i && (q1.x, q1.y) == (q2.x, q2.y) {
        return;
    }
    let (mut l, mut r) = (q1, q2);
    if l.i > r.i || (l.i == r.i && (l.x.abs(), l.y, l.x < 0) > (r.x.abs(), r.y, r.x < 0)) {
        std::mem::swap(&mut l, &mut r);
    }
    if !verify_solution(&task.curves[l.i], &task.curves[r.i], l.x, l.y, r.x, r.y) {
        return;
    }
    let (p3, _) = form_square_class(l.x, l.y, &task.curves[l.i], table).unwrap();
    let (p3r, _) = form_square_class(r.x, r.y, &task.curves[r.i], table).unwrap();
    debug_assert_eq!(p3, p3r, "verified solution with distinct class representatives");
    out.insert(Solution { i: l.i + 1, j: r.i + 1, x: l.x, y: l.y, u: r.x, v: r.y, class_rep: p3 });
}

fn sorted(out: BTreeSet<Solution>) -> Vec<Solution> {
    let mut v: Vec<Solution> = out.into_iter().collect();
    v.sort_by_key(|s| s.sort_key());
    v
}

/// The hash-join search: one pass over all canonical `[x:y]`, one sort,
/// one collision scan.
pub fn naive_search(task: &SearchTask) -> Result<Vec<Solution>> {
    let table = build_squarefree_table(task.factor_bound())?;
    let mut batch = Vec::new();
    let b = task.bound;
    for y in 1..=b {
        for x in -b..=b {
            if x == 0 || x.unsigned_abs().gcd(&y.unsigned_abs()) != 1 {
                continue;
            }
            for (i, curve) in task.curves.iter().enumerate() {
                match form_square_class(x, y, curve, &table) {
                    Ok((_, h)) => batch.push(Quadruple { h, x, y, i }),
                    Err(Error::TrivialPoint) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    collide_and_emit(batch, task, &table, &mut out);
    Ok(sorted(out))
}

/// All `(x, y)` with `y in [1, B]`, `x in [-B, B] \ {0}`, `gcd = 1`,
/// realizing `|slot value| = m` for one of the four factor slots of the
/// curve.  Linear parametrization, no factorization.
fn representations(m: i64, bound: i64, curve: &BinaryQuartic, out: &mut Vec<(i64, i64)>) {
    out.clear();
    let b = bound;
    let mut push = |x: i64, y: i64| {
        if x != 0 && x.abs() <= b && (1..=b).contains(&y) && x.unsigned_abs().gcd(&y.unsigned_abs()) == 1
        {
            out.push((x, y));
        }
    };
    if m <= b {
        for y in 1..=b {
            push(m, y); // |x| = m
            push(-m, y);
        }
        for x in -b..=b {
            push(x, m); // |y| = m
        }
    }
    for r in [curve.a, curve.b] {
        // |x - r y| = m: x = r y + s, window on y from |x| <= B
        for s in [m, -m] {
            if r == 0 {
                continue;
            }
            let (lo, hi) = {
                let lo = (-b - s).div_euclid(r);
                let hi = (b - s).div_euclid(r);
                (lo.min(hi) - 1, lo.max(hi) + 1)
            };
            for y in lo.max(1)..=hi.min(b) {
                push(r * y + s, y);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
}

/// The paging search.  Phase 1 walks page primes downward from the
/// largest prime `<= L` to the bad-prime bound `C`, handling for each
/// page only the factor values with odd page-prime valuation and
/// marking them treated; a solution surfaces exactly on the page of the
/// largest prime of its square class.  Phase 2 is the plain pass
/// restricted to unmarked (smooth) factor values.  `SmoothOnly` runs
/// phase 2 against markers pre-initialized from the sieve.
pub fn paged_search(task: &SearchTask) -> Result<Vec<Solution>> {
    let limit = task.factor_bound();
    let table = build_squarefree_table(limit)?;
    let c = task.smooth_c();
    let mut marked = vec![false; limit as usize + 1];
    let mut out = BTreeSet::new();

    match task.mode {
        SearchMode::Full => {
            let mut reps = Vec::new();
            for pp in (c + 1..=limit).rev() {
                if pp < 2 || table.smallest_prime_factor(pp) != pp {
                    continue;
                }
                let mut batch: HashSet<Quadruple> = HashSet::new();
                let mut m = pp;
                while m <= limit {
                    if !marked[m as usize] && odd_valuation(m, pp) {
                        for (i, curve) in task.curves.iter().enumerate() {
                            representations(m, task.bound, curve, &mut reps);
                            for &(x, y) in reps.iter() {
                                let factors = curve.factors(x, y);
                                if factors.iter().any(|&f| f == 0) {
                                    continue;
                                }
                                debug_assert_eq!(
                                    factors.iter().filter(|f| f.rem_euclid(pp) == 0).count(),
                                    1,
                                    "a good prime divides at most one factor"
                                );
                                if factors.iter().any(|&f| marked[f.unsigned_abs() as usize]) {
                                    continue;
                                }
                                let (_, h) = form_square_class(x, y, curve, &table)?;
                                batch.insert(Quadruple { h, x, y, i });
                            }
                        }
                        marked[m as usize] = true;
                    }
                    m += pp;
                }
                collide_and_emit(batch.into_iter().collect(), task, &table, &mut out);
            }
        }
        SearchMode::SmoothOnly => {
            for m in 2..=limit {
                if table.has_rough_odd_part(m, c) {
                    marked[m as usize] = true;
                }
            }
        }
    }

    // Smooth pass.
    let b = task.bound;
    let mut batch = Vec::new();
    for y in 1..=b {
        if marked[y as usize] {
            continue;
        }
        for x in -b..=b {
            if x == 0 || marked[x.unsigned_abs() as usize] || x.unsigned_abs().gcd(&y.unsigned_abs()) != 1
            {
                continue;
            }
            for (i, curve) in task.curves.iter().enumerate() {
                let factors = curve.factors(x, y);
                if factors.iter().any(|&f| f == 0) {
                    continue;
                }
                if factors[2..].iter().any(|&f| marked[f.unsigned_abs() as usize]) {
                    continue;
                }
                let (_, h) = form_square_class(x, y, curve, &table)?;
                batch.push(Quadruple { h, x, y, i });
            }
        }
    }
    collide_and_emit(batch, task, &table, &mut out);
    Ok(sorted(out))
}

fn odd_valuation(mut m: i64, p: i64) -> bool {
    let mut v = 0u32;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v % 2 == 1
}

/// The local evaluation vectors (at the class's relevant primes, in
/// increasing order) realized by rational points found up to the height
/// bound.  The result is always contained in the admissible vectors.
pub fn vector_coverage(
    s: &KummerSurface,
    alpha: &BrauerClass,
    bound: i64,
) -> Result<BTreeSet<Vec<HalfInt>>> {
    let primes: Vec<i64> = crate::evaluation::relevant_primes(s, alpha)?.into_iter().collect();
    let task = SearchTask::new(
        vec![BinaryQuartic::new(s.a, s.b)?, BinaryQuartic::new(s.ap, s.bp)?],
        bound,
        SearchMode::Full,
    )?;
    let mut vectors = BTreeSet::new();
    for sol in paged_search(&task)? {
        // only cross pairs are points of this surface
        if (sol.i, sol.j) != (1, 2) {
            continue;
        }
        let mut vec = Vec::with_capacity(primes.len());
        for &p in &primes {
            vec.push(crate::evaluation::evaluate_point(
                s,
                alpha,
                Place::Finite(p),
                (sol.x as i128, sol.y as i128),
                (sol.u as i128, sol.v as i128),
            )?);
        }
        vectors.insert(vec);
    }
    Ok(vectors)
}

/// Brute-force reference: all canonical pairs, exact wide-integer
/// square test.  For cross-validation at small bounds only.
pub fn brute_force_search(task: &SearchTask) -> Result<Vec<Solution>> {
    let table = build_squarefree_table(task.factor_bound())?;
    let b = task.bound;
    let mut points = Vec::new();
    for y in 1..=b {
        for x in -b..=b {
            if x != 0 && x.unsigned_abs().gcd(&y.unsigned_abs()) == 1 {
                points.push((x, y));
            }
        }
    }
    // exact class per (point, curve); the double loop compares classes
    // directly (no hash, no sort, no paging) and re-verifies matches
    let classes: Vec<Vec<Option<i128>>> = task
        .curves
        .iter()
        .map(|c| {
            points
                .iter()
                .map(|&(x, y)| form_square_class(x, y, c, &table).ok().map(|(p3, _)| p3))
                .collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    for (i, ci) in task.curves.iter().enumerate() {
        for j in i..task.curves.len() {
            for (pi, &(x, y)) in points.iter().enumerate() {
                let Some(p3) = classes[i][pi] else { continue };
                let start = if i == j { pi + 1 } else { 0 };
                for (pj, &(u, v)) in points.iter().enumerate().skip(start) {
                    if classes[j][pj] != Some(p3) {
                        continue;
                    }
                    assert!(verify_solution(ci, &task.curves[j], x, y, u, v));
                    let h = p3 as u64;
                    emit_pair(
                        Quadruple { h, x, y, i },
                        Quadruple { h, x: u, y: v, i: j },
                        task,
                        &table,
                        &mut out,
                    );
                }
            }
        }
    }
    Ok(sorted(out))
}

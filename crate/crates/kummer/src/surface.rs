//! The Kummer-surface data model: the 4x4 square-class matrix, its
//! kernel over `Q`, `Q_p` and `R`, classification of kernel vectors,
//! quaternion-symbol realizations and normal-form transformations.
//!
//! Kernel vectors of the matrix are represented as 4-bit masks: bit `i`
//! set means the basis vector `e_{i+1}` occurs.  The basis corresponds
//! to the quaternion algebras
//!
//! ```text
//! e1 <-> ((x-a)(x-b), (u-a')(u-b'))      e2 <-> ((x-a)(x-b), u(u-b'))
//! e3 <-> (x(x-b), (u-a')(u-b'))          e4 <-> (x(x-b), u(u-b'))
//! ```
//!
//! # Examples
//!
//! ```
//! use kummer::localfields::Field;
//! use kummer::surface::{KummerSurface, kernel, sz_matrix};
//!
//! let s = KummerSurface::new(1, 25, -25, -36).unwrap();
//! let m = sz_matrix(&s);
//! assert_eq!(m.entries[0], [1, 25, 900, 25]);
//! assert_eq!(m.reduced[1], [1, 1, -1, -11]); // entrywise square-free
//!
//! // over Q only e1 survives; over Q_5 every vector does
//! assert_eq!(kernel(&s, Field::Rational).nonzero_vectors(), vec![0b0001]);
//! assert_eq!(kernel(&s, Field::Padic(5)).dim(), 4);
//! ```
//!
//! ```
//! use kummer::surface::{classify, ClassType};
//!
//! assert_eq!(classify(0b0001).unwrap(), ClassType::Type1);
//! assert_eq!(classify(0b0110).unwrap(), ClassType::Type2); // e2 + e3
//! ```

use serde::Serialize;

use crate::localfields::{square_class, Field, SquareClass};
use crate::{Error, Result};

/// The coefficient quadruple `(a, b, a', b')` of the affine model
/// `z^2 = x(x-a)(x-b) u(u-a')(u-b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KummerSurface {
    pub a: i64,
    pub b: i64,
    pub ap: i64,
    pub bp: i64,
}

impl KummerSurface {
    pub fn new(a: i64, b: i64, ap: i64, bp: i64) -> Result<KummerSurface> {
        if a == 0 || b == 0 || ap == 0 || bp == 0 {
            return Err(Error::DegenerateSurface("a coefficient is zero".into()));
        }
        if a == b {
            return Err(Error::DegenerateSurface("a = b".into()));
        }
        if ap == bp {
            return Err(Error::DegenerateSurface("a' = b'".into()));
        }
        Ok(KummerSurface { a, b, ap, bp })
    }

    pub fn coeffs(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.ap, self.bp)
    }

    /// The Brauer class attached to a kernel vector, realized as a
    /// multiset of quaternion-symbol pairs.
    pub fn brauer_class(&self, vector: u8) -> Result<BrauerClass> {
        if vector > 0x0f {
            return Err(Error::InvalidInput(format!("not an F_2^4 vector: {vector}")));
        }
        Ok(BrauerClass { vector, pairs: symbol_pairs(self, vector) })
    }
}

impl std::fmt::Display for KummerSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.ap, self.bp)
    }
}

/// The matrix of the homomorphism `mu: F_2^4 -> (k*/k*^2)^4`, with
/// entries as integers and entrywise square-free reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SZMatrix {
    pub entries: [[i128; 4]; 4],
    pub reduced: [[i128; 4]; 4],
}

/// The closed-form matrix for a surface.
pub fn sz_matrix(s: &KummerSurface) -> SZMatrix {
    let (a, b, ap, bp) = (s.a as i128, s.b as i128, s.ap as i128, s.bp as i128);
    let entries = [
        [1, a * b, ap * bp, -a * ap],
        [a * b, 1, a * ap, ap * (ap - bp)],
        [ap * bp, a * ap, 1, a * (a - b)],
        [-a * ap, ap * (ap - bp), a * (a - b), 1],
    ];
    let mut reduced = [[0i128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            reduced[i][j] = crate::localfields::squarefree_part(entries[i][j]).unwrap();
        }
    }
    SZMatrix { entries, reduced }
}

/// The `F_2`-kernel of the matrix over a field: all 16 vectors are
/// tested directly, per-row products being reduced through
/// [`SquareClass::mul`] to bound growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    vectors: Vec<u8>,
}

impl Kernel {
    pub fn contains(&self, v: u8) -> bool {
        self.vectors.contains(&v)
    }

    /// All kernel vectors, including zero, in increasing mask order.
    pub fn vectors(&self) -> &[u8] {
        &self.vectors
    }

    pub fn nonzero_vectors(&self) -> Vec<u8> {
        self.vectors.iter().copied().filter(|&v| v != 0).collect()
    }

    /// `F_2`-dimension.
    pub fn dim(&self) -> u32 {
        debug_assert!(self.vectors.len().is_power_of_two());
        self.vectors.len().trailing_zeros()
    }
}

pub fn kernel(s: &KummerSurface, field: Field) -> Kernel {
    let m = sz_matrix(s);
    let mut vectors = Vec::new();
    'vecs: for v in 0u8..16 {
        for row in 0..4 {
            let mut cls: Option<SquareClass> = None;
            for j in 0..4 {
                if v & (1 << j) != 0 {
                    let c = square_class(m.reduced[row][j], 1, field).unwrap();
                    cls = Some(match cls {
                        None => c,
                        Some(acc) => acc.mul(&c),
                    });
                }
            }
            if let Some(c) = cls {
                if !c.is_square() {
                    continue 'vecs;
                }
            }
        }
        vectors.push(v);
    }
    Kernel { vectors }
}

/// Type of a non-trivial 2-torsion class: expressible by one quaternion
/// symbol (Type 1) or needing two (Type 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClassType {
    Type1,
    Type2,
}

/// The six vectors needing at least two quaternion algebras.
const TYPE2_VECTORS: [u8; 6] = [0b1001, 0b0110, 0b0111, 0b1011, 0b1101, 0b1110];

pub fn classify(v: u8) -> Result<ClassType> {
    if v == 0 {
        return Err(Error::ZeroVector);
    }
    if v > 0x0f {
        return Err(Error::InvalidInput(format!("not an F_2^4 vector: {v}")));
    }
    if TYPE2_VECTORS.contains(&v) {
        Ok(ClassType::Type2)
    } else {
        Ok(ClassType::Type1)
    }
}

/// A 2-torsion Brauer class on a fixed surface: the `F_2^4` vector and
/// its realization as quaternion-symbol pairs `(mu, nu)` with
/// `mu in {0, a}` and `nu in {0, a'}`.  The pair `(mu, nu)` stands for
/// the symbol `((x - mu)(x - b), (u - nu)(u - b'))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrauerClass {
    pub vector: u8,
    pub pairs: Vec<(i64, i64)>,
}

/// The multiset of basis pairs whose `F_2`-sum is `v`.
pub fn symbol_pairs(s: &KummerSurface, v: u8) -> Vec<(i64, i64)> {
    let basis = [(s.a, s.ap), (s.a, 0), (0, s.ap), (0, 0)];
    (0..4).filter(|j| v & (1 << j) != 0).map(|j| basis[j]).collect()
}

// ---------------------------------------------------------------------------
// Coordinate changes and the induced action on kernel vectors.

/// Coordinates of the slot `(x - r1)(x - r2)`, `{r1, r2}` a two-element
/// subset of the roots `{0, A, B}`, in the basis
/// `{(x-A)(x-B), x(x-B)}` of the slot group.
fn slot_coords(r1: i64, r2: i64, big_a: i64, big_b: i64) -> (u8, u8) {
    let mut set = [r1, r2];
    set.sort_unstable();
    let target = |p: i64, q: i64| {
        let mut t = [p, q];
        t.sort_unstable();
        t == set
    };
    if target(big_a, big_b) {
        (1, 0)
    } else if target(0, big_b) {
        (0, 1)
    } else if target(0, big_a) {
        // x(x-A) = [x(x-B)] * [(x-A)(x-B)] up to the square (x-B)^2
        (1, 1)
    } else {
        panic!("slot roots {set:?} not among {{0,{big_a},{big_b}}}");
    }
}

/// A coordinate change of the surface model and its induced linear map
/// on `F_2^4`.  `vector_map[j]` is the image of `e_{j+1}` as a bitmask;
/// apply with [`Transform::apply_to_vector`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transform {
    /// Translation subtracted from `x` (one of `0, a, b` of the source).
    pub x_translation: i64,
    /// Translation subtracted from `u`.
    pub u_translation: i64,
    /// Common quadratic twist applied to all four coefficients.
    pub twist: i64,
    /// Whether the roles of the two nonzero x-roots were exchanged.
    pub x_swap: bool,
    /// Whether the roles of the two nonzero u-roots were exchanged.
    pub u_swap: bool,
    /// Whether the two curves were interchanged (with sign flip),
    /// i.e. `(a,b,a',b') -> (-a',-b',-a,-b)`.
    pub curve_swap: bool,
    pub vector_map: [u8; 4],
}

impl Transform {
    pub fn identity() -> Transform {
        Transform {
            x_translation: 0,
            u_translation: 0,
            twist: 1,
            x_swap: false,
            u_swap: false,
            curve_swap: false,
            vector_map: [1, 2, 4, 8],
        }
    }

    pub fn apply_to_vector(&self, v: u8) -> u8 {
        let mut out = 0;
        for j in 0..4 {
            if v & (1 << j) != 0 {
                out ^= self.vector_map[j];
            }
        }
        out
    }

    fn compose_map(first: [u8; 4], second: &Transform) -> [u8; 4] {
        let mut out = [0u8; 4];
        for j in 0..4 {
            out[j] = second.apply_to_vector(first[j]);
        }
        out
    }
}

/// Translate `x` by `mu0 in {0, a, b}` and `u` by `nu0 in {0, a', b'}`,
/// optionally exchanging the two nonzero roots on either side.  Returns
/// the resulting surface and the transform with its induced vector map.
pub fn translated(
    s: &KummerSurface,
    mu0: i64,
    nu0: i64,
    x_swap: bool,
    u_swap: bool,
) -> (KummerSurface, Transform) {
    // Shift roots; one of the three shifted roots is 0.
    let x_roots = [0 - mu0, s.a - mu0, s.b - mu0];
    let u_roots = [0 - nu0, s.ap - nu0, s.bp - nu0];
    let mut nz_x: Vec<i64> = x_roots.iter().copied().filter(|&r| r != 0).collect();
    let mut nz_u: Vec<i64> = u_roots.iter().copied().filter(|&r| r != 0).collect();
    assert_eq!(nz_x.len(), 2, "mu0 must be a root of the cubic");
    assert_eq!(nz_u.len(), 2, "nu0 must be a root of the cubic");
    if x_swap {
        nz_x.swap(0, 1);
    }
    if u_swap {
        nz_u.swap(0, 1);
    }
    let (big_a, big_b) = (nz_x[0], nz_x[1]);
    let (big_ap, big_bp) = (nz_u[0], nz_u[1]);
    let out = KummerSurface::new(big_a, big_b, big_ap, big_bp).expect("translation degenerate");

    // Old basis slot roots, shifted into the new coordinates.
    let x_parts = [(s.a - mu0, s.b - mu0), (0 - mu0, s.b - mu0)]; // mu = a resp. 0
    let u_parts = [(s.ap - nu0, s.bp - nu0), (0 - nu0, s.bp - nu0)];
    let mut vector_map = [0u8; 4];
    let basis_xu = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)]; // e1..e4 as (x-part, u-part)
    for (j, &(xi, ui)) in basis_xu.iter().enumerate() {
        let (ca, c0) = slot_coords(x_parts[xi].0, x_parts[xi].1, big_a, big_b);
        let (da, d0) = slot_coords(u_parts[ui].0, u_parts[ui].1, big_ap, big_bp);
        let mut img = 0u8;
        if ca & da == 1 {
            img ^= 1; // e1
        }
        if ca & d0 == 1 {
            img ^= 2; // e2
        }
        if c0 & da == 1 {
            img ^= 4; // e3
        }
        if c0 & d0 == 1 {
            img ^= 8; // e4
        }
        vector_map[j] = img;
    }
    let t = Transform {
        x_translation: mu0,
        u_translation: nu0,
        twist: 1,
        x_swap,
        u_swap,
        curve_swap: false,
        vector_map,
    };
    (out, t)
}

/// The involution `(a,b,a',b') -> (-a',-b',-a,-b)`: interchange the two
/// curves and twist both by -1.  Kernel vectors transform by swapping
/// the roles of `e_2` and `e_3`.
pub fn curve_swapped(s: &KummerSurface) -> (KummerSurface, Transform) {
    let out = KummerSurface::new(-s.ap, -s.bp, -s.a, -s.b).unwrap();
    let t = Transform {
        x_translation: 0,
        u_translation: 0,
        twist: 1,
        x_swap: false,
        u_swap: false,
        curve_swap: true,
        vector_map: [1, 4, 2, 8],
    };
    (out, t)
}

/// Normal form of a surface whose kernel over `Q` is non-trivial.
///
/// For a Type 1 vector the result has kernel vector `e_1` with
/// `a > b`, `a' < b'` and `a, b, -a', -b'` perfect squares up to the
/// applied twist; for Type 2 the kernel vector is `e_2 + e_3`.  The
/// transform records the composite substitution.
pub fn canonical_form(s: &KummerSurface) -> Result<(KummerSurface, Transform)> {
    let ker = kernel(s, Field::Rational);
    let nonzero = ker.nonzero_vectors();
    if nonzero.is_empty() {
        return Err(Error::NoKernelVector);
    }
    let type1: Vec<u8> = nonzero
        .iter()
        .copied()
        .filter(|&v| classify(v).unwrap() == ClassType::Type1)
        .collect();
    let (target, candidates) = if type1.is_empty() {
        (0b0110u8, nonzero)
    } else {
        (0b0001u8, type1)
    };

    // Find a translation sending some suitable kernel vector to the target.
    let mut found: Option<(KummerSurface, Transform)> = None;
    'search: for &mu0 in &[0, s.a, s.b] {
        for &nu0 in &[0, s.ap, s.bp] {
            let (s1, t) = translated(s, mu0, nu0, false, false);
            for &v in &candidates {
                if t.apply_to_vector(v) == target {
                    found = Some((s1, t));
                    break 'search;
                }
            }
        }
    }
    let (mut cur, mut t) = found.ok_or(Error::NoKernelVector)?;

    if target == 0b0001 {
        // Type 1: twist so that a, b, -a', -b' become squares.  With
        // e_1 in the kernel, ab, a'b' and -aa' are squares, so the
        // single twist by the square-free part of a suffices.
        let lambda = crate::localfields::squarefree_part(cur.a as i128)? as i64;
        if lambda != 1 {
            cur = KummerSurface::new(
                lambda * cur.a,
                lambda * cur.b,
                lambda * cur.ap,
                lambda * cur.bp,
            )?;
            t.twist = lambda;
        }
        // Order a > b and a' < b'; both swaps fix e_1.
        if cur.a < cur.b {
            let (s2, tw) = translated(&cur, 0, 0, true, false);
            t.vector_map = Transform::compose_map(t.vector_map, &tw);
            t.x_swap = true;
            cur = s2;
        }
        if cur.ap > cur.bp {
            let (s2, tw) = translated(&cur, 0, 0, false, true);
            t.vector_map = Transform::compose_map(t.vector_map, &tw);
            t.u_swap = true;
            cur = s2;
        }
    }
    Ok((cur, t))
}

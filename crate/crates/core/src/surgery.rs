//! Homological Dehn surgery calculus.
//!
//! A knot `K` in a homology lens space `M` with `H_1(M) = Z/p` is described by
//! its linking number `w` with a dual knot in a homology sphere and a
//! coefficient `q` coprime to `p`. Filling the exterior along the slope
//! `n/n'` gives
//!
//! ```text
//! H_1 = < [m], [mu] |  n [m] + n'w [mu] = 0,
//!                     -qw [m] +   p [mu] = 0 >
//! ```
//!
//! which is encoded as the 2x2 relator matrix `[[n, n'w], [-qw, p]]`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{self, AbelianGroup, IntMatrix};

/// Reduced fraction `n/n'` on the boundary torus. The meridian is `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    numerator: i64,
    denominator: i64,
}

impl Slope {
    pub const MERIDIAN: Slope = Slope { numerator: 1, denominator: 0 };

    /// Canonicalizes the sign so the denominator is positive (or the slope is
    /// `1/0`). Non-reduced fractions are rejected, never silently reduced.
    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        if numerator == 0 && denominator == 0 {
            return Err(Error::ZeroSlope);
        }
        if numerator.unsigned_abs().gcd(&denominator.unsigned_abs()) != 1 {
            return Err(Error::SlopeNotReduced(numerator, denominator));
        }
        if denominator == 0 {
            return Ok(Self::MERIDIAN);
        }
        if denominator < 0 {
            let (n, d) = numerator
                .checked_neg()
                .zip(denominator.checked_neg())
                .ok_or_else(|| Error::MalformedSlope(format!("{numerator}/{denominator}")))?;
            return Ok(Self { numerator: n, denominator: d });
        }
        Ok(Self { numerator, denominator })
    }

    /// Presentation coefficients `(n, n')` that need not be coprime. Only the
    /// sign is canonicalized; such a pair is a relator, not necessarily a curve.
    pub fn from_coefficients(numerator: i64, denominator: i64) -> Result<Self> {
        if numerator == 0 && denominator == 0 {
            return Err(Error::ZeroSlope);
        }
        let flip = denominator < 0 || (denominator == 0 && numerator < 0);
        if !flip {
            return Ok(Self { numerator, denominator });
        }
        numerator
            .checked_neg()
            .zip(denominator.checked_neg())
            .map(|(numerator, denominator)| Self { numerator, denominator })
            .ok_or_else(|| Error::MalformedSlope(format!("{numerator}/{denominator}")))
    }

    /// Parses `n/n'` like [`FromStr`] but accepts non-coprime pairs.
    pub fn parse_coefficients(s: &str) -> Result<Self> {
        let (n, d) = split_fraction(s)?;
        Self::from_coefficients(n, d)
    }

    pub fn is_reduced(&self) -> bool {
        self.numerator.unsigned_abs().gcd(&self.denominator.unsigned_abs()) == 1
    }

    /// The integral slope `n/1`.
    pub fn integral(n: i64) -> Self {
        Self { numerator: n, denominator: 1 }
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    pub fn is_meridian(&self) -> bool {
        *self == Self::MERIDIAN
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = split_fraction(s)?;
        Slope::new(n, d)
    }
}

fn split_fraction(s: &str) -> Result<(i64, i64)> {
    let malformed = || Error::MalformedSlope(s.to_string());
    let (n, d) = s.trim().split_once('/').ok_or_else(malformed)?;
    let n: i64 = n.trim().parse().map_err(|_| malformed())?;
    let d: i64 = d.trim().parse().map_err(|_| malformed())?;
    Ok((n, d))
}

/// Geometric intersection number `|a d - b c|` of `a/b` and `c/d`.
pub fn slope_distance(s1: Slope, s2: Slope) -> u128 {
    let ad = i128::from(s1.numerator) * i128::from(s2.denominator);
    let bc = i128::from(s1.denominator) * i128::from(s2.numerator);
    ad.abs_diff(bc)
}

/// Where a knot sits in `H_1(M) = Z/p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HomologyClass {
    Generator,
    NotNullHomologous,
    NullHomologous,
    Unknown,
}

impl HomologyClass {
    /// Class of a knot with linking number `w`.
    pub fn classify(w: i64, p: i64) -> Self {
        if is_generator(w, p) {
            Self::Generator
        } else if is_not_null_homologous(w, p) {
            Self::NotNullHomologous
        } else {
            Self::NullHomologous
        }
    }

    /// Generators are in particular not null-homologous.
    pub fn is_not_null_homologous(self) -> bool {
        matches!(self, Self::Generator | Self::NotNullHomologous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Generator => "generator",
            Self::NotNullHomologous => "not_null_homologous",
            Self::NullHomologous => "null_homologous",
            Self::Unknown => "unknown",
        }
    }
}

impl FromStr for HomologyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "generator" => Self::Generator,
            "not_null_homologous" | "not-null-homologous" => Self::NotNullHomologous,
            "null_homologous" | "null-homologous" => Self::NullHomologous,
            "unknown" => Self::Unknown,
            other => {
                return Err(Error::InvalidParams(format!("unknown homology class {other:?}")))
            }
        })
    }
}

/// `gcd(w, p) = 1`: the knot represents a generator of `Z/p`.
pub fn is_generator(w: i64, p: i64) -> bool {
    w.unsigned_abs().gcd(&p.unsigned_abs()) == 1
}

/// `p` does not divide `w`.
pub fn is_not_null_homologous(w: i64, p: i64) -> bool {
    w.checked_rem(p).is_some_and(|r| r != 0)
}

/// Surgery data `(p, q, w)` together with a filling slope `n/n'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SurgeryParams {
    p: i64,
    q: i64,
    w: i64,
    filling: Slope,
}

impl SurgeryParams {
    /// Requires `p >= 2`, `gcd(p, q) = 1` and `w != 0`. `q` is kept as given.
    pub fn new(p: i64, q: i64, w: i64, filling: Slope) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParams(format!("p must be at least 2, got {p}")));
        }
        if p.unsigned_abs().gcd(&q.unsigned_abs()) != 1 {
            return Err(Error::InvalidParams(format!("gcd(p, q) != 1 for p = {p}, q = {q}")));
        }
        if w == 0 {
            return Err(Error::InvalidParams("w must be non-zero".into()));
        }
        Ok(Self { p, q, w, filling })
    }

    /// Like [`SurgeryParams::new`], additionally asserting `p` does not divide `w`.
    pub fn not_null_homologous(p: i64, q: i64, w: i64, filling: Slope) -> Result<Self> {
        let params = Self::new(p, q, w, filling)?;
        if !is_not_null_homologous(w, p) {
            return Err(Error::Premise(format!("p = {p} divides w = {w}: knot is null-homologous")));
        }
        Ok(params)
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn w(&self) -> i64 {
        self.w
    }

    pub fn filling(&self) -> Slope {
        self.filling
    }

    pub fn with_filling(&self, filling: Slope) -> Self {
        Self { filling, ..*self }
    }

    pub fn homology_class(&self) -> HomologyClass {
        HomologyClass::classify(self.w, self.p)
    }

    /// Relator matrix entries, if they all fit in `i64`.
    pub(crate) fn small_entries(&self) -> Option<[i64; 4]> {
        let n = self.filling.numerator;
        let nprime = self.filling.denominator;
        Some([n, nprime.checked_mul(self.w)?, self.q.checked_mul(self.w)?.checked_neg()?, self.p])
    }

    pub(crate) fn determinant_i128(&self) -> Option<i128> {
        let (p, q, w) = (i128::from(self.p), i128::from(self.q), i128::from(self.w));
        let n = i128::from(self.filling.numerator);
        let nprime = i128::from(self.filling.denominator);
        n.checked_mul(p)?
            .checked_add(nprime.checked_mul(w)?.checked_mul(w)?.checked_mul(q)?)
    }
}

/// `[[n, n'w], [-qw, p]]`: rows are the two relators, columns the generators `[m]`, `[mu]`.
pub fn presentation_matrix(params: &SurgeryParams) -> IntMatrix {
    let n = BigInt::from(params.filling.numerator);
    let nprime = BigInt::from(params.filling.denominator);
    let (p, q, w) = (BigInt::from(params.p), BigInt::from(params.q), BigInt::from(params.w));
    IntMatrix::new(2, 2, vec![n, nprime * &w, -(q * w), p]).expect("2x2 has four entries")
}

/// First homology of the filled manifold.
pub fn surgered_homology(params: &SurgeryParams) -> AbelianGroup {
    if let Some(entries) = params.small_entries() {
        if let Some(diag) = exactlin::invariant_factors_i64(2, 2, &entries) {
            let free = 2 - diag.len();
            return AbelianGroup::from_invariant_factors(diag, free)
                .expect("Smith diagonal is a divisibility chain");
        }
    }
    exactlin::cokernel(&presentation_matrix(params))
}

/// `H_1(M_K(n/n')) = Z/p`, computed through the Smith form alone.
pub(crate) fn is_cyclic_of_order_p(params: &SurgeryParams) -> bool {
    match params
        .small_entries()
        .and_then(|e| exactlin::invariant_factors_i64(2, 2, &e))
    {
        Some(diag) => diag.len() == 2 && diag[0] == 1 && diag[1] == params.p,
        None => surgered_homology(params).is_cyclic_of_order(params.p),
    }
}

/// `n p + n' w^2 q`, the determinant of the presentation matrix.
pub fn filling_determinant(params: &SurgeryParams) -> BigInt {
    if let Some(d) = params.determinant_i128() {
        return BigInt::from(d);
    }
    let (p, q, w) = (BigInt::from(params.p), BigInt::from(params.q), BigInt::from(params.w));
    let n = BigInt::from(params.filling.numerator);
    let nprime = BigInt::from(params.filling.denominator);
    n * p + nprime * &w * &w * q
}

/// All integers `n` with `|n p + w^2 q| = p`, ascending. Either empty
/// (when `p` does not divide `w^2 q`) or `{-w^2 q / p - 1, -w^2 q / p + 1}`.
pub fn integral_return_slopes(p: i64, q: i64, w: i64) -> Result<Vec<BigInt>> {
    if p < 2 {
        return Err(Error::InvalidParams(format!("p must be at least 2, got {p}")));
    }
    if p.unsigned_abs().gcd(&q.unsigned_abs()) != 1 {
        return Err(Error::InvalidParams(format!("gcd(p, q) != 1 for p = {p}, q = {q}")));
    }
    if w == 0 {
        return Err(Error::InvalidParams("w must be non-zero".into()));
    }
    let w = BigInt::from(w);
    let numerator = &w * &w * BigInt::from(q);
    let (quot, rem) = numerator.div_rem(&BigInt::from(p));
    if !rem.is_zero() {
        return Ok(Vec::new());
    }
    let center = -quot;
    Ok(vec![&center - 1, &center + 1])
}

/// `|det|` of the presentation as an unsigned magnitude.
pub(crate) fn abs_determinant(params: &SurgeryParams) -> BigInt {
    filling_determinant(params).abs()
}

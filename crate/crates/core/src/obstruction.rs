//! Obstructions to a nontrivial filling that returns the ambient manifold.
//!
//! If two knots in `M` have homeomorphic exteriors, the meridian of one is a
//! filling slope `n/n'` of the other exterior that gives back `M`, so
//! `H_1(M_K(n/n')) = Z/p` and the slope distance is `Δ = n'`. The functions
//! here turn that homological constraint into divisibility facts about `Δ`
//! and combine them with known distance bounds into verdicts.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exactlin::AbelianGroup;
use crate::surgery::{self, HomologyClass, Slope, SurgeryParams};

/// Images `alpha = phi([m])`, `beta = phi([mu])` of a homomorphism onto `Z/p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhiSolution {
    pub alpha: i64,
    pub beta: i64,
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

/// Every surjection `phi` from the filled manifold's `H_1` onto `Z/p`, as
/// residue pairs in `[0, p)^2`, sorted lexicographically.
///
/// A pair defines a homomorphism iff `n a + n'w b = 0` and `qw a = 0` mod `p`
/// (the second relator `-qw [m] + p [mu]` reduces to `qw a` mod `p`), and it
/// is onto iff `gcd(a, b, p) = 1`. With `normalized`, pairs are further
/// restricted to `gcd(a, b) = 1` when both are nonzero and to units when the
/// other coordinate vanishes.
pub fn phi_solutions(params: &SurgeryParams, normalized: bool) -> Vec<PhiSolution> {
    let p = params.p();
    let pw = i128::from(p);
    let slope = params.filling();
    let w = i128::from(params.w());
    let residue = |x: i128| x.rem_euclid(pw) as i64;
    let n_res = residue(i128::from(slope.numerator()));
    let nw_res = residue((i128::from(slope.denominator()) % pw) * (w % pw));
    let qw_res = residue((i128::from(params.q()) % pw) * (w % pw));
    let mulmod = |a: i64, b: i64| (i128::from(a) * i128::from(b)).rem_euclid(pw) as i64;

    let mut out = Vec::new();
    for alpha in 0..p {
        if mulmod(qw_res, alpha) != 0 {
            continue;
        }
        for beta in 0..p {
            if (mulmod(n_res, alpha) + mulmod(nw_res, beta)) % p != 0 {
                continue;
            }
            if gcd3(alpha, beta, p) != 1 {
                continue;
            }
            if normalized && !normalization_holds(alpha, beta, p) {
                continue;
            }
            out.push(PhiSolution { alpha, beta });
        }
    }
    out
}

fn normalization_holds(alpha: i64, beta: i64, p: i64) -> bool {
    match (alpha, beta) {
        (0, 0) => false,
        (a, 0) => a.gcd(&p) == 1,
        (0, b) => b.gcd(&p) == 1,
        (a, b) => a.gcd(&b) == 1,
    }
}

/// `H_1(M_K(n/n')) = Z/p`, decided by the Smith form of the presentation.
pub fn zp_filling_possible(params: &SurgeryParams) -> bool {
    surgery::is_cyclic_of_order_p(params)
}

/// The same question answered without Smith form: the group has order `p`
/// and admits a surjection onto `Z/p`.
pub fn zp_filling_via_phi(params: &SurgeryParams) -> bool {
    let order_matches = match params.determinant_i128() {
        Some(d) => d.unsigned_abs() == params.p().unsigned_abs().into(),
        None => surgery::abs_determinant(params) == BigInt::from(params.p()),
    };
    order_matches && !phi_solutions(params, false).is_empty()
}

/// Which premise produced a guaranteed divisor of `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisorPremise {
    /// `p` prime and `p` does not divide `w`: `p | Δ`.
    PrimeOrder,
    /// Knot represents a generator: every prime factor of `p` divides `Δ`.
    Generator,
}

impl DivisorPremise {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PrimeOrder => "prime_order",
            Self::Generator => "generator",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaDivisor {
    pub value: u64,
    pub premise: DivisorPremise,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Product of the distinct prime factors of `p`.
pub fn radical(p: u64) -> u64 {
    prime_factors(p).into_iter().product()
}

/// The largest `d` with `d | Δ` guaranteed for any filling of the knot's
/// exterior that returns `H_1 = Z/p`.
pub fn guaranteed_delta_divisor(
    p: i64,
    q: i64,
    w: i64,
    class: HomologyClass,
) -> Result<DeltaDivisor> {
    SurgeryParams::new(p, q, w, Slope::MERIDIAN)?;
    let actual = HomologyClass::classify(w, p);
    let consistent = match class {
        HomologyClass::Unknown => true,
        HomologyClass::NotNullHomologous => actual.is_not_null_homologous(),
        asserted => asserted == actual,
    };
    if !consistent {
        return Err(Error::Premise(format!(
            "asserted class {} contradicts w = {w} (actual class {})",
            class.as_str(),
            actual.as_str()
        )));
    }
    if actual == HomologyClass::NullHomologous {
        return Err(Error::Premise(format!(
            "p = {p} divides w = {w}: null-homologous knots carry no divisor"
        )));
    }
    let pu = p.unsigned_abs();
    if is_prime(pu) {
        return Ok(DeltaDivisor { value: pu, premise: DivisorPremise::PrimeOrder });
    }
    if class == HomologyClass::Generator {
        return Ok(DeltaDivisor { value: radical(pu), premise: DivisorPremise::Generator });
    }
    Err(Error::Premise(format!(
        "p = {p} is composite and the knot is not asserted to represent a generator"
    )))
}

/// Why a given `(q, w, n)` cannot give `H_1 = Z/4` after integral filling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum L4qReason {
    /// `w` odd: `w^2 q / 4` is not an integer, so no integral slope has `|det| = 4`.
    NoIntegralCandidate,
    /// `n` is not one of the two integral slopes with `|det| = 4`.
    DeterminantMismatch,
    /// `n` is a candidate, hence even, but a surjection onto `Z/4` forces `n` odd.
    ParityClash,
}

impl L4qReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NoIntegralCandidate => "no_integral_candidate",
            Self::DeterminantMismatch => "determinant_mismatch",
            Self::ParityClash => "parity_clash",
        }
    }
}

/// Replay of the `L(4, q)` case analysis for one integral filling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L4qRecord {
    pub q: i64,
    pub w: i64,
    pub n: i64,
    /// Integral slopes with `|4n + w^2 q| = 4`.
    pub integral_candidates: Vec<i64>,
    pub n_is_candidate: bool,
    pub w_odd: bool,
    pub w_two_mod_four: bool,
    /// Every candidate is even (vacuously true when there are none).
    pub candidates_even: bool,
    /// Residues of `n` mod 4 for which some normalized `(alpha, beta)`
    /// satisfies both relations mod 4.
    pub z4_admissible_n_residues: Vec<i64>,
    pub reason: Option<L4qReason>,
    pub obstructed: bool,
    pub homology: AbelianGroup,
    /// `obstructed` agrees with the Smith form verdict on `Z/4`.
    pub agrees_with_homology: bool,
}

/// Residues `n mod 4` compatible with a normalized surjection onto `Z/4`.
fn z4_admissible_residues(q: i64, w: i64) -> Vec<i64> {
    let qw = (i128::from(q) * i128::from(w)).rem_euclid(4) as i64;
    let w4 = w.rem_euclid(4);
    (0..4)
        .filter(|&n| {
            (0..4).any(|alpha| {
                (0..4).any(|beta| {
                    (qw * alpha) % 4 == 0
                        && (n * alpha + w4 * beta) % 4 == 0
                        && normalization_holds(alpha, beta, 4)
                })
            })
        })
        .collect()
}

/// Case analysis for `p = 4`, `q` odd, `4 ∤ w`, integral slope `n/1`.
pub fn l4q_obstruction(q: i64, w: i64, n: i64) -> Result<L4qRecord> {
    if q % 2 == 0 {
        return Err(Error::Premise(format!("q = {q} must be odd")));
    }
    if w % 4 == 0 {
        return Err(Error::Premise(format!("4 divides w = {w}: knot is null-homologous")));
    }
    let integral_candidates: Vec<i64> = surgery::integral_return_slopes(4, q, w)?
        .iter()
        .filter_map(ToPrimitive::to_i64)
        .collect();
    let n_is_candidate = integral_candidates.contains(&n);
    let w_odd = w % 2 != 0;
    let w_two_mod_four = w.rem_euclid(4) == 2;
    let candidates_even = integral_candidates.iter().all(|c| c % 2 == 0);
    let z4_admissible_n_residues = z4_admissible_residues(q, w);

    let reason = if integral_candidates.is_empty() {
        Some(L4qReason::NoIntegralCandidate)
    } else if !n_is_candidate {
        Some(L4qReason::DeterminantMismatch)
    } else if !z4_admissible_n_residues.contains(&n.rem_euclid(4)) {
        Some(L4qReason::ParityClash)
    } else {
        None
    };
    let obstructed = reason.is_some();

    let params = SurgeryParams::new(4, q, w, Slope::integral(n))?;
    let homology = surgery::surgered_homology(&params);
    let agrees_with_homology = obstructed != homology.is_cyclic_of_order(4);

    Ok(L4qRecord {
        q,
        w,
        n,
        integral_candidates,
        n_is_candidate,
        w_odd,
        w_two_mod_four,
        candidates_even,
        z4_admissible_n_residues,
        reason,
        obstructed,
        homology,
        agrees_with_homology,
    })
}

macro_rules! flag_enum {
    ($name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),*
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $(Self::$variant => $text),*
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = s.replace('-', "_");
                $(if norm == $text { return Ok(Self::$variant); })*
                Err(Error::InconsistentContext(format!(
                    "unknown {} value {s:?}", stringify!($name)
                )))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

flag_enum!(Ambient {
    Lens => "lens",
    Spherical => "spherical",
    NonHyperbolicOther => "non_hyperbolic_other",
    Hyperbolic => "hyperbolic",
    Unknown => "unknown",
});

flag_enum!(KnotGeometry {
    Hyperbolic => "hyperbolic",
    SeifertFiberedExterior => "seifert_fibered_exterior",
    NonHyperbolicOther => "non_hyperbolic_other",
    Unknown => "unknown",
});

impl Ambient {
    pub fn is_non_hyperbolic(self) -> bool {
        matches!(self, Self::Lens | Self::Spherical | Self::NonHyperbolicOther)
    }

    /// Lens spaces count as spherical.
    pub fn is_spherical(self) -> bool {
        matches!(self, Self::Lens | Self::Spherical)
    }
}

/// User-asserted facts about the ambient manifold and the knot. Nothing here
/// is computed; geometric classification is out of reach of homology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionContext {
    pub p: i64,
    pub p_is_prime: bool,
    pub ambient: Ambient,
    pub knot_geometry: KnotGeometry,
    pub homology_class: HomologyClass,
    pub ambient_is_l_space: Option<bool>,
    pub lens_q: Option<i64>,
}

impl DecisionContext {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InconsistentContext(format!("p must be at least 2, got {}", self.p)));
        }
        if self.p_is_prime != is_prime(self.p.unsigned_abs()) {
            return Err(Error::InconsistentContext(format!(
                "p = {} asserted {}prime",
                self.p,
                if self.p_is_prime { "" } else { "not " }
            )));
        }
        match (self.ambient, self.lens_q) {
            (Ambient::Lens, None) => {
                return Err(Error::InconsistentContext("lens ambient needs lens_q".into()))
            }
            (Ambient::Lens, Some(q)) if q.gcd(&self.p) != 1 => {
                return Err(Error::InconsistentContext(format!(
                    "gcd(p, lens_q) != 1 for p = {}, lens_q = {q}",
                    self.p
                )))
            }
            (Ambient::Lens, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::InconsistentContext(
                    "lens_q given but ambient is not a lens space".into(),
                ))
            }
            (_, None) => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R3 => "R3",
            Self::R4 => "R4",
            Self::R5 => "R5",
            Self::R6 => "R6",
            Self::R7 => "R7",
        }
    }

    /// Source of the rule. R6 and R7 are imported results, not derived here.
    pub fn citation(self) -> &'static str {
        match self {
            Self::R1 => "lens space, generator class: every prime factor of p divides the distance; \
                         the Cyclic Surgery Theorem (Culler-Gordon-Luecke-Shalen) forces distance 1",
            Self::R2 => "lens space L(4,q): integral return slopes are even but a Z4 surjection \
                         needs an odd slope",
            Self::R3 => "prime p, not null-homologous: p divides the distance; Lackenby-Meyerhoff \
                         bounds exceptional distance by 8",
            Self::R4 => "spherical ambient, generator class: prime factors of p divide the distance; \
                         Boyer-Zhang bounds distance to a spherical filling by 5",
            Self::R5 => "non-hyperbolic ambient, generator class: prime factors of p divide the \
                         distance; Lackenby-Meyerhoff bounds exceptional distance by 8",
            Self::R6 => "imported: Rong (Seifert fibered exteriors) and Matignon (non-hyperbolic \
                         knots in lens spaces, cores excluded)",
            Self::R7 => "imported: Gainullin, null-homologous knots in L-spaces",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub rule: RuleId,
    pub citation: &'static str,
    pub delta_divisor: Option<u64>,
    pub delta_bound: Option<u64>,
    pub narrative: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Determined,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Determined => "determined",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificates: Vec<Certificate>,
}

fn certificate(
    rule: RuleId,
    delta_divisor: Option<u64>,
    delta_bound: Option<u64>,
    narrative: String,
) -> Certificate {
    Certificate { rule, citation: rule.citation(), delta_divisor, delta_bound, narrative }
}

fn evaluate(rule: RuleId, ctx: &DecisionContext) -> Option<Certificate> {
    let p = ctx.p.unsigned_abs();
    let hyperbolic_knot = ctx.knot_geometry == KnotGeometry::Hyperbolic;
    let generator = ctx.homology_class == HomologyClass::Generator;
    let largest_prime = prime_factors(p).last().copied().unwrap_or(1);
    match rule {
        RuleId::R1 if ctx.ambient == Ambient::Lens && generator => {
            let rad = radical(p);
            Some(certificate(
                rule,
                Some(rad),
                Some(1),
                format!(
                    "radical({p}) = {rad} divides any nonzero distance, but a non-Seifert exterior \
                     admits cyclic fillings only at distance 1"
                ),
            ))
        }
        RuleId::R2 if ctx.ambient == Ambient::Lens && p == 4 => Some(certificate(
            rule,
            None,
            None,
            "no integral filling of a non-null-homologous knot in L(4,q) has first homology Z4"
                .to_string(),
        )),
        RuleId::R3
            if ctx.ambient.is_non_hyperbolic()
                && hyperbolic_knot
                && ctx.p_is_prime
                && p > 8
                && ctx.homology_class.is_not_null_homologous() =>
        {
            Some(certificate(
                rule,
                Some(p),
                Some(8),
                format!("{p} divides any nonzero distance, which exceeds the bound 8"),
            ))
        }
        RuleId::R4
            if ctx.ambient.is_spherical() && hyperbolic_knot && generator && largest_prime >= 7 =>
        {
            Some(certificate(
                rule,
                Some(largest_prime),
                Some(5),
                format!("prime factor {largest_prime} of p divides any nonzero distance, which exceeds 5"),
            ))
        }
        RuleId::R5
            if ctx.ambient.is_non_hyperbolic()
                && hyperbolic_knot
                && generator
                && largest_prime >= 11 =>
        {
            Some(certificate(
                rule,
                Some(largest_prime),
                Some(8),
                format!("prime factor {largest_prime} of p divides any nonzero distance, which exceeds 8"),
            ))
        }
        RuleId::R6
            if ctx.ambient == Ambient::Lens
                && matches!(
                    ctx.knot_geometry,
                    KnotGeometry::SeifertFiberedExterior | KnotGeometry::NonHyperbolicOther
                ) =>
        {
            Some(certificate(
                rule,
                None,
                None,
                "non-hyperbolic knot in a lens space (solid torus exteriors excluded)".to_string(),
            ))
        }
        RuleId::R7
            if ctx.homology_class == HomologyClass::NullHomologous
                && ctx.ambient_is_l_space == Some(true) =>
        {
            Some(certificate(rule, None, None, "null-homologous knot in an L-space".to_string()))
        }
        _ => None,
    }
}

/// Runs the whole rule table; every matching rule contributes a certificate,
/// in table order.
pub fn decide_determined(ctx: &DecisionContext) -> Result<Verdict> {
    ctx.validate()?;
    let certificates: Vec<Certificate> =
        RuleId::ALL.iter().filter_map(|&r| evaluate(r, ctx)).collect();
    let outcome = if certificates.is_empty() {
        Outcome::Inconclusive
    } else {
        Outcome::Determined
    };
    Ok(Verdict { outcome, certificates })
}

//! Exhaustive desk-scale verification of the divisibility and `L(4, q)`
//! statements, plus self-checks of the linear algebra.
//!
//! Every sweep is split into independent chunks keyed by the outermost
//! parameters `(p, q)`. Chunks may run on a thread pool; counts are summed
//! and counterexamples sorted by parameter tuple afterwards, so a report does
//! not depend on the parallelism degree.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exactlin::{self, IntMatrix};
use crate::obstruction::{self, is_prime, radical};
use crate::surgery::{self, Slope, SurgeryParams};

const DEFAULT_BOXES: &str = include_str!("../config/boxes.toml");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PValues {
    Primes { max: i64 },
    Range { min: i64, max: i64 },
    List { values: Vec<i64> },
}

impl PValues {
    pub fn values(&self) -> Vec<i64> {
        match self {
            PValues::Primes { max } => (2..=*max).filter(|&p| is_prime(p as u64)).collect(),
            PValues::Range { min, max } => (*min..=*max).collect(),
            PValues::List { values } => values.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QPolicy {
    /// Every `q` in `[1, p - 1]` coprime to `p`.
    CoprimeResidues,
    /// Every odd `q` in the interval.
    OddRange { min: i64, max: i64 },
    List { values: Vec<i64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Value(i64),
    TimesP { times_p: i64 },
}

impl Bound {
    fn resolve(self, p: i64) -> i64 {
        match self {
            Bound::Value(v) => v,
            Bound::TimesP { times_p } => times_p * p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WRange {
    pub min: i64,
    pub max: Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WExclusion {
    /// Skip `w` divisible by `p`.
    NotDivisible,
    /// Keep only `w` coprime to `p`.
    Coprime,
}

impl WExclusion {
    fn keeps(self, w: i64, p: i64) -> bool {
        match self {
            WExclusion::NotDivisible => surgery::is_not_null_homologous(w, p),
            WExclusion::Coprime => surgery::is_generator(w, p),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            WExclusion::NotDivisible => "p∤w",
            WExclusion::Coprime => "gcd(w,p)=1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntRange {
    pub min: i64,
    pub max: i64,
}

impl IntRange {
    pub fn symmetric(radius: i64) -> Self {
        Self { min: -radius, max: radius }
    }

    fn iter(self) -> std::ops::RangeInclusive<i64> {
        self.min..=self.max
    }
}

/// A finite set of surgery tuples `(p, q, w, n, n')`.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterBox {
    pub p: PValues,
    pub q: QPolicy,
    pub w: WRange,
    pub w_exclusion: WExclusion,
    #[serde(default)]
    pub n: Option<IntRange>,
    #[serde(default)]
    pub nprime: Option<IntRange>,
}

impl ParameterBox {
    /// A single fully-specified tuple.
    pub fn point(p: i64, q: i64, w: i64, n: i64, nprime: i64, w_exclusion: WExclusion) -> Self {
        Self {
            p: PValues::List { values: vec![p] },
            q: QPolicy::List { values: vec![q] },
            w: WRange { min: w, max: Bound::Value(w) },
            w_exclusion,
            n: Some(IntRange { min: n, max: n }),
            nprime: Some(IntRange { min: nprime, max: nprime }),
        }
    }

    fn validate(&self, needs_slopes: bool) -> Result<()> {
        let ps = self.p.values();
        if ps.is_empty() {
            return Err(Error::MalformedBox("no p values".into()));
        }
        if let Some(&p) = ps.iter().find(|&&p| p < 2) {
            return Err(Error::MalformedBox(format!("p = {p} is below 2")));
        }
        match &self.q {
            QPolicy::OddRange { min, max } if min > max => {
                return Err(Error::MalformedBox(format!("empty q range [{min}, {max}]")))
            }
            QPolicy::List { values } if values.is_empty() => {
                return Err(Error::MalformedBox("empty q list".into()))
            }
            _ => {}
        }
        for &p in &ps {
            if let QPolicy::List { values } = &self.q {
                if let Some(q) = values.iter().find(|&&q| q.gcd(&p) != 1) {
                    return Err(Error::MalformedBox(format!("q = {q} is not coprime to p = {p}")));
                }
            }
            if self.w.min > self.w.max.resolve(p) {
                return Err(Error::MalformedBox(format!("empty w range for p = {p}")));
            }
        }
        if needs_slopes {
            let (Some(n), Some(nprime)) = (self.n, self.nprime) else {
                return Err(Error::MalformedBox("n and nprime ranges are required".into()));
            };
            if n.min > n.max || nprime.min > nprime.max {
                return Err(Error::MalformedBox("empty n or nprime range".into()));
            }
            if nprime.min < 1 {
                return Err(Error::MalformedBox("nprime values must be positive".into()));
            }
        }
        Ok(())
    }

    fn q_values(&self, p: i64) -> Vec<i64> {
        match &self.q {
            QPolicy::CoprimeResidues => (1..p).filter(|q| q.gcd(&p) == 1).collect(),
            QPolicy::OddRange { min, max } => (*min..=*max)
                .filter(|q| q % 2 != 0 && q.gcd(&p) == 1)
                .collect(),
            QPolicy::List { values } => values.clone(),
        }
    }

    fn w_values(&self, p: i64) -> impl Iterator<Item = i64> + '_ {
        let excl = self.w_exclusion;
        (self.w.min..=self.w.max.resolve(p)).filter(move |&w| excl.keeps(w, p))
    }

    /// Outermost work partition: every `(p, q)` pair, in order.
    fn outer_pairs(&self) -> Vec<(i64, i64)> {
        self.p
            .values()
            .into_iter()
            .flat_map(|p| self.q_values(p).into_iter().map(move |q| (p, q)))
            .collect()
    }

    pub fn describe(&self) -> String {
        let p = match &self.p {
            PValues::Primes { max } => format!("p prime <= {max}"),
            PValues::Range { min, max } => format!("p in [{min},{max}]"),
            PValues::List { values } => format!("p in {values:?}"),
        };
        let q = match &self.q {
            QPolicy::CoprimeResidues => "q in [1,p-1] coprime to p".to_string(),
            QPolicy::OddRange { min, max } => format!("q odd in [{min},{max}]"),
            QPolicy::List { values } => format!("q in {values:?}"),
        };
        let wmax = match self.w.max {
            Bound::Value(v) => v.to_string(),
            Bound::TimesP { times_p } => format!("{times_p}p"),
        };
        let mut out = format!(
            "{p}; {q}; w in [{},{wmax}] with {}",
            self.w.min,
            self.w_exclusion.as_str()
        );
        if let Some(n) = self.n {
            out.push_str(&format!("; n in [{},{}]", n.min, n.max));
        }
        if let Some(np) = self.nprime {
            out.push_str(&format!("; n' in [{},{}]", np.min, np.max));
        }
        out
    }
}

/// Every sweep the harness knows, keyed by the CLI's `--theorem` name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    /// Prime `p`, `p ∤ w`: every `Z/p` filling has `p | n'`.
    PrimeDivisor,
    /// `gcd(w, p) = 1`: every `Z/p` filling has `radical(p) | n'`.
    RadicalDivisor,
    /// `p = 4`, `q` odd, `4 ∤ w`: no integral filling gives `Z/4`.
    L4q,
    /// Smith-form cokernel equals the closed-form 2x2 cokernel.
    LinalgOracle,
    /// The meridian filling recovers `Z/p`.
    Meridian,
    /// Smith-form and (determinant, phi) criteria for `Z/p` agree.
    Criteria,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::PrimeDivisor,
        Theorem::RadicalDivisor,
        Theorem::L4q,
        Theorem::LinalgOracle,
        Theorem::Meridian,
        Theorem::Criteria,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::PrimeDivisor => "i",
            Theorem::RadicalDivisor => "ii",
            Theorem::L4q => "l4q",
            Theorem::LinalgOracle => "linalg",
            Theorem::Meridian => "meridian",
            Theorem::Criteria => "criteria",
        }
    }

    pub fn tuple_fields(self) -> &'static [&'static str] {
        match self {
            Theorem::LinalgOracle => &["a", "b", "c", "d"],
            Theorem::Meridian => &["p", "q", "w"],
            _ => &["p", "q", "w", "n", "nprime"],
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::MalformedBox(format!("unknown theorem {s:?}")))
    }
}

/// The default boxes, loaded from TOML.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub counterexample_cap: usize,
    pub linalg_entry_bound: i64,
    pub meridian: ParameterBox,
    pub theorem_i: ParameterBox,
    pub theorem_ii: ParameterBox,
    pub l4q: ParameterBox,
    pub criteria: ParameterBox,
}

impl BoxConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::MalformedBox(e.message().to_string()))
    }

    pub fn box_for(&self, theorem: Theorem) -> Option<&ParameterBox> {
        match theorem {
            Theorem::PrimeDivisor => Some(&self.theorem_i),
            Theorem::RadicalDivisor => Some(&self.theorem_ii),
            Theorem::L4q => Some(&self.l4q),
            Theorem::Meridian => Some(&self.meridian),
            Theorem::Criteria => Some(&self.criteria),
            Theorem::LinalgOracle => None,
        }
    }

    pub fn box_for_mut(&mut self, theorem: Theorem) -> Option<&mut ParameterBox> {
        match theorem {
            Theorem::PrimeDivisor => Some(&mut self.theorem_i),
            Theorem::RadicalDivisor => Some(&mut self.theorem_ii),
            Theorem::L4q => Some(&mut self.l4q),
            Theorem::Meridian => Some(&mut self.meridian),
            Theorem::Criteria => Some(&mut self.criteria),
            Theorem::LinalgOracle => None,
        }
    }
}

impl Default for BoxConfig {
    fn default() -> Self {
        Self::from_toml(DEFAULT_BOXES).expect("bundled boxes.toml is valid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Worker threads; 1 runs on the calling thread.
    pub jobs: usize,
    pub counterexample_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { jobs: 1, counterexample_cap: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Counterexample {
    pub tuple: Vec<i64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub box_description: String,
    pub cases_examined: u64,
    /// Cases whose filled homology is `Z/p` (the witnesses that make a pass non-vacuous).
    pub zp_fillings_found: u64,
    /// Cases with `|det| = p`.
    pub determinant_matches: u64,
    /// Cases that raised no counterexample.
    pub agreements: u64,
    pub counterexample_total: u64,
    /// The smallest tuples among the counterexamples, capped.
    pub counterexamples: Vec<Counterexample>,
    pub elapsed_ms: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexample_total == 0
    }
}

#[derive(Default)]
struct Tally {
    cases: u64,
    zp: u64,
    det_matches: u64,
    failures: u64,
    counterexamples: Vec<Counterexample>,
}

impl Tally {
    fn fail(&mut self, cap: usize, tuple: Vec<i64>, detail: String) {
        self.failures += 1;
        self.counterexamples.push(Counterexample { tuple, detail });
        if self.counterexamples.len() > 2 * cap.max(1) {
            self.counterexamples.sort();
            self.counterexamples.truncate(cap);
        }
    }

    fn merge(mut self, other: Tally, cap: usize) -> Tally {
        self.cases += other.cases;
        self.zp += other.zp;
        self.det_matches += other.det_matches;
        self.failures += other.failures;
        self.counterexamples.extend(other.counterexamples);
        self.counterexamples.sort();
        self.counterexamples.truncate(cap);
        self
    }
}

fn run_chunks<I, F>(items: &[I], opts: VerifyOptions, work: F) -> Result<Tally>
where
    I: Sync,
    F: Fn(&I, &mut Tally) + Sync,
{
    let cap = opts.counterexample_cap;
    let chunk = |item: &I| {
        let mut t = Tally::default();
        work(item, &mut t);
        t
    };
    let partials: Vec<Tally> = if opts.jobs <= 1 {
        items.iter().map(chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::MalformedBox(format!("thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(chunk).collect())
    };
    Ok(partials
        .into_iter()
        .fold(Tally::default(), |acc, t| acc.merge(t, cap)))
}

fn finish(theorem: Theorem, description: String, tally: Tally, started: Instant) -> VerificationReport {
    VerificationReport {
        theorem,
        box_description: description,
        cases_examined: tally.cases,
        zp_fillings_found: tally.zp,
        determinant_matches: tally.det_matches,
        agreements: tally.cases - tally.failures.min(tally.cases),
        counterexample_total: tally.failures,
        counterexamples: tally.counterexamples,
        elapsed_ms: started.elapsed().as_millis() as u64,
    }
}

/// Calls `visit` for every coefficient pair `(n, n')` of the box, with
/// `(p, q, w)` fixed. Pairs are not required to be coprime: the relator
/// `n [m] + n'w [mu]` is defined for all of them.
fn for_each_filling(
    bx: &ParameterBox,
    p: i64,
    q: i64,
    mut visit: impl FnMut(SurgeryParams),
) {
    let (n_range, nprime_range) = (bx.n.expect("validated"), bx.nprime.expect("validated"));
    for w in bx.w_values(p) {
        for nprime in nprime_range.iter() {
            for n in n_range.iter() {
                let Ok(slope) = Slope::from_coefficients(n, nprime) else { continue };
                let Ok(params) = SurgeryParams::new(p, q, w, slope) else { continue };
                visit(params);
            }
        }
    }
}

fn tuple(params: &SurgeryParams) -> Vec<i64> {
    let s = params.filling();
    vec![params.p(), params.q(), params.w(), s.numerator(), s.denominator()]
}

fn is_det_match(params: &SurgeryParams) -> bool {
    params
        .determinant_i128()
        .map(|d| d.unsigned_abs() == u128::from(params.p().unsigned_abs()))
        .unwrap_or_else(|| surgery::abs_determinant(params) == params.p().into())
}

/// Every filling with `H_1 = Z/p` has `p | n'` (prime `p`, `p ∤ w`).
pub fn verify_theorem_i(bx: &ParameterBox, opts: VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    bx.validate(true)?;
    if let Some(p) = bx.p.values().into_iter().find(|&p| !is_prime(p as u64)) {
        return Err(Error::MalformedBox(format!("p = {p} is not prime")));
    }
    let cap = opts.counterexample_cap;
    let tally = run_chunks(&bx.outer_pairs(), opts, |&(p, q), t| {
        for_each_filling(bx, p, q, |params| {
            t.cases += 1;
            t.det_matches += u64::from(is_det_match(&params));
            if obstruction::zp_filling_possible(&params) {
                t.zp += 1;
                if params.filling().denominator() % p != 0 {
                    t.fail(cap, tuple(&params), format!("Z_{p} filling with {p} ∤ n'"));
                }
            }
        })
    })?;
    Ok(finish(Theorem::PrimeDivisor, bx.describe(), tally, started))
}

/// Every filling with `H_1 = Z/p` has `radical(p) | n'` (`gcd(w, p) = 1`).
pub fn verify_theorem_ii(bx: &ParameterBox, opts: VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    bx.validate(true)?;
    if bx.w_exclusion != WExclusion::Coprime {
        return Err(Error::MalformedBox("theorem ii needs the gcd(w,p)=1 exclusion".into()));
    }
    let cap = opts.counterexample_cap;
    let tally = run_chunks(&bx.outer_pairs(), opts, |&(p, q), t| {
        let rad = radical(p as u64) as i64;
        for_each_filling(bx, p, q, |params| {
            t.cases += 1;
            t.det_matches += u64::from(is_det_match(&params));
            if obstruction::zp_filling_possible(&params) {
                t.zp += 1;
                if params.filling().denominator() % rad != 0 {
                    t.fail(cap, tuple(&params), format!("Z_{p} filling with radical {rad} ∤ n'"));
                }
            }
        })
    })?;
    Ok(finish(Theorem::RadicalDivisor, bx.describe(), tally, started))
}

/// No integral filling in `L(4, q)` returns `Z/4`; on `|det| = 4` the
/// intermediate facts `w = 2 mod 4` and `n` even hold.
pub fn verify_l4q(bx: &ParameterBox, opts: VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    bx.validate(true)?;
    if bx.p.values() != [4] {
        return Err(Error::MalformedBox("l4q box needs p = 4 exactly".into()));
    }
    if bx.nprime != Some(IntRange { min: 1, max: 1 }) {
        return Err(Error::MalformedBox("l4q box needs n' = 1 exactly".into()));
    }
    if bx.w_exclusion != WExclusion::NotDivisible {
        return Err(Error::MalformedBox("l4q box needs the 4∤w exclusion".into()));
    }
    let cap = opts.counterexample_cap;
    let tally = run_chunks(&bx.outer_pairs(), opts, |&(p, q), t| {
        for_each_filling(bx, p, q, |params| {
            t.cases += 1;
            let (w, n) = (params.w(), params.filling().numerator());
            let mut problems = Vec::new();
            if obstruction::zp_filling_possible(&params) {
                t.zp += 1;
                problems.push("integral filling with H_1 = Z_4");
            }
            if is_det_match(&params) {
                t.det_matches += 1;
                if w.rem_euclid(4) != 2 || n % 2 != 0 {
                    problems.push("|det| = 4 without w = 2 mod 4 and n even");
                }
            }
            if !problems.is_empty() {
                t.fail(cap, tuple(&params), problems.join("; "));
            }
        })
    })?;
    Ok(finish(Theorem::L4q, bx.describe(), tally, started))
}

/// The meridian filling `1/0` gives back `Z/p`.
pub fn verify_meridian_identity(bx: &ParameterBox, opts: VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    bx.validate(false)?;
    let cap = opts.counterexample_cap;
    let tally = run_chunks(&bx.outer_pairs(), opts, |&(p, q), t| {
        for w in bx.w_values(p) {
            let Ok(params) = SurgeryParams::new(p, q, w, Slope::MERIDIAN) else { continue };
            t.cases += 1;
            t.det_matches += u64::from(is_det_match(&params));
            let group = surgery::surgered_homology(&params);
            if group.is_cyclic_of_order(p) {
                t.zp += 1;
            } else {
                t.fail(cap, vec![p, q, w], format!("meridian filling gave {group}"));
            }
        }
    })?;
    Ok(finish(Theorem::Meridian, bx.describe(), tally, started))
}

/// Smith-form criterion versus `|det| = p` plus an enumerated surjection.
pub fn verify_criterion_equivalence(
    bx: &ParameterBox,
    opts: VerifyOptions,
) -> Result<VerificationReport> {
    let started = Instant::now();
    bx.validate(true)?;
    let cap = opts.counterexample_cap;
    let tally = run_chunks(&bx.outer_pairs(), opts, |&(p, q), t| {
        for_each_filling(bx, p, q, |params| {
            t.cases += 1;
            t.det_matches += u64::from(is_det_match(&params));
            let by_snf = obstruction::zp_filling_possible(&params);
            let by_phi = obstruction::zp_filling_via_phi(&params);
            t.zp += u64::from(by_snf);
            if by_snf != by_phi {
                t.fail(cap, tuple(&params), format!("smith says {by_snf}, det+phi says {by_phi}"));
            }
        })
    })?;
    Ok(finish(Theorem::Criteria, bx.describe(), tally, started))
}

/// Smith-form cokernel against the closed-form oracle for every nonsingular
/// 2x2 matrix with entries in `[-entry_bound, entry_bound]`. Diagonal matrices
/// are also checked against `diag(gcd, lcm)`.
pub fn verify_linalg_oracle(entry_bound: i64, opts: VerifyOptions) -> Result<VerificationReport> {
    let started = Instant::now();
    if entry_bound < 1 {
        return Err(Error::MalformedBox(format!("entry bound must be positive, got {entry_bound}")));
    }
    let b = entry_bound;
    let cap = opts.counterexample_cap;
    let firsts: Vec<i64> = (-b..=b).collect();
    let tally = run_chunks(&firsts, opts, |&a, t| {
        for b2 in -b..=b {
            for c in -b..=b {
                for d in -b..=b {
                    if a * d - b2 * c == 0 {
                        continue;
                    }
                    t.cases += 1;
                    let m = IntMatrix::from_i64(2, 2, &[a, b2, c, d]).expect("2x2");
                    let snf = exactlin::cokernel(&m);
                    let oracle = exactlin::cokernel_2x2_oracle(&m).expect("nonsingular");
                    if snf != oracle {
                        t.fail(cap, vec![a, b2, c, d], format!("smith {snf} vs closed form {oracle}"));
                        continue;
                    }
                    if b2 == 0 && c == 0 {
                        let diag = exactlin::diagonal_2x2_oracle(&a.into(), &d.into());
                        if snf != diag {
                            t.fail(cap, vec![a, b2, c, d], format!("smith {snf} vs gcd/lcm {diag}"));
                        }
                    }
                }
            }
        }
    })?;
    let description = format!("all nonsingular 2x2 matrices with entries in [-{b},{b}]");
    Ok(finish(Theorem::LinalgOracle, description, tally, started))
}

/// Runs one named sweep with its box from `config`.
pub fn run_theorem(
    theorem: Theorem,
    config: &BoxConfig,
    opts: VerifyOptions,
) -> Result<VerificationReport> {
    match theorem {
        Theorem::PrimeDivisor => verify_theorem_i(&config.theorem_i, opts),
        Theorem::RadicalDivisor => verify_theorem_ii(&config.theorem_ii, opts),
        Theorem::L4q => verify_l4q(&config.l4q, opts),
        Theorem::Meridian => verify_meridian_identity(&config.meridian, opts),
        Theorem::Criteria => verify_criterion_equivalence(&config.criteria, opts),
        Theorem::LinalgOracle => verify_linalg_oracle(config.linalg_entry_bound, opts),
    }
}

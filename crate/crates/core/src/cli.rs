//! Command-line front end. Parsing lives in clap derives; [`run`] dispatches
//! to the library and renders deterministic JSON or TSV.
//!
//! Exit status: 0 success, 1 usage or input error, 2 verification found
//! counterexamples.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::exactlin::{self, AbelianGroup, IntMatrix, SnfDecomposition};
use crate::obstruction::{
    self, Ambient, DecisionContext, DeltaDivisor, KnotGeometry, L4qRecord, PhiSolution, Verdict,
};
use crate::surgery::{self, HomologyClass, Slope, SurgeryParams};
use crate::verify::{self, BoxConfig, Bound, IntRange, QPolicy, PValues, Theorem, VerificationReport, VerifyOptions};

/// Environment variable holding the default worker count for `verify`.
pub const JOBS_ENV: &str = "HOMLENS_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COUNTEREXAMPLE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Parser)]
#[command(name = "homlens", version, about = "Homology of Dehn fillings in homology lens spaces")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First homology of the filling n/n' of a knot with data (p, q, w).
    Homology {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, allow_negative_numbers = true)]
        q: i64,
        #[arg(long, allow_negative_numbers = true)]
        w: i64,
        #[arg(long, allow_hyphen_values = true)]
        slope: String,
        /// Accept a non-coprime coefficient pair as the relator.
        #[arg(long)]
        unreduced: bool,
    },
    /// Smith normal form of a matrix given as "a,b;c,d".
    Snf {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Distance between two slopes.
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        s1: String,
        #[arg(long, allow_hyphen_values = true)]
        s2: String,
    },
    /// Surjections (alpha, beta) of the filled homology onto Z/p.
    Phi {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, allow_negative_numbers = true)]
        q: i64,
        #[arg(long, allow_negative_numbers = true)]
        w: i64,
        #[arg(long, allow_hyphen_values = true)]
        slope: String,
        /// Accept a non-coprime coefficient pair as the relator.
        #[arg(long)]
        unreduced: bool,
        /// Keep only pairs with the normalized gcd conditions.
        #[arg(long)]
        alpha_normalized: bool,
    },
    /// Guaranteed divisor of the distance between a meridian and a return slope.
    Divisor {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, allow_negative_numbers = true)]
        q: i64,
        #[arg(long, allow_negative_numbers = true)]
        w: i64,
        #[arg(long, default_value = "unknown")]
        class: String,
    },
    /// Determined-by-complement verdict from asserted facts.
    Decide {
        #[arg(long)]
        ambient: String,
        #[arg(long)]
        knot: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        p: i64,
        #[arg(long, action = ArgAction::Set)]
        prime: bool,
        #[arg(long = "l-space", action = ArgAction::Set)]
        l_space: Option<bool>,
        #[arg(long = "lens-q", allow_negative_numbers = true)]
        lens_q: Option<i64>,
    },
    /// Case analysis for integral fillings in L(4, q).
    L4q {
        #[arg(long, allow_negative_numbers = true)]
        q: i64,
        #[arg(long, allow_negative_numbers = true)]
        w: i64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
    },
    /// Exhaustive sweep over a parameter box.
    Verify {
        /// One of: i, ii, l4q, linalg, meridian, criteria.
        #[arg(long)]
        theorem: String,
        /// TOML file replacing the bundled boxes.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p_max: Option<i64>,
        #[arg(long)]
        q_max: Option<i64>,
        #[arg(long)]
        w_max: Option<i64>,
        #[arg(long)]
        n_max: Option<i64>,
        #[arg(long)]
        nprime_max: Option<i64>,
        #[arg(long)]
        entry_bound: Option<i64>,
        /// Worker threads (defaults to $HOMLENS_JOBS, else 1).
        #[arg(long)]
        jobs: Option<usize>,
        /// Report elapsed_ms as 0 so output bytes depend only on the box.
        #[arg(long)]
        omit_timing: bool,
    },
}

/// Result of one invocation: exit status plus the bytes for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn ok(stdout: String) -> Self {
        Self { status: EXIT_OK, stdout, stderr: String::new() }
    }

    fn error(err: &Error) -> Self {
        Self { status: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {err}\n") }
    }
}

/// A value the CLI can print.
pub trait Emit {
    fn to_json(&self) -> Value;
    fn tsv_header(&self) -> Vec<&'static str>;
    fn tsv_rows(&self) -> Vec<Vec<String>>;
}

/// Serializes with sorted keys and a trailing newline (JSON), or a fixed
/// header row followed by data rows (TSV).
pub fn emit(value: &dyn Emit, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string(&value.to_json()).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = value.tsv_header().join("\t");
            s.push('\n');
            for row in value.tsv_rows() {
                s.push_str(&row.join("\t"));
                s.push('\n');
            }
            s
        }
    }
}

fn big(x: &BigInt) -> Value {
    Value::Number(Number::from_str(&x.to_string()).expect("integers are valid JSON numbers"))
}

fn opt_num(x: Option<u64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn opt_text(x: Option<u64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl Emit for AbelianGroup {
    fn to_json(&self) -> Value {
        json!({
            "free_rank": self.free_rank(),
            "invariant_factors": self.torsion().iter().map(big).collect::<Vec<_>>(),
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["invariant_factors", "free_rank"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![join(self.torsion()), self.free_rank().to_string()]]
    }
}

struct HomologyOutput {
    group: AbelianGroup,
    is_zp: bool,
}

impl Emit for HomologyOutput {
    fn to_json(&self) -> Value {
        let mut v = self.group.to_json();
        v["is_Zp"] = Value::Bool(self.is_zp);
        v
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["invariant_factors", "free_rank", "is_Zp"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        let mut row = self.group.tsv_rows().remove(0);
        row.push(self.is_zp.to_string());
        vec![row]
    }
}

fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(
        m.to_nested()
            .iter()
            .map(|row| Value::Array(row.iter().map(big).collect()))
            .collect(),
    )
}

struct SnfOutput {
    snf: SnfDecomposition,
    group: AbelianGroup,
}

impl Emit for SnfOutput {
    fn to_json(&self) -> Value {
        json!({
            "d": matrix_json(&self.snf.d),
            "u": matrix_json(&self.snf.u),
            "v": matrix_json(&self.snf.v),
            "diagonal": self.snf.diagonal().iter().map(big).collect::<Vec<_>>(),
            "cokernel": self.group.to_json(),
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["matrix", "row", "entries"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (name, m) in [("D", &self.snf.d), ("U", &self.snf.u), ("V", &self.snf.v)] {
            for i in 0..m.rows() {
                rows.push(vec![name.to_string(), i.to_string(), join(m.row(i))]);
            }
        }
        rows
    }
}

struct DistanceOutput(u128);

impl Emit for DistanceOutput {
    fn to_json(&self) -> Value {
        json!({ "distance": Number::from_str(&self.0.to_string()).expect("integer") })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["distance"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![self.0.to_string()]]
    }
}

struct PhiOutput {
    normalized: bool,
    solutions: Vec<PhiSolution>,
}

impl Emit for PhiOutput {
    fn to_json(&self) -> Value {
        json!({
            "count": self.solutions.len(),
            "normalized": self.normalized,
            "solutions": self.solutions.iter()
                .map(|s| json!({ "alpha": s.alpha, "beta": s.beta }))
                .collect::<Vec<_>>(),
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["alpha", "beta"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        self.solutions
            .iter()
            .map(|s| vec![s.alpha.to_string(), s.beta.to_string()])
            .collect()
    }
}

impl Emit for DeltaDivisor {
    fn to_json(&self) -> Value {
        json!({ "divisor": self.value, "premise": self.premise.as_str() })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["divisor", "premise"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![self.value.to_string(), self.premise.as_str().to_string()]]
    }
}

impl Emit for Verdict {
    fn to_json(&self) -> Value {
        let outcome = self.outcome.as_str();
        json!({
            "outcome": outcome,
            "certificates": self.certificates.iter().map(|c| json!({
                "rule": c.rule.as_str(),
                "citation": c.citation,
                "delta_divisor": opt_num(c.delta_divisor),
                "delta_bound": opt_num(c.delta_bound),
                "narrative": c.narrative,
                "outcome": outcome,
            })).collect::<Vec<_>>(),
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec!["rule", "citation", "delta_divisor", "delta_bound", "outcome", "narrative"]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        let outcome = self.outcome.as_str().to_string();
        if self.certificates.is_empty() {
            let dash = || "-".to_string();
            return vec![vec!["none".into(), dash(), dash(), dash(), outcome, dash()]];
        }
        self.certificates
            .iter()
            .map(|c| {
                vec![
                    c.rule.as_str().to_string(),
                    c.citation.to_string(),
                    opt_text(c.delta_divisor),
                    opt_text(c.delta_bound),
                    outcome.clone(),
                    c.narrative.clone(),
                ]
            })
            .collect()
    }
}

impl Emit for L4qRecord {
    fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "w": self.w,
            "n": self.n,
            "integral_candidates": self.integral_candidates,
            "n_is_candidate": self.n_is_candidate,
            "w_odd": self.w_odd,
            "w_two_mod_four": self.w_two_mod_four,
            "candidates_even": self.candidates_even,
            "z4_admissible_n_residues": self.z4_admissible_n_residues,
            "reason": self.reason.map_or(Value::Null, |r| Value::from(r.as_str())),
            "obstructed": self.obstructed,
            "homology": self.homology.to_json(),
            "agrees_with_homology": self.agrees_with_homology,
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        vec![
            "q",
            "w",
            "n",
            "integral_candidates",
            "n_is_candidate",
            "reason",
            "obstructed",
            "homology",
            "agrees_with_homology",
        ]
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.q.to_string(),
            self.w.to_string(),
            self.n.to_string(),
            join(&self.integral_candidates),
            self.n_is_candidate.to_string(),
            self.reason.map_or("-", |r| r.as_str()).to_string(),
            self.obstructed.to_string(),
            self.homology.to_string(),
            self.agrees_with_homology.to_string(),
        ]]
    }
}

impl Emit for VerificationReport {
    fn to_json(&self) -> Value {
        let fields = self.theorem.tuple_fields();
        let counterexamples: Vec<Value> = self
            .counterexamples
            .iter()
            .map(|c| {
                let tuple: Map<String, Value> = fields
                    .iter()
                    .zip(&c.tuple)
                    .map(|(k, v)| (k.to_string(), Value::from(*v)))
                    .collect();
                json!({ "tuple": tuple, "detail": c.detail })
            })
            .collect();
        json!({
            "theorem": self.theorem.as_str(),
            "box": self.box_description,
            "cases_examined": self.cases_examined,
            "zp_fillings_found": self.zp_fillings_found,
            "determinant_matches": self.determinant_matches,
            "agreements": self.agreements,
            "counterexample_total": self.counterexample_total,
            "counterexamples": counterexamples,
            "passed": self.passed(),
            "elapsed_ms": self.elapsed_ms,
        })
    }
    fn tsv_header(&self) -> Vec<&'static str> {
        let mut h = vec!["theorem"];
        h.extend_from_slice(self.theorem.tuple_fields());
        h.push("detail");
        h
    }
    fn tsv_rows(&self) -> Vec<Vec<String>> {
        self.counterexamples
            .iter()
            .map(|c| {
                let mut row = vec![self.theorem.as_str().to_string()];
                row.extend(c.tuple.iter().map(ToString::to_string));
                row.push(c.detail.clone());
                row
            })
            .collect()
    }
}

/// Parses `n/n'` into a canonical slope; `1/0` is the meridian.
pub fn parse_slope(text: &str) -> Result<Slope> {
    text.parse()
}

fn parse_filling(text: &str, unreduced: bool) -> Result<Slope> {
    if unreduced {
        Slope::parse_coefficients(text)
    } else {
        parse_slope(text)
    }
}

fn symmetric_or_upper(range: &mut IntRange, max: i64) {
    range.min = if range.min < 0 { -max } else { range.min };
    range.max = max;
}

fn not_applicable(flag: &str, theorem: Theorem) -> Error {
    Error::MalformedBox(format!("--{flag} does not apply to theorem {theorem}"))
}

#[allow(clippy::too_many_arguments)]
fn apply_overrides(
    config: &mut BoxConfig,
    theorem: Theorem,
    p_max: Option<i64>,
    q_max: Option<i64>,
    w_max: Option<i64>,
    n_max: Option<i64>,
    nprime_max: Option<i64>,
    entry_bound: Option<i64>,
) -> Result<()> {
    if let Some(b) = entry_bound {
        if theorem != Theorem::LinalgOracle {
            return Err(not_applicable("entry-bound", theorem));
        }
        config.linalg_entry_bound = b;
    }
    let Some(bx) = config.box_for_mut(theorem) else {
        for (flag, given) in [
            ("p-max", p_max.is_some()),
            ("q-max", q_max.is_some()),
            ("w-max", w_max.is_some()),
            ("n-max", n_max.is_some()),
            ("nprime-max", nprime_max.is_some()),
        ] {
            if given {
                return Err(not_applicable(flag, theorem));
            }
        }
        return Ok(());
    };
    if let Some(max) = p_max {
        bx.p = match &bx.p {
            PValues::Primes { .. } => PValues::Primes { max },
            PValues::Range { min, .. } => PValues::Range { min: *min, max },
            PValues::List { .. } => return Err(not_applicable("p-max", theorem)),
        };
    }
    if let Some(max) = q_max {
        match &mut bx.q {
            QPolicy::OddRange { min, max: hi } => {
                *min = if *min < 0 { -max } else { *min };
                *hi = max;
            }
            _ => return Err(not_applicable("q-max", theorem)),
        }
    }
    if let Some(max) = w_max {
        bx.w.min = if bx.w.min < 0 { -max } else { bx.w.min };
        bx.w.max = Bound::Value(max);
    }
    if let Some(max) = n_max {
        let range = bx.n.as_mut().ok_or_else(|| not_applicable("n-max", theorem))?;
        symmetric_or_upper(range, max);
    }
    if let Some(max) = nprime_max {
        if theorem == Theorem::L4q {
            return Err(not_applicable("nprime-max", theorem));
        }
        let range = bx.nprime.as_mut().ok_or_else(|| not_applicable("nprime-max", theorem))?;
        range.max = max;
    }
    Ok(())
}

fn jobs_from_env() -> Result<usize> {
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&j| j >= 1)
            .ok_or_else(|| Error::MalformedBox(format!("{JOBS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(1),
    }
}

fn run_inner(cli: &Cli) -> Result<(String, i32)> {
    let format = cli.format;
    let out = |v: &dyn Emit| (emit(v, format), EXIT_OK);
    Ok(match &cli.command {
        Command::Homology { p, q, w, slope, unreduced } => {
            let params = SurgeryParams::new(*p, *q, *w, parse_filling(slope, *unreduced)?)?;
            let group = surgery::surgered_homology(&params);
            let is_zp = group.is_cyclic_of_order(*p);
            out(&HomologyOutput { group, is_zp })
        }
        Command::Snf { matrix } => {
            let m: IntMatrix = matrix.parse()?;
            out(&SnfOutput { snf: exactlin::smith_normal_form(&m), group: exactlin::cokernel(&m) })
        }
        Command::Distance { s1, s2 } => {
            out(&DistanceOutput(surgery::slope_distance(parse_slope(s1)?, parse_slope(s2)?)))
        }
        Command::Phi { p, q, w, slope, unreduced, alpha_normalized } => {
            let params = SurgeryParams::new(*p, *q, *w, parse_filling(slope, *unreduced)?)?;
            out(&PhiOutput {
                normalized: *alpha_normalized,
                solutions: obstruction::phi_solutions(&params, *alpha_normalized),
            })
        }
        Command::Divisor { p, q, w, class } => {
            let class: HomologyClass = class.parse()?;
            out(&obstruction::guaranteed_delta_divisor(*p, *q, *w, class)?)
        }
        Command::Decide { ambient, knot, class, p, prime, l_space, lens_q } => {
            let ctx = DecisionContext {
                p: *p,
                p_is_prime: *prime,
                ambient: ambient.parse::<Ambient>()?,
                knot_geometry: knot.parse::<KnotGeometry>()?,
                homology_class: class.parse()?,
                ambient_is_l_space: *l_space,
                lens_q: *lens_q,
            };
            out(&obstruction::decide_determined(&ctx)?)
        }
        Command::L4q { q, w, n } => out(&obstruction::l4q_obstruction(*q, *w, *n)?),
        Command::Verify {
            theorem,
            config,
            p_max,
            q_max,
            w_max,
            n_max,
            nprime_max,
            entry_bound,
            jobs,
            omit_timing,
        } => {
            let theorem: Theorem = theorem.parse()?;
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::MalformedBox(format!("cannot read {}: {e}", path.display()))
                    })?;
                    BoxConfig::from_toml(&text)?
                }
                None => BoxConfig::default(),
            };
            apply_overrides(
                &mut cfg, theorem, *p_max, *q_max, *w_max, *n_max, *nprime_max, *entry_bound,
            )?;
            let jobs = match jobs {
                Some(0) => return Err(Error::MalformedBox("--jobs must be positive".into())),
                Some(j) => *j,
                None => jobs_from_env()?,
            };
            let opts = VerifyOptions { jobs, counterexample_cap: cfg.counterexample_cap };
            let mut report = verify::run_theorem(theorem, &cfg, opts)?;
            if *omit_timing {
                report.elapsed_ms = 0;
            }
            let status = report_status(&report);
            (emit(&report, format), status)
        }
    })
}

fn report_status(report: &VerificationReport) -> i32 {
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_COUNTEREXAMPLE
    }
}

/// Executes one parsed command.
pub fn run(cli: &Cli) -> RunOutput {
    match run_inner(cli) {
        Ok((stdout, status)) => RunOutput { status, stdout, stderr: String::new() },
        Err(e) => RunOutput::error(&e),
    }
}

/// Parses `args` (program name first) and runs; clap usage errors map to exit 1.
pub fn run_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                RunOutput { status: EXIT_USAGE, stdout: String::new(), stderr: rendered }
            } else {
                RunOutput::ok(rendered)
            }
        }
    }
}

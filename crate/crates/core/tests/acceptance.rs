//! End-to-end acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use homlens::cli::{emit, Format};
use homlens::exactlin::{cokernel_2x2_oracle, AbelianGroup};
use homlens::obstruction::{decide_determined, Ambient, DecisionContext, KnotGeometry, Outcome, RuleId};
use homlens::surgery::{presentation_matrix, surgered_homology};
use homlens::verify::{self, BoxConfig, Theorem, VerificationReport, VerifyOptions};
use homlens::{HomologyClass, Slope, SurgeryParams};
use num_bigint::BigInt;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sweep(theorem: Theorem) -> Result<VerificationReport, String> {
    let config = BoxConfig::default();
    let opts = VerifyOptions { jobs: 1, counterexample_cap: config.counterexample_cap };
    verify::run_theorem(theorem, &config, opts).map_err(|e| e.to_string())
}

fn clean(report: &VerificationReport) -> Result<(), String> {
    ensure(
        report.passed() && report.counterexamples.is_empty(),
        format!("{} counterexamples, first {:?}", report.counterexample_total, report.counterexamples.first()),
    )
}

fn summary(r: &VerificationReport) -> String {
    format!(
        "{} cases, {} Z/p fillings, {} |det| = p, {} ms",
        r.cases_examined, r.zp_fillings_found, r.determinant_matches, r.elapsed_ms
    )
}

fn meridian_identity() -> Check {
    let r = sweep(Theorem::Meridian)?;
    clean(&r)?;
    let expected: u64 = (2..=50i64)
        .map(|p| {
            let qs = (1..p).filter(|q| num_integer::gcd(*q, p) == 1).count() as u64;
            let ws = (1..=50).filter(|w| w % p != 0).count() as u64;
            qs * ws
        })
        .sum();
    ensure(r.cases_examined == expected, format!("examined {} of {expected}", r.cases_examined))?;
    ensure(r.zp_fillings_found == expected, "meridian filling not always Z/p")?;
    Ok(summary(&r))
}

fn prime_divisor() -> Check {
    let r = sweep(Theorem::PrimeDivisor)?;
    clean(&r)?;
    ensure(r.zp_fillings_found > 0, "no witnesses")?;
    Ok(summary(&r))
}

fn radical_divisor() -> Check {
    let r = sweep(Theorem::RadicalDivisor)?;
    clean(&r)?;
    ensure(r.zp_fillings_found > 0, "no witnesses")?;
    Ok(summary(&r))
}

fn l4q() -> Check {
    let r = sweep(Theorem::L4q)?;
    clean(&r)?;
    ensure(r.zp_fillings_found == 0, "found a Z/4 filling")?;
    ensure(r.determinant_matches > 0, "|det| = 4 sub-box is empty")?;
    ensure(r.cases_examined == 100 * 150 * 2001, format!("examined {}", r.cases_examined))?;
    Ok(summary(&r))
}

fn spot_values() -> Check {
    let cases = [(4, 1, 2, 0, 1, vec![2, 2]), (5, 1, 1, 0, 5, vec![5])];
    let mut seen = Vec::new();
    for (p, q, w, n, nprime, factors) in cases {
        let slope = Slope::from_coefficients(n, nprime).map_err(|e| e.to_string())?;
        let params = SurgeryParams::new(p, q, w, slope).map_err(|e| e.to_string())?;
        let got = surgered_homology(&params);
        let oracle = cokernel_2x2_oracle(&presentation_matrix(&params)).map_err(|e| e.to_string())?;
        let expected = AbelianGroup::from_invariant_factors(factors.into_iter().map(BigInt::from), 0)
            .map_err(|e| e.to_string())?;
        ensure(got == oracle && got == expected, format!("({p},{q},{w},{n}/{nprime}): {got} vs oracle {oracle}"))?;
        seen.push(format!("({p},{q},{w},{n}/{nprime}) = {got}"));
    }
    Ok(seen.join(", "))
}

fn linalg_oracle() -> Check {
    let r = sweep(Theorem::LinalgOracle)?;
    clean(&r)?;
    ensure(r.agreements == r.cases_examined, "disagreement")?;
    ensure(r.cases_examined > 190_000, format!("examined {}", r.cases_examined))?;
    Ok(summary(&r))
}

fn criterion_equivalence() -> Check {
    let r = sweep(Theorem::Criteria)?;
    clean(&r)?;
    ensure(r.agreements == r.cases_examined && r.zp_fillings_found > 0, "paths disagree or vacuous")?;
    Ok(summary(&r))
}

fn verdict_fixtures() -> Check {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let ctx = |ambient, knot, class, p, p_is_prime, lens_q| DecisionContext {
        p,
        p_is_prime,
        ambient,
        knot_geometry: knot,
        homology_class: class,
        ambient_is_l_space: None,
        lens_q,
    };
    let fixtures = [
        (
            ctx(Ambient::Lens, KnotGeometry::Unknown, HomologyClass::Generator, 7, true, Some(2)),
            Outcome::Determined,
            Some(RuleId::R1),
            "decide_r1.json",
        ),
        (
            ctx(Ambient::NonHyperbolicOther, KnotGeometry::Hyperbolic, HomologyClass::NotNullHomologous, 11, true, None),
            Outcome::Determined,
            Some(RuleId::R3),
            "decide_r3.json",
        ),
        (
            ctx(Ambient::NonHyperbolicOther, KnotGeometry::Hyperbolic, HomologyClass::NotNullHomologous, 7, true, None),
            Outcome::Inconclusive,
            None,
            "decide_r3_p7.json",
        ),
        (
            ctx(Ambient::Lens, KnotGeometry::Unknown, HomologyClass::Unknown, 4, false, Some(1)),
            Outcome::Determined,
            Some(RuleId::R2),
            "decide_r2.json",
        ),
    ];
    for (context, outcome, rule, file) in &fixtures {
        let verdict = decide_determined(context).map_err(|e| e.to_string())?;
        ensure(verdict.outcome == *outcome, format!("{file}: outcome {:?}", verdict.outcome))?;
        ensure(
            verdict.certificates.first().map(|c| c.rule) == *rule,
            format!("{file}: first rule {:?}", verdict.certificates.first().map(|c| c.rule)),
        )?;
        let expected = std::fs::read_to_string(golden.join(file)).map_err(|e| e.to_string())?;
        ensure(emit(&verdict, Format::Json) == expected, format!("{file}: certificate bytes differ"))?;
    }
    let r3 = decide_determined(&fixtures[1].0).map_err(|e| e.to_string())?;
    let c = &r3.certificates[0];
    ensure(c.delta_divisor == Some(11) && c.delta_bound == Some(8), "R3 divisor/bound")?;
    Ok(format!("{} fixtures match golden certificates", fixtures.len()))
}

fn determinism() -> Check {
    let config = BoxConfig::default();
    let bytes = |jobs| -> Result<String, String> {
        let opts = VerifyOptions { jobs, counterexample_cap: config.counterexample_cap };
        let mut r = verify::run_theorem(Theorem::PrimeDivisor, &config, opts).map_err(|e| e.to_string())?;
        r.elapsed_ms = 0;
        Ok(emit(&r, Format::Json) + &emit(&r, Format::Tsv))
    };
    let one = bytes(1)?;
    let eight = bytes(8)?;
    ensure(one == eight, "reports differ between 1 and 8 workers")?;
    Ok(format!("{} bytes identical at jobs 1 and 8", one.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("meridian filling recovers Z/p", meridian_identity),
        ("prime p, p not dividing w: Z/p filling forces p | n'", prime_divisor),
        ("generator class: Z/p filling forces radical(p) | n'", radical_divisor),
        ("no integral Z/4 filling in L(4,q)", l4q),
        ("spot values against the 2x2 closed form", spot_values),
        ("Smith form cokernel equals 2x2 closed form, entries in [-10,10]", linalg_oracle),
        ("Smith form criterion equals determinant plus surjection", criterion_equivalence),
        ("verdict fixtures", verdict_fixtures),
        ("byte-identical reports across worker counts", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

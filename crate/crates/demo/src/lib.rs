//! Browser bindings for `homlens`.
//!
//! The plain functions return JSON strings (or an error message) and are what
//! the native tests exercise; the `#[wasm_bindgen]` wrappers forward to them.

use homlens::obstruction::{self, guaranteed_delta_divisor};
use homlens::{HomologyClass, Slope, SurgeryParams};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest `|n|` and `n'` the filling map accepts.
pub const MAP_LIMIT: i64 = 200;

fn run_cli(args: Vec<String>) -> Result<String, String> {
    let out = homlens::cli::run_args(std::iter::once("homlens".to_string()).chain(args));
    if out.status == 0 {
        Ok(out.stdout.trim_end().to_string())
    } else {
        Err(out.stderr.trim_end().trim_start_matches("error: ").to_string())
    }
}

/// Same JSON as `homlens homology`.
pub fn homology_json(p: i64, q: i64, w: i64, slope: &str, unreduced: bool) -> Result<String, String> {
    let mut args = vec![
        "homology".into(),
        format!("--p={p}"),
        format!("--q={q}"),
        format!("--w={w}"),
        format!("--slope={slope}"),
    ];
    if unreduced {
        args.push("--unreduced".into());
    }
    run_cli(args)
}

/// Same JSON as `homlens decide`.
pub fn decide_json(
    ambient: &str,
    knot: &str,
    class: &str,
    p: i64,
    prime: bool,
    l_space: Option<bool>,
    lens_q: Option<i64>,
) -> Result<String, String> {
    let mut args = vec![
        "decide".into(),
        format!("--ambient={ambient}"),
        format!("--knot={knot}"),
        format!("--class={class}"),
        format!("--p={p}"),
        format!("--prime={prime}"),
    ];
    if let Some(l) = l_space {
        args.push(format!("--l-space={l}"));
    }
    if let Some(q) = lens_q {
        args.push(format!("--lens-q={q}"));
    }
    run_cli(args)
}

/// Which coefficient pairs `(n, n')`, `|n| <= n_radius`, `1 <= n' <= nprime_max`,
/// give `H_1 = Z/p`. `rows[k][j]` is 1 for `n' = k + 1`, `n = j - n_radius`.
pub fn filling_map_json(p: i64, q: i64, w: i64, n_radius: i64, nprime_max: i64) -> Result<String, String> {
    if !(0..=MAP_LIMIT).contains(&n_radius) || !(1..=MAP_LIMIT).contains(&nprime_max) {
        return Err(format!("map size must satisfy 0 <= radius <= {MAP_LIMIT}, 1 <= n' <= {MAP_LIMIT}"));
    }
    let base = SurgeryParams::new(p, q, w, Slope::MERIDIAN).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(nprime_max as usize);
    let mut hits = Vec::new();
    for nprime in 1..=nprime_max {
        let mut row = Vec::with_capacity((2 * n_radius + 1) as usize);
        for n in -n_radius..=n_radius {
            let slope = Slope::from_coefficients(n, nprime).map_err(|e| e.to_string())?;
            let zp = obstruction::zp_filling_possible(&base.with_filling(slope));
            if zp {
                hits.push(json!({ "n": n, "nprime": nprime, "reduced": slope.is_reduced() }));
            }
            row.push(u8::from(zp));
        }
        rows.push(row);
    }
    let class = HomologyClass::classify(w, p);
    let divisor = guaranteed_delta_divisor(p, q, w, class).ok().map(|d| d.value);
    let all_divisible = divisor
        .map(|d| hits.iter().all(|h| h["nprime"].as_i64().unwrap() % d as i64 == 0));
    Ok(json!({
        "p": p,
        "q": q,
        "w": w,
        "class": class.as_str(),
        "n_radius": n_radius,
        "nprime_max": nprime_max,
        "rows": rows,
        "zp_fillings": hits,
        "delta_divisor": divisor,
        "divisor_holds": all_divisible,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn homology(p: i32, q: i32, w: i32, slope: &str, unreduced: bool) -> Result<String, JsValue> {
    homology_json(p.into(), q.into(), w.into(), slope, unreduced).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decide(
    ambient: &str,
    knot: &str,
    class: &str,
    p: i32,
    prime: bool,
    l_space: Option<bool>,
    lens_q: Option<i32>,
) -> Result<String, JsValue> {
    decide_json(ambient, knot, class, p.into(), prime, l_space, lens_q.map(i64::from))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn filling_map(p: i32, q: i32, w: i32, n_radius: i32, nprime_max: i32) -> Result<String, JsValue> {
    filling_map_json(p.into(), q.into(), w.into(), n_radius.into(), nprime_max.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn homology_matches_cli() {
        let out = homology_json(4, 1, 2, "0/1", false).unwrap();
        assert_eq!(out, r#"{"free_rank":0,"invariant_factors":[2,2],"is_Zp":false}"#);
        let out = homology_json(5, 1, 1, "0/5", true).unwrap();
        assert_eq!(out, r#"{"free_rank":0,"invariant_factors":[5],"is_Zp":true}"#);
        assert_eq!(homology_json(5, 1, 1, "0/5", false).unwrap_err(), "slope not reduced: 0/5");
    }

    #[test]
    fn decide_lens_generator() {
        let v: Value = serde_json::from_str(
            &decide_json("lens", "unknown", "generator", 7, true, None, Some(2)).unwrap(),
        )
        .unwrap();
        assert_eq!(v["outcome"], "determined");
        assert!(decide_json("lens", "unknown", "generator", 7, true, None, None).is_err());
    }

    #[test]
    fn map_of_prime_order() {
        let v: Value = serde_json::from_str(&filling_map_json(5, 1, 1, 6, 10).unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 10);
        assert_eq!(v["rows"][0].as_array().unwrap().len(), 13);
        assert_eq!(v["delta_divisor"], 5);
        assert_eq!(v["divisor_holds"], true);
        let hits = v["zp_fillings"].as_array().unwrap();
        assert!(hits.iter().any(|h| h["n"] == 0 && h["nprime"] == 5 && h["reduced"] == false));
        assert!(hits.iter().all(|h| h["nprime"].as_i64().unwrap() % 5 == 0));
    }

    #[test]
    fn map_rejects_bad_input() {
        assert!(filling_map_json(5, 1, 1, MAP_LIMIT + 1, 1).is_err());
        assert!(filling_map_json(6, 2, 1, 3, 3).is_err());
        let v: Value = serde_json::from_str(&filling_map_json(6, 1, 6, 2, 2).unwrap()).unwrap();
        assert_eq!(v["delta_divisor"], Value::Null);
        assert_eq!(v["class"], "null_homologous");
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn homlens(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_homlens"))
        .args(args)
        .env_remove("HOMLENS_JOBS")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("homology_4_1_2.json", &["homology", "--p", "4", "--q", "1", "--w", "2", "--slope", "0/1"]),
    ("homology_4_1_2.tsv", &["--format", "tsv", "homology", "--p", "4", "--q", "1", "--w", "2", "--slope", "0/1"]),
    (
        "homology_5_1_1_unreduced.json",
        &["homology", "--p", "5", "--q", "1", "--w", "1", "--slope", "0/5", "--unreduced"],
    ),
    ("homology_meridian.json", &["homology", "--p", "5", "--q", "2", "--w", "1", "--slope", "1/0"]),
    ("snf_2x2.json", &["snf", "--matrix", "2,4;6,8"]),
    ("snf_2x2.tsv", &["--format", "tsv", "snf", "--matrix", "2,4;6,8"]),
    ("snf_singular.json", &["snf", "--matrix", "1,2;2,4"]),
    ("snf_row.json", &["snf", "--matrix", "1,2,3"]),
    ("distance.json", &["distance", "--s1", "1/0", "--s2", "3/7"]),
    ("distance.tsv", &["--format", "tsv", "distance", "--s1", "2/3", "--s2", "-1/4"]),
    ("phi_5_1_1.json", &["phi", "--p", "5", "--q", "1", "--w", "1", "--slope", "0/5", "--unreduced"]),
    ("phi_meridian.tsv", &["--format", "tsv", "phi", "--p", "5", "--q", "1", "--w", "1", "--slope", "1/0"]),
    (
        "phi_normalized.json",
        &["phi", "--p", "12", "--q", "5", "--w", "1", "--slope", "1/0", "--alpha-normalized"],
    ),
    ("divisor_prime.json", &["divisor", "--p", "5", "--q", "2", "--w", "1"]),
    ("divisor_radical.json", &["divisor", "--p", "12", "--q", "5", "--w", "1", "--class", "generator"]),
    (
        "divisor_radical.tsv",
        &["--format", "tsv", "divisor", "--p", "12", "--q", "5", "--w", "1", "--class", "generator"],
    ),
    (
        "decide_r1.json",
        &[
            "decide", "--ambient", "lens", "--knot", "unknown", "--class", "generator", "--p", "7",
            "--prime", "true", "--lens-q", "2",
        ],
    ),
    (
        "decide_r2.json",
        &[
            "decide", "--ambient", "lens", "--knot", "unknown", "--class", "unknown", "--p", "4",
            "--prime", "false", "--lens-q", "1",
        ],
    ),
    (
        "decide_r3.json",
        &[
            "decide", "--ambient", "non_hyperbolic_other", "--knot", "hyperbolic", "--class",
            "not_null_homologous", "--p", "11", "--prime", "true",
        ],
    ),
    (
        "decide_r3.tsv",
        &[
            "--format", "tsv", "decide", "--ambient", "non_hyperbolic_other", "--knot", "hyperbolic",
            "--class", "not_null_homologous", "--p", "11", "--prime", "true",
        ],
    ),
    (
        "decide_r3_p7.json",
        &[
            "decide", "--ambient", "non_hyperbolic_other", "--knot", "hyperbolic", "--class",
            "not_null_homologous", "--p", "7", "--prime", "true",
        ],
    ),
    (
        "decide_r3_p7.tsv",
        &[
            "--format", "tsv", "decide", "--ambient", "non_hyperbolic_other", "--knot", "hyperbolic",
            "--class", "not_null_homologous", "--p", "7", "--prime", "true",
        ],
    ),
    ("l4q_parity.json", &["l4q", "--q", "1", "--w", "2", "--n", "-2"]),
    ("l4q_parity.tsv", &["--format", "tsv", "l4q", "--q", "1", "--w", "2", "--n", "0"]),
    ("l4q_no_candidate.json", &["l4q", "--q", "3", "--w", "1", "--n", "5"]),
    (
        "verify_i_small.json",
        &["verify", "--theorem", "i", "--p-max", "7", "--n-max", "10", "--nprime-max", "10", "--omit-timing"],
    ),
    (
        "verify_l4q_small.tsv",
        &[
            "--format", "tsv", "verify", "--theorem", "l4q", "--q-max", "5", "--w-max", "6", "--n-max",
            "10", "--omit-timing",
        ],
    ),
];

#[test]
fn golden_outputs() {
    let mut mismatches = Vec::new();
    for (name, args) in GOLDEN {
        let expected = fs::read_to_string(golden_dir().join(name)).unwrap();
        let (status, stdout, stderr) = homlens(args);
        assert_eq!(status, 0, "{name}: {stderr}");
        if stdout != expected {
            mismatches.push(format!("{name}:\n  got  {stdout:?}\n  want {expected:?}"));
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn every_golden_file_is_exercised() {
    let mut on_disk: Vec<String> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = GOLDEN.iter().map(|(n, _)| n.to_string()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn json_is_newline_terminated_and_key_sorted() {
    for (name, args) in GOLDEN.iter().filter(|(n, _)| n.ends_with(".json")) {
        let (_, stdout, _) = homlens(args);
        assert!(stdout.ends_with('\n') && !stdout.ends_with("\n\n"), "{name}");
        let value: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(format!("{}\n", value), stdout, "{name}");
    }
}

#[test]
fn input_errors_exit_one() {
    let cases: &[&[&str]] = &[
        &["homology", "--p", "4", "--q", "2", "--w", "1", "--slope", "1/0"],
        &["homology", "--p", "5", "--q", "1", "--w", "1", "--slope", "6/4"],
        &["homology", "--p", "5", "--q", "1", "--w", "1", "--slope", "0/0"],
        &["homology", "--p", "5", "--q", "1", "--w", "0", "--slope", "1/0"],
        &["snf", "--matrix", "1,2;3"],
        &["distance", "--s1", "x", "--s2", "1/0"],
        &["divisor", "--p", "12", "--q", "5", "--w", "3"],
        &["divisor", "--p", "5", "--q", "1", "--w", "10"],
        &["decide", "--ambient", "lens", "--knot", "unknown", "--class", "generator", "--p", "7", "--prime", "true"],
        &["decide", "--ambient", "lens", "--knot", "unknown", "--class", "generator", "--p", "8", "--prime", "true", "--lens-q", "3"],
        &["l4q", "--q", "2", "--w", "1", "--n", "0"],
        &["verify", "--theorem", "zz"],
        &["verify", "--theorem", "linalg", "--n-max", "3"],
        &["frobnicate"],
        &["homology", "--p", "5"],
    ];
    for args in cases {
        let (status, stdout, stderr) = homlens(args);
        assert_eq!(status, 1, "{args:?}");
        assert!(stdout.is_empty(), "{args:?}");
        assert!(!stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn error_messages_are_specific() {
    let (_, _, stderr) = homlens(&["homology", "--p", "5", "--q", "1", "--w", "1", "--slope", "6/4"]);
    assert_eq!(stderr, "error: slope not reduced: 6/4\n");
    let (_, _, stderr) = homlens(&["snf", "--matrix", "1,2;3"]);
    assert!(stderr.starts_with("error: "), "{stderr}");
}

#[test]
fn config_file_replaces_bundled_boxes() {
    let dir = std::env::temp_dir().join(format!("homlens-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("boxes.toml");
    let bundled = include_str!("../config/boxes.toml");
    let small = bundled.replace("p = { kind = \"primes\", max = 31 }", "p = { kind = \"primes\", max = 5 }");
    fs::write(&path, small).unwrap();
    let (status, stdout, _) = homlens(&[
        "verify", "--theorem", "i", "--config", path.to_str().unwrap(), "--n-max", "5", "--nprime-max", "5",
        "--omit-timing",
    ]);
    assert_eq!(status, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["box"].as_str().unwrap().contains("p prime <= 5"));
    fs::write(&path, "counterexample_cap = \"lots\"").unwrap();
    let (status, _, _) = homlens(&["verify", "--theorem", "i", "--config", path.to_str().unwrap()]);
    assert_eq!(status, 1);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["verify", "--theorem", "ii", "--p-max", "12", "--n-max", "12", "--nprime-max", "12", "--omit-timing"];
    let first = homlens(&args);
    for jobs in ["1", "2", "8"] {
        let mut with_jobs = args.to_vec();
        with_jobs.extend(["--jobs", jobs]);
        assert_eq!(homlens(&with_jobs), first, "jobs = {jobs}");
    }
    let env_run = Command::new(env!("CARGO_BIN_EXE_homlens"))
        .args(args)
        .env("HOMLENS_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env_run.stdout).unwrap(), first.1);
}

#[test]
fn help_and_version_exit_zero() {
    let (status, stdout, _) = homlens(&["--help"]);
    assert_eq!(status, 0);
    for sub in ["homology", "snf", "distance", "phi", "divisor", "decide", "l4q", "verify"] {
        assert!(stdout.contains(sub), "{sub}");
    }
    assert_eq!(homlens(&["--version"]).0, 0);
}

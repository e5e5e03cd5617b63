//! CLI surface tests: exit codes and output formats, driven through
//! `run_cli` on explicit argument vectors.

use weightlab::cli::run_cli;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["weightlab"];
    argv.extend_from_slice(args);
    run_cli(argv)
}

#[test]
fn constant_ap_of_unit_weight_exits_zero() {
    let code = run(&[
        "constant", "ap", "--weight", "const(1)", "--p", "2", "--grid", "256", "--family",
        "dyadic",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn constant_supports_csv_output_and_refine() {
    let code = run(&[
        "constant", "a1", "--weight", "powlog(x0=0,a=0.5,b=2)", "--grid", "512", "--domain",
        "0,1", "--out", "csv", "--refine", "2",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn non_integrable_weight_exits_two() {
    let code = run(&[
        "constant", "ap", "--weight", "powlog(x0=0,a=2,b=0)", "--p", "2", "--grid", "64",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn bad_spec_exits_two() {
    assert_eq!(run(&["constant", "a1", "--weight", "pow(const(2), )"]), 2);
}

#[test]
fn unknown_flag_exits_two() {
    assert_eq!(run(&["constant", "a1", "--weight", "const(1)", "--bogus"]), 2);
}

#[test]
fn unknown_subcommand_exits_two() {
    assert_eq!(run(&["frobnicate"]), 2);
}

#[test]
fn maximal_writes_csv_and_sidecar() {
    let dir = std::env::temp_dir().join(format!("weightlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("max.csv");
    let code = run(&[
        "maximal",
        "--weights",
        "const(2),powlog(x0=0,a=0.5,b=0)",
        "--grid",
        "64",
        "--family",
        "dyadic",
        "--algo",
        "fast",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# grid dim=1 n=64"));
    let field = weightlab::io::field_from_csv(&csv).unwrap();
    assert_eq!(field.values().len(), 64);
    let sidecar = std::fs::read_to_string(out.with_extension("json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(meta["schema"], "weightlab-report/1");
    assert_eq!(meta["algorithm"], "fast");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn twoweight_sp_and_norm_exit_zero() {
    let code = run(&[
        "twoweight", "sp", "--u", "const(1)", "--sigmas", "const(1),const(1)", "--pvec", "2,2",
        "--grid", "16", "--domain", "0,1",
    ]);
    assert_eq!(code, 0);
    let code = run(&[
        "twoweight", "norm", "--u", "const(1)", "--sigmas", "const(1),const(1)", "--pvec",
        "2,2", "--grid", "16", "--domain", "0,1", "--probes", "4",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn twoweight_thm19_runs_a_small_ladder() {
    let code = run(&[
        "twoweight", "thm19", "--u", "const(1)", "--sigmas",
        "pow(powlog(x0=0,a=-0.25,b=0), 1),const(1)", "--pvec", "2,2", "--grid", "32",
        "--domain", "-1,1", "--ladder", "16,32",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn verify_subcommands_exit_zero_on_sound_inputs() {
    assert_eq!(
        run(&[
            "verify", "multrh", "--weights", "const(2),const(3)", "--svec", "2,2", "--ladder",
            "16,32", "--domain", "0,1",
        ]),
        0
    );
    assert_eq!(
        run(&[
            "verify", "product", "--weights", "const(1),const(2)", "--pvec", "2,2", "--grid",
            "64",
        ]),
        0
    );
    assert_eq!(
        run(&[
            "verify", "complement", "--w1", "const(1)", "--w2", "const(2)", "--s1", "2",
            "--s2", "2", "--ladder", "16,32",
        ]),
        0
    );
}

#[test]
fn verify_multrh_rejects_exponent_sum_violation() {
    assert_eq!(
        run(&[
            "verify", "multrh", "--weights", "const(1),const(1)", "--svec", "2,3", "--ladder",
            "16,32",
        ]),
        2
    );
}

#[test]
fn counterexample_full_run_exits_zero() {
    let code = run(&[
        "counterexample", "--p1", "2", "--levels", "10,20", "--ladder", "1024,4096,16384",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn counterexample_rejects_degenerate_exponent() {
    assert_eq!(run(&["counterexample", "--p1", "1", "--levels", "10,20"]), 2);
}

#[test]
fn workers_flag_is_accepted() {
    let code = run(&[
        "constant", "fw", "--weight", "const(1)", "--grid", "64", "--workers", "2",
    ]);
    assert_eq!(code, 0);
}

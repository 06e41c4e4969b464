use pinlab::cli::{data_section, manifest_of, run_with_env, Format, EXIT_GUARD, EXIT_OK, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    invoke_env(args, None)
}

fn invoke_env(args: &[&str], env: Option<&str>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pinlab").chain(args.iter().copied());
    let code = run_with_env(argv, env.map(str::to_owned), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(doc: &str, table: &str) -> Vec<Vec<String>> {
    let data = data_section(doc, Format::Csv).unwrap();
    let block = data
        .split("\n\n")
        .find(|b| b.starts_with(&format!("# table: {table}\n")))
        .unwrap_or_else(|| panic!("no table {table}"));
    block.lines().skip(2).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn free_energy_row() {
    let (code, out, _) = invoke(&["free-energy", "--beta", "0.6931472"]);
    assert_eq!(code, EXIT_OK);
    let r = &rows(&out, "free_energy")[0];
    assert!((num(&r[1]) - 0.2876821).abs() < 1e-7);
    assert!((num(&r[3]) - 0.6666667).abs() < 1e-7);
    assert!((num(&r[4]) - 1.3333333).abs() < 1e-7);
    let (_, out, _) = invoke(&["free-energy", "--grid", "0.2,1.5"]);
    assert_eq!(rows(&out, "free_energy").len(), 2);
}

#[test]
fn martingale_check_depth_ten() {
    let (code, out, _) = invoke(&["martingale-check", "--phase", "localized", "--beta", "0.6931472", "--depth", "10"]);
    assert_eq!(code, EXIT_OK);
    let r = rows(&out, "martingale");
    assert_eq!(r.len(), 11);
    assert!(r.iter().all(|row| num(&row[2]) <= 1e-10));
}

#[test]
fn printed_delocalized_form_mean() {
    let (code, out, _) = invoke(&["martingale-check", "--phase", "delocalized", "--alpha", "0.5", "--depth", "1", "--paper-form"]);
    assert_eq!(code, EXIT_OK);
    let r = rows(&out, "martingale");
    assert!((num(&r[1][1]) - (2.0 - (-0.5f64).exp())).abs() < 1e-12);
}

#[test]
fn tau0_rows() {
    let (code, out, _) = invoke(&["tau0", "--beta", "0.6931472", "--max-k", "5"]);
    assert_eq!(code, EXIT_OK);
    let r = rows(&out, "tau0_pmf");
    assert_eq!(r.len(), 5);
    assert_eq!(r[0][0], "1");
    assert!((num(&r[0][1]) - 0.75).abs() < 1e-7);
    assert!((num(&r[1][1]) - 0.140625).abs() < 1e-7);
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["partition", "--beta", "0.5", "--n", "12", "--method", "dp", "--start", "-2"],
        &["partition", "--beta", "0.5", "--n", "12", "--method", "renewal", "--constrained"],
        &["partition", "--beta", "0.5", "--n", "12", "--method", "enum", "--convention", "origin"],
        &["asymptotics", "--beta", "0.7", "--max-m", "20", "--start", "3"],
        &["gibbs-convergence", "--beta", "0.7", "--p", "4", "--n-list", "10,50"],
        &["kernel-check", "--beta", "1.5", "--depth", "6"],
        &["tau0", "--beta", "1", "--max-k", "10", "--mc-samples", "1000"],
        &["sample", "--phase", "localized", "--beta", "1", "--length", "10", "--samples", "3"],
        &["sample", "--phase", "delocalized", "--alpha", "1", "--length", "10", "--samples", "3"],
        &["deloc-check", "--alpha", "0.6931472", "--j-max", "10", "--samples", "1000"],
    ];
    for args in cases {
        let (code, out, err) = invoke(args);
        assert_eq!(code, EXIT_OK, "{args:?}: {err}");
        let meta = manifest_of(&out, Format::Csv).unwrap();
        assert_eq!(meta["subcommand"], args[0]);
        let (code, json, _) = invoke(&[args, &["--format", "json"][..]].concat());
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["meta"]["checksum"].is_string() && v["data"].is_object());
    }
}

#[test]
fn same_seed_same_data() {
    let args = ["sample", "--phase", "localized", "--beta", "0.7", "--length", "30", "--samples", "20", "--seed", "9"];
    let (_, a, _) = invoke(&args);
    let (_, b, _) = invoke(&args);
    assert_eq!(data_section(&a, Format::Csv), data_section(&b, Format::Csv));
    let (_, c, _) = invoke(&["sample", "--phase", "localized", "--beta", "0.7", "--length", "30", "--samples", "20", "--seed", "10"]);
    assert_ne!(data_section(&a, Format::Csv), data_section(&c, Format::Csv));
}

#[test]
fn seed_from_environment() {
    let args = ["deloc-check", "--alpha", "1", "--samples", "500"];
    let (_, a, _) = invoke_env(&args, Some("17"));
    assert_eq!(manifest_of(&a, Format::Csv).unwrap()["seed"], 17);
    let (_, b, _) = invoke(&[&args[..], &["--seed", "17"]].concat());
    assert_eq!(data_section(&a, Format::Csv), data_section(&b, Format::Csv));
    let (_, c, _) = invoke_env(&[&args[..], &["--seed", "3"]].concat(), Some("17"));
    assert_eq!(manifest_of(&c, Format::Csv).unwrap()["seed"], 3);
    let (_, d, _) = invoke(&args);
    assert_eq!(manifest_of(&d, Format::Csv).unwrap()["seed"], 0);
    let (code, _, err) = invoke_env(&args, Some("abc"));
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("PINLAB_SEED"));
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["free-energy", "--beta", "1", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["no-such-command"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["free-energy", "--beta", "-1"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["martingale-check", "--phase", "localized", "--alpha", "1", "--depth", "3"]).0, EXIT_USAGE);
    let (code, _, err) = invoke(&["martingale-check", "--phase", "localized", "--beta", "1", "--depth", "21"]);
    assert_eq!(code, EXIT_GUARD);
    assert!(err.contains("prefix depth"));
    let (code, _, err) = invoke(&["partition", "--beta", "1", "--n", "30", "--method", "enum"]);
    assert_eq!(code, EXIT_GUARD);
    assert!(err.contains("path length"));
    assert_eq!(invoke(&["gibbs-convergence", "--beta", "1", "--p", "17", "--n-list", "40"]).0, EXIT_GUARD);
    assert_eq!(invoke(&["--help"]).0, EXIT_OK);
}

#[test]
fn help_documents_columns() {
    let (code, out, _) = invoke(&["tau0", "--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("tau0_pmf: k,pmf"));
}

#[test]
fn writes_to_file() {
    let dir = std::env::temp_dir().join(format!("pinlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fe.json");
    let (code, out, _) = invoke(&["free-energy", "--beta", "1", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let doc = std::fs::read_to_string(&path).unwrap();
    assert_eq!(manifest_of(&doc, Format::Json).unwrap()["subcommand"], "free-energy");
    std::fs::remove_dir_all(dir).unwrap();
}

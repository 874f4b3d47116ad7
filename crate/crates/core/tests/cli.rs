use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use chase_rd::cli::OUTPUT_SCHEMA;

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_chase-rd"))
        .args([cmd, "--config"])
        .arg(&path)
        .args(extra)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(dir: &Path, cmd: &str, config: &str) -> Value {
    serde_json::from_str(&stdout(&run(dir, cmd, config, &["--format", "json"]))).unwrap()
}

#[test]
fn csv_headers_match_documented_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("waterfill", r#"{"preset": "fig2"}"#, "class,N_j,p_j,D_star_j,q_j"),
        ("awgn-rule", r#"{"sigma": [0.75], "D": 0.01}"#, "sigma,kind,index,llr,p_llr,d_star,q,nu"),
        ("exact", r#"{"N": 31, "t": 1, "p": [0.05]}"#, "N,class,q_rdf,q_opt,pe_rdf,pe_opt,L_log2"),
        ("optimize", r#"{"N": 31, "t": 1, "p": [0.05]}"#, "N,class,q_rdf,q_opt,pe_rdf,pe_opt,L_log2"),
        (
            "simulate",
            r#"{"N": 15, "t": 2, "p": [0.05], "trials": 100}"#,
            "trials,miss_count,miss_rate,ci_low,ci_high,decode_error_rate,seed",
        ),
    ];
    for (cmd, cfg, header) in cases {
        let out = stdout(&run(d, cmd, cfg, &[]));
        assert_eq!(out.lines().next(), Some(header), "{cmd}");
        let width = header.split(',').count();
        for line in out.lines() {
            assert_eq!(line.split(',').count(), width, "{cmd}: {line}");
        }
    }
    let out = stdout(&run(d, "waterfill", r#"{"preset": "fig2"}"#, &[]));
    let footers: Vec<&str> = out.lines().skip(3).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(footers, ["nu", "rate_bits_per_symbol", "log2_L"]);
}

/// Keys of `value` against `required` and, when closed, `properties`.
fn check_object(value: &Value, def: &Value, what: &str) {
    let obj = value.as_object().unwrap_or_else(|| panic!("{what} is not an object"));
    for key in def["required"].as_array().unwrap() {
        assert!(obj.contains_key(key.as_str().unwrap()), "{what} lacks {key}");
    }
    if def["additionalProperties"] == Value::Bool(false) {
        let props = def["properties"].as_object().unwrap();
        for key in obj.keys() {
            assert!(props.contains_key(key), "{what} has undocumented key {key}");
        }
    }
}

#[test]
fn json_outputs_follow_the_shipped_schema() {
    let schema: Value = serde_json::from_str(OUTPUT_SCHEMA).unwrap();
    let defs = &schema["$defs"];
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("waterfill", r#"{"preset": "fig2"}"#, "waterfill"),
        ("awgn-rule", r#"{"sigma": [0.5, 1.2], "N": 127, "t": 2}"#, "awgn_rule"),
        ("exact", r#"{"N": 31, "t": 1, "p": [0.05], "L": 3}"#, "exact"),
        ("optimize", r#"{"N": 31, "t": 1, "p": [0.05]}"#, "exact"),
        ("simulate", r#"{"N": 15, "t": 2, "p": [0.05], "trials": 100}"#, "simulate"),
        ("figure", r#"{"preset": "fig2"}"#, "waterfill"),
    ];
    for (cmd, cfg, def) in cases {
        let v = json(d, cmd, cfg);
        check_object(&v, &schema, cmd);
        assert_eq!(v["command"], cmd);
        let def = &defs[def];
        match &v["result"] {
            Value::Array(items) => {
                assert_eq!(def["type"], "array");
                for item in items {
                    check_object(item, &def["items"], cmd);
                    if let Some(block) = item.get("block").filter(|b| !b.is_null()) {
                        check_object(block, &def["items"]["properties"]["block"], cmd);
                        check_object(&item["rule"], &def["items"]["properties"]["rule"], cmd);
                    }
                }
            }
            obj => check_object(obj, def, cmd),
        }
        let csv_columns: Vec<&str> = def["csv"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
        let csv = stdout(&run(d, cmd, cfg, &[]));
        assert_eq!(csv.lines().next().unwrap(), csv_columns.join(","));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |cmd: &str, cfg: &str| run(d, cmd, cfg, &[]).status.code();
    // Composition total disagrees with N.
    assert_eq!(code("waterfill", r#"{"N": 511, "t": 5, "p": [0.02, 0.03], "composition": [477, 40]}"#), Some(2));
    assert_eq!(code("waterfill", r#"{"N": 15, "t": 2, "p": [0.1], "typo": 1}"#), Some(2));
    assert_eq!(code("simulate", r#"{"N": 15, "t": 2, "p": [0.05], "trials": 0}"#), Some(2));
    assert_eq!(code("simulate", r#"{"kind": "exact", "N": 15, "t": 2, "p": [0.05], "trials": 5}"#), Some(2));
    assert_eq!(code("awgn-rule", r#"{"sigma": 0.75, "D": 0.7}"#), Some(2));
    assert_eq!(code("simulate", r#"{"N": 511, "t": 5, "p": [0.2], "trials": 5}"#), Some(3));
    assert_eq!(code("exact", r#"{"N": 4000000, "M": 2, "composition": [2000000, 2000000], "p": [0.3, 0.3], "t": 10}"#), Some(3));
    let missing = Command::new(env!("CARGO_BIN_EXE_chase-rd"))
        .args(["exact", "--config"])
        .arg(d.join("absent.json"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));
    let bad_cmd = Command::new(env!("CARGO_BIN_EXE_chase-rd")).args(["plot", "--config", "x"]).status().unwrap();
    assert_eq!(bad_cmd.code(), Some(2));
    let o = run(d, "simulate", r#"{"N": 511, "t": 5, "p": [0.2], "trials": 5}"#, &[]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("list length"));
}

#[test]
fn out_flag_and_config_output_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let target = d.join("wf.csv");
    let o = run(d, "waterfill", r#"{"preset": "fig2"}"#, &["--out", target.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let from_stdout = stdout(&run(d, "waterfill", r#"{"preset": "fig2"}"#, &[]));
    assert_eq!(std::fs::read_to_string(&target).unwrap(), from_stdout);

    let target = d.join("cfg.json");
    let cfg = format!(r#"{{"preset": "fig2", "format": "json", "output": {:?}}}"#, target.to_str().unwrap());
    assert!(run(d, "figure", &cfg, &[]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["ran"], "waterfill");
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = r#"{"N": 31, "t": 2, "p": [0.08], "trials": 3000, "seed": 1}"#;
    let a = stdout(&run(d, "simulate", cfg, &["--seed", "77"]));
    let b = stdout(&run(d, "simulate", &cfg.replace("\"seed\": 1", "\"seed\": 77"), &[]));
    let c = stdout(&run(d, "simulate", cfg, &[]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.lines().nth(1).unwrap().ends_with(",77"));
}

#[test]
fn genie_and_bch_report_identical_misses() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = r#"{"N": 15, "t": 2, "p": [0.02, 0.1], "priors": [0.7, 0.3], "trials": 20000, "seed": 4"#;
    let genie = json(d, "simulate", &format!("{base}}}"));
    let bch = json(d, "simulate", &format!(r#"{base}, "decoder": "bch"}}"#));
    assert_eq!(genie["result"]["miss"]["count"], bch["result"]["miss"]["count"]);
    assert_eq!(bch["result"]["scenario"]["decoder"]["bch"]["m"], 4);
}

#[test]
fn sub_radius_noise_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&run(dir.path(), "waterfill", r#"{"N": 511, "t": 5, "p": [0.005]}"#, &[]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
    let log2_l: f64 = out.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(log2_l, 0.0);
}

#[test]
fn awgn_rule_blocks_spend_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(dir.path(), "figure", r#"{"preset": "fig3"}"#);
    assert_eq!(v["ran"], "awgn-rule");
    let results = v["result"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for r in results {
        let b = &r["block"];
        assert!((b["sum_d_star"].as_f64().unwrap() - 5.0).abs() < 1e-9);
        let llr: Vec<f64> = b["llr"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(llr.windows(2).all(|w| w[0] <= w[1]));
        let nu = r["rule"]["nu"].as_f64().unwrap();
        for &(l, q) in r["rule"]["table"].as_array().unwrap().iter().map(|e| (e[0].as_f64().unwrap(), e[1].as_f64().unwrap())).collect::<Vec<_>>().iter() {
            let p = 1.0 / (1.0 + f64::exp(l));
            assert!((q - ((p - nu) / (1.0 - 2.0 * nu)).max(0.0)).abs() < 1e-12 || q == 0.0);
        }
    }
}

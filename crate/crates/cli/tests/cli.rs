use std::path::Path;
use std::process::{Command, Output};

fn rspolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rspolar")).args(args).output().expect("spawn rspolar")
}

fn ok(args: &[&str]) -> String {
    let out = rspolar(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn hex_bits(hex: &str) -> Vec<u8> {
    let hex = hex.trim();
    (0..hex.len() / 2)
        .flat_map(|k| {
            let byte = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).unwrap();
            (0..8).map(move |b| (byte >> (7 - b)) & 1)
        })
        .collect()
}

#[test]
fn construct_ratematch_encode_decode() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    let pat = dir.path().join("pat.json");
    let rx = dir.path().join("rx.txt");
    ok(&["construct", "--q", "4", "--m", "4", "--out", p(&seq)]);
    ok(&["ratematch", "--scheme", "mpwp", "--seq", p(&seq), "--k-bits", "96", "--nb", "512", "--mb", "400", "--out", p(&pat)]);

    let pattern: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&pat).unwrap()).unwrap();
    assert_eq!(pattern["bits"].as_array().unwrap().len(), 112);

    // 96 info bits minus 8 CRC bits.
    let payload = "0123456789abcdef012345";
    let code = ["--seq", p(&seq), "--k-bits", "96", "--list", "4", "--pattern", p(&pat)];
    let mut args = vec!["encode", "--payload", payload];
    args.extend_from_slice(&code);
    let tx = hex_bits(&ok(&args));
    let tx = &tx[..400];
    let y: Vec<String> = tx.iter().map(|&b| if b == 0 { "1.0" } else { "-1.0" }.to_string()).collect();
    std::fs::write(&rx, y.join(" ")).unwrap();

    let mut args = vec!["decode", "--noise-var", "0.5", "--input", p(&rx)];
    args.extend_from_slice(&code);
    let report: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(report["payload"], payload);
    assert_eq!(report["crc_passed"], true);
    assert_eq!(report["payload_bits"], 88);
}

#[test]
fn po_check_reports_examples() {
    let out = ok(&["po-check", "--q", "4", "--m", "3", "--pair", "29", "25"]);
    assert!(out.contains("29 dominates 25"), "{out}");
    let out = ok(&["po-check", "--q", "4", "--m", "3", "--pair", "57", "27"]);
    assert!(out.contains("57 dominates 27"), "{out}");
    let out = ok(&["po-check", "--q", "4", "--m", "3", "--pair", "25", "29"]);
    assert!(out.contains("does not dominate"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    ok(&["construct", "--q", "4", "--m", "3", "--out", p(&seq)]);
    let out = ok(&["po-check", "--q", "4", "--m", "3", "--seq", p(&seq)]);
    assert!(out.contains("antisymmetry violations: 0"), "{out}");
    assert!(out.contains("weight violations: 0"), "{out}");
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        r#"{
            "q": 4, "m": 3, "k_bits": 64, "list_size": 2,
            "construction": { "method": "pdpw" },
            "eb_n0_grid": [1.0, 3.0],
            "max_trials": 200, "max_block_errors": 20, "master_seed": 5
        }"#,
    )
    .unwrap();
    ok(&["simulate", "--config", p(&cfg), "--out", p(&csv), "--format", "csv"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("eb_n0_db") && header.contains("bler"), "{header}");
    assert_eq!(lines.count(), 2);

    let json = dir.path().join("out.json");
    ok(&["simulate", "--config", p(&cfg), "--out", p(&json), "--format", "json"]);
    let result: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(result["points"].as_array().unwrap().len(), 2);
}

#[test]
fn infeasible_inputs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    ok(&["construct", "--q", "4", "--m", "2", "--out", p(&seq)]);
    // More information bits than the code holds.
    let out = rspolar(&["encode", "--seq", p(&seq), "--k-bits", "34", "--payload", "00"]);
    assert!(!out.status.success());
    // Fewer transmitted bits than information bits.
    let out = rspolar(&["ratematch", "--scheme", "sip", "--seq", p(&seq), "--k-bits", "24", "--nb", "32", "--mb", "20"]);
    assert!(!out.status.success());
    let out = rspolar(&["construct", "--q", "4", "--m", "2", "--beta", "0.5"]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

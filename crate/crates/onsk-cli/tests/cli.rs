use std::process::{Command, Output};

fn onsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onsk")).args(args).env_remove("ONSK_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn spectra_csv_for_cyclic_family() {
    let o = onsk(&["verify", "--suite", "spectra", "--family", "A", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,family,spectrum,l,j,form,value,observed,expected,status");
    let mid: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
        .filter(|f| f[3] == "2")
        .collect();
    let mult: Vec<&str> = mid.iter().map(|f| f[7].as_str()).collect();
    assert_eq!(mult, ["1", "3", "2"]);
    assert!(mid.iter().all(|f| f[9] == "PASS"));
    assert_eq!(mid[0][5], "[(q^2-z)(q^4-z)/((1-q^2 z)(1-q^4 z))][(q^2-w)(q^4-w)/((1-q^2 w)(1-q^4 w))]");
}

#[test]
fn full_suite_boundary_family() {
    let o = onsk(&["verify", "--suite", "all", "--family", "D2", "--n", "2", "--k", "1", "--kp", "1", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["suite"], "all");
    assert_eq!(v["family"], "D2");
    assert_eq!(v["n"], 2);
    for key in ["t", "z", "eps", "mu"] {
        assert!(!v["params"][key].is_null());
    }
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() > 50);
    for c in checks {
        for key in ["name", "paper_ref", "status", "detail"] {
            assert!(c.get(key).is_some());
        }
        assert_ne!(c["status"], "FAIL");
    }
    assert!(v["elapsed_ms"].is_u64());
}

#[test]
fn kmatrix_dump_matches_golden_corner() {
    let o = onsk(&["dump", "kmatrix", "--family", "A", "--n", "3", "--z", "5/7", "--t", "1/3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let m = &v["matrices"][0];
    assert_eq!(m["dim"], 8);
    let entries = m["entries"].as_array().unwrap();
    let pos: Vec<(u64, u64)> = entries.iter().map(|e| (e["row"].as_u64().unwrap(), e["col"].as_u64().unwrap())).collect();
    let mut sorted = pos.clone();
    sorted.sort();
    assert_eq!(pos, sorted);
    // q = −1/9: the 0…0 → 1…1 entry is q^{−3}
    let corner = entries.iter().find(|e| e["row"] == 7 && e["col"] == 0).unwrap();
    assert_eq!(corner["value"], "-729/1+0/1*i");
    // particle number is reversed: |α| + |β| = n
    assert!(pos.iter().all(|(r, c)| r.count_ones() + c.count_ones() == 3));
}

#[test]
fn hamiltonian_trace_carries_constant() {
    let o = onsk(&["dump", "hamiltonian", "--family", "D1", "--n", "3", "--t", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    // Γ = (1/4 − 4)² / (4 (1/4 + 4)) = 225/272; trace = 8 · 4Γ
    assert_eq!(json(&o)["matrices"][0]["trace"], "450/17+0/1*i");
}

#[test]
fn generator_dump_is_sparse() {
    let v = json(&onsk(&["dump", "generators", "--family", "B1", "--n", "3"]));
    let mats = v["matrices"].as_array().unwrap();
    assert_eq!(mats.len(), 3 * 4);
    for m in mats {
        for e in m["entries"].as_array().unwrap() {
            assert_ne!(e["value"], "0/1+0/1*i");
        }
    }
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        &["verify", "--suite", "nope"][..],
        &["verify", "--family", "D2", "--n", "9"],
        &["verify", "--family", "A", "--n", "3", "--k", "1", "--kp", "1"],
        &["verify", "--family", "B1", "--n", "3", "--k", "1", "--kp", "1"],
        &["verify", "--z", "0.5"],
        &["verify", "--k", "1"],
        &["dump", "nothing"],
    ] {
        assert_eq!(onsk(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn pole_exits_1() {
    let o = onsk(&["verify", "--suite", "kmatrix", "--family", "A", "--n", "3", "--t", "1/2", "--z", "-4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole"));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--suite", "onsager", "--family", "B1", "--n", "3", "--seed", "11", "--no-timing"];
    let a = onsk(&args);
    let b = onsk(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn env_seed_overrides_flag() {
    let run = |seed: Option<&str>, flag: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_onsk"));
        c.args(["verify", "--suite", "defining-relations", "--family", "D2", "--n", "2", "--seed", flag, "--no-timing"]);
        match seed {
            Some(s) => c.env("ONSK_SEED", s),
            None => c.env_remove("ONSK_SEED"),
        };
        json(&c.output().unwrap())["params"].clone()
    };
    assert_eq!(run(Some("5"), "9"), run(None, "5"));
    assert_ne!(run(None, "9"), run(None, "5"));
}

#[test]
fn spectrum_subcommand_text() {
    let o = onsk(&["spectrum", "--family", "D1", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert!(t.lines().any(|l| l.starts_with("K22") && l.contains("mult 6/6")));
}

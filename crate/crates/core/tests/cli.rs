use std::process::Command;

use corrsim::cli::{parse_curve_csv, InstanceFile, ReduceOutput, SimulateSummary};

fn corrsim(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_corrsim"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn curve_file_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ort2.csv");
    let p = path.to_str().unwrap();
    let args = [
        "curve",
        "--protocol",
        "ort",
        "--k",
        "2",
        "--points",
        "5",
        "--trials",
        "20000",
        "--seed",
        "4",
        "--check",
        "--out",
        p,
    ];
    let (code, stdout) = corrsim(&args);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let rows = parse_curve_csv(&text).unwrap();
    assert_eq!(rows.len(), 5);
    assert!((rows[4].analytic - 1.0).abs() < 1e-8);
    assert_eq!(rows[2].analytic, 0.0);
    assert_eq!(rows[4].mc_mean, 1.0);
    let (_, again) = corrsim(&args[..args.len() - 2]);
    assert_eq!(again, text);
}

#[test]
fn maj_curve_lies_below_ort_curve() {
    let run = |proto: &str| {
        let (code, text) = corrsim(&[
            "curve",
            "--protocol",
            proto,
            "--k",
            "2",
            "--points",
            "11",
            "--trials",
            "1",
        ]);
        assert_eq!(code, 0);
        parse_curve_csv(&text).unwrap()
    };
    let (maj, ort) = (run("maj"), run("ort"));
    for (m, o) in maj.iter().zip(&ort) {
        if m.rho > 0.0 && m.rho < 1.0 {
            assert!(o.analytic > m.analytic, "rho {}", m.rho);
        }
    }
}

#[test]
fn simulate_reports_bits() {
    let (code, text) = corrsim(&[
        "simulate",
        "--protocol",
        "nocomm",
        "--rho",
        "1",
        "--trials",
        "1000",
    ]);
    assert_eq!(code, 0);
    let s: SimulateSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(s.mean, 1.0);
    assert_eq!(s.max_bits, 0);

    let (_, text) = corrsim(&[
        "simulate",
        "--protocol",
        "transformed",
        "--rho",
        "0.6",
        "--trials",
        "50000",
    ]);
    let s: SimulateSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(s.max_bits, 2);
    assert_eq!(s.mean_bits, 2.0);
    assert!((s.mean - 0.6).abs() <= 4.0 * s.stderr + 2.0 * s.tail_mass.unwrap());
}

#[test]
fn series_exit_codes() {
    let (code, text) = corrsim(&["series", "--target", "mixed", "--order", "61"]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("overall: PASS"));
    let (code, _) = corrsim(&["series", "--order", "62"]);
    assert_eq!(code, 2);
    let (code, _) = corrsim(&["curve", "--protocol", "maj", "--k", "3"]);
    assert_eq!(code, 2);
}

#[test]
fn reduce_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(
        &inst,
        serde_json::to_string(&InstanceFile::chsh_default()).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("vectors.json");
    let (code, _) = corrsim(&[
        "reduce",
        "--instance",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let r: ReduceOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(r.a.len(), 32);
    assert!((r.inner_product - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);

    std::fs::write(&inst, r#"{"d": 2, "rho": [], "A": [], "B": []}"#).unwrap();
    let (code, _) = corrsim(&["reduce", "--instance", inst.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_on_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(
        &inst,
        serde_json::to_string(&InstanceFile::chsh_default()).unwrap(),
    )
    .unwrap();
    let (code, text) = corrsim(&[
        "simulate",
        "--protocol",
        "transformed",
        "--instance",
        inst.to_str().unwrap(),
        "--trials",
        "100000",
    ]);
    assert_eq!(code, 0);
    let s: SimulateSummary = serde_json::from_str(&text).unwrap();
    assert!((s.rho - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((s.mean - s.rho).abs() <= 4.0 * s.stderr + 2.0 * s.tail_mass.unwrap());
}

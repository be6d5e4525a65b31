use relphase::constructions::{self as cons, Params, REGISTRY};
use relphase_tools::cli::{run, Io};
use relphase_tools::text;
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn relphase(args: &[&str], input: &str) -> Run {
    let mut stdin = input.as_bytes();
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let mut io = Io { stdin: &mut stdin, stdout: &mut stdout, stderr: &mut stderr };
    let code = run(std::iter::once("relphase").chain(args.iter().copied()), &mut io);
    Run { code, out: String::from_utf8(stdout).unwrap(), err: String::from_utf8(stderr).unwrap() }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.out).unwrap()
}

#[test]
fn synth_writes_a_circuit_file() {
    let r = relphase(&["synth", "cxstar", "--k", "5", "--format", "circuit-text"], "");
    assert_eq!(r.code, 0);
    assert!(r.out.starts_with("qubits 6 cbits 0\n"));
    let c = text::parse(&r.out).unwrap();
    assert_eq!(c.expand_macros().unwrap().t_count().unconditional, 24);
}

#[test]
fn verify_reports_count_and_support() {
    let r = relphase(&["verify", "cxstar", "--k", "3"], "");
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("T-count {8}"), "{}", r.out);
    assert!(r.out.contains("phase support {0, 1, 2, 3}"), "{}", r.out);

    let r = relphase(&["verify", "cxstar", "--k", "3", "--format", "json"], "");
    let v = json(&r);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["reports"][0]["measured_tcounts"], serde_json::json!([8]));
    assert_eq!(v["reports"][0]["phase_support_found"], serde_json::json!([0, 1, 2, 3]));
}

#[test]
fn verify_without_k_sweeps_the_valid_range() {
    let r = relphase(&["verify", "cix", "--kmax", "6"], "");
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.out.lines().count(), 3);
    assert!(r.out.starts_with("cix k=4:"));
}

#[test]
fn ledger_lists_every_row_and_flags_gaps() {
    let r = relphase(&["tcount", "--table", "--kmax", "8"], "");
    assert!(r.out.lines().next().unwrap().starts_with("gate"));
    assert!(r.out.contains("cxstar"));
    let mismatched: Vec<&str> = r.out.lines().filter(|l| l.trim_end().ends_with("NO")).collect();
    assert_eq!(mismatched.len(), 11);
    assert!(mismatched.iter().all(|l| l.contains("kand_terminate") || l.contains("jones_lambda_x") || l.contains("cxbullet")));
    assert_eq!(r.code, 1);

    let v = json(&relphase(&["tcount", "--table", "--kmax", "6", "--format", "json"], ""));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["all_match"], false);
    assert!(v["rows"].as_array().unwrap().len() > 40);
}

#[test]
fn tcount_for_one_construction() {
    let r = relphase(&["tcount", "lambda_x_dirty", "--k", "4"], "");
    assert_eq!(r.code, 0);
    assert!(r.out.contains("{32}"));
    let r = relphase(&["tcount", "cxbullet", "--k", "6"], "");
    assert_eq!(r.code, 0);
    let r = relphase(&["tcount", "cxbullet", "--k", "5"], "");
    assert_eq!(r.code, 1);
}

#[test]
fn synth_then_verify_round_trips_every_construction() {
    for (name, _) in REGISTRY {
        let p = Params { k: Some(6), m: Some(2), variant: None };
        let spec = cons::build(name, &p).unwrap();
        let args = ["--k", "6", "--m", "2"];
        let synth = relphase(&[&["synth", name][..], &args[..]].concat(), "");
        assert_eq!(synth.code, 0);
        assert_eq!(synth.out, spec.circuit.to_text());
        assert_eq!(text::render(&text::parse(&synth.out).unwrap()), synth.out);

        let direct = relphase(&[&["verify", name][..], &args[..]].concat(), "");
        let piped = relphase(&[&["verify", name, "--stdin"][..], &args[..]].concat(), &synth.out);
        assert_eq!(piped.code, direct.code, "{}: {}", name, piped.err);
        assert_eq!(piped.out, direct.out, "{}", name);
    }
}

#[test]
fn edited_circuit_fails_verification() {
    let mut src = relphase(&["synth", "ccix"], "").out;
    src.push_str("g t 0\n");
    let r = relphase(&["verify", "ccix", "--stdin"], &src);
    assert_eq!(r.code, 1);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["verify", "no_such_thing"][..],
        &["verify", "cix", "--k", "3"],
        &["synth", "kand_terminate", "--k", "5", "--variant", "exact"],
        &["synth", "cxstar", "--k", "5", "--variant", "bogus"],
        &["synth", "cxstar"],
        &["synth", "cxstar", "--k", "5", "--format", "table"],
        &["tcount"],
        &["frobnicate"],
        &["verify"],
    ] {
        let r = relphase(args, "");
        assert_eq!(r.code, 2, "{:?}", args);
        assert!(!r.err.is_empty());
        assert!(r.out.is_empty());
    }
    let r = relphase(&["verify", "ccix", "--stdin"], "qubits 3 cbits 0\ng frob 1\n");
    assert_eq!(r.code, 2);
    assert!(r.err.contains("line 2"));
    let r = relphase(&["verify", "ccix", "--stdin"], "qubits 4 cbits 0\n");
    assert_eq!(r.code, 2);
}

#[test]
fn help_and_version_succeed() {
    let r = relphase(&["--help"], "");
    assert_eq!(r.code, 0);
    assert!(r.out.contains("synth"));
    assert_eq!(relphase(&["--version"], "").code, 0);
}

#[test]
fn equiv_compares_files() {
    let dir = std::env::temp_dir().join(format!("relphase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    for (name, file) in [("ccix", "a"), ("ccix_dg", "b"), ("jones_toffoli", "j")] {
        let r = relphase(&["synth", name, "--out", &path(file)], "");
        assert_eq!(r.code, 0);
        assert!(r.out.is_empty());
    }
    assert_eq!(relphase(&["equiv", &path("a"), &path("a")], "").code, 0);
    assert_eq!(relphase(&["equiv", &path("a"), &path("b")], "").code, 1);
    assert_eq!(relphase(&["equiv", &path("j"), "-"], &std::fs::read_to_string(path("j")).unwrap()).code, 0);

    let mut toffoli = relphase::Circuit::new(4, 1);
    toffoli.declare(3, relphase::Role::Clean);
    toffoli.toffoli(0, 1, 2).release(3, relphase::circuit::Release::Zero);
    let v = json(&relphase(&["equiv", &path("j"), "-", "--format", "json"], &toffoli.to_text()));
    assert_eq!(v["equivalent"], true);
    assert_eq!(relphase(&["equiv", &path("a"), &path("missing")], "").code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn appendix_and_list() {
    let r = relphase(&["appendix"], "");
    assert_eq!(r.code, 0);
    assert_eq!(r.out.lines().filter(|l| l.ends_with("holds")).count(), 6);
    let r = relphase(&["list", "--format", "json"], "");
    assert_eq!(json(&r)["constructions"].as_array().unwrap().len(), REGISTRY.len());
}

#[test]
fn synth_json_sidecar() {
    let v = json(&relphase(&["synth", "cix", "--k", "5", "--format", "json"], ""));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["name"], "cix");
    assert_eq!(v["formula"]["values"], serde_json::json!([36]));
    assert_eq!(v["phase_support"]["relative"], serde_json::json!([0, 1, 2, 3, 4]));
    assert_eq!(v["validity"], "k >= 4");
    let c = text::parse(v["circuit"].as_str().unwrap()).unwrap();
    assert_eq!(c.n_qubits, 6);
}

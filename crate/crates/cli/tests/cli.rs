use std::path::Path;
use std::process::{Command, Output};

fn jetkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetkernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).expect("fixture write");
}

const WORKED_WORKSPACE: &str = r#"{
  "config": {"k_max": 8},
  "pairs": [
    {
      "name": "p",
      "iota": {
        "source": {"thickening": {"vars": ["t"], "generators": ["t^2"]}},
        "target": {"params": ["t", "x"]},
        "components": ["t", "0"]
      },
      "f": {
        "source": {"params": ["t", "x"]},
        "target": {"params": ["z1"]},
        "components": ["t + x"]
      }
    },
    {
      "name": "q",
      "iota": {
        "source": {"thickening": {"vars": ["t"], "generators": ["t^2"]}},
        "target": {"params": ["t", "x"]},
        "components": ["t", "0"]
      },
      "f": {
        "source": {"params": ["t", "x"]},
        "target": {"params": ["z1"]},
        "components": ["t + x + t^2"]
      }
    }
  ]
}"#;

#[test]
fn weil_new_reports_the_presented_algebra() {
    let out = jetkernel(&["weil", "new", "--d", "1", "--gens", "x^2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("dim: 2"), "{text}");
    assert!(text.contains("k: 1"), "{text}");
    assert!(text.contains("basis: 1, x"), "{text}");
}

#[test]
fn weil_new_builds_disks_and_round_trips_through_info() {
    let dir = tempfile::tempdir().unwrap();
    let algebra = dir.path().join("algebra.json");
    let out = jetkernel(&[
        "weil",
        "new",
        "--d",
        "2",
        "--k",
        "2",
        "--json",
        "--out",
        algebra.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["dim"], 6);
    assert_eq!(doc["k"], 2);

    let info = jetkernel(&["weil", "info", "--in", algebra.to_str().unwrap(), "--json"]);
    assert!(info.status.success());
    let reloaded: serde_json::Value = serde_json::from_str(&stdout_of(&info)).unwrap();
    assert_eq!(reloaded["dim"], doc["dim"]);
    assert_eq!(reloaded["basis"], doc["basis"]);
    // the file holds the same bytes the --json run printed
    let on_disk = std::fs::read_to_string(&algebra).unwrap();
    assert_eq!(on_disk, stdout_of(&out));
}

#[test]
fn jet_dim_counts_fiber_coordinates() {
    let out = jetkernel(&["jet", "dim", "--n", "2", "--m", "1", "--k", "3"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("fiber coordinates: 10"), "{text}");
    assert!(text.contains("total coordinates: 12"), "{text}");
}

#[test]
fn hadamard_expands_exactly() {
    let out = jetkernel(&[
        "hadamard", "--f", "u^2 + u*t", "--x", "u", "--y", "t", "--order", "1", "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["taylor"]["[0]"], "u^2");
    assert_eq!(doc["taylor"]["[1]"], "u");
}

#[test]
fn morphism_compose_substitutes_components() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("compose.json");
    write(
        &input,
        r#"{
          "g": {
            "source": {"params": ["a", "b"]},
            "target": {"params": ["c"]},
            "components": ["a*b"]
          },
          "f": {
            "source": {"params": ["u", "v"]},
            "target": {"params": ["a", "b"]},
            "components": ["u + v", "u"]
          }
        }"#,
    );
    let out = jetkernel(&["morphism", "compose", "--in", input.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["components"][0], "u^2 + u*v");
}

#[test]
fn morphism_check_classifies_the_standard_inclusion() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("iota.json");
    write(
        &input,
        r#"{
          "source": {"thickening": {"vars": ["t"], "generators": ["t^2"]}},
          "target": {"params": ["t", "x"]},
          "components": ["t", "0"]
        }"#,
    );
    let out = jetkernel(&["morphism", "check", "--in", input.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["rectified"], true);
    assert_eq!(doc["kind"], "rectified");
    assert_eq!(doc["embedding"], "true");
}

#[test]
fn jet_prolong_then_project_drops_an_order() {
    let dir = tempfile::tempdir().unwrap();
    let sections = dir.path().join("sections.json");
    write(&sections, r#"{"sections": ["x1^2 + x1"], "x": ["x1"], "base": ["0"]}"#);
    let jet_file = dir.path().join("jet.json");
    let out = jetkernel(&[
        "jet", "prolong",
        "--in", sections.to_str().unwrap(),
        "--level", "2",
        "--out", jet_file.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["values"]["u[2]"], "2");

    let projected = jetkernel(&["jet", "project", "--in", jet_file.to_str().unwrap(), "--json"]);
    assert!(projected.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&projected)).unwrap();
    assert_eq!(doc["k"], 1);
    assert!(doc["values"].get("u[2]").is_none());
}

#[test]
fn jet_lift_factors_a_compatible_cone() {
    let dir = tempfile::tempdir().unwrap();
    let cone = dir.path().join("cone.json");
    write(
        &cone,
        r#"{
          "system": {"type": "jet", "n": 1, "m": 1},
          "source": {"params": ["u"], "thickening": {"vars": ["e1"], "generators": ["e1^2"]}},
          "levels": [
            {
              "source": {"params": ["u"], "thickening": {"vars": ["e1"], "generators": ["e1^2"]}},
              "target": {"params": ["x1", "u[0]"]},
              "components": ["u", "u + e1"]
            },
            {
              "source": {"params": ["u"], "thickening": {"vars": ["e1"], "generators": ["e1^2"]}},
              "target": {"params": ["x1", "u[0]", "u[1]"]},
              "components": ["u", "u + e1", "1"]
            }
          ]
        }"#,
    );
    let out = jetkernel(&["jet", "lift", "--in", cone.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["iota"]["components"][0], "u");
    assert_eq!(doc["iota"]["components"][1], "e1");
    assert_eq!(doc["through"]["components"][1], "u + e1");
}

#[test]
fn factor_lift_and_embed_produce_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.json");
    write(
        &plot,
        r#"{
          "source": {"params": ["u"], "thickening": {"vars": ["e1"], "generators": ["e1^2"]}},
          "target": {"params": ["z1", "z2"]},
          "components": ["u + e1", "u^2"]
        }"#,
    );
    let pair = dir.path().join("pair.json");
    let out = jetkernel(&[
        "factor", "lift",
        "--in", plot.to_str().unwrap(),
        "--out", pair.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let embedded = jetkernel(&["factor", "embed", "--in", pair.to_str().unwrap(), "--json"]);
    assert!(embedded.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&embedded)).unwrap();
    // the embedded iota appends the source coordinates to the original components
    let comps = doc["pair"]["iota"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 4);
    assert_eq!(doc["step"]["direction"], "forward");
    assert_eq!(doc["step"]["from"]["iota"]["components"], doc["pair"]["iota"]["components"]);
}

#[test]
fn factor_witness_emits_the_exact_span() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws.json");
    write(&ws, WORKED_WORKSPACE);
    let out = jetkernel(&["factor", "witness", "--in", ws.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("delta[0]: t^2"), "{text}");
    assert!(text.contains("phi_alpha_eq_f: exact"), "{text}");
    assert!(text.contains("delta_eq_sum_h_mu: exact"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn factor_decide_finds_the_zig_zag() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws.json");
    write(&ws, WORKED_WORKSPACE);
    let chain = dir.path().join("chain.json");
    let out = jetkernel(&[
        "factor", "decide",
        "--in", ws.to_str().unwrap(),
        "--out", chain.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("equivalent: true"), "{text}");
    assert!(text.contains("steps: 8"), "{text}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&chain).unwrap()).unwrap();
    assert_eq!(doc["equivalent"], true);
    assert_eq!(doc["chain"]["steps"].as_array().unwrap().len(), 8);
}

#[test]
fn factor_decide_reports_the_differing_component() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws.json");
    write(&ws, &WORKED_WORKSPACE.replace("t + x + t^2", "t + x + 1"));
    let out = jetkernel(&["factor", "decide", "--in", ws.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "not-equivalent is a result, not an error");
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["equivalent"], false);
    assert_eq!(doc["component"], 0);
}

#[test]
fn witness_outside_the_ideal_is_a_domain_error_without_partial_writes() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws.json");
    write(&ws, &WORKED_WORKSPACE.replace("t + x + t^2", "t + x + t"));
    let target = dir.path().join("span.json");
    let out = jetkernel(&[
        "factor", "witness",
        "--in", ws.to_str().unwrap(),
        "--out", target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"]["code"], "not_in_ideal");
    assert!(!target.exists(), "failed command must not write output");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "no stray temp files");
}

#[test]
fn usage_errors_exit_with_two() {
    let out = jetkernel(&["weil", "new", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let none = jetkernel(&[]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_domain_error() {
    let out = jetkernel(&["weil", "info", "--in", "/nonexistent/algebra.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"]["code"], "invalid_input");
}

#[test]
fn selftest_is_byte_deterministic_for_a_fixed_seed() {
    let first = jetkernel(&["selftest", "--seed", "42", "--json"]);
    assert!(first.status.success(), "{}", stdout_of(&first));
    let second = jetkernel(&["selftest", "--seed", "42", "--json"]);
    assert_eq!(first.stdout, second.stdout);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&first)).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["rng"], "ChaCha8");
    assert_eq!(doc["suites"].as_array().unwrap().len(), 8);
}

#[test]
fn selftest_fault_hook_names_the_violated_identity() {
    let out = jetkernel(&["selftest", "--seed", "42", "--fault", "perturb-phi"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout_of(&out);
    assert!(text.contains("phi_alpha_eq_f"), "{text}");
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"]["code"], "selftest_failed");
}

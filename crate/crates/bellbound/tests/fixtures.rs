use std::path::PathBuf;

use bellbound::functionals::{cglmp, chsh};
use bellbound::io::{read_json, resolve_state, FunctionalJson, PovmJson};
use bellbound::lhv::{lhv_constants, maximal_violation};
use bellbound::quantum::singlet;
use bellbound::{behavior_average, joint_probabilities};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn functional_files_match_builtins() {
    let f: FunctionalJson = read_json(&fixture("chsh.json")).unwrap();
    assert_eq!(f.to_functional().unwrap(), chsh());
    let f: FunctionalJson = read_json(&fixture("cglmp3.json")).unwrap();
    let f = f.to_functional().unwrap();
    assert_eq!(f, cglmp(3).unwrap());
    let k = lhv_constants(&f).unwrap();
    assert_eq!(k.b_sup, 2.0);
}

#[test]
fn tsirelson_measurements_reach_the_quantum_maximum() {
    let rho = resolve_state(fixture("singlet_state.json").to_str().unwrap()).unwrap().state;
    assert!(bellbound::linalg::max_abs_diff(rho.matrix(), singlet().matrix()) < 1e-15);
    let povms: PovmJson = read_json(&fixture("tsirelson_povms.json")).unwrap();
    let p = joint_probabilities(&rho, &povms.to_povms().unwrap()).unwrap();
    assert!((behavior_average(&p, &chsh()).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    assert!((maximal_violation(&p).unwrap().upsilon - std::f64::consts::SQRT_2).abs() < 1e-9);
}

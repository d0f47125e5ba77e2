#![allow(dead_code)]

use std::path::PathBuf;

use mixedchar::construction::{simulate, StepRecord};
use mixedchar::ringmodel::presentation::{truncated_polynomial_model, GradedPresentation};
use mixedchar::ringmodel::{load_model, FiniteModel};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn model_path(name: &str) -> PathBuf {
    models_dir().join(format!("{name}.json"))
}

pub fn load_bundled(name: &str) -> FiniteModel {
    let text = std::fs::read_to_string(model_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    load_model(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `Z/2^6[x, y]/(x^8, y^8)` with `z = x + y`.
pub fn regular_p2() -> FiniteModel {
    truncated_polynomial_model(2, 6, 8, 8, &[(1, 1, 0), (1, 0, 1)]).unwrap()
}

/// `Z/p^M[y, x, w]` with `deg w = 2`, `p w = x y`, cut off in degree `bound`; `z = w`.
fn graded_pw_xy(p: u64, precision: u32, bound: u32) -> FiniteModel {
    let v = |a: u32, b: u32, c: u32| vec![a, b, c];
    GradedPresentation {
        p,
        precision,
        variables: vec![("y".into(), 1), ("x".into(), 1), ("w".into(), 2)],
        relations: vec![vec![(p as i64, v(0, 0, 1)), (-1, v(1, 1, 0))]],
        degree_bound: bound,
        x: vec![(1, v(0, 1, 0))],
        y: vec![(1, v(1, 0, 0))],
        z: vec![(1, v(0, 0, 1))],
    }
    .build()
    .unwrap()
}

/// `3w = xy`: `z_2` leaves `(x^2, y^2)` but `z_2 + c xy z_1` does not.
pub fn case2_fixture() -> FiniteModel {
    graded_pw_xy(3, 4, 6)
}

/// `2w = xy`: step 2 needs a rescaling.
pub fn case3_fixture() -> FiniteModel {
    graded_pw_xy(2, 6, 10)
}

/// Steps after the seed for which `z_i` (degree `2i`) stays below the cutoff.
pub const CASE2_FAITHFUL_STEPS: usize = 1;
pub const CASE3_FAITHFUL_STEPS: usize = 3;

pub fn bundled() -> Vec<(&'static str, FiniteModel)> {
    vec![("regular_p2", regular_p2()), ("case2_fixture", case2_fixture()), ("case3_fixture", case3_fixture())]
}

pub fn golden_trace(model: &FiniteModel) -> String {
    let run = simulate(model, 1, 64);
    serde_json::to_string_pretty(&run.steps).unwrap() + "\n"
}

pub fn trace_steps(run_steps: &[StepRecord]) -> String {
    serde_json::to_string_pretty(run_steps).unwrap() + "\n"
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mixedchar")
}

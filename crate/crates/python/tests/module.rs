use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &str) -> PyResult<()> {
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("sdht", pyo3::wrap_pymodule!(sdht::sdht)(py))?;
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None)
    })
}

#[test]
fn onebit_scheme_from_python() {
    run(r#"
mu = [sdht.Distribution(p) for p in ([0.7, 0.3], [0.3, 0.7], [0.5, 0.5])]
s = sdht.Scheme.onebit(mu[0], mu[1], mu[2], 16)
r = s.evaluate(mu[:2], mu[2:])
assert s.key_bits == 1 and r["delta"] < 1e-9 and 0 < r["epsilon"] < 0.5, r
assert sdht.Scheme.from_json(s.to_json()).evaluate(mu[:2], mu[2:]) == r
"#)
    .unwrap();
}

#[test]
fn errors_surface_as_python_exceptions() {
    run(r#"
try:
    sdht.Distribution([0.2, 0.2])
    raise AssertionError("accepted")
except sdht.SdhtCoreError:
    pass
try:
    sdht.psm_verify_program("nope")
    raise AssertionError("accepted")
except ValueError:
    pass
"#)
    .unwrap();
}

#[test]
fn lab_results_are_dicts() {
    run(r#"
sup = sdht.sup_ratio_binary(0.5, 120)
assert sup["max_value"] <= sup["limit"] + 1e-9
assert abs(sdht.ratio_limit(0.5) - sup["limit"]) < 1e-12
v = sdht.hellinger_ratio(0.5, 0.2, 0.6)
assert v["value"] > 0 and not v["degenerate"], v
"#)
    .unwrap();
}

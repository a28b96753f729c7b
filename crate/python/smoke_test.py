"""Smoke test for the Python bindings.

Build and install the extension first, e.g.
    pip install maturin && maturin develop --release -m crates/py/Cargo.toml
or put the built shared library on PYTHONPATH as feynman_index_py.so.
"""

import json

import feynman_index_py as fi


def close(a, b, tol):
    return abs(a - b) <= tol


def test_projectors_and_eta():
    d = fi.OperatorMatrix.circle(0.25, 6)
    assert d.dim == 13
    p_gt, p_lt, p_0 = d.frequency_projectors()
    for i in range(d.dim):
        s = p_gt[i][i] + p_lt[i][i] + p_0[i][i]
        assert close(s, 1.0, 1e-12)
    r = d.eta("zeta")
    assert close(r["eta"], 0.5, 1e-12) and r["h"] == 0


def test_user_matrix_power():
    m = fi.OperatorMatrix([[4.0, 1.0], [0.0, 9.0]])
    root = m.power(0.5).entries()
    assert close(root[0][0], 2.0, 1e-12) and close(root[1][1], 3.0, 1e-12)


def test_index_and_density():
    model = fi.CylinderModel(0.3, 1.3, 24)
    r = model.index_report()
    assert r["spectral_flow"] == 1
    assert close(r["trace_index"], 1.0, 1e-6)
    raw, calibrated = model.integrated_index_density()
    assert close(calibrated, -1.0, 1e-6)


def test_pairing_and_constants():
    phi = fi.TestFunction([0.0, 0.0, 0.0], 1.0)
    value, _ = fi.pair("F", -1.5, 1, phi)
    assert close(value, phi([0.0, 0.0, 0.0]), 1e-6)
    c, _ = fi.structure_constant(0.0, 2)
    assert close(c, 0.25, 1e-14)


def test_hadamard_and_errors():
    v = fi.hadamard_diagonal([[0.5, 0.0], [0.0, -0.25]], [0.1, 0.2], 2)
    assert close(v[2][0][0], 0.25, 1e-10) and close(v[1][1][1], 0.25, 1e-10)
    try:
        fi.pair("nope", 0.5, 1, fi.TestFunction([0.0, 0.0], 1.0))
    except fi.FeynmanIndexError as e:
        assert "INVALID_INPUT" in str(e)
    else:
        raise AssertionError("expected an error")


def test_runner():
    cfg = json.dumps({"eta": {"fluxes": ["0.25"], "k": 100}})
    text, ok = fi.run("xi", cfg, seed=3)
    report = json.loads(text)
    assert ok and report["seed"] == 3 and report["command"] == "xi"


if __name__ == "__main__":
    for name, f in sorted(globals().items()):
        if name.startswith("test_") and callable(f):
            f()
            print("ok", name)

import json
import warnings

import numpy as np
import pytest

from ltcn.hosvd import hosvd, spectrum
from ltcn.targets import TargetSpec, TruncationWarning, generate, load_kernel, parse_target
from ltcn.tensor import tensorize


def test_shift_kernel():
    rho = generate(parse_target("shift:3", d=2))
    assert rho.channels.shape == (2, 4)
    np.testing.assert_array_equal(rho.channels, [[0, 0, 0, 1]] * 2)


def test_exp_and_pow_values():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        e = generate(parse_target("exp:0.7:5"))
        p = generate(parse_target("pow:1.5:4"))
    np.testing.assert_allclose(e.channels[0], 0.7 ** np.arange(5))
    np.testing.assert_allclose(p.channels[0], [1, 2 ** -1.5, 3 ** -1.5, 4 ** -1.5])


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        generate(parse_target("exp:0.9:8"))
    with pytest.warns(TruncationWarning):
        generate(parse_target("pow:1.0:100"))
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        generate(parse_target("exp:0.5:64"))


def test_lowrank_is_planted_and_reproducible():
    spec = parse_target("lowrank:3:3:2:7")
    a, b = generate(spec), generate(spec)
    np.testing.assert_array_equal(a.channels, b.channels)
    sp = spectrum(hosvd(tensorize(a.channels[0], 3, 3)))
    np.testing.assert_allclose(sp.magnitudes[:2], [0.5, 0.25], rtol=1e-13)
    assert np.all(sp.magnitudes[2:] == 0.0)
    other = generate(parse_target("lowrank:3:3:2", seed=8))
    assert not np.array_equal(other.channels, a.channels)


@pytest.mark.parametrize("text", [
    "exp:", "exp:0.5", "exp:1.5:8", "pow:0.4:8", "shift:-1", "shift:x", "lowrank:2:3:3",
    "lowrank:1:3:1", "nope:1", "file:",
])
def test_bad_specs(text):
    with pytest.raises(ValueError):
        generate(parse_target(text))


def test_load_kernel_and_spec_files(tmp_path):
    k = tmp_path / "k.json"
    k.write_text(json.dumps({"d": 1, "channels": [[1.0, 2.0]]}))
    np.testing.assert_array_equal(load_kernel(k).channels, [[1.0, 2.0]])
    s = tmp_path / "s.json"
    s.write_text(json.dumps(TargetSpec("shift", {"k": 1}, d=3).to_json()))
    assert load_kernel(s).channels.shape == (3, 2)
    np.testing.assert_array_equal(generate(parse_target(f"file:{k}")).channels, [[1.0, 2.0]])
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(ValueError):
        load_kernel(bad)


def test_spec_json_round_trip():
    spec = parse_target("exponential:0.5:16", d=2)
    assert spec.kind == "exp"
    assert TargetSpec.from_json(spec.to_json()) == spec


def test_spec_examples():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        np.testing.assert_array_equal(generate(parse_target("exp:0.5:4")).channels[0],
                                      [1, 0.5, 0.25, 0.125])
    rho = generate(parse_target("lowrank:2:3:2:42"))
    sp = spectrum(hosvd(tensorize(rho.channels[0], 2, 3)))
    assert sp.tail(3) <= 1e-12
    assert sp.tail(2) == pytest.approx(0.0625, rel=1e-12)

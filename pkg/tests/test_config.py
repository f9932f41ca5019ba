import numpy as np
import pytest

from ncruelle import config
from ncruelle import potential as pot
from ncruelle.sft import TransitionMatrix


def cfg_of(family, params, **extra):
    return dict({"potential": {"family": family, "params": params}}, **extra)


@pytest.mark.parametrize("cfg,path", [
    ({"potential": {"family": "depolarizing", "params": {"p": 0.5}}, "bogus": 1}, ""),
    ({"potential": {"family": "nope"}}, "potential.family"),
    ({"potential": {"family": "depolarizing", "params": {"p": 1.5}}}, "potential.params.p"),
    ({"potential": {"family": "depolarizing", "params": {"p": 0.5, "q": 1}}}, "potential.params"),
    ({"potential": {"family": "depolarizing", "params": {"p": 0.5}}, "run": {"tol": -1}}, "run.tol"),
    ({"potential": {"family": "depolarizing", "params": {"p": 0.5}}, "theta": 1.0}, "theta"),
    ({"potential": {"family": "kraus_split", "params": {"P": [[1, 0]]}}}, "potential.params.P"),
    ({"potential": {"family": "depolarizing", "params": {"p": 0.5}},
      "shift": {"transition_rows": [[1, 2], [1, 1]]}}, "shift.transition_rows.0.1"),
    ({}, ""),
])
def test_schema_errors_carry_field_path(cfg, path):
    with pytest.raises(config.ConfigError) as info:
        config.validate(cfg)
    assert info.value.path == path


def test_load_reports_bad_json(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("{not json")
    with pytest.raises(config.ConfigError, match="invalid JSON"):
        config.load(f)
    with pytest.raises(config.ConfigError):
        config.load(tmp_path / "missing.json")


def test_build_trace_type_presets():
    phi = config.build_potential(cfg_of("trace_type", {"preset": "first_coordinate", "p": 0.3}))
    ref = pot.make_first_coordinate(0.3)
    assert np.array_equal(phi.maps, ref.maps)
    gold = {"shift": {"transition_rows": [[1, 1], [1, 0]]}}
    phi = config.build_potential(cfg_of("trace_type", {"preset": "maximal_entropy"}, **gold))
    assert phi.shift == TransitionMatrix.golden_mean()
    assert pot.check_normalized(phi) <= 1e-14
    with pytest.raises(config.ConfigError) as info:
        config.build_potential(cfg_of("trace_type", {"preset": "first_coordinate"}))
    assert info.value.path == "potential.params.p"


def test_build_factor_tables():
    params = {"factors": {"1": [[0.3, 0], [0, 0.6]], "2": [[0.7, 0], [0, 0.4]]}}
    phi = config.build_potential(cfg_of("trace_type", params))
    assert phi.is_trace_type and pot.check_normalized(phi) <= 1e-15
    bad = {"factors": {"1": [[0.3, 0], [0, 0.6]], "2": [[0.7, 0], [0, 0.5]]}}
    phi = config.build_potential(cfg_of("trace_type", bad))
    # sum of factors is diag(1, 1.1)
    assert pot.check_normalized(phi) == pytest.approx(0.1)


def test_build_families_match_constructors():
    P = [[0.9, 0.1], [0.2, 0.8]]
    pairs = [
        (cfg_of("depolarizing", {"p": 0.25}), pot.make_depolarizing(0.25)),
        (cfg_of("kraus_split", {"P": P}), pot.make_kraus_split(P)),
        (cfg_of("kraus_channel", {"P": P}), pot.make_kraus_channel(P)),
        (cfg_of("vector_table", {"uniform": {"N": 3}}),
         pot.make_vector_table(pot.uniform_vector_table(3))),
        (cfg_of("vector_table", {"constant": [[0.25, 0.25], [0.25, 0.25]]}),
         pot.make_vector_table(np.full((2, 2), 0.25))),
    ]
    for cfg, ref in pairs:
        phi = config.build_potential(cfg)
        assert phi.family == ref.family
        assert np.allclose(phi.maps, ref.maps, atol=1e-15)


def test_build_custom_needs_algebra():
    maps = {"1": np.eye(4).tolist(), "2": np.eye(4).tolist()}
    with pytest.raises(config.ConfigError) as info:
        config.build_potential(cfg_of("custom", {"maps": maps}))
    assert info.value.path == "algebra"
    phi = config.build_potential(cfg_of("custom", {"maps": maps}, algebra={"kind": "matrix", "size": 2}))
    assert pot.check_normalized(phi) == pytest.approx(1.0)


def test_depth_lift_and_mismatch():
    cfg = {"potential": {"family": "depolarizing", "params": {"p": 0.5}, "depth": 3}}
    assert config.build_potential(cfg).depth == 3
    cfg = {"potential": {"family": "kraus_split", "params": {"P": [[0.5, 0.5], [0.5, 0.5]]}},
           "shift": {"transition_rows": [[1, 1], [1, 0]]}}
    with pytest.raises(config.ConfigError) as info:
        config.build_potential(cfg)
    assert info.value.path == "shift"
    cfg = cfg_of("depolarizing", {"p": 0.5}, algebra={"kind": "vector", "size": 2})
    with pytest.raises(config.ConfigError):
        config.build_potential(cfg)


def test_shift_k_must_match_rows():
    cfg = cfg_of("depolarizing", {"p": 0.5}, shift={"k": 3, "transition_rows": [[1, 1], [1, 0]]})
    with pytest.raises(config.ConfigError) as info:
        config.build_shift(cfg)
    assert info.value.path == "shift.k"


def test_settings_defaults_and_overrides():
    run = config.settings(cfg_of("depolarizing", {"p": 0.5}))
    assert (run.theta, run.tol, run.max_iter, run.seed) == (0.5, 1e-10, 10_000, 0)
    cfg = cfg_of("depolarizing", {"p": 0.5}, run={"tol": 1e-6, "seed": 4, "samples": 10}, theta=0.3)
    run = config.settings(cfg)
    assert (run.theta, run.tol, run.seed, run.samples) == (0.3, 1e-6, 4, 10)


def test_build_function_kinds():
    phi = pot.make_depolarizing(0.5)
    g = config.build_function(cfg_of("depolarizing", {"p": 0.5},
                                     run={"g": {"kind": "constant", "value": [[2, 0], [0, 1]]}}), phi, 0)
    assert g.depth == 0 and np.allclose(g.values[0], [2, 0, 0, 1])
    g = config.build_function(cfg_of("depolarizing", {"p": 0.5}, run={"g": {
        "kind": "table", "values": {"1": [[1, 0], [0, 0]], "2": [[0, 0], [0, 1]]}}}), phi, 0)
    assert g.depth == 1
    a = config.build_function(cfg_of("depolarizing", {"p": 0.5}), phi, 3)
    b = config.build_function(cfg_of("depolarizing", {"p": 0.5}), phi, 3)
    assert a.depth == 2 and np.array_equal(a.values, b.values)
    with pytest.raises(config.ConfigError) as info:
        config.build_function(cfg_of("depolarizing", {"p": 0.5}, run={"g": {"kind": "constant"}}), phi, 0)
    assert info.value.path == "run.g.value"

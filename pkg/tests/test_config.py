import json

import pytest

from hierassoclib import BenchConfig, RmatConfig, ConfigurationError
from hierassoclib.helpers import default_config_path


def test_desk_scale_defaults():
    cfg = BenchConfig()
    assert (cfg.rmat.scale, cfg.rmat.total_edges, cfg.rmat.batch_size) == (22, 10 ** 7, 10 ** 5)
    assert cfg.rmat.probs == (0.57, 0.19, 0.19, 0.05)
    assert cfg.cut_spec.cuts == (2 ** 13, 2 ** 16, 2 ** 19, 2 ** 22)
    assert cfg.cut_label == "many-narrow"
    assert cfg.warmup_batches == 2
    assert cfg.instances == 1


def test_rmat_properties():
    cfg = RmatConfig(scale=22, total_edges=10 ** 7 + 1, batch_size=10 ** 5)
    assert cfg.num_vertices == 2 ** 22
    assert cfg.key_width == 7
    assert cfg.num_batches == 101


def test_probs_from_text():
    assert RmatConfig(probs="0.25,0.25,0.25,0.25").probs == (0.25, 0.25, 0.25, 0.25)
    with pytest.raises(ConfigurationError):
        RmatConfig(probs="0.25,0.25,x,0.25")


@pytest.mark.parametrize("kwargs", [
    {"instances": 0},
    {"warmup_batches": -1},
    {"semiring": "plus-minus"},
    {"cuts": "many-wide"},
    {"cuts": "100,10"},
    {"layers": 0},
    {"instances": 1.5},
    {"warmup_batches": "2"},
    {"layers": float("inf")},
    {"first_cut": True},
])
def test_invalid(kwargs):
    with pytest.raises(ConfigurationError):
        BenchConfig(**kwargs)


def test_from_dict_merges_overrides():
    data = {"rmat": {"scale": 10, "seed": 3}, "cuts": "few-wide", "warmup_batches": 1}
    cfg = BenchConfig.from_dict(data, total_edges=500, cuts=None, seed=9)
    assert cfg.rmat.scale == 10
    assert cfg.rmat.total_edges == 500
    assert cfg.rmat.batch_size == 10 ** 5
    assert cfg.rmat.seed == 9
    assert cfg.cut_label == "few-wide"
    assert cfg.warmup_batches == 1


def test_from_dict_flat_rmat_fields():
    cfg = BenchConfig.from_dict({"scale": 12, "batch_size": 64})
    assert (cfg.rmat.scale, cfg.rmat.batch_size) == (12, 64)


def test_explicit_cuts_override_layers_from_file():
    cfg = BenchConfig.from_dict({"layers": 4}, cuts="10,20")
    assert cfg.layers is None
    assert cfg.cut_spec.cuts == (10, 20)
    assert BenchConfig.from_dict({"layers": 3}).cut_spec.cuts == (2 ** 13, 2 ** 18)


def test_unknown_fields():
    with pytest.raises(ConfigurationError):
        BenchConfig.from_dict({"colour": "blue"})
    with pytest.raises(ConfigurationError):
        BenchConfig.from_dict({"rmat": {"vertices": 10}})


def test_from_json(tmp_path):
    path = tmp_path / "bench.json"
    path.write_text(json.dumps({"rmat": {"scale": 9, "total_edges": 1000, "batch_size": 100}, "semiring": "min_plus"}))
    cfg = BenchConfig.from_json(str(path), semiring="max_plus")
    assert cfg.rmat.scale == 9
    assert cfg.semiring == "max_plus"


def test_integral_floats_accepted_as_counts(tmp_path):
    path = tmp_path / "bench.json"
    path.write_text(json.dumps({"rmat": {"scale": 9.0, "total_edges": 1000.0, "batch_size": 100.0, "seed": 4.0},
                                "instances": 2.0, "warmup_batches": 1.0, "layers": 3.0, "first_cut": 16.0, "cut_ratio": 4.0}))
    cfg = BenchConfig.from_json(str(path))
    assert (cfg.rmat.scale, cfg.rmat.total_edges, cfg.rmat.batch_size, cfg.rmat.seed) == (9, 1000, 100, 4)
    assert all(type(x) is int for x in (cfg.rmat.scale, cfg.rmat.total_edges, cfg.rmat.batch_size, cfg.rmat.seed))
    assert (cfg.instances, cfg.warmup_batches, cfg.layers) == (2, 1, 3)
    assert type(cfg.instances) is int
    assert cfg.cut_spec.cuts == (16, 64)
    assert cfg.rmat.num_batches == 10
    assert cfg.to_dict()["rmat"]["scale"] == 9


@pytest.mark.parametrize("kwargs", [{"scale": 6.5}, {"total_edges": "100"}, {"batch_size": float("nan")}, {"seed": None}])
def test_rmat_counts_must_be_integers(kwargs):
    with pytest.raises(ConfigurationError):
        RmatConfig(**kwargs)


def test_from_json_errors(tmp_path):
    path = tmp_path / "bench.json"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        BenchConfig.from_json(str(path))
    path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        BenchConfig.from_json(str(path))


def test_echo_is_stable():
    cfg = BenchConfig(cuts=[5, 50])
    assert cfg.echo() == BenchConfig(cuts="5,50").echo()
    assert json.loads(cfg.echo())["cuts"] == [5, 50]
    assert cfg.cut_label == "5,50"


def test_default_config_path():
    assert default_config_path().endswith("bench.json")
    assert "hierassoclib" in default_config_path()

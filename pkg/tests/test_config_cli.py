import copy
import json
from fractions import Fraction as F
from importlib import resources

import pytest

from selfsim import cli
from selfsim.config import (ConfigError, IfsConfig, bundled_names, load_bundled)

ALL = ["cantor-1-3", "commensurable-osc", "complex-pisot-demo",
       "golden-bernoulli", "golden-gasket-conjugated", "lebesgue-1-2"]


def test_bundled_inventory():
    assert bundled_names() == ALL


def test_roundtrip_bit_exact():
    for name in ALL:
        ref = resources.files("selfsim.configs").joinpath(f"{name}.json")
        raw = ref.read_text()
        cfg = IfsConfig.from_dict(json.loads(raw))
        assert cfg.canonical_json() == raw
        # a second load of the serialized form is identical again
        assert IfsConfig.from_dict(json.loads(cfg.canonical_json())).canonical_json() == raw


def test_config_hash_stable_and_distinct():
    hashes = {load_bundled(n).config_hash() for n in ALL}
    assert len(hashes) == len(ALL)
    assert load_bundled(ALL[0]).config_hash() == load_bundled(ALL[0]).config_hash()


def _golden_dict():
    ref = resources.files("selfsim.configs").joinpath("golden-bernoulli.json")
    return json.loads(ref.read_text())


def test_validation_messages():
    base = _golden_dict()

    bad = copy.deepcopy(base)
    bad["probabilities"] = ["1/2", "1/3"]
    with pytest.raises(ConfigError, match="sum"):
        IfsConfig.from_dict(bad).build_ifs()

    bad = copy.deepcopy(base)
    bad["field"]["minimal_polynomial"] = ["-1/2", "-1/2", "1/1"]  # reducible
    with pytest.raises(ConfigError, match="reducible"):
        IfsConfig.from_dict(bad).build_field()

    bad = copy.deepcopy(base)
    bad["maps"][0]["linear"] = [[["1/1", "0/1"]]]  # |linear| != rho
    with pytest.raises(ConfigError, match="orthogonal|modulus"):
        IfsConfig.from_dict(bad).build_ifs()

    bad = copy.deepcopy(base)
    bad["maps"][0]["scale_exponent"] = 0
    with pytest.raises(ConfigError, match="positive integer"):
        IfsConfig.from_dict(bad)

    bad = copy.deepcopy(base)
    del bad["mode"]
    with pytest.raises(ConfigError, match="mode"):
        IfsConfig.from_dict(bad)

    bad = copy.deepcopy(base)
    bad["probabilities"] = ["1/2", "x"]
    with pytest.raises(ConfigError, match="bad rational"):
        IfsConfig.from_dict(bad)


def test_cli_check_ftc(tmp_path, capsys):
    rc = cli.main(["check-ftc", "--config", "bundled:golden-bernoulli",
                   "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "pisot" in out and "|Gamma| = 7" in out
    assert (tmp_path / "golden-bernoulli-neighbors.dot").exists()


def test_cli_check_ftc_inconclusive(tmp_path, capsys):
    # ratio 2/3 with overlap: no finite type within a small budget
    cfg = _golden_dict()
    cfg["name"] = "overlap-2-3"
    cfg["field"]["minimal_polynomial"] = ["-2/3", "1/1"]
    third = ["1/3"]
    cfg["base_ratio"] = ["2/3"]
    cfg["maps"] = [
        {"linear": [[["2/3"]]], "translation": [["0/1"]], "scale_exponent": 1},
        {"linear": [[["2/3"]]], "translation": [third], "scale_exponent": 1},
    ]
    cfg["budgets"] = {"max_neighbor_nodes": 200}
    path = tmp_path / "overlap.json"
    path.write_text(IfsConfig.from_dict(cfg).canonical_json())
    rc = cli.main(["check-ftc", "--config", str(path), "--out", str(tmp_path)])
    assert rc == 2


def test_cli_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    rc = cli.main(["build", "--config", str(path), "--out", str(tmp_path)])
    assert rc == 1


def test_cli_mass(tmp_path, capsys):
    rc = cli.main(["mass", "--config", "bundled:cantor-1-3",
                   "--address", "0,1,1,2", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0 and "1/8" in out
    rc = cli.main(["mass", "--config", "bundled:cantor-1-3",
                   "--address", "0,0", "--out", str(tmp_path)])
    assert rc == 3


def test_cli_build_and_spectrum_deterministic(tmp_path, capsys):
    outs = []
    for run in ("a", "b"):
        d = tmp_path / run
        rc = cli.main(["build", "--config", "bundled:commensurable-osc",
                       "--out", str(d), "--rng-seed", "11"])
        assert rc == 0
        rc = cli.main(["spectrum", "--config", "bundled:commensurable-osc",
                       "--q-grid", "0.5:3.0:0.25", "--out", str(d),
                       "--rng-seed", "11"])
        assert rc == 0
        blobs = b""
        for f in sorted(d.iterdir()):
            blobs += f.name.encode() + f.read_bytes()
        outs.append(blobs)
    assert outs[0] == outs[1]
    csv_text = (tmp_path / "a" / "commensurable-osc-spectrum.csv").read_text()
    assert csv_text.splitlines()[0] == "q,tau,tau_lower,tau_upper,method,n,config_hash"


def test_cli_oracle(tmp_path, capsys):
    rc = cli.main(["oracle", "tau", "--config", "bundled:lebesgue-1-2",
                   "--q", "2.0", "--n-min", "6", "--n-max", "12",
                   "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0 and "tau_dyadic(2.0) = 1.000000" in out
    rc = cli.main(["oracle", "dyadic", "--config", "bundled:cantor-1-3",
                   "--q", "2.0", "--n-min", "4", "--n-max", "8",
                   "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "cantor-1-3-dyadic.csv").read_text().splitlines()
    assert lines[0] == "q,n,lq_sum,config_hash,rng_seed"
    assert len(lines) == 6
    rc = cli.main(["oracle", "estimate-mass", "--config", "bundled:cantor-1-3",
                   "--lo", "0", "--hi", "1/2", "--samples", "20000",
                   "--rng-seed", "3", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0 and "monte-carlo" in out


def test_cli_automaton_artifacts(tmp_path):
    rc = cli.main(["build", "--config", "bundled:lebesgue-1-2", "--out", str(tmp_path)])
    assert rc == 0
    data = json.loads((tmp_path / "lebesgue-1-2-automaton.json").read_text())
    assert data["config_hash"] == load_bundled("lebesgue-1-2").config_hash()
    assert len(data["states"]) == 7
    assert set(data["mass_positive_states"]) == {0, 2, 3, 5, 6}
    dot = (tmp_path / "lebesgue-1-2-automaton.dot").read_text()
    assert "digraph" in dot

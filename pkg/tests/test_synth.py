import numpy as np
import pytest

from turnsig.errors import ConfigError
from turnsig.features import FeatureExtractor, feature_names
from turnsig.synth import SynthSpec, generate, generate_interview
from turnsig.transcript import Group, Subject, load_interview, save_interview, write_dataset


def test_counts():
    ivs = generate(SynthSpec(n_per_group=5, seed=1))
    assert len(ivs) == 15
    assert {g: sum(iv.group is g for iv in ivs) for g in Group} == {Group.BD: 5, Group.BPD: 5, Group.HC: 5}


def test_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    write_dataset(generate(SynthSpec(n_per_group=3, seed=9)), a)
    write_dataset(generate(SynthSpec(n_per_group=3, seed=9)), b)
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_seed_matters():
    x = generate(SynthSpec(n_per_group=2, seed=1))
    y = generate(SynthSpec(n_per_group=2, seed=2))
    assert x != y


def test_streams_are_split():
    small = generate(SynthSpec(n_per_group=2, seed=4))
    large = generate(SynthSpec(n_per_group=6, seed=4))
    by_id = {iv.id: iv for iv in large}
    assert all(by_id[iv.id] == iv for iv in small)


def test_valid_and_annotated(caplog):
    ex = FeatureExtractor()
    for iv in generate(SynthSpec(n_per_group=3, seed=5)):
        assert load_interview(save_interview(iv)) == iv
        ex.turn_vectors(iv)
    assert "lack POS" not in caplog.text


def test_ipde_ordering():
    ivs = generate(SynthSpec(n_per_group=15, seed=42))
    med = {g: np.median([iv.ipde_score for iv in ivs if iv.group is g]) for g in Group}
    assert med[Group.BPD] > med[Group.BD] > med[Group.HC]
    assert med[Group.HC] == 0 and med[Group.BD] == 2


def test_planted_rates_show_in_features():
    ex = FeatureExtractor()
    names = feature_names("LING")
    spec = SynthSpec(n_per_group=6, seed=7)

    def mean_rate(group, name):
        rows = [ex.turn_matrices(generate_interview(spec, group, i), Subject.PARTICIPANT, ("LING",))["LING"]
                for i in range(6)]
        return float(np.nanmean(np.vstack(rows)[:, names.index(name)]))

    assert mean_rate(Group.BPD, "nonflu_w") > 3 * mean_rate(Group.HC, "nonflu_w")
    assert mean_rate(Group.BPD, "abs_w") > 2 * mean_rate(Group.HC, "abs_w")


def test_zero_effects_equalize_groups():
    spec = SynthSpec(n_per_group=2, seed=8, effect_scale=0.0)
    assert spec.multiplier("BPD", "nonflu") == 1.0 and spec.multiplier("BD", "drift") == 1.0
    assert SynthSpec(effect_scale=0.5).multiplier("BD", "wps") == pytest.approx(1.2)


@pytest.mark.parametrize("kwargs", [
    {"n_per_group": 1},
    {"min_turns": 5, "max_turns": 3},
    {"effect_scale": float("nan")},
    {"effect_scale": -1.0},
    {"effects": {"XX": {}}},
    {"effects": {"BD": {"sparkle": 2.0}}},
    {"effects": {"BD": {"wps": float("inf")}}},
    {"effects": {"BD": {"wps": 0.0}}},
])
def test_invalid_spec(kwargs):
    with pytest.raises(ConfigError):
        generate(SynthSpec(**kwargs))

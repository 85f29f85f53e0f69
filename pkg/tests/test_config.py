import math

import pytest
import yaml

from ergoscope.config import load_config, parse_config
from ergoscope.errors import ConfigError
from ergoscope.kinematics import DEFAULT_LIMITS
from ergoscope.optimizer import DesignPoint

LINKS = """
manipulator:
  links:
    - {alpha: 0.0, a: 0.0}
    - {alpha: 1.5707963267948966, a: 0.0}
    - {alpha: -1.5707963267948966, a: 0.26}
    - {alpha: 0.0, a: 0.18}
    - {alpha: -1.5707963267948966, a: 0.0}
    - {alpha: 1.5707963267948966, a: 0.0}
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(LINKS)
    assert cfg.section("dexterity") == {"K": 1e5, "tau": 0.3}
    assert cfg.section("sampling")["n_samples"] == 200_000
    assert cfg.section("sampling")["r"] == 0.02
    assert cfg.section("ehem")["forearm_length"] == 0.25
    assert cfg.section("optimize")["bounds"] == {"a3": [0.05, 0.40], "a4": [0.05, 0.40], "D": [0.05, 0.50]}
    links = cfg.section("manipulator")["links"]
    assert [(l["theta_down"], l["theta_up"]) for l in links] == [tuple(x) for x in DEFAULT_LIMITS]
    assert cfg.design() == DesignPoint(0.26, 0.18, 0.20)
    m = cfg.manipulator()
    assert m.convention == "modified" and m.links[3].a == 0.18


def test_print_config_is_a_fixpoint():
    cfg = parse_config(LINKS)
    again = parse_config(cfg.dump())
    assert again == cfg
    assert again.dump() == cfg.dump()


def test_shipped_configs_round_trip(repo_root):
    for name in ("optimized", "original"):
        cfg = load_config(repo_root / "configs" / f"{name}.yaml")
        assert parse_config(cfg.dump()) == cfg
    assert load_config(repo_root / "configs" / "optimized.yaml").design() == DesignPoint(0.26, 0.18, 0.2)


def test_digest_ignores_workers_and_output():
    cfg = parse_config(LINKS)
    assert cfg.digest() == cfg.with_overrides(workers=8, out="/elsewhere").digest()
    assert cfg.digest() != cfg.with_overrides(seed=5).digest()


def test_overrides():
    cfg = parse_config(LINKS).with_overrides(seed=9, out="x", workers=3)
    assert cfg.section("sampling")["seed"] == 9
    assert cfg.section("sampling")["workers"] == 3
    assert cfg.section("output")["directory"] == "x"


def bad(text, **changes):
    data = yaml.safe_load(LINKS)
    for path, value in changes.items():
        node = data
        keys = path.split("__")
        for k in keys[:-1]:
            node = node.setdefault(k, {}) if not k.isdigit() else node[int(k)]
        node[keys[-1] if not keys[-1].isdigit() else int(keys[-1])] = value
    return yaml.safe_dump(data)


@pytest.mark.parametrize("changes,field,kind", [
    ({"manipulator__links__2__theta_down": 2.0, "manipulator__links__2__theta_up": 1.0},
     "manipulator.links[2]", "invariant"),
    ({"dexterity__Kay": 3.0}, "dexterity.Kay", "unknown-key"),
    ({"extras": {}}, "extras", "unknown-key"),
    ({"dexterity__K": -1.0}, "dexterity.K", "invariant"),
    ({"dexterity__K": "many"}, "dexterity.K", "schema"),
    ({"sampling__n_samples": 1.5}, "sampling.n_samples", "schema"),
    ({"sampling__r_auto": "yes"}, "sampling.r_auto", "schema"),
    ({"layout__alpha": 0.0}, "layout.alpha", "invariant"),
    ({"layout__R": [0.0, 1.0]}, "layout.R", "schema"),
    ({"ehem__reach_range": [0.2, 0.1]}, "ehem.reach_range", "invariant"),
    ({"optimize__strategy": "anneal"}, "optimize.strategy", "schema"),
    ({"optimize__bounds": {"a5": [0, 1]}}, "optimize.bounds.a5", "unknown-key"),
    ({"manipulator__convention": "craig"}, "manipulator.convention", "schema"),
    ({"manipulator__base_rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 2]]}, "manipulator.base_rotation", "invariant"),
    ({"manipulator__links__0__a": -0.1}, "manipulator.links[0].a", "invariant"),
])
def test_invalid_configs_name_the_field(changes, field, kind):
    with pytest.raises(ConfigError) as exc:
        parse_config(bad(LINKS, **changes))
    assert exc.value.field == field
    assert exc.value.kind == kind
    assert field in str(exc.value)


def test_theta_down_above_up_names_the_link():
    with pytest.raises(ConfigError, match="link 3"):
        parse_config(bad(LINKS, manipulator__links__2__theta_down=2.0, manipulator__links__2__theta_up=1.0))


def test_wrong_link_count_and_missing_sections():
    data = yaml.safe_load(LINKS)
    data["manipulator"]["links"].pop()
    with pytest.raises(ConfigError, match="exactly 6"):
        parse_config(yaml.safe_dump(data))
    with pytest.raises(ConfigError) as exc:
        parse_config("dexterity: {K: 1.0}")
    assert exc.value.field == "manipulator"
    with pytest.raises(ConfigError) as exc:
        parse_config("manipulator:\n  links:\n    - {a: 0.1}\n" + "    - {alpha: 0.0, a: 0.0}\n" * 5)
    assert exc.value.field == "manipulator.links[0].alpha"


def test_parse_error_and_missing_file(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config("manipulator: [unclosed")
    assert exc.value.kind == "parse"
    with pytest.raises(ConfigError) as exc:
        load_config(tmp_path / "nope.yaml")
    assert exc.value.kind == "io"


def test_scientific_notation_strings_accepted():
    cfg = parse_config(LINKS + "dexterity: {K: 1e5}\n")
    assert cfg.section("dexterity")["K"] == 1e5
    assert math.isclose(cfg.dexterity().K, 1e5)

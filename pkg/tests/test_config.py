import pytest

from thintube.config import (Config, config_from_mapping, load_config, parse_config_text,
                             parse_geometry_flag)
from thintube.errors import ConfigError
from thintube.geometry import Ellipse

TEXT = """
# inward ellipse
geometry.kind = ellipse
geometry.a = 1.0
geometry.b = 0.5
geometry.orientation = inward
sweep.eps = 0.2, 0.1, 0.05
sweep.n_max = 3   # three eigenvalues
sweep.cases = dn, effective
solver.seed = 0x10
"""


def test_flat_dotted_keys():
    cfg = parse_config_text(TEXT).validate()
    assert isinstance(cfg.geometry(), Ellipse)
    assert cfg.eps_list == (0.2, 0.1, 0.05)
    assert cfg.n_max == 3 and cfg.seed == 16
    assert cfg.cases == ("dn", "effective")


def test_sections_become_prefixes(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[geometry]\nkind = sphere\nradius = 2\n[sweep]\neps = 0.1, 0.05\n")
    cfg = load_config(path)
    assert cfg.geometry().radius == 2.0
    assert cfg.eps_list == (0.1, 0.05)


def test_changing_kind_drops_old_parameters():
    base = Config()
    cfg = config_from_mapping({"geometry.a": "2", "geometry.b": "1", "geometry.kind": "ellipse"}, base)
    assert dict(cfg.geometry_params) == {"a": "2", "b": "1"}


@pytest.mark.parametrize("text", [
    "sweep.eps = 0.1, 0.2",
    "sweep.eps = 0.1, -0.05",
    "sweep.n_max = 0",
    "sweep.cases = dn, robin",
    "geometry.kind = circle\ngeometry.radius = 1\ngeometry.orientation = inward\nsweep.eps = 1.0, 0.5",
    "output.formats = xml",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config_text(text).validate()


def test_unknown_key_and_bad_value():
    with pytest.raises(ConfigError):
        parse_config_text("solver.magic = 3")
    with pytest.raises(ConfigError):
        parse_config_text("sweep.n_max = three")
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.ini")


def test_geometry_flag():
    values = parse_geometry_flag("circle,radius=2,orientation=inward")
    assert values == {"geometry.kind": "circle", "geometry.radius": "2", "geometry.orientation": "inward"}
    with pytest.raises(ConfigError):
        parse_geometry_flag("circle,radius")


def test_digest_ignores_workers_and_output(monkeypatch):
    a = Config()
    b = Config(workers=4, out_dir="elsewhere")
    assert a.digest() == b.digest()
    assert a.digest() != Config(seed=1).digest()
    monkeypatch.setenv("THINTUBE_WORKERS", "3")
    assert a.resolved_workers() == 3
    assert Config(workers=2).resolved_workers() == 2

import numpy as np
import pytest

from photokin.errors import ConfigError
from photokin.grid import GridSpec
from photokin.metrics import mean_spacetime_error
from photokin.simulation import SCHEMES, SchemeConfig, config_hash, product_concentration, run_simulation

ALL_CONFIGS = [
    SchemeConfig("nsfd", "phi1"),
    SchemeConfig("nsfd", "phi2"),
    SchemeConfig("nsfd", "phi3"),
    SchemeConfig("rq"),
    SchemeConfig("ftrq"),
    SchemeConfig("pc", "phi2"),
    SchemeConfig("dq", weights="gregory-1"),
    SchemeConfig("dq", weights="gregory-2"),
]


@pytest.mark.parametrize("config", ALL_CONFIGS, ids=lambda c: c.label)
def test_initial_row_only(test1, config):
    f = run_simulation(test1, GridSpec(8, 0, 8), config)
    assert f.values.shape == (1, 9)
    np.testing.assert_array_equal(f.values[0], test1.c0(f.x))


@pytest.mark.parametrize("config", ALL_CONFIGS, ids=lambda c: c.label)
def test_row_zero_is_initial_data(test1, config):
    f = run_simulation(test1, GridSpec(8, 8, 8), config)
    np.testing.assert_array_equal(f.values[0], test1.c0(f.x))
    assert f.values.shape == (9, 9)
    assert not f.values.flags.writeable


@pytest.mark.parametrize("config", [c for c in ALL_CONFIGS if c.scheme != "ftrq"], ids=lambda c: c.label)
def test_guarantees_on_test1(test1, config):
    f = run_simulation(test1, GridSpec(16, 16, 16), config)
    assert not f.audit.negative_seen
    assert not f.audit.monotonicity_violated
    if config.scheme == "dq":
        assert f.audit.out_of_box_steps == ()
        assert f.audit.max_solver_residual <= 1e-14
        assert f.audit.max_log_residual <= 1e-12


def test_deterministic(test1):
    for config in ALL_CONFIGS:
        a = run_simulation(test1, GridSpec(8, 8, 8), config)
        b = run_simulation(test1, GridSpec(8, 8, 8), config)
        assert a.values.tobytes() == b.values.tobytes()
        assert a.provenance == b.provenance


def test_config_hash_sensitivity(test1):
    g = GridSpec(8, 8, 8)
    h = {config_hash(test1, g, c) for c in ALL_CONFIGS}
    assert len(h) == len(ALL_CONFIGS)
    assert config_hash(test1, g, ALL_CONFIGS[0]) != config_hash(test1, GridSpec(8, 4, 8), ALL_CONFIGS[0])


def test_nsfd_phi1_table_value(test1, ref7):
    f = run_simulation(test1, GridSpec.from_theta(test1, 2.0**-2), SchemeConfig("nsfd"))
    assert mean_spacetime_error(f, ref7) == pytest.approx(2.63e-2, rel=0.05)


def test_dq_gregory2_table_value(test1, ref7):
    f = run_simulation(test1, GridSpec.from_theta(test1, 2.0**-3), SchemeConfig("dq", weights="gregory-2"))
    assert mean_spacetime_error(f, ref7) == pytest.approx(1.65e-5, rel=0.10)


@pytest.mark.parametrize("config", ALL_CONFIGS, ids=lambda c: c.label)
def test_conservation(test1, config):
    f = run_simulation(test1, GridSpec(8, 8, 8), config)
    b = product_concentration(f)
    np.testing.assert_array_equal(b.values[0], np.zeros(9))
    resid = np.abs(f.values + b.values - f.c0[None, :])
    assert resid.max() <= np.spacing(f.c0.max())


@pytest.mark.parametrize("scheme", ["nsfd", "rq", "pc"])
def test_product_nondecreasing(test1, scheme):
    b = product_concentration(run_simulation(test1, GridSpec(8, 8, 8), SchemeConfig(scheme)))
    assert np.all(np.diff(b.values, axis=0) >= 0)
    assert b.species == "B"


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(scheme="euler"),
        dict(phi="phi4"),
        dict(gamma=0.0),
        dict(scheme="dq", weights="trapezoidal"),
        dict(tol=0.0),
        dict(start_refinement=0),
        dict(start_refinement="sometimes"),
    ],
)
def test_scheme_config_validation(kwargs):
    with pytest.raises(ConfigError):
        SchemeConfig(**kwargs)


def test_labels():
    assert SchemeConfig("nsfd", "phi2").label == "nsfd-phi2"
    assert SchemeConfig("dq", weights="gregory-1").label == "dq-gregory-1"
    assert SchemeConfig("rq").label == "rq"
    assert set(SCHEMES) == {"nsfd", "rq", "ftrq", "pc", "dq"}

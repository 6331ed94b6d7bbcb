import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import TABLE_I_PARAMS, psi_table_i, rel_err
from rtd_swipt.eh_model import (
    EhModel,
    LogisticSegment,
    dumps_model,
    invert_first_segment,
    load_model,
    loads_model,
    p_max,
    save_model,
    table_i_model,
)
from rtd_swipt.errors import BreakdownError, InvariantError, RangeError, SchemaError


def test_psi_zero_exact(model):
    assert model.psi(0.0) == 0.0


def test_psi_matches_direct_formula(model):
    for rho in np.linspace(0.0, 2.4e-3, 241):
        assert model.psi(rho) == pytest.approx(psi_table_i(rho), rel=1e-13, abs=0)


def test_table_i_peak_and_endpoint(model):
    # published parameters with rho in mW
    assert model.psi(1.8e-3) == pytest.approx(7.150582699227205e-05, rel=1e-12)
    assert model.psi(2.4e-3) == pytest.approx(2.83e-5, rel=2e-3)


def test_continuity_at_breakpoint(model):
    left = model.segments[0](1.8)
    right = model.segments[1](1.8)
    assert rel_err(left, right) < 1e-12
    assert rel_err(model.psi(np.nextafter(1.8e-3, 0)), model.psi(1.8e-3)) < 1e-8


def test_segment_directions(model):
    assert model.segments[0].increasing
    assert not model.segments[1].increasing
    rho = np.linspace(0, 1.8e-3, 500, endpoint=False)
    assert np.all(np.diff(model.psi(rho)) > 0)
    rho = np.linspace(1.8e-3, 2.4e-3, 500)
    assert np.all(np.diff(model.psi(rho)) < 0)


def test_breakdown_error(model):
    with pytest.raises(BreakdownError):
        model.psi(2.4e-3 * (1 + 1e-9))
    with pytest.raises(ValueError):
        model.psi(-1e-9)


def test_p_max_saturates_at_peak(model):
    assert p_max(model, 1.0e-3) == pytest.approx(model.psi(1.0e-3), rel=1e-15)
    assert p_max(model, 1.8e-3) == model.psi(1.8e-3)
    assert p_max(model, 2.4e-3) == model.psi(1.8e-3)
    assert p_max(model, 1.0) == model.psi(1.8e-3)


def test_p_max_against_grid_scan(model):
    rho = np.linspace(0, model.rho_max_w, 100_001)
    assert rel_err(p_max(model, model.rho_max_w), model.psi(rho).max()) < 1e-10


@given(st.floats(0.0, 1.0))
def test_first_segment_inverse_round_trip(frac):
    m = table_i_model()
    target = frac * m.psi(1.8e-3)
    rho = invert_first_segment(m, target)
    assert 0 <= rho <= 1.8e-3
    assert m.psi(rho) == pytest.approx(target, rel=1e-9, abs=1e-20)


def test_invert_first_segment_range(model):
    with pytest.raises(RangeError):
        invert_first_segment(model, 1e-4)
    with pytest.raises(RangeError):
        invert_first_segment(model, model.psi(1e-3) * 1.01, rho_cap=1e-3)


@given(st.floats(1e-6, 2.4e-3), st.floats(0.0, 1.0))
def test_smallest_preimage_is_first_crossing(cap, frac):
    m = table_i_model()
    top = p_max(m, cap)
    target = frac * top
    rho = m.smallest_preimage(target, cap)
    assert rho <= cap * (1 + 1e-15)
    assert m.psi(rho) == pytest.approx(target, rel=1e-9, abs=1e-20)
    grid = np.linspace(0, rho, 200, endpoint=False)
    assert np.all(m.psi(grid) <= target * (1 + 1e-9))


def test_running_max_monotone(model):
    rho = np.linspace(0, model.rho_max_w, 1000)
    rm = model.running_max(rho)
    assert np.all(np.diff(rm) >= 0)
    assert np.all(rm >= model.psi(rho))


def test_model_file_round_trip_bit_exact(tmp_path, model):
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert back.parameters == model.parameters
    assert back.breakpoints == model.breakpoints
    assert back.rho_max == model.rho_max
    rho = np.linspace(0, model.rho_max_w, 101)
    assert np.array_equal(back.psi(rho), model.psi(rho))


def test_model_file_layout(model):
    data = json.loads(dumps_model(model))
    assert data["units"] == {"rho": "mW", "power": "W"}
    assert data["breakpoints"] == [1.8]
    assert data["rho_max"] == 2.4
    assert [tuple(s[k] for k in ("B", "alpha", "beta", "theta")) for s in data["segments"]] == TABLE_I_PARAMS


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["segments"][1].pop("theta"), "segments[1].theta"),
        (lambda d: d["segments"][0].__setitem__("alpha", "x"), "segments[0].alpha"),
        (lambda d: d["units"].__setitem__("rho", "kW"), "units.rho"),
        (lambda d: d.pop("rho_max"), "rho_max"),
        (lambda d: d["breakpoints"].append(2.0), "segments"),
    ],
)
def test_schema_errors_name_field(model, mutate, path):
    data = json.loads(dumps_model(model))
    mutate(data)
    with pytest.raises(SchemaError) as exc:
        loads_model(json.dumps(data))
    assert exc.value.path == path


def test_invalid_json():
    with pytest.raises(SchemaError):
        loads_model("{not json")


def test_invariant_alternation():
    with pytest.raises(InvariantError) as exc:
        EhModel.from_parameters([(7e-5, 1.4, 0.8, 2000.0), (9e-5, 1.8, 0.4, 900.0)], [1.8], 2.4)
    assert exc.value.invariant == "alternation"


def test_invariant_positivity():
    with pytest.raises(InvariantError) as exc:
        EhModel.from_parameters([(7e-5, -1.4, 0.8, 2000.0)], [], 2.4)
    assert exc.value.invariant == "positivity"


def test_invariant_continuity():
    m = table_i_model()
    s0, s1 = m.segments
    bad = LogisticSegment(s1.B, s1.alpha, s1.beta, s1.theta, s1.rho_lo, s1.rho_hi, s1.phi * 1.01)
    with pytest.raises(InvariantError) as exc:
        EhModel((s0, bad), m.rho_max)
    assert exc.value.invariant == "continuity"


def test_invariant_ordering():
    with pytest.raises(InvariantError):
        EhModel.from_parameters([(7e-5, 1.4, 0.8, 2000.0), (2e-5, 1.8, 0.4, 900.0)], [2.4], 2.4)


def test_watt_unit_model_equivalent():
    # the same curve expressed with rho in watts: theta scales by 1000^alpha
    params = [(B, a, b, t * 1000.0**a) for B, a, b, t in TABLE_I_PARAMS]
    mw = EhModel.from_parameters(params, [1.8e-3], 2.4e-3, rho_unit="W")
    ref = table_i_model()
    rho = np.linspace(0, 2.4e-3, 97)
    assert np.allclose(mw.psi(rho), ref.psi(rho), rtol=1e-11, atol=0)


def test_single_segment_model():
    m = EhModel.from_parameters([(1e-4, 1.5, 0.8, 100.0)], [], 5.0)
    assert m.n_segments == 1
    assert np.all(np.diff(m.psi(np.linspace(0, 5e-3, 50))) > 0)
    assert p_max(m, 5e-3) == m.psi(5e-3)
    assert not math.isnan(m.smallest_preimage(m.psi(1e-3)))


@st.composite
def random_models(draw):
    n = draw(st.integers(1, 3))
    edges = sorted(draw(st.lists(st.floats(0.1, 4.9), min_size=n - 1, max_size=n - 1, unique=True)))
    edges = [0.0, *edges, 5.0]
    if any(b - a < 0.05 for a, b in zip(edges, edges[1:])):
        edges = list(np.linspace(0.0, 5.0, n + 1))
    segs, phi = [], 0.0
    for k in range(n):
        a, b, t = draw(st.floats(0.5, 3.0)), draw(st.floats(0.2, 2.0)), draw(st.floats(1.0, 3000.0))
        B = draw(st.floats(1e-5, 1e-4)) if k % 2 == 0 else phi * draw(st.floats(0.1, 0.9))
        if k % 2 == 0:
            B = max(B, phi * 1.5)
        seg = LogisticSegment(B, a, b, t, edges[k], edges[k + 1], phi)
        segs.append(seg)
        phi = seg.right_value()
    return EhModel(tuple(segs), 5.0)


@given(random_models(), st.floats(0.05, 1.0))
def test_p_max_against_grid_scan_random_models(m, frac):
    cap = frac * m.rho_max_w
    # 1e5 steps; a peak at a breakpoint is only resolved to 1e-10 if the breakpoint is a node
    nodes = np.union1d(np.linspace(0.0, cap, 100_001), [b for b in m.breakpoints_w if b <= cap])
    pm = p_max(m, cap)
    assert rel_err(pm, m.psi(nodes).max()) < 1e-10
    assert m.psi(np.linspace(0.0, cap, 100_001)).max() <= pm * (1 + 1e-15)

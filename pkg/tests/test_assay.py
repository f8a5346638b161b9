"""Retention/permeability math: worked examples frozen from a 50-digit
mpmath evaluation, plus algebraic property tests."""

import math
from types import SimpleNamespace

import pytest
from hypothesis import given, strategies as st

from permlab.assay import (
    MEMBRANES,
    AssayGeometry,
    WellConcentrations,
    aggregate_repeats,
    effective_permeability,
    membrane_retention,
    well_result,
)
from permlab.errors import EmptyInputError, NonPenetrantError

GEOM = AssayGeometry()

# frozen outputs of an independent arbitrary-precision evaluation of the
# same formulas (50 decimal digits, rounded to nearest float)
MR_CASE = dict(donor_initial=1e-7, donor_final=6e-8, acceptor_final=1e-8)
MR_EXPECT = 0.2
PE_ZERO_RETENTION = dict(donor_initial=1e-7, donor_final=6e-8, acceptor_final=2e-8)
PE_ZERO_RETENTION_EXPECT = 0.0001414283703660035
FULL_WELL = dict(donor_initial=1e-7, donor_final=6e-8, acceptor_final=1e-8)
FULL_WELL_PE = 7.254449383589426e-05
FULL_WELL_LOGPE = -4.13939554514817


def rel_err(a, b):
    return abs(a - b) / abs(b)


def test_geometry_defaults():
    assert GEOM.filter_area == 0.3
    assert GEOM.donor_volume == 0.15
    assert GEOM.acceptor_volume == 0.3
    assert GEOM.incubation_time == 14400.0
    assert GEOM.steady_state_lag == 0.0
    assert GEOM.volume_ratio == 0.5


def test_geometry_validation():
    with pytest.raises(ValueError):
        AssayGeometry(filter_area=0.0)
    with pytest.raises(ValueError):
        AssayGeometry(donor_volume=-1.0)
    with pytest.raises(ValueError):
        AssayGeometry(incubation_time=100.0, steady_state_lag=100.0)
    with pytest.raises(ValueError):
        AssayGeometry(volume_ratio=0.7)  # inconsistent with the volumes
    g = AssayGeometry(donor_volume=0.4, acceptor_volume=0.2)
    assert g.volume_ratio == 2.0


def test_membrane_panel():
    assert MEMBRANES == ("BBB", "L", "H", "DOD", "PS", "PC")


def test_retention_worked_example():
    mr = membrane_retention(WellConcentrations(**MR_CASE), GEOM)
    assert rel_err(mr, MR_EXPECT) < 1e-9


def test_permeability_zero_retention_example():
    c = WellConcentrations(**PE_ZERO_RETENTION)
    mr = membrane_retention(c, GEOM)
    assert abs(mr) < 1e-12
    pe = effective_permeability(c, GEOM, mr)
    assert rel_err(pe, PE_ZERO_RETENTION_EXPECT) < 1e-9


def test_full_well_example():
    r = well_result(WellConcentrations(**FULL_WELL), GEOM)
    assert rel_err(r.membrane_retention, MR_EXPECT) < 1e-9
    assert rel_err(r.effective_permeability, FULL_WELL_PE) < 1e-9
    assert rel_err(r.log_pe, FULL_WELL_LOGPE) < 1e-9


def test_log_round_trip():
    r = well_result(WellConcentrations(**FULL_WELL), GEOM)
    assert abs(r.log_pe - math.log10(r.effective_permeability)) < 1e-12
    assert rel_err(10.0**r.log_pe, r.effective_permeability) < 1e-12


def test_non_penetrant_well():
    # donor kept everything: log argument <= 0
    c = WellConcentrations(donor_initial=1e-7, donor_final=1e-8, acceptor_final=0.0)
    mr = membrane_retention(c, GEOM)
    with pytest.raises(NonPenetrantError):
        effective_permeability(c, GEOM, mr)
    r = well_result(c, GEOM)
    assert r.effective_permeability is None and r.log_pe is None
    assert r.membrane_retention == pytest.approx(0.9)


def test_concentration_validation():
    with pytest.raises(ValueError):
        WellConcentrations(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        WellConcentrations(1.0, -0.1, 0.0)


conc = st.floats(min_value=1e-9, max_value=1e-4, allow_nan=False)
frac = st.floats(min_value=0.01, max_value=0.99)


@given(c0=conc, f1=frac, f2=frac, g1=frac, g2=frac)
def test_retention_superposition(c0, f1, f2, g1, g2):
    """1 - MR is linear in the two final concentrations."""
    cd1, ca1 = 0.4 * f1 * c0, 0.1 * g1 * c0
    cd2, ca2 = 0.4 * f2 * c0, 0.1 * g2 * c0
    d1 = 1.0 - membrane_retention(WellConcentrations(c0, cd1, ca1), GEOM)
    d2 = 1.0 - membrane_retention(WellConcentrations(c0, cd2, ca2), GEOM)
    d12 = 1.0 - membrane_retention(
        WellConcentrations(c0, cd1 + cd2, ca1 + ca2), GEOM
    )
    assert rel_err(d12, d1 + d2) < 1e-12


@given(c0=conc, f=frac, g=frac, scale=st.floats(min_value=1e-3, max_value=1e3))
def test_scaling_invariance(c0, f, g, scale):
    """MR and P_e only see concentration ratios."""
    cd, ca = 0.5 * f * c0, 0.2 * g * c0
    a = well_result(WellConcentrations(c0, cd, ca), GEOM)
    b = well_result(
        WellConcentrations(c0 * scale, cd * scale, ca * scale), GEOM
    )
    assert rel_err(1 - a.membrane_retention, 1 - b.membrane_retention) < 1e-12
    if a.effective_permeability is None:
        assert b.effective_permeability is None
    else:
        assert rel_err(a.effective_permeability, b.effective_permeability) < 1e-12


@given(
    mr=st.floats(min_value=0.0, max_value=0.8),
    u1=st.floats(min_value=0.05, max_value=0.95),
    u2=st.floats(min_value=0.05, max_value=0.95),
)
def test_permeability_monotone_in_donor_ratio(mr, u1, u2):
    """At fixed retention, less compound left in the donor means faster
    transport: P_e strictly increases as the donor ratio drops."""
    if abs(u1 - u2) < 1e-6:
        return
    lo = (1.0 - mr) * GEOM.volume_ratio / (1.0 + GEOM.volume_ratio)
    hi = 1.0 - mr
    r1 = lo + u1 * (hi - lo)
    r2 = lo + u2 * (hi - lo)
    c0 = 1e-7
    pe1 = effective_permeability(WellConcentrations(c0, r1 * c0, 0.0), GEOM, mr)
    pe2 = effective_permeability(WellConcentrations(c0, r2 * c0, 0.0), GEOM, mr)
    if r1 < r2:
        assert pe1 > pe2
    else:
        assert pe2 > pe1


@given(st.floats(min_value=0.05, max_value=0.9))
def test_longer_incubation_lower_rate(ratio):
    """Same end state over more time implies a smaller rate constant."""
    c = WellConcentrations(1e-7, ratio * 1e-7 * 0.5, 0.0)
    mr = membrane_retention(c, GEOM)
    slow = AssayGeometry(incubation_time=2 * GEOM.incubation_time)
    try:
        pe_fast = effective_permeability(c, GEOM, mr)
    except NonPenetrantError:
        return
    pe_slow = effective_permeability(c, slow, mr)
    assert rel_err(pe_slow, pe_fast / 2.0) < 1e-12


def _row(values):
    return SimpleNamespace(log_pe=values)


def test_aggregate_repeats_means():
    r1 = _row({m: -5.0 for m in MEMBRANES})
    r2 = _row({m: -4.0 for m in MEMBRANES})
    out = aggregate_repeats([r1, r2])
    assert all(out[m] == pytest.approx(-4.5) for m in MEMBRANES)


def test_aggregate_repeats_missing_propagates():
    r1 = _row({"BBB": -5.0, "L": None})
    r2 = _row({"BBB": None, "L": None})
    out = aggregate_repeats([r1, r2])
    assert out["BBB"] == pytest.approx(-5.0)  # one valid repeat survives
    assert out["L"] is None
    assert out["DOD"] is None  # absent membrane behaves like None


def test_aggregate_repeats_empty():
    with pytest.raises(EmptyInputError):
        aggregate_repeats([])

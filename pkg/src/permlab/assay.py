"""PAMPA assay math: membrane retention, effective permeability, repeat averaging.

All quantities are in cm/g/s/mol units: areas in cm^2, volumes in cm^3,
times in s, concentrations in mol/cm^3 and permeability in cm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyInputError, NonFiniteError, NonPenetrantError

# Membrane panel order used across the whole workbench: brain polar extract,
# liver polar extract, heart polar extract, dodecane, phosphatidylserine,
# phosphatidylcholine.
MEMBRANES = ("BBB", "L", "H", "DOD", "PS", "PC")

# log10 prefactor of the permeability formula, kept as the literal constant
# the formula is stated with (not ln 10).
_LOG10_FACTOR = 2.303


@dataclass(frozen=True)
class AssayGeometry:
    """Plate geometry and timing of one PAMPA setup.

    Defaults are the standard sandwich: 0.3 cm^2 filter, 0.15/0.3 cm^3
    donor/acceptor wells, 4 h incubation, no steady-state lag.
    """

    filter_area: float = 0.3
    donor_volume: float = 0.15
    acceptor_volume: float = 0.3
    incubation_time: float = 4.0 * 3600.0
    steady_state_lag: float = 0.0
    volume_ratio: float = field(default=None)  # donor_volume / acceptor_volume

    def __post_init__(self):
        if self.volume_ratio is None:
            object.__setattr__(
                self, "volume_ratio", self.donor_volume / self.acceptor_volume
            )
        if not (
            self.filter_area > 0
            and self.donor_volume > 0
            and self.acceptor_volume > 0
            and self.incubation_time > 0
            and self.steady_state_lag >= 0
            and self.volume_ratio > 0
        ):
            raise ValueError("geometry values must be positive")
        if not self.incubation_time > self.steady_state_lag:
            raise ValueError("incubation_time must exceed steady_state_lag")
        if abs(self.volume_ratio - self.donor_volume / self.acceptor_volume) > 1e-12:
            raise ValueError("volume_ratio inconsistent with donor/acceptor volumes")


@dataclass(frozen=True)
class WellConcentrations:
    """Donor/acceptor concentrations of one well at t=0 and t=end."""

    donor_initial: float
    donor_final: float
    acceptor_final: float

    def __post_init__(self):
        if not self.donor_initial > 0:
            raise ValueError("donor_initial must be > 0")
        if self.donor_final < 0 or self.acceptor_final < 0:
            raise ValueError("final concentrations must be >= 0")


@dataclass(frozen=True)
class PermeabilityResult:
    """Derived values of one well: retention, permeability and its log10.

    ``effective_permeability`` and ``log_pe`` are None for non-penetrant
    wells (transport below detection).
    """

    membrane_retention: float
    effective_permeability: float | None = None
    log_pe: float | None = None

    def __post_init__(self):
        if not self.membrane_retention < 1:
            raise ValueError("membrane retention must be < 1")
        if self.effective_permeability is not None:
            if not self.effective_permeability > 0:
                raise ValueError("effective permeability must be > 0 when present")
            if abs(self.log_pe - math.log10(self.effective_permeability)) > 1e-12:
                raise ValueError("log_pe inconsistent with effective_permeability")


def membrane_retention(c: WellConcentrations, g: AssayGeometry) -> float:
    """Fraction of compound trapped in the membrane by mass balance.

    MR = 1 - c_D(t)/C_D(0) - V_A*c_A(t) / (V_D*C_D(0)).
    """
    mr = (
        1.0
        - c.donor_final / c.donor_initial
        - (g.acceptor_volume * c.acceptor_final) / (g.donor_volume * c.donor_initial)
    )
    if not math.isfinite(mr):
        raise NonFiniteError("membrane retention is not finite (corrupt plate data)")
    return mr


def effective_permeability(
    c: WellConcentrations, g: AssayGeometry, mr: float
) -> float:
    """Effective permeability (cm/s) of one well.

    P_e = -2.303 / (A*(t - tau_ss)) * 1/(1 + r_v)
          * log10(-r_v + (1 + r_v)/(1 - MR) * c_D(t)/C_D(0))

    Raises NonPenetrantError when the log argument or the resulting P_e is
    not positive: the compound did not measurably cross the membrane and
    logPe is undefined.
    """
    if not mr < 1:
        raise ValueError("membrane retention must be < 1")
    rv = g.volume_ratio
    ratio = c.donor_final / c.donor_initial
    argument = -rv + (1.0 + rv) / (1.0 - mr) * ratio
    if not math.isfinite(argument):
        raise NonFiniteError("permeability log argument is not finite")
    if argument <= 0:
        raise NonPenetrantError(f"log argument {argument:g} <= 0")
    pe = (
        -_LOG10_FACTOR
        / (g.filter_area * (g.incubation_time - g.steady_state_lag))
        * (1.0 / (1.0 + rv))
        * math.log10(argument)
    )
    if not math.isfinite(pe):
        raise NonFiniteError("effective permeability is not finite")
    if pe <= 0:
        raise NonPenetrantError(f"computed permeability {pe:g} <= 0")
    return pe


def well_result(c: WellConcentrations, g: AssayGeometry) -> PermeabilityResult:
    """Full derived record of one well; non-penetrant wells carry no P_e."""
    mr = membrane_retention(c, g)
    try:
        pe = effective_permeability(c, g, mr)
    except NonPenetrantError:
        return PermeabilityResult(membrane_retention=mr)
    return PermeabilityResult(
        membrane_retention=mr, effective_permeability=pe, log_pe=math.log10(pe)
    )


def aggregate_repeats(rows) -> dict[str, float | None]:
    """Per-membrane arithmetic mean of logPe over the repeats of one compound.

    ``rows`` are plate records exposing a ``log_pe`` mapping from membrane
    name to logPe-or-None. A membrane with no valid repeat yields None;
    missingness propagates rather than poisoning the mean.
    """
    if not rows:
        raise EmptyInputError("no repeat rows to aggregate")
    means: dict[str, float | None] = {}
    for membrane in MEMBRANES:
        values = [
            r.log_pe[membrane]
            for r in rows
            if r.log_pe.get(membrane) is not None
        ]
        means[membrane] = sum(values) / len(values) if values else None
    return means

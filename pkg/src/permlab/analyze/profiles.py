"""Top/bottom permeability sets: membership, overlaps, property spreads."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from ..data.csvio import write_csv
from .svg import svg_boxes

DEFAULT_MEMBRANES = ("H", "BBB", "DOD")


@dataclass
class ProfileReport:
    membranes: tuple
    k: int
    high: dict  # membrane -> ranked compound ids (best first)
    low: dict  # membrane -> ranked compound ids (worst first)
    overlaps: dict  # set name -> {membrane tuple -> count}
    property_summary: dict  # (membrane, set, property) -> 5-number tuple
    missing_properties: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _five_number(values) -> tuple:
    arr = np.asarray(sorted(values), dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return (float(arr[0]), float(q1), float(med), float(q3), float(arr[-1]))


def top_bottom_profiles(
    mean_log_pe: dict,
    membranes=DEFAULT_MEMBRANES,
    k: int = 10,
    properties: dict | None = None,
    requested_properties=None,
) -> ProfileReport:
    """Rank compounds per membrane by mean logPe and profile the extremes.

    mean_log_pe maps compound id -> {membrane: value or None}. The high
    and low sets stay disjoint: with fewer than 2k valued compounds both
    shrink to half the available count (with a note). Property columns
    are {name: {compound id: value}}; requested names without a column are
    reported, not fatal.
    """
    membranes = tuple(membranes)
    properties = properties or {}
    if requested_properties is None:
        requested = sorted(properties)
    else:
        requested = list(requested_properties)
    missing = [name for name in requested if name not in properties]
    present = [name for name in requested if name in properties]

    high: dict = {}
    low: dict = {}
    notes: list = []
    for membrane in membranes:
        valued = [
            (cid, values[membrane])
            for cid, values in mean_log_pe.items()
            if values.get(membrane) is not None
        ]
        m = min(k, len(valued) // 2)
        if m < k:
            note = (
                f"{membrane}: only {len(valued)} compounds with values; "
                f"sets truncated to {m}"
            )
            notes.append(note)
            warnings.warn(note, RuntimeWarning, stacklevel=2)
        # ties in logPe resolve by compound id so extraction is stable
        ranked_high = sorted(valued, key=lambda item: (-item[1], item[0]))
        ranked_low = sorted(valued, key=lambda item: (item[1], item[0]))
        high[membrane] = [cid for cid, _ in ranked_high[:m]]
        low[membrane] = [cid for cid, _ in ranked_low[:m]]

    overlaps: dict = {"high": {}, "low": {}}
    for name, sets in (("high", high), ("low", low)):
        for r in (2, 3):
            for combo in combinations(membranes, r):
                common = set(sets[combo[0]])
                for membrane in combo[1:]:
                    common &= set(sets[membrane])
                overlaps[name][combo] = len(common)

    summary: dict = {}
    for membrane in membranes:
        for set_name, ids in (("high", high[membrane]), ("low", low[membrane])):
            for prop in present:
                column = properties[prop]
                values = [column[cid] for cid in ids if column.get(cid) is not None]
                key = (membrane, set_name, prop)
                summary[key] = _five_number(values) if values else None

    return ProfileReport(
        membranes=membranes,
        k=k,
        high=high,
        low=low,
        overlaps=overlaps,
        property_summary=summary,
        missing_properties=missing,
        notes=notes,
    )


PROFILES_HEADER = [
    "record",
    "membranes",
    "set",
    "rank",
    "compound_id",
    "property",
    "count",
    "min",
    "q1",
    "median",
    "q3",
    "max",
]


def write_profiles_csv(path, report: ProfileReport, mean_log_pe: dict | None = None) -> None:
    rows = []
    for membrane in report.membranes:
        for set_name, ids in (("high", report.high[membrane]), ("low", report.low[membrane])):
            for rank, cid in enumerate(ids, start=1):
                rows.append(
                    ["member", membrane, set_name, rank, cid, "", "", "", "", "", "", ""]
                )
    for set_name in ("high", "low"):
        for combo, count in report.overlaps[set_name].items():
            rows.append(
                ["overlap", "+".join(combo), set_name, "", "", "", count, "", "", "", "", ""]
            )
    for (membrane, set_name, prop), stats in report.property_summary.items():
        if stats is None:
            rows.append(
                ["property", membrane, set_name, "", "", prop, 0, "", "", "", "", ""]
            )
        else:
            vmin, q1, med, q3, vmax = stats
            n = ""
            rows.append(
                ["property", membrane, set_name, "", "", prop, n, vmin, q1, med, q3, vmax]
            )
    for prop in report.missing_properties:
        rows.append(["missing_property", "", "", "", "", prop, "", "", "", "", "", ""])
    write_csv(path, PROFILES_HEADER, rows)


def write_profiles_svg(path, report: ProfileReport, prop: str) -> None:
    groups = []
    for membrane in report.membranes:
        for set_name in ("high", "low"):
            stats = report.property_summary.get((membrane, set_name, prop))
            groups.append((f"{membrane} {set_name}", stats))
    Path(path).write_text(
        svg_boxes(groups, title=f"{prop} by permeability extreme", y_label=prop),
        encoding="utf-8",
    )

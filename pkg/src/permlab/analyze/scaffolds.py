"""Generic scaffold landscape of a desalted compound set."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..chem import canonical_smiles, generic_murcko_scaffold, parse_smiles
from ..data.csvio import write_csv
from ..errors import AcyclicError, PermlabError

ACYCLIC_CLASS = "Acyclic"


@dataclass
class ScaffoldReport:
    classes: dict  # scaffold smiles (or Acyclic) -> sorted compound ids
    failures: dict = field(default_factory=dict)  # compound id -> error text

    @property
    def n_unique(self) -> int:
        return len(self.classes)

    def repeated(self) -> list:
        """(scaffold, ids) rows for scaffolds shared by >= 2 compounds."""
        return [
            (scaffold, ids)
            for scaffold, ids in self.classes.items()
            if len(ids) > 1
        ]


def scaffold_report(smiles_by_id: dict) -> ScaffoldReport:
    """Generic framework per desalted molecule, deduplicated by canonical
    form; ring-free molecules pool into the Acyclic class. Parse failures
    are collected per compound, never fatal."""
    classes: dict = {}
    failures: dict = {}
    for cid in sorted(smiles_by_id):
        smiles = smiles_by_id[cid]
        try:
            mol = parse_smiles(smiles)
            try:
                key = canonical_smiles(generic_murcko_scaffold(mol))
            except AcyclicError:
                key = ACYCLIC_CLASS
        except PermlabError as exc:
            failures[cid] = f"{type(exc).__name__}: {exc}"
            continue
        classes.setdefault(key, []).append(cid)
    for ids in classes.values():
        ids.sort()
    return ScaffoldReport(classes=classes, failures=failures)


SCAFFOLDS_HEADER = ["scaffold", "count", "compound_ids"]


def write_scaffolds_csv(path, report: ScaffoldReport) -> None:
    ranked = sorted(
        report.classes.items(), key=lambda item: (-len(item[1]), item[0])
    )
    rows = [
        [scaffold, len(ids), ";".join(ids)] for scaffold, ids in ranked
    ]
    for cid, error in sorted(report.failures.items()):
        rows.append([f"FAILED:{cid}", 0, error])
    write_csv(path, SCAFFOLDS_HEADER, rows)

"""Design-based forest inventory estimation.

Load a directory of DataMart-style CSV files and run any of the estimators::

    import timberline
    db = timberline.load_database("./ct")
    table = timberline.tpa(db, grp_by=["OWNCD"], method="EMA", lambdas=[0.5])
    table.records()        # list of row dicts
    table.to_pandas()      # when pandas is installed
"""

from __future__ import annotations

import sys
from typing import Any, Dict, Iterator, List, Optional, Sequence

from ._core import (
    Database,
    DataError,
    NetworkError,
    UsageError,
    families,
    load_database,
    make_classes,
    panel_weights,
    run_cli,
)
from . import _core

__all__ = [
    "Database",
    "DataError",
    "NetworkError",
    "UsageError",
    "Table",
    "estimate",
    "families",
    "load_database",
    "main",
    "make_classes",
    "panel_weights",
    "run_cli",
]


class Table:
    """Estimator output held column-wise. Absent estimates are None."""

    def __init__(self, raw: Dict[str, Any]):
        self.columns: List[str] = list(raw["columns"])
        self.key_columns: List[str] = list(raw["keys"])
        self.data: Dict[str, list] = dict(raw["data"])
        self.diagnostics: List[str] = list(raw["diagnostics"])

    def __len__(self) -> int:
        return len(self.data[self.columns[0]]) if self.columns else 0

    def __getitem__(self, column: str) -> list:
        return self.data[column]

    def __iter__(self) -> Iterator[Dict[str, Any]]:
        return iter(self.records())

    def __repr__(self) -> str:
        return f"Table({len(self)} rows, columns={self.columns})"

    def records(self) -> List[Dict[str, Any]]:
        return [{c: self.data[c][i] for c in self.columns} for i in range(len(self))]

    def to_pandas(self):
        import pandas as pd

        return pd.DataFrame(self.data, columns=self.columns)


def estimate(db: Database, family: str, **options: Any) -> Table:
    """Runs one estimator. Options mirror the CLI flags in snake case:
    grp_by, by_plot, by_species, by_size_class, tree_domain, area_domain,
    method, lambdas, tidy, workers, totals, variance, year, evalids,
    polys (GeoJSON text), basis."""
    return Table(_core.estimate(db, family, **options))


def _bind(family: str):
    def run(db: Database, **options: Any) -> Table:
        return estimate(db, family, **options)

    run.__name__ = family
    run.__doc__ = f"Shorthand for estimate(db, {family!r}, ...)."
    return run


for _family in families():
    globals()[_family] = _bind(_family)
    __all__.append(_family)
del _family


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Command-line entry point; same subcommands as the native executable."""
    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code

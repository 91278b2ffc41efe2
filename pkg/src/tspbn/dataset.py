"""Loading, cleaning, discretizing and splitting categorical data tables.

A :class:`Schema` describes which columns of a delimited text file become
random variables and how each one is mapped onto a finite set of states.
Schemas are usually read from YAML with :func:`load_schema`; the format is
documented in the README.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import yaml


class DataError(ValueError):
    """Raised for malformed input data (bad header, unparseable cell...)."""


class SchemaError(ValueError):
    """Raised for an invalid schema declaration."""


MEDIAN = "median"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: str  # "categorical" or "continuous"
    states: tuple[str, ...] = ()
    bin_edges: tuple[float, ...] | str = ()
    missing_token: str = "?"
    column: str | None = None
    value_map: dict[str, str] = field(default_factory=dict)

    @property
    def source_column(self) -> str:
        return self.column or self.name

    @property
    def cardinality(self) -> int:
        if self.kind == "categorical":
            return len(self.states)
        if self.bin_edges == MEDIAN:
            return 2
        return len(self.bin_edges) + 1

    def validate(self):
        if self.kind == "categorical":
            if len(self.states) < 2:
                raise SchemaError(f"{self.name}: categorical variables need at least 2 states")
            if len(set(self.states)) != len(self.states):
                raise SchemaError(f"{self.name}: duplicate state labels")
            unknown = set(self.value_map.values()) - set(self.states)
            if unknown:
                raise SchemaError(f"{self.name}: value_map targets unknown states {sorted(unknown)}")
        elif self.kind == "continuous":
            if self.bin_edges == MEDIAN:
                return
            if isinstance(self.bin_edges, str) or not self.bin_edges:
                raise SchemaError(f"{self.name}: continuous variables need bin_edges or 'median'")
            if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
                raise SchemaError(f"{self.name}: bin_edges must be strictly ascending")
        else:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    variables: tuple[VariableSpec, ...]
    delimiter: str = ","
    header: bool = True
    columns: tuple[str, ...] = ()
    skip_lines: int = 0

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SchemaError("variable names must be unique")
        if not self.header and not self.columns:
            raise SchemaError("headerless sources must declare 'columns'")
        for v in self.variables:
            v.validate()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown variable {name!r}") from None


def schema_from_dict(doc: dict) -> Schema:
    source = doc.get("source", {})
    default_missing = str(doc.get("missing_token", "?"))
    variables = []
    for v in doc["variables"]:
        edges = v.get("bin_edges", ())
        if not isinstance(edges, str):
            edges = tuple(float(e) for e in edges)
        variables.append(VariableSpec(
            name=str(v["name"]),
            kind=v.get("kind", "categorical"),
            states=tuple(str(s) for s in v.get("states", ())),
            bin_edges=edges,
            missing_token=str(v.get("missing_token", default_missing)),
            column=v.get("column"),
            value_map={str(k): str(s) for k, s in v.get("value_map", {}).items()},
        ))
    return Schema(
        variables=tuple(variables),
        delimiter=source.get("delimiter", ","),
        header=bool(source.get("header", True)),
        columns=tuple(source.get("columns", ())),
        skip_lines=int(source.get("skip_lines", 0)),
    )


def load_schema(path) -> Schema:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    try:
        return schema_from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed schema ({exc})") from exc


@dataclass(frozen=True)
class RawTable:
    """Parsed cells before discretization; ``None`` marks a missing cell."""

    names: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __len__(self):
        return len(self.rows)


def _split_lines(fh, delimiter):
    if delimiter == "whitespace":
        for line in fh:
            yield line.split()
    else:
        yield from csv.reader(fh, delimiter=delimiter, skipinitialspace=True)


def load_csv(path, schema: Schema) -> RawTable:
    """Read the schema's variables from one or more delimited files.

    ``path`` may be a single path or a list of paths sharing one layout; rows
    are concatenated in order. Blank lines are ignored.
    """
    paths = [path] if isinstance(path, (str, os.PathLike)) else list(path)
    rows = []
    for p in paths:
        with open(p, newline="") as fh:
            for _ in range(schema.skip_lines):
                fh.readline()
            lines = _split_lines(fh, schema.delimiter)
            if schema.header:
                header = next(lines, None)
                if header is None:
                    raise DataError(f"{p}: missing header row")
                header = [h.strip() for h in header]
            else:
                header = list(schema.columns)
            try:
                cols = [header.index(v.source_column) for v in schema.variables]
            except ValueError:
                missing = [v.source_column for v in schema.variables if v.source_column not in header]
                raise DataError(f"{p}: header lacks columns {missing}") from None
            for lineno, cells in enumerate(lines, start=2 if schema.header else 1):
                if not cells or cells == [""]:
                    continue
                if len(cells) < len(header):
                    raise DataError(f"{p}:{lineno}: expected {len(header)} cells, got {len(cells)}")
                rows.append(tuple(_parse_cell(cells[c].strip(), v, p, lineno)
                                  for c, v in zip(cols, schema.variables)))
    return RawTable(schema.names, tuple(rows))


def _parse_cell(text, spec: VariableSpec, path, lineno):
    if text == spec.missing_token:
        return None
    if spec.kind == "categorical":
        return text
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{path}:{lineno}: {spec.name}: cannot parse {text!r} as a number") from None


def drop_missing(raw: RawTable) -> RawTable:
    return RawTable(raw.names, tuple(r for r in raw.rows if None not in r))


@dataclass(frozen=True, eq=False)
class DiscreteTable:
    """Fully observed table of state indices, one column per variable."""

    data: np.ndarray
    cardinalities: tuple[int, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64).reshape(-1, len(self.cardinalities))
        if data.size and (data.min() < 0 or np.any(data >= np.asarray(self.cardinalities))):
            raise DataError("state index out of range for its column")
        if any(r < 1 for r in self.cardinalities):
            raise DataError("cardinalities must be positive")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "cardinalities", tuple(int(r) for r in self.cardinalities))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"X{i}" for i in range(len(self.cardinalities))))

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_vars(self) -> int:
        return len(self.cardinalities)

    def __len__(self):
        return self.n_rows

    def take(self, rows) -> "DiscreteTable":
        return DiscreteTable(self.data[rows], self.cardinalities, self.names)


def resolve_bin_edges(raw: RawTable, schema: Schema) -> Schema:
    """Replace ``bin_edges: median`` declarations with the column median of ``raw``."""
    variables = []
    for j, v in enumerate(schema.variables):
        if v.kind == "continuous" and v.bin_edges == MEDIAN:
            values = np.array([r[j] for r in raw.rows if r[j] is not None], dtype=float)
            if values.size == 0:
                raise DataError(f"{v.name}: cannot take the median of an empty column")
            v = replace(v, bin_edges=(float(np.median(values)),))
        variables.append(v)
    return replace(schema, variables=tuple(variables))


def discretize(raw: RawTable, schema: Schema) -> DiscreteTable:
    """Map parsed cells to state indices.

    Continuous values use rightmost-closed bins ``(e_{i-1}, e_i]``: ``v`` goes
    to the number of edges strictly below it, so a value equal to an edge
    stays in the lower bin.
    """
    schema = resolve_bin_edges(raw, schema)
    m, n = len(raw.rows), len(schema.variables)
    out = np.zeros((m, n), dtype=np.int64)
    for j, v in enumerate(schema.variables):
        column = [r[j] for r in raw.rows]
        if any(c is None for c in column):
            raise DataError(f"{v.name}: missing cells must be dropped before discretizing")
        if v.kind == "categorical":
            lookup = {s: i for i, s in enumerate(v.states)}
            for i, c in enumerate(column):
                label = v.value_map.get(c, c)
                try:
                    out[i, j] = lookup[label]
                except KeyError:
                    raise DataError(f"{v.name}: value {c!r} is not a declared state") from None
        else:
            out[:, j] = np.searchsorted(np.asarray(v.bin_edges), np.asarray(column, dtype=float), side="left")
    return DiscreteTable(out, schema.cardinalities, schema.names)


@dataclass(frozen=True)
class SplitSpec:
    test_count: int
    seed: int = 0
    method: str = "tail"


def split(table: DiscreteTable, spec: SplitSpec) -> tuple[DiscreteTable, DiscreteTable]:
    m = table.n_rows
    if not 0 < spec.test_count < m:
        raise DataError(f"test_count must lie in (0, {m}), got {spec.test_count}")
    if spec.method == "tail":
        order = np.arange(m)
    elif spec.method == "shuffled":
        order = np.random.default_rng(spec.seed).permutation(m)
    else:
        raise DataError(f"unknown split method {spec.method!r}")
    cut = m - spec.test_count
    return table.take(order[:cut]), table.take(order[cut:])


def write_table_csv(table: DiscreteTable, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.names)
        w.writerows(table.data.tolist())


def read_table_csv(path, cardinalities: Sequence[int]) -> DiscreteTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = tuple(next(reader))
        rows = [[int(c) for c in r] for r in reader if r]
    if len(names) != len(cardinalities):
        raise DataError(f"{path}: {len(names)} columns but {len(cardinalities)} cardinalities")
    data = np.array(rows, dtype=np.int64).reshape(len(rows), len(names))
    return DiscreteTable(data, tuple(cardinalities), names)

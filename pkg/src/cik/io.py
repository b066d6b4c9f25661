"""CSV and JSON persistence for matrices, model specs, configs and reports.

CSV files are comma separated with an optional single header row (detected
when the first row does not parse as numbers). Reals are written with 17
significant digits so that a write/read round trip is bit-exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """JSON content that does not match the expected structure; messages name the JSON path."""


class ParseError(ValueError):
    pass


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class MatrixFile:
    path: str
    n_rows: int
    n_cols: int
    header: tuple | None


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]


def read_matrix_file(path, expected_support=None):
    """Parse a numeric CSV; returns ``(matrix, MatrixFile)``.

    ``expected_support`` is an iterable of allowed values (e.g. (0, 1)) or
    None for any finite real.
    """
    rows = _rows(path)
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = None
    if not all(_is_number(s.strip()) for s in rows[0]):
        header = tuple(s.strip() for s in rows[0])
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    first = 2 if header else 1
    out = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"{path}: row {r + first} has {len(row)} columns, expected {width}"
            )
        for col, cell in enumerate(row):
            try:
                v = float(cell.strip())
            except ValueError:
                raise ParseError(
                    f"{path}: row {r + first}, column {col + 1}: cannot parse {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: row {r + first}, column {col + 1}: non-finite value")
            out[r, col] = v
    if expected_support is not None:
        allowed = np.asarray(sorted(expected_support), dtype=float)
        bad = ~np.isin(out, allowed)
        if bad.any():
            r, col = np.argwhere(bad)[0]
            raise SupportError(
                f"{path}: row {r + first}, column {col + 1}: value {fmt(out[r, col])} "
                f"outside support {{{', '.join(fmt(a) for a in allowed)}}}"
            )
    return out, MatrixFile(str(path), out.shape[0], out.shape[1], header)


def read_matrix(path, expected_support=None):
    return read_matrix_file(path, expected_support)[0]


def read_vector(path):
    m = read_matrix(path)
    if m.shape[1] == 1:
        return m[:, 0]
    if m.shape[0] == 1:
        return m[0]
    raise ParseError(f"{path}: expected a single row or column, got {m.shape}")


def write_matrix(path, matrix, header=None):
    matrix = np.atleast_2d(np.asarray(matrix))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in matrix:
            w.writerow([fmt(v) for v in row])


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}") from e


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def check_fields(d, required, optional=(), path="$"):
    """Raise SchemaError for a non-object, unknown keys or missing keys."""
    if not isinstance(d, dict):
        raise SchemaError(f"{path}: expected an object")
    unknown = sorted(set(d) - set(required) - set(optional))
    if unknown:
        raise SchemaError(f"{path}: unknown field(s) {', '.join(f'{path}.{u}' for u in unknown)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise SchemaError(f"{path}: missing field(s) {', '.join(f'{path}.{m}' for m in missing)}")


def read_model(path):
    from cik.models import model_from_dict

    return model_from_dict(read_json(path), path="$")


def write_model(path, spec):
    from cik.models import model_to_dict

    write_json(path, model_to_dict(spec))


_GIBBS_FIELDS = ("burn_in", "thin", "n_draws", "mh_step")


def gibbs_config_from_dict(d, path="$"):
    from cik.gibbs import GibbsConfig

    check_fields(d, (), _GIBBS_FIELDS, path)
    for k in ("burn_in", "thin", "n_draws"):
        if k in d and (not isinstance(d[k], int) or isinstance(d[k], bool)):
            raise SchemaError(f"{path}.{k}: expected an integer")
    try:
        return GibbsConfig(**d)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{path}: {e}") from e


def read_gibbs_config(path):
    return gibbs_config_from_dict(read_json(path))


def write_gibbs_config(path, config):
    write_json(path, config.to_dict())


def read_config(path):
    from cik.experiments import ExperimentConfig

    return ExperimentConfig.from_dict(read_json(path), path="$")


def write_config(path, config):
    write_json(path, config.to_dict())


REPORT_COLUMNS = ("u", "replicate", "knockoff_id", "power", "fdr")
SUMMARY_COLUMNS = ("u", "mean_power", "mean_fdr", "se_power", "se_fdr")


def _write_table(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])


def _read_table(path, columns, ints=()):
    rows = _rows(path)
    if not rows or tuple(s.strip() for s in rows[0]) != tuple(columns):
        raise ParseError(f"{path}: expected header {','.join(columns)}")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(columns):
            raise ParseError(f"{path}: row {n} has {len(row)} columns, expected {len(columns)}")
        rec = {}
        for c, cell in zip(columns, row):
            try:
                rec[c] = int(cell) if c in ints else float(cell)
            except ValueError:
                raise ParseError(f"{path}: row {n}, column {c}: cannot parse {cell!r}") from None
        out.append(rec)
    return out


def write_report(report, path):
    """Per-(u, replicate, knockoff) rows; accepts an ExperimentReport or a list of dicts."""
    rows = getattr(report, "rows", report)
    _write_table(path, REPORT_COLUMNS, rows)


def read_report(path):
    return _read_table(path, REPORT_COLUMNS, ints=("replicate", "knockoff_id"))


def write_summary(report, path):
    rows = getattr(report, "records", report)
    _write_table(path, SUMMARY_COLUMNS, rows)


def read_summary(path):
    return _read_table(path, SUMMARY_COLUMNS)


def summary_path(report_path):
    p = Path(report_path)
    return p.with_name(p.stem + "_summary" + p.suffix)

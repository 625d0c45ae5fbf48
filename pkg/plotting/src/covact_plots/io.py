"""CSV readers for the experiment output schemas.

The plotting package consumes only the public CSV files; column names and
order are part of the producer's contract and are validated here so that a
schema drift fails loudly.
"""

import csv

PHASE_COLUMNS = (
    "B", "N", "L", "K", "trials", "holds_count", "fails_count",
    "ambiguous_count", "l2_over_n", "k_over_n",
)
ROC_COLUMNS = ("source", "M", "threshold", "pm", "pf", "trials", "nonconverged")
LEMMA3_COLUMNS = ("B", "cell", "ring", "contribution", "cumulative_sum")


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


def _read_rows(path, columns, converters):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != columns:
            raise SchemaError(
                f"{path}: expected columns {columns}, found {tuple(header)}"
            )
        rows = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise SchemaError(f"{path}:{line}: wrong field count")
            try:
                rows.append(tuple(conv(v) for conv, v in zip(converters, row)))
            except ValueError as exc:
                raise SchemaError(f"{path}:{line}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_phase_diagram(path):
    conv = (int, int, int, int, int, int, int, int, float, float)
    return _read_rows(path, PHASE_COLUMNS, conv)


def read_roc(path):
    conv = (str, int, float, float, float, int, int)
    return _read_rows(path, ROC_COLUMNS, conv)


def read_lemma3(path):
    conv = (int, int, int, float, float)
    return _read_rows(path, LEMMA3_COLUMNS, conv)

"""Plain-text writers. Floats are written with 17 significant digits so that
outputs round-trip and repeated runs can be compared byte for byte."""
import csv
import os

import numpy as np


def cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer, str)):
        return str(value)
    return f"{float(value):.17g}"


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(v) for v in row])


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def energy_rows(records):
    return [r.row() for r in records]


ENERGY_HEADER = ("t", "kinetic", "pd", "work", "epd")
SNAPSHOT_HEADER = ("x", "y", "u", "v", "interior")
UNSTABLE_HEADER = ("t", "eps", "x", "y", "P")


def snapshot_rows(state, grid):
    return [(p[0], p[1], u, v, bool(i))
            for p, u, v, i in zip(grid.positions, state.u, state.v, grid.interior)]


def eps_tag(eps):
    return f"{eps:.6g}"

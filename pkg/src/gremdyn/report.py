"""Delimited and JSON emission for every experiment artifact.

CSV schemas are part of the tool's interface and stay fixed:

* extreme records: rank,sigma1,sigma2,xi_total,xi1,xi2,u_inv,w
* bins:            j,count,bin_max,delta,eps   (empty bins leave bin_max blank)
* visits:          rank,visit_index,psi,upsilon,gamma_vis
* first-passage:   n,q,lambda,gf_exact,gf_formula,rel_err
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def _native(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_native(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_native(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


RECORD_HEADER = ("rank", "sigma1", "sigma2", "xi_total", "xi1", "xi2",
                 "u_inv", "w")


def record_rows(records):
    return [(r.rank, r.sigma1, r.sigma2, repr(r.xi_total), repr(r.xi1),
             repr(r.xi2), repr(r.u_inv), repr(r.w)) for r in records]


def write_records_csv(path: Path, records) -> None:
    write_csv(path, RECORD_HEADER, record_rows(records))


def records_to_json(records):
    return [
        {"rank": r.rank, "sigma1": r.sigma1, "sigma2": r.sigma2,
         "xi_total": r.xi_total, "xi1": r.xi1, "xi2": r.xi2,
         "u_inv": r.u_inv, "w": r.w}
        for r in records
    ]


BIN_HEADER = ("j", "count", "bin_max", "delta", "eps")


def write_bins_csv(path: Path, bins) -> None:
    rows = [(b.j, b.count, None if b.bin_max is None else repr(b.bin_max),
             b.delta, b.eps) for b in bins]
    write_csv(path, BIN_HEADER, rows)


VISIT_HEADER = ("rank", "visit_index", "psi", "upsilon", "gamma_vis")


def visit_rows(label, psi, ups):
    return [(label, i, repr(float(p)), repr(float(u)), repr(float(p - u)))
            for i, (p, u) in enumerate(zip(psi, ups))]


def write_visits_csv(path: Path, per_class) -> None:
    """per_class: iterable of (label, psi array, upsilon array)."""
    rows = []
    for label, psi, ups in per_class:
        rows.extend(visit_rows(label, psi, ups))
    write_csv(path, VISIT_HEADER, rows)


GF_HEADER = ("n", "q", "lambda", "gf_exact", "gf_formula", "rel_err")

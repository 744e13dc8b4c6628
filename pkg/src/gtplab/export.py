"""Lossless text serialization of solver output.

Coefficient files are CSV with a ``# precision=<bits>`` comment line, a
header row (index or j,k then re, im) and decimal strings carrying every
bit of the midpoint.
"""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

from .errors import ConfigurationError
from .series import BiSeries, UniSeries, acb_str, to_acb, workprec
from .solver import GtpSolution, ProblemParams

FORMAT_VERSION = 1


def _read_rows(path: Path):
    prec = None
    rows = []
    with open(path, newline="") as fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "precision":
                    prec = int(val)
                continue
            lines.append(line)
        reader = csv.reader(lines)
        header = next(reader, None)
        if header is None:
            raise ConfigurationError(f"{path}: empty coefficient file")
        for row in reader:
            if row:
                rows.append(row)
    if prec is None:
        raise ConfigurationError(f"{path}: missing '# precision=' header")
    return prec, header, rows


def write_uni(path, series: UniSeries, prec: int, skip_zero: bool = False) -> Path:
    path = Path(path)
    with workprec(prec), open(path, "w", newline="") as fh:
        fh.write(f"# precision={prec}\n")
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, c in enumerate(series.coeffs):
            if skip_zero and c.is_zero():
                continue
            w.writerow([i, *acb_str(c)])
    return path


def read_uni(path, parity: str = "none") -> UniSeries:
    prec, header, rows = _read_rows(Path(path))
    if header[:3] != ["index", "re", "im"]:
        raise ConfigurationError(f"{path}: expected columns index,re,im")
    with workprec(prec):
        n = max((int(r[0]) for r in rows), default=0)
        vals = [0] * (n + 1)
        for r in rows:
            vals[int(r[0])] = to_acb((r[1], r[2]))
        return UniSeries.from_values(vals, prec, parity=parity)


def write_bi(path, series: BiSeries, prec: int) -> Path:
    path = Path(path)
    with workprec(prec), open(path, "w", newline="") as fh:
        fh.write(f"# precision={prec}\n")
        w = csv.writer(fh)
        w.writerow(["j", "k", "re", "im"])
        for (j, k), c in series.items():
            w.writerow([j, k, *acb_str(c)])
    return path


def read_bi(path, order: int | None = None) -> BiSeries:
    prec, header, rows = _read_rows(Path(path))
    if header[:4] != ["j", "k", "re", "im"]:
        raise ConfigurationError(f"{path}: expected columns j,k,re,im")
    with workprec(prec):
        table = {(int(r[0]), int(r[1])): to_acb((r[2], r[3])) for r in rows}
        n = max((j + k for j, k in table), default=0) if order is None else order
        return BiSeries.from_dict(table, n, prec)


def params_record(P: ProblemParams) -> dict:
    with workprec(P.precision):
        return {
            "precision": P.precision,
            "max_order": P.max_order,
            "rotation": str(Fraction(P.rotation)),
            "resonance_threshold": P.resonance_threshold,
        }


def save_solution(sol: GtpSolution, out, partial: bool = False) -> dict:
    """Write q_even.csv, q_odd.csv, b.csv, phi.csv and solution.json into ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    P = sol.params
    files = {
        "q_even": write_uni(out / "q_even.csv", sol.q_even, P.precision),
        "q_odd": write_uni(out / "q_odd.csv", P.q_odd, P.precision),
        "b": write_uni(out / "b.csv", P.b, P.precision),
        "phi": write_bi(out / "phi.csv", sol.phi, P.precision),
    }
    meta = {
        "format": FORMAT_VERSION,
        "order": sol.order,
        "partial": partial,
        "min_denominator": sol.min_denominator,
        "params": params_record(P),
        "files": {k: v.name for k, v in files.items()},
    }
    (out / "solution.json").write_text(json.dumps(meta, indent=2))
    return meta


def load_solution(path) -> GtpSolution:
    """Inverse of save_solution; ``path`` is the output directory or its solution.json."""
    path = Path(path)
    if path.is_dir():
        path = path / "solution.json"
    try:
        meta = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read solution file {path}: {e}") from e
    root = path.parent
    pr = meta["params"]
    files = meta["files"]
    b = read_uni(root / files["b"])
    q_odd = read_uni(root / files["q_odd"], parity="odd")
    q_even = read_uni(root / files["q_even"], parity="even")
    phi = read_bi(root / files["phi"], meta["order"])
    prec = int(pr["precision"])
    for s in (b, q_odd, q_even):
        if s.prec != prec:
            raise ConfigurationError("precision header differs from solution.json")
    P = ProblemParams(b, q_odd, Fraction(pr["rotation"]), prec, int(pr["max_order"]),
                      pr.get("resonance_threshold"))
    return GtpSolution(P, q_even, phi, [], int(meta["order"]), float(meta["min_denominator"]))

# exports.py - PA Forge
# CSV in/out: compression-ratio curves, key-rate tables, bench reports.
# Headers are schema-stable; downstream plotting reads them by name.

from __future__ import annotations

import csv
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, TextIO, Union

from errors import ConfigurationError
from params import KeyRateRow, RateCurvePoint

CURVE_HEADERS = ["distance_km", "r_pa", "sifted_rate_bps"]
KEYRATE_HEADERS = ["distance_km", "k", "N_bits", "final_rate_bps"]
BENCH_HEADERS = ["gamma", "k", "radix", "threads", "input_bits", "wall_time_s", "throughput_mbps"]


def _num(text: str) -> float:
    return float((text or "").strip())


def _fmt(x: float) -> str:
    # 10.0 -> "10", 0.25 -> "0.25"
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def load_rate_curve(path: Union[str, Path]) -> List[RateCurvePoint]:
    """
    Reads a `distance_km,r_pa,sifted_rate_bps` CSV.
    Raises ConfigurationError for a missing header, bad number, r_pa > 1 or
    distances that do not ascend.
    """
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        fields = [h.strip() for h in (reader.fieldnames or [])]
        missing = [h for h in CURVE_HEADERS if h not in fields]
        if missing:
            raise ConfigurationError(f"{path}: missing column(s) {', '.join(missing)}")
        points: List[RateCurvePoint] = []
        for lineno, row in enumerate(reader, start=2):
            row = {(k or "").strip(): v for k, v in row.items()}
            try:
                pt = RateCurvePoint(
                    distance=_num(row["distance_km"]),
                    r_pa=_num(row["r_pa"]),
                    sifted_rate=_num(row["sifted_rate_bps"]),
                )
            except (TypeError, ValueError) as e:
                # ConfigurationError is a ValueError too; keep its message.
                raise ConfigurationError(f"{path}:{lineno}: {e}") from e
            if points and pt.distance <= points[-1].distance:
                raise ConfigurationError(f"{path}:{lineno}: distances must ascend")
            points.append(pt)
    if not points:
        raise ConfigurationError(f"{path}: no data rows")
    return points


def _write_keyrate(f: TextIO, rows: Iterable[KeyRateRow]) -> int:
    w = csv.writer(f)
    w.writerow(KEYRATE_HEADERS)
    n = 0
    for r in rows:
        w.writerow([_fmt(r.distance), r.k, r.n_bits, _fmt(r.final_rate)])
        n += 1
    return n


def export_keyrate_csv(rows: Iterable[KeyRateRow], path: Optional[Union[str, Path]] = None) -> Dict:
    """
    Writes the key-rate table to `path`, or stdout when no path is given.
    Returns {path, rows}.
    """
    if path is None:
        return {"path": "-", "rows": _write_keyrate(sys.stdout, rows)}
    with open(path, "w", newline="", encoding="utf-8") as f:
        n = _write_keyrate(f, rows)
    return {"path": str(path), "rows": n}


def _write_bench(f: TextIO, reports) -> int:
    w = csv.writer(f)
    w.writerow(BENCH_HEADERS)
    n = 0
    for rep in reports:
        w.writerow([
            rep.gamma, rep.k, rep.radix, rep.threads, rep.input_bits,
            f"{rep.wall_time:.6f}", f"{rep.throughput:.3f}",
        ])
        n += 1
    return n


def export_bench_csv(reports, path: Optional[Union[str, Path]] = None) -> Dict:
    """Bench rows to `path`, or stdout when no path is given. Returns {path, rows}."""
    if path is None:
        n = _write_bench(sys.stdout, reports)
        return {"path": "-", "rows": n}
    with open(path, "w", newline="", encoding="utf-8") as f:
        n = _write_bench(f, reports)
    return {"path": str(path), "rows": n}

"""File persistence: atomic writes and the CSV layouts shared by the CLI."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

from . import __version__

GRID_COLUMNS = [
    "code", "eta_r", "l0_km", "hops", "trials", "seed",
    "p_primal", "p_dual", "eta_eff", "stderr",
]
ALPHA_COLUMNS = [
    "code", "eta_r", "l0_km", "alpha_eff_db_per_km", "log10_prefactor", "rms_residual",
]
OPT_COLUMNS = ["distance_km", "n_opt", "l0_km", "eta_eff", "cost"]

INT_COLUMNS = {"hops", "trials", "seed", "n_opt"}
STR_COLUMNS = {"code"}


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the usual umask-derived mode instead
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_value(column: str, text: str):
    if column in STR_COLUMNS:
        return text
    if column in INT_COLUMNS:
        return int(text)
    return float(text)


def render_csv(columns: list[str], rows: list[dict], meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# foliated-link {__version__}\n")
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(path, columns: list[str], rows: list[dict], meta: dict | None = None) -> None:
    atomic_write_text(path, render_csv(columns, rows, meta))


def read_csv(path) -> tuple[list[dict], dict]:
    """Return ``(rows, meta)``; ``meta`` collects ``# key=value`` comment lines."""
    meta: dict[str, str] = {}
    body = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if "=" in text:
                    key, _, value = text.partition("=")
                    meta[key.strip()] = value.strip()
            elif line.strip():
                body.append(line)
    reader = csv.DictReader(body)
    rows = [{k: parse_value(k, v) for k, v in row.items()} for row in reader]
    return rows, meta

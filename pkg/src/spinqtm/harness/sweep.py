"""Grid evaluation and CSV/JSON output."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .. import __version__
from ..cycle import FixedPointError, assemble_limit_cycle, make_channel, spectral_gap
from ..lowtemp import LowTempParams, conservation_defect, f2_lowtemp, lowtemp_thermo
from ..mixing import zero_temperature_channel
from ..spinchain import ChainSpec, SizeError
from ..thermo import (
    DEGENERATE,
    RegimeError,
    extract_ansatz,
    limit_cycle_thermo,
    predicted_regime,
)
from .config import SweepConfig, spec_hash

__all__ = [
    "COLUMNS",
    "OK",
    "FLAGGED",
    "EXIT_OK",
    "EXIT_FLAGGED",
    "EXIT_FAILED",
    "SweepResult",
    "evaluate_point",
    "run_sweep",
    "output_dir",
    "format_value",
]

# frozen column order; see docs/schema.md
COLUMNS = (
    "index", "status", "model", "N", "E1", "EN", "ratio", "beta1", "beta2", "tau1", "tau2", "mode",
    "Q_H", "Q_C", "W", "clausius", "first_law", "regime", "predicted_regime",
    "g", "f4", "f_cross", "fp_residual", "loop_residual",
    "f2", "conservation", "lt_Q_H", "lt_Q_C",
    "gap", "gap0", "message",
)

OK, FLAGGED = "ok", "flagged"
EXIT_OK, EXIT_FAILED, EXIT_FLAGGED = 0, 1, 3
LAW_TOL = 1e-10


class SweepResult(NamedTuple):
    rows: list
    table: Path
    sidecar: Path | None
    flagged: int

    @property
    def exit_code(self) -> int:
        return EXIT_FLAGGED if self.flagged else EXIT_OK


def output_dir(cli_value=None) -> Path:
    """--out beats $SPINQTM_OUT beats the working directory."""
    if cli_value:
        return Path(cli_value)
    return Path(os.environ.get("SPINQTM_OUT", "."))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        # repr is the shortest round-trip form
        return repr(float(v))
    return str(v)


def _ends(spec):
    if isinstance(spec, ChainSpec):
        return spec.N, spec.E1, spec.EN
    return 2, spec.E1, spec.E2


def evaluate_point(cfg: SweepConfig, index: int, point: dict) -> dict:
    """All requested quantities at one grid point; failures end up in ``status``."""
    spec, config = cfg.resolve(point)
    N, E1, EN = _ends(spec)
    row = dict.fromkeys(COLUMNS)
    row.update(index=index, status=OK, model=cfg.model, N=N, E1=E1, EN=EN,
               ratio=EN / E1 if E1 else None, beta1=config.beta1, beta2=config.beta2,
               tau1=config.tau1, tau2=config.tau2, mode=config.mode)
    notes = []
    want = set(cfg.analyses)
    if want & {"thermo", "regime", "ansatz"}:
        try:
            lc = assemble_limit_cycle(spec, config, tol=cfg.tol, cross_check=False)
            th = limit_cycle_thermo(lc)
            scale = max(abs(E1), abs(EN), 1.0)
            first = abs(th.Q_H_star + th.Q_C_star + th.W_star)
            if th.work_audit is not None:
                first = max(first, abs(th.work_audit - th.W_star))
            row.update(Q_H=th.Q_H_star, Q_C=th.Q_C_star, W=th.W_star, clausius=th.clausius_star,
                       first_law=first, fp_residual=lc.residual, loop_residual=lc.loop_residual)
            if "regime" in want or "thermo" in want:
                row["regime"] = th.regime
            if first > LAW_TOL * scale:
                notes.append(f"first law defect {first:.2e}")
            if th.clausius_star < -LAW_TOL:
                notes.append(f"clausius sum {th.clausius_star:.2e}")
            if "ansatz" in want:
                an = extract_ansatz(th, E1, EN, config.beta1, config.beta2)
                row.update(g=an.g_value, f4=an.f4_value if an.valid else None, f_cross=an.cross_check)
        except (FixedPointError, SizeError, RegimeError) as exc:
            notes.append(f"{type(exc).__name__}: {exc}")
    if "regime" in want and isinstance(spec, ChainSpec) and E1 != 0 and config.beta1 <= config.beta2:
        row["predicted_regime"] = predicted_regime(E1, EN, config.beta1, config.beta2)
    if "lowtemp" in want:
        r = f2_lowtemp(spec, config.tau1)
        cons = conservation_defect(spec, config.tau1)
        row.update(f2=r.f2, conservation=cons)
        if not (-1e-12 <= r.f2 <= 1 + 1e-12):
            notes.append(f"f2 outside [0, 1]: {r.f2}")
        if cons > LAW_TOL:
            notes.append(f"conservation defect {cons:.2e}")
        if E1 > 0 and EN > 0:
            lt = lowtemp_thermo(spec, config.tau1, LowTempParams.from_betas(E1, EN, config.beta1, config.beta2), r.f2)
            row.update(lt_Q_H=lt.Q_H_star, lt_Q_C=lt.Q_C_star)
    if "mixing" in want:
        try:
            row["gap"] = spectral_gap(make_channel(spec, config))
            if isinstance(spec, ChainSpec) and E1 > 0 and EN > 0:
                row["gap0"] = spectral_gap(zero_temperature_channel(spec, config))
        except SizeError as exc:
            notes.append(f"SizeError: {exc}")
    if notes:
        row["status"] = FLAGGED
        row["message"] = "; ".join(notes)
    elif row["regime"] == DEGENERATE:
        row["message"] = "heat or work within the zero tolerance"
    return row


def _job(args):
    cfg, index, point = args
    return evaluate_point(cfg, index, point)


def _sidecar(cfg: SweepConfig, rows: list, table: Path) -> dict:
    status = {}
    for r in rows:
        status[r["status"]] = status.get(r["status"], 0) + 1
    return {
        "tool": "spinqtm",
        "version": __version__,
        "name": cfg.name,
        "table": table.name,
        "columns": list(COLUMNS),
        "spec_hash": spec_hash(cfg.spec),
        "spec": cfg.spec.to_dict(),
        "config": cfg.config.to_dict(),
        "axes": [{"fields": list(a.fields), "size": len(a)} for a in cfg.axes],
        "analyses": list(cfg.analyses),
        "seed": cfg.seed,
        "tol": cfg.tol,
        "rows": len(rows),
        "status_counts": dict(sorted(status.items())),
    }


def run_sweep(cfg: SweepConfig, out_dir=None, jobs: int = 1) -> SweepResult:
    """Evaluate every grid point and write the table (plus sidecar).

    Rows come back in grid order whatever the number of worker processes, so
    repeated runs of the same config give byte-identical files.
    """
    out = output_dir(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, k, p) for k, p in enumerate(cfg.points())]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_job(t) for t in tasks]
    table = out / cfg.table
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([format_value(r[c]) for c in COLUMNS])
    side = None
    if cfg.sidecar:
        side = table.with_suffix(".json")
        side.write_text(json.dumps(_sidecar(cfg, rows, table), indent=2, sort_keys=False) + "\n")
    flagged = sum(r["status"] != OK for r in rows)
    return SweepResult(rows, table, side, flagged)

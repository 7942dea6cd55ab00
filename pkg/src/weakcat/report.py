"""JSON / CSV / text encoders shared by every CLI command.

Floats go through :func:`fixed` before encoding: 15 significant digits,
magnitudes below 1e-14 flushed to zero, no negative zero.  JSON keys are
sorted, so identical inputs give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Optional

from .scenarios import AuditRecord, ScenarioReport
from .vonneumann import CouplingResult, WeakLimitRow

SCHEMA = "weakcat/1"
CHOP = 1e-14


def fixed(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    if abs(x) < CHOP:
        return 0.0
    return float(f"{x:.15g}") + 0.0


def cplx(z: Optional[complex]) -> Optional[dict]:
    if z is None:
        return None
    return {"re": fixed(z.real), "im": fixed(z.imag)}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _findings(findings) -> list:
    return [{"check": f.check, "passed": f.passed, "detail": f.detail} for f in findings]


def report_dict(r: ScenarioReport) -> dict:
    return {
        "schema": SCHEMA,
        "scenario": r.scenario,
        "interpretation": r.interpretation,
        "status": r.status,
        "postselect_prob": fixed(r.postselect_prob),
        "helicity": r.helicity,
        "observables": [
            {
                "name": o.name,
                "weak_value": cplx(o.weak_value),
                "reversed": cplx(o.reversed),
                "claimed": cplx(o.claimed),
                "claim_ref": o.claim_ref,
                "deviation": fixed(o.deviation),
            }
            for o in r.observables
        ],
        "audit": _findings(r.audit),
    }


def _csv(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def report_csv(r: ScenarioReport) -> str:
    rows = []
    for o in r.observables:
        wv, cl = cplx(o.weak_value), cplx(o.claimed)
        rows.append([
            o.name,
            wv and wv["re"], wv and wv["im"],
            cl and cl["re"], cl and cl["im"],
            fixed(o.deviation),
        ])
    return _csv(["observable", "re", "im", "claimed_re", "claimed_im", "deviation"], rows)


def _fmt(z: Optional[complex]) -> str:
    if z is None:
        return "-"
    c = cplx(z)
    return f"{c['re']!r}{'+' if c['im'] >= 0 else '-'}{abs(c['im'])!r}i"


def report_text(r: ScenarioReport) -> str:
    lines = [
        f"scenario        {r.scenario}",
        f"interpretation  {r.interpretation}",
        f"status          {r.status}",
        f"postselect_prob {fixed(r.postselect_prob)!r}",
    ]
    if r.helicity is not None:
        lines.append(f"helicity        {r.helicity}")
    lines.append("")
    lines.append(f"{'observable':<12} {'weak value':<28} {'reversed':<28} {'claimed':<14} deviation")
    for o in r.observables:
        claimed = _fmt(o.claimed) + (f" [{o.claim_ref}]" if o.claim_ref else "") if o.claimed is not None else "-"
        dev = "-" if o.deviation is None else repr(fixed(o.deviation))
        lines.append(f"{o.name:<12} {_fmt(o.weak_value):<28} {_fmt(o.reversed):<28} {claimed:<14} {dev}")
    if r.audit:
        lines.append("")
        for f in r.audit:
            lines.append(f"audit {'PASS' if f.passed else 'FAIL'} {f.check}: {f.detail}")
    return "\n".join(lines) + "\n"


def coupling_dict(res: CouplingResult, **meta) -> dict:
    out = {
        "schema": SCHEMA,
        "kind": "pointer",
        "g": fixed(res.g),
        "mean_position_shift": fixed(res.mean_position_shift),
        "mean_momentum_shift": fixed(res.mean_momentum_shift),
        "success_prob": fixed(res.success_prob),
        "joint_norm_check": fixed(res.joint_norm_check),
    }
    out.update(meta)
    return out


SWEEP_HEADER = [
    "g", "position_shift", "momentum_shift", "predicted_pos", "predicted_mom",
    "position_error", "momentum_error", "success_prob",
]


def _sweep_values(row: WeakLimitRow) -> list:
    return [fixed(v) for v in (
        row.g, row.position_shift, row.momentum_shift, row.predicted_pos, row.predicted_mom,
        row.position_error, row.momentum_error, row.success_prob,
    )]


def sweep_csv(rows: list[WeakLimitRow]) -> str:
    return _csv(SWEEP_HEADER, (_sweep_values(r) for r in rows))


def sweep_dict(rows: list[WeakLimitRow], **meta) -> dict:
    out = {
        "schema": SCHEMA,
        "kind": "sweep",
        "rows": [dict(zip(SWEEP_HEADER, _sweep_values(r))) for r in rows],
    }
    out.update(meta)
    return out


def audit_dict(a: AuditRecord) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "audit",
        "scenario": a.scenario,
        "interpretation": a.interpretation,
        "passed": a.passed,
        "findings": _findings(a.findings),
    }

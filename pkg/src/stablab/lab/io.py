"""Serialization of iteration traces (JSON Lines) and sweep tables (CSV)."""

from __future__ import annotations

import csv
import json
import math

STEP_FIELDS = (
    "n", "mdef", "mdef_exact", "op_norm", "correction_norm", "omega", "delta_n",
    "beta_n", "K_n", "claim_ii_ok", "claim_iii_ok", "prop34_lhs", "prop34_rhs",
)

SWEEP_FIELDS = (
    "value", "alpha", "theta", "delta", "N_or_outcome", "final_mdef",
    "alpha_power_bound", "distance",
)


def _clean(v):
    # repr of a float is the shortest string that round-trips binary64
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


def step_dict(rec):
    return {k: _clean(getattr(rec, k)) for k in STEP_FIELDS}


def summary_dict(trace):
    return {
        "outcome": trace.outcome.value,
        "N": trace.N,
        "steps": len(trace.steps),
        "alpha": trace.alpha,
        "alpha_exact": trace.alpha_exact,
        "theta": trace.theta,
        "delta": trace.delta,
        "epsilon": trace.epsilon,
        "K": trace.K,
        "L": trace.L,
        "M": trace.M,
        "final_mdef": trace.final_mdef,
        "alpha_power_bound": trace.alpha_power_bound,
        "distance_to_start": trace.distance_to_start,
        "endgame_bound": trace.endgame_bound,
        "hypothesis_satisfied": trace.hypothesis_satisfied,
        "estimated_defects": trace.estimated_defects,
        "notes": list(trace.notes),
        "final_op": trace.final_op.matrix.tolist(),
    }


def dumps(obj):
    return json.dumps(obj, allow_nan=False)


def write_trace(trace, path):
    with open(path, "w", newline="\n") as fh:
        for rec in trace.steps:
            fh.write(dumps(step_dict(rec)) + "\n")
        fh.write(dumps({"summary": summary_dict(trace)}) + "\n")


def read_trace(path):
    """Return ``(steps, summary)`` from a JSON Lines trace."""
    steps, summary = [], None
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            if "summary" in obj:
                summary = obj["summary"]
            else:
                steps.append(obj)
    return steps, summary


def sweep_row(value, trace):
    return {
        "value": value,
        "alpha": trace.alpha,
        "theta": trace.theta,
        "delta": trace.delta,
        "N_or_outcome": trace.N if trace.N is not None else trace.outcome.value,
        "final_mdef": trace.final_mdef,
        "alpha_power_bound": trace.alpha_power_bound,
        "distance": trace.distance_to_start,
    }


def write_sweep(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})

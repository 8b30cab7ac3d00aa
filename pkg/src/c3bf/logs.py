"""Trajectory and summary export (CSV and line-delimited JSON)."""

import csv
import json
import math

SCHEMA_VERSION = 1


def _input_names(mode):
    return ("accel", "alpha") if mode == "vertical" else ("accel_x", "accel_z")


def trajectory_fields(result):
    cfg = result.config
    names = ["t", *type(cfg.initial_state).field_names()]
    for prefix in ("u_ref", "u_safe"):
        names += [f"{prefix}_{n}" for n in _input_names(cfg.mode)]
    for j in range(len(cfg.obstacles)):
        names += [f"obs{j}_{k}" for k in ("h", "psi", "distance", "filter_active", "degenerate")]
    names.append("violation")
    return names


def _row(rec):
    row = [rec.t, *rec.state.as_array().tolist(), *rec.u_ref.tolist(), *rec.u_safe.tolist()]
    for o in rec.obstacles:
        row += [o.h, o.psi, o.distance, int(o.filter_active), int(o.degenerate)]
    row.append(int(rec.violation))
    return row


def _json_float(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


def write_csv(result, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_fields(result))
        for rec in result.records:
            writer.writerow(repr(x) if isinstance(x, float) else x for x in _row(rec))


def record_to_dict(rec):
    return {
        "t": rec.t,
        "state": dict(zip(type(rec.state).field_names(), rec.state.as_array().tolist())),
        "u_ref": rec.u_ref.tolist(),
        "u_safe": rec.u_safe.tolist(),
        "obstacles": [
            {
                "h": _json_float(o.h),
                "psi": _json_float(o.psi),
                "distance": o.distance,
                "filter_active": bool(o.filter_active),
                "degenerate": bool(o.degenerate),
            }
            for o in rec.obstacles
        ],
        "violation": bool(rec.violation),
    }


def write_jsonl(result, path):
    cfg = result.config
    header = {
        "header": {
            "schema_version": SCHEMA_VERSION,
            "mode": cfg.mode,
            "dt": cfg.dt,
            "n_obstacles": len(cfg.obstacles),
            "state_fields": list(type(cfg.initial_state).field_names()),
            "input_fields": list(_input_names(cfg.mode)),
            "record_fields": ["t", "state", "u_ref", "u_safe", "obstacles", "violation"],
        }
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in result.records:
            fh.write(json.dumps(record_to_dict(rec)) + "\n")


def read_jsonl(path):
    """Return ``(header, records)`` from a trajectory written by ``write_jsonl``."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    return lines[0]["header"], lines[1:]


def write_summary(summaries, path):
    with open(path, "w") as fh:
        for s in summaries:
            fh.write(json.dumps(s, sort_keys=True) + "\n")

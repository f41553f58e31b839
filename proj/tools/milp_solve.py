#!/usr/bin/env python3
"""MILP solve driver: reads an MPS file, solves it, emits a JSON solution.

Modes:
  one-shot:  milp_solve.py --mps M --gap G --time-limit T --seed S --threads N --out OUT.json
  validate:  milp_solve.py --mps M --validate-only --out OUT.json
  server:    milp_solve.py --server        (JSON object per line on stdin -> one per line on stdout)

Backend preference: highspy if installed, else the HiGHS build vendored inside
scipy, else scipy.optimize.milp on a locally parsed model.
"""
import argparse
import json
import math
import os
import sys
import tempfile
import time


def load_highs_class():
    try:
        import highspy
        return highspy.Highs
    except ImportError:
        pass
    try:
        from scipy.optimize._highspy import _core
        return _core._Highs
    except ImportError:
        return None


HIGHS_CLASS = load_highs_class()


def make_highs(log_path=None):
    h = HIGHS_CLASS()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("log_to_console", False)
    if log_path:
        h.setOptionValue("log_file", log_path)
        h.setOptionValue("output_flag", True)
    return h


def read_log(log_path):
    try:
        with open(log_path) as f:
            return f.read()
    except OSError:
        return ""


def validate_highs(mps_path):
    fd, log_path = tempfile.mkstemp(suffix=".log")
    os.close(fd)
    try:
        h = make_highs(log_path)
        status = h.readModel(mps_path)
        ok = "kOk" in str(status)
        log = read_log(log_path)
        issues = [ln for ln in log.splitlines() if "warning" in ln.lower() or "error" in ln.lower()]
        return {"valid": ok and not issues, "messages": "; ".join(issues) if issues else "clean read"}
    finally:
        os.unlink(log_path)


def solve_highs(req):
    h = make_highs()
    status = h.readModel(req["mps"])
    if "kOk" not in str(status):
        return {"error": "model file not readable: %s" % status}
    h.setOptionValue("mip_rel_gap", float(req.get("gap", 1e-3)))
    h.setOptionValue("time_limit", float(req.get("time_limit", 600.0)))
    h.setOptionValue("random_seed", int(req.get("seed", 7)))
    h.setOptionValue("threads", int(req.get("threads", 1)))
    h.setOptionValue("presolve", "on")
    t0 = time.time()
    h.run()
    dt = time.time() - t0
    model_status = str(h.getModelStatus())
    info = h.getInfo()
    sol = h.getSolution()
    values = list(sol.col_value) if sol.col_value is not None else []
    gap = getattr(info, "mip_gap", 0.0)
    if gap is None or not math.isfinite(gap):
        gap = 0.0
    have_solution = bool(values) and getattr(info, "primal_solution_status", 2) != 0
    out = {"solve_time": dt, "gap": gap, "message": model_status}
    if "kOptimal" in model_status and have_solution:
        out["status"] = "optimal" if gap <= 1e-9 else "gap-feasible"
        out["objective"] = info.objective_function_value
        out["values"] = values
    elif "kInfeasible" in model_status:
        out["status"] = "infeasible"
    elif "kUnbounded" in model_status:
        out["status"] = "unbounded"
    elif have_solution and math.isfinite(info.objective_function_value):
        # time or iteration limit with an incumbent: return it with the achieved
        # gap so the caller can decide whether it is acceptable
        out["status"] = "gap-feasible"
        out["objective"] = info.objective_function_value
        out["values"] = values
    else:
        out["error"] = "no acceptable solution: %s (gap %.3g)" % (model_status, gap)
    return out


def parse_mps(path):
    """Minimal MPS reader for the fallback backend (handles the writer's dialect)."""
    import numpy as np
    section = None
    row_sense = {}
    row_order = []
    obj_row = None
    col_order = []
    col_idx = {}
    integrality = []
    entries = []  # (row, col, value)
    obj = {}
    rhs = {}
    lb = {}
    ub = {}
    integer_mode = False
    with open(path) as f:
        for line in f:
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            tok = line.split()
            if section == "ROWS":
                sense, name = tok[0], tok[1]
                if sense == "N":
                    obj_row = name
                else:
                    row_sense[name] = sense
                    row_order.append(name)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    integer_mode = tok[2] == "'INTORG'"
                    continue
                col = tok[0]
                if col not in col_idx:
                    col_idx[col] = len(col_order)
                    col_order.append(col)
                    integrality.append(1 if integer_mode else 0)
                for i in range(1, len(tok) - 1, 2):
                    row, val = tok[i], float(tok[i + 1])
                    if row == obj_row:
                        obj[col] = obj.get(col, 0.0) + val
                    else:
                        entries.append((row, col, val))
            elif section == "RHS":
                for i in range(1, len(tok) - 1, 2):
                    rhs[tok[i]] = float(tok[i + 1])
            elif section == "BOUNDS":
                btype, col = tok[0], tok[2]
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if btype in ("UP", "UI"):
                    ub[col] = val
                elif btype in ("LO", "LI"):
                    lb[col] = val
                elif btype == "FX":
                    lb[col] = ub[col] = val
                elif btype == "MI":
                    lb[col] = -math.inf
                elif btype == "BV":
                    lb[col], ub[col] = 0.0, 1.0
    n = len(col_order)
    c = np.array([obj.get(col, 0.0) for col in col_order])
    lo = np.array([lb.get(col, 0.0) for col in col_order])
    hi = np.array([ub.get(col, math.inf) for col in col_order])
    rows = {name: i for i, name in enumerate(row_order)}
    import scipy.sparse as sp
    data, ri, ci = [], [], []
    for row, col, val in entries:
        ri.append(rows[row])
        ci.append(col_idx[col])
        data.append(val)
    a = sp.csr_matrix((data, (ri, ci)), shape=(len(row_order), n))
    bl = np.full(len(row_order), -math.inf)
    bu = np.full(len(row_order), math.inf)
    for name, i in rows.items():
        b = rhs.get(name, 0.0)
        s = row_sense[name]
        if s in ("L", "E"):
            bu[i] = b
        if s in ("G", "E"):
            bl[i] = b
    return c, a, bl, bu, lo, hi, np.array(integrality)


def solve_scipy(req):
    import numpy as np
    from scipy.optimize import LinearConstraint, Bounds, milp
    c, a, bl, bu, lo, hi, integ = parse_mps(req["mps"])
    t0 = time.time()
    res = milp(c, constraints=LinearConstraint(a, bl, bu), bounds=Bounds(lo, hi), integrality=integ,
               options={"mip_rel_gap": float(req.get("gap", 1e-3)), "time_limit": float(req.get("time_limit", 600.0)),
                        "disp": False})
    dt = time.time() - t0
    out = {"solve_time": dt, "message": res.message}
    if res.status == 0 and res.x is not None:
        gap = getattr(res, "mip_gap", 0.0) or 0.0
        out.update({"status": "optimal" if gap <= 1e-9 else "gap-feasible", "objective": float(res.fun),
                    "gap": float(gap), "values": [float(v) for v in res.x]})
    elif res.status == 2:
        out["status"] = "infeasible"
    elif res.status == 3:
        out["status"] = "unbounded"
    else:
        out["error"] = "scipy.milp failed: %s" % res.message
    return out


def handle(req):
    try:
        if req.get("validate_only"):
            if HIGHS_CLASS is None:
                return {"valid": True, "messages": "no reference solver available; skipped"}
            return validate_highs(req["mps"])
        if HIGHS_CLASS is not None:
            return solve_highs(req)
        return solve_scipy(req)
    except Exception as exc:  # noqa: BLE001 - report everything to the caller
        return {"error": "%s: %s" % (type(exc).__name__, exc)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mps")
    ap.add_argument("--gap", type=float, default=1e-3)
    ap.add_argument("--time-limit", type=float, default=600.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    ap.add_argument("--validate-only", action="store_true")
    ap.add_argument("--server", action="store_true")
    args = ap.parse_args()

    if args.server:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            try:
                req = json.loads(line)
            except json.JSONDecodeError as exc:
                resp = {"error": "bad request: %s" % exc}
            else:
                resp = handle(req)
            sys.stdout.write(json.dumps(resp) + "\n")
            sys.stdout.flush()
        return 0

    if not args.mps:
        ap.error("--mps required outside --server mode")
    req = {"mps": args.mps, "gap": args.gap, "time_limit": args.time_limit, "seed": args.seed,
           "threads": args.threads, "validate_only": args.validate_only}
    resp = handle(req)
    text = json.dumps(resp)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``fosynth`` command line: synth, verify and simulate.

Exit codes: 0 ok, 2 infeasible, 3 invalid input, 4 verification failure.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import lmi
from .analysis import robust_verify, random_delta
from .fosim import SteppingError, simulate
from .interval import IntervalMatrix, IntervalOrderError, UncertainPlant
from .synthesis import (ControllerRealization, SynthesisError, SynthesisOptions, assemble_stage1,
                        assemble_stage2, augment, build_selectors, closed_loop, synthesize)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INVALID = 3
EXIT_VERIFY = 4

log = logging.getLogger("fosynth")


class InputError(ValueError):
    """Schema or precondition violation in user input."""


# -- serialisation ---------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        # JSON has no inf/nan; keep them readable and parseable by Python's json
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    text = f"{x:.17g}"
    return text if any(ch in text for ch in ".e") else text + ".0"


def _encode(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _matrix(value, what):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise InputError(f"{what} must be a non-empty list of rows")
    width = len(value[0])
    if width == 0 or any(len(r) != width for r in value):
        raise InputError(f"{what} rows must have equal, nonzero length")
    for r in value:
        for v in r:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InputError(f"{what} entries must be numbers")
    m = np.array(value, dtype=float)
    if not np.all(np.isfinite(m)):
        raise InputError(f"{what} entries must be finite")
    return m


def _interval(doc, key, canonicalize):
    if key not in doc:
        raise InputError(f"plant is missing {key!r}")
    spec = doc[key]
    if isinstance(spec, list):
        return IntervalMatrix.point(_matrix(spec, key))
    if not isinstance(spec, dict) or set(spec) != {"lower", "upper"}:
        raise InputError(f"{key} must be an object with exactly 'lower' and 'upper'")
    lo = _matrix(spec["lower"], f"{key}.lower")
    hi = _matrix(spec["upper"], f"{key}.upper")
    if lo.shape != hi.shape:
        raise InputError(f"{key}.lower is {lo.shape}, {key}.upper is {hi.shape}")
    try:
        return IntervalMatrix.from_bounds(lo, hi, canonicalize=canonicalize)
    except IntervalOrderError as exc:
        raise InputError(f"{key}: {exc}; pass --canonicalize to reorder") from exc


def parse_plant(doc, canonicalize: bool = False) -> UncertainPlant:
    if not isinstance(doc, dict):
        raise InputError("plant document must be a JSON object")
    extra = set(doc) - {"alpha", "A", "B", "C"}
    if extra:
        raise InputError(f"unknown plant keys: {sorted(extra)}")
    alpha = doc.get("alpha")
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
        raise InputError("plant 'alpha' must be a number")
    a, b, c = (_interval(doc, k, canonicalize) for k in ("A", "B", "C"))
    try:
        return UncertainPlant(a, b, c, float(alpha))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_plant(path, canonicalize: bool = False) -> UncertainPlant:
    return parse_plant(_read_json(path), canonicalize)


def controller_document(k: ControllerRealization) -> dict:
    return {"nc": k.order, "Ac": k.a_c, "Bc": k.b_c, "Cc": k.c_c, "Dc": k.d_c}


def parse_controller(doc) -> ControllerRealization:
    if not isinstance(doc, dict):
        raise InputError("controller document must be a JSON object")
    missing = {"nc", "Ac", "Bc", "Cc", "Dc"} - set(doc)
    if missing:
        raise InputError(f"controller is missing {sorted(missing)}")
    nc = doc["nc"]
    if isinstance(nc, bool) or not isinstance(nc, int) or nc < 1:
        raise InputError("controller 'nc' must be a positive integer")
    mats = {k: _matrix(doc[k], k) for k in ("Ac", "Bc", "Cc", "Dc")}
    if mats["Ac"].shape != (nc, nc):
        raise InputError(f"Ac must be {nc}x{nc}")
    try:
        return ControllerRealization(mats["Ac"], mats["Bc"], mats["Cc"], mats["Dc"])
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_controller(path) -> ControllerRealization:
    return parse_controller(_read_json(path))


def certificate_document(plant, n_c, cert) -> dict:
    return {
        "alpha": plant.alpha,
        "n": plant.n,
        "nc": n_c,
        "theta": cert.theta,
        "control_form": cert.control_form,
        "X": cert.x,
        "Y": cert.y,
        "X_cl": cert.x_cl,
        "etas": cert.etas,
        "slacks": {
            "stage1": cert.stage1_report.worst.slack,
            "stage2": cert.stage2_report.worst.slack,
            "stage1_solver": cert.stage1.slack,
            "stage2_solver": cert.stage2.slack,
        },
    }


def _summary(report) -> dict:
    d = report.to_dict()
    d["failures"] = d["failures"][:20]
    return d


# -- commands --------------------------------------------------------------

def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def cmd_synth(args) -> int:
    plant = load_plant(args.plant, args.canonicalize)
    if args.nc < plant.n:
        raise InputError(f"--nc {args.nc} is below the plant order n={plant.n}; "
                         f"the completion step needs n_c >= n")
    if not 1.0 < plant.alpha < 2.0:
        raise InputError(f"synthesis needs 1 < alpha < 2, got {plant.alpha}")
    if args.eps <= 0 or args.retries < 0 or args.refine < 0:
        raise InputError("--eps must be positive, --retries and --refine nonnegative")
    opts = SynthesisOptions(eps=args.eps, retries=args.retries, seed=args.seed, refine=args.refine)
    out = _ensure_dir(args.out)
    base = {"alpha": plant.alpha, "theta": math.pi - plant.alpha * math.pi / 2,
            "dimensions": {"n": plant.n, "l": plant.l, "m": plant.m, "nc": args.nc}}
    try:
        k, cert = synthesize(plant, args.nc, opts)
    except SynthesisError as exc:
        if args.dump_lmi:
            aug = augment(plant, args.nc)
            with open(os.path.join(_ensure_dir(args.dump_lmi), "stage1.lmi"), "w") as fh:
                assemble_stage1(plant, aug, build_selectors(plant, aug), args.eps).dump(fh)
        report = dict(base, status="infeasible", stage=exc.stage, best_slack=exc.best_slack,
                      attempts=exc.attempts)
        write_json(os.path.join(out, "report.json"), report)
        print(f"infeasible at {exc.stage} (best slack {exc.best_slack})", file=sys.stderr)
        return EXIT_INFEASIBLE

    write_json(os.path.join(out, "controller.json"), controller_document(k))
    write_json(os.path.join(out, "certificate.json"), certificate_document(plant, args.nc, cert))
    if args.dump_lmi:
        aug = augment(plant, args.nc)
        d = _ensure_dir(args.dump_lmi)
        with open(os.path.join(d, "stage1.lmi"), "w") as fh:
            assemble_stage1(plant, aug, build_selectors(plant, aug), args.eps, cert.control_form).dump(fh)
        with open(os.path.join(d, "stage2.lmi"), "w") as fh:
            assemble_stage2(plant, aug, cert.x_cl, args.eps).dump(fh)
    rv = robust_verify(plant, k, args.samples, args.seed)
    report = dict(base, status="ok", control_form=cert.control_form,
                  slacks={"stage1": cert.stage1_report.worst.slack,
                          "stage2": cert.stage2_report.worst.slack},
                  attempts=cert.attempts, robust_verify=_summary(rv))
    write_json(os.path.join(out, "report.json"), report)
    print(f"controller written to {os.path.join(out, 'controller.json')}; "
          f"sweep {rv.n_pass}/{rv.n_checked} pass, worst margin {rv.worst_margin:.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    plant = load_plant(args.plant, args.canonicalize)
    k = load_controller(args.controller)
    if k.n_inputs != plant.l or k.n_outputs != plant.m:
        raise InputError(f"controller drives {k.n_inputs} inputs from {k.n_outputs} outputs; "
                         f"plant has l={plant.l}, m={plant.m}")
    if args.samples < 0:
        raise InputError("--samples must be nonnegative")
    out = _ensure_dir(args.out)
    eig_rows = []
    rv = robust_verify(plant, k, args.samples, args.seed,
                       eigen_sink=lambda i, ev: eig_rows.extend((e.real, e.imag, i) for e in ev))
    write_json(os.path.join(out, "report.json"), rv.to_dict())
    with open(os.path.join(out, "eigenvalues.csv"), "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im", "member_index"])
        for re_, im_, i in eig_rows:
            w.writerow([_num(re_), _num(im_), i])
    if rv.passed:
        print(f"all {rv.n_checked} members pass, worst margin {rv.worst_margin:.6g}")
        return EXIT_OK
    print(f"{rv.n_fail} of {rv.n_checked} members fail; worst delta {rv.worst_delta}", file=sys.stderr)
    return EXIT_VERIFY


def _parse_vector(text, what):
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise InputError(f"{what} must be a comma-separated list of numbers") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what} must be a non-empty list of finite numbers")
    return np.array(vals)


def cmd_simulate(args) -> int:
    plant = load_plant(args.plant, args.canonicalize)
    k = load_controller(args.controller)
    if k.n_inputs != plant.l or k.n_outputs != plant.m:
        raise InputError(f"controller does not match plant dimensions l={plant.l}, m={plant.m}")
    if not args.dt > 0 or not args.t_final > 0:
        raise InputError("--dt and --t-final must be positive")
    if args.t_final < args.dt:
        raise InputError(f"--t-final {args.t_final} is shorter than --dt {args.dt}")
    x0 = np.ones(plant.n) if args.x0 is None else _parse_vector(args.x0, "--x0")
    if x0.size != plant.n:
        raise InputError(f"--x0 needs {plant.n} entries")

    if args.member == "nominal":
        delta = None
    elif args.member == "random":
        delta = random_delta(plant, args.seed, 0)
    else:
        delta = _parse_vector(args.member, "--member")
        if delta.size != plant.n_delta:
            raise InputError(f"--member needs {plant.n_delta} delta entries (A, B, C row-major)")
        if np.any(np.abs(delta) > 1):
            raise InputError("--member delta entries must lie in [-1, 1]")
    a, b, c = plant.member(delta)
    a_cl = closed_loop(a, b, c, k)
    try:
        res = simulate(a_cl, plant.n, k, c, x0, plant.alpha, args.dt, args.t_final)
    except SteppingError as exc:
        raise InputError(str(exc)) from exc
    if args.out in (None, "-"):
        res.write_csv(sys.stdout)
    else:
        with open(args.out, "w") as fh:
            res.write_csv(fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fosynth", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, controller=False):
        sp.add_argument("--plant", required=True, help="plant JSON file")
        if controller:
            sp.add_argument("--controller", required=True, help="controller JSON file")
        sp.add_argument("--canonicalize", action="store_true",
                        help="reorder interval bounds entrywise instead of rejecting them")
        sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("synth", help="design a robust output-feedback controller")
    common(s)
    s.add_argument("--nc", type=int, required=True, help="controller order (>= plant order)")
    s.add_argument("--out", default=".", help="output directory")
    s.add_argument("--eps", type=float, default=1e-7, help="LMI strictness margin")
    s.add_argument("--retries", type=int, default=3, help="stage-1 retries after stage 2 fails")
    s.add_argument("--refine", type=int, default=0, help="alternating K / X_cl passes per attempt")
    s.add_argument("--samples", type=int, default=1000, help="random members in the post-hoc sweep")
    s.add_argument("--dump-lmi", metavar="DIR", help="write the LMI problems in plain-text standard form")
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", help="sweep vertices and random members of the family")
    common(v, controller=True)
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--out", default=".", help="output directory for report.json and eigenvalues.csv")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="closed-loop time response as CSV")
    common(m, controller=True)
    m.add_argument("--dt", type=float, default=0.01)
    m.add_argument("--t-final", type=float, default=40.0)
    m.add_argument("--x0", help="comma-separated plant initial state (default: ones)")
    m.add_argument("--member", default="nominal",
                   help="'nominal', 'random' (uses --seed) or a comma-separated delta list")
    m.add_argument("--out", help="CSV path (default: stdout)")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are invalid input
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except lmi.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())

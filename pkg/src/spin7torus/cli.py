"""Command-line driver: ``spin7torus {verify,reduce,flow,classify}``.

JSON goes to stdout (or ``--out``), a readable table to stderr.  Exit codes:
0 when every check passes, 1 when a check fails or the mathematics refuses
the input, 2 for usage and parse errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import flat, flow, suites
from .errors import ContractViolation, CosymplecticViolation, Spin7Error
from .hyperkahler import hk_end_to_end
from .report import Report, _default

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("SPIN7_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SPIN7_SEED must be an integer, got {raw!r}") from None


def parse_matrix(text: str) -> np.ndarray:
    try:
        A = np.array(json.loads(text), dtype=float)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot parse matrix {text!r}: {exc}") from None
    if A.shape != (3, 3):
        raise UsageError(f"expected a 3x3 matrix, got shape {A.shape}")
    return A


def parse_vector(text: str, n: int) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as {n} comma-separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"expected {n} values, got {len(vals)}")
    return vals


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(rep: Report, out: str | None, payload: dict | None = None) -> int:
    rep.render_table(sys.stderr)
    obj = rep.to_json_obj()
    if payload:
        obj.update(payload)
    _emit(obj, out)
    return rep.exit_code


def cmd_verify(args) -> int:
    A = parse_matrix(args.A) if args.A is not None else None
    if A is not None and args.suite != "cosymplectic":
        raise UsageError("--A only applies to the cosymplectic suite")
    rep = suites.run_suite(args.suite, seed=args.seed, points=args.points, A=A)
    return _finish(rep, args.out)


def cmd_reduce(args) -> int:
    rng = np.random.default_rng(args.seed)
    pts = flat.sample_points(rng, args.points)
    rep = Report(suite="reduce-flat-r8", seed=args.seed, config_echo={"points": args.points})
    flat.verify_mm_flat(pts, rep)
    flat.sigma_flat_check(pts, rep)
    rows = []
    for p in pts:
        st = flat.reduce_triple(flat.flat_frame(p))
        xi = flat.xi_coords(p)
        rows.append({"x": list(p.x), "xi": [xi.v1, xi.v2, xi.v3, xi.w], "t": xi.t,
                     "G": np.asarray(st.G, float), "Q": np.asarray(st.Q, float), "h": float(st.h)})
    return _finish(rep, args.out, {"points": rows})


def load_flow_config(path: str) -> tuple[np.ndarray, flow.FlowConfig]:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read flow config {path}: {exc}") from None
    if not isinstance(cfg, dict) or "A" not in cfg:
        raise UsageError("flow config must be an object with at least an 'A' entry")
    A = parse_matrix(json.dumps(cfg["A"]))
    try:
        config = flow.FlowConfig(dt=float(cfg.get("dt", 1e-3)),
                                 safety_margin=float(cfg.get("tMaxFraction", 0.9)))
    except (ContractViolation, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return A, config


def cmd_flow(args) -> int:
    A, config = load_flow_config(args.input)
    traj = flow.integrate(A, config)
    errs = flow.oracle_errors(traj)
    rep = Report(suite="flow", seed=args.seed,
                 config_echo={"A": A.tolist(), "dt": config.dt, "tMaxFraction": config.safety_margin})
    rep.add("oracle", "trajectory vs closed form", max(errs.values()), 1e-8, detail=errs)
    rep.add("constraint", "det Q = h^{-4}", flow.constraint_drift(traj), 1e-9)
    rep.add("volume", "V increments vs quadrature of v", flow.volume_consistency_check(traj), 1e-8)
    if args.example == "hk":
        hk = hk_end_to_end(A, config, seed=args.seed)
        rep.checks.extend(c for c in hk.checks if c.id not in {"oracle", "constraint"})
    summary = {"oracle": errs, "completeness": flow.completeness_classify(A),
               "interval": list(flow.max_interval(A)), "t_end": float(traj.t[-1])}
    return _finish(rep, args.out, {"trajectory": traj.to_json_obj(args.stride), "summary": summary})


def cmd_classify(args) -> int:
    if args.kind == "collapse":
        if args.v is None:
            raise UsageError("classify collapse needs --v a,b,c")
        v = parse_vector(args.v, 3)
        xi = flat.XiCoords(v[0], v[1], v[2], args.w, args.t)
        stratum = flat.collapse_classify(xi, refined=args.refined)
        rep = Report(suite="classify-collapse",
                     config_echo={"v": v, "w": args.w, "t": args.t, "refined": args.refined})
        rep.add_flag("stratum", "orbit type over M_0", True, detail=stratum)
        rep.extra["result"] = stratum
    else:
        if args.A is None:
            raise UsageError("classify completeness needs --A")
        A = parse_matrix(args.A)
        cls = flow.completeness_classify(A)
        rep = Report(suite="classify-completeness", config_echo={"A": A.tolist()})
        rep.add_flag("class", "eigenvalue sign rule", True, detail=cls)
        rep.extra["result"] = cls
    return _finish(rep, args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spin7torus", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $SPIN7_SEED or 0)")
        p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=suites.SUITES)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--A", default=None, help="3x3 matrix as JSON (cosymplectic suite)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="pointwise reduction of the flat model")
    p.add_argument("model", choices=("flat-r8",))
    p.add_argument("--points", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("flow", help="integrate the flow from a JSON config")
    p.add_argument("example", nargs="?", choices=("hk",), default=None)
    p.add_argument("--input", required=True)
    p.add_argument("--stride", type=int, default=1, help="keep every n-th trajectory sample")
    common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("classify", help="collapse stratum or completeness class")
    p.add_argument("kind", choices=("collapse", "completeness"))
    p.add_argument("--v", default=None, help="v1,v2,v3")
    p.add_argument("--w", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--A", default=None)
    p.add_argument("--refined", action="store_true",
                   help="require v_k >= v_i in the v_i = v_j <= 0 two-torus constraints")
    common(p)
    p.set_defaults(func=cmd_classify)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.seed is None:
            args.seed = default_seed()
        if getattr(args, "points", None) is not None and args.points <= 0:
            raise UsageError("--points must be positive")
        if getattr(args, "stride", 1) <= 0:
            raise UsageError("--stride must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CosymplecticViolation as exc:
        _emit({"status": "fail", "error": "cosymplectic-violation", "ref": "QA = A^T Q", "message": str(exc)},
              getattr(args, "out", None))
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Spin7Error as exc:
        _emit({"status": "fail", "error": type(exc).__name__, "message": str(exc)}, getattr(args, "out", None))
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands:

* ``graph info``      -- V, n, F, chi, monodromy words, and the dual graph.
* ``series z``        -- graph partition function from a model file.
* ``series hciz``     -- the one-matrix conjugation series.
* ``series bgw``      -- the BGW series over U or SU.
* ``verify IDENTITY`` -- Monte Carlo verification of one identity.
* ``kp-check``        -- finite-difference KP residual of a tau spec file.
* ``suite``           -- the whole acceptance battery.

Exit codes: 0 on success / verification pass, 1 on a numerical verification
failure, 2 on configuration or scope errors.  Every report echoes the
resolved defaults (order, samples, seed, q_max, step) for provenance, and
``--json`` output is byte-stable for identical configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import mc, model as model_mod, suite as suite_mod, tau as tau_mod
from .model import CornerAssignment, Group, ModelSpec, TruncationPolicy, WeightConvention
from .partitions import Partition
from .ribbon import RibbonGraph, build_graph, dual, euler_characteristic
from .symfun import PowerSums, SpectralMatrix, power_sums_infinity

DEFAULT_ORDER = 10
DEFAULT_SAMPLES = 200_000
DEFAULT_SEED = 0
DEFAULT_QMAX = 1
DEFAULT_STEP = 0.02

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


class CliError(Exception):
    """Configuration-level error: bad flags, malformed files, scope violations."""


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _as_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise CliError(f"{where}: numbers must be scalars or [re, im] pairs, got {v!r}")


def _parse_matrix(obj, where: str) -> np.ndarray:
    try:
        return np.array([[_as_complex(z, where) for z in row] for row in obj], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{where}: not a matrix: {exc}")


def parse_graph(obj) -> RibbonGraph:
    if not isinstance(obj, dict) or "n" not in obj or "vertices" not in obj:
        raise CliError("graph file must be an object with fields 'n' and 'vertices'")
    return build_graph(int(obj["n"]), obj["vertices"])


def parse_corners(obj) -> CornerAssignment:
    if not isinstance(obj, dict) or "N" not in obj or "corners" not in obj:
        raise CliError("corner file must be an object with fields 'N' and 'corners'")
    mats = {
        int(label): _parse_matrix(m, f"corner {label}") for label, m in obj["corners"].items()
    }
    return CornerAssignment(int(obj["N"]), mats)


def _resolve(entry, base_dir: str, parser, what: str):
    if isinstance(entry, str):
        path = entry if os.path.isabs(entry) else os.path.join(base_dir, entry)
        return parser(_load_json(path))
    if isinstance(entry, dict):
        return parser(entry)
    raise CliError(f"model field {what!r} must be a path or an inline object")


def _parse_coupling(entry, order: int, where: str) -> PowerSums:
    if entry == "p_infinity":
        return power_sums_infinity(order)
    if isinstance(entry, list):
        vals = [_as_complex(v, where) for v in entry]
        return PowerSums(vals).padded(order)
    raise CliError(f"{where}: couplings must be 'p_infinity' or a list of numbers")


def parse_model(path: str, order: int) -> ModelSpec:
    obj = _load_json(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    graph = _resolve(obj.get("graph"), base_dir, parse_graph, "graph")
    corners = _resolve(obj.get("corners"), base_dir, parse_corners, "corners")
    group = _parse_group(obj.get("group", "u"))
    mode = obj.get("mode", "vertex")
    convention = WeightConvention(obj.get("convention", "calibrated"))
    couplings = obj.get("couplings")
    if couplings is not None:
        couplings = [
            _parse_coupling(c, order, f"couplings[{i}]") for i, c in enumerate(couplings)
        ]
    return ModelSpec(group, corners.n_dim, graph, corners, couplings, mode, convention)


def _parse_group(text: str) -> Group:
    try:
        return Group(text.lower())
    except ValueError:
        raise CliError(f"unknown group {text!r}; use one of u, su, gl")


def _model_from_args(args, order: int) -> ModelSpec:
    """A model comes either from --model FILE or assembled from
    --graph/--corners files plus --group/--couplings flags."""
    if args.model is not None:
        return parse_model(args.model, order)
    if args.graph is None or args.corners is None:
        raise CliError("need --model, or --graph and --corners")
    graph = parse_graph(_load_json(args.graph))
    corners = parse_corners(_load_json(args.corners))
    group = _parse_group(args.group)
    mode = getattr(args, "mode", "vertex")
    convention = WeightConvention(getattr(args, "convention", "calibrated"))
    slots = graph.num_vertices if mode == "vertex" else graph.num_faces
    if getattr(args, "couplings", None):
        entries = args.couplings.split(";")
        couplings = [
            _parse_coupling(
                e if e == "p_infinity" else [float(v) for v in e.split(",")],
                order,
                f"--couplings[{i}]",
            )
            for i, e in enumerate(entries)
        ]
    else:
        couplings = [power_sums_infinity(order) for _ in range(slots)]
    return ModelSpec(group, corners.n_dim, graph, corners, couplings, mode, convention)


def _parse_partition(text: Optional[str]) -> Partition:
    if text is None or text.strip() in ("", "-"):
        return Partition([])
    try:
        return Partition(int(p) for p in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad partition {text!r}: {exc}")


def _parse_matrix_flag(text: Optional[str], n_dim: Optional[int], where: str) -> np.ndarray:
    """Either '@file.json' holding a matrix, or comma-separated eigenvalues
    realized as a diagonal matrix."""
    if text is None:
        raise CliError(f"{where} is required for this identity")
    if text.startswith("@"):
        return _parse_matrix(_load_json(text[1:]), where)
    try:
        eig = [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError(f"{where}: expected comma-separated numbers or @file.json, got {text!r}")
    if n_dim is not None and len(eig) != n_dim:
        raise CliError(f"{where}: {len(eig)} eigenvalues given but N={n_dim}")
    return np.diag(np.array(eig, dtype=complex))


def parse_tau_spec(path: str) -> tau_mod.HypTauSpec:
    obj = _load_json(path)
    if "couplings" in obj and "p" not in obj:
        obj["p"] = obj["couplings"]
    for key in ("p", "spectrum", "weight", "max_weight"):
        if key not in obj:
            raise CliError(f"tau spec file must contain field {key!r}")
    w = obj["weight"]
    weight = tau_mod.RationalContentWeight(
        num_shifts=[_as_complex(v, "num_shifts") for v in w.get("num_shifts", [])],
        den_shifts=[_as_complex(v, "den_shifts") for v in w.get("den_shifts", [])],
        scale=_as_complex(w.get("scale", 1.0), "scale"),
        overrides={int(k): _as_complex(v, "overrides") for k, v in w.get("overrides", {}).items()},
    )
    degree = int(obj["max_weight"])
    p = PowerSums([_as_complex(v, "p") for v in obj["p"]]).padded(degree)
    spectrum = tuple(_as_complex(v, "spectrum") for v in obj["spectrum"])
    return tau_mod.HypTauSpec(p=p, spectrum=spectrum, weight=weight, trunc=TruncationPolicy(degree))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _emit(report: dict, as_json: bool, lines) -> None:
    if as_json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _config_block(args, **extra) -> dict:
    cfg = {
        "order": getattr(args, "order", None),
        "samples": getattr(args, "samples", None),
        "seed": getattr(args, "seed", None),
        "q_max": getattr(args, "qmax", None),
        "step": getattr(args, "step", None),
    }
    cfg.update(extra)
    return {k: v for k, v in cfg.items() if v is not None}


def _c2(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_graph_info(args) -> int:
    graph = parse_graph(_load_json(args.graph))
    g_star = dual(graph)
    report = {
        "V": graph.num_vertices,
        "n": graph.n,
        "F": graph.num_faces,
        "chi": euler_characteristic(graph),
        "vertex_words": [list(w) for w in graph.vertex_rotations],
        "face_words": [list(w) for w in graph.faces()],
        "dual": g_star.to_json_dict(),
        "config": {"graph": args.graph},
    }
    _emit(
        report,
        args.json,
        [
            f"V = {report['V']}, n = {report['n']}, F = {report['F']}, chi = {report['chi']}",
            f"vertex words: {report['vertex_words']}",
            f"face words:   {report['face_words']}",
            f"dual graph:   {report['dual']}",
        ],
    )
    return EXIT_OK


def _series_report(args, shells: dict[int, complex], extra_cfg: dict) -> int:
    value = sum(shells[k] for k in sorted(shells))
    last = max(shells)
    report = {
        "value": _c2(value),
        "last_shell_weight": last,
        "last_shell_magnitude": abs(shells[last]),
        "shells": {str(k): _c2(shells[k]) for k in sorted(shells)},
        "config": extra_cfg,
    }
    _emit(
        report,
        args.json,
        [
            f"value = {value}",
            f"last shell |lam| = {last} contributes {abs(shells[last]):.3e}",
        ],
    )
    return EXIT_OK


def cmd_series(args) -> int:
    order = args.order
    if args.which == "z":
        spec = _model_from_args(args, order)
        shells = model_mod.z_series_shells(spec, TruncationPolicy(order))
        return _series_report(args, shells, _config_block(args, model=args.model or args.graph))
    if args.which == "hciz":
        a = _parse_matrix_flag(args.a, args.N, "--a")
        b = _parse_matrix_flag(args.b, args.N, "--b")
        shells = model_mod.hciz_series_shells(SpectralMatrix(a), SpectralMatrix(b), TruncationPolicy(order))
        return _series_report(args, shells, _config_block(args))
    if args.which == "bgw":
        a = _parse_matrix_flag(args.a, args.N, "--a")
        b = _parse_matrix_flag(args.b, args.N, "--b")
        group = _parse_group(args.group)
        trunc = TruncationPolicy(order, q_max=args.qmax)
        terms = model_mod.bgw_q_terms(a, b, args.beta, args.qmax if group is Group.SU else 0, trunc)
        value = sum(v for _, v in terms) if group is Group.SU else terms[0][1]
        report = {
            "value": _c2(value),
            "q_blocks": {str(q): _c2(v) for q, v in terms},
            "config": _config_block(args, beta=args.beta, group=group.value),
        }
        _emit(
            report,
            args.json,
            [f"value = {value}"] + [f"  q = {q:+d}: {v}" for q, v in terms],
        )
        return EXIT_OK
    raise CliError(f"unknown series {args.which!r}")


def _build_case(args) -> mc.IdentityCase:
    kind = args.identity
    trunc = TruncationPolicy(args.order, q_max=args.qmax)
    if kind in ("orth-2a", "orth-2b", "orth-2c", "su-3bc", "su-4"):
        if args.N is None:
            raise CliError(f"{kind} needs --N")
        a = _parse_matrix_flag(args.a, args.N, "--a")
        b = _parse_matrix_flag(args.b, args.N, "--b")
        return mc.IdentityCase(
            kind=kind,
            n_dim=args.N,
            lam=_parse_partition(args.lam),
            mu=_parse_partition(args.mu) if kind != "su-4" else None,
            q=args.q,
            a=a,
            b=b,
        )
    if kind == "hciz" or kind == "bgw":
        if args.N is None:
            raise CliError(f"{kind} needs --N")
        a = _parse_matrix_flag(args.a, args.N, "--a")
        b = _parse_matrix_flag(args.b, args.N, "--b")
        group = _parse_group(args.group)
        if kind == "hciz":
            return mc.IdentityCase(kind=kind, n_dim=args.N, a=a, b=b, group=group, trunc=trunc)
        return mc.IdentityCase(
            kind=kind, n_dim=args.N, a=a, b=b, beta=args.beta, group=group, trunc=trunc
        )
    if kind == "schur-moment":
        if args.lams is None:
            raise CliError("schur-moment needs --lams (one partition per vertex)")
        spec = _model_from_args(args, args.order)
        lams = tuple(_parse_partition(part) for part in args.lams.split(";"))
        return mc.IdentityCase(kind=kind, model=spec, lams=lams)
    if kind == "z-integral":
        spec = _model_from_args(args, args.order)
        return mc.IdentityCase(kind=kind, model=spec, trunc=trunc)
    raise CliError(f"unknown identity {kind!r}; known: {', '.join(mc.KNOWN_KINDS)}")


def cmd_verify(args) -> int:
    case = _build_case(args)
    report = mc.verify(case, samples=args.samples, seed=args.seed)
    payload = report.to_json_dict()
    payload["config"] = _config_block(args)
    z_text = "degenerate (abs comparison)" if report.z is None else f"z = {report.z:.3f}"
    _emit(
        payload,
        args.json,
        [
            f"identity {case.kind}: mc = {report.estimate.mean}, closed = {report.closed}",
            f"stderr = {report.estimate.std_error:.3e}, {z_text}",
            "PASS" if report.passed else "FAIL",
        ],
    )
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def cmd_kp_check(args) -> int:
    spec = parse_tau_spec(args.tau)
    try:
        base_vals = (
            [float(v) for v in args.base.split(",")]
            if args.base
            else [0.0] * spec.trunc.max_weight
        )
    except ValueError:
        raise CliError(f"--base: expected comma-separated numbers, got {args.base!r}")
    base = PowerSums(base_vals).padded(spec.trunc.max_weight)
    res = tau_mod.kp_residual(spec, base, args.step)
    passed = res.relative <= args.rel_bound or res.absolute <= args.abs_bound
    payload = {
        "residual_abs": res.absolute,
        "residual_rel": res.relative,
        "max_term": res.max_term,
        "pass": passed,
        "config": _config_block(args, rel_bound=args.rel_bound, abs_bound=args.abs_bound, tau=args.tau),
    }
    _emit(
        payload,
        args.json,
        [
            f"KP residual: abs = {res.absolute:.3e}, relative = {res.relative:.3e} "
            f"(max term {res.max_term:.3e})",
            "PASS" if passed else "FAIL",
        ],
    )
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def cmd_suite(args) -> int:
    results = suite_mod.run_all(samples=args.samples, seed=args.seed, step=args.step)
    payload = {
        "criteria": [
            {
                "index": r.index,
                "name": r.name,
                "pass": r.passed,
                "detail": r.detail,
                "seconds": round(r.seconds, 2),
            }
            for r in results
        ],
        "pass": all(r.passed for r in results),
        "config": _config_block(args),
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for r in results:
            print(r.line())
        print("SUITE", "PASS" if payload["pass"] else "FAIL")
    return EXIT_OK if payload["pass"] else EXIT_VERIFICATION_FAILED


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ribbontau",
        description="Corner-matrix models on ribbon graphs: series, Monte Carlo verification, KP checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", help="graph inspection")
    gsub = g.add_subparsers(dest="graph_command", required=True)
    gi = gsub.add_parser("info", help="V, n, F, chi, monodromy words, dual")
    gi.add_argument("--graph", required=True, help="graph JSON file")
    _add_common(gi)
    gi.set_defaults(fn=cmd_graph_info)

    s = sub.add_parser("series", help="evaluate a partition-function series")
    s.add_argument("which", choices=["z", "hciz", "bgw"])
    s.add_argument("--model", help="model JSON file (for z)")
    s.add_argument("--graph", help="graph JSON file (alternative to --model)")
    s.add_argument("--corners", help="corner JSON file (alternative to --model)")
    s.add_argument("--couplings", help="per-vertex couplings 'p_infinity;0.1,0.2' (default p_infinity)")
    s.add_argument("--mode", default="vertex", choices=["vertex", "face"])
    s.add_argument("--convention", default="calibrated", choices=["calibrated", "n-rescaled"])
    s.add_argument("--N", type=int, help="matrix dimension (hciz, bgw)")
    s.add_argument("--a", help="eigenvalues 'x,y,...' or @matrix.json")
    s.add_argument("--b", help="eigenvalues 'x,y,...' or @matrix.json")
    s.add_argument("--beta", type=float, default=1.0, help="BGW coupling")
    s.add_argument("--group", default="u", help="u or su (bgw)")
    s.add_argument("--order", type=int, default=DEFAULT_ORDER, help="series truncation |lam| <= D")
    s.add_argument("--qmax", type=int, default=DEFAULT_QMAX, help="SU q-sum truncation")
    _add_common(s)
    s.set_defaults(fn=cmd_series)

    v = sub.add_parser("verify", help="Monte Carlo verification of one identity")
    v.add_argument("identity", choices=list(mc.KNOWN_KINDS))
    v.add_argument("--N", type=int)
    v.add_argument("--lam", help="partition '2,1' (empty string for the empty partition)")
    v.add_argument("--mu", help="partition")
    v.add_argument("--q", type=int, help="determinant power (orth-2b/2c)")
    v.add_argument("--a", help="eigenvalues 'x,y,...' or @matrix.json")
    v.add_argument("--b", help="eigenvalues 'x,y,...' or @matrix.json")
    v.add_argument("--beta", type=float, default=1.0)
    v.add_argument("--group", default="u")
    v.add_argument("--model", help="model JSON file (schur-moment, z-integral)")
    v.add_argument("--graph", help="graph JSON file (alternative to --model)")
    v.add_argument("--corners", help="corner JSON file (alternative to --model)")
    v.add_argument("--couplings", help="per-vertex couplings 'p_infinity;0.1,0.2' (default p_infinity)")
    v.add_argument("--mode", default="vertex", choices=["vertex", "face"])
    v.add_argument("--convention", default="calibrated", choices=["calibrated", "n-rescaled"])
    v.add_argument("--lams", help="semicolon-separated partitions, one per vertex")
    v.add_argument("--order", type=int, default=DEFAULT_ORDER)
    v.add_argument("--qmax", type=int, default=DEFAULT_QMAX)
    v.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_common(v)
    v.set_defaults(fn=cmd_verify)

    k = sub.add_parser("kp-check", help="KP residual of a tau spec")
    k.add_argument("--tau", required=True, help="tau spec JSON file")
    k.add_argument("--base", help="base point p values 'p1,p2,...' (default 0)")
    k.add_argument("--step", type=float, default=DEFAULT_STEP)
    k.add_argument("--rel-bound", type=float, default=1e-4, dest="rel_bound")
    k.add_argument("--abs-bound", type=float, default=1e-8, dest="abs_bound")
    _add_common(k)
    k.set_defaults(fn=cmd_kp_check)

    su = sub.add_parser("suite", help="run the whole acceptance battery")
    su.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    su.add_argument("--seed", type=int, default=DEFAULT_SEED)
    su.add_argument("--step", type=float, default=DEFAULT_STEP)
    _add_common(su)
    su.set_defaults(fn=cmd_suite)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, model_mod.ScopeError, model_mod.SingularMatrixError,
            mc.ConfigurationError, tau_mod.SpecializationError, ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())

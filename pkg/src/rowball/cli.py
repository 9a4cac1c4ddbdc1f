"""Command-line front end.

Parses tuple/automorphism/model files, runs the requested computation and
emits a human-readable or machine-readable (JSON) report.  Exit codes:
0 success, 2 validation error (bad input), 3 certification failure
(a computed object violated its own invariants).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import charfun as cf
from . import contraction as ct
from . import invariants as inv
from . import io as fio
from . import mobius as mb
from . import projrep as pr
from .errors import CertificationError, RowballError, ValidationError
from .numerics import DEFAULT_TOL, ToleranceConfig

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CERTIFICATION = 3

TOL_ENV_VAR = "ROWBALL_TOL"


def base_tolerance() -> ToleranceConfig:
    """Default tolerances, with residual_abs overridable via ROWBALL_TOL."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return DEFAULT_TOL
    try:
        residual = float(raw)
    except ValueError as exc:
        raise ValidationError(f"{TOL_ENV_VAR} must be a float, got {raw!r}") from exc
    return ToleranceConfig(
        rank_rel=DEFAULT_TOL.rank_rel,
        residual_abs=residual,
        fixed_point_abs=DEFAULT_TOL.fixed_point_abs,
        max_iter=DEFAULT_TOL.max_iter,
    )


def _num(v):
    return fio.encode_number(v)


def _gamma_payload(g: inv.GammaValue):
    p, m, q = g.encode()
    return {"p": p, "m": m, "q": q}


def _load_tuple(path, tol):
    return fio.parse_tuple_data(fio.load_json(path), path, tol)


def _load_aut(path, tol):
    return fio.parse_aut_data(fio.load_json(path), path, tol)


def _cmd_check(path, tol, args):
    t = _load_tuple(path, tol)
    gram = t.row_gram()
    top = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1])
    verdict = ct.is_pure(t)
    return {
        "row_contraction": True,
        "gram_top_eigenvalue": top,
        "n": t.n,
        "dim": t.dim,
        "purity": verdict if verdict != "indeterminate" else "inconclusive",
    }


def _cmd_gamma(path, tol, args):
    t = _load_tuple(path, tol)
    g = inv.gamma(t)
    report = cf.charfun_degree(t)
    return {
        "gamma": _gamma_payload(g),
        "degree_chain": report.chain,
        "stabilized_at": report.stabilized_at,
        "hc_dim": ct.hc_subspace(t).dim,
    }


def _cmd_classify(path, tol, args):
    t = _load_tuple(path, tol)
    g = inv.gamma(t)
    return {"gamma": _gamma_payload(g), "labels": sorted(inv.classify(g))}


def _cmd_decompose(path, tol, args):
    t = _load_tuple(path, tol)
    dec = inv.decompose(t)
    rec = dec.reconstruct()
    err = max(float(np.linalg.norm(a - b, 2)) for a, b in zip(rec, t.mats))
    return {
        "degree": dec.degree,
        "dims": {"isometric": dec.H_v.dim, "nilpotent": dec.H_nil.dim, "coisometric": dec.H_c.dim},
        "reconstruction_residual": err,
    }


def _cmd_charfun(path, tol, args):
    t = _load_tuple(path, tol)
    out = {}
    if args.degree or args.coeffs is None:
        report = cf.charfun_degree(t)
        out["degree"] = _num(report.degree if not math.isinf(report.degree) else float("inf"))
        out["chain"] = report.chain
        out["stabilized_at"] = report.stabilized_at
    if args.coeffs is not None:
        c = cf.charfun_coeffs(t, args.coeffs)
        out["cutoff"] = c.cutoff
        out["defect_dims"] = {"out": c.out_dim, "in": c.in_dim}
        out["constant"] = fio.encode_complex_matrix(c.constant)
        out["coefficients"] = {
            "".join(map(str, w)): fio.encode_complex_matrix(mat)
            for w, mat in sorted(c.coeffs.items())
        }
    return out


def _cmd_poisson(path, tol, args):
    t = _load_tuple(path, tol)
    k = ct.poisson_kernel(t, args.depth)
    gram = k.matrix.conj().T @ k.matrix
    phi_pow = np.eye(t.dim, dtype=complex)
    for _ in range(args.depth + 1):
        phi_pow = t.cp_map(phi_pow)
    residual = float(np.linalg.norm(gram + phi_pow - np.eye(t.dim), 2))
    return {
        "depth": args.depth,
        "defect_rank": k.defect_rank,
        "kernel_shape": list(k.matrix.shape),
        "telescoping_residual": residual,
        "kernel_dim": ct.hc_subspace(t).dim,
    }


def _cmd_wold(path, tol, args):
    t = _load_tuple(path, tol)
    w = inv.wold(t)
    return {
        "multiplicity": w.multiplicity,
        "wandering_dim": w.wandering.dim,
        "pure_dim": w.pure_part.dim,
        "unitary_dim": w.unitary_part.dim,
    }


def _run_tuple_command(args, handler):
    tol = base_tolerance()
    reports = []
    if getattr(args, "parallel", False) and len(args.files) > 1:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda p: handler(p, tol, args), args.files))
    else:
        results = [handler(p, tol, args) for p in args.files]
    for path, res in zip(args.files, results):
        reports.append({"path": path, "sha256": fio.file_digest(path), "results": res})
    return reports


def _aut_report(args, tol):
    if args.aut_command == "compose":
        a = _load_aut(args.a, tol)
        b = _load_aut(args.b, tol)
        out = mb.compose(a, b)
        return {"element": fio.encode_aut(out)}
    if args.aut_command == "invert":
        a = _load_aut(args.a, tol)
        return {"element": fio.encode_aut(mb.invert(a))}
    if args.aut_command == "apply":
        a = _load_aut(args.a, tol)
        t = _load_tuple(args.tuple, tol)
        if t.n != a.n:
            raise ValidationError("tuple and automorphism have different n")
        mats = mb.aut_apply(a, list(t.mats))
        out = ct.new_row_tuple(mats, tol)
        return {"tuple": fio.encode_tuple(out)}
    a = _load_aut(args.a, tol)
    b = _load_aut(args.b, tol)
    lower, upper = mb.dE(a, b, args.depth)
    sup_lo, sup_hi = mb.sup_norm_est(a, b, args.depth)
    return {
        "metric_interval": [lower, upper],
        "sup_norm_interval": [sup_lo, sup_hi],
        "euclidean_term": float(np.linalg.norm(a.lam - b.lam)),
        "depth": args.depth,
    }


def _model_report(args, tol):
    model = fio.parse_model_data(fio.load_json(args.file), args.file, tol)
    realized = inv.realize(model)
    if args.model_command == "realize":
        payload = {
            "dim": realized.tuple.dim,
            "exclude_dim": realized.exclude.dim,
            "coupling_scale": realized.coupling_scale,
        }
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(fio.encode_tuple(realized.tuple), fh, indent=1, sort_keys=True)
            payload["written"] = args.out
        return payload
    structural = inv.gamma_structural(model)
    computed = inv.gamma(realized.tuple, realized.exclude)
    return {
        "structural": _gamma_payload(structural),
        "realized": _gamma_payload(computed),
        "agree": structural.as_tuple() == computed.as_tuple(),
    }


def _projrep_report(args, tol):
    a = _load_aut(args.a, tol)
    if args.projrep_command == "verify":
        rep = pr.u_operator(a, args.depth, args.buffer)
        return {
            "depth": args.depth,
            "buffer": args.buffer,
            "isometry_residual": rep.isometry_residual,
            "intertwining_residual": pr.intertwining_residual(rep),
            "tail_budget": pr.tail_budget(float(np.linalg.norm(a.lam)), args.depth, args.buffer),
        }
    b = _load_aut(args.b, tol)
    coc = pr.cocycle(a, b, args.depth, args.buffer)
    return {
        "c": [coc.c.real, coc.c.imag],
        "modulus_defect": coc.modulus_defect,
        "residual": coc.residual,
    }


def _coincide_report(args, tol):
    ta = _load_tuple(args.a, tol)
    tb = _load_tuple(args.b, tol)
    ga, gb = inv.gamma(ta), inv.gamma(tb)
    out = {"gamma_a": _gamma_payload(ga), "gamma_b": _gamma_payload(gb)}
    ca = cf.charfun_coeffs(ta, args.cutoff)
    cb = cf.charfun_coeffs(tb, args.cutoff)
    witness = cf.coincidence_search(ca, cb, seed=args.seed)
    if witness is None:
        out["coincidence"] = "inconclusive"
    else:
        out["coincidence"] = "witness_found"
        out["residual"] = witness.residual
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rowball",
        description="Invariants and characteristic-function data of row contractions.",
    )
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized searches")
    # the same options are accepted after the subcommand; SUPPRESS keeps the
    # top-level defaults when they are not repeated there
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def tuple_cmd(name, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.add_argument("files", nargs="+")
        p.add_argument("--parallel", action="store_true", help="fan out over input files")
        return p

    tuple_cmd("check", "certify a row contraction")
    tuple_cmd("gamma", "compute the invariant triple")
    tuple_cmd("classify", "invariant triple plus classification labels")
    tuple_cmd("decompose", "canonical triangularization")
    p = tuple_cmd("charfun", "characteristic function degree / coefficients")
    p.add_argument("--degree", action="store_true")
    p.add_argument("--coeffs", type=int, metavar="L", default=None)
    p = tuple_cmd("poisson", "truncated Poisson kernel diagnostics")
    p.add_argument("--depth", type=int, required=True)
    tuple_cmd("wold", "Wold data of a row isometry")

    p = sub.add_parser("model", help="structural model operations", parents=[common])
    msub = p.add_subparsers(dest="model_command", required=True)
    pr_ = msub.add_parser("realize", parents=[common])
    pr_.add_argument("file")
    pr_.add_argument("--out", default=None)
    pg = msub.add_parser("gamma", parents=[common])
    pg.add_argument("file")

    p = sub.add_parser("aut", help="ball automorphism operations", parents=[common])
    asub = p.add_subparsers(dest="aut_command", required=True)
    pc = asub.add_parser("compose", parents=[common])
    pc.add_argument("a")
    pc.add_argument("b")
    pi = asub.add_parser("invert", parents=[common])
    pi.add_argument("a")
    pa = asub.add_parser("apply", parents=[common])
    pa.add_argument("a")
    pa.add_argument("tuple")
    pm = asub.add_parser("metric", parents=[common])
    pm.add_argument("a")
    pm.add_argument("b")
    pm.add_argument("--depth", type=int, default=8)

    p = sub.add_parser("projrep", help="projective representation checks", parents=[common])
    psub = p.add_subparsers(dest="projrep_command", required=True)
    pv = psub.add_parser("verify", parents=[common])
    pv.add_argument("a")
    pv.add_argument("--depth", type=int, default=8)
    pv.add_argument("--buffer", type=int, default=2)
    pco = psub.add_parser("cocycle", parents=[common])
    pco.add_argument("a")
    pco.add_argument("b")
    pco.add_argument("--depth", type=int, default=8)
    pco.add_argument("--buffer", type=int, default=2)

    p = sub.add_parser("coincide", help="characteristic-function coincidence search", parents=[common])
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--cutoff", type=int, default=4)
    return parser


TUPLE_HANDLERS = {
    "check": _cmd_check,
    "gamma": _cmd_gamma,
    "classify": _cmd_classify,
    "decompose": _cmd_decompose,
    "charfun": _cmd_charfun,
    "poisson": _cmd_poisson,
    "wold": _cmd_wold,
}


def _py(obj):
    """Recursively convert numpy scalars/containers to plain Python values."""
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    return obj


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, value))


def _print_report(report, fmt):
    report = _py(report)
    if fmt == "json":
        print(json.dumps(report, sort_keys=True, separators=(",", ":")))
        return
    lines = []
    _flatten("", report, lines)
    for key, value in lines:
        if isinstance(value, float):
            print(f"{key}: {value:.12g}")
        else:
            print(f"{key}: {value}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol = base_tolerance()
        if args.command in TUPLE_HANDLERS:
            results = _run_tuple_command(args, TUPLE_HANDLERS[args.command])
            report = {
                "command": args.command,
                "inputs": [{"path": r["path"], "sha256": r["sha256"]} for r in results],
                "tolerances": fio.encode_tolerance(tol),
                "results": [r["results"] for r in results],
            }
        else:
            if args.command == "aut":
                results = _aut_report(args, tol)
                paths = [p for p in (getattr(args, "a", None), getattr(args, "b", None),
                                     getattr(args, "tuple", None)) if p]
            elif args.command == "model":
                results = _model_report(args, tol)
                paths = [args.file]
            elif args.command == "projrep":
                results = _projrep_report(args, tol)
                paths = [p for p in (args.a, getattr(args, "b", None)) if p]
            else:
                results = _coincide_report(args, tol)
                paths = [args.a, args.b]
            report = {
                "command": args.command,
                "inputs": [{"path": p, "sha256": fio.file_digest(p)} for p in paths],
                "tolerances": fio.encode_tolerance(tol),
                "results": results,
            }
        _print_report(report, args.format)
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CertificationError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except RowballError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

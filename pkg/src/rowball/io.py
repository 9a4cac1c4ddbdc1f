"""JSON file formats and report assembly for the command line.

Complex scalars are stored as [re, im] pairs; matrices as nested row
lists.  Infinite invariant entries serialize as the string "inf".
Reports are deterministic: fixed key order, inputs digested by sha256.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .contraction import RowTuple, new_row_tuple
from .errors import ParseError
from .invariants import ModelTuple
from .mobius import AutElement
from .numerics import DEFAULT_TOL, ToleranceConfig

__all__ = [
    "parse_complex_matrix",
    "encode_complex_matrix",
    "parse_tuple_data",
    "encode_tuple",
    "parse_aut_data",
    "encode_aut",
    "parse_model_data",
    "load_json",
    "file_digest",
    "tolerance_from_data",
    "encode_tolerance",
]


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def parse_complex_matrix(data, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise ParseError(f"{where}: row {i} is not a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{where}: row {i} has {len(row)} entries, expected {width}")
        vals = []
        for j, cell in enumerate(row):
            if not (isinstance(cell, list) and len(cell) == 2):
                raise ParseError(f"{where}: entry ({i},{j}) must be a [re, im] pair")
            try:
                vals.append(complex(float(cell[0]), float(cell[1])))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{where}: entry ({i},{j}) is not numeric") from exc
        rows.append(vals)
    return np.array(rows, dtype=complex)


def encode_complex_matrix(m: np.ndarray):
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def tolerance_from_data(data, where: str, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
    if data is None:
        return base
    if not isinstance(data, dict):
        raise ParseError(f"{where}: tolerances must be an object")
    known = {"rank_rel", "residual_abs", "fixed_point_abs", "max_iter"}
    bad = set(data) - known
    if bad:
        raise ParseError(f"{where}: unknown tolerance fields {sorted(bad)}")
    kwargs = {
        "rank_rel": base.rank_rel,
        "residual_abs": base.residual_abs,
        "fixed_point_abs": base.fixed_point_abs,
        "max_iter": base.max_iter,
    }
    kwargs.update({k: (int(v) if k == "max_iter" else float(v)) for k, v in data.items()})
    return ToleranceConfig(**kwargs)


def encode_tolerance(tol: ToleranceConfig):
    return {
        "rank_rel": tol.rank_rel,
        "residual_abs": tol.residual_abs,
        "fixed_point_abs": tol.fixed_point_abs,
        "max_iter": tol.max_iter,
    }


def parse_tuple_data(data, where: str, base_tol: ToleranceConfig = DEFAULT_TOL) -> RowTuple:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    for key in ("n", "dim", "matrices"):
        if key not in data:
            raise ParseError(f"{where}: missing field '{key}'")
    n, dim = data["n"], data["dim"]
    if not (isinstance(n, int) and n >= 1 and isinstance(dim, int) and dim >= 1):
        raise ParseError(f"{where}: n and dim must be positive integers")
    mats_data = data["matrices"]
    if not isinstance(mats_data, list) or len(mats_data) != n:
        raise ParseError(f"{where}: 'matrices' must list exactly n={n} matrices")
    mats = [parse_complex_matrix(m, f"{where}: matrix {i}") for i, m in enumerate(mats_data)]
    for i, m in enumerate(mats):
        if m.shape != (dim, dim):
            raise ParseError(f"{where}: matrix {i} is {m.shape}, expected ({dim},{dim})")
    tol = tolerance_from_data(data.get("tolerances"), where, base_tol)
    return new_row_tuple(mats, tol)


def encode_tuple(t: RowTuple):
    return {
        "n": t.n,
        "dim": t.dim,
        "matrices": [encode_complex_matrix(m) for m in t.mats],
        "tolerances": encode_tolerance(t.tol),
    }


def parse_aut_data(data, where: str, base_tol: ToleranceConfig = DEFAULT_TOL) -> AutElement:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    for key in ("n", "unitary", "lambda"):
        if key not in data:
            raise ParseError(f"{where}: missing field '{key}'")
    n = data["n"]
    if not (isinstance(n, int) and n >= 1):
        raise ParseError(f"{where}: n must be a positive integer")
    u = parse_complex_matrix(data["unitary"], f"{where}: unitary")
    lam_data = data["lambda"]
    if not (isinstance(lam_data, list) and len(lam_data) == n):
        raise ParseError(f"{where}: 'lambda' must have n={n} entries")
    lam = np.array(
        [complex(float(c[0]), float(c[1])) for c in lam_data], dtype=complex
    ) if all(isinstance(c, list) and len(c) == 2 for c in lam_data) else None
    if lam is None:
        raise ParseError(f"{where}: lambda entries must be [re, im] pairs")
    if u.shape != (n, n):
        raise ParseError(f"{where}: unitary is {u.shape}, expected ({n},{n})")
    tol = tolerance_from_data(data.get("tolerances"), where, base_tol)
    return AutElement(u, lam, tol)


def encode_aut(a: AutElement):
    return {
        "n": a.n,
        "unitary": encode_complex_matrix(a.unitary),
        "lambda": [[float(z.real), float(z.imag)] for z in a.lam],
    }


def parse_model_data(data, where: str, base_tol: ToleranceConfig = DEFAULT_TOL) -> ModelTuple:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    for key in ("n", "iso_multiplicity", "fock_depth"):
        if key not in data:
            raise ParseError(f"{where}: missing field '{key}'")
    nil = data.get("nil_block")
    coiso = data.get("coiso_block")
    couplings_data = data.get("couplings")
    couplings = None
    if couplings_data is not None:
        if not isinstance(couplings_data, dict):
            raise ParseError(f"{where}: couplings must be an object")
        couplings = {}
        for key, blocks in couplings_data.items():
            if key not in ("vn", "vc", "nc"):
                raise ParseError(f"{where}: unknown coupling position '{key}'")
            couplings[key] = [
                parse_complex_matrix(b, f"{where}: coupling {key}[{i}]")
                for i, b in enumerate(blocks)
            ]
    return ModelTuple(
        n=int(data["n"]),
        iso_multiplicity=int(data["iso_multiplicity"]),
        fock_depth=int(data["fock_depth"]),
        nil_block=parse_tuple_data(nil, f"{where}: nil_block", base_tol) if nil else None,
        coiso_block=parse_tuple_data(coiso, f"{where}: coiso_block", base_tol) if coiso else None,
        couplings=couplings,
        tol=tolerance_from_data(data.get("tolerances"), where, base_tol),
    )


def encode_number(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v

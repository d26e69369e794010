"""JSON schemas for the data the CLI moves around.

Conventions (lossless and language-neutral):

* complex scalar  -> two-element array ``[re, im]``; plain numbers are
  accepted on input as reals;
* matrix          -> row-major nested arrays of scalars;
* tuple           -> ``{"d": d, "n": n, "matrices": [matrix, ...]}``;
* polytope        -> ``{"dim": d, "vertices": [[...]],
                       "facets": [{"alpha": [...], "a": r}]}``
  (either representation may be omitted);
* frame           -> ``{"dim": d, "vectors": [[...]]}``;
* positive decomposition -> ``{"atoms": [[...]], "effects": [matrix, ...]}``;
* rank-one family -> ``{"lambdas": [matrix, ...], "betas": [...]}`` (betas
  optional; recomputed when absent);
* dilation        -> ``{"T": [...], "V": matrix, "scale": c,
                       "residuals": {...}}``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .dilation import Dilation, LambdaFamily, Povm, decompose_identity
from .frames import Frame, check_tight
from .sets import GenTuple, HermTuple, Polytope


class SchemaError(ValueError):
    """Structurally valid JSON that does not match the expected schema."""


def encode_scalar(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_scalar(obj) -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(t, (int, float)) for t in obj)):
        return complex(obj[0], obj[1])
    raise SchemaError(f"expected a number or [re, im] pair, got {obj!r}")


def encode_matrix(M) -> list[list[list[float]]]:
    M = np.asarray(M, dtype=complex)
    return [[encode_scalar(z) for z in row] for row in M]


def decode_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not isinstance(obj[0], list):
        raise SchemaError("expected a matrix as nested arrays")
    rows = [[decode_scalar(z) for z in row] for row in obj]
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SchemaError("matrix rows have unequal lengths")
    return np.array(rows, dtype=complex)


def encode_tuple(X: GenTuple) -> dict:
    return {"d": X.d, "n": X.n,
            "matrices": [encode_matrix(M) for M in X.matrices]}


def decode_tuple(obj, hermitian: bool = True,
                 herm_tol: float = 1e-9) -> GenTuple:
    if not isinstance(obj, dict) or "matrices" not in obj:
        raise SchemaError('expected {"d", "n", "matrices"}')
    mats = [decode_matrix(M) for M in obj["matrices"]]
    if "d" in obj and int(obj["d"]) != len(mats):
        raise SchemaError("declared d does not match matrix count")
    if "n" in obj and mats and int(obj["n"]) != mats[0].shape[0]:
        raise SchemaError("declared n does not match matrix size")
    try:
        return HermTuple(mats, herm_tol=herm_tol) if hermitian else GenTuple(mats)
    except Exception as exc:
        raise SchemaError(str(exc)) from exc


def encode_polytope(P: Polytope) -> dict:
    out: dict[str, Any] = {"dim": P.dim}
    if P.has_vertices:
        out["vertices"] = [[float(x) for x in v] for v in P.vertices]
    if P.has_facets:
        out["facets"] = [{"alpha": [float(x) for x in n], "a": float(a)}
                         for n, a in P.facets()]
    return out


def decode_polytope(obj) -> Polytope:
    if not isinstance(obj, dict) or "dim" not in obj:
        raise SchemaError('expected {"dim", "vertices"?, "facets"?}')
    verts = obj.get("vertices")
    facets = obj.get("facets")
    normals = offsets = None
    if facets is not None:
        try:
            normals = np.array([f["alpha"] for f in facets], dtype=float)
            offsets = np.array([f["a"] for f in facets], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad facet list: {exc}") from exc
    try:
        return Polytope(int(obj["dim"]),
                        vertices=None if verts is None else np.array(verts, float),
                        facet_normals=normals, facet_offsets=offsets)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def encode_frame(f: Frame) -> dict:
    return {"dim": f.dim, "vectors": [[float(x) for x in v] for v in f.vectors]}


def decode_frame(obj, tol: float = 1e-9) -> Frame:
    if not isinstance(obj, dict) or "vectors" not in obj:
        raise SchemaError('expected {"dim", "vectors"}')
    V = np.array(obj["vectors"], dtype=float)
    if "dim" in obj and int(obj["dim"]) != V.shape[1]:
        raise SchemaError("declared dim does not match vectors")
    return check_tight(V, tol=tol)


def decode_frame_vectors(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "vectors" not in obj:
        raise SchemaError('expected {"dim", "vectors"}')
    return np.array(obj["vectors"], dtype=float)


def decode_povm(obj, psd_tol: float = 1e-8, sum_tol: float = 1e-8) -> Povm:
    if not isinstance(obj, dict) or "atoms" not in obj or "effects" not in obj:
        raise SchemaError('expected {"atoms", "effects"}')
    atoms = np.array([[decode_scalar(z) for z in row] for row in obj["atoms"]])
    if np.max(np.abs(atoms.imag)) == 0.0:
        atoms = atoms.real
    effects = [decode_matrix(E) for E in obj["effects"]]
    try:
        return Povm(atoms=atoms, effects=effects, psd_tol=psd_tol,
                    sum_tol=sum_tol)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def decode_lambda_family(obj) -> LambdaFamily:
    if not isinstance(obj, dict) or "lambdas" not in obj:
        raise SchemaError('expected {"lambdas", "betas"?}')
    lams = [np.real(decode_matrix(L)) for L in obj["lambdas"]]
    if "betas" in obj:
        betas = np.array(obj["betas"], dtype=float)
        try:
            return LambdaFamily(np.stack(lams), betas)
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
    return decompose_identity(lams)


def decode_atoms(obj) -> np.ndarray:
    """Atom list format: {"points": [[...]]} with real or [re, im] entries."""
    if not isinstance(obj, dict) or "points" not in obj:
        raise SchemaError('expected {"points": [[...]]}')
    pts = np.array([[decode_scalar(z) for z in row] for row in obj["points"]])
    if np.max(np.abs(pts.imag)) == 0.0:
        pts = pts.real
    return pts


def encode_dilation(D: Dilation) -> dict:
    return {
        "T": [encode_matrix(T) for T in D.T],
        "V": encode_matrix(D.V),
        "scale": float(D.scale),
        "residuals": {k: float(v) for k, v in D.residuals.items()},
    }


def dumps_report(report: dict) -> str:
    """Canonical serialization: sorted keys, fixed separators, newline."""
    return json.dumps(report, sort_keys=True, separators=(",", ": "),
                      indent=1) + "\n"


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)

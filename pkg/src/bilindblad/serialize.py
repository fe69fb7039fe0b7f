"""JSON-compatible forms for matrices and generators.

A matrix is ``{"dim": d, "data": [[re, im], ...]}`` in row-major order; a
generator is ``{"hbar": ..., "H": matrix, "lindblads": [matrix, ...]}``.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .gksl import GKSLGenerator


class MatrixFormatError(ValueError):
    pass


def matrix_to_json(m: np.ndarray) -> dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "data": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def matrix_from_json(obj: Any, key: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"dim", "data"}:
        raise MatrixFormatError(f"{key}: expected an object with keys 'dim' and 'data'")
    d = obj["dim"]
    data = obj["data"]
    if not isinstance(d, int) or d < 1:
        raise MatrixFormatError(f"{key}.dim must be a positive integer")
    if not isinstance(data, list) or len(data) != d * d:
        raise MatrixFormatError(f"{key}.data must hold {d * d} [re, im] pairs")
    try:
        vals = [complex(float(re), float(im)) for re, im in data]
    except (TypeError, ValueError):
        raise MatrixFormatError(f"{key}.data entries must be [re, im] number pairs") from None
    return np.array(vals, dtype=complex).reshape(d, d)


def generator_to_json(G: GKSLGenerator) -> dict[str, Any]:
    return {
        "hbar": G.hbar,
        "H": matrix_to_json(G.H),
        "lindblads": [matrix_to_json(L) for L in G.lindblads],
    }


def generator_from_json(obj: Any, key: str = "generator") -> GKSLGenerator:
    if not isinstance(obj, dict):
        raise MatrixFormatError(f"{key}: expected an object")
    unknown = set(obj) - {"hbar", "H", "lindblads"}
    if unknown:
        raise MatrixFormatError(f"{key}: unknown keys {sorted(unknown)}")
    H = matrix_from_json(obj.get("H"), f"{key}.H")
    if np.linalg.norm(H - H.conj().T, 2) > 1e-12 * max(1.0, np.linalg.norm(H, 2)):
        raise MatrixFormatError(f"{key}.H is not Hermitian")
    Ls = tuple(matrix_from_json(L, f"{key}.lindblads[{k}]") for k, L in enumerate(obj.get("lindblads", [])))
    return GKSLGenerator(H, Ls, float(obj.get("hbar", 1.0)))

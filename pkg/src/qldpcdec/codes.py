"""CSS code constructions, validation, and manifest file I/O.

Ships four benchmark families: planar surface codes, a hypergraph product
code built from a theta-graph seed, a bivariate bicycle code, and a
generalized bicycle code (the m=1 special case of the bivariate
construction). Circulant shift data and the hypergraph seed live in JSON
files under ``data/``; the loader re-derives n and k by rank so a corrupted
data file cannot ship a mislabeled code.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2
from .bp import TannerGraph
from .gf2 import RowSpace, SparseBitMatrix


class CodeValidationError(ValueError):
    """A CSS structural invariant failed; the code object is unusable."""


@dataclass
class CodeSector:
    """Everything a decoder needs to work on one Pauli error type.

    ``check_matrix`` detects the errors of this sector (H_x for Z errors);
    ``stabilizer_space`` spans the harmless residuals (rowspace of the
    opposite matrix). Both caches are read-only once built.
    """

    check_matrix: SparseBitMatrix
    stabilizer_space: RowSpace
    t: int
    xi: int
    graph: TannerGraph = field(init=False)

    def __post_init__(self):
        self.graph = TannerGraph(self.check_matrix)

    @property
    def n(self) -> int:
        return self.check_matrix.cols

    def syndrome(self, error) -> np.ndarray:
        return gf2.mat_vec(self.check_matrix, error)


@dataclass
class CssCode:
    """A CSS stabilizer code given by its two parity-check matrices.

    ``d`` is declared metadata taken from the construction or manifest; it
    feeds the correction capability t = floor((d-1)/2) and is never
    recomputed (distance estimation is out of scope). ``k`` on the other
    hand is always validated against the rank formula.
    """

    name: str
    H_x: SparseBitMatrix
    H_z: SparseBitMatrix
    k: int
    d: int | None = None

    def __post_init__(self):
        self.validate()
        self._z_sector = None
        self._x_sector = None

    @property
    def n(self) -> int:
        return self.H_x.cols

    @property
    def t(self) -> int:
        if self.d is None:
            raise CodeValidationError(f"code {self.name!r} has no declared distance")
        return (self.d - 1) // 2

    @property
    def xi(self) -> int:
        """Max column weight of H_x: checks flippable by one Z error."""
        return self.H_x.max_column_weight()

    @property
    def xi_x(self) -> int:
        """Max column weight of H_z, for the X-decoding sector."""
        return self.H_z.max_column_weight()

    def validate(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise CodeValidationError(f"invalid code name {self.name!r}")
        if self.H_x.cols != self.H_z.cols:
            raise CodeValidationError("H_x and H_z disagree on qubit count")
        comm = (
            self.H_x.to_dense().astype(np.int32) @ self.H_z.to_dense().astype(np.int32).T
        ) % 2
        if comm.any():
            raise CodeValidationError("CSS commutation violated: H_x @ H_z^T != 0")
        k_rank = self.n - gf2.rank(self.H_x) - gf2.rank(self.H_z)
        if k_rank != self.k:
            raise CodeValidationError(
                f"declared k={self.k} inconsistent with rank formula (got {k_rank})"
            )
        if self.d is not None and self.d < 1:
            raise CodeValidationError(f"declared distance must be positive, got {self.d}")

    def z_sector(self) -> CodeSector:
        """Sector decoding Z errors: H_x checks, H_z-row residuals harmless."""
        if self._z_sector is None:
            self._z_sector = CodeSector(self.H_x, RowSpace(self.H_z), self.t, self.xi)
        return self._z_sector

    def x_sector(self) -> CodeSector:
        """Sector decoding X errors: H_z checks, H_x-row residuals harmless."""
        if self._x_sector is None:
            self._x_sector = CodeSector(self.H_z, RowSpace(self.H_x), self.t, self.xi_x)
        return self._x_sector

    def params_str(self) -> str:
        d = self.d if self.d is not None else "?"
        return f"[[{self.n},{self.k},{d}]]"


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def repetition_chain(n_bits: int) -> SparseBitMatrix:
    """(n-1) x n parity checks of the open-boundary repetition code."""
    return SparseBitMatrix(n_bits - 1, n_bits, [[i, i + 1] for i in range(n_bits - 1)])


def build_hgp(H, name: str | None = None, distance: int | None = None) -> CssCode:
    """Hypergraph product of a classical parity-check matrix with itself.

    A seed of shape m x n yields a quantum code on n^2 + m^2 qubits with

        H_x = [H (x) I_n | I_m (x) H^T],   H_z = [I_n (x) H | H^T (x) I_m].

    k is computed from the rank formula, never assumed.
    """
    if not isinstance(H, SparseBitMatrix):
        H = SparseBitMatrix.from_dense(np.atleast_2d(np.asarray(H)))
    if H.rows == 0 or H.cols == 0:
        raise CodeValidationError("empty seed matrix")
    Hd = H.to_dense()
    m, n = Hd.shape
    I_n = np.eye(n, dtype=np.uint8)
    I_m = np.eye(m, dtype=np.uint8)
    hx = np.hstack([np.kron(Hd, I_n), np.kron(I_m, Hd.T)]) % 2
    hz = np.hstack([np.kron(I_n, Hd), np.kron(Hd.T, I_m)]) % 2
    r = gf2.rank(H)
    k = (n - r) ** 2 + (m - r) ** 2
    return CssCode(
        name=name or f"hgp-{n * n + m * m}",
        H_x=SparseBitMatrix.from_dense(hx),
        H_z=SparseBitMatrix.from_dense(hz),
        k=k,
        d=distance,
    )


def build_surface(d: int) -> CssCode:
    """Planar (unrotated) surface code of odd distance d >= 3.

    Realized as the hypergraph product of the [d, 1, d] repetition chain,
    giving the [[d^2 + (d-1)^2, 1, d]] layout.
    """
    if d < 3 or d % 2 == 0:
        raise CodeValidationError(f"surface code distance must be odd and >= 3, got {d}")
    code = build_hgp(repetition_chain(d), name=f"surface-d{d}", distance=d)
    return code


def build_bicycle(l: int, m: int, a_terms, b_terms, name: str | None = None,
                  distance: int | None = None) -> CssCode:
    """Bivariate bicycle code from two shift polynomials on Z_l x Z_m.

    Each term (i, j) contributes the cyclic shift x^i y^j to its block;
    A and B commute because all blocks live in the same group algebra, so

        H_x = [A | B],   H_z = [B^T | A^T]

    is automatically CSS. ``m=1`` degenerates to the generalized bicycle
    construction on a single cyclic group.
    """
    if l < 1 or m < 1:
        raise CodeValidationError(f"group sizes must be >= 1, got l={l}, m={m}")

    def reduce_terms(terms, label):
        seen = []
        for (i, j) in terms:
            ij = (int(i) % l, int(j) % m)
            if ij in seen:
                raise CodeValidationError(
                    f"duplicate exponent pair {ij} in polynomial {label}: "
                    "the term cancels over GF(2)"
                )
            seen.append(ij)
        return seen

    def shift_sum(terms):
        size = l * m
        M = np.zeros((size, size), dtype=np.uint8)
        for (i, j) in terms:
            for r in range(size):
                rl, rm = divmod(r, m)
                M[r, ((rl + i) % l) * m + (rm + j) % m] ^= 1
        return M

    A = shift_sum(reduce_terms(a_terms, "A"))
    B = shift_sum(reduce_terms(b_terms, "B"))
    if ((A.astype(np.int32) @ B.astype(np.int32) - B.astype(np.int32) @ A.astype(np.int32)) % 2).any():
        raise CodeValidationError("circulant blocks do not commute")  # pragma: no cover
    hx = SparseBitMatrix.from_dense(np.hstack([A, B]))
    hz = SparseBitMatrix.from_dense(np.hstack([B.T, A.T]))
    k = 2 * l * m - gf2.rank(hx) - gf2.rank(hz)
    return CssCode(name=name or f"bicycle-{2 * l * m}", H_x=hx, H_z=hz, k=k, d=distance)


# ---------------------------------------------------------------------------
# manifest I/O
# ---------------------------------------------------------------------------

class ManifestError(ValueError):
    """A code manifest file is malformed or fails validation."""


def dumps_code(code: CssCode) -> str:
    """Render the text manifest: header line, then both matrices as row supports.

    An unknown distance is stored as 0 and maps back to None on load.
    """
    lines = [f"{code.name} {code.n} {code.k} {code.d if code.d is not None else 0}"]
    for label, M in (("Hx", code.H_x), ("Hz", code.H_z)):
        lines.append(f"{label} {M.rows} {M.cols}")
        for sup in M.row_support:
            lines.append(" ".join(str(int(c)) for c in sup))
    return "\n".join(lines) + "\n"


def save_code(code: CssCode, path):
    Path(path).write_text(dumps_code(code))


def _parse_matrix(lines, pos, label):
    if pos >= len(lines):
        raise ManifestError(f"missing {label} section")
    head = lines[pos].split()
    if len(head) != 3 or head[0] != label:
        raise ManifestError(f"expected '{label} rows cols', got {lines[pos]!r}")
    try:
        rows, cols = int(head[1]), int(head[2])
    except ValueError as exc:
        raise ManifestError(f"non-integer dimensions in {label} header") from exc
    if pos + 1 + rows > len(lines):
        raise ManifestError(f"{label} section truncated: expected {rows} row lines")
    support = []
    for line in lines[pos + 1: pos + 1 + rows]:
        try:
            support.append([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise ManifestError(f"non-integer column index in {label} row") from exc
    try:
        M = SparseBitMatrix(rows, cols, support)
    except ValueError as exc:
        raise ManifestError(f"bad {label} row support: {exc}") from exc
    return M, pos + 1 + rows


def load_code(path) -> CssCode:
    """Read a manifest written by save_code, re-validating every invariant."""
    return loads_code(Path(path).read_text())


def loads_code(text: str) -> CssCode:
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    if not lines:
        raise ManifestError("empty manifest")
    head = lines[0].split()
    if len(head) != 4:
        raise ManifestError(f"expected header 'name n k d', got {lines[0]!r}")
    name = head[0]
    try:
        n, k, d = int(head[1]), int(head[2]), int(head[3])
    except ValueError as exc:
        raise ManifestError("non-integer n/k/d in header") from exc
    hx, pos = _parse_matrix(lines, 1, "Hx")
    hz, pos = _parse_matrix(lines, pos, "Hz")
    if hx.cols != n or hz.cols != n:
        raise ManifestError(f"header declares n={n} but matrices have {hx.cols} columns")
    try:
        return CssCode(name=name, H_x=hx, H_z=hz, k=k, d=d if d > 0 else None)
    except CodeValidationError as exc:
        raise ManifestError(str(exc)) from exc


# ---------------------------------------------------------------------------
# shipped benchmark codes
# ---------------------------------------------------------------------------

_SURFACE_BUILTINS = {"surface-d3": 3, "surface-d5": 5, "surface-d7": 7}
_DATA_BUILTINS = {"gb-48": "gb_48.json", "gross": "gross.json", "hgp-145": "hgp_145.json"}

BUILTIN_NAMES = ("surface-d3", "surface-d5", "surface-d7", "hgp-145", "gb-48", "gross")

#: Branch budgets giving the weight-<=t guarantee at the shipped BP settings.
DEFAULT_ETA = {"gb-48": 48, "gross": 35, "surface-d7": 8, "hgp-145": 6}


def data_dir() -> Path:
    """Directory holding the shipped code data files (env QLDPC_DATA_DIR wins)."""
    override = os.environ.get("QLDPC_DATA_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def _load_data_code(filename: str) -> CssCode:
    path = data_dir() / filename
    try:
        spec = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise CodeValidationError(f"code data file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CodeValidationError(f"malformed code data file {path}: {exc}") from exc
    kind = spec.get("construction")
    if kind == "bicycle":
        code = build_bicycle(
            spec["l"], spec["m"], spec["a_terms"], spec["b_terms"],
            name=spec["name"], distance=spec["d"],
        )
    elif kind == "hgp":
        seed = SparseBitMatrix(spec["seed_rows"], spec["seed_cols"], spec["seed_support"])
        code = build_hgp(seed, name=spec["name"], distance=spec["d"])
    else:
        raise CodeValidationError(f"unknown construction {kind!r} in {path}")
    if code.n != spec["n"] or code.k != spec["k"]:
        raise CodeValidationError(
            f"data file {path} declares [[{spec['n']},{spec['k']}]] but the "
            f"construction gives [[{code.n},{code.k}]]"
        )
    return code


def build_builtin(name: str) -> CssCode:
    """Construct one of the shipped benchmark codes by name."""
    if name in _SURFACE_BUILTINS:
        return build_surface(_SURFACE_BUILTINS[name])
    if name in _DATA_BUILTINS:
        return _load_data_code(_DATA_BUILTINS[name])
    raise KeyError(f"unknown builtin code {name!r}; available: {', '.join(BUILTIN_NAMES)}")


def default_eta(code: CssCode) -> int:
    """Per-code branch budget; codes without a tuned value search every qubit."""
    return DEFAULT_ETA.get(code.name, code.n)

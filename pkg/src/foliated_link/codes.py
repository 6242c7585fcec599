"""CSS code construction, validation, logical-operator extraction and JSON persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gf2 import (
    BitMatrix,
    Gf2Poly,
    circulant,
    in_row_span,
    inverse,
    nullspace,
    poly_gcd,
    rank,
    rref,
)


class CodeValidationError(ValueError):
    """Raised when parity-check matrices do not define a usable CSS code."""


@dataclass(frozen=True, eq=False)
class CssCode:
    """A validated [[n, k]] CSS code.

    ``h_x`` rows are X-type checks and ``h_z`` rows Z-type checks; redundant
    rows are kept as given.  ``l_x[i]`` and ``l_z[i]`` form the i-th logical
    pair.  ``claimed_distance`` is carried as metadata and never verified.
    """

    name: str
    n: int
    k: int
    h_x: BitMatrix
    h_z: BitMatrix
    l_x: BitMatrix
    l_z: BitMatrix
    claimed_distance: int | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CssCode):
            return NotImplemented
        return (
            self.name == other.name
            and self.claimed_distance == other.claimed_distance
            and self.h_x == other.h_x
            and self.h_z == other.h_z
        )

    def __hash__(self) -> int:
        return hash((self.name, self.h_x, self.h_z))

    @property
    def key(self) -> bytes:
        """Identity of the check matrices, independent of name."""
        return self.h_x.words.tobytes() + b"|" + self.h_z.words.tobytes() + repr(
            (self.h_x.shape, self.h_z.shape)
        ).encode()

    def __repr__(self) -> str:
        d = self.claimed_distance if self.claimed_distance is not None else "?"
        return f"CssCode({self.name!r}, [[{self.n},{self.k},{d}]])"


def check_orthogonal(h_x: BitMatrix, h_z: BitMatrix) -> None:
    prod = (h_x @ h_z.T).to_dense()
    bad = np.argwhere(prod)
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise CodeValidationError(
            f"H_X row {i} and H_Z row {j} anticommute (H_X H_Z^T != 0)"
        )


def _independent_extension(base: BitMatrix, candidates: BitMatrix) -> BitMatrix:
    """Greedily pick candidate rows that are independent of ``base`` and earlier picks."""
    n = candidates.cols
    chosen: list[int] = []
    current = base
    r = rank(current)
    for i in range(candidates.rows):
        trial = BitMatrix.vstack([current, candidates.take_rows([i])])
        r_new = rank(trial)
        if r_new > r:
            chosen.append(i)
            current, r = trial, r_new
    if not chosen:
        return BitMatrix.zeros(0, n)
    return candidates.take_rows(chosen)


def logical_operators(h_x: BitMatrix, h_z: BitMatrix) -> tuple[BitMatrix, BitMatrix]:
    """Paired logical operators with ``L_X L_Z^T = I``.

    X logicals are drawn from ker(H_Z) modulo rowspan(H_X), Z logicals from
    ker(H_X) modulo rowspan(H_Z), both in elimination order; the Z set is
    then transformed by the inverse pairing matrix.
    """
    check_orthogonal(h_x, h_z)
    n = h_x.cols
    l_x = _independent_extension(h_x, nullspace(h_z))
    l_z = _independent_extension(h_z, nullspace(h_x))
    if l_x.rows != l_z.rows:
        raise CodeValidationError("logical X/Z counts differ; matrices are inconsistent")
    if l_x.rows == 0:
        return BitMatrix.zeros(0, n), BitMatrix.zeros(0, n)
    pairing = l_x @ l_z.T
    l_z = inverse(pairing).T @ l_z
    return l_x, l_z


def validate_css(
    name: str,
    h_x: BitMatrix,
    h_z: BitMatrix,
    claimed_distance: int | None = None,
) -> CssCode:
    if h_x.cols != h_z.cols:
        raise CodeValidationError(
            f"H_X has {h_x.cols} columns but H_Z has {h_z.cols}"
        )
    n = h_x.cols
    check_orthogonal(h_x, h_z)
    k = n - rank(h_x) - rank(h_z)
    if k <= 0:
        raise CodeValidationError("code encodes no logical qubits")
    l_x, l_z = logical_operators(h_x, h_z)
    code = CssCode(name, n, k, h_x, h_z, l_x, l_z, claimed_distance)
    check_invariants(code)
    return code


def check_invariants(code: CssCode) -> None:
    """Assert every CSS invariant; raises ``CodeValidationError`` on the first failure."""
    h_x, h_z, l_x, l_z = code.h_x, code.h_z, code.l_x, code.l_z
    check_orthogonal(h_x, h_z)
    if code.k != code.n - rank(h_x) - rank(h_z) or code.k < 0:
        raise CodeValidationError("k disagrees with n - rank(H_X) - rank(H_Z)")
    if l_x.shape != (code.k, code.n) or l_z.shape != (code.k, code.n):
        raise CodeValidationError("logical matrices have the wrong shape")
    if not (l_x @ h_z.T).is_zero():
        raise CodeValidationError("an X logical anticommutes with H_Z")
    if not (l_z @ h_x.T).is_zero():
        raise CodeValidationError("a Z logical anticommutes with H_X")
    if (l_x @ l_z.T) != BitMatrix.identity(code.k):
        raise CodeValidationError("L_X L_Z^T is not the identity")
    for i in range(code.k):
        if in_row_span(h_x, l_x.row(i)):
            raise CodeValidationError(f"X logical {i} is a stabilizer")
        if in_row_span(h_z, l_z.row(i)):
            raise CodeValidationError(f"Z logical {i} is a stabilizer")


def row_reduced(code: CssCode) -> CssCode:
    """Same code with redundant check rows removed (full-rank H_X, H_Z)."""

    def reduce(h: BitMatrix) -> BitMatrix:
        r, piv = rref(h)
        return r.take_rows(range(len(piv)))

    return validate_css(code.name, reduce(code.h_x), reduce(code.h_z), code.claimed_distance)


# builders -------------------------------------------------------------------

HAMMING_7 = [
    [1, 0, 1, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
]


def steane() -> CssCode:
    h = BitMatrix.from_dense(HAMMING_7)
    return validate_css("steane", h, h, claimed_distance=3)


def toric_edge(d: int, r: int, c: int, vertical: bool) -> int:
    """Edge index: horizontal edges first, then vertical, each row-major."""
    return (d * d if vertical else 0) + (r % d) * d + (c % d)


def toric(d: int) -> CssCode:
    """Toric code on a d x d periodic lattice; stars are X checks, plaquettes Z checks."""
    if d < 2:
        raise ValueError("toric code needs d >= 2")
    stars, plaquettes = [], []
    for r in range(d):
        for c in range(d):
            stars.append([
                toric_edge(d, r, c, False),
                toric_edge(d, r, c - 1, False),
                toric_edge(d, r, c, True),
                toric_edge(d, r - 1, c, True),
            ])
            plaquettes.append([
                toric_edge(d, r, c, False),
                toric_edge(d, r + 1, c, False),
                toric_edge(d, r, c, True),
                toric_edge(d, r, c + 1, True),
            ])
    n = 2 * d * d
    return validate_css(
        f"toric{d}",
        BitMatrix.from_supports(stars, n),
        BitMatrix.from_supports(plaquettes, n),
        claimed_distance=d,
    )


def generalized_bicycle(
    ell: int,
    a: Gf2Poly,
    b: Gf2Poly,
    name: str | None = None,
    claimed_distance: int | None = None,
) -> CssCode:
    """GB code with ``H_X = [A, B]`` and ``H_Z = [B^T, A^T]`` for circulants A, B."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not a or not b:
        raise ValueError("GB polynomials must be nonzero")
    A, B = circulant(ell, a), circulant(ell, b)
    h_x = BitMatrix.hstack([A, B])
    h_z = BitMatrix.hstack([B.T, A.T])
    g = poly_gcd(a, poly_gcd(b, Gf2Poly.cyclic_modulus(ell)))
    expected_k = 2 * (g.degree or 0)
    if expected_k == 0:
        raise CodeValidationError(
            f"degenerate GB choice: gcd(a, b, x^{ell}-1) = {g}, code encodes no logical qubits"
        )
    code = validate_css(name or f"gb{2 * ell}", h_x, h_z, claimed_distance)
    if code.k != expected_k:
        raise CodeValidationError(f"rank gives k={code.k} but 2 deg gcd gives {expected_k}")
    return code


GB48_A = (0, 2, 8, 15)
GB48_B = (0, 2, 12, 17)


def gb48() -> CssCode:
    """The [[48,6,8]] generalized bicycle code (distance is metadata only)."""
    return generalized_bicycle(
        24,
        Gf2Poly.from_exponents(GB48_A),
        Gf2Poly.from_exponents(GB48_B),
        name="gb48",
        claimed_distance=8,
    )


# persistence ----------------------------------------------------------------


def code_to_dict(code: CssCode) -> dict:
    return {
        "name": code.name,
        "n": code.n,
        "claimed_distance": code.claimed_distance,
        "h_x": code.h_x.to_dense().tolist(),
        "h_z": code.h_z.to_dense().tolist(),
    }


def code_from_dict(data: dict) -> CssCode:
    try:
        name = str(data["name"])
        n = int(data["n"])
        h_x = np.asarray(data["h_x"], dtype=np.int64).reshape(-1, n)
        h_z = np.asarray(data["h_z"], dtype=np.int64).reshape(-1, n)
        cd = data.get("claimed_distance")
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeValidationError(f"malformed code description: {exc}") from exc
    for label, h in (("h_x", h_x), ("h_z", h_z)):
        if not np.all((h == 0) | (h == 1)):
            raise CodeValidationError(f"{label} has entries other than 0/1")
    return validate_css(
        name,
        BitMatrix.from_dense(h_x),
        BitMatrix.from_dense(h_z),
        None if cd is None else int(cd),
    )


def save_code(code: CssCode, path) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(code_to_dict(code)) + "\n")


def load_code(path) -> CssCode:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CodeValidationError(f"{path}: not valid JSON ({exc})") from exc
    return code_from_dict(data)


BUILTIN = {
    "steane": steane,
    "gb48": gb48,
}


def builtin_or_file(name: str) -> CssCode:
    """Resolve ``steane``, ``gb48``, ``toricD`` or a JSON file path."""
    if name in BUILTIN:
        return BUILTIN[name]()
    if name.startswith("toric") and name[5:].isdigit():
        return toric(int(name[5:]))
    return load_code(name)

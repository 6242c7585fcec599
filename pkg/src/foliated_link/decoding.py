"""
Erasure decoding on a syndrome subgraph.

A logical row survives an erasure when some representative ``logical +
(stabilizer combination)`` has no support on the erased qubits.  Two
routes decide this:

* ``decode_greedy`` runs the greedy elimination of the protocol's decoder
  listing, erased qubit by erased qubit, on word-packed rows;
* ``decode_exact`` restricts logicals and stabilizers to the erased
  columns and asks ``solve_in_row_span`` for a witness.

The batch kernels used by the Monte Carlo driver work on the transposed
``column_table`` and only report which logicals survive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numba
import numpy as np

# TBB in this image is too old for numba; skip straight past it
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .codes import CssCode
from .foliation import SyndromeSubgraph, foliate
from .gf2 import n_words, solve_in_row_span

EXACT = "exact"
GREEDY = "greedy"
DECODERS = (EXACT, GREEDY)


@dataclass(frozen=True, eq=False)
class ErasurePattern:
    label: str
    erased: np.ndarray

    @classmethod
    def from_indices(cls, sub: SyndromeSubgraph, indices) -> ErasurePattern:
        mask = np.zeros(sub.n_qubits, dtype=bool)
        mask[np.asarray(list(indices), dtype=np.intp)] = True
        return cls(sub.label, mask)

    @property
    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.erased)]


@dataclass(frozen=True)
class DecodeOutcome:
    recoverable: frozenset[int]
    success: bool
    # logical index -> stabilizer-row coefficients (exact decoder only)
    witness: dict[int, np.ndarray] | None = None


def _check_pattern(sub: SyndromeSubgraph, e: ErasurePattern) -> np.ndarray:
    mask = np.asarray(e.erased, dtype=bool).reshape(-1)
    if mask.shape[0] != sub.n_qubits:
        raise ValueError(f"pattern has {mask.shape[0]} bits, subgraph has {sub.n_qubits} qubits")
    if e.label != sub.label:
        raise ValueError(f"pattern for {e.label!r} applied to {sub.label!r} subgraph")
    return mask


# kernels ----------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _greedy_one(stab, logi, erased, out):
    """Greedy erasure decoder on private copies of the packed rows."""
    m = stab.shape[0]
    k = logi.shape[0]
    nw = stab.shape[1]
    S = stab.copy()
    L = logi.copy()
    s_alive = np.ones(m, dtype=np.bool_)
    for j in range(k):
        out[j] = True
    remaining = k
    for q in range(erased.shape[0]):
        if not erased[q]:
            continue
        if remaining == 0:
            break
        wi = q >> 6
        bit = np.uint64(1) << np.uint64(q & 63)
        first = -1
        for s in range(m):
            if s_alive[s] and (S[s, wi] & bit):
                first = s
                break
        for j in range(k):
            if out[j] and (L[j, wi] & bit):
                if first >= 0:
                    for w in range(nw):
                        L[j, w] ^= S[first, w]
                else:
                    out[j] = False
                    remaining -= 1
        # R = stabilizers on q; replace by consecutive products, drop the last
        prev = -1
        for s in range(m):
            if s_alive[s] and (S[s, wi] & bit):
                if prev >= 0:
                    for w in range(nw):
                        S[prev, w] ^= S[s, w]
                prev = s
        if prev >= 0:
            s_alive[prev] = False


@numba.njit(cache=True, nogil=True)
def _lowest_bit(row, nw):
    for w in range(nw):
        x = row[w]
        if x:
            b = 0
            while not (x & np.uint64(1)):
                x >>= np.uint64(1)
                b += 1
            return w * 64 + b
    return -1


@numba.njit(cache=True, nogil=True)
def _exact_one(table, stab_words, erased, out):
    """Incremental elimination over erased qubits in the transposed view.

    Row e is the erased qubit's bitset over stabilizers (first
    ``stab_words`` words) and logicals.  A row whose stabilizer part
    reduces to zero proves every logical it still touches unrecoverable.
    """
    k = out.shape[0]
    nw = table.shape[1]
    n_erased = 0
    for q in range(erased.shape[0]):
        if erased[q]:
            n_erased += 1
    piv_rows = np.empty((n_erased, nw), dtype=np.uint64)
    piv_col = np.empty(n_erased, dtype=np.int64)
    npiv = 0
    row = np.empty(nw, dtype=np.uint64)
    for j in range(k):
        out[j] = True
    remaining = k
    for q in range(erased.shape[0]):
        if not erased[q]:
            continue
        for w in range(nw):
            row[w] = table[q, w]
        for p in range(npiv):
            c = piv_col[p]
            if (row[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
                for w in range(c >> 6, nw):
                    row[w] ^= piv_rows[p, w]
        c = _lowest_bit(row, stab_words)
        if c >= 0:
            for w in range(nw):
                piv_rows[npiv, w] = row[w]
            piv_col[npiv] = c
            npiv += 1
        else:
            for j in range(k):
                if out[j] and ((row[stab_words + (j >> 6)] >> np.uint64(j & 63)) & np.uint64(1)):
                    out[j] = False
                    remaining -= 1
            if remaining == 0:
                break


@numba.njit(cache=True, parallel=True)
def _exact_batch(table, stab_words, erased, out):
    for t in numba.prange(erased.shape[0]):
        _exact_one(table, stab_words, erased[t], out[t])


@numba.njit(cache=True, parallel=True)
def _greedy_batch(stab, logi, erased, out):
    for t in numba.prange(erased.shape[0]):
        _greedy_one(stab, logi, erased[t], out[t])


def recoverable_batch(sub: SyndromeSubgraph, erased: np.ndarray, decoder: str = EXACT) -> np.ndarray:
    """Per-trial recoverable-logical flags, shape ``(trials, k)``."""
    erased = np.ascontiguousarray(erased, dtype=np.bool_)
    if erased.ndim != 2 or erased.shape[1] != sub.n_qubits:
        raise ValueError(f"expected (trials, {sub.n_qubits}) erasure matrix")
    out = np.zeros((erased.shape[0], sub.k), dtype=np.bool_)
    if decoder == EXACT:
        _exact_batch(sub.column_table, n_words(sub.stabilizers.rows), erased, out)
    elif decoder == GREEDY:
        _greedy_batch(sub.stabilizers.words, sub.logicals.words, erased, out)
    else:
        raise ValueError(f"unknown decoder {decoder!r}")
    return out


# single-pattern API -------------------------------------------------------


def decode_greedy(sub: SyndromeSubgraph, e: ErasurePattern) -> DecodeOutcome:
    """Greedy decoder: erased qubits in ascending index, lowest-index stabilizer first.

    Consecutive products of the stabilizers acting on an erased qubit take
    the slots of all but the last of them; the last is dropped.
    """
    mask = _check_pattern(sub, e)
    out = np.zeros(sub.k, dtype=np.bool_)
    _greedy_one(sub.stabilizers.words, sub.logicals.words, mask, out)
    rec = frozenset(int(j) for j in np.flatnonzero(out))
    return DecodeOutcome(rec, len(rec) == sub.k)


def decode_exact(sub: SyndromeSubgraph, e: ErasurePattern) -> DecodeOutcome:
    """Logical j survives iff its erased slice lies in the span of the stabilizers' erased slices."""
    mask = _check_pattern(sub, e)
    cols = np.flatnonzero(mask)
    stab_e = sub.stabilizers.take_columns(cols)
    logi = sub.logicals.to_dense()[:, cols]
    recoverable, witness = set(), {}
    for j in range(sub.k):
        x = solve_in_row_span(stab_e, logi[j])
        if x is not None:
            recoverable.add(j)
            witness[j] = x
    return DecodeOutcome(frozenset(recoverable), len(recoverable) == sub.k, witness)


def decode(sub: SyndromeSubgraph, e: ErasurePattern, decoder: str = EXACT) -> DecodeOutcome:
    if decoder == EXACT:
        return decode_exact(sub, e)
    if decoder == GREEDY:
        return decode_greedy(sub, e)
    raise ValueError(f"unknown decoder {decoder!r}")


def apply_witness(sub: SyndromeSubgraph, logical: int, coeffs: np.ndarray) -> np.ndarray:
    """Logical row ``logical`` times the stabilizers selected by ``coeffs``."""
    stab = sub.stabilizers.to_dense().astype(np.int64)
    row = sub.logicals.row(logical).astype(np.int64) + coeffs.astype(np.int64) @ stab
    return (row & 1).astype(np.uint8)


# single-hop census --------------------------------------------------------

CENSUS_MAX_N = 20
_census_cache: dict[bytes, tuple[int, ...]] = {}


def census_table(code: CssCode) -> tuple[int, ...]:
    """Correctable site-1 data patterns for every survivor count ``j = 0..n``.

    Single hop with perfect repeaters: only Alice's transmitted layer can
    lose photons.  Success means all k primal logicals are recoverable.
    """
    if code.n > CENSUS_MAX_N:
        raise ValueError(f"enumeration infeasible for n={code.n} > {CENSUS_MAX_N}")
    cached = _census_cache.get(code.key)
    if cached is not None:
        return cached
    sub = foliate(code, 1).primal
    data_cols = [i for i, q in enumerate(sub.qubits) if q.site == 1 and q.kind == "data"]
    counts = []
    for j in range(code.n + 1):
        combos = list(itertools.combinations(range(code.n), code.n - j))
        erased = np.zeros((len(combos), sub.n_qubits), dtype=np.bool_)
        for t, c in enumerate(combos):
            erased[t, [data_cols[i] for i in c]] = True
        counts.append(int(recoverable_batch(sub, erased).all(axis=1).sum()))
    table = tuple(counts)
    _census_cache[code.key] = table
    return table


def correctable_pattern_census(code: CssCode, surviving: int) -> int:
    """Number of site-1 erasure patterns with ``surviving`` intact data qubits that decode."""
    if not 0 <= surviving <= code.n:
        raise ValueError(f"surviving count must be in [0, {code.n}]")
    return census_table(code)[surviving]

"""
Foliated linear-cluster syndrome graphs.

A chain with N hops has 2N+1 sites.  Every site holds the n data qubits of
the code followed by one ancilla per check row: odd sites carry H_Z-row
ancillas, even sites H_X-row ancillas.  After X-basis measurement of every
photon the surviving operators split into two independent subgraphs:

* primal: data at odd sites + ancillas at even sites, one stabilizer per
  H_X row centered on each odd site, logicals are L_X repeated on every odd
  site;
* dual: data at even sites + ancillas at odd sites, built the same way
  from H_Z and L_Z.

Alice's transmitted layers are the odd sites 1..2N-1; site 2N+1 is Bob's
local layer, so the primal subgraph has exactly N*n channel qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .codes import CssCode, code_from_dict, code_to_dict
from .gf2 import BitMatrix, n_words, pack_bits

DATA = "data"
ANCILLA = "ancilla"
PRIMAL = "primal"
DUAL = "dual"
CHANNEL = "channel"
INTERNAL = "internal"


class FoliationError(ValueError):
    pass


@dataclass(frozen=True)
class QubitId:
    site: int
    kind: str
    local: int
    global_index: int


@dataclass(frozen=True, eq=False)
class SyndromeSubgraph:
    label: str
    qubits: tuple[QubitId, ...]
    stabilizers: BitMatrix
    logicals: BitMatrix
    channel: np.ndarray
    # (center site, check row) for every stabilizer row
    stabilizer_origin: tuple[tuple[int, int], ...] = field(default=())

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def k(self) -> int:
        return self.logicals.rows

    @property
    def loss_class(self) -> list[str]:
        return [CHANNEL if c else INTERNAL for c in self.channel]

    @cached_property
    def global_indices(self) -> np.ndarray:
        return np.array([q.global_index for q in self.qubits], dtype=np.int64)

    @cached_property
    def local_of_global(self) -> dict[int, int]:
        return {q.global_index: i for i, q in enumerate(self.qubits)}

    @cached_property
    def column_table(self) -> np.ndarray:
        """Per-qubit bitset over stabilizer rows, then (word-aligned) logical rows.

        Shape ``(n_qubits, n_words(m) + n_words(k))``; this is the transposed
        view the batch decoders eliminate on.
        """
        stab = pack_bits(self.stabilizers.to_dense().T)
        logi = pack_bits(self.logicals.to_dense().T)
        stab = stab.reshape(self.n_qubits, n_words(self.stabilizers.rows))
        logi = logi.reshape(self.n_qubits, n_words(self.k))
        return np.ascontiguousarray(np.hstack([stab, logi]))


@dataclass(frozen=True, eq=False)
class FoliatedChain:
    code: CssCode
    hops: int
    primal: SyndromeSubgraph
    dual: SyndromeSubgraph
    site_offsets: tuple[int, ...]

    @property
    def sites(self) -> int:
        return 2 * self.hops + 1

    @property
    def total_qubits(self) -> int:
        return self.site_offsets[-1]

    def subgraph(self, label: str) -> SyndromeSubgraph:
        if label == PRIMAL:
            return self.primal
        if label == DUAL:
            return self.dual
        raise ValueError(f"unknown subgraph {label!r}")

    def locate(self, global_index: int) -> tuple[str, int]:
        """Subgraph label and local index of a global qubit."""
        for sub in (self.primal, self.dual):
            local = sub.local_of_global.get(global_index)
            if local is not None:
                return sub.label, local
        raise IndexError(f"qubit {global_index} not in chain of {self.total_qubits} qubits")


def ancilla_rows(code: CssCode, site: int) -> int:
    return code.h_z.rows if site % 2 else code.h_x.rows


def _build_subgraph(code, sites, offsets, label, data_parity, checks, logicals, hops):
    qubits = []
    index = {}
    for site in range(1, sites + 1):
        base = offsets[site - 1]
        if site % 2 == data_parity:
            for q in range(code.n):
                index[(site, DATA, q)] = len(qubits)
                qubits.append(QubitId(site, DATA, q, base + q))
        else:
            for a in range(ancilla_rows(code, site)):
                index[(site, ANCILLA, a)] = len(qubits)
                qubits.append(QubitId(site, ANCILLA, a, base + code.n + a))

    check_dense = checks.to_dense()
    stab_supports, origin = [], []
    data_sites = [s for s in range(1, sites + 1) if s % 2 == data_parity]
    for site in data_sites:
        for i in range(checks.rows):
            support = [index[(site, DATA, int(q))] for q in np.flatnonzero(check_dense[i])]
            for nb in (site - 1, site + 1):
                if 1 <= nb <= sites:
                    support.append(index[(nb, ANCILLA, i)])
            stab_supports.append(support)
            origin.append((site, i))

    logical_dense = logicals.to_dense()
    logical_supports = []
    for j in range(logicals.rows):
        cols = np.flatnonzero(logical_dense[j])
        logical_supports.append(
            [index[(site, DATA, int(q))] for site in data_sites for q in cols]
        )

    channel = np.zeros(len(qubits), dtype=bool)
    if label == PRIMAL:
        for i, q in enumerate(qubits):
            channel[i] = q.kind == DATA and q.site <= 2 * hops - 1
    channel.flags.writeable = False

    m = len(qubits)
    return SyndromeSubgraph(
        label=label,
        qubits=tuple(qubits),
        stabilizers=BitMatrix.from_supports(stab_supports, m),
        logicals=BitMatrix.from_supports(logical_supports, m),
        channel=channel,
        stabilizer_origin=tuple(origin),
    )


def foliate(code: CssCode, hops: int) -> FoliatedChain:
    """Build the primal and dual syndrome graphs of a ``hops``-hop chain."""
    if int(hops) != hops or hops < 1:
        raise FoliationError("hops must be an integer >= 1")
    hops = int(hops)
    sites = 2 * hops + 1
    offsets = [0]
    for site in range(1, sites + 1):
        offsets.append(offsets[-1] + code.n + ancilla_rows(code, site))
    primal = _build_subgraph(code, sites, offsets, PRIMAL, 1, code.h_x, code.l_x, hops)
    dual = _build_subgraph(code, sites, offsets, DUAL, 0, code.h_z, code.l_z, hops)
    return FoliatedChain(code, hops, primal, dual, tuple(offsets))


def subgraph_consistency_check(chain: FoliatedChain) -> dict:
    """Verify the structural invariants of both subgraphs and return row/qubit counts."""
    code = chain.code
    report = {}
    seen = set()
    for sub, checks, logicals in (
        (chain.primal, code.h_x, code.l_x),
        (chain.dual, code.h_z, code.l_z),
    ):
        label = sub.label
        stab = sub.stabilizers.to_dense()
        logi = sub.logicals.to_dense()
        is_data = np.array([q.kind == DATA for q in sub.qubits])
        sites = np.array([q.site for q in sub.qubits])
        local = np.array([q.local for q in sub.qubits])
        for g in sub.global_indices:
            if int(g) in seen:
                raise FoliationError(f"qubit {g} appears in both subgraphs")
            seen.add(int(g))

        for r, (site, i) in enumerate(sub.stabilizer_origin):
            row = stab[r]
            on_site = is_data & (sites == site)
            data_cols = local[on_site & (row == 1)]
            expected = np.flatnonzero(checks.row(i))
            if np.any(row[is_data & (sites != site)]):
                raise FoliationError(f"{label} stabilizer {r} (site {site}) has off-site data")
            if not np.array_equal(np.sort(data_cols), expected):
                raise FoliationError(
                    f"{label} stabilizer {r} (site {site}, row {i}) data support mismatch"
                )
            anc = np.flatnonzero(row & ~is_data)
            want = [s for s in (site - 1, site + 1) if 1 <= s <= chain.sites]
            got = sorted((int(sites[a]), int(local[a])) for a in anc)
            if got != [(s, i) for s in want]:
                raise FoliationError(
                    f"{label} stabilizer {r} (site {site}, row {i}) ancillas {got}"
                )

        data_sites = sorted(set(sites[is_data].tolist()))
        for j in range(sub.k):
            row = logi[j]
            if np.any(row[~is_data]):
                raise FoliationError(f"{label} logical {j} touches an ancilla")
            for site in data_sites:
                mask = is_data & (sites == site)
                restricted = np.zeros(code.n, dtype=np.uint8)
                restricted[local[mask]] = row[mask]
                if not np.array_equal(restricted, logicals.row(j)):
                    raise FoliationError(f"{label} logical {j} differs from the code at site {site}")

        # every per-site data slice must commute with that site's own checks
        site_checks = code.h_z if label == PRIMAL else code.h_x
        rows = np.vstack([stab, logi]) if logi.size else stab
        for site in data_sites:
            mask = is_data & (sites == site)
            block = np.zeros((rows.shape[0], code.n), dtype=np.uint8)
            block[:, local[mask]] = rows[:, mask]
            clash = (block.astype(np.int64) @ site_checks.to_dense().T.astype(np.int64)) & 1
            if np.any(clash):
                r = int(np.argwhere(clash)[0][0])
                raise FoliationError(
                    f"{label} row {r} does not commute with the site-{site} checks"
                )

        for q, ch in zip(sub.qubits, sub.channel):
            want_channel = label == PRIMAL and q.kind == DATA and q.site <= 2 * chain.hops - 1
            if bool(ch) != want_channel:
                raise FoliationError(f"{label} qubit {q.global_index} (site {q.site}) misclassified")

        report[label] = {
            "qubits": sub.n_qubits,
            "stabilizers": sub.stabilizers.rows,
            "logicals": sub.k,
            "channel_qubits": int(sub.channel.sum()),
        }
    if len(seen) != chain.total_qubits:
        raise FoliationError("subgraphs do not cover every qubit exactly once")
    if report[PRIMAL]["channel_qubits"] != chain.hops * code.n:
        raise FoliationError("primal channel-qubit count is not hops * n")
    report["total_qubits"] = chain.total_qubits
    return report


# JSON dump --------------------------------------------------------------


def chain_to_dict(chain: FoliatedChain) -> dict:
    def rows(m: BitMatrix, sub: SyndromeSubgraph):
        g = sub.global_indices
        return [[int(x) for x in sorted(g[m.support(r)])] for r in range(m.rows)]

    qubits = []
    for sub in (chain.primal, chain.dual):
        for q, ch in zip(sub.qubits, sub.channel):
            qubits.append({
                "global": q.global_index,
                "site": q.site,
                "kind": q.kind,
                "local": q.local,
                "subgraph": sub.label,
                "loss_class": CHANNEL if ch else INTERNAL,
            })
    qubits.sort(key=lambda d: d["global"])
    return {
        "code": code_to_dict(chain.code),
        "hops": chain.hops,
        "sites": chain.sites,
        "qubits": qubits,
        "primal": {
            "stabilizers": rows(chain.primal.stabilizers, chain.primal),
            "logicals": rows(chain.primal.logicals, chain.primal),
        },
        "dual": {
            "stabilizers": rows(chain.dual.stabilizers, chain.dual),
            "logicals": rows(chain.dual.logicals, chain.dual),
        },
    }


def chain_from_dict(data: dict) -> FoliatedChain:
    """Rebuild a chain from its dump and verify the stored rows match."""
    try:
        code = code_from_dict(data["code"])
        hops = int(data["hops"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FoliationError(f"malformed chain description: {exc}") from exc
    chain = foliate(code, hops)
    fresh = chain_to_dict(chain)
    for label in (PRIMAL, DUAL):
        if label in data and data[label] != fresh[label]:
            raise FoliationError(f"stored {label} rows do not match the rebuilt chain")
    return chain

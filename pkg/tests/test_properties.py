"""Randomized invariants; the four headline suites each run 10^4 cases."""

from functools import lru_cache

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from foliated_link.analysis import cost
from foliated_link.codes import CodeValidationError, gb48, generalized_bicycle, steane, toric
from foliated_link.decoding import recoverable_batch
from foliated_link.foliation import DATA, PRIMAL, foliate
from foliated_link.gf2 import BitMatrix, Gf2Poly, circulant, poly_gcd, rank, solve_in_row_span

MANY = settings(max_examples=10_000, deadline=None)
SOME = settings(max_examples=400, deadline=None)


@st.composite
def bit_matrices(draw, max_rows=64, max_cols=64):
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.1, 0.5, 0.9]))
    rng = np.random.default_rng(seed)
    return (rng.random((rows, cols)) < density).astype(np.uint8), rng


polys = st.integers(1, 2**16 - 1).map(Gf2Poly)


# GF(2) algebra -----------------------------------------------------------


@MANY
@given(bit_matrices())
def test_gf2_identities(case):
    dense, rng = case
    m = BitMatrix.from_dense(dense)
    r = rank(m)
    assert r == rank(m.T)
    assert r <= min(m.shape)
    x = rng.integers(0, 2, m.rows, dtype=np.uint8)
    v = (x.astype(np.int64) @ dense.astype(np.int64)) & 1
    coeffs = solve_in_row_span(m, v)
    assert coeffs is not None
    assert np.array_equal((coeffs.astype(np.int64) @ dense.astype(np.int64)) & 1, v)


@SOME
@given(st.integers(1, 16), polys, polys)
def test_circulants_multiply_and_commute(ell, a, b):
    A, B = circulant(ell, a), circulant(ell, b)
    assert A @ B == circulant(ell, (a * b) % Gf2Poly.cyclic_modulus(ell))
    assert A @ B == B @ A


@SOME
@given(st.integers(1, 16), polys)
def test_circulant_rank_from_gcd(ell, a):
    mod = Gf2Poly.cyclic_modulus(ell)
    a = a % mod
    expected = ell - poly_gcd(a, mod).degree if a.bits else 0
    assert rank(circulant(ell, a)) == expected


@SOME
@given(polys, polys)
def test_gcd_divides_both(a, b):
    g = poly_gcd(a, b)
    assert a % g == Gf2Poly(0) and b % g == Gf2Poly(0)
    assert g.bits >> g.degree == 1


@SOME
@given(st.integers(2, 12), polys, polys)
def test_gb_dimension_formula(ell, a, b):
    mod = Gf2Poly.cyclic_modulus(ell)
    a, b = a % mod, b % mod
    assume(a.bits and b.bits)
    try:
        code = generalized_bicycle(ell, a, b)
    except CodeValidationError as exc:
        assert "no logical" in str(exc)
        return
    assert code.k == 2 * poly_gcd(a, poly_gcd(b, mod)).degree
    assert (code.h_x @ code.h_z.T).is_zero()


# foliation orthogonality --------------------------------------------------

POOL = ("steane", "toric2", "toric3", "gb48", "gb12")


@lru_cache(maxsize=None)
def chain_for(name, hops):
    make = {
        "steane": steane,
        "toric2": lambda: toric(2),
        "toric3": lambda: toric(3),
        "gb48": gb48,
        "gb12": lambda: generalized_bicycle(6, Gf2Poly.from_exponents([0, 1]), Gf2Poly.from_exponents([0, 3])),
    }[name]
    chain = foliate(make(), hops)
    out = {}
    for sub in (chain.primal, chain.dual):
        is_data = np.array([q.kind == DATA for q in sub.qubits])
        sites = np.array([q.site for q in sub.qubits])
        local = np.array([q.local for q in sub.qubits])
        checks = chain.code.h_z if sub.label == PRIMAL else chain.code.h_x
        out[sub.label] = (sub.stabilizers.to_dense(), sub.logicals.to_dense(), is_data, sites, local, checks.to_dense())
    return chain.code, out


@MANY
@given(st.sampled_from(POOL), st.integers(1, 3), st.sampled_from(["primal", "dual"]), st.integers(0, 2**32 - 1))
def test_foliated_operators_commute_with_site_checks(name, hops, label, seed):
    code, data = chain_for(name, hops)
    stab, logi, is_data, sites, local, checks = data[label]
    rng = np.random.default_rng(seed)
    row = (rng.integers(0, 2, stab.shape[0]) @ stab.astype(np.int64)) & 1
    if rng.random() < 0.5:
        row = (row + logi[rng.integers(logi.shape[0])]) & 1
    for site in np.unique(sites[is_data]):
        mask = is_data & (sites == site)
        block = np.zeros(code.n, dtype=np.int64)
        block[local[mask]] = row[mask]
        assert not ((checks.astype(np.int64) @ block) & 1).any()
    # stabilizers are ancilla-bridged: every row touches at least one ancilla
    assert np.all((stab & ~is_data).any(axis=1))


# erasure monotonicity -----------------------------------------------------


@lru_cache(maxsize=None)
def sub_for(name, hops, label):
    chain = foliate({"steane": steane, "toric3": lambda: toric(3), "gb48": gb48}[name](), hops)
    return chain.subgraph(label)


@MANY
@given(
    st.sampled_from(["steane", "toric3", "gb48"]),
    st.integers(1, 3),
    st.sampled_from(["primal", "dual"]),
    st.floats(0.0, 0.6),
    st.integers(0, 2**32 - 1),
)
def test_erasure_monotonicity(name, hops, label, p, seed):
    sub = sub_for(name, hops, label)
    rng = np.random.default_rng(seed)
    small = rng.random(sub.n_qubits) < p
    big = small | (rng.random(sub.n_qubits) < 0.1)
    exact = recoverable_batch(sub, np.stack([small, big]), "exact")
    greedy = recoverable_batch(sub, np.stack([small, big]), "greedy")
    assert not np.any(exact[1] & ~exact[0])
    assert not np.any(greedy & ~exact)


# cost monotonicity --------------------------------------------------------


@MANY
@given(
    st.integers(1, 10_000),
    st.floats(0.1, 1e5),
    st.floats(1e-6, 1.0),
    st.floats(1.0001, 10.0),
    st.integers(1, 200),
    st.integers(1, 20),
)
def test_cost_monotone(N, L, eta, factor, n, k):
    c = cost(N, L, eta, n, k)
    assert cost(N + 1, L, eta, n, k) > c
    assert cost(N, L, eta / factor, n, k) > c

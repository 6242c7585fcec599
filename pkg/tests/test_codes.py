import itertools
import json

import numpy as np
import pytest

from foliated_link.codes import (
    CodeValidationError,
    builtin_or_file,
    check_invariants,
    code_from_dict,
    code_to_dict,
    generalized_bicycle,
    load_code,
    row_reduced,
    save_code,
    steane,
    toric,
    validate_css,
)
from foliated_link.gf2 import BitMatrix, Gf2Poly, in_row_span

from conftest import FIXTURES, single_hop_census_oracle


def test_steane_parameters(steane_code):
    assert (steane_code.n, steane_code.k) == (7, 1)
    assert steane_code.h_x.row_weights().tolist() == [4, 4, 4]
    check_invariants(steane_code)


def test_steane_logical_min_weight(steane_code):
    h = steane_code.h_x.to_dense().astype(int)
    lx = steane_code.l_x.row(0).astype(int)
    weights = [int(((lx + np.array(b) @ h) % 2).sum()) for b in itertools.product((0, 1), repeat=3)]
    assert min(weights) == 3


def test_non_orthogonal_rejected():
    with pytest.raises(CodeValidationError, match="anticommute"):
        validate_css("bad", BitMatrix.from_dense([[1, 1]]), BitMatrix.from_dense([[1, 0]]))


@pytest.mark.parametrize("d,n", [(2, 8), (3, 18), (6, 72)])
def test_toric_parameters(d, n):
    code = toric(d)
    assert (code.n, code.k) == (n, 2)
    assert code.h_x.rows == d * d and code.h_z.rows == d * d


def test_toric3_star_weights(toric3):
    assert set(toric3.h_x.row_weights().tolist()) == {4}


def test_gb48(gb):
    assert (gb.n, gb.k) == (48, 6)
    assert gb.h_x.shape == (24, 48)
    assert (gb.l_x @ gb.l_z.T) == BitMatrix.identity(6)
    assert (gb.h_x @ gb.h_z.T).is_zero()


def test_gb_degenerate_choice():
    with pytest.raises(CodeValidationError, match="no logical"):
        generalized_bicycle(2, Gf2Poly(1), Gf2Poly(1))


def test_logicals_are_not_stabilizers(gb):
    for i in range(gb.k):
        assert not in_row_span(gb.h_x, gb.l_x.row(i))
        assert not in_row_span(gb.h_z, gb.l_z.row(i))


def test_row_reduced_drops_redundancy(gb):
    r = row_reduced(gb)
    assert r.h_x.rows == 21 and r.k == 6


def test_save_load_roundtrip(tmp_path, steane_code):
    p = tmp_path / "s.json"
    save_code(steane_code, p)
    assert load_code(p) == steane_code


def test_fixture_loads():
    code = load_code(FIXTURES / "gb48.json")
    assert (code.n, code.k, code.claimed_distance) == (48, 6, 8)


def test_bad_file_reports_rows(tmp_path, steane_code):
    d = code_to_dict(steane_code)
    d["h_z"][1] = [1, 0, 0, 0, 0, 0, 0]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(CodeValidationError, match="row 0 and H_Z row 1"):
        load_code(p)


def test_malformed_dict():
    with pytest.raises(CodeValidationError):
        code_from_dict({"name": "x"})


def test_builtin_names():
    assert builtin_or_file("toric2").n == 8
    assert builtin_or_file("steane").k == 1


@pytest.mark.parametrize("make,d", [(steane, 3), (lambda: toric(2), 2), (lambda: toric(3), 3)])
def test_small_erasures_correctable(make, d):
    # every erasure of at most d-1 transmitted data qubits decodes on a single hop
    from foliated_link.decoding import census_table

    code = make()
    table = census_table(code)
    for lost in range(d):
        assert table[code.n - lost] == len(list(itertools.combinations(range(code.n), lost)))


def test_census_matches_coset_oracle(toric2):
    from foliated_link.decoding import census_table

    assert census_table(toric2) == single_hop_census_oracle(toric2)

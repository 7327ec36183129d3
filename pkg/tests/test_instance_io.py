from __future__ import annotations

import json

import pytest

from core.errors import DomainError, InstanceFormatError, InvariantViolation
from core.instance_io import (
    block_view,
    linking_ge_rows,
    load,
    load_matrix,
    parse_instance,
    reassemble,
    render_instance,
    store,
    store_matrix,
)
from core.models import Sense


@pytest.fixture
def raw(instance_dir):
    return json.loads((instance_dir / "eq12.dmip").read_text())


def _parse(raw_dict):
    return parse_instance(json.dumps(raw_dict))


def test_load_example(eq12):
    assert (eq12.n, eq12.ell, eq12.m) == (2, 2, 8)
    assert eq12.delta == 3
    assert eq12.linking_rows == [7]
    assert eq12.c == [0, 0] and eq12.d == [1, 1]
    assert eq12.A[7] == [1, 1]
    assert eq12.integer_columns() == [2, 3]


def test_render_is_canonical(eq12, tmp_path):
    text = render_instance(eq12)
    again = parse_instance(text)
    assert again == eq12
    assert render_instance(again) == text
    path = store(eq12, tmp_path / "nested" / "copy.dmip")
    assert load(path) == eq12
    assert path.read_text() == text


def test_non_integral_coefficient_is_located(raw):
    raw["rows"][0]["x"]["0"] = 2.5
    with pytest.raises(InstanceFormatError) as err:
        _parse(raw)
    assert "A must be integral" in str(err.value)
    assert err.value.field.startswith("rows.0.x")


def test_non_integral_rhs(raw):
    raw["rows"][3]["rhs"] = "1/2"
    with pytest.raises(InstanceFormatError) as err:
        _parse(raw)
    assert "g must be integral" in str(err.value)


def test_malformed_json_reports_line():
    with pytest.raises(InstanceFormatError) as err:
        parse_instance('{\n  "name": "x",\n  "n": ,\n}')
    assert err.value.line == 3


def test_row_in_two_blocks(raw):
    raw["blocks"][1]["rows"].append(0)
    with pytest.raises(InvariantViolation) as err:
        _parse(raw)
    assert err.value.invariant == "row not uniquely assigned"


def test_unassigned_column(raw):
    raw["blocks"][1]["x"] = []
    with pytest.raises(InvariantViolation) as err:
        _parse(raw)
    assert err.value.invariant == "column unassigned"


def test_block_row_touching_other_block(raw):
    raw["linking_rows"] = []
    raw["blocks"][0]["rows"].append(7)
    with pytest.raises(InvariantViolation) as err:
        _parse(raw)
    assert err.value.invariant == "row couples blocks"


def test_every_y_column_is_integral(raw):
    raw["integrality"]["y"] = [0]
    with pytest.raises(InvariantViolation) as err:
        _parse(raw)
    assert err.value.invariant == "every y column is integral"


def test_block_view_slices(eq12):
    view = block_view(eq12, 0)
    assert view.A_q == [[3], [-3], [-1]]
    assert view.B_q == [[1], [-2], [3]]
    assert view.A_q_row == [[1]]
    assert view.B_q_row == [[0]]
    assert view.senses_row == [Sense.ge]
    assert view.d_q == [1]
    with pytest.raises(DomainError):
        block_view(eq12, 2)


def test_reassemble_inverts_block_views(eq12, misl_small, cfl_small):
    for mip in (eq12, misl_small, cfl_small):
        views = [block_view(mip, q) for q in range(len(mip.blocks))]
        assert reassemble(mip, views) == (mip.A, mip.B, mip.g)


def test_linking_rows_in_ge_form(eq12, misl_small, raw):
    assert linking_ge_rows(eq12) == [(7, 1)]
    assert linking_ge_rows(misl_small) == [(12, -1), (13, -1)]
    raw["rows"][7]["sense"] = "="
    assert linking_ge_rows(_parse(raw)) == [(7, 1), (7, -1)]


def test_matrix_files(matrix, tmp_path):
    assert matrix("A2") == [[1, 0, 0], [0, 2, 3]]
    path = store_matrix([[1, 0], [0, -4]], tmp_path / "m.mat", name="m")
    assert load_matrix(path) == [[1, 0], [0, -4]]
    path.write_text('{"cols": 2, "rows": [{"5": 1}]}')
    with pytest.raises(InstanceFormatError):
        load_matrix(path)

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeprob import (
    Datacube,
    DuplicateKeyError,
    OutOfBoundsError,
    Range,
    RelationFormatError,
    count_exact,
    from_relation,
    sum_exact,
)
from cubeprob.core import load_cube, read_relation_csv, save_cube


def test_from_relation_empty_is_all_null():
    cube = from_relation([], (2, 2))
    assert cube.cells == (0, 0, 0, 0)
    assert count_exact(cube, cube.full_range()) == 0


def test_from_relation_single_tuple():
    cube = from_relation([((1, 1), 5)], (2, 2))
    assert cube[(1, 1)] == 5
    assert sum(cube.cells) == 5


def test_from_relation_duplicate_key():
    with pytest.raises(DuplicateKeyError):
        from_relation([((1, 1), 3), ((1, 1), 4)], (2, 2))


def test_from_relation_duplicate_even_with_zero_value():
    with pytest.raises(DuplicateKeyError):
        from_relation([((2, 1), 0), ((2, 1), 4)], (2, 2))


def test_from_relation_out_of_bounds():
    with pytest.raises(OutOfBoundsError):
        from_relation([((3, 1), 2)], (2, 2))
    with pytest.raises(OutOfBoundsError):
        from_relation([((0, 1), 2)], (2, 2))


def test_explicit_zero_equals_absent():
    with_zero = from_relation([((1, 2), 0), ((2, 2), 3)], (2, 2))
    without = from_relation([((2, 2), 3)], (2, 2))
    assert with_zero == without


def test_count_and_sum_on_reference_block(reference_cube):
    r = Range((1, 1), (3, 4))
    assert count_exact(reference_cube, r) == 8
    assert sum_exact(reference_cube, r) == 26


def test_count_and_sum_one_dimensional():
    cube = Datacube((3,), (2, 0, 1))
    r = Range((1,), (3,))
    assert count_exact(cube, r) == 2
    assert sum_exact(cube, r) == 3


def test_all_zero_cube_any_range():
    cube = Datacube((4, 3), (0,) * 12)
    assert count_exact(cube, Range((2, 1), (4, 2))) == 0
    assert sum_exact(cube, Range((2, 1), (4, 2))) == 0


def test_range_validation():
    with pytest.raises(ValueError):
        Range((0, 1), (2, 2))
    with pytest.raises(ValueError):
        Range((2, 2), (1, 2))
    with pytest.raises(ValueError):
        Range((1,), (1, 2))


def test_out_of_bounds_range_query():
    cube = Datacube((2, 2), (1, 2, 3, 4))
    with pytest.raises(OutOfBoundsError):
        count_exact(cube, Range((1, 1), (3, 2)))


small_cubes = st.integers(2, 4).flatmap(
    lambda n: st.tuples(
        st.just((n, 3)),
        st.lists(st.integers(0, 5), min_size=n * 3, max_size=n * 3),
    )
)


@settings(deadline=None, max_examples=60)
@given(small_cubes, st.data())
def test_additivity_over_split_ranges(cube_data, data):
    dims, cells = cube_data
    cube = Datacube(dims, tuple(cells))
    lo1 = data.draw(st.integers(1, dims[0]), label="lo")
    hi = data.draw(st.integers(lo1, dims[0]), label="hi")
    cut = data.draw(st.integers(lo1, hi), label="cut")
    whole = Range((lo1, 1), (hi, dims[1]))
    left = Range((lo1, 1), (cut, dims[1]))
    if cut == hi:
        assert count_exact(cube, whole) == count_exact(cube, left)
        return
    right = Range((cut + 1, 1), (hi, dims[1]))
    assert count_exact(cube, whole) == count_exact(cube, left) + count_exact(cube, right)
    assert sum_exact(cube, whole) == sum_exact(cube, left) + sum_exact(cube, right)


@settings(deadline=None, max_examples=40)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(0, 9)), max_size=6))
def test_relation_round_trip_totals(raw):
    seen = set()
    tuples = []
    for a, b, v in raw:
        if (a, b) in seen:
            continue
        seen.add((a, b))
        tuples.append(((a, b), v))
    cube = from_relation(tuples, (3, 3))
    full = cube.full_range()
    assert sum_exact(cube, full) == sum(v for _, v in tuples)
    assert count_exact(cube, full) == sum(1 for _, v in tuples if v > 0)
    assert count_exact(cube, full) <= full.size
    assert sum_exact(cube, full) >= count_exact(cube, full)
    assert (sum_exact(cube, full) == 0) == (count_exact(cube, full) == 0)


def test_csv_with_header_and_blank_lines():
    text = "d1,d2,value\n1,1,5\n\n2,2,3\n"
    cube = read_relation_csv(io.StringIO(text), (2, 2))
    assert cube[(1, 1)] == 5
    assert cube[(2, 2)] == 3


def test_csv_empty_gives_all_null():
    cube = read_relation_csv(io.StringIO(""), (2, 2))
    assert cube.cells == (0, 0, 0, 0)


def test_csv_errors_name_lines():
    with pytest.raises(OutOfBoundsError, match="line 2"):
        read_relation_csv(io.StringIO("1,1,5\n0,1,2\n"), (2, 2))
    with pytest.raises(RelationFormatError, match="line 2"):
        read_relation_csv(io.StringIO("1,1,5\n1,x,2\n"), (2, 2))
    with pytest.raises(DuplicateKeyError, match="line 3"):
        read_relation_csv(io.StringIO("1,1,5\n1,2,1\n1,1,2\n"), (2, 2))


def test_cube_json_round_trip(tmp_path, reference_cube):
    path = tmp_path / "cube.json"
    save_cube(reference_cube, str(path))
    assert load_cube(str(path)) == reference_cube

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tabuport.exceptions import (
    CorrelationOutOfRange,
    InconsistentCount,
    IndexOutOfRange,
    MalformedFile,
)
from tabuport.instance import (
    Instance,
    covariance_of,
    format_orlib,
    load_orlib,
    parse_orlib,
    random_instance,
)

TOY = """ 2
 0.001 0.01
 0.002 0.02
 1 1 1.0
 1 2 0.5
 2 2 1.0
"""


def test_toy_covariance():
    inst = parse_orlib(TOY)
    assert inst.n == 2
    np.testing.assert_allclose(inst.covariance, [[1e-4, 1e-4], [1e-4, 4e-4]], rtol=1e-12)
    assert covariance_of(inst, 0, 1) == pytest.approx(1e-4, rel=1e-12)


def test_stats_view():
    inst = parse_orlib(TOY)
    assert inst.stats[1].index == 1
    assert inst.stats[1].mean_return == 0.002
    assert inst.stats[1].std_dev == 0.02


def test_layout_is_token_based():
    # line breaks are irrelevant, and lower-triangle order is accepted too
    flat = "2 0.001 0.01 0.002 0.02 2 2 1.0 2 1 0.5 1 1 1.0"
    np.testing.assert_array_equal(parse_orlib(flat).covariance, parse_orlib(TOY).covariance)


def test_fortran_exponent():
    inst = parse_orlib(TOY.replace("0.001", "1.0D-3"))
    assert inst.mean[0] == pytest.approx(0.001)


def test_three_declared_two_listed():
    text = " 3\n 0.001 0.01\n 0.002 0.02\n 1 1 1.0\n 1 2 0.5\n 2 2 1.0\n"
    with pytest.raises(InconsistentCount, match="describe 2 assets"):
        parse_orlib(text)


def test_non_numeric_token_position():
    with pytest.raises(MalformedFile, match="line 3, column 8"):
        parse_orlib(TOY.replace(" 0.002 0.02", " 0.002 abc"))


def test_duplicate_pair():
    text = TOY.replace(" 1 2 0.5\n", " 1 1 1.0\n")
    with pytest.raises(MalformedFile, match="duplicate"):
        parse_orlib(text)


@pytest.mark.parametrize("rho", ["1.5", "-1.2"])
def test_correlation_out_of_range(rho):
    with pytest.raises(CorrelationOutOfRange):
        parse_orlib(TOY.replace("1 2 0.5", f"1 2 {rho}"))


def test_bad_diagonal():
    with pytest.raises(CorrelationOutOfRange, match="diagonal"):
        parse_orlib(TOY.replace("2 2 1.0", "2 2 0.9"))


def test_empty_and_garbage():
    with pytest.raises(MalformedFile):
        parse_orlib("")
    with pytest.raises(MalformedFile):
        parse_orlib(TOY + " 7\n")


def test_index_out_of_range(toy):
    with pytest.raises(IndexOutOfRange):
        covariance_of(toy, 0, 2)
    with pytest.raises(IndexOutOfRange):
        covariance_of(toy, -1, 0)


def test_load_names_path(tmp_path):
    bad = tmp_path / "port9.txt"
    bad.write_text(TOY.replace("0.5", "x"))
    with pytest.raises(MalformedFile, match="port9.txt"):
        load_orlib(bad)
    with pytest.raises(OSError, match="missing.txt"):
        load_orlib(tmp_path / "missing.txt")


def test_instance_is_read_only(toy):
    with pytest.raises(ValueError):
        toy.covariance[0, 0] = 1.0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_round_trip_and_identities(n, seed):
    inst = random_instance(n, np.random.default_rng(seed))
    back = parse_orlib(format_orlib(inst))
    np.testing.assert_array_equal(back.mean, inst.mean)
    np.testing.assert_array_equal(back.std, inst.std)
    np.testing.assert_array_equal(back.correlation, inst.correlation)
    # exact symmetry and the variance identity on the diagonal
    assert np.array_equal(back.covariance, back.covariance.T)
    np.testing.assert_allclose(np.diag(back.covariance), back.std ** 2, rtol=0, atol=1e-12)
    i, j = np.random.default_rng(seed).integers(n, size=2)
    assert covariance_of(back, int(i), int(j)) == covariance_of(back, int(j), int(i))


def test_from_correlation_diagonal_exact():
    std = np.array([0.013, 0.027, 0.05])
    inst = Instance.from_correlation(np.zeros(3), std, np.eye(3))
    np.testing.assert_array_equal(np.diag(inst.covariance), std ** 2)

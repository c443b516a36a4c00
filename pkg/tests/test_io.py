import numpy as np
import pytest

from defzeros.errors import InvalidArgument
from defzeros.io import (csv_text, format_poly, parse_key_values, parse_poly, read_csv,
                         read_poly, read_sample_table, write_csv, write_poly)
from defzeros.poly import sample_kostlan


def test_poly_round_trip_is_exact(tmp_path):
    p = sample_kostlan(3, 5, seed=9).poly
    path = tmp_path / "p.poly"
    write_poly(path, p)
    q = read_poly(path)
    assert (q.n, q.d) == (3, 5)
    assert np.array_equal(p.coeffs, q.coeffs)


def test_parse_poly_errors():
    with pytest.raises(InvalidArgument):
        parse_poly("1 0 0 2.0\n")
    with pytest.raises(InvalidArgument):
        parse_poly("# n=2 d=2\n1 1 1.0\n")
    with pytest.raises(InvalidArgument):
        parse_poly("")


def test_format_poly_skips_zeros():
    text = format_poly(parse_poly("# n=1 d=2\n2 0 1.5\n0 2 0\n"))
    assert text == "# n=1 d=2\n2 0 1.5\n"


def test_key_values():
    kv = parse_key_values("# comment\nkind = tail\nn=2  # trailing\n\nseed=0x10\n")
    assert kv == {"kind": "tail", "n": "2", "seed": "0x10"}
    with pytest.raises(InvalidArgument):
        parse_key_values("a=1\na=2\n")
    with pytest.raises(InvalidArgument):
        parse_key_values("just words\n")


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [{"a": 1, "b": 0.1, "c": True}, {"a": 2, "b": float("inf"), "c": False}]
    write_csv(path, ("a", "b", "c"), rows)
    back = read_csv(path)
    assert back[0] == {"a": "1", "b": "0.1", "c": "true"}
    assert float(back[1]["b"]) == float("inf")
    assert csv_text(("a", "b", "c"), rows) == path.read_text()


def test_sample_table(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,x,y\n0,1,0\n0.5,0,1\n")
    t, pts = read_sample_table(path)
    assert t.tolist() == [0.0, 0.5]
    assert pts.shape == (2, 2)

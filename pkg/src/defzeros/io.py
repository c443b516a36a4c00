"""Plain-text formats: polynomial files, ``key=value`` descriptors, CSV tables."""
from __future__ import annotations

import csv
import io as _io
import re
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .poly import HomogeneousPolynomial

_HEADER = re.compile(r"#\s*n\s*=\s*(\d+)\s+d\s*=\s*(\d+)")


def format_poly(p):
    """Serialize ``p`` as text: ``# n=<n> d=<d>`` then ``alpha_0 ... alpha_n coeff`` lines.

    Only nonzero monomials are written; coefficients use 17 significant
    digits so the float table round-trips exactly.
    """
    lines = [f"# n={p.n} d={p.d}"]
    for row, c in zip(p.exps, p.coeffs):
        if c != 0.0:
            lines.append(" ".join(str(int(a)) for a in row) + f" {float(c):.17g}")
    return "\n".join(lines) + "\n"


def parse_poly(text):
    n = d = None
    terms = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m and n is None:
                n, d = int(m.group(1)), int(m.group(2))
            continue
        if n is None:
            raise InvalidArgument("polynomial file is missing the '# n=<n> d=<d>' header")
        parts = line.split()
        if len(parts) != n + 2:
            raise InvalidArgument(f"line {lineno}: expected {n + 2} fields, found {len(parts)}")
        alpha = tuple(int(v) for v in parts[:-1])
        terms[alpha] = terms.get(alpha, 0.0) + float(parts[-1])
    if n is None:
        raise InvalidArgument("empty polynomial file")
    return HomogeneousPolynomial.from_terms(n, d, terms, exact=False)


def write_poly(path, p):
    Path(path).write_text(format_poly(p))


def read_poly(path):
    return parse_poly(Path(path).read_text())


def parse_key_values(text):
    """Parse ``key=value`` lines; ``#`` starts a comment. Values stay strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise InvalidArgument(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def format_key_values(mapping):
    return "".join(f"{k}={v}\n" for k, v in mapping.items())


def read_key_values(path):
    return parse_key_values(Path(path).read_text())


def read_sample_table(path):
    """Read a curve sample table ``t,x_1,...,x_n`` (header row optional).

    Returns ``(t, pts)`` with ``pts`` of shape ``(N, n)``.
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if rows:
                    raise InvalidArgument(f"non-numeric row in {path}: {row}")
                continue  # header
    if not rows:
        raise InvalidArgument(f"no samples in {path}")
    arr = np.array(rows)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise InvalidArgument("sample table needs a t column and at least one coordinate")
    return arr[:, 0], arr[:, 1:]


def write_csv(path_or_buffer, header, rows):
    """Write rows with a fixed header; floats use ``repr`` so output is byte-stable."""
    own = isinstance(path_or_buffer, (str, Path))
    fh = open(path_or_buffer, "w", newline="") if own else path_or_buffer
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            values = [row[h] for h in header] if isinstance(row, dict) else row
            w.writerow([_cell(v) for v in values])
    finally:
        if own:
            fh.close()


def _cell(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def csv_text(header, rows):
    buf = _io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()

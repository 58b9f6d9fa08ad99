"""Plain-text formats for lattices, groups, harmonic specs, targets and results.

All formats are line oriented, ``#`` starts a comment, blank lines are
ignored except inside a group file where they separate matrices.

lattice::

    lattice <m>            # ambient dimension
    gram
    <m rows of m rationals>
    generators <count>
    <count rows of m rationals>

group (isometries as ambient m x m rational matrices, rows)::

    group <m> <count>
    <m rows>                # matrix 1
    <blank line>
    <m rows>                # matrix 2 ...

hspec (each entry is ``a+b*i+c*r6+d*i*r6`` or a bare rational)::

    hspec <n> <m>
    <n rows of m scalars>

target::

    target <n>
    <n rows of n integers>

result: ``key: value`` lines in a fixed key order.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .exactnum import format_rational, format_scalar, parse_rational, parse_scalar
from .lattice import GramMatrix, Lattice

__all__ = [
    "FormatError",
    "format_lattice",
    "parse_lattice",
    "format_group",
    "parse_group",
    "format_hspec",
    "parse_hspec",
    "format_target",
    "parse_target",
    "format_result",
    "read_text",
]


class FormatError(ValueError):
    """Input text does not follow the documented schema."""


def _lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        out.append(line)
    return out


def _content(text: str) -> list[str]:
    return [ln for ln in _lines(text) if ln.strip()]


def _header(line: str, word: str, nargs: int) -> list[int]:
    parts = line.split()
    if not parts or parts[0] != word or len(parts) != nargs + 1:
        raise FormatError(f"expected '{word}' header with {nargs} field(s), got {line!r}")
    try:
        vals = [int(p) for p in parts[1:]]
    except ValueError:
        raise FormatError(f"non-integer field in {line!r}") from None
    if any(v < 0 for v in vals):
        raise FormatError(f"negative size in {line!r}")
    return vals


def _rational_row(line: str, width: int) -> list[Fraction]:
    parts = line.split()
    if len(parts) != width:
        raise FormatError(f"expected {width} entries, got {len(parts)}: {line!r}")
    try:
        return [parse_rational(p) for p in parts]
    except ValueError as e:
        raise FormatError(str(e)) from None


def _row_text(row) -> str:
    return " ".join(format_rational(v) for v in row)


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from None


# ---- lattice ----------------------------------------------------------------------

def format_lattice(L: Lattice) -> str:
    m = L.rank
    out = [f"lattice {m}", "gram"]
    out += [_row_text(r) for r in L.ambient_gram.entries]
    out.append(f"generators {len(L.generators)}")
    out += [_row_text(r) for r in L.generators]
    return "\n".join(out) + "\n"


def parse_lattice(text: str, name: str | None = None) -> Lattice:
    lines = _content(text)
    if len(lines) < 2:
        raise FormatError("lattice file is truncated")
    (m,) = _header(lines[0], "lattice", 1)
    if lines[1].strip() != "gram":
        raise FormatError("expected 'gram' after the lattice header")
    if len(lines) < 3 + m:
        raise FormatError("lattice file is truncated")
    gram = [_rational_row(ln, m) for ln in lines[2:2 + m]]
    (count,) = _header(lines[2 + m], "generators", 1)
    rows = lines[3 + m:]
    if len(rows) != count:
        raise FormatError(f"expected {count} generator rows, got {len(rows)}")
    gens = [_rational_row(ln, m) for ln in rows]
    try:
        G = GramMatrix(gram)
    except ValueError as e:
        raise FormatError(f"bad Gram matrix: {e}") from None
    # invariant failures (rank, integrality) propagate as LatticeError
    return Lattice(G, gens, name=name)


# ---- groups -----------------------------------------------------------------------

def format_group(generators) -> str:
    gens = list(generators)
    m = gens[0].lattice.rank if gens else 0
    blocks = [f"group {m} {len(gens)}"]
    for g in gens:
        blocks.append("\n".join(_row_text(r) for r in g.ambient_matrix()))
    return "\n\n".join(blocks) + "\n"


def parse_group(text: str, lattice: Lattice) -> list:
    """Isometries of ``lattice``; raises NotIsometry for invalid matrices."""
    from .groups import Isometry

    lines = [ln for ln in _lines(text)]
    body = [ln for ln in lines if ln.strip()]
    if not body:
        raise FormatError("empty group file")
    m, count = _header(body[0], "group", 2)
    if m != lattice.rank:
        raise FormatError(f"group acts on dimension {m}, lattice has {lattice.rank}")
    rows = body[1:]
    if len(rows) != m * count:
        raise FormatError(f"expected {m * count} matrix rows, got {len(rows)}")
    gens = []
    for c in range(count):
        M = [_rational_row(ln, m) for ln in rows[c * m:(c + 1) * m]]
        gens.append(Isometry.from_ambient(lattice, M))
    return gens


# ---- harmonic specs ------------------------------------------------------------------

def format_hspec(h) -> str:
    out = [f"hspec {h.degree} {h.dim}"]
    out += [" ".join(format_scalar(x) for x in v) for v in h.vectors]
    return "\n".join(out) + "\n"


def parse_hspec(text: str):
    from .catalog import HarmonicSpec

    lines = _content(text)
    if not lines:
        raise FormatError("empty hspec file")
    n, m = _header(lines[0], "hspec", 2)
    rows = lines[1:]
    if len(rows) != n:
        raise FormatError(f"expected {n} vectors, got {len(rows)}")
    vecs = []
    for ln in rows:
        parts = ln.split()
        if len(parts) != m:
            raise FormatError(f"expected {m} entries, got {len(parts)}")
        try:
            vecs.append(tuple(parse_scalar(p) for p in parts))
        except ValueError as e:
            raise FormatError(str(e)) from None
    return HarmonicSpec(tuple(vecs))


# ---- targets and results ----------------------------------------------------------------

def format_target(T: GramMatrix) -> str:
    return f"target {T.n}\n" + "\n".join(_row_text(r) for r in T.entries) + "\n"


def parse_target(text: str) -> GramMatrix:
    lines = _content(text)
    if not lines:
        raise FormatError("empty target file")
    (n,) = _header(lines[0], "target", 1)
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} rows")
    rows = [_rational_row(ln, n) for ln in lines[1:]]
    try:
        return GramMatrix(rows)
    except ValueError as e:
        raise FormatError(str(e)) from None


_RESULT_KEYS = ("lattice", "target", "k", "value", "level_sizes", "double_cosets", "index", "reason", "oracle")


def format_result(fields: dict) -> str:
    """Deterministic ``key: value`` text; timing goes to the log, not here."""
    out = []
    for key in _RESULT_KEYS:
        if key in fields and fields[key] is not None:
            v = fields[key]
            if isinstance(v, Fraction):
                v = format_rational(v)
            elif isinstance(v, (list, tuple)):
                v = " ".join(str(x) for x in v)
            out.append(f"{key}: {v}")
    return "\n".join(out) + "\n"

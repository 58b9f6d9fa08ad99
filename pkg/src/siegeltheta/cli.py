"""Command-line front end (``siegeltheta``).

Exit codes: 0 success, 1 invariant failure, 2 parse error, 3 budget exceeded.
The cache root is ``$SIEGELTHETA_CACHE`` (default ``~/.cache/siegeltheta``).
"""

from __future__ import annotations

import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import catalog
from .exactnum import format_rational
from .formats import (
    FormatError,
    format_result,
    parse_group,
    parse_hspec,
    parse_lattice,
    parse_target,
    read_text,
)
from .lattice import GramMatrix, LatticeError, min_norm, short_vectors

log = logging.getLogger("siegeltheta")

EXIT_OK, EXIT_INVARIANT, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3
CACHE_ENV = "SIEGELTHETA_CACHE"


def cache_root() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "siegeltheta")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _run(fn):
    """Map library exceptions onto exit codes."""
    from .catalog import ConstructionMismatch
    from .groups import NotIsometry, PredicateInconsistent, UnfaithfulAction
    from .theta import BudgetExceeded

    try:
        fn()
    except _Fail as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(e.code)
    except FormatError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_PARSE)
    except BudgetExceeded as e:
        click.echo(f"budget exceeded: {e}", err=True)
        sys.exit(EXIT_BUDGET)
    except (LatticeError, NotIsometry, ConstructionMismatch, PredicateInconsistent, UnfaithfulAction) as e:
        click.echo(f"invariant failure: {e}", err=True)
        sys.exit(EXIT_INVARIANT)


# ---- input resolution -----------------------------------------------------------------

def _is_file(spec: str) -> bool:
    return os.path.sep in spec or Path(spec).is_file()


def _load_lattice(spec: str):
    if _is_file(spec):
        return parse_lattice(read_text(spec), name=Path(spec).stem), None
    try:
        name = catalog.canonical_name(spec)
    except KeyError as e:
        raise FormatError(str(e.args[0])) from None
    return catalog.niemeier_lattice(name), name


def _load_target(spec: str) -> GramMatrix:
    if _is_file(spec):
        return parse_target(read_text(spec))
    try:
        return catalog.target_gram(spec)
    except (ValueError, KeyError) as e:
        raise FormatError(f"unknown target {spec!r}: {e}") from None


def _represented(L, T: GramMatrix) -> bool:
    return all(len(short_vectors(L, int(T[j, j]))) for j in range(T.n))


# ---- commands --------------------------------------------------------------------------

@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Progress messages on stderr.")
def main(verbose: bool):
    """Exact Fourier coefficients of Siegel theta series with harmonic coefficients."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)


@main.command()
@click.argument("name", required=False)
@click.option("--lattice", "lattice_file", type=click.Path(), help="Lattice text file.")
@click.option("--hspec", "hspec_file", type=click.Path(), help="Harmonic spec text file.")
@click.option("--group", "group_file", type=click.Path(), help="Group generator file.")
@click.option("--groups/--no-groups", default=False, help="Also build the catalog group fixture.")
def validate(name, lattice_file, hspec_file, group_file, groups):
    """Certify a catalog lattice (by NAME) or lattice/hspec/group files."""

    def body():
        failures = []
        if name is None and lattice_file is None:
            raise FormatError("give a catalog name or --lattice")
        L, cname = _load_lattice(lattice_file or name)
        click.echo(f"lattice: {cname or L.name}")
        click.echo(f"rank: {L.rank}")
        click.echo(f"even: {L.is_even}")
        click.echo(f"det: {format_rational(L.det)}")
        mn = min_norm(L)
        click.echo(f"min_norm: {mn}")
        roots = len(short_vectors(L, 2))
        click.echo(f"roots: {roots}")
        if cname is not None:
            if not L.is_even:
                failures.append("lattice is not even")
            if L.det != 1:
                failures.append("determinant is not 1")
            expected = catalog.ROOT_COUNTS.get(cname)
            if expected is not None and roots != expected:
                failures.append(f"root count {roots} != {expected}")
        h = None
        if hspec_file:
            h = parse_hspec(read_text(hspec_file))
        elif cname is not None:
            h = catalog.harmonic_spec(cname)
        if h is not None:
            iso = h.is_isotropic(L.ambient_gram)
            pos = h.is_positive(L.ambient_gram)
            click.echo(f"hspec_isotropic: {iso}")
            click.echo(f"hspec_positive: {pos}")
            if not (iso and pos):
                failures.append("harmonic spec fails Q(h,h)=0 or Q(h,conj h)>0")
        if group_file:
            from .groups import group_build

            gens = parse_group(read_text(group_file), L)
            click.echo(f"group_order: {group_build(L, gens, (mn,)).order}")
        elif groups and cname is not None:
            from .fixtures import group_fixture

            fx = group_fixture(cname)
            click.echo(f"group_order: {fx.group().order}")
        if failures:
            raise _Fail(EXIT_INVARIANT, "; ".join(failures))

    _run(body)


@main.command()
@click.argument("lattice")
@click.option("--norm", type=int, required=True)
@click.option("--list", "show", is_flag=True, help="Print the vectors (scaled ambient rows).")
def shorts(lattice, norm, show):
    """Count (or list) the vectors of a given norm."""

    def body():
        L, _ = _load_lattice(lattice)
        X = short_vectors(L, norm, cache_dir=cache_root())
        click.echo(f"norm {norm}: {len(X)}")
        if show:
            for x in X:
                click.echo(" ".join(format_rational(Fraction(int(v), L.den)) for v in x))

    _run(body)


@main.command()
@click.option("--lattice", "lattice_spec", required=True, help="Catalog name or lattice file.")
@click.option("--T", "target", required=True, help="Table label or target file.")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--hspec", "hspec_file", type=click.Path())
@click.option("--group", "group_file", type=click.Path(), help="Generators of H (default: catalog fixture or trivial).")
@click.option("--oracle", is_flag=True, help="Also run the brute-force oracle.")
@click.option("--budget", type=int, default=None, help="Maximum number of tuple representatives.")
@click.option("--output", type=click.Path(), help="Write the result here as well.")
@click.option("--no-cache", is_flag=True)
def coeff(lattice_spec, target, k, hspec_file, group_file, oracle, budget, output, no_cache):
    """Exact coefficient a(T) of the theta series."""

    def body():
        from .groups import GeneratedGroup, group_build
        from .theta import CoefficientTask, coefficient_bruteforce, coefficient_result

        if k < 1:
            raise FormatError("k must be positive")
        L, cname = _load_lattice(lattice_spec)
        T = _load_target(target)
        fields = {"lattice": cname or L.name, "target": target, "k": k}
        if not _represented(L, T):
            fields.update(value=Fraction(0), reason="T is not represented by L")
            _emit(fields, output)
            return
        if hspec_file:
            h = parse_hspec(read_text(hspec_file))
        elif cname is not None:
            h = catalog.harmonic_spec(cname)
        else:
            raise FormatError("a lattice file needs --hspec")
        if h.degree != T.n:
            raise FormatError(f"T has size {T.n} but h has degree {h.degree}")
        if group_file:
            H = group_build(L, parse_group(read_text(group_file), L), (min_norm(L),))
        elif cname is not None:
            from .fixtures import group_fixture

            H = group_fixture(cname).group()
        else:
            H = GeneratedGroup(L, [])
        t0 = time.time()
        task = CoefficientTask(L, H, h, k, T)
        ck = None if no_cache else cache_root() / "checkpoints"
        res = coefficient_result(task, checkpoint_dir=ck, max_representatives=budget)
        log.info("a(T) computed in %.1fs", time.time() - t0)
        fields.update(value=res.value, level_sizes=res.level_sizes, double_cosets=res.num_double_cosets,
                      index=res.index, reason=res.reason)
        if oracle:
            ov = coefficient_bruteforce(L, h, k, T, budget=budget or 200_000)
            fields["oracle"] = format_rational(ov)
            if ov != res.value:
                _emit(fields, output)
                raise _Fail(EXIT_INVARIANT, "engine and oracle disagree")
        _emit(fields, output)

    _run(body)


def _emit(fields: dict, output):
    text = format_result(fields)
    click.echo(text, nl=False)
    if output:
        Path(output).write_text(text)


@main.command()
@click.option("--column", default=None, help="Compute entries of this lattice column.")
@click.option("--rows", default=None, help="Comma-separated row labels to compute.")
@click.option("--budget", type=int, default=None, help="Maximum number of tuple representatives.")
def table(column, rows, budget):
    """Check the published table and optionally recompute entries."""

    def body():
        from .ikeda import UnsupportedGenusFactor, discriminant_split, ikeda_coefficient

        bad = []
        res = catalog.f_column_residuals()
        ok = all(v == 0 for v in res.values())
        click.echo(f"F-column identity: {'pass' if ok else 'FAIL'} ({len(res)} rows)")
        if not ok:
            bad.append("F-column identity")
        for label in catalog.TARGET_LABELS:
            T = catalog.target_gram(label)
            split = discriminant_split(T)
            if split.d != 1:
                continue
            try:
                c = ikeda_coefficient(T)
            except UnsupportedGenusFactor:
                continue
            expected = catalog.table_value(label, "F")
            flag = "ok" if c == expected else "MISMATCH"
            click.echo(f"ikeda {label}: {c} (table {expected}) {flag}")
            if c != expected:
                bad.append(f"ikeda {label}")
        if column is not None:
            from .fixtures import group_fixture
            from .theta import CoefficientTask, coefficient_result, normalize_column

            name = catalog.canonical_name(column)
            labels = rows.split(",") if rows else list(catalog.TARGET_LABELS)
            L, h = catalog.niemeier_lattice(name), catalog.harmonic_spec(name)
            H = group_fixture(name).group()
            values = {}
            olh = None
            for label in labels:
                task = CoefficientTask(L, H, h, 2, catalog.target_gram(label), OLh=olh)
                olh = task.OLh
                r = coefficient_result(task, checkpoint_dir=cache_root() / "checkpoints",
                                       max_representatives=budget)
                values[label] = r.value
                click.echo(f"{name} {label}: a(T) = {format_rational(r.value)}")
            norm = normalize_column(values, labels)
            published = normalize_column({lab: catalog.table_value(lab, name) for lab in labels}, labels)
            for label in labels:
                flag = "ok" if norm[label] == published[label] else "MISMATCH"
                click.echo(f"{name} {label}: normalized {norm[label]} (table {published[label]}) {flag}")
                if norm[label] != published[label]:
                    bad.append(f"{name} {label}")
        if bad:
            raise _Fail(EXIT_INVARIANT, "mismatches: " + ", ".join(bad))

    _run(body)


@main.command()
@click.argument("labels", nargs=-1)
def ikeda(labels):
    """Ikeda lift coefficients for table rows with d_T = 1."""

    def body():
        from .ikeda import UnsupportedGenusFactor, discriminant_split, ikeda_coefficient

        for label in labels or catalog.TARGET_LABELS:
            try:
                T = catalog.target_gram(label)
            except (ValueError, KeyError) as e:
                raise FormatError(f"unknown target {label!r}: {e}") from None
            split = discriminant_split(T)
            try:
                click.echo(f"{label}: D={split.D} d={split.d} F={ikeda_coefficient(T)}")
            except UnsupportedGenusFactor:
                click.echo(f"{label}: D={split.D} d={split.d} F=unsupported")

    _run(body)


@main.command()
def golay():
    """Weight enumerator of the Golay code."""

    def body():
        G = catalog.build_golay()
        dist = G.weight_distribution()
        click.echo(f"dimension: {G.dimension}")
        click.echo("weights: " + " ".join(f"{w}:{c}" for w, c in sorted(dist.items())))
        if dist != {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}:
            raise _Fail(EXIT_INVARIANT, "unexpected weight distribution")

    _run(body)


@main.command("group-order")
@click.argument("name", required=False)
@click.option("--lattice", "lattice_file", type=click.Path())
@click.option("--group", "group_file", type=click.Path())
def group_order(name, lattice_file, group_file):
    """Order of a catalog fixture group, or of generators read from a file."""

    def body():
        from .groups import group_build

        if group_file:
            if not (lattice_file or name):
                raise FormatError("--group needs a lattice")
            L, _ = _load_lattice(lattice_file or name)
            gens = parse_group(read_text(group_file), L)
            G = group_build(L, gens, (min_norm(L),))
            click.echo(f"order: {G.order}")
            return
        if name is None:
            raise FormatError("give a catalog name or --group")
        from .fixtures import group_fixture

        fx = group_fixture(catalog.canonical_name(name))
        G = fx.group()
        click.echo(f"order: {G.order}")
        if fx.ambient_generators is not None:
            click.echo(f"ambient_order: {fx.ambient_group().order}")

    _run(body)


if __name__ == "__main__":  # pragma: no cover
    main()

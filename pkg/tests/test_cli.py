import pytest
from click.testing import CliRunner

from oracle_instances import harmonic, paired_a1, paired_a2
from siegeltheta.catalog import harmonic_spec, niemeier_lattice, target_gram
from siegeltheta.cli import main
from siegeltheta.fixtures import group_fixture
from siegeltheta.formats import (
    FormatError,
    format_group,
    format_hspec,
    format_lattice,
    format_target,
    parse_group,
    parse_hspec,
    parse_lattice,
    parse_target,
)
from siegeltheta.lattice import GramMatrix


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("SIEGELTHETA_CACHE", str(tmp_path / "cache"))
    return CliRunner()


def write(path, text):
    path.write_text(text)
    return str(path)


# ---- formats ------------------------------------------------------------------------

def test_lattice_roundtrip():
    L = niemeier_lattice("D4^6")
    L2 = parse_lattice(format_lattice(L))
    assert L2.basis == L.basis and L2.ambient_gram == L.ambient_gram


def test_group_and_hspec_roundtrip():
    L = niemeier_lattice("A3^8")
    gens = group_fixture("A3^8").generators[:3]
    assert parse_group(format_group(gens), L) == gens
    h = harmonic_spec("A3^8")
    assert parse_hspec(format_hspec(h)) == h
    T = target_gram("E6'(3)")
    assert parse_target(format_target(T)) == T


@pytest.mark.parametrize("text", [
    "",
    "lattice 2\ngram\n2 0\n",
    "lattice x\n",
    "lattice 2\ngram\n2 1\n0 2\ngenerators 2\n1 0\n0 1\n",
])
def test_lattice_parse_errors(text):
    with pytest.raises(FormatError):
        parse_lattice(text)


def test_comments_are_ignored():
    text = "# a comment\nlattice 1\ngram\n2  # norm\ngenerators 1\n1\n"
    assert parse_lattice(text).det == 2


# ---- commands ------------------------------------------------------------------------

def test_validate_leech(runner):
    r = runner.invoke(main, ["validate", "Leech"])
    assert r.exit_code == 0
    assert "det: 1" in r.output and "min_norm: 4" in r.output and "roots: 0" in r.output


def test_validate_a2_12(runner):
    r = runner.invoke(main, ["validate", "N(A_2^{12})"])
    assert r.exit_code == 0
    assert "det: 1" in r.output and "roots: 72" in r.output


def test_validate_corrupted_file(runner, tmp_path):
    good = format_lattice(niemeier_lattice("A2^12")).splitlines()
    good[5] = good[5].replace("2", "x", 1)
    r = runner.invoke(main, ["validate", "--lattice", write(tmp_path / "bad.lat", "\n".join(good))])
    assert r.exit_code == 2


def test_validate_invariant_failure(runner, tmp_path):
    # rank deficient generators
    text = "lattice 2\ngram\n2 0\n0 2\ngenerators 2\n1 1\n2 2\n"
    r = runner.invoke(main, ["validate", "--lattice", write(tmp_path / "x.lat", text)])
    assert r.exit_code == 1


def test_validate_bad_hspec(runner, tmp_path):
    L = paired_a1(2)
    lat = write(tmp_path / "l.lat", format_lattice(L))
    hs = write(tmp_path / "h.txt", "hspec 1 4\n1 0 0 0\n")
    r = runner.invoke(main, ["validate", "--lattice", lat, "--hspec", hs])
    assert r.exit_code == 1
    assert "hspec_isotropic: False" in r.output


def test_golay_and_ikeda(runner):
    r = runner.invoke(main, ["golay"])
    assert r.exit_code == 0 and "8:759 12:2576" in r.output
    r = runner.invoke(main, ["ikeda", "A6", "D6", "E6", "E6(2)"])
    assert r.exit_code == 0
    assert "A6: D=-7 d=1 F=-88" in r.output
    assert "E6(2): D=-3 d=8 F=unsupported" in r.output


def test_table_checks(runner):
    r = runner.invoke(main, ["table"])
    assert r.exit_code == 0
    assert "F-column identity: pass" in r.output
    assert r.output.count(" ok") == 9


def test_shorts_and_group_order(runner):
    r = runner.invoke(main, ["shorts", "E6^4", "--norm", "2"])
    assert r.exit_code == 0 and "norm 2: 288" in r.output
    r = runner.invoke(main, ["group-order", "A2^12"])
    assert r.exit_code == 0 and f"order: {6 ** 12 * 2}" in r.output


def test_coeff_not_represented(runner):
    r = runner.invoke(main, ["coeff", "--lattice", "Leech", "--T", "A1", "--k", "2"])
    assert r.exit_code == 0 and "value: 0" in r.output


def _files(tmp_path):
    lat = write(tmp_path / "l.lat", format_lattice(paired_a1(3)))
    hs = write(tmp_path / "h.txt", format_hspec(harmonic("a1x3", 2)))
    T = write(tmp_path / "T.txt", format_target(GramMatrix([[4, 2], [2, 4]])))
    return lat, hs, T


def test_coeff_with_oracle(runner, tmp_path):
    lat, hs, T = _files(tmp_path)
    r = runner.invoke(main, ["coeff", "--lattice", lat, "--hspec", hs, "--T", T, "--k", "2", "--oracle"])
    assert r.exit_code == 0, r.output
    assert "value: 27648" in r.output and "oracle: 27648" in r.output


def test_coeff_budget_exit_code(runner, tmp_path):
    lat, hs, T = _files(tmp_path)
    r = runner.invoke(main, ["coeff", "--lattice", lat, "--hspec", hs, "--T", T, "--budget", "2", "--no-cache"])
    assert r.exit_code == 3


def test_coeff_degree_mismatch(runner, tmp_path):
    lat, hs, _ = _files(tmp_path)
    T = write(tmp_path / "T1.txt", "target 1\n2\n")
    r = runner.invoke(main, ["coeff", "--lattice", lat, "--hspec", hs, "--T", T])
    assert r.exit_code == 2


def test_coeff_rerun_is_byte_identical(runner, tmp_path):
    lat, hs, T = _files(tmp_path)
    outs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        r = runner.invoke(main, ["coeff", "--lattice", lat, "--hspec", hs, "--T", T, "--output", str(out)])
        assert r.exit_code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_coeff_with_group_file(runner, tmp_path):
    from oracle_instances import group

    lat = write(tmp_path / "l.lat", format_lattice(paired_a2()))
    hs = write(tmp_path / "h.txt", format_hspec(harmonic("a2", 2)))
    T = write(tmp_path / "T.txt", format_target(GramMatrix([[2, 1], [1, 2]])))
    G = write(tmp_path / "g.txt", format_group(group("weyl_diag", "a2").generators))
    r = runner.invoke(main, ["coeff", "--lattice", lat, "--hspec", hs, "--T", T, "--group", G])
    assert r.exit_code == 0, r.output
    assert "value: 3888" in r.output


def test_unknown_lattice_is_parse_error(runner):
    r = runner.invoke(main, ["validate", "E8"])
    assert r.exit_code == 2

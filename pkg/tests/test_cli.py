"""End-to-end tests for the command-line front end (exit codes and bytes)."""

import pytest

from spherotree import (
    ClassTable,
    SphericalSpec,
    TensorSpec,
    ThornCode,
    InternalError,
    identity,
    random_element,
    thompson_generators,
    witness_nonautomorphism,
)
from spherotree.cli import main
from spherotree.textio import (
    format_class_table,
    format_clopen,
    format_element,
    format_spherical_spec,
    format_tensor_spec,
    parse_element,
)
from spherotree.tree import ClopenSet, down

BALL = ThornCode(2, "(1:)")
PAIR = ThornCode(2, "(1:(1:))")


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def work(tmp_path):
    files = {
        "id2": identity(2),
        "g0": witness_nonautomorphism(),
        "r1": random_element(2, 6, seed="cli-1"),
        "r2": random_element(2, 6, seed="cli-2"),
    }
    paths = {}
    for name, g in files.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(format_element(g))
        paths[name] = str(p)
    table = ClassTable(2, 0, (BALL, PAIR))
    spec = SphericalSpec(table, ((1.0, 0.5, 0.25), (0.5, 1.0, 0.125), (0.25, 0.125, 1.0)))
    tspec = TensorSpec(2, 0, 1, ((BALL, (1.0, 0.0)),), (0.6, 0.8))
    omega = ClopenSet.from_balls(2, [down((0, 0))])
    for name, text in [
        ("table", format_class_table(table)),
        ("spec", format_spherical_spec(spec)),
        ("tensor", format_tensor_spec(tspec)),
        ("omega", format_clopen(omega)),
    ]:
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = str(tmp_path)
    return paths


def test_validate_every_kind(work, capsys):
    for kind, name in [
        ("element", "g0"),
        ("clopen", "omega"),
        ("table", "table"),
        ("spec", "spec"),
        ("tensor-spec", "tensor"),
    ]:
        code, out, err = _run(capsys, "validate", work[name], "--kind", kind)
        assert code == 0, err
        assert out.startswith("ok " + kind.replace("tensor-spec", "tensor-spec"))


def test_validate_rejects_broken_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("arity 2\n00 -> 0\n")
    code, out, err = _run(capsys, "validate", str(bad))
    assert code == 1
    assert "bad.txt" in err and "error:" in err


def test_compose_invert_equals_round_trip(work, capsys, tmp_path):
    code, out, _ = _run(capsys, "invert", work["r1"])
    assert code == 0
    inv = tmp_path / "inv.txt"
    inv.write_text(out)

    code, out, _ = _run(capsys, "compose", work["r1"], str(inv))
    assert code == 0
    prod = tmp_path / "prod.txt"
    prod.write_text(out)

    code, out, _ = _run(capsys, "equals", str(prod), work["id2"])
    assert code == 0
    assert out.strip() == "true"

    code, out, _ = _run(capsys, "equals", work["r1"], work["r2"])
    assert code == 0
    assert out.strip() == "false"


def test_compose_output_parses_back(work, capsys):
    code, out, _ = _run(capsys, "compose", work["r1"], work["r2"], work["g0"])
    assert code == 0
    g = parse_element(out)
    assert g.arity == 2


def test_canon_identity_prints_empty_token(work, capsys):
    code, out, _ = _run(capsys, "canon", work["id2"])
    assert code == 0
    assert out.strip() == "2c45"  # hex of "E": the empty pair


def test_canon_dot_output(work, capsys):
    code, out, _ = _run(capsys, "canon", work["g0"], "--dot")
    assert code == 0
    token, rest = out.split("\n", 1)
    assert token.startswith("2c")
    assert rest.startswith("graph bithorn {")


def test_is_aut(work, capsys):
    assert _run(capsys, "is-aut", work["id2"])[1].strip() == "true"
    assert _run(capsys, "is-aut", work["g0"])[1].strip() == "false"


def test_classify_and_upsilon(work, capsys):
    code, out, _ = _run(capsys, "classify-clopen", work["omega"])
    assert code == 0
    assert out.split() == [BALL.token, BALL.text]
    code, out, _ = _run(capsys, "classify-clopen", work["omega"], "--dot")
    assert "graph thorn {" in out
    code, out, _ = _run(capsys, "upsilon", work["omega"])
    assert code == 0
    assert out.strip() == "0"  # one ball, and n-1 = 1 makes every count 0


def test_theta_table_output(work, capsys):
    code, out, _ = _run(capsys, "theta", work["g0"], "--table", work["table"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split()[:2] == ["classes", "P"]
    assert len(lines) == 4


def test_phi_families(work, capsys):
    code, out, _ = _run(capsys, "phi", "l2", work["g0"])
    assert code == 0 and out.strip() == "value 0.0"

    code, out, _ = _run(capsys, "phi", "nessonov", work["id2"], "--spec", work["spec"])
    assert code == 0 and out.strip() == "value 1.0"

    code, out, _ = _run(capsys, "phi", "tensor", work["g0"], "--tensor-spec", work["tensor"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"value {0.6 ** 4!r}"
    assert lines[1] == "cap_lumped true"

    code, out, _ = _run(
        capsys, "phi", "product", work["g0"], "--spec", work["spec"], "--l2"
    )
    assert code == 0 and out.strip() == "value 0.0"


def test_phi_flag_validation(work, capsys):
    code, _, err = _run(capsys, "phi", "nessonov", work["g0"])
    assert code == 1 and "exactly one --spec" in err
    code, _, err = _run(capsys, "phi", "product", work["g0"], "--l2")
    assert code == 1 and "at least two factors" in err
    code, _, err = _run(capsys, "phi", "tensor", work["g0"], "--spec", work["spec"])
    assert code == 1 and "--tensor-spec" in err


def test_phi_rejects_non_psd_spec(work, capsys, tmp_path):
    table = ClassTable(2, 0, (BALL,))
    bad = SphericalSpec(table, ((1.0, 1.5), (1.5, 1.0)))
    p = tmp_path / "badspec.txt"
    p.write_text(format_spherical_spec(bad))
    code, _, err = _run(capsys, "phi", "nessonov", work["g0"], "--spec", str(p))
    assert code == 1
    assert "badspec.txt" in err


def test_gram_accepts_files_and_directories(work, capsys, tmp_path):
    code, out, _ = _run(
        capsys, "gram", work["id2"], work["g0"], work["r1"], "--family", "l2"
    )
    assert code == 0
    assert out.splitlines()[0] == "gram certificate over 3 elements"
    assert out.rstrip().endswith("verdict PASS")

    gdir = tmp_path / "elements"
    gdir.mkdir()
    for i in range(3):
        (gdir / f"e{i}.txt").write_text(
            format_element(random_element(2, 5, seed=f"gram-{i}"))
        )
    code, out, _ = _run(
        capsys, "gram", str(gdir), "--family", "nessonov", "--spec", work["spec"]
    )
    assert code == 0
    assert out.splitlines()[0] == "gram certificate over 3 elements"
    assert out.rstrip().endswith("verdict PASS")


def test_enum_thorns_listing(capsys):
    code, out, _ = _run(capsys, "enum-thorns", "--arity", "2", "--iota", "0",
                        "--max-vertices", "2")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2
    assert lines[0].split()[1] == "(1:)"
    assert lines[1].split()[1] == "(1:(1:))"
    code, _, err = _run(capsys, "enum-thorns", "--arity", "2", "--iota", "1",
                        "--max-vertices", "2")
    assert code == 1 and "residue" in err


def test_random_element_is_seed_deterministic(capsys):
    runs = [
        _run(capsys, "random-element", "--arity", "2", "--budget", "6", "--seed", "s1")
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    assert runs[0][0] == 0
    other = _run(capsys, "random-element", "--arity", "2", "--budget", "6", "--seed", "s2")
    assert other[1] != runs[0][1]
    code, _, err = _run(capsys, "random-element", "--arity", "2", "--budget", "6")
    assert code == 1 and "--seed" in err


def test_thompson_gens_output(capsys):
    code, out, _ = _run(capsys, "thompson-gens", "--which", "rotation")
    assert code == 0
    rotation, _, _ = thompson_generators()
    assert parse_element(out) == rotation

    code, out, _ = _run(capsys, "thompson-gens")
    assert code == 0
    assert out.count("arity 2") == 3
    assert "# rotation" in out and "# a" in out and "# b" in out


def test_oracle_depth_and_determinism(work, capsys):
    first = _run(capsys, "oracle", work["g0"], "--depth", "3")
    second = _run(capsys, "--depth", "3", "oracle", work["g0"])
    assert first == second
    assert first[0] == 0
    lines = first[1].splitlines()
    assert lines[0] == "arity 2" and lines[1] == "depth 3"
    assert all("->" in line for line in lines[2:])
    assert len(lines) == 2 + 12  # all 3*2*2 depth-3 words of the rooted chart

    code, _, err = _run(capsys, "oracle", work["g0"], "--depth", "1")
    assert code == 1 and "below the table depth" in err


def test_usage_errors_exit_one(capsys):
    code, _, err = _run(capsys, "no-such-command")
    assert code == 1 and "invalid choice" in err
    code, _, err = _run(capsys)
    assert code == 1


def test_internal_error_trap_exits_two(work, capsys, monkeypatch):
    import spherotree.cli as cli_module

    def boom(_):
        raise InternalError("fabricated invariant failure")

    monkeypatch.setattr(cli_module, "coset_code", boom)
    code, _, err = _run(capsys, "canon", work["g0"])
    assert code == 2
    assert "internal error (bug)" in err

    def crash(_):
        raise RuntimeError("unexpected")

    monkeypatch.setattr(cli_module, "coset_code", crash)
    code, _, err = _run(capsys, "canon", work["g0"])
    assert code == 2

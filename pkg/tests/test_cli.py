import json

from leafatlas.cli import main
from leafatlas.satake import builtin_catalog, render_catalog


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# atlas

def test_atlas_json_sl2(capsys):
    code, out, _ = run(capsys, "atlas", "--form", "sl(2,R)")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["seed"] == 0
    assert doc["flags"]["has_open_leaves"] is True
    assert len(doc["classes"]) == 2
    open_cls = [c for c in doc["classes"] if c["is_open"]]
    assert open_cls == [{
        "psi_word": [1], "codim_Y": 0, "a": 0, "t": 1, "leaf_dim": 2,
        "leaf_codim": 0, "family_dim": 0, "is_open": True,
        "is_closed_class": False, "parity_ok": True, "dims_in_range": True,
    }]
    assert any("contractible" in n for n in doc["notes"])


def test_atlas_unknown_form_lists_labels(capsys):
    code, out, err = run(capsys, "atlas", "--form", "nosuch")
    assert code == 1
    assert "sl(2,R)" in err and "su(2,1)" in err
    assert out == ""


def test_atlas_inline_diagram_markdown(capsys):
    code, out, _ = run(
        capsys, "atlas", "--type", "A2", "--arrows", "{(1,2)}", "--format", "md"
    )
    assert code == 0
    assert out.count("| s") + out.count("| e") == 4  # four classes
    assert "open leaves: yes" in out


def test_atlas_inline_invalid_diagram(capsys):
    code, _, err = run(capsys, "atlas", "--type", "A2", "--black", "{1}")
    assert code == 2
    assert "tau_w0_commute" in err


def test_atlas_inline_needs_rank(capsys):
    code, _, err = run(capsys, "atlas", "--type", "A")
    assert code == 1


def test_atlas_byte_identical_reruns(capsys):
    _, first, _ = run(capsys, "atlas", "--form", "su(2,1)", "--seed", "5")
    _, second, _ = run(capsys, "atlas", "--form", "su(2,1)", "--seed", "5")
    assert first == second


def test_atlas_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "atlas", "--form", "sl(2,R)", "--out", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["form"]["label"] == "sl(2,R)"


def test_atlas_weyl_cap_exceeded(capsys):
    code, _, err = run(capsys, "atlas", "--form", "so(8,1)", "--weyl-cap", "10")
    assert code == 2
    assert "cap" in err


# ---------------------------------------------------------------------------
# verify

def test_verify_small_battery(capsys):
    code, out, _ = run(
        capsys, "verify", "--form", "sl(2,R)", "--samples", "20", "--seed", "42"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    names = {c["name"] for c in doc["checks"]}
    assert {"jacobi", "annihilator_distance", "rank_vs_atlas",
            "example_formula", "multiplicativity"} <= names
    assert doc["seed"] == 42


def test_verify_no_realization(capsys):
    code, _, err = run(capsys, "verify", "--form", "so(4,1)")
    assert code == 2
    assert "no matrix realization" in err


def test_verify_unknown_form(capsys):
    code, _, err = run(capsys, "verify", "--form", "bogus")
    assert code == 1


def test_verify_tolerance_override_can_fail(capsys):
    code, out, _ = run(
        capsys, "verify", "--form", "sl(2,R)", "--samples", "10",
        "--tol", "multiplicativity=1e-30",
    )
    assert code == 2
    doc = json.loads(out)
    assert doc["passed"] is False
    bad = [c for c in doc["checks"] if not c["passed"]]
    assert [c["name"] for c in bad] == ["multiplicativity"]


def test_verify_bad_tolerance_syntax(capsys):
    code, _, err = run(capsys, "verify", "--form", "sl(2,R)", "--tol", "oops")
    assert code == 1


# ---------------------------------------------------------------------------
# catalog

def test_catalog_builtin_all_pass(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert len(doc["entries"]) == len(builtin_catalog())


def test_catalog_from_file(tmp_path, capsys):
    path = tmp_path / "cat.txt"
    path.write_text(render_catalog(builtin_catalog()[:3]))
    code, out, _ = run(capsys, "catalog", "--catalog", str(path))
    assert code == 0
    assert len(json.loads(out)["entries"]) == 3


def test_catalog_env_var(tmp_path, capsys, monkeypatch):
    path = tmp_path / "cat.txt"
    path.write_text("name=only; type=A1; black={}; arrows={}\n")
    monkeypatch.setenv("LEAFATLAS_CATALOG", str(path))
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    assert [e["label"] for e in json.loads(out)["entries"]] == ["only"]


def test_catalog_invalid_entry_flagged(tmp_path, capsys):
    path = tmp_path / "cat.txt"
    path.write_text("name=bad; type=A2; black={1}; arrows={}\n")
    code, out, _ = run(capsys, "catalog", "--catalog", str(path))
    assert code == 2
    doc = json.loads(out)
    assert doc["entries"][0]["passed"] is False
    assert "tau_w0_commute" in doc["entries"][0]["failed_checks"]


def test_catalog_parse_error_reports_line(tmp_path, capsys):
    path = tmp_path / "cat.txt"
    path.write_text("name=x; type=A2\n\nname=y; hue=blue\n")
    code, _, err = run(capsys, "catalog", "--catalog", str(path))
    assert code == 2
    assert "line 3" in err


def test_catalog_empty_file(tmp_path, capsys):
    path = tmp_path / "cat.txt"
    path.write_text("# intentionally empty\n")
    code, out, err = run(capsys, "catalog", "--catalog", str(path))
    assert code == 0
    assert "empty" in err
    assert json.loads(out)["entries"] == []


def test_catalog_markdown(capsys):
    code, out, _ = run(capsys, "catalog", "--format", "md")
    assert code == 0
    assert out.startswith("| label |")


# ---------------------------------------------------------------------------
# misc

def test_usage_error_exit_code(capsys):
    assert run(capsys, "atlas", "--format", "xml")[0] == 1


def test_version_flag(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert out.strip() == "0.1.0"

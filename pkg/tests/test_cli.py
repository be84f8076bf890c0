"""Command-line contract: exit codes, canonical bytes, report envelope."""

import json
import subprocess
import sys

import pytest

from preab.audit import AuditConfig, run_audit
from preab.cli import main
from preab.report import SCHEMA_VERSION, ReportDocument, emit_report, parse_report

import preab.cli as cli_module

SUBVECT_WITNESS = {
    "kind": "morphism", "backend": "subvect",
    "morphism": {
        "backend": "subvect",
        "dom": {"dim": 1, "subspace": {"rows": 1, "cols": 0, "entries": [[]]}},
        "cod": {"dim": 1, "subspace": {"rows": 1, "cols": 1, "entries": [["1"]]}},
        "matrix": {"rows": 1, "cols": 1, "entries": [["1"]]}}}

VACUOUS_PAIR = {
    "kind": "pair", "backend": "vectq",
    "outer": {"backend": "vectq", "dom": {"dim": 1}, "cod": {"dim": 1},
              "matrix": {"rows": 1, "cols": 1, "entries": [["1"]]}},
    "inner": {"backend": "vectq", "dom": {"dim": 1}, "cod": {"dim": 1},
              "matrix": {"rows": 1, "cols": 1, "entries": [["0"]]}}}

LATZ_DOUBLING = {"backend": "latz", "dom": {"rank": 1}, "cod": {"rank": 1},
                 "matrix": {"rows": 1, "cols": 1, "entries": [["2"]]}}

AUDIT_CONFIG = {"backend": "vectq", "seed": "cli-tests", "dim_bound": 3,
                "samples": {"default": 4, "strictness": 12, "semistable": 1},
                "min_nonvacuous": 2, "probe_steps": 3}


def run_main(argv, stdin_text=None, monkeypatch=None, capsys=None):
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", __import__("io").StringIO(stdin_text))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_json(tmp_path, name, blob):
    path = tmp_path / name
    path.write_text(json.dumps(blob))
    return str(path)


# ---------------------------------------------------------------------------
# report envelope


class TestReportDocument:
    def test_emit_parse_emit_is_identity(self):
        rep = run_audit(AuditConfig.from_json(AUDIT_CONFIG))
        doc = ReportDocument.from_audit(rep)
        text = doc.emit()
        assert ReportDocument.parse(text).emit() == text
        assert text.endswith("\n")

    def test_envelope_fields(self):
        rep = run_audit(AuditConfig.from_json(AUDIT_CONFIG))
        blob = ReportDocument.from_audit(rep).to_json()
        assert blob["schema_version"] == SCHEMA_VERSION
        assert blob["tool"]["name"] == "preab"
        assert blob["config"] == rep.config.to_json()
        assert blob["report"]["verdict"] == rep.verdict

    def test_emit_is_canonical(self):
        text = emit_report({"b": 1, "a": {"z": 2, "y": 3}})
        assert text == '{\n  "a": {\n    "y": 3,\n    "z": 2\n  },\n  "b": 1\n}\n'

    @pytest.mark.parametrize("text", [
        "not json",
        "[1, 2]",
        json.dumps({"schema_version": 2, "tool": {}, "config": {}, "report": {}}),
        json.dumps({"schema_version": 1, "tool": {}, "config": {}}),
        json.dumps({"tool": {}, "config": {}, "report": {}}),
    ])
    def test_parse_refuses_bad_documents(self, text):
        with pytest.raises(ValueError):
            parse_report(text)


# ---------------------------------------------------------------------------
# audit subcommand


class TestAuditCommand:
    def test_clean_audit_exits_zero(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "cfg.json", AUDIT_CONFIG)
        code = main(["audit", "--config", cfg])
        out, err = capsys.readouterr()
        assert code == 0 and err == ""
        doc = parse_report(out)
        assert doc["report"]["verdict"] == "abelian-consistent"
        assert doc["config"]["backend"] == "vectq"

    def test_out_file_matches_stdout_bytes(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "cfg.json", AUDIT_CONFIG)
        assert main(["audit", "--config", cfg]) == 0
        stdout_text, _ = capsys.readouterr()
        target = tmp_path / "report.json"
        assert main(["audit", "--config", cfg, "--out", str(target)]) == 0
        capsys.readouterr()
        assert target.read_text() == stdout_text

    def test_workers_do_not_change_bytes(self, tmp_path):
        cfg = write_json(tmp_path, "cfg.json", {**AUDIT_CONFIG, "backend": "subvect"})
        one, two = tmp_path / "one.json", tmp_path / "two.json"
        assert main(["audit", "--config", cfg, "--out", str(one)]) == 0
        assert main(["audit", "--config", cfg, "--out", str(two),
                     "--workers", "3"]) == 0
        assert one.read_text() == two.read_text()

    def test_seed_and_backend_overrides(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "cfg.json", AUDIT_CONFIG)
        code = main(["audit", "--config", cfg, "--backend", "latz", "--seed", "ovr"])
        out, _ = capsys.readouterr()
        assert code == 0
        doc = parse_report(out)
        assert doc["config"]["backend"] == "latz"
        assert doc["config"]["seed"] == "ovr"

    def test_config_on_stdin(self, monkeypatch, capsys):
        code, out, err = run_main(["audit", "--config", "-"],
                                  stdin_text=json.dumps(AUDIT_CONFIG),
                                  monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        assert parse_report(out)["report"]["verdict"] == "abelian-consistent"

    def test_inconclusive_exits_three(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "cfg.json",
                         {**AUDIT_CONFIG, "min_nonvacuous": 99})
        code = main(["audit", "--config", cfg])
        out, _ = capsys.readouterr()
        assert code == 3
        assert parse_report(out)["report"]["verdict"] == "inconclusive"

    def test_witnesses_exit_two(self, tmp_path, capsys, monkeypatch):
        real = run_audit

        def with_witness(cfg, workers=1):
            rep = real(cfg, workers=workers)
            object.__setattr__(rep, "witnesses", ({"check": "right.iii"},))
            return rep

        monkeypatch.setattr(cli_module, "run_audit", with_witness)
        cfg = write_json(tmp_path, "cfg.json", AUDIT_CONFIG)
        assert main(["audit", "--config", cfg]) == 2
        capsys.readouterr()

    @pytest.mark.parametrize("blob", [
        {"backend": "vectq", "bogus": 1},
        {"seed": "no-backend"},
        {"backend": "vectq", "dim_bound": 0},
    ])
    def test_bad_config_exits_one(self, tmp_path, capsys, blob):
        cfg = write_json(tmp_path, "cfg.json", blob)
        code = main(["audit", "--config", cfg])
        _, err = capsys.readouterr()
        assert code == 1 and err.startswith("preab audit:")

    def test_missing_file_exits_one(self, tmp_path, capsys):
        code = main(["audit", "--config", str(tmp_path / "absent.json")])
        _, err = capsys.readouterr()
        assert code == 1 and "absent.json" in err

    def test_unwritable_out_exits_one(self, tmp_path, capsys):
        cfg = write_json(tmp_path, "cfg.json", AUDIT_CONFIG)
        code = main(["audit", "--config", cfg,
                     "--out", str(tmp_path / "nodir" / "r.json")])
        _, err = capsys.readouterr()
        assert code == 1 and err.startswith("preab audit:")


# ---------------------------------------------------------------------------
# check subcommand


class TestCheckCommand:
    def test_pass_fail_vacuous_exit_codes(self, monkeypatch, capsys):
        code, out, _ = run_main(["check", "right.i"],
                                stdin_text=json.dumps(SUBVECT_WITNESS),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0 and json.loads(out)["verdict"] == "pass"

        code, out, _ = run_main(["check", "strict"],
                                stdin_text=json.dumps(SUBVECT_WITNESS),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 2
        result = json.loads(out)
        assert result["verdict"] == "fail"
        assert result["witness"]["reason"] == "middle-arrow-not-iso"

        code, out, _ = run_main(["check", "right.ii"],
                                stdin_text=json.dumps(VACUOUS_PAIR),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 3 and json.loads(out)["verdict"] == "vacuous"

    def test_instance_from_file(self, tmp_path, capsys):
        path = write_json(tmp_path, "inst.json", SUBVECT_WITNESS)
        code = main(["check", "strict", "--instance", path])
        out, _ = capsys.readouterr()
        assert code == 2 and json.loads(out)["check"] == "strict"

    def test_unknown_check_name_exits_one(self, monkeypatch, capsys):
        code, _, err = run_main(["check", "right.ix"],
                                stdin_text=json.dumps(SUBVECT_WITNESS),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1 and "unknown check" in err

    def test_backend_mismatch_exits_one(self, monkeypatch, capsys):
        code, _, err = run_main(["check", "strict", "--backend", "vectq"],
                                stdin_text=json.dumps(SUBVECT_WITNESS),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1 and "does not match" in err

    @pytest.mark.parametrize("text", [
        "not json",
        json.dumps({"kind": "morphism"}),
        json.dumps({**SUBVECT_WITNESS, "kind": "cube"}),
    ])
    def test_malformed_instance_exits_one(self, monkeypatch, capsys, text):
        code, _, err = run_main(["check", "strict"], stdin_text=text,
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1 and err.startswith("preab check:")


# ---------------------------------------------------------------------------
# decompose subcommand


class TestDecomposeCommand:
    def test_doubling_map_decomposition(self, monkeypatch, capsys):
        code, out, _ = run_main(["decompose"], stdin_text=json.dumps(LATZ_DOUBLING),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 0
        blob = json.loads(out)
        assert blob["coim"]["matrix"]["entries"] == [["1"]]
        assert blob["fbar"]["matrix"]["entries"] == [["2"]]
        assert blob["im"]["matrix"]["entries"] == [["1"]]
        assert blob["flags"] == {"mono": True, "epi": True, "bimorphism": True,
                                 "iso": False, "strict": False,
                                 "is_kernel": False, "is_cokernel": False}
        assert out == json.dumps(blob, sort_keys=True, indent=2) + "\n"

    def test_morphism_from_file(self, tmp_path, capsys):
        path = write_json(tmp_path, "f.json", LATZ_DOUBLING)
        code = main(["decompose", "--morphism", path])
        out, _ = capsys.readouterr()
        assert code == 0 and json.loads(out)["fbar"]["matrix"]["entries"] == [["2"]]

    @pytest.mark.parametrize("text", [
        "not json",
        json.dumps(["latz"]),
        json.dumps({"backend": "latz"}),
        json.dumps({**LATZ_DOUBLING, "matrix": {"rows": 2, "cols": 1,
                                                "entries": [["1"]]}}),
    ])
    def test_malformed_morphism_exits_one(self, monkeypatch, capsys, text):
        code, _, err = run_main(["decompose"], stdin_text=text,
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1 and err.startswith("preab decompose:")

    def test_backend_mismatch_exits_one(self, monkeypatch, capsys):
        code, _, err = run_main(["decompose", "--backend", "vectq"],
                                stdin_text=json.dumps(LATZ_DOUBLING),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 1 and "does not match" in err


# ---------------------------------------------------------------------------
# wiring


class TestEntryPoints:
    def test_missing_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
        capsys.readouterr()

    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "preab.cli", "check", "strict"],
            input=json.dumps(SUBVECT_WITNESS), capture_output=True, text=True)
        assert proc.returncode == 2
        assert json.loads(proc.stdout)["verdict"] == "fail"

    def test_shrunk_audit_witness_replays_through_check(self, monkeypatch, capsys):
        # the loop the report is designed for: shrink, save, replay
        from preab.audit import shrink
        from preab.conditions import MorphismInstance, run_check
        from preab.backends import get_backend
        from preab.linalg import RatMatrix, Subspace

        cat = get_backend("subvect")
        dom = cat.make_object((2, (Subspace.zero(2),)))
        cod = cat.make_object((2, (Subspace.full(2),)))
        witness = cat.make_morphism(dom, cod, RatMatrix.identity(2))
        small, _ = shrink(run_check("strict", MorphismInstance(witness)))
        code, out, _ = run_main(["check", "strict"],
                                stdin_text=json.dumps(small.instance.to_json()),
                                monkeypatch=monkeypatch, capsys=capsys)
        assert code == 2 and json.loads(out)["verdict"] == "fail"

"""Command-line behavior and exit codes."""

import json
import random

import pytest

from conftest import bundled_tree_text
from generators import random_table
from triagebot.cli import main
from triagebot.engine import parse_answer, run_path
from triagebot.model import export_table


@pytest.fixture()
def table_file(tmp_path):
    path = tmp_path / "triage_tree.csv"
    path.write_text(bundled_tree_text(), encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_bundled_tree_exits_zero_with_one_warning_line(self, capsys, table_file):
        code, out, _ = run_cli(capsys, "validate", table_file)
        assert code == 0
        lines = [l for l in out.strip().splitlines() if l]
        assert len(lines) == 1
        assert lines[0].startswith("WARNING MissingNegative @intention-01")

    def test_cycle_exits_one(self, capsys, tmp_path):
        mutated = bundled_tree_text().replace(
            "Intention 06,The calculus is correct?,No,Proceed for intention 08",
            "Intention 06,The calculus is correct?,No,Proceed for intention 02",
        )
        path = tmp_path / "cycle.csv"
        path.write_text(mutated, encoding="utf-8")
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 1
        assert any(l.startswith("ERROR CycleDetected") for l in out.splitlines())

    def test_missing_file_exits_two(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "validate", str(tmp_path / "absent.csv"))
        assert code == 2
        assert err

    def test_json_output(self, capsys, table_file):
        code, out, _ = run_cli(capsys, "--json", "validate", table_file)
        assert code == 0
        body = json.loads(out)
        assert body["ok"] is True

    def test_malformed_document_exits_one(self, capsys, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("not,a,table\n1,2,3\n", encoding="utf-8")
        code, _, _ = run_cli(capsys, "validate", str(path))
        assert code == 1


class TestReplay:
    def test_notify_path(self, capsys, table_file):
        code, out, _ = run_cli(capsys, "replay", "--table", table_file,
                               "--answers", "yes,yes")
        assert code == 0
        assert out.strip() == "01 02 08 NotifyResponsible"

    def test_root_negative(self, capsys, table_file):
        code, out, _ = run_cli(capsys, "replay", "--table", table_file,
                               "--answers", "no")
        assert code == 0
        assert out.strip() == "01 CloseNotIncident"

    def test_align_user_path(self, capsys, table_file):
        code, out, _ = run_cli(capsys, "replay", "--table", table_file,
                               "--answers", "yes,no,no,no,yes,yes")
        assert code == 0
        assert out.strip() == "01 02 03 04 05 06 07 AlignUser"

    def test_bad_answer_word_exits_two(self, capsys, table_file):
        code, _, err = run_cli(capsys, "replay", "--table", table_file,
                               "--answers", "maybe")
        assert code == 2

    def test_exhausted_answers_exit_one(self, capsys, table_file):
        code, _, err = run_cli(capsys, "replay", "--table", table_file,
                               "--answers", "yes")
        assert code == 1

    def test_matches_run_path_on_random_tables(self, capsys, tmp_path):
        rng = random.Random(610)
        for i in range(25):
            table = random_table(rng, csv_representable=True)
            path = tmp_path / f"t{i}.csv"
            path.write_text(export_table(table, "csv"), encoding="utf-8")
            length = rng.randint(1, len(table.intentions))
            words = [rng.choice(["yes", "no"]) for _ in range(length)]
            answers = [parse_answer(w) for w in words]
            try:
                event, visited = run_path(table, answers)
            except Exception:
                code, _, _ = run_cli(capsys, "replay", "--table", str(path),
                                     "--answers", ",".join(words))
                assert code in (1, 2)
                continue
            code, out, _ = run_cli(capsys, "replay", "--table", str(path),
                                   "--answers", ",".join(words))
            assert code == 0
            real = [v for v in visited if v in table]
            expected = " ".join(v.removeprefix("intention-") for v in real)
            assert out.strip() == f"{expected} {event.value}"


class TestChat:
    def test_align_user_conversation(self, capsys, table_file, monkeypatch, tmp_path):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("yes\nno\nno\nno\nyes\nyes\n"))
        monkeypatch.chdir(tmp_path)
        code, out, err = run_cli(capsys, "chat", "--table", table_file)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "Software Incident?"
        assert lines[-1] == "EVENT AlignUser"
        assert "transcript written to" in err
        logs = list(tmp_path.glob("transcript-*.log"))
        assert len(logs) == 1
        transcript = logs[0].read_text(encoding="utf-8")
        assert transcript.startswith("BOT: Software Incident?")
        assert "USER: yes" in transcript

    def test_notify_conversation(self, capsys, table_file, monkeypatch, tmp_path):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("yes\nyes\n"))
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "chat", "--table", table_file)
        assert code == 0
        assert out.strip().splitlines()[-1] == "EVENT NotifyResponsible"

    def test_unclear_answer_reprompts(self, capsys, table_file, monkeypatch, tmp_path):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO("maybe\nyes\nyes\n"))
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli(capsys, "chat", "--table", table_file)
        assert code == 0
        assert "Sorry, I didn't understand. Software Incident?" in out

    def test_invalid_table_exits_one(self, capsys, tmp_path, monkeypatch):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "intention,response,condition,action\n"
            "Intention 01,Q?,Yes,Proceed for intention 09\n",
            encoding="utf-8",
        )
        code, _, err = run_cli(capsys, "chat", "--table", str(bad))
        assert code == 1


class TestReport:
    def test_empty_store_reports_zero(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "report", "fallbacks",
            "--data-dir", str(tmp_path / "empty-data"),
            "--from", "0", "--to", "99999999999",
        )
        assert code == 0
        body = json.loads(out)
        assert body["total"] == 0
        assert body["per_intention"] == {}

    def test_reports_recorded_fallbacks(self, capsys, tmp_path):
        from triagebot.service import TriageService

        data_dir = tmp_path / "data"
        service = TriageService(data_dir)
        service.import_table(bundled_tree_text())
        session, _ = service.create_session()
        service.post_message(session.id, "hrm?")

        code, out, _ = run_cli(
            capsys, "report", "fallbacks", "--data-dir", str(data_dir),
            "--from", "0", "--to", "99999999999",
        )
        assert code == 0
        body = json.loads(out)
        assert body["total"] == 1
        assert body["per_intention"] == {"intention-01": 1}


class TestUsage:
    def test_no_command_is_usage_error(self, capsys):
        assert run_cli(capsys)[0] == 2

    def test_unknown_command_is_usage_error(self, capsys):
        assert run_cli(capsys, "frobnicate")[0] == 2

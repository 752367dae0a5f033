"""Command line driver: each subcommand, exit codes, then end to end."""

import io
import subprocess
import sys

import pytest

from conftest import ROOT, SAMPLES
from graphfa import formats
from graphfa.cli import main
from graphfa.langs import LANGUAGES
from graphfa.model import interpret_string, iso_check


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def dfa_files(tmp_path_factory, dfas):
    """Compiled automaton files for every language, plus an uncertified one."""
    root = tmp_path_factory.mktemp("dfa")
    paths = {}
    for name, d in dfas.items():
        p = root / f"{name}.dfa"
        p.write_text(formats.write_dfa(d))
        paths[name] = str(p)
    bare = root / "uncertified.dfa"
    bare.write_text(formats.write_dfa(dfas["abc"].with_certificates(False, False)))
    paths["uncertified"] = str(bare)
    return paths


class TestCompile:
    def test_regex_certified(self, tmp_path, capsys):
        out = tmp_path / "abc.dfa"
        code, stdout, _ = run_cli(
            capsys, "compile", str(SAMPLES / "abc.regex"), "-o", str(out))
        assert code == 0
        assert "ts: pass" in stdout
        assert "fec: pass" in stdout
        assert "states: 7" in stdout
        assert "certified: yes" in stdout
        loaded = formats.read_dfa(out.read_text())
        assert loaded.certified
        assert loaded.n_states == 7

    def test_report_on_stderr_when_writing_stdout(self, capsys):
        code, stdout, stderr = run_cli(capsys, "compile", str(SAMPLES / "abc.regex"))
        assert code == 0
        assert stdout.startswith("dfa-format 1")
        assert "certified: yes" in stderr

    def test_failed_check_exits_one(self, tmp_path, capsys):
        out = tmp_path / "tangle.dfa"
        code, stdout, _ = run_cli(
            capsys, "compile", str(SAMPLES / "tangle.auto"), "-o", str(out))
        assert code == 1
        assert "ts: fail" in stdout
        assert "certified: no" in stdout
        assert not out.exists()

    def test_allow_uncertified_still_writes(self, tmp_path, capsys):
        out = tmp_path / "tangle.dfa"
        code, _, _ = run_cli(capsys, "compile", str(SAMPLES / "tangle.auto"),
                             "-o", str(out), "--allow-uncertified")
        assert code == 1
        assert not formats.read_dfa(out.read_text()).certified

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.regex"
        bad.write_text("symbol a(2)\na^13_23 |\n")
        code, _, stderr = run_cli(capsys, "compile", str(bad))
        assert code == 2
        assert "error:" in stderr

    def test_missing_file(self, capsys):
        code, _, stderr = run_cli(capsys, "compile", "/nonexistent/x.regex")
        assert code == 2
        assert "error:" in stderr


class TestRecognize:
    def test_accept(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["abc"],
                                  str(SAMPLES / "smt.graph"))
        assert code == 0
        assert stdout.strip() == "accept"

    def test_reject(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["palindromes"],
                                  str(SAMPLES / "ab.graph"))
        assert code == 1
        assert stdout.startswith("reject:")

    def test_uncertified_refused(self, dfa_files, capsys):
        code, _, stderr = run_cli(capsys, "recognize", "-a", dfa_files["uncertified"],
                                  str(SAMPLES / "smt.graph"))
        assert code == 1
        assert "refused:" in stderr

    def test_budget_exhausted(self, capsys):
        code, _, stderr = run_cli(
            capsys, "recognize", "-a", str(SAMPLES / "abc.auto"),
            str(SAMPLES / "smt.graph"), "--mode", "backtracking", "--budget", "1")
        assert code == 3
        assert "gave up:" in stderr

    def test_backtracking_witness_on_plain_automaton(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "recognize", "-a", str(SAMPLES / "abc.auto"),
            str(SAMPLES / "smt.graph"), "--mode", "backtracking", "--witness")
        assert code == 0
        lines = stdout.splitlines()
        assert lines[0] == "accept"
        assert len(lines[1].split()) == 9

    def test_witness_replays_to_input_graph(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["abc"],
                                  str(SAMPLES / "smt.graph"), "--witness")
        assert code == 0
        witness_line = stdout.splitlines()[1]
        vocab = LANGUAGES["abc"].vocab
        word = [formats.parse_symbol(tok, vocab) for tok in witness_line.split()]
        g = formats.parse_graph((SAMPLES / "smt.graph").read_text())
        assert iso_check(interpret_string(word), g)

    def test_trace_lines(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["abc"],
                                  str(SAMPLES / "smt.graph"), "--trace")
        assert code == 0
        lines = stdout.splitlines()
        assert lines[0] == "accept"
        assert lines[1].startswith("step 0:")
        assert len([l for l in lines if l.startswith("step ")]) == 9

    def test_audit_mode(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["abc"],
                                  str(SAMPLES / "smt.graph"), "--audit",
                                  "--engine", "python")
        assert code == 0
        assert stdout.strip() == "accept"

    def test_graph_from_stdin(self, dfa_files, capsys, monkeypatch):
        monkeypatch.setattr(sys, "stdin",
                            io.StringIO((SAMPLES / "smt.graph").read_text()))
        code, stdout, _ = run_cli(capsys, "recognize", "-a", dfa_files["abc"], "-")
        assert code == 0
        assert stdout.strip() == "accept"


class TestGen:
    def test_exact_edge_count(self, tmp_path, capsys):
        out = tmp_path / "big.graph"
        code, _, _ = run_cli(capsys, "gen", "abc", "--edges", "25023",
                             "-o", str(out))
        assert code == 0
        g = formats.parse_graph(out.read_text())
        assert len(g.edges) == 25023

    def test_off_lattice_size(self, capsys):
        code, _, stderr = run_cli(capsys, "gen", "abc", "--edges", "4")
        assert code == 2
        assert "error:" in stderr

    def test_variant_and_shuffle(self, tmp_path, capsys):
        plain = tmp_path / "plain.graph"
        mixed = tmp_path / "mixed.graph"
        assert run_cli(capsys, "gen", "spikes", "--edges", "10", "--variant", "2",
                       "-o", str(plain))[0] == 0
        assert run_cli(capsys, "gen", "spikes", "--edges", "10", "--variant", "2",
                       "--shuffle-seed", "3", "-o", str(mixed))[0] == 0
        g1 = formats.parse_graph(plain.read_text())
        g2 = formats.parse_graph(mixed.read_text())
        assert [e.att for e in g1.edges] != [e.att for e in g2.edges]
        assert iso_check(g1, g2)


class TestBench:
    def test_table_and_csv(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code, stdout, _ = run_cli(
            capsys, "bench", "abc", "--sizes", "9,12", "--reps", "3",
            "--drops", "1", "--engine", "python", "--csv", str(out))
        assert code == 0
        lines = stdout.splitlines()
        assert lines[0].split()[0] == "language"
        assert len(lines) == 3
        header = out.read_text().splitlines()[0]
        assert header == "language,mode,edges,mean_s,build_s,exec_s,reps,dropped,seed"

    def test_sizes_snapped(self, capsys):
        code, stdout, _ = run_cli(capsys, "bench", "abc", "--sizes", "10",
                                  "--reps", "2", "--drops", "0",
                                  "--engine", "python")
        assert code == 0
        assert stdout.splitlines()[1].split()[2] == "9"

    def test_bad_size_text(self, capsys):
        code, _, stderr = run_cli(capsys, "bench", "abc", "--sizes", "x",
                                  "--reps", "2", "--drops", "0")
        assert code == 2
        assert "error:" in stderr


class TestExport:
    def test_compiled_automaton(self, dfa_files, capsys):
        code, stdout, _ = run_cli(capsys, "export", dfa_files["abc"])
        assert code == 0
        assert stdout.startswith("digraph")
        assert stdout.count("->") == 9

    def test_graph(self, capsys):
        code, stdout, _ = run_cli(capsys, "export", str(SAMPLES / "wheel6.graph"))
        assert code == 0
        assert stdout.count("->") == 12


class TestEndToEnd:
    def test_compile_gen_recognize_replay(self, tmp_path, capsys):
        for name, spec in LANGUAGES.items():
            dfa_path = tmp_path / f"{name}.dfa"
            graph_path = tmp_path / f"{name}.graph"
            assert run_cli(capsys, "compile", str(SAMPLES / f"{name}.regex"),
                           "-o", str(dfa_path))[0] == 0
            edges = spec.snap(14)
            assert run_cli(capsys, "gen", name, "--edges", str(edges),
                           "-o", str(graph_path))[0] == 0
            code, stdout, _ = run_cli(capsys, "recognize", "-a", str(dfa_path),
                                      str(graph_path), "--witness")
            assert code == 0, name
            lines = stdout.splitlines()
            assert lines[0] == "accept"
            word = [formats.parse_symbol(tok, spec.vocab)
                    for tok in lines[1].split()]
            g = formats.parse_graph(graph_path.read_text())
            assert iso_check(interpret_string(word), g), name


def test_module_help_smoke():
    proc = subprocess.run([sys.executable, "-m", "graphfa", "--help"],
                          capture_output=True, text=True, cwd=str(ROOT))
    assert proc.returncode == 0
    assert "compile" in proc.stdout

import json

import pytest

from asm import Isa, parse_program, print_program
from cli import RunConfig, input_id_of
from core.app import main
from core.errors import ConfigError
from core.settings import Settings, write_json
from guess import load_guesses
from helpers import corpus_path


def _run(config_path, *argv):
    return main(["--config", str(config_path), *map(str, argv)])


def _records(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@pytest.fixture
def guesses(tmp_path, no_user_config):
    path = tmp_path / "guesses.jsonl"
    code = _run(no_user_config, "mutate", corpus_path("add_const", Isa.RISCV64),
                "-i", corpus_path("add_const", Isa.ARMV8), "-m", "replace-immediate", "--seed", 3,
                "--samples", 2, "-o", path)
    assert code == 0
    return path


def test_mutate_writes_ranked_guesses(guesses):
    loaded = load_guesses(guesses)
    assert list(loaded) == ["add_const"]
    assert [g.rank for g in loaded["add_const"]] == [1, 2]
    assert [g.metadata["seed"] for g in loaded["add_const"]] == [3, 4]


def test_transpile_repairs_and_reports(tmp_path, guesses, no_user_config):
    out_dir, report = tmp_path / "out", tmp_path / "report.jsonl"
    code = _run(no_user_config, "transpile", corpus_path("add_const", Isa.ARMV8), "-g", guesses,
                "-o", out_dir, "--report-path", report, "--top-k", 2)
    assert code == 0
    written = out_dir / "add_const.out.rv.s"
    truth = parse_program(corpus_path("add_const", Isa.RISCV64).read_text(), Isa.RISCV64)
    assert print_program(parse_program(written.read_text(), Isa.RISCV64)) == print_program(truth)
    records = _records(report)
    assert [r["function"] for r in records] == ["compute", "main"]
    assert {r["status"] for r in records} == {"verified"}
    assert records[0]["samples_used"] == 1
    assert records[0]["config"]["top_k"] == 2


def test_report_table(tmp_path, guesses, no_user_config, capsys):
    report = tmp_path / "report.jsonl"
    _run(no_user_config, "transpile", corpus_path("add_const", Isa.ARMV8), "-g", guesses,
         "-o", tmp_path / "out", "--report-path", report)
    capsys.readouterr()
    assert _run(no_user_config, "report", report, "--json") == 0
    table = json.loads(capsys.readouterr().out)
    assert table["examples"] == 1
    assert table["counts"]["Correct"] == 1
    assert table["samples_used"] == 1.0


def test_empty_report(no_user_config, capsys):
    assert _run(no_user_config, "report") == 0
    out = capsys.readouterr().out
    assert "examples" in out
    assert "average samples used: 0.00" in out


def test_malformed_guesses_file(tmp_path, no_user_config):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n", encoding="utf-8")
    assert _run(no_user_config, "transpile", corpus_path("add_const", Isa.ARMV8), "-g", bad) == 2


def test_missing_guesses_for_an_input(tmp_path, guesses, no_user_config):
    code = _run(no_user_config, "transpile", corpus_path("sum_loop", Isa.ARMV8), "-g", guesses,
                "-o", tmp_path / "out", "--report-path", tmp_path / "r.jsonl")
    assert code == 2


def test_solve_prints_the_assignment(tmp_path, no_user_config, capsys):
    spec = tmp_path / "spec.arm.s"
    spec.write_text("\tadd\tw0, w0, 5\n", encoding="utf-8")
    sketch = tmp_path / "sketch.rv.s"
    sketch.write_text("\taddiw\ta0,a0,?0\n", encoding="utf-8")
    smt = tmp_path / "query.smt2"
    assert _run(no_user_config, "solve", spec, sketch, "--smt", smt) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "solved"
    assert out["assignment"] == {"?0": 5}
    assert out["lines"] == ["addiw\ta0, a0, 5"]
    assert smt.read_text().startswith("(set-logic QF_BV)")


def test_exec_block(tmp_path, no_user_config, capsys):
    path = tmp_path / "block.arm.s"
    path.write_text("\tadd\tx0, x1, 2\n", encoding="utf-8")
    assert _run(no_user_config, "exec-block", path, "--set", "x1=40") == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"inputs": {"x1": "0x28"}, "outputs": {"x0": "0x2a"}}


def test_exec_block_bad_assignment(tmp_path, no_user_config):
    path = tmp_path / "block.arm.s"
    path.write_text("\tadd\tx0, x1, 2\n", encoding="utf-8")
    assert _run(no_user_config, "exec-block", path, "--set", "x1") == 2


def test_blocks_listing(no_user_config, capsys):
    assert _run(no_user_config, "blocks", corpus_path("add_const", Isa.ARMV8)) == 0
    records = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert records[0]["lines"] == ["add\tw0, w0, 5"]
    assert records[0]["solvable"]
    assert _run(no_user_config, "blocks", corpus_path("add_const", Isa.ARMV8), "--spans") == 0
    spans = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(spans) > len(records)


def test_unknown_isa_needs_a_flag(tmp_path, no_user_config):
    path = tmp_path / "prog.s"
    path.write_text(corpus_path("add_const", Isa.ARMV8).read_text(), encoding="utf-8")
    assert _run(no_user_config, "blocks", path) == 2
    assert _run(no_user_config, "blocks", path, "--source", "armv8") == 0


def test_input_ids():
    assert input_id_of("dir/prog.arm.s") == "prog"
    assert input_id_of("prog.riscv64.s") == "prog"
    assert input_id_of("prog.s") == "prog"


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(gamma=0)
    with pytest.raises(ConfigError):
        RunConfig(jobs=0)
    with pytest.raises(ConfigError):
        RunConfig(source_isa="armv8", target_isa="armv8")
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"source_isa": "mips"})


def test_settings_layering(tmp_path):
    path = tmp_path / "config.json"
    write_json(path, {"top_k": 5, "gamma": 0.8, "solver": {"max_enum": 7}, "future_key": 1})
    config = RunConfig.from_settings(Settings(path))
    assert (config.top_k, config.gamma, config.solver.max_enum) == (5, 0.8, 7)
    flagged = config.with_overrides(top_k=None, gamma=0.5, seed=9)
    assert (flagged.top_k, flagged.gamma, flagged.verifier.seed) == (5, 0.5, 9)
    assert RunConfig.from_dict(config.to_dict()) == config


def test_bad_config_file_exits_with_error(tmp_path):
    path = tmp_path / "config.json"
    write_json(path, {"gamma": 5})
    assert _run(path, "report") == 2

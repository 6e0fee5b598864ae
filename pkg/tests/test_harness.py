import json
import shutil

import pytest

from mlrepair.harness import CorpusError, check_result, load_bug, percentage, stats
from mlrepair.harness.bench import BenchRow, table_json
from mlrepair.harness.cli import main
from mlrepair.patchmodel import PatchClass, ast_diff
from mlrepair.repair.result import RepairResult


def copy_bug(corpus_dir, tmp_path, name):
    dst = tmp_path / name
    shutil.copytree(corpus_dir / name, dst)
    return dst


def test_load_twin_guard(corpus_dir):
    bug = load_bug(corpus_dir / "twin_guard")
    assert bug.id == "twin_guard"
    assert bug.expected_class == PatchClass.SIMILAR_EXACT


def test_missing_fixed_program(corpus_dir, tmp_path):
    d = copy_bug(corpus_dir, tmp_path, "twin_guard")
    (d / "fixed.ml").unlink()
    with pytest.raises(CorpusError, match="fixed.ml"):
        load_bug(d)


def test_contradicting_label(corpus_dir, tmp_path):
    d = copy_bug(corpus_dir, tmp_path, "twin_guard")
    meta = json.loads((d / "meta.json").read_text())
    meta["expected_class"] = "relevant"
    (d / "meta.json").write_text(json.dumps(meta))
    with pytest.raises(CorpusError, match="label"):
        load_bug(d)
    assert load_bug(d, check=False).expected_class == PatchClass.RELEVANT


def test_fixed_program_must_pass(corpus_dir, tmp_path):
    d = copy_bug(corpus_dir, tmp_path, "single_a")
    shutil.copy(d / "program.ml", d / "fixed.ml")
    with pytest.raises(CorpusError, match="fails its suite"):
        load_bug(d)


def test_percentage():
    assert percentage(70, 244) == 28.69
    assert percentage(165, 244) == 67.62
    assert percentage(1, 8) == 12.5
    with pytest.raises(ValueError):
        percentage(1, 0)


def test_stats_match_labels(corpus_dir, bugs):
    rows = {r.cls: r for r in stats(corpus_dir)}
    expected = {c: 0 for c in PatchClass}
    for b in bugs.values():
        expected[b.expected_class] += 1
    assert {c: r.count for c, r in rows.items()} == expected
    assert sum(r.count for r in rows.values()) == len(bugs)
    for r in rows.values():
        assert r.percentage == percentage(r.count, len(bugs))


def test_ground_truth_is_plausible_and_correct(bug):
    b = bug("twin_guard")
    res = RepairResult("Success", b.ground_truth(), b.fixed)
    assert check_result(b, res, trials=300) == (True, True)


def test_empty_patch_is_neither(bug):
    b = bug("dup_flag")
    res = RepairResult("Success", ast_diff(b.buggy, b.buggy), b.buggy)
    assert check_result(b, res, trials=300) == (False, False)


def test_overfitting_patch_is_plausible_only(bug, s1_runs):
    b = bug("multi_assert")
    assert check_result(b, s1_runs["multi_assert"], trials=1000) == (True, False)


def test_bench_row_invariant():
    with pytest.raises(ValueError):
        BenchRow("x", "other", "s1", "Success", 0.0, False, True, 1, 1)
    row = BenchRow("x", "other", "s1", "Success", 1.234, True, True, 1, 1)
    assert "wall_time" not in json.loads(table_json([row]))["rows"][0]
    assert json.loads(table_json([row], timing=True))["rows"][0]["wall_time"] == 1.234


# -- CLI --


def test_cli_run_tests(corpus_dir, capsys):
    assert main(["run-tests", str(corpus_dir / "multi_assert")]) == 0
    assert "1 failing" in capsys.readouterr().out
    assert main(["run-tests", "--fixed", str(corpus_dir / "multi_assert")]) == 0
    assert "0 failing" in capsys.readouterr().out


def test_cli_classify(corpus_dir, capsys):
    assert main(["classify", str(corpus_dir / "dup_flag")]) == 0
    assert capsys.readouterr().out.strip() == "Relevant"


def test_cli_localize(corpus_dir, capsys):
    assert main(["localize", str(corpus_dir / "twin_guard"), "--top-k", "3", "--line-assumption"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[0].split()[-1] == "1.0000"


def test_cli_stats(corpus_dir, capsys):
    assert main(["stats", str(corpus_dir)]) == 0
    out = capsys.readouterr().out
    assert "SimilarExact" in out and "%" in out


def test_cli_epc(corpus_dir, bug, capsys):
    from mlrepair.testkit import run_suite

    b = bug("dup_flag")
    failing = run_suite(b.buggy, b.suite).failing_names()[0]
    code = main(["epc", str(corpus_dir / "dup_flag"), "--fn", "add_or_update", "--line", "8", "--test", failing])
    assert code == 0
    assert json.loads(capsys.readouterr().out)
    assert main(["epc", str(corpus_dir / "dup_flag"), "--fn", "add_or_update", "--line", "999", "--test", failing]) == 2


def test_cli_repair_writes_artifacts(corpus_dir, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["repair", str(corpus_dir / "dup_flag"), "--strategy", "s2", "--line-assumption", "--out", str(out)])
    assert code == 0
    assert "status: Success" in capsys.readouterr().out
    assert json.loads((out / "result.json").read_text())["status"] == "Success"
    assert json.loads((out / "patch.json").read_text())
    assert (out / "witness.json").is_file()


def test_cli_repair_failure_exit_code(corpus_dir, capsys):
    assert main(["repair", str(corpus_dir / "no_angelic"), "--strategy", "s2"]) == 1
    assert "NoAngelicValue" in capsys.readouterr().out


def test_cli_usage_errors(corpus_dir, tmp_path, capsys):
    assert main(["classify", str(tmp_path / "nope")]) == 2
    assert main(["repair", str(corpus_dir / "dup_flag"), "--strategy", "s9"]) == 2
    assert main([]) == 2

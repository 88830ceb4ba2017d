import json

import pytest

from cli import EXIT_ANALYSIS, EXIT_INPUT, main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _analyze(capsys, toy_path, *extra):
    code, out, _ = _run(capsys, "analyze", toy_path, "--deterministic", *extra)
    assert code == 0
    return json.loads(out)


def test_clipping_refutes_seven_tenths(capsys, toy_path):
    report = _analyze(capsys, toy_path, "--clipping", "--eta", 1, "--budget", 4, "--lambda", "7/10")
    assert report["bound"] == 0.75
    assert report["bound_exact"] == "3/4"
    assert report["bound_kind"] == "lower"
    assert report["verdict"] == "refuted"
    assert report["explored_beliefs"] == 5
    assert report["cut_transitions"] == 1
    assert report["clip_transitions"] == 1
    assert report["eta"] == 1
    assert report["model_id"] == "guess_reward"
    assert report["wall_time_ms"] == 0


def test_bound_below_threshold_is_inconclusive(capsys, toy_path):
    report = _analyze(capsys, toy_path, "--clipping", "--eta", 1, "--budget", 4, "--lambda", "9/10")
    assert report["verdict"] == "inconclusive"
    assert report["threshold"] == "9/10"


def test_cutoff_only_with_a_larger_budget(capsys, toy_path):
    report = _analyze(capsys, toy_path, "--budget", 11)
    assert report["bound"] >= 1 - 2 ** -8 - 1e-12
    assert report["clip_transitions"] == 0
    assert report["eta"] is None


def test_default_threshold_uses_the_size_factor(capsys, toy_path):
    assert _analyze(capsys, toy_path)["bound"] == 0.875


def test_zero_budget_gives_the_initial_cutoff(capsys, toy_path):
    report = _analyze(capsys, toy_path, "--budget", 0)
    assert report["bound"] == 0
    assert report["explored_beliefs"] == 1


def test_reachability_objective(capsys, toy_path):
    report = _analyze(capsys, toy_path, "--objective", "reachability")
    assert report["bound"] == 1


def test_goal_observations_from_the_command_line(capsys, toy_path, tmp_path):
    stripped = tmp_path / "no_goal.pomdp"
    stripped.write_text(toy_path.read_text(encoding="utf-8").replace("goal-obs orange", ""), encoding="utf-8")
    report = _analyze(capsys, stripped, "--goal-obs", "orange", "--budget", 4)
    assert report["bound"] == 0.5
    code, _, err = _run(capsys, "analyze", stripped)
    assert code == EXIT_INPUT
    assert "no goal" in err


def test_sweep(capsys, toy_path):
    code, out, _ = _run(capsys, "sweep", toy_path, "--budgets", "0,2,4,8", "--deterministic")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "budget,explored,bound,time_ms"
    bounds = [float(line.split(",")[2]) for line in lines[1:]]
    assert bounds == [0.0, 0.0, 0.5, 0.96875]
    assert all(line.endswith(",0") for line in lines[1:])
    _, again, _ = _run(capsys, "sweep", toy_path, "--budgets", "0,2,4,8", "--deterministic")
    assert again == out


def test_sweep_writes_a_file(capsys, toy_path, tmp_path):
    target = tmp_path / "sweep.csv"
    code, out, _ = _run(capsys, "sweep", toy_path, "--budgets", "3", "--output", target)
    assert code == 0 and out == ""
    assert target.read_text(encoding="utf-8").startswith("budget,explored,bound,time_ms")


def test_compare(capsys, toy_path):
    code, out, _ = _run(capsys, "compare", toy_path, "--budget", 4, "--etas", "1,2", "--deterministic")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "config,eta,explored,cut,clip,bound,time_ms"
    assert lines[1].startswith("cutoff,,")
    assert lines[2].startswith("clipping,1,5,1,1,0.75")
    assert len(lines) == 4


def test_bad_options_exit_two(capsys, toy_path, tmp_path):
    code, _, err = _run(capsys, "analyze", tmp_path / "missing.pomdp")
    assert code == EXIT_INPUT
    assert "cannot read" in err
    broken = tmp_path / "broken.pomdp"
    broken.write_text("pomdp\nstates two\n", encoding="utf-8")
    assert _run(capsys, "analyze", broken)[0] == EXIT_INPUT
    assert _run(capsys, "analyze", toy_path, "--eta", 0, "--clipping")[0] == EXIT_INPUT
    assert _run(capsys, "analyze", toy_path, "--goal-obs", "purple")[0] == EXIT_INPUT
    with pytest.raises(SystemExit):
        main(["sweep", str(toy_path), "--budgets", "a,b"])


def test_hard_cap_exits_three(capsys, toy_path):
    code, out, err = _run(capsys, "analyze", toy_path, "--budget", 100, "--max-expansions", 1)
    assert code == EXIT_ANALYSIS
    assert out == ""
    assert "hard cap" in err


def test_dot_and_abstraction_export(capsys, toy_path, tmp_path):
    dot, exported, report = tmp_path / "k.dot", tmp_path / "k.pomdp", tmp_path / "report.json"
    code, out, _ = _run(
        capsys, "analyze", toy_path, "--clipping", "--eta", 1, "--budget", 4,
        "--dot", dot, "--export-abstraction", exported, "--report", report,
    )
    assert code == 0 and out == ""
    assert json.loads(report.read_text(encoding="utf-8"))["bound"] == 0.75
    dot_text = dot.read_text(encoding="utf-8")
    assert dot_text.startswith("digraph abstraction {")
    assert 'label="clip: 3/4"' in dot_text
    exported_text = exported.read_text(encoding="utf-8")
    assert "states 6" in exported_text
    assert "trans 4 clip 1 1/4" in exported_text


def test_outputs_are_byte_identical_across_runs(capsys, toy_path, tmp_path):
    args = ("analyze", toy_path, "--clipping", "--eta", 2, "--budget", 5, "--deterministic")
    outputs = []
    for run, threads in enumerate((1, 4, 4)):
        dot = tmp_path / f"run{run}.dot"
        code, out, _ = _run(capsys, *args, "--threads", threads, "--dot", dot)
        assert code == 0
        outputs.append((out, dot.read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]


REPORT_KEYS = {
    "model_id", "direction", "objective", "bound", "bound_kind", "bound_exact", "threshold", "verdict",
    "explored_beliefs", "cut_transitions", "clip_transitions", "eta", "wall_time_ms", "abstraction_states",
    "initial_is_goal", "precision_limited", "iterations", "clipping_solver", "cutoff_source",
}


def test_report_schema(capsys, toy_path):
    _, out, _ = _run(capsys, "analyze", toy_path, "--budget", 4)
    assert set(json.loads(out)) == REPORT_KEYS
    assert out == json.dumps(json.loads(out), sort_keys=True, indent=2) + "\n"
    _, out, _ = _run(capsys, "analyze", toy_path, "--direction", "min", "--lambda", "1/2")
    report = json.loads(out)
    assert set(report) == REPORT_KEYS
    assert report["bound_kind"] == "upper"


def test_non_utf8_model_exits_two(capsys, tmp_path):
    model = tmp_path / "latin.pomdp"
    model.write_bytes(b"\xff\xfepomdp\n")
    code, out, err = _run(capsys, "analyze", model)
    assert code == EXIT_INPUT
    assert out == ""
    assert "not UTF-8" in err


@pytest.mark.parametrize("option", ["--report", "--dot", "--export-abstraction"])
def test_unwritable_output_exits_two(capsys, toy_path, tmp_path, option):
    code, _, err = _run(capsys, "analyze", toy_path, "--budget", 4, option, tmp_path / "nodir" / "out.txt")
    assert code == EXIT_INPUT
    assert "cannot write" in err


def test_unwritable_csv_exits_two(capsys, toy_path, tmp_path):
    code, _, err = _run(capsys, "sweep", toy_path, "--budgets", "4", "--output", tmp_path / "nodir" / "s.csv")
    assert code == EXIT_INPUT
    assert "cannot write" in err



def test_record_and_history(capsys, toy_path, temp_db):
    _analyze(capsys, toy_path, "--budget", 4, "--record")
    code, out, _ = _run(capsys, "history", "--model-id", "guess_reward")
    assert code == 0
    runs = json.loads(out)
    assert len(runs) == 1
    assert runs[0]["report"]["bound"] == 0.5
    run_id = runs[0]["run_id"]

    _, out, _ = _run(capsys, "history", "--delete", run_id)
    assert json.loads(out) == {"deleted": run_id}
    _, out, _ = _run(capsys, "history", "--delete", run_id)
    assert json.loads(out) == {"deleted": None}
    _, out, _ = _run(capsys, "history")
    assert json.loads(out) == []

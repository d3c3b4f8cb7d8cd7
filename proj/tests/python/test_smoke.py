import json
import os
from pathlib import Path

import pytest

import mfrkit

CORPUS = os.environ.get("MFRKIT_CORPUS", str(Path(__file__).resolve().parents[2] / "corpus"))
FIXTURE = str(Path(CORPUS) / "fixtures" / "replay.jsonl")
DATA = Path(__file__).resolve().parents[1] / "data"

DEMO = (DATA / "demo.mdl").read_text()


def test_parse_is_canonical():
    text = mfrkit.parse_model(DEMO)
    assert mfrkit.parse_model(text) == text
    assert text.startswith('model "demo"')


def test_parse_error_raises():
    with pytest.raises(mfrkit.ModelError) as err:
        mfrkit.parse_model('model "x"\nvar broken(: bool = true\n')
    assert "2:" in str(err.value)


def test_check_reports_issues():
    assert mfrkit.check(DEMO) == []
    issues = mfrkit.check('model "x"\nvar f: int[0..3] = 9\n')
    assert issues and "initial" in issues[0]


def test_validate_good_and_bad():
    good = mfrkit.validate(DEMO, (DATA / "good.plan").read_text())
    assert good["violations"] == [] and good["goal_satisfied"]
    bad = mfrkit.validate(DEMO, (DATA / "mutant.plan").read_text(), mode="halt")
    assert bad["violations"][0]["class"] == "PreconditionFailure"
    assert bad["halted_at"] == 1
    with pytest.raises(ValueError):
        mfrkit.validate(DEMO, "", mode="sideways")


def test_solve():
    assert mfrkit.solve(DEMO) == "step 1: move(alice, ward, pharmacy)\nstep 2: give(alice)\n"


def test_corpus_and_mapping():
    ids = mfrkit.list_tasks(CORPUS)
    assert len(ids) >= 10
    task = mfrkit.load_task(ids[0], CORPUS)
    assert mfrkit.solve(task["model"]) == task["reference_plan"]
    with pytest.raises(KeyError):
        mfrkit.load_task("nope", CORPUS)
    assert [mfrkit.qualitative_to_numeric(x) for x in ("Low", "Rare", "High")] == [1, 1, 4]


def test_replay_run_and_score():
    transcript = mfrkit.run_replay("med1", "mfr-two-call", FIXTURE, CORPUS)
    assert transcript == mfrkit.run_replay("med1", "mfr-two-call", FIXTURE, CORPUS)
    record = json.loads(transcript)
    assert record["task_id"] == "med1"
    s = mfrkit.score(transcript, CORPUS)
    assert s["strategy"] == "mfr-two-call"
    assert s["constraint_violations"] == 0


def test_prompts():
    p1 = mfrkit.render_prompt("mfr-two-call", "one", "Do a thing.")
    assert "Do not propose a solution yet" in p1
    assert mfrkit.prompt_key(p1) == mfrkit.prompt_key(p1.replace("\n", "\r\n"))
    blocks = mfrkit.extract_blocks("hi\n```mdl\nmodel \"x\"\n```\n")
    assert blocks["model"] == 'model "x"\n' and blocks["plan"] is None

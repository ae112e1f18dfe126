"""Vote store: append-only log, replay, anonymity rule, exports."""
import json
import threading

import pytest

from modelarena.common import Task
from modelarena.ratings import BattleOutcome
from modelarena.store import (
    Battle,
    BattleState,
    DenylistFilter,
    DuplicateVoteError,
    Prompt,
    SafetyPolicy,
    UnknownBattleError,
    VoteStore,
    load_bench_file,
    moderate_prompt,
)


def make_battle(bid: str, state=BattleState.OPEN, task=Task.TEXT_TO_IMAGE, pid="p1"):
    return Battle(
        id=bid,
        task=task,
        prompt_id=pid,
        model_a="quokka-v2",
        model_b="zebrafish-xl",
        output_a="media/a.png",
        output_b="media/b.png",
        state=state,
        created_at=1000,
    )


@pytest.fixture
def store(tmp_path):
    with VoteStore(tmp_path / "log.jsonl") as s:
        yield s


# -- prompts and moderation ---------------------------------------------------


def test_prompt_validation():
    with pytest.raises(ValueError):
        Prompt(id="p", task=Task.IMAGE_EDITING, text="t")  # missing source image
    with pytest.raises(ValueError):
        Prompt(id="p", task=Task.TEXT_TO_IMAGE, text="t", source_image_ref="x")
    with pytest.raises(ValueError):
        Prompt(id="p", task=Task.TEXT_TO_IMAGE, text="t", safety="bogus")
    with pytest.raises(ValueError):
        Prompt(id="p", task=Task.TEXT_TO_IMAGE, text="t", safety="unsafe")


def test_denylist_filter_and_moderation():
    filt = DenylistFilter()
    prompt = Prompt(id="p", task=Task.TEXT_TO_IMAGE, text="a sunny beach")
    moderated = moderate_prompt(prompt, filt)
    assert moderated.safety == "safe"
    bad = Prompt(id="q", task=Task.TEXT_TO_IMAGE, text="graphic beheading scene")
    flagged = moderate_prompt(bad, filt)
    assert flagged.safety == "unsafe"
    assert flagged.safety_category == "violent crimes"
    with pytest.raises(ValueError):
        moderate_prompt(moderated, filt)  # already moderated


def test_moderation_filter_error_propagates():
    class Broken:
        def classify(self, text):
            raise RuntimeError("classifier offline")

    prompt = Prompt(id="p", task=Task.TEXT_TO_IMAGE, text="anything")
    with pytest.raises(RuntimeError):
        moderate_prompt(prompt, Broken())
    assert prompt.safety == "unchecked"


# -- battles and votes --------------------------------------------------------


def test_battle_lifecycle_vote_then_reveal(store):
    store.create_battle(make_battle("b1"))
    vote = store.record_vote("b1", BattleOutcome.A_WINS, at=5)
    assert vote.counted is True
    assert store.get_battle("b1").state is BattleState.VOTED
    revealed = store.reveal("b1")
    assert revealed.state is BattleState.REVEALED
    assert store.get_vote("b1").counted is True  # reveal after vote keeps it


def test_battle_lifecycle_reveal_then_vote(store):
    store.create_battle(make_battle("b1"))
    store.reveal("b1")
    vote = store.record_vote("b1", BattleOutcome.B_WINS, at=5)
    assert vote.counted is False
    assert store.get_battle("b1").state is BattleState.REVEALED


def test_reveal_is_idempotent(store):
    store.create_battle(make_battle("b1"))
    first = store.reveal("b1")
    second = store.reveal("b1")
    assert first == second


def test_duplicate_vote_rejected(store):
    store.create_battle(make_battle("b1"))
    store.record_vote("b1", BattleOutcome.TIE, at=1)
    with pytest.raises(DuplicateVoteError):
        store.record_vote("b1", BattleOutcome.TIE, at=2)


def test_unknown_battle_errors(store):
    with pytest.raises(UnknownBattleError):
        store.record_vote("ghost", BattleOutcome.TIE)
    with pytest.raises(UnknownBattleError):
        store.reveal("ghost")
    with pytest.raises(UnknownBattleError):
        store.get_battle("ghost")


def test_duplicate_battle_id_rejected(store):
    store.create_battle(make_battle("b1"))
    with pytest.raises(ValueError):
        store.create_battle(make_battle("b1"))


def test_new_battle_must_be_open(store):
    with pytest.raises(ValueError):
        store.create_battle(make_battle("b1", state=BattleState.VOTED))


def test_add_prompt_idempotent(store):
    p = Prompt(id="p1", task=Task.TEXT_TO_IMAGE, text="first text")
    store.add_prompt(p)
    again = store.add_prompt(Prompt(id="p1", task=Task.TEXT_TO_IMAGE, text="other"))
    assert again == p  # first write wins


# -- replay -------------------------------------------------------------------


def test_replay_rebuilds_state(tmp_path):
    path = tmp_path / "log.jsonl"
    with VoteStore(path) as store:
        store.add_prompt(Prompt(id="p1", task=Task.TEXT_TO_IMAGE, text="t"))
        store.create_battle(make_battle("b1"))
        store.create_battle(make_battle("b2"))
        store.record_vote("b1", BattleOutcome.A_WINS, at=10)
        store.reveal("b2")
        store.record_vote("b2", BattleOutcome.B_WINS, at=11)
        before = (
            sorted(b.id for b in store.battles()),
            [(v.battle_id, v.outcome, v.counted) for v in store.votes()],
            store.load_counted_votes(),
        )
    with VoteStore(path) as reopened:
        after = (
            sorted(b.id for b in reopened.battles()),
            [(v.battle_id, v.outcome, v.counted) for v in reopened.votes()],
            reopened.load_counted_votes(),
        )
        assert after == before
        assert reopened.get_battle("b1").state is BattleState.VOTED
        assert reopened.get_battle("b2").state is BattleState.REVEALED


def test_log_lines_start_with_record_type(tmp_path):
    path = tmp_path / "log.jsonl"
    with VoteStore(path) as store:
        store.create_battle(make_battle("b1"))
        store.record_vote("b1", BattleOutcome.TIE, at=1)
    for line in path.read_text().strip().split("\n"):
        assert line.startswith('{"record_type": ')
        json.loads(line)  # every line is standalone JSON


def test_corrupt_log_line_reports_position(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text('{"record_type": "prompt", "id": "p"}\nnot json\n')
    with pytest.raises(ValueError, match="log.jsonl:1"):
        VoteStore(path)


# -- counted-vote queries -----------------------------------------------------


def test_counted_votes_exclude_revealed(store):
    store.create_battle(make_battle("b1"))
    store.create_battle(make_battle("b2"))
    store.record_vote("b1", BattleOutcome.A_WINS, at=1)
    store.reveal("b2")
    store.record_vote("b2", BattleOutcome.A_WINS, at=2)
    records = store.load_counted_votes()
    assert len(records) == 1
    assert records[0].outcome is BattleOutcome.A_WINS


def test_counted_votes_task_filter(store):
    store.create_battle(make_battle("b1", task=Task.TEXT_TO_IMAGE))
    video = Battle(
        id="b2",
        task=Task.TEXT_TO_VIDEO,
        prompt_id="p2",
        model_a="m1",
        model_b="m2",
        output_a="v1.mp4",
        output_b="v2.mp4",
    )
    store.create_battle(video)
    store.record_vote("b1", BattleOutcome.A_WINS, at=1)
    store.record_vote("b2", BattleOutcome.B_WINS, at=2)
    assert len(store.load_counted_votes(Task.TEXT_TO_IMAGE)) == 1
    assert len(store.load_counted_votes(Task.TEXT_TO_VIDEO)) == 1
    assert len(store.load_counted_votes()) == 2


def test_counted_votes_ordering_stable(store):
    for bid in ("z9", "a1", "m5"):
        store.create_battle(make_battle(bid))
    store.record_vote("z9", BattleOutcome.TIE, at=100)
    store.record_vote("a1", BattleOutcome.TIE, at=100)  # same timestamp
    store.record_vote("m5", BattleOutcome.TIE, at=50)
    ordered = [v.battle_id for v, _ in store.counted_votes()]
    assert ordered == ["m5", "a1", "z9"]  # time, then battle id


def test_safe_only_policy_filters(store):
    safe = Prompt(id="ps", task=Task.TEXT_TO_IMAGE, text="cat", safety="safe")
    unsafe = Prompt(
        id="pu",
        task=Task.TEXT_TO_IMAGE,
        text="bad",
        safety="unsafe",
        safety_category="violent crimes",
    )
    store.add_prompt(safe)
    store.add_prompt(unsafe)
    store.create_battle(make_battle("b1", pid="ps"))
    store.create_battle(make_battle("b2", pid="pu"))
    store.create_battle(make_battle("b3", pid="missing"))
    for bid, at in (("b1", 1), ("b2", 2), ("b3", 3)):
        store.record_vote(bid, BattleOutcome.A_WINS, at=at)
    assert len(store.load_counted_votes(safety_policy=SafetyPolicy.ALL)) == 3
    safe_only = store.load_counted_votes(safety_policy=SafetyPolicy.SAFE_ONLY)
    assert len(safe_only) == 1  # unsafe and unknown-prompt battles drop out


# -- bench export -------------------------------------------------------------


def test_export_bench_roundtrip_and_stability(tmp_path, store):
    store.add_prompt(Prompt(id="p1", task=Task.TEXT_TO_IMAGE, text="cat", safety="safe"))
    store.create_battle(make_battle("b1"))
    store.create_battle(make_battle("b2"))
    store.record_vote("b1", BattleOutcome.A_WINS, at=10)
    store.record_vote("b2", BattleOutcome.TIE, at=20)
    out = tmp_path / "bench.jsonl"
    count = store.export_bench(Task.TEXT_TO_IMAGE, out)
    assert count == 2
    header = json.loads(out.read_text().split("\n")[0])
    assert header == {"task": "text_to_image", "exported_at": 20, "count": 2}
    first_bytes = out.read_bytes()
    store.export_bench(Task.TEXT_TO_IMAGE, out)
    assert out.read_bytes() == first_bytes  # unchanged store, identical file
    records = load_bench_file(out)
    assert [r.outcome for r in records] == [BattleOutcome.A_WINS, BattleOutcome.TIE]
    assert records[0].model_a == "quokka-v2"


def test_export_bench_empty_store(tmp_path, store):
    out = tmp_path / "bench.jsonl"
    assert store.export_bench(Task.TEXT_TO_IMAGE, out) == 0
    header = json.loads(out.read_text().split("\n")[0])
    assert header["count"] == 0
    assert header["exported_at"] is None
    assert load_bench_file(out) == []


def test_load_bench_file_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"model_a": "x", "model_b": "y", "outcome": "leftvote"}\n')
    with pytest.raises(ValueError, match="metadata"):
        load_bench_file(path)


# -- concurrency --------------------------------------------------------------


def test_concurrent_votes_all_recorded(store):
    for i in range(40):
        store.create_battle(make_battle(f"b{i}"))

    def vote(i):
        store.record_vote(f"b{i}", BattleOutcome.TIE, at=i)

    threads = [threading.Thread(target=vote, args=(i,)) for i in range(40)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store.load_counted_votes()) == 40

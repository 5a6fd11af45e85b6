import json
from pathlib import Path

import pytest

from qtgrasp.agents import get_agent
from qtgrasp.approximator import save_snapshot
from qtgrasp.dataset import EpisodeReader, EpisodeWriter, generate_dataset, parse_policy_spec, read_episodes
from qtgrasp.exceptions import DatasetFormatError
from qtgrasp.schemas import ExperimentConfig


@pytest.fixture(scope="module")
def scripted_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("datasets") / "scripted.jsonl"
    report = generate_dataset("scripted", 1000, ExperimentConfig(), path, seed=0)
    return path, report


def test_round_trip_is_byte_identical(scripted_dataset, tmp_path):
    path, _ = scripted_dataset
    records = read_episodes(path)
    assert len(records) == 1000

    copy = tmp_path / "copy.jsonl"
    with EpisodeWriter(copy) as writer:
        for record in records:
            writer.write(record)
    assert copy.read_bytes() == path.read_bytes()


def test_report_matches_file(scripted_dataset):
    path, report = scripted_dataset
    records = read_episodes(path)
    assert report.episodes == len(records)
    assert report.transitions == sum(len(r.transitions) for r in records)
    assert report.success_rate == pytest.approx(sum(r.success for r in records) / len(records))
    assert abs(report.success_rate - 0.46) <= 0.06
    assert [r.episode_id for r in records] == list(range(1000))
    assert {r.policy_id for r in records} == {"scripted"}


def test_generation_is_deterministic(tmp_path):
    cfg = ExperimentConfig()
    generate_dataset("near-optimal", 20, cfg, tmp_path / "a.jsonl", seed=4)
    generate_dataset("near-optimal", 20, cfg, tmp_path / "b.jsonl", seed=4)
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_zero_episodes_gives_empty_file(tmp_path):
    report = generate_dataset("scripted", 0, ExperimentConfig(), tmp_path / "empty.jsonl")
    assert (tmp_path / "empty.jsonl").read_bytes() == b""
    assert report.episodes == 0 and report.success_rate == 0.0
    assert read_episodes(tmp_path / "empty.jsonl") == []
    with pytest.raises(ValueError):
        generate_dataset("scripted", -1, ExperimentConfig(), tmp_path / "bad.jsonl")


def test_replay_copies_a_prefix(scripted_dataset, tmp_path):
    path, _ = scripted_dataset
    report = generate_dataset(f"replay:{path}", 10, ExperimentConfig(), tmp_path / "replay.jsonl")
    assert report.episodes == 10
    original = path.read_bytes().splitlines(keepends=True)[:10]
    assert (tmp_path / "replay.jsonl").read_bytes() == b"".join(original)


def test_snapshot_and_mixture_policies(tmp_path, tiny_config):
    cfg = tiny_config()
    agent = get_agent(cfg)
    checkpoint = save_snapshot(tmp_path / "final.ckpt", agent.init_params(0))

    snapshot = generate_dataset(f"snapshot:{checkpoint}", 3, cfg, tmp_path / "snapshot.jsonl")
    assert snapshot.episodes == 3
    assert {r.policy_id for r in read_episodes(tmp_path / "snapshot.jsonl")} == {"snapshot"}

    generate_dataset(f"mixture:{checkpoint}", 30, cfg, tmp_path / "mixture.jsonl")
    ids = {r.policy_id for r in read_episodes(tmp_path / "mixture.jsonl")}
    assert ids <= {"snapshot", "snapshot-epsilon", "scripted-epsilon"}
    assert len(ids) >= 2


def test_malformed_line_reports_line_number(scripted_dataset, tmp_path):
    path, _ = scripted_dataset
    broken = tmp_path / "broken.jsonl"
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)[:3]
    broken.write_text(lines[0] + lines[1] + "not json\n" + lines[2], encoding="utf-8")

    with EpisodeReader(broken) as reader:
        records = iter(reader)
        next(records)
        next(records)
        with pytest.raises(DatasetFormatError) as excinfo:
            next(records)
    assert excinfo.value.line_number == 3
    assert str(excinfo.value).startswith("line 3:")


def test_undecodable_line_reports_line_number(scripted_dataset, tmp_path):
    path, _ = scripted_dataset
    lines = path.read_bytes().splitlines(keepends=True)[:2]
    broken = tmp_path / "latin1.jsonl"
    broken.write_bytes(lines[0] + b'{"episode_id": "\xff\xfe"}\n' + lines[1])

    with EpisodeReader(broken) as reader:
        records = iter(reader)
        next(records)
        with pytest.raises(DatasetFormatError) as excinfo:
            next(records)
    assert excinfo.value.line_number == 2
    assert str(excinfo.value).startswith("line 2: not valid UTF-8")


def test_record_with_early_terminal_is_rejected(scripted_dataset, tmp_path):
    path, _ = scripted_dataset
    record = read_episodes(path)[0]
    data = record.model_dump()
    data["transitions"][0]["terminal"] = True
    broken = tmp_path / "early.jsonl"
    broken.write_text(json.dumps(data) + "\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError):
        read_episodes(broken)


def test_missing_dataset(tmp_path):
    with pytest.raises(FileNotFoundError):
        EpisodeReader(tmp_path / "nope.jsonl")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("scripted", ("scripted", None)),
        ("near-optimal", ("near-optimal", None)),
        ("snapshot:runs/a/final.ckpt", ("snapshot", Path("runs/a/final.ckpt"))),
        ("replay:runs/default/seed-0", ("replay", Path("runs/default/seed-0"))),
    ],
)
def test_parse_policy_spec(text, expected):
    assert parse_policy_spec(text) == expected


@pytest.mark.parametrize("text", ["greedy", "snapshot", "scripted:foo", "mixture:"])
def test_parse_policy_spec_errors(text):
    with pytest.raises(ValueError):
        parse_policy_spec(text)

"""The arena service end to end, over real HTTP.

Starts the service on a loopback port with an in-memory content pool, then
drives it the way a frontend would: sample an anonymous battle, vote, see
the reveal, and read the leaderboard.  Finishes by replaying the vote log
and exporting a bench file for the offline `rank` command.
"""
import hashlib
import itertools
import json
import socket
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn

from modelarena import (
    MediaType,
    Museum,
    MuseumEntry,
    ServiceConfig,
    Task,
    VoteStore,
    create_app,
)
from modelarena.cli import main as modelarena_cli

MODELS = ("falcon-v3", "wombat-xl", "numbat-2")
PROMPTS = (
    ("sunset", "a lighthouse at sunset, oil painting"),
    ("city", "an isometric city block in winter"),
    ("teapot", "a chrome teapot reflecting a garden"),
)


def build_museum() -> Museum:
    entries = []
    for prompt_id, text in PROMPTS:
        for model in MODELS:
            # opaque artifact names, so URIs cannot leak who made what
            blob = hashlib.md5(f"{prompt_id}/{model}".encode()).hexdigest()[:10]
            entries.append(
                MuseumEntry(
                    task=Task.TEXT_TO_IMAGE,
                    prompt_id=prompt_id,
                    prompt_text=text,
                    model_id=model,
                    artifact_uri=f"media/{blob}.png",
                    media_type=MediaType.IMAGE,
                )
            )
    return Museum(entries)


def call(base: str, method: str, path: str, body: dict | None = None) -> dict:
    data = None if body is None else json.dumps(body).encode()
    request = urllib.request.Request(
        base + path,
        data=data,
        method=method,
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read())


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="arena-demo-"))
    vote_log = workdir / "votes.jsonl"
    config = ServiceConfig(vote_log=str(vote_log))
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = uvicorn.Server(
        uvicorn.Config(
            create_app(config, museum=build_museum()),
            host="127.0.0.1",
            port=port,
            log_level="warning",
        )
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    base = f"http://127.0.0.1:{port}"
    print(f"service is up at {base}, vote log at {vote_log}")

    try:
        print()
        print("== an anonymous battle ==")
        sample = call(base, "POST", "/v1/battles/sample", {"task": "text_to_image"})
        print(json.dumps(sample, indent=2))
        print("note: two outputs, no model names anywhere")

        print()
        print("== voting reveals ==")
        vote = call(
            base, "POST", f"/v1/battles/{sample['battle_id']}/vote",
            {"outcome": "leftvote"},
        )
        print(f"counted={vote['counted']}  reveal={vote['reveal']}")

        print()
        print("== peeking first forfeits the vote ==")
        sample = call(base, "POST", "/v1/battles/sample", {"task": "text_to_image"})
        call(base, "POST", f"/v1/battles/{sample['battle_id']}/reveal")
        vote = call(
            base, "POST", f"/v1/battles/{sample['battle_id']}/vote",
            {"outcome": "rightvote"},
        )
        print(f"after reveal: counted={vote['counted']}")

        print()
        print("== a few dozen scripted votes ==")
        # voters who cannot see identities still produce a ranking; the
        # mildly left-leaning script below just keeps the outcome mix varied
        crowd = itertools.cycle(["leftvote", "leftvote", "rightvote", "tievote"])
        for outcome in itertools.islice(crowd, 40):
            sample = call(base, "POST", "/v1/battles/sample", {"task": "text_to_image"})
            call(
                base, "POST", f"/v1/battles/{sample['battle_id']}/vote",
                {"outcome": outcome},
            )
        board = call(base, "GET", "/v1/leaderboard/text_to_image")
        for entry in board["entries"]:
            print(
                f"  {entry['model']:10s} {entry['rating']:7.1f}"
                f"  [{entry['ci_lower']:7.1f}, {entry['ci_upper']:7.1f}]"
                f"  {entry['battles']} battles"
            )

        print()
        print("== head-to-head stats ==")
        stats = call(base, "GET", "/v1/stats/text_to_image/battle_count")
        print(f"models: {stats['models']}")
        for row in stats["rows"]:
            print(f"  {row}")
    finally:
        server.should_exit = True
        thread.join(timeout=5)

    print()
    print("== the log is the database ==")
    with open(vote_log, encoding="utf-8") as handle:
        head = [next(handle) for _ in range(3)]
    print("first three records:")
    for line in head:
        print(f"  {line.strip()[:100]}")
    replayed = VoteStore(vote_log)
    print(f"replaying it recovers {len(replayed.load_counted_votes())} counted votes")

    print()
    print("== bench export feeds the offline CLI ==")
    bench = workdir / "bench.jsonl"
    count = replayed.export_bench(Task.TEXT_TO_IMAGE, bench)
    replayed.close()
    print(f"exported {count} safe counted votes; `rank` on the export:")
    modelarena_cli(
        ["rank", "--votes", str(bench), "--task", "text_to_image",
         "--out", str(workdir / "leaderboard.csv")]
    )


if __name__ == "__main__":
    main()

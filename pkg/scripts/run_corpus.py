#!/usr/bin/env python3
"""Run every shipped scenario against the default config and verify that each
emitted trace replays to the identical decision.

Writes one trace file per scenario under out/ and prints a summary table.
Exits nonzero on any expectation mismatch or replay divergence.
"""

import sys
from pathlib import Path

from fetchguard import default_config, load_scenario, run_scenario, verify_trace
from fetchguard.scenario import write_traces

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    config = default_config()
    out_dir = ROOT / "out"
    out_dir.mkdir(exist_ok=True)
    failures = 0
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        script = load_scenario(path)
        result = run_scenario(config, script)
        write_traces(result.traces, out_dir / f"{script.name}.jsonl")
        replay_ok = all(verify_trace(t, config).ok for t in result.traces)
        ok = result.ok and replay_ok
        failures += 0 if ok else 1
        flag = "ok " if ok else "FAIL"
        print(
            f"{flag} {script.name:<50} {result.allowed:>2} allow {result.denied:>2} deny "
            f"replay={'ok' if replay_ok else 'DIVERGED'}"
        )
        for mismatch in result.mismatches:
            print(f"      expected {mismatch.expected}, got {mismatch.got} ({mismatch.request_id})")
        for note in result.notes:
            print(f"      note: {note}")
    print(f"\ntraces written under {out_dir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

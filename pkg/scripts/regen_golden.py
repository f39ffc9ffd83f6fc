"""Rewrite tests/golden/*.json from the current CLI output.

Run after an intentional output change and review the diff before
committing; the numbers that matter are asserted independently in the
unit and acceptance tests.
"""
import io
import json
from pathlib import Path

from ttvou.cli import run

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def main():
    cases = json.loads((GOLDEN / "cases.json").read_text())
    for name, argv in cases.items():
        out, err = io.StringIO(), io.StringIO()
        code = run(argv, out, err)
        if code != 0:
            raise SystemExit(f"{name}: exit {code}: {err.getvalue()}")
        (GOLDEN / f"{name}.json").write_text(out.getvalue(), encoding="utf-8")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()

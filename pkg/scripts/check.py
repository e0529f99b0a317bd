"""Run the code quality gates: ruff, mypy, vulture and pytest."""

import subprocess
import sys

import click

LINTERS = [
    ("ruff", ["ruff", "check", "."]),
    ("mypy", ["mypy", "app"]),
    ("vulture", ["vulture", "app/", "vulture_whitelist.py", "--min-confidence", "80"]),
]


def _banner(text: str) -> None:
    click.echo(f"\n{'=' * 60}\n  {text}\n{'=' * 60}\n")


@click.command()
@click.option("--slow", is_flag=True, help="Include the acceptance-scale tests marked slow")
@click.option("--no-integration", is_flag=True, help="Skip the end-to-end CLI tests")
@click.option("--tests-only", is_flag=True, help="Run pytest without the linters")
def main(slow: bool, no_integration: bool, tests_only: bool) -> None:
    markers = [] if slow else ["not slow"]
    if no_integration:
        markers.append("not integration")
    pytest_cmd = ["pytest", "-m", " and ".join(markers)] if markers else ["pytest", "-m", ""]
    checks = [("pytest", pytest_cmd)] if tests_only else [*LINTERS, ("pytest", pytest_cmd)]

    failed: list[str] = []
    for name, cmd in checks:
        _banner(f"Running {name}")
        if subprocess.run(cmd).returncode != 0:
            failed.append(name)

    if failed:
        _banner(f"FAILED: {', '.join(failed)}")
        sys.exit(1)
    _banner("All checks passed.")


if __name__ == "__main__":
    main()

import asyncio

from jointwitness import database
from jointwitness.models import CertificationRun
from jointwitness.services.history import list_runs
from jointwitness.version import CHANGELOG


def register(subparsers):
    parser = subparsers.add_parser("history", help="list recorded runs, newest first")
    parser.add_argument("--limit", type=int, default=20, help="number of runs to show")
    parser.set_defaults(handler=handle)

    parser = subparsers.add_parser("changelog", help="show the changelog")
    parser.set_defaults(handler=show_changelog)


def format_run(run: CertificationRun) -> str:
    def flag(value):
        return "-" if value is None else str(value).lower()

    eta = "-" if run.eta is None else f"{run.eta:.4g}"
    min_entry = "-" if run.min_entry is None else f"{run.min_entry:+.6f}"
    return (
        f"#{run.id:<4} {run.started_at:%Y-%m-%d %H:%M:%S}  {run.command:<12} "
        f"eta={eta:<7} min={min_entry:<10} nonclassical={flag(run.nonclassical)} "
        f"separable={flag(run.separable)} certified={flag(run.certified)}"
    )


async def _fetch(limit: int) -> list[CertificationRun]:
    try:
        return await list_runs(limit)
    finally:
        await database.close_db()


def handle(options: dict) -> int:
    runs = asyncio.run(_fetch(options.get("limit", 20)))
    if not runs:
        print("No recorded runs")
        return 0
    for run in runs:
        print(format_run(run))
    return 0


def show_changelog(options: dict) -> int:
    print(CHANGELOG.strip())
    return 0

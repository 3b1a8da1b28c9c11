import logging
from datetime import datetime
from typing import Optional

from sqlalchemy import desc, select

from jointwitness import database
from jointwitness.models import CertificationRun
from jointwitness.reports import Report

logger = logging.getLogger(__name__)


async def record_run(report: Report, started_at: Optional[datetime] = None) -> int:
    """Store a report as a CertificationRun row and return its id."""
    await database.init_db()

    async with database.async_session() as session:
        run = CertificationRun(
            started_at=started_at or report.generated_at,
            completed_at=datetime.now(),
            command=report.command,
            status="completed",
            nonclassical=report.witness.nonclassical,
            min_entry=report.witness.min_entry,
            eta=report.witness.eta,
            separable=report.separability.feasible if report.separability else None,
            certified=report.sampling.certified if report.sampling else None,
            report_json=report.model_dump_json(),
        )
        session.add(run)
        await session.commit()
        await session.refresh(run)

    logger.info(f"Recorded {report.command} run #{run.id}")
    return run.id


async def list_runs(limit: int = 20) -> list[CertificationRun]:
    """Recorded runs, newest first."""
    await database.init_db()

    async with database.async_session() as session:
        result = await session.execute(
            select(CertificationRun).order_by(desc(CertificationRun.started_at), desc(CertificationRun.id)).limit(limit)
        )
        return list(result.scalars().all())


async def load_report(run_id: int) -> Optional[Report]:
    await database.init_db()

    async with database.async_session() as session:
        run = await session.get(CertificationRun, run_id)
        if run is None:
            return None
        return Report.model_validate_json(run.report_json)

from sqlalchemy import String, DateTime, Text, Boolean, Float
from sqlalchemy.orm import Mapped, mapped_column
from datetime import datetime
from typing import Optional
from jointwitness.database import Base


class CertificationRun(Base):
    """Logs each recorded CLI run (witness, separability or sample)."""

    __tablename__ = "certification_runs"

    id: Mapped[int] = mapped_column(primary_key=True)
    started_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.now)
    completed_at: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)

    command: Mapped[str] = mapped_column(String(50))
    status: Mapped[str] = mapped_column(String(50), default="completed")

    # Headline numbers; the full report is kept as JSON
    nonclassical: Mapped[Optional[bool]] = mapped_column(Boolean, nullable=True)
    min_entry: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    eta: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    separable: Mapped[Optional[bool]] = mapped_column(Boolean, nullable=True)
    certified: Mapped[Optional[bool]] = mapped_column(Boolean, nullable=True)

    report_json: Mapped[str] = mapped_column(Text)

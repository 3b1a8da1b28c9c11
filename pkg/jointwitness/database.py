from pathlib import Path
from typing import Optional

from sqlalchemy.engine import make_url
from sqlalchemy.ext.asyncio import AsyncEngine, AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import DeclarativeBase

from jointwitness.config import settings


class Base(DeclarativeBase):
    """Base class for all models."""
    pass


engine: Optional[AsyncEngine] = None
async_session: Optional[async_sessionmaker] = None


def configure_engine(database_url: Optional[str] = None):
    """Create the async engine and session factory (defaults to settings.database_url)."""
    global engine, async_session

    url = database_url or settings.database_url
    engine = create_async_engine(url, echo=False)
    async_session = async_sessionmaker(
        engine,
        class_=AsyncSession,
        expire_on_commit=False
    )


def _ensure_sqlite_directory(url: str):
    parsed = make_url(url)
    if parsed.get_backend_name() == "sqlite" and parsed.database and parsed.database != ":memory:":
        Path(parsed.database).parent.mkdir(parents=True, exist_ok=True)


async def init_db():
    """Initialize the database, creating all tables."""
    # Import models to register them
    from jointwitness.models import run_record  # noqa: F401

    if engine is None:
        configure_engine()
    _ensure_sqlite_directory(str(engine.url))

    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


async def close_db():
    """Release pooled connections; call before the event loop closes."""
    if engine is not None:
        await engine.dispose()

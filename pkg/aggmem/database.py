from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import NullPool, StaticPool

from aggmem.config import get_database_url

# Create base class for models
Base = declarative_base()

# Lazy initialization of engine and session
_engine = None
_SessionLocal = None


def _is_memory_sqlite(url: str) -> bool:
    return url in ("sqlite://", "sqlite:///:memory:")


def get_engine(url: Optional[str] = None):
    """Get or create the run-ledger engine (lazy initialization)"""
    global _engine
    if _engine is None:
        db_url = url or get_database_url()
        if not db_url:
            raise ValueError("No database URL configured")

        if _is_memory_sqlite(db_url):
            # one shared connection, or every session sees an empty database
            _engine = create_engine(db_url, poolclass=StaticPool,
                                    connect_args={"check_same_thread": False}, echo=False)
        else:
            _engine = create_engine(db_url, poolclass=NullPool, echo=False)
    return _engine


def get_session_local():
    """Get or create session factory (lazy initialization)"""
    global _SessionLocal
    if _SessionLocal is None:
        _SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=get_engine())
    return _SessionLocal


def init_db(url: Optional[str] = None):
    """Create the ledger tables if they do not exist yet"""
    # registers RunRecord on Base.metadata
    from aggmem import models  # noqa: F401

    engine = get_engine(url)
    Base.metadata.create_all(bind=engine)
    return engine


def reset_engine():
    """Drop the cached engine and session factory (tests, URL changes)"""
    global _engine, _SessionLocal
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _SessionLocal = None

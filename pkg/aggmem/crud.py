import logging
from typing import List, Optional

from sqlalchemy.orm import Session

from aggmem.models import RunRecord
from aggmem.schemas import RunCreate

logger = logging.getLogger("aggmem.crud")


def get_runs(
    db: Session,
    skip: int = 0,
    limit: int = 100,
    command: Optional[str] = None
) -> List[RunRecord]:
    """
    Get recorded runs, newest first, optionally for one command.
    """
    query = db.query(RunRecord)

    if command:
        query = query.filter(RunRecord.command == command)

    return query.order_by(RunRecord.id.desc()).offset(skip).limit(limit).all()


def get_run(db: Session, run_id: int) -> Optional[RunRecord]:
    return db.query(RunRecord).filter(RunRecord.id == run_id).first()


def record_run(db: Session, run: RunCreate) -> RunRecord:
    """
    Store the provenance of a run.
    """
    db_run = RunRecord(**run.model_dump())
    db.add(db_run)
    db.commit()
    db.refresh(db_run)
    logger.info("recorded %s run %d (seed %s from %s)", db_run.command, db_run.id,
                db_run.seed, db_run.seed_source)
    return db_run


def delete_run(db: Session, run_id: int) -> bool:
    """
    Delete a run by ID.
    Returns True if deleted, False if not found.
    """
    db_run = get_run(db, run_id)
    if not db_run:
        return False

    db.delete(db_run)
    db.commit()
    return True


def count_runs(db: Session, command: Optional[str] = None) -> int:
    query = db.query(RunRecord)
    if command:
        query = query.filter(RunRecord.command == command)
    return query.count()

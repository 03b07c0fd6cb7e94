from sqlalchemy import BigInteger, Column, DateTime, Integer, String, Text
from sqlalchemy.sql import func

from aggmem.database import Base


class RunRecord(Base):
    """
    Provenance of one stochastic run: what was asked for, with which seed,
    and a JSON summary of what came out.
    """
    __tablename__ = "aggmem_runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    command = Column(String, nullable=False, index=True)
    spec_json = Column(Text, nullable=False)
    config_json = Column(Text, nullable=True)
    seed = Column(BigInteger, nullable=True)
    seed_source = Column(String, nullable=True)
    n_units = Column(Integer, nullable=True)
    n_periods = Column(Integer, nullable=True)
    summary_json = Column(Text, nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)

    def __repr__(self):
        return f"<RunRecord(id={self.id}, command='{self.command}', seed={self.seed})>"

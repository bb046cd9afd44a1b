"""Database models and connection management for study records"""
from sqlalchemy import create_engine, Column, String, Integer, Float, DateTime, Text, JSON, ForeignKey
from sqlalchemy.orm import declarative_base, sessionmaker, Session
from datetime import datetime
import logging
import uuid
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

Base = declarative_base()


def _new_id() -> str:
    return str(uuid.uuid4())


class RecordMixin:
    """Column values as a JSON-ready dict, datetimes in ISO format"""

    def to_dict(self) -> Dict[str, Any]:
        row = {}
        for column in self.__table__.columns:
            value = getattr(self, column.name)
            row[column.name] = value.isoformat() if isinstance(value, datetime) else value
        return row


class StudyRun(RecordMixin, Base):
    """One convergence study (or single run) over a range of levels"""
    __tablename__ = 'study_runs'

    id = Column(String(36), primary_key=True, default=_new_id)
    case = Column(String(50), nullable=False)
    family = Column(String(50), nullable=False)
    scheme_order = Column(Integer, nullable=False)
    level_min = Column(Integer, nullable=False)
    level_max = Column(Integer, nullable=False)
    tolerance = Column(Float)
    status = Column(String(20), default='pending')  # pending, running, completed, failed
    created_date = Column(DateTime, default=datetime.utcnow)
    started_date = Column(DateTime)
    completed_date = Column(DateTime)
    error_message = Column(Text)
    additional_metadata = Column(JSON)

    def to_dict(self) -> Dict[str, Any]:
        row = super().to_dict()
        row['levels'] = [row.pop('level_min'), row.pop('level_max')]
        row['metadata'] = row.pop('additional_metadata')
        return row


class LevelResult(RecordMixin, Base):
    """Errors and solver diagnostics of one refinement level"""
    __tablename__ = 'level_results'

    id = Column(String(36), primary_key=True, default=_new_id)
    study_id = Column(String(36), ForeignKey('study_runs.id'), nullable=False)
    level = Column(Integer, nullable=False)
    h = Column(Float, nullable=False)
    dof_u = Column(Integer, nullable=False)
    dof_p = Column(Integer, nullable=False)
    err_u = Column(Float)
    err_div = Column(Float)
    err_p = Column(Float)
    err_proj0 = Column(Float)
    err_post = Column(Float)
    eoc = Column(JSON)  # observed orders against the previous level
    iterations = Column(Integer)
    residual = Column(Float)
    conservation = Column(Float)
    processing_time = Column(Float)  # seconds
    recorded_date = Column(DateTime, default=datetime.utcnow)


class DatabaseManager:
    """Engine, session factory and schema for one database URL"""

    def __init__(self, database_url: Optional[str] = None):
        self.database_url = database_url or os.getenv('MFEM_DATABASE_URL', 'sqlite:///results/studies.db')

        engine_args: Dict[str, Any] = {'pool_pre_ping': True}
        if not self.database_url.startswith('sqlite'):
            engine_args.update(pool_size=10, max_overflow=20)
        elif self.database_url.startswith('sqlite:///') and self.database_url != 'sqlite:///:memory:':
            # sqlite will not create missing parent directories
            db_file = os.path.abspath(self.database_url[len('sqlite:///'):])
            os.makedirs(os.path.dirname(db_file), exist_ok=True)

        self.engine = create_engine(self.database_url, **engine_args)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)
        Base.metadata.create_all(bind=self.engine)
        logger.debug(f"Study database ready at {self.database_url}")

    def get_session(self) -> Session:
        return self.SessionLocal()

    def close(self):
        self.engine.dispose()


# Global database manager instance
db_manager: Optional[DatabaseManager] = None


def get_db_manager(database_url: Optional[str] = None) -> DatabaseManager:
    """Shared manager; a different URL replaces it"""
    global db_manager
    if db_manager is None or (database_url and database_url != db_manager.database_url):
        db_manager = DatabaseManager(database_url)
    return db_manager

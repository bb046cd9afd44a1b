"""Base class for timed pipeline stages"""
from abc import ABC, abstractmethod
from typing import Dict, Any, Optional
import logging
import time


class BaseStage(ABC):
    """
    One step of a solve: reads the shared state, returns new entries.

    Calling a stage runs ``process`` and keeps per-stage call, error and
    timing counters for the run report.
    """

    def __init__(self, name: str, description: str = "", logger: Optional[logging.Logger] = None):
        """
        Args:
            name: Stage name, also the key in the orchestrator statistics
            description: One-line description for log output
            logger: Logger (``pipeline.<name>`` if omitted)
        """
        self.name = name
        self.description = description
        self.logger = logger or logging.getLogger(f"pipeline.{name}")
        self.reset_stats()

    @abstractmethod
    def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Args:
            data: Pipeline state (mesh, dofmap, matrices, ...)

        Returns:
            Entries to merge into the state
        """

    def __call__(self, data: Dict[str, Any]) -> Dict[str, Any]:
        # Errors are counted and re-raised unchanged; the CLI maps them to exit codes.
        self.total_requests += 1
        self.logger.debug(f"Stage {self.name}: {self.description}")
        started = time.perf_counter()
        try:
            return self.process(data)
        except Exception as e:
            self.total_errors += 1
            self.logger.error(f"Error in stage {self.name}: {str(e)}", exc_info=True)
            raise
        finally:
            elapsed = time.perf_counter() - started
            self.total_processing_time += elapsed
            self.logger.debug(f"Stage {self.name} took {elapsed:.3f}s")

    def get_stats(self) -> Dict[str, Any]:
        """Call, error and timing counters"""
        calls = self.total_requests
        return {
            "name": self.name,
            "total_requests": calls,
            "total_errors": self.total_errors,
            "error_rate": self.total_errors / calls if calls else 0.0,
            "total_processing_time": self.total_processing_time,
            "average_processing_time": self.total_processing_time / calls if calls else 0.0,
        }

    def reset_stats(self):
        self.total_requests = 0
        self.total_errors = 0
        self.total_processing_time = 0.0

from dataclasses import dataclass
from typing import Optional
from datetime import datetime


@dataclass
class SweepProgress:
    """Tracks progress of a parameter sweep."""
    is_running: bool = False
    current_s: Optional[float] = None
    current_eta: Optional[float] = None
    completed_count: int = 0
    nonclassical_count: int = 0
    separable_count: int = 0
    total_count: int = 0
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None

    def start(self, total: int):
        self.is_running = True
        self.current_s = None
        self.current_eta = None
        self.completed_count = 0
        self.nonclassical_count = 0
        self.separable_count = 0
        self.total_count = total
        self.started_at = datetime.now()
        self.finished_at = None

    def update(self, s_norm: float, eta: float, nonclassical: bool, separable: Optional[bool] = None):
        self.current_s = s_norm
        self.current_eta = eta
        self.completed_count += 1
        if nonclassical:
            self.nonclassical_count += 1
        if separable:
            self.separable_count += 1

    def finish(self):
        self.is_running = False
        self.current_s = None
        self.current_eta = None
        self.finished_at = datetime.now()

    @property
    def fraction(self) -> float:
        return self.completed_count / self.total_count if self.total_count else 1.0

    def to_dict(self) -> dict:
        return {
            "is_running": self.is_running,
            "current_s": self.current_s,
            "current_eta": self.current_eta,
            "completed_count": self.completed_count,
            "nonclassical_count": self.nonclassical_count,
            "separable_count": self.separable_count,
            "total_count": self.total_count,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "finished_at": self.finished_at.isoformat() if self.finished_at else None,
        }

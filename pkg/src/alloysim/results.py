"""Common Monte Carlo result container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

__all__ = ["Estimate"]


@dataclass
class Estimate:
    """A seeded Monte Carlo estimate with its standard error.

    ``metadata`` carries operation-specific extras (bounds, redraw counts,
    grid arguments); values must stay JSON-serializable.
    """

    value: float
    stderr: float
    n_samples: int
    master_seed: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n_samples,
            "seed": self.master_seed,
            "metadata": dict(self.metadata),
        }

    def to_record(self, operation: str, config_hash: Optional[str] = None) -> dict:
        """Flat result record used by the experiment writers."""
        rec = {
            "operation": operation,
            "config_hash": config_hash,
            "seed": self.master_seed,
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n_samples,
            "metadata": dict(self.metadata),
        }
        if "bound" in self.metadata:
            rec["bound"] = self.metadata["bound"]
        return rec

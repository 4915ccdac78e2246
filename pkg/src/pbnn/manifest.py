from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Optional

from pbnn import __version__


@dataclass(frozen=True)
class RunManifest:
    """Provenance block embedded in every output file."""

    command: str
    config: dict[str, Any]
    seed: Optional[int] = None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def header(self) -> dict[str, str]:
        """Flat key/value form for comment headers; timestamp always last."""
        return {
            "command": self.command,
            "config": json.dumps(self.config, sort_keys=True),
            "seed": str(self.seed),
            "version": self.version,
            "timestamp": self.timestamp,
        }

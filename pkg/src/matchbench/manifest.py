"""Run manifests: configuration echo plus a stable content hash.

The hash covers everything that determines the run's output bytes; the
wall-clock timestamp is recorded but excluded from the hash, and honors
SOURCE_DATE_EPOCH so end-to-end reruns can be compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


@dataclass(frozen=True)
class RunManifest:
    sequence_id: str
    enhancer: str
    enhancer_params: dict = field(default_factory=dict)
    detector: str = "orb"
    detector_params: dict = field(default_factory=dict)
    ransac_params: dict = field(default_factory=dict)
    seed: int = 0
    version: str = "0.1.0"
    timestamp: str = field(default_factory=_timestamp)

    def as_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        d = self.as_dict()
        d.pop("timestamp")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

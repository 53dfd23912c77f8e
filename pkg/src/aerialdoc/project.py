"""Project directory layout shared by the CLI and the service.

One project = one building session: a map PLY plus the documents the
pipeline produces. State lives in plain files, not a database.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from . import formats
from .errors import SchemaError
from .geometry import PointCloud
from .ply import read_ply

MAP_FILE = "map.ply"
VIEWPOINTS_FILE = "mission.json"
PLANSET_FILE = "planset.json"
METRICS_FILE = "metrics.json"
LOG_DIR = "logs"
TRAJECTORY_DIR = "trajectories"


@dataclass
class ProjectBundle:
    root: str
    _map_cache: Optional[PointCloud] = None

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    @property
    def map_path(self) -> str:
        return self.path(MAP_FILE)

    def load_map(self) -> PointCloud:
        if self._map_cache is None:
            if not os.path.exists(self.map_path):
                raise SchemaError(f"project has no map at {self.map_path}")
            self._map_cache = read_ply(self.map_path, "map")
        return self._map_cache

    def read_viewpoints_bytes(self) -> Optional[bytes]:
        path = self.path(VIEWPOINTS_FILE)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            return fh.read()

    def write_viewpoints_bytes(self, raw: bytes) -> None:
        tmp = self.path(VIEWPOINTS_FILE + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, self.path(VIEWPOINTS_FILE))

    def read_planset_doc(self) -> Optional[dict]:
        path = self.path(PLANSET_FILE)
        if not os.path.exists(path):
            return None
        return formats.read_json(path)

    def write_planset_doc(self, doc: dict) -> None:
        formats.write_json(self.path(PLANSET_FILE), doc)

    def ensure_dirs(self) -> None:
        os.makedirs(self.path(LOG_DIR), exist_ok=True)
        os.makedirs(self.path(TRAJECTORY_DIR), exist_ok=True)

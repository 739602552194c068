"""Service and CLI configuration.

One JSON file drives both; the TOSQA_CONFIG environment variable points to
it. Every key is optional and falls back to the defaults below.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

from .embedding import EmbeddingBackendSpec

ENV_VAR = "TOSQA_CONFIG"


@dataclass
class AppConfig:
    listen_addr: str = "127.0.0.1:8765"
    data_dir: str = "./tosqa-data"
    backend: EmbeddingBackendSpec = field(default_factory=EmbeddingBackendSpec)
    tau: float = 0.3
    poll_interval_ms: int = 2000
    scheduler_interval_ms: int = 3600_000
    recrawl_interval_days: float = 7.0
    cors_origins: List[str] = field(default_factory=lambda: ["*"])
    # crawler knobs applied to every crawl job
    crawl_max_depth: int = 2
    crawl_max_pages: int = 20
    politeness_delay_ms: int = 250
    honor_robots: bool = True
    language_filter: str = "english_only"

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])

    def to_dict(self) -> dict:
        return {
            "listen_addr": self.listen_addr,
            "data_dir": self.data_dir,
            "backend": self.backend.to_dict(),
            "tau": self.tau,
            "poll_interval_ms": self.poll_interval_ms,
            "scheduler_interval_ms": self.scheduler_interval_ms,
            "recrawl_interval_days": self.recrawl_interval_days,
            "cors_origins": self.cors_origins,
            "crawl_max_depth": self.crawl_max_depth,
            "crawl_max_pages": self.crawl_max_pages,
            "politeness_delay_ms": self.politeness_delay_ms,
            "honor_robots": self.honor_robots,
            "language_filter": self.language_filter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AppConfig":
        cfg = cls()
        for key in ("listen_addr", "data_dir", "tau", "poll_interval_ms",
                    "scheduler_interval_ms", "recrawl_interval_days", "cors_origins",
                    "crawl_max_depth", "crawl_max_pages", "politeness_delay_ms",
                    "honor_robots", "language_filter"):
            if key in d:
                setattr(cfg, key, d[key])
        if "backend" in d:
            cfg.backend = EmbeddingBackendSpec.from_dict(d["backend"])
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "AppConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_env(cls, path: Optional[str] = None) -> "AppConfig":
        """Load from an explicit path, else $TOSQA_CONFIG, else defaults."""
        path = path or os.environ.get(ENV_VAR)
        return cls.from_file(path) if path else cls()

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

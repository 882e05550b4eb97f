"""Service configuration: file-based with environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

ENV_PREFIX = "CLUECART_"


@dataclass
class ServiceConfig:
    data_dir: Path = Path("data")
    listen_addr: str = "127.0.0.1:8374"
    classifier_mode: str = "mock"  # mock | llm
    llm_endpoint: str | None = None
    llm_api_key: str | None = None
    max_inflight_llm: int = 4

    def validate(self) -> None:
        if self.classifier_mode not in ("mock", "llm"):
            raise ValueError(f"classifier_mode must be mock or llm, got {self.classifier_mode!r}")
        if self.classifier_mode == "llm" and not (self.llm_endpoint and self.llm_api_key):
            raise ValueError("llm mode requires llm_endpoint and llm_api_key")
        if self.max_inflight_llm < 1:
            raise ValueError("max_inflight_llm must be positive")

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Read the JSON config file (if any), then apply env-var overrides."""
    env = dict(os.environ if env is None else env)
    cfg = ServiceConfig()
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if "data_dir" in data:
            cfg.data_dir = Path(data["data_dir"])
        cfg.listen_addr = data.get("listen_addr", cfg.listen_addr)
        cfg.classifier_mode = data.get("classifier_mode", cfg.classifier_mode)
        cfg.llm_endpoint = data.get("llm_endpoint", cfg.llm_endpoint)
        cfg.llm_api_key = data.get("llm_api_key", cfg.llm_api_key)
        cfg.max_inflight_llm = int(data.get("max_inflight_llm", cfg.max_inflight_llm))
    if ENV_PREFIX + "DATA_DIR" in env:
        cfg.data_dir = Path(env[ENV_PREFIX + "DATA_DIR"])
    cfg.listen_addr = env.get(ENV_PREFIX + "LISTEN_ADDR", cfg.listen_addr)
    cfg.classifier_mode = env.get(ENV_PREFIX + "CLASSIFIER_MODE", cfg.classifier_mode)
    cfg.llm_endpoint = env.get(ENV_PREFIX + "LLM_ENDPOINT", cfg.llm_endpoint)
    cfg.llm_api_key = env.get(ENV_PREFIX + "LLM_API_KEY", cfg.llm_api_key)
    if ENV_PREFIX + "MAX_INFLIGHT_LLM" in env:
        cfg.max_inflight_llm = int(env[ENV_PREFIX + "MAX_INFLIGHT_LLM"])
    cfg.validate()
    return cfg

"""Deployment configuration: file loading and engine-state assembly.

Config files are TOML or JSON with flat keys (see ``DEFAULTS``). Unknown keys
are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .encoder import DEFAULT_DIM, DEFAULT_FEATURES, DEFAULT_SEED, EncoderPair, load_model
from .engine import EngineState
from .gate import GateConfig
from .generation import http_backend, stub_backend
from .index import SimilarityMetric, VectorIndex
from .prompting import PromptConfig
from .websearch import FixtureSearchClient, HttpSearchClient


@dataclass
class ServiceConfig:
    model_path: Optional[str] = None
    index_path: Optional[str] = None
    encoder_dim: int = DEFAULT_DIM
    encoder_features: int = DEFAULT_FEATURES
    encoder_seed: int = DEFAULT_SEED

    threshold: float = 0.5
    k: int = 5
    j: int = 3
    metric: str = "cosine"
    use_kb: bool = True
    use_web: bool = True
    n_web: int = 5
    auto_update: bool = True
    template_language: str = "auto"

    web_mode: str = "none"          # none | fixture | http
    web_fixture_dir: Optional[str] = None
    web_search_url: Optional[str] = None
    web_timeout: float = 10.0

    backend_mode: str = "stub"      # stub | http
    backend_endpoint: Optional[str] = None
    backend_timeout: float = 30.0

    host: str = "127.0.0.1"
    port: int = 8000
    cors_origin: Optional[str] = None
    max_request_bytes: int = 1_000_000
    max_inflight_generations: int = 4


def load_config(path: str) -> ServiceConfig:
    raw_path = Path(path)
    if raw_path.suffix == ".toml":
        data = tomllib.loads(raw_path.read_text(encoding="utf-8"))
    elif raw_path.suffix == ".json":
        data = json.loads(raw_path.read_text(encoding="utf-8"))
    else:
        raise ValueError(f"config must be .toml or .json, got {raw_path.suffix!r}")
    known = {f.name for f in fields(ServiceConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ServiceConfig(**data)


def build_state(cfg: ServiceConfig) -> EngineState:
    """Assemble encoder, index, clients, and backend from a config."""
    if cfg.model_path:
        encoder = load_model(cfg.model_path)
    else:
        encoder = EncoderPair.initialize(dim=cfg.encoder_dim, n_features=cfg.encoder_features,
                                         seed=cfg.encoder_seed)
    if cfg.index_path and Path(cfg.index_path).exists():
        index = VectorIndex.load(cfg.index_path)
        if index.dim != encoder.dim:
            raise ValueError(f"index dim {index.dim} != encoder dim {encoder.dim}")
    else:
        index = VectorIndex(encoder.dim)

    if cfg.web_mode == "fixture":
        if not cfg.web_fixture_dir:
            raise ValueError("web_mode=fixture requires web_fixture_dir")
        web_client = FixtureSearchClient(cfg.web_fixture_dir)
    elif cfg.web_mode == "http":
        if not cfg.web_search_url:
            raise ValueError("web_mode=http requires web_search_url")
        web_client = HttpSearchClient(cfg.web_search_url, fetch_timeout=cfg.web_timeout)
    elif cfg.web_mode == "none":
        web_client = None
    else:
        raise ValueError(f"unknown web_mode: {cfg.web_mode!r}")

    if cfg.backend_mode == "stub":
        backend = stub_backend()
    elif cfg.backend_mode == "http":
        if not cfg.backend_endpoint:
            raise ValueError("backend_mode=http requires backend_endpoint")
        backend = http_backend(cfg.backend_endpoint, timeout=cfg.backend_timeout)
    else:
        raise ValueError(f"unknown backend_mode: {cfg.backend_mode!r}")

    gate_cfg = GateConfig(
        k=cfg.k,
        threshold=cfg.threshold,
        metric=SimilarityMetric.parse(cfg.metric),
        use_kb=cfg.use_kb,
        use_web=cfg.use_web and web_client is not None,
        n_web=cfg.n_web,
        auto_update=cfg.auto_update,
    )
    prompt_cfg = PromptConfig(j=cfg.j, template_language=cfg.template_language)
    prompt_cfg.validate_against_k(gate_cfg.k)
    return EngineState(
        encoder=encoder,
        index=index,
        gate_config=gate_cfg,
        prompt_config=prompt_cfg,
        backend=backend,
        web_client=web_client,
        max_inflight_generations=cfg.max_inflight_generations,
    )


def config_to_json(cfg: ServiceConfig) -> dict:
    return asdict(cfg)

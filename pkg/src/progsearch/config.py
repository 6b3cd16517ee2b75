"""Search configuration and the key-value config file format.

Config files are flat `key = value` lines (# comments allowed). Provider
definitions use dotted keys:

    provider.mistral.url = https://api.mistral.ai/v1/chat/completions
    provider.mistral.model = mistral-large-latest
    provider.mistral.key_env = MISTRAL_API_KEY
    provider.mistral.price_in = 2.0
    provider.mistral.price_out = 6.0
    provider.mistral.rpm = 60

Search defaults may be set the same way (search.iterations = 10 etc.);
command-line flags win over the file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .providers import ProviderConfig


@dataclass
class SearchConfig:
    trials: int = 10
    iterations: int = 10
    max_repairs: int = 3
    seed: int = 42
    target_fitness: float | None = None
    eval_episodes: int | None = None  # None -> task default (50 grid, 5 maze/vehicle)
    step_limit: int | None = None
    trace_limit: int = 200
    parallel_trials: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.max_repairs < 1:
            raise ConfigError("max_repairs must be >= 1")
        if self.eval_episodes is not None and self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if self.parallel_trials < 1:
            raise ConfigError("parallel_trials must be >= 1")


def parse_config_file(path: str | Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def providers_from_pairs(pairs: dict[str, str]) -> dict[str, ProviderConfig]:
    """Collect provider.<name>.<field> keys into ProviderConfig objects."""
    grouped: dict[str, dict[str, str]] = {}
    for key, value in pairs.items():
        parts = key.split(".")
        if len(parts) == 3 and parts[0] == "provider":
            grouped.setdefault(parts[1], {})[parts[2]] = value
    out: dict[str, ProviderConfig] = {}
    for name, fields in grouped.items():
        try:
            out[name] = ProviderConfig(
                name=name,
                endpoint_url=fields["url"],
                model_id=fields["model"],
                api_key_env=fields.get("key_env", ""),
                max_retries=int(fields.get("max_retries", 3)),
                requests_per_minute=int(fields.get("rpm", 60)),
                price_per_million_in=float(fields.get("price_in", 0.0)),
                price_per_million_out=float(fields.get("price_out", 0.0)),
                max_response_tokens=int(fields.get("max_tokens", 4096)),
                temperature=float(fields["temperature"]) if "temperature" in fields else None,
            )
        except KeyError as e:
            raise ConfigError(f"provider {name!r} is missing field {e}") from None
        except ValueError as e:
            raise ConfigError(f"provider {name!r}: {e}") from None
    return out

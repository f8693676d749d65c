"""Run configuration: truncation depths, sampling seed, output format."""

import os
from dataclasses import dataclass, replace

DEPTH_ENV = "PVADIRAC_DEPTH"


@dataclass(frozen=True)
class RunConfig:
    depth_d: int = 8
    depth_lambda: int = 6
    depth_mu: int = 6
    seed: int = 0
    emit: str = "text"

    def __post_init__(self):
        if min(self.depth_d, self.depth_lambda, self.depth_mu) < 2:
            raise ValueError("depths must be >= 2")
        if self.emit not in ("text", "json"):
            raise ValueError("emit must be 'text' or 'json'")

    @classmethod
    def from_env(cls, **overrides):
        """Defaults, then PVADIRAC_DEPTH ("K" or "K,Kl,Km"), then explicit overrides."""
        cfg = cls()
        raw = os.environ.get(DEPTH_ENV)
        if raw:
            parts = [int(x) for x in raw.replace(" ", "").split(",") if x]
            if len(parts) == 1:
                cfg = replace(cfg, depth_d=parts[0], depth_lambda=parts[0], depth_mu=parts[0])
            elif len(parts) == 3:
                cfg = replace(cfg, depth_d=parts[0], depth_lambda=parts[1], depth_mu=parts[2])
            else:
                raise ValueError("%s must hold one or three integers" % DEPTH_ENV)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(cfg, **overrides)


def default_depth():
    return RunConfig.from_env().depth_d

"""Size limits for the exact solvers and the BFS oracles.

``METAGEO_MAX_EXACT`` overrides the walk and Steiner terminal caps; callers
(the CLI ``--max-exact`` flag) may override the environment in turn.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

ENV_VAR = "METAGEO_MAX_EXACT"


@dataclass(frozen=True)
class Caps:
    walk_targets: int = 18
    bruteforce_targets: int = 9
    steiner_terminals: int = 10
    group_terminals: int = 12
    group_vertices: int = 6000
    bfs_states: int = 2_000_000

    def with_max_exact(self, n: int | None) -> Caps:
        if n is None:
            return self
        if n < 0:
            raise ValueError("max-exact must be non-negative")
        return replace(self, walk_targets=n, steiner_terminals=n, group_terminals=n)


def default_caps() -> Caps:
    raw = os.environ.get(ENV_VAR)
    if raw is None or raw.strip() == "":
        return Caps()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return Caps().with_max_exact(n)

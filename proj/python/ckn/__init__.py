"""Symmetry breaking of CKN extremals on the cylinder.

Thin wrapper over the compiled ``_ckn`` module. Fields are numpy arrays of
shape ``(n_s, n_phi)`` that travel together with the ``Grid`` they live on.
"""

import json

from ._ckn import *  # noqa: F401,F403
from ._ckn import (
    __version__,
    cmd_analyze,
    cmd_branch,
    cmd_gn_limit,
    cmd_symmetric_curve,
    default_config,
)

_COMMANDS = {
    "symmetric-curve": cmd_symmetric_curve,
    "branch": cmd_branch,
    "analyze": cmd_analyze,
    "gn-limit": cmd_gn_limit,
}


def config(**overrides):
    """Default run configuration as a dict, with keyword overrides."""
    cfg = json.loads(default_config())
    unknown = set(overrides) - set(cfg)
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    cfg.update(overrides)
    return cfg


def run(command, cfg=None, **overrides):
    """Run a CLI command in-process; returns its log text."""
    if command not in _COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    merged = dict(cfg or config())
    merged.update(overrides)
    merged["out_dir"] = str(merged.get("out_dir", "out"))
    return _COMMANDS[command](json.dumps(merged))

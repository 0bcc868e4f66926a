"""Python bindings for the OYMB replay sampler and its DQN experiments."""

import os
from pathlib import Path

_packaged_map = Path(__file__).with_name("data") / "default.map"
if _packaged_map.exists():
    os.environ.setdefault("OYMB_MAP", str(_packaged_map))

from ._core import *  # noqa: E402,F401,F403
from ._core import __doc__  # noqa: E402,F401

from __future__ import annotations

from pathlib import Path

from eqcluster import GoldPartition

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"


def make_gold(sizes: dict[str, int]) -> GoldPartition:
    """Gold partition with sequential ids: group label -> that many docs."""
    groups = {}
    pos = 0
    for label, size in sizes.items():
        groups[label] = tuple(f"m{pos + i:03d}" for i in range(size))
        pos += size
    return GoldPartition(groups=groups)

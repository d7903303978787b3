import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matprint import Fingerprint, MaterialRecord
from matprint.schema import DEFAULT_CATEGORIES


def random_fingerprint(rng: np.random.Generator, material_id: str) -> Fingerprint:
    return Fingerprint(material_id=material_id, values=rng.uniform(-1.0, 1.0, size=16))


def random_records(rng: np.random.Generator, n: int, with_categories: bool = True):
    cats = [c for c in DEFAULT_CATEGORIES if c != "other"]
    return [
        MaterialRecord(
            material_id=f"m{i:03d}",
            category=cats[i % len(cats)] if with_categories else "other",
            fingerprint=random_fingerprint(rng, f"m{i:03d}"),
        )
        for i in range(n)
    ]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240613)

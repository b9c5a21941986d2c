from __future__ import annotations

import numpy as np
import pytest

from wordmotion.ingest import FrameFeatureSeries


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_series(
    values: np.ndarray,
    success: np.ndarray | None = None,
    fps: float = 30.0,
    person_id: str = "p0",
    video_id: str = "v0",
) -> FrameFeatureSeries:
    """Series from a raw (T, 25) value array."""
    t = values.shape[0]
    return FrameFeatureSeries(
        person_id=person_id,
        video_id=video_id,
        fps=fps,
        frame_index=np.arange(t, dtype=np.int64),
        timestamp=np.arange(t, dtype=np.float64) / fps,
        success=np.ones(t, dtype=bool) if success is None else np.asarray(success, bool),
        values=values,
    )


def random_series(rng: np.random.Generator, t: int = 40, invalid_rate: float = 0.0, **kw):
    values = rng.normal(size=(t, 25))
    success = rng.random(t) >= invalid_rate
    if not success.any():
        success[0] = True
    return make_series(values, success, **kw)

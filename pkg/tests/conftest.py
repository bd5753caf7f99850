import numpy as np
import pytest

from costsight import AnswerRecord


def random_simplex(rng, n, size=None):
    """Uniform points on the probability simplex (Dirichlet(1,...,1))."""
    shape = (n,) if size is None else (*np.atleast_1d(size), n)
    g = rng.exponential(size=shape)
    return g / g.sum(axis=-1, keepdims=True)


def make_answer(target, levels, perspective="passenger", n_classes=6, **kw):
    """AnswerRecord with the same level for every confused class, or a dict."""
    if isinstance(levels, int):
        severities = {j: levels for j in range(1, n_classes + 1) if j != target}
    else:
        severities = dict(levels)
    defaults = dict(
        participant_id="p0",
        perspective=perspective,
        image_id="img_0",
        target_class=target,
        severities=severities,
        n_classes=n_classes,
    )
    defaults.update(kw)
    return AnswerRecord(**defaults)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

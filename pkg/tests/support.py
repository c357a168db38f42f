"""Shared generators for randomized tests."""

import numpy as np

from simpart.geometry import make_simplex, regular_simplex_ratio, regularity_ratio


def random_simplex(d, rng, scale=1.0, min_ratio=None):
    """Random nondegenerate simplex in R^d.

    Gaussian vertices, rejection on the regularity ratio so downstream
    arithmetic stays well conditioned.  The default floor is 1% of the
    regular simplex's ratio, which keeps the acceptance rate above ~1/3
    even at d = 6 where typical Gaussian simplices are quite flat.
    """
    if min_ratio is None:
        min_ratio = 0.01 * regular_simplex_ratio(d)
    while True:
        verts = rng.normal(size=(d + 1, d)) * scale
        try:
            s = make_simplex(verts)
        except Exception:
            continue
        if regularity_ratio(s) >= min_ratio:
            return s


def jittered_regular_simplex(d, rng, jitter=0.15):
    """Near-regular simplex: canonical regular vertices plus noise.

    Keeps the regularity ratio within a known band, which makes sampled
    solid-angle fractions informative (no nearly-flat cones).
    """
    from simpart.geometry import canonical_simplex

    base = canonical_simplex("regular", d).vertices
    while True:
        verts = base + rng.normal(size=base.shape) * jitter / np.sqrt(d)
        try:
            s = make_simplex(verts)
        except Exception:
            continue
        if regularity_ratio(s) >= 0.05 * regularity_ratio(canonical_simplex("regular", d)):
            return s

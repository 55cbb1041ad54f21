"""Straight-line reference implementations used only by the tests."""

import math

# same slack as the implementation; float noise must not decide the radius
MASS_TOL = 1e-12


def brute_force_radius(p, t, alpha):
    """Smallest radius whose clamped symmetric window holds >= alpha, by enumeration.

    Each candidate window is summed exactly from scratch. If no window reaches
    ``alpha - MASS_TOL``, the radius that first spans all bins is returned.
    """
    m = len(p)
    full = max(t, m - 1 - t)
    if alpha >= 1.0:
        # all mass: every bin outside the window must be exactly empty
        for i in range(m):
            lo, hi = max(0, t - i), min(m - 1, t + i)
            if all(p[j] == 0 for j in range(m) if j < lo or j > hi):
                return i
        return full
    for i in range(m):
        lo, hi = max(0, t - i), min(m - 1, t + i)
        if math.fsum(p[lo : hi + 1]) >= alpha - MASS_TOL:
            return i
    return full


def brute_force_edges(p, t, alpha):
    i = brute_force_radius(p, t, alpha)
    m = len(p)
    return max(0, t - i), min(m, t + 1 + i)


def per_example_coverage(probs, labels, edges, centers, alpha):
    """Coverage of posterior intervals computed one example at a time in plain Python."""
    m = len(centers)
    hits = 0
    for row, y in zip(probs, labels):
        row = [float(v) for v in row]
        y_hat = sum(pv * c for pv, c in zip(row, centers))
        t = 0
        while t < m - 1 and edges[t + 1] <= y_hat:
            t += 1
        lo, hi = brute_force_edges(row, t, alpha)
        if edges[lo] < y < edges[hi]:
            hits += 1
    return hits / len(labels)

"""Finite point configurations, Weyl chambers/alcoves and Vandermonde-type products."""

from dataclasses import dataclass
import math

import numpy as np

MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class Configuration:
    """Sorted support points with multiplicities (an unlabeled point measure)."""

    support: tuple
    multiplicities: tuple

    def __post_init__(self):
        support = tuple(float(s) for s in self.support)
        mult = tuple(int(m) for m in self.multiplicities)
        if len(support) != len(mult):
            raise ValueError("support and multiplicities differ in length")
        if not support:
            raise ValueError("configuration must contain at least one point")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support must be strictly increasing")
        if any(m < 1 for m in mult):
            raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def total(self):
        return sum(self.multiplicities)

    def is_simple(self):
        return all(m == 1 for m in self.multiplicities)

    def points(self):
        """Labelled, sorted vector with each support point repeated by multiplicity."""
        return np.repeat(np.array(self.support), self.multiplicities)

    @classmethod
    def from_points(cls, xs, radius=None):
        """Collapse a vector of positions, merging near-coincident entries.

        With ``radius`` the positions are first reduced modulo ``2 pi radius``.
        """
        xs = np.asarray(xs, dtype=float).ravel()
        if radius is not None:
            xs = canonical_circle(radius, xs)
        xs = np.sort(xs)
        support, mult = [], []
        for x in xs:
            if support and abs(x - support[-1]) <= MERGE_RTOL * max(1.0, abs(x), abs(support[-1])):
                mult[-1] += 1
            else:
                support.append(x)
                mult.append(1)
        return cls(tuple(support), tuple(mult))

    @classmethod
    def parse(cls, text, radius=None):
        """Parse ``"-1,0,1"`` or ``"0.0*3"`` (position, optional ``*multiplicity``)."""
        pts = []
        for item in str(text).split(","):
            item = item.strip()
            if not item:
                raise ValueError(f"empty entry in configuration {text!r}")
            if "*" in item:
                pos, m = item.split("*", 1)
                m = int(m)
                if m < 1:
                    raise ValueError(f"bad multiplicity in {item!r}")
                pts.extend([float(pos)] * m)
            else:
                pts.append(float(item))
        return cls.from_points(pts, radius=radius)

    def format(self):
        parts = []
        for s, m in zip(self.support, self.multiplicities):
            parts.append(repr(s) if m == 1 else f"{s!r}*{m}")
        return ",".join(parts)


def canonical_circle(radius, xs):
    period = 2 * math.pi * radius
    out = np.mod(np.asarray(xs, dtype=float), period)
    return np.where(out >= period, out - period, out)


def in_weyl_chamber(x_vec):
    x = np.asarray(x_vec, dtype=float)
    return bool(np.all(np.diff(x) > 0))


def in_alcove(r, x_vec):
    x = np.asarray(x_vec, dtype=float)
    if x.size <= 1:
        return True
    return in_weyl_chamber(x) and bool(x[-1] < x[0] + 2 * math.pi * r)


def vandermonde(x_vec):
    """``prod_{j<k} (x_k - x_j)``."""
    x = np.asarray(x_vec)
    n = len(x)
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, 1)
    diff = x[None, :] - x[:, None]
    return np.prod(diff[iu])


def sine_product(r, x_vec):
    """``prod_{j<k} sin((x_k - x_j)/2r)``, the trigonometric Vandermonde."""
    x = np.asarray(x_vec)
    n = len(x)
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, 1)
    diff = x[None, :] - x[:, None]
    return np.prod(np.sin(diff[iu] / (2 * r)))


def h_r(r, t, x_vec):
    """``exp(t N (N^2-1) / 24 r^2) prod_{j<k} sin((x_k - x_j)/2r)``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    n = len(x_vec)
    return math.exp(t * n * (n * n - 1) / (24.0 * r * r)) * sine_product(r, x_vec)


def equidistant_config(r, N):
    """``w_j = 2 pi r (j-1) / N``, all simple."""
    if not r > 0 or N < 1:
        raise ValueError("need r > 0 and N >= 1")
    return Configuration(tuple(2 * math.pi * r * j / N for j in range(N)), (1,) * N)

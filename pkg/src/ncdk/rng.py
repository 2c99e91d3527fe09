"""Counter-based normal variates.

Every variate is a pure function of ``(seed, path, step, draw)``, hashed with
the splitmix64 finaliser, so a path's noise does not depend on how paths are
split across workers. The scalar functions are numba-compiled; the ``*_array``
twins are the vectorised numpy versions and produce the same bits.
"""

import numpy as np

from ._accel import njit

_G1 = np.uint64(0x9E3779B97F4A7C15)
_G2 = np.uint64(0xC2B2AE3D27D4EB4F)
_G3 = np.uint64(0x165667B19E3779F9)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LANE = np.uint64(0xD6E8FEB86659FD93)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def counter_hash(seed, path, step, draw):
    h = mix64(np.uint64(seed) + _G1 * (np.uint64(path) + _ONE))
    h = mix64(h + _G2 * (np.uint64(step) + _ONE))
    return mix64(h + _G3 * (np.uint64(draw) + _ONE))


@njit(cache=True)
def _to_unit(h):
    return (np.float64(h >> _S11) + 0.5) * _INV53


@njit(cache=True)
def uniform(seed, path, step, draw):
    return _to_unit(counter_hash(seed, path, step, draw))


@njit(cache=True)
def normal(seed, path, step, draw):
    h = counter_hash(seed, path, step, draw)
    u1 = _to_unit(h)
    u2 = _to_unit(mix64(h ^ _LANE))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def _mix64_array(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def counter_hash_array(seed, path, step, draw):
    seed = np.uint64(seed)
    path = np.asarray(path, dtype=np.uint64)
    step = np.asarray(step, dtype=np.uint64)
    draw = np.asarray(draw, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix64_array(seed + _G1 * (path + _ONE))
        h = _mix64_array(h + _G2 * (step + _ONE))
        return _mix64_array(h + _G3 * (draw + _ONE))


def uniform_array(seed, path, step, draw):
    h = counter_hash_array(seed, path, step, draw)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV53


def normal_array(seed, path, step, draw):
    """Standard normals broadcast over the ``path``/``step``/``draw`` arrays."""
    h = counter_hash_array(seed, path, step, draw)
    u1 = ((h >> _S11).astype(np.float64) + 0.5) * _INV53
    u2 = ((_mix64_array(h ^ _LANE) >> _S11).astype(np.float64) + 0.5) * _INV53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def seed_words(seed, n):
    """Derive ``n`` independent 64-bit sub-seeds from one seed."""
    idx = np.arange(n, dtype=np.uint64)
    return counter_hash_array(seed, idx, np.uint64(2**63), np.uint64(0))

"""Compiled inner loops for the coalescence simulators.

The random-number arithmetic mirrors :mod:`walklab.rng` exactly.
"""
import numba
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV_2_53 = 1.0 / 9007199254740992.0

KIND_NONE = 0
KIND_ALL = 1
KIND_BLOCK = 2


@numba.njit(cache=True)
def _uniform(key, i):
    z = key + (np.uint64(i) + _ONE) * _GAMMA
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return np.float64(z >> _S11) * _INV_2_53


@numba.njit(cache=True)
def _step(cum, x, u):
    j = 0
    while u >= cum[x, j]:
        j += 1
    return j


@numba.njit(cache=True, nogil=True)
def coalesce(cum, key, cap):
    """Killed-particle process; returns the full coalescence time or -1 past ``cap``."""
    n = cum.shape[0]
    key = np.uint64(key)
    pos = np.arange(n)
    alive = np.ones(n, dtype=np.bool_)
    stamp = np.zeros(n, dtype=np.int64)
    count = n
    t = 0
    while count > 1:
        t += 1
        if t > cap:
            return -1
        base = (t - 1) * n
        for a in range(n):
            if alive[a]:
                pos[a] = _step(cum, pos[a], _uniform(key, base + a))
        for a in range(n):
            if alive[a]:
                s = pos[a]
                if stamp[s] == t:
                    alive[a] = False
                    count -= 1
                else:
                    stamp[s] = t
    return t


@numba.njit(cache=True, nogil=True)
def coalesce_coupled(cum, key, cap, starts, kinds, killer, block):
    """Restricted process plus a coupled copy of the unrestricted one.

    The restricted process kills particle ``a`` at time ``t`` when it sits with
    a surviving lower-index particle ``b`` and the current epoch allows
    ``(b, a)``. The unrestricted process is carried by "hosts": one surviving
    restricted particle per occupied site. After each step every occupied
    site hands its host role to the lowest surviving particle there, so hosts
    that meet merge and a killed host passes its role to the particle that
    killed it. Hosts move independently while apart, which makes the host
    sites a coalescing random walk, and there are never more hosts than
    surviving restricted particles.

    Returns ``(tau, tau_restricted)``, either being -1 when ``cap`` is hit.
    """
    n = cum.shape[0]
    key = np.uint64(key)
    pos = np.arange(n)
    alive = np.ones(n, dtype=np.bool_)
    host = np.ones(n, dtype=np.bool_)
    stamp = np.zeros(n, dtype=np.int64)
    kstamp = np.zeros(n, dtype=np.int64)
    hstamp = np.zeros(n, dtype=np.int64)
    lowest = np.zeros(n, dtype=np.int64)
    count_r = n
    tau_u = -1
    tau_r = -1
    epoch = 0
    n_epochs = starts.shape[0]
    t = 0
    while count_r > 1 or tau_u < 0:
        t += 1
        if t > cap:
            break
        while epoch + 1 < n_epochs and starts[epoch + 1] <= t:
            epoch += 1
        base = (t - 1) * n
        for a in range(n):
            if alive[a]:
                pos[a] = _step(cum, pos[a], _uniform(key, base + a))
        kind = kinds[epoch]
        if kind == KIND_ALL:
            for a in range(n):
                if alive[a]:
                    s = pos[a]
                    if stamp[s] == t:
                        alive[a] = False
                        count_r -= 1
                    else:
                        stamp[s] = t
        elif kind == KIND_BLOCK:
            kb = killer[epoch]
            for a in range(n):
                if alive[a] and block[a] == kb:
                    kstamp[pos[a]] = t
            for a in range(n):
                if alive[a] and block[a] > kb and kstamp[pos[a]] == t:
                    alive[a] = False
                    count_r -= 1
        if count_r == 1 and tau_r < 0:
            tau_r = t
        if tau_u < 0:
            for a in range(n - 1, -1, -1):
                if alive[a]:
                    lowest[pos[a]] = a
            for a in range(n):
                if host[a]:
                    hstamp[pos[a]] = t
                    host[a] = False
            hosts = 0
            for s in range(n):
                if hstamp[s] == t:
                    host[lowest[s]] = True
                    hosts += 1
            if hosts == 1:
                tau_u = t
    return tau_u, tau_r

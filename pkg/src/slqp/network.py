"""Interference-network and parallel-channel instances.

A :class:`NetworkInstance` holds the channel power gains ``G[j, k]`` from
transmitter ``j`` to receiver ``k``, the receiver noise power and the
per-link power cap. Rates are in nats.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "NetworkInstance",
    "ParallelChannelInstance",
    "NetworkConfig",
    "dbm_to_watts",
    "pathloss",
    "hex_layout",
    "wrap_distances",
    "drop_users",
    "generate_cellular",
    "rates",
    "parallel_rates",
    "signal_interference",
]

# Slack allowed when checking power feasibility.
FEAS_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """K transmitter-receiver pairs sharing one band.

    Attributes
    ----------
    G : ndarray, shape (K, K)
        ``G[j, k] = |h_{j->k}|^2``, power gain from transmitter ``j`` to
        receiver ``k``. Diagonal entries are the direct gains.
    sigma2 : float
        Receiver noise power in watts.
    pmax : float
        Per-link transmit power cap in watts.
    """

    G: np.ndarray
    sigma2: float
    pmax: float

    def __post_init__(self):
        G = _frozen(self.G)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 1:
            raise ValueError(f"G must be a non-empty square matrix, got shape {G.shape}")
        if not np.all(np.isfinite(G)) or np.any(G < 0):
            raise ValueError("gains must be finite and nonnegative")
        if np.any(np.diag(G) <= 0):
            raise ValueError("direct gains G[k, k] must be positive")
        if not (self.sigma2 > 0 and np.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not (self.pmax > 0 and np.isfinite(self.pmax)):
            raise ValueError(f"pmax must be positive, got {self.pmax!r}")
        cross = G.copy()
        np.fill_diagonal(cross, 0.0)
        cross.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "_cross", cross)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "pmax", float(self.pmax))

    @property
    def K(self) -> int:
        return self.G.shape[0]

    @property
    def direct(self) -> np.ndarray:
        return np.diag(self.G)

    @property
    def cross(self) -> np.ndarray:
        """Gain matrix with the diagonal zeroed."""
        return self._cross

    def with_pmax(self, pmax: float) -> "NetworkInstance":
        return NetworkInstance(self.G, self.sigma2, pmax)

    def permuted(self, perm) -> "NetworkInstance":
        """Relabel users so that new user ``i`` is old user ``perm[i]``."""
        perm = np.asarray(perm)
        return NetworkInstance(self.G[np.ix_(perm, perm)], self.sigma2, self.pmax)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "G": self.G.tolist(),
            "sigma2": self.sigma2,
            "pmax": self.pmax,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkInstance":
        inst = cls(np.asarray(d["G"], dtype=float), d["sigma2"], d["pmax"])
        if "K" in d and int(d["K"]) != inst.K:
            raise ValueError(f"K={d['K']} does not match G of size {inst.K}")
        return inst

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "NetworkInstance":
        """Load from a JSON string or a path to a JSON file."""
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            source = Path(source).read_text()
        return cls.from_dict(json.loads(source))

    def digest(self) -> str:
        """Short content hash, used to check that paired runs share an instance."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.G).tobytes())
        h.update(np.array([self.sigma2, self.pmax]).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ParallelChannelInstance:
    """Parallel Gaussian channels with unit gain and a total power budget.

    Users are stored in order of descending noise power (the weakest user
    first); ``order`` maps stored positions back to the input positions.
    """

    z: np.ndarray
    p_total: float
    order: np.ndarray = field(default=None)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.ndim != 1 or z.size < 1:
            raise ValueError("z must be a non-empty vector")
        if not np.all(np.isfinite(z)) or np.any(z <= 0):
            raise ValueError("noise powers must be positive")
        if not (self.p_total > 0 and np.isfinite(self.p_total)):
            raise ValueError(f"p_total must be positive, got {self.p_total!r}")
        if self.order is None:
            order = np.argsort(-z, kind="stable")
            z = z[order]
        else:
            order = np.asarray(self.order)
            if np.any(np.diff(z) > 0):
                raise ValueError("z must be sorted in descending order when order is given")
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "p_total", float(self.p_total))

    @property
    def K(self) -> int:
        return self.z.size

    def unsort(self, v) -> np.ndarray:
        """Map a per-user vector in stored order back to input order."""
        out = np.empty(self.K)
        out[self.order] = v
        return out

    def as_network(self) -> NetworkInstance:
        """Diagonal interference network with the same rates per user.

        Gains are ``1/z`` with unit noise; the per-link cap is ``p_total``.
        The total-power coupling is *not* represented.
        """
        return NetworkInstance(np.diag(1.0 / self.z), 1.0, self.p_total)


@dataclass(frozen=True)
class NetworkConfig:
    """Cellular drop parameters. Distances in meters."""

    cells: int = 7
    users_per_cell: int = 8
    isd_m: float = 2000.0
    d0_m: float = 0.3920
    zeta: float = 3.76
    noise_psd_dbm_hz: float = -143.0
    bandwidth_hz: float = 20e6
    pmax_dbm: float = 43.0
    seed: int = 0

    def __post_init__(self):
        if self.cells != 7:
            raise ValueError("the wraparound layout requires cells = 7")
        if int(self.users_per_cell) != self.users_per_cell or self.users_per_cell < 1:
            raise ValueError("users_per_cell must be a positive integer")
        for name in ("isd_m", "d0_m", "zeta", "bandwidth_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def K(self) -> int:
        return self.cells * self.users_per_cell

    @property
    def sigma2(self) -> float:
        return dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz

    @property
    def pmax(self) -> float:
        return dbm_to_watts(self.pmax_dbm)


def dbm_to_watts(dbm):
    """Convert dBm to watts; scalars give a float."""
    w = 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return float(w) if w.ndim == 0 else w


def pathloss(d, d0: float, zeta: float):
    """Power gain ``(1 + d/d0)^(-zeta)``; equals 1 at ``d = 0``."""
    return (1.0 + np.asarray(d, dtype=float) / d0) ** (-zeta)


def hex_layout(isd: float) -> np.ndarray:
    """Base-station sites of a 7-cell cluster: the origin plus its 6 neighbours."""
    ang = np.deg2rad(30.0 + 60.0 * np.arange(6))
    ring = isd * np.column_stack([np.cos(ang), np.sin(ang)])
    return np.vstack([np.zeros(2), ring])


def _wrap_shifts(isd: float) -> np.ndarray:
    # Cluster translations of length isd*sqrt(7); rotating one by 60 deg steps gives all six.
    base = isd * np.array([np.sqrt(3.0), 2.0])
    ang = np.deg2rad(60.0 * np.arange(6))
    c, s = np.cos(ang), np.sin(ang)
    shifts = np.column_stack([c * base[0] - s * base[1], s * base[0] + c * base[1]])
    return np.vstack([np.zeros(2), shifts])


def wrap_distances(tx: np.ndarray, rx: np.ndarray, isd: float) -> np.ndarray:
    """Pairwise distances ``D[j, k]`` from ``tx[j]`` to ``rx[k]`` on the hex torus.

    Each distance is the minimum over the cluster and its six wrapped copies.
    """
    diff = rx[None, :, :] - tx[:, None, :]
    shifted = diff[None, :, :, :] + _wrap_shifts(isd)[:, None, None, :]
    return np.sqrt((shifted**2).sum(axis=-1)).min(axis=0)


def _in_hexagon(pts: np.ndarray, isd: float) -> np.ndarray:
    # Hexagon centred at the origin with apothem isd/2 facing the neighbour sites.
    ang = np.deg2rad([30.0, 90.0, 150.0])
    normals = np.column_stack([np.cos(ang), np.sin(ang)])
    return np.all(np.abs(pts @ normals.T) <= isd / 2.0, axis=1)


def drop_users(config: NetworkConfig, rng: np.random.Generator):
    """Drop ``users_per_cell`` users uniformly inside each hexagonal cell.

    Returns
    -------
    bs : ndarray, shape (7, 2)
    users : ndarray, shape (K, 2)
    cell : ndarray, shape (K,)
        Serving cell of each user; users are grouped cell by cell.
    """
    bs = hex_layout(config.isd_m)
    R = config.isd_m / np.sqrt(3.0)
    n = config.users_per_cell
    users = []
    for site in bs:
        pts = np.empty((0, 2))
        while len(pts) < n:
            cand = rng.uniform(-R, R, size=(4 * n, 2))
            pts = np.vstack([pts, cand[_in_hexagon(cand, config.isd_m)]])
        users.append(site + pts[:n])
    cell = np.repeat(np.arange(len(bs)), n)
    return bs, np.vstack(users), cell


def generate_cellular(config: NetworkConfig) -> NetworkInstance:
    """Seeded Rayleigh-faded cellular instance on the wrapped 7-cell layout.

    Every user is a separate link whose transmitter sits at its serving base
    station. ``G[j, k] = PL(d(tx_j, rx_k)) |g_jk|^2`` with ``g_jk`` unit-variance
    circularly-symmetric complex Gaussian (one block-fading draw).
    """
    rng = np.random.default_rng(int(config.seed))
    bs, users, cell = drop_users(config, rng)
    d = wrap_distances(bs[cell], users, config.isd_m)
    g = rng.standard_normal(d.shape + (2,))
    fading = 0.5 * (g**2).sum(axis=-1)
    G = pathloss(d, config.d0_m, config.zeta) * fading
    return NetworkInstance(G, config.sigma2, config.pmax)


def _check_power(p, K: int, hi: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (K,):
        raise ValueError(f"power vector must have shape ({K},), got {p.shape}")
    tol = FEAS_TOL * hi
    if not np.all(np.isfinite(p)) or np.any(p < -tol) or np.any(p > hi + tol):
        raise ValueError("infeasible power vector")
    return np.clip(p, 0.0, hi)


def signal_interference(instance: NetworkInstance, p, k=None):
    """Signal power ``A_k`` and interference-plus-noise ``B_k`` at receiver ``k``.

    With ``k=None`` both are returned as length-K arrays.
    """
    p = _check_power(p, instance.K, instance.pmax)
    A = p * instance.direct
    B = instance.cross.T @ p + instance.sigma2
    if k is None:
        return A, B
    return float(A[k]), float(B[k])


def rates(instance: NetworkInstance, p) -> np.ndarray:
    """Per-user rates ``ln(1 + A_k / B_k)`` in nats."""
    A, B = signal_interference(instance, p)
    return np.log1p(A / B)


def parallel_rates(instance: ParallelChannelInstance, p) -> np.ndarray:
    """Per-user rates ``ln(1 + p_k / z_k)`` for powers given in stored order."""
    p = np.asarray(p, dtype=float)
    if p.shape != (instance.K,):
        raise ValueError(f"power vector must have shape ({instance.K},), got {p.shape}")
    tol = FEAS_TOL * instance.p_total
    if not np.all(np.isfinite(p)) or np.any(p < -tol) or p.sum() > instance.p_total + tol:
        raise ValueError("infeasible power vector")
    return np.log1p(np.maximum(p, 0.0) / instance.z)

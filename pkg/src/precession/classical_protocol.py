"""Classical precession protocol: sectors, exact per-point scores, sampling and bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConsistencyError, DomainError

# Rounds drawn per independently seeded chunk.  Chunk i uses child i of
# SeedSequence(seed).spawn(n_chunks), so results never depend on how the
# chunks are scheduled.
CHUNK_ROUNDS = 1 << 16
ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    a1: float
    a2: float

    def __post_init__(self):
        if not (math.isfinite(self.a1) and math.isfinite(self.a2)):
            raise DomainError(f"phase point must be finite, got ({self.a1}, {self.a2})")

    @property
    def theta(self) -> float:
        return math.atan2(self.a2, self.a1)

    def rotated(self, angle: float) -> "PhasePoint":
        c, s = math.cos(angle), math.sin(angle)
        return PhasePoint(c * self.a1 - s * self.a2, s * self.a1 + c * self.a2)


@dataclass(frozen=True)
class SectorLabel:
    sign: str          # '+', '-' or 'boundary'
    k: int | None = None

    def __str__(self):
        return "boundary" if self.sign == "boundary" else f"{self.sign}{self.k}"


def _sector_coordinate(theta, K):
    """Angle measured clockwise from +pi/2 in units of pi/K, in [0, 2K)."""
    return np.mod(np.pi / 2 - theta, 2 * np.pi) / (np.pi / K)


def sector_of(p: PhasePoint, K: int, edge_tol: float = 1e-12) -> SectorLabel:
    """Classify a point into one of the 2K open sectors, or the boundary set.

    Edges sit at theta = pi/2 - q pi/K.  Between edges q and q+1 the sector
    index is k = q // 2 and the sign is '+' for even q, where the point is
    seen positive in (K+1)/2 of the K rounds.
    """
    if K < 3 or K % 2 == 0:
        raise DomainError(f"K must be odd and >= 3, got {K}")
    if p.a1 == 0 and p.a2 == 0:
        return SectorLabel("boundary")
    s = float(_sector_coordinate(p.theta, K))
    nearest = round(s)
    if abs(s - nearest) <= edge_tol * max(1.0, s):
        return SectorLabel("boundary")
    q = int(math.floor(s)) % (2 * K)
    return SectorLabel("+" if q % 2 == 0 else "-", q // 2)


def round_angles(K: int) -> np.ndarray:
    return 2 * np.pi * np.arange(K) / K


def _pos(values, scale):
    """1 for positive, 0 for negative, 1/2 within the relative zero tolerance."""
    zero = np.abs(values) <= ZERO_RTOL * scale
    return np.where(zero, 0.5, (values > 0).astype(float))


def exact_point_score(p: PhasePoint, K: int) -> float:
    """(1/K) sum_k pos(a1 cos t_k + a2 sin t_k), a zero reading counting 1/2."""
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    scale = max(abs(p.a1), abs(p.a2))
    if scale == 0:
        return 0.5
    # the score is scale invariant; normalising avoids underflow for tiny points
    a1, a2 = p.a1 / scale, p.a2 / scale
    t = round_angles(K)
    values = a1 * np.cos(t) + a2 * np.sin(t)
    return math.fsum(_pos(values, abs(a1) + abs(a2))) / K


def point_scores(a1, a2, K: int) -> np.ndarray:
    """Vectorised exact_point_score over arrays of points."""
    a1, a2 = np.broadcast_arrays(np.asarray(a1, float), np.asarray(a2, float))
    t = round_angles(K)
    values = a1[..., None] * np.cos(t) + a2[..., None] * np.sin(t)
    scale = (np.abs(a1) + np.abs(a2))[..., None]
    return _pos(values, scale).mean(axis=-1)


# densities -----------------------------------------------------------------

class Density:
    """A phase-space density that can be sampled and integrated in polar form."""

    name = "density"
    radius = 1.0

    def sample(self, rng: np.random.Generator, n: int):
        raise NotImplementedError

    def polar_pdf(self, r, theta, K):
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(Density):
    a1: float
    a2: float
    name = "point"

    def sample(self, rng, n):
        return np.full(n, self.a1), np.full(n, self.a2)

    def spec(self):
        return f"point:{self.a1:g},{self.a2:g}"


@dataclass(frozen=True)
class UniformDisc(Density):
    radius: float = 1.0
    name = "disc"

    def sample(self, rng, n):
        r = self.radius * np.sqrt(rng.random(n))
        t = rng.uniform(-np.pi, np.pi, n)
        return r * np.cos(t), r * np.sin(t)

    def polar_pdf(self, r, theta, K):
        return np.where(r <= self.radius, 1.0 / (np.pi * self.radius ** 2), 0.0) + 0 * theta

    def spec(self):
        return f"disc:{self.radius:g}"


@dataclass(frozen=True)
class UniformSector(Density):
    sign: str
    k: int
    radius: float = 1.0
    name = "sector"

    def _q(self, K):
        if not 0 <= self.k < K:
            raise ConfigurationError(f"sector index {self.k} outside [0, {K})")
        return 2 * self.k + (0 if self.sign == "+" else 1)

    def angular_range(self, K):
        q = self._q(K)
        hi = np.pi / 2 - q * np.pi / K
        return hi - np.pi / K, hi

    def sample_k(self, rng, n, K):
        lo, hi = self.angular_range(K)
        r = self.radius * np.sqrt(rng.random(n))
        t = rng.uniform(lo, hi, n)
        return r * np.cos(t), r * np.sin(t)

    def polar_pdf(self, r, theta, K):
        q = self._q(K)
        s = _sector_coordinate(theta, K)
        inside = (np.floor(s) == q) & (r <= self.radius)
        return np.where(inside, 2 * K / (np.pi * self.radius ** 2), 0.0)

    def spec(self):
        return f"sector:{self.sign}{self.k}"


@dataclass(frozen=True)
class IsotropicGaussian(Density):
    sigma: float = 1.0
    name = "gaussian"

    @property
    def radius(self):
        return 9.0 * self.sigma

    def sample(self, rng, n):
        return self.sigma * rng.standard_normal(n), self.sigma * rng.standard_normal(n)

    def polar_pdf(self, r, theta, K):
        return np.exp(-r ** 2 / (2 * self.sigma ** 2)) / (2 * np.pi * self.sigma ** 2) + 0 * theta

    def spec(self):
        return f"gaussian:{self.sigma:g}"


def _positive(text, what):
    try:
        value = float(text)
    except ValueError:
        raise ConfigurationError(f"bad {what} {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise ConfigurationError(f"{what} must be positive, got {text!r}")
    return value


def parse_density(spec: str | Density) -> Density:
    """Parse 'point:a1,a2', 'disc:R', 'sector:+k[:R]' or 'gaussian:sigma'."""
    if isinstance(spec, Density):
        return spec
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    if name == "point":
        parts = arg.split(",")
        if len(parts) != 2:
            raise ConfigurationError(f"point density needs 'point:a1,a2', got {spec!r}")
        try:
            return PointMass(*(float(v) for v in parts))
        except ValueError:
            raise ConfigurationError(f"bad point coordinates in {spec!r}") from None
    if name == "disc":
        return UniformDisc(_positive(arg or "1", "disc radius"))
    if name == "sector":
        label, _, radius = arg.partition(":")
        if len(label) < 2 or label[0] not in "+-" or not label[1:].isdigit():
            raise ConfigurationError(f"sector density needs 'sector:+k' or 'sector:-k', got {spec!r}")
        return UniformSector(label[0], int(label[1:]), _positive(radius or "1", "sector radius"))
    if name == "gaussian":
        return IsotropicGaussian(_positive(arg or "1", "gaussian width"))
    raise ConfigurationError(f"unknown density {name!r} (expected point, disc, sector or gaussian)")


def _check_k(K):
    if K < 3 or K % 2 == 0:
        raise DomainError(f"K must be odd and >= 3, got {K}")


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    standard_error: float
    rounds: int
    seed: int
    density: str


def monte_carlo_score(density, K: int, rounds: int, seed: int) -> MonteCarloResult:
    """Estimate the classical score by sampling one point and one round per trial."""
    _check_k(K)
    if rounds < 1:
        raise DomainError(f"rounds must be >= 1, got {rounds}")
    dens = parse_density(density)
    n_chunks = -(-rounds // CHUNK_ROUNDS)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    total = 0.0
    total_sq = 0.0
    angles = round_angles(K)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        n = min(CHUNK_ROUNDS, rounds - i * CHUNK_ROUNDS)
        if isinstance(dens, UniformSector):
            a1, a2 = dens.sample_k(rng, n, K)
        else:
            a1, a2 = dens.sample(rng, n)
        t = angles[rng.integers(0, K, n)]
        values = a1 * np.cos(t) + a2 * np.sin(t)
        scores = _pos(values, np.abs(a1) + np.abs(a2))
        total += math.fsum(scores)
        total_sq += math.fsum(scores * scores)
    mean = total / rounds
    var = max(total_sq / rounds - mean * mean, 0.0) * rounds / (rounds - 1) if rounds > 1 else 0.0
    return MonteCarloResult(mean, math.sqrt(var / rounds), rounds, seed, dens.spec())


@dataclass(frozen=True)
class BoundCheckReport:
    K: int
    density: str
    score: float
    lower: float
    upper: float
    tolerance: float
    within: bool


def classical_range(K: int) -> tuple[float, float]:
    return 0.5 * (1 - 1 / K), 0.5 * (1 + 1 / K)


def bound_check(density, K: int, resolution: int = 720, tolerance: float = 1e-9) -> BoundCheckReport:
    """Integrate exact point scores against the density on a polar midpoint grid.

    Raises ConsistencyError if the integral leaves the classical range by
    more than ``tolerance``; no classical density can do that.
    """
    _check_k(K)
    if resolution < 8:
        raise DomainError("resolution must be >= 8")
    dens = parse_density(density)
    lower, upper = classical_range(K)
    if isinstance(dens, PointMass):
        score = exact_point_score(PhasePoint(dens.a1, dens.a2), K)
    else:
        n_r = max(resolution // 4, 16)
        dr = dens.radius / n_r
        dt = 2 * np.pi / resolution
        r = (np.arange(n_r) + 0.5) * dr
        t = -np.pi + (np.arange(resolution) + 0.5) * dt
        rr, tt = np.meshgrid(r, t, indexing="ij")
        w = dens.polar_pdf(rr, tt, K) * rr * dr * dt
        scores = point_scores(rr * np.cos(tt), rr * np.sin(tt), K)
        score = float(np.sum(w * scores) / np.sum(w))
    within = lower - tolerance <= score <= upper + tolerance
    if not within:
        raise ConsistencyError(
            f"classical score {score:.12g} outside [{lower:.6g}, {upper:.6g}] for {dens.spec()}")
    return BoundCheckReport(K, dens.spec(), score, lower, upper, tolerance, within)

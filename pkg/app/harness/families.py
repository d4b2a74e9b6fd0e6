"""
Synthetic loss streams for each function class.

Every stream is materialized up front in one common form

    f_t(x) = (w_t/2)||x - z_t||^2 + (<a_t, x> - b_t)^2 + <g_t, x>

with unused parts set to zero, so per-round oracles, summed losses and the
summed Hessian all come from the same arrays. Streams carry certificates
(G, lambda, alpha, H) valid on the domain they were generated for.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from app.domains.base import DomainSpec, HalfspaceDomain
from app.domains.projection import membership
from app.errors import ConfigError, DimensionMismatch, InfeasibleFamily
from app.utils.log import logger


class FamilyKind(str, Enum):
    """Loss-stream families; the value is the name used in configs and CSVs."""

    LINEAR_ADVERSARIAL = "linear-adversarial"
    STRONGLY_CONVEX_QUADRATIC = "sc-quadratic"
    EXP_CONCAVE_SQUARED = "exp-concave-squared"
    SMOOTH_REALIZABLE = "smooth-realizable"


@dataclass(frozen=True, eq=False)
class ProblemFamily:
    """
    Parameters of a synthetic stream.

    ``modulus`` is lambda for sc-quadratic (required) and smooth-realizable
    (optional; omitted means the convex rank-one form). ``drift`` draws a new
    target z_t each round instead of a fixed z*. ``noise`` perturbs the
    exp-concave labels.
    """

    kind: FamilyKind
    dimension: int
    horizon: int
    seed: int = 0
    modulus: Optional[float] = None
    drift: bool = False
    noise: float = 0.1
    target: Optional[np.ndarray] = None

    def __post_init__(self):
        """Validate structural fields; domain-dependent checks happen in generate_stream."""
        if not isinstance(self.kind, FamilyKind):
            object.__setattr__(self, "kind", FamilyKind(self.kind))
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ConfigError(f"Family dimension must be a positive integer, got {self.dimension}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"Family horizon must be a positive integer, got {self.horizon}")
        if self.noise < 0:
            raise ConfigError("noise must be nonnegative")
        if self.target is not None:
            object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
            if self.target.shape != (self.dimension,):
                raise DimensionMismatch(self.dimension, self.target.shape[0])

    @property
    def name(self) -> str:
        if self.modulus is None:
            return self.kind.value
        return f"{self.kind.value}({self.modulus:g})"


@dataclass(frozen=True)
class StreamCertificates:
    """
    Class certificates valid on the generating domain.

    ``lam`` is the strong convexity modulus (0 if none); ``alpha`` and ``H``
    are None when the stream makes no exp-concavity or smoothness claim.
    """

    G: float
    lam: float = 0.0
    alpha: Optional[float] = None
    H: Optional[float] = None
    nonnegative: bool = False


@dataclass(frozen=True, eq=False)
class LossStream:
    """Materialized loss stream; rounds are numbered from 1."""

    family: ProblemFamily
    certificates: StreamCertificates
    weights: np.ndarray
    centers: np.ndarray
    directions: np.ndarray
    offsets: np.ndarray
    linear: np.ndarray
    target: Optional[np.ndarray] = field(default=None)

    @property
    def horizon(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.centers.shape[1])

    def _rounds(self, rounds: Optional[int]) -> int:
        n = self.horizon if rounds is None else int(rounds)
        if not 0 <= n <= self.horizon:
            raise ConfigError(f"rounds must be in [0, {self.horizon}], got {n}")
        return n

    def loss(self, t: int, x: np.ndarray) -> float:
        i = t - 1
        diff = x - self.centers[i]
        residual = float(self.directions[i] @ x) - self.offsets[i]
        return float(0.5 * self.weights[i] * (diff @ diff) + residual**2 + self.linear[i] @ x)

    def gradient(self, t: int, x: np.ndarray) -> np.ndarray:
        i = t - 1
        residual = float(self.directions[i] @ x) - self.offsets[i]
        return self.weights[i] * (x - self.centers[i]) + 2.0 * residual * self.directions[i] + self.linear[i]

    def losses_at(self, x: np.ndarray, rounds: Optional[int] = None) -> np.ndarray:
        """Per-round losses f_1(x), ..., f_n(x) at one fixed point."""
        n = self._rounds(rounds)
        diff = x - self.centers[:n]
        residual = self.directions[:n] @ x - self.offsets[:n]
        return 0.5 * self.weights[:n] * np.sum(diff**2, axis=1) + residual**2 + self.linear[:n] @ x

    def total_loss(self, x: np.ndarray, rounds: Optional[int] = None) -> float:
        return float(np.sum(self.losses_at(x, rounds)))

    def total_gradient(self, x: np.ndarray, rounds: Optional[int] = None) -> np.ndarray:
        n = self._rounds(rounds)
        residual = self.directions[:n] @ x - self.offsets[:n]
        return (
            np.sum(self.weights[:n]) * x
            - self.weights[:n] @ self.centers[:n]
            + 2.0 * residual @ self.directions[:n]
            + np.sum(self.linear[:n], axis=0)
        )

    def total_hessian(self, rounds: Optional[int] = None) -> np.ndarray:
        n = self._rounds(rounds)
        a = self.directions[:n]
        return np.sum(self.weights[:n]) * np.eye(self.dimension) + 2.0 * a.T @ a

    def closed_form_minimizer(self, domain: DomainSpec, rounds: Optional[int] = None) -> Optional[np.ndarray]:
        """proj_X of the weighted mean of the centers, for pure quadratic streams."""
        n = self._rounds(rounds)
        total_weight = float(np.sum(self.weights[:n]))
        if total_weight <= 0 or np.any(self.directions[:n]) or np.any(self.linear[:n]):
            return None
        return domain.project(self.weights[:n] @ self.centers[:n] / total_weight)


def sample_feasible(domain: DomainSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Random points of the domain, shape (n, d).

    Halfspace domains are sampled along random rays from the origin without
    projecting; the other domains shrink a projected Gaussian point toward the
    origin.
    """
    d = domain.dimension
    directions = rng.normal(size=(n, d))
    scales = rng.uniform(0.0, 1.0, size=n)
    if isinstance(domain, HalfspaceDomain):
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        speeds = directions @ domain.normals.T
        with np.errstate(divide="ignore"):
            reach = np.where(speeds > 0, domain.offsets / np.where(speeds > 0, speeds, 1.0), np.inf)
        t_max = np.minimum(reach.min(axis=1), domain.radius_bound)
        return directions * (scales * t_max)[:, None]
    spread = directions * domain.radius_bound
    return np.stack([domain.project(p) for p in spread]) * scales[:, None]


def _random_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Directions with norms uniform in [1/2, 1]."""
    a = rng.normal(size=(n, d))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return a * rng.uniform(0.5, 1.0, size=(n, 1))


def _orthogonal_adversary(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """
    Unit linear gradients with alternating signs along fresh random directions.

    From the second round on, each direction is orthogonal to the running sum
    of the earlier gradients, so for d >= 2 the sum after t rounds has norm
    exactly sqrt(t). In one dimension the direction reduces to a random sign.
    """
    grads = np.empty((n, d))
    total = np.zeros(d)
    for i in range(n):
        direction = rng.normal(size=d)
        norm_sq = float(total @ total)
        if d > 1 and norm_sq > 0:
            direction -= (direction @ total) / norm_sq * total
        direction /= np.linalg.norm(direction)
        grads[i] = direction if i % 2 == 0 else -direction
        total += grads[i]
    return grads


def _check_target(family: ProblemFamily, domain: DomainSpec, rng: np.random.Generator) -> np.ndarray:
    if family.target is None:
        return sample_feasible(domain, rng, 1)[0]
    if not membership(family.target, domain, tol=1e-9 + domain.projection_tolerance):
        raise InfeasibleFamily(f"Target {family.target.tolist()} lies outside the domain")
    return family.target.copy()


def generate_stream(family: ProblemFamily, domain: DomainSpec) -> LossStream:
    """
    Materialize the stream of ``family`` on ``domain``; deterministic in the seed.

    Raises:
        InfeasibleFamily: If the parameters violate the family's assumptions on
            this domain (nonpositive modulus, target outside X, drifting
            realizable stream)
        DimensionMismatch: If family and domain dimensions differ
    """
    if family.dimension != domain.dimension:
        raise DimensionMismatch(domain.dimension, family.dimension)

    T, d = family.horizon, family.dimension
    rng = np.random.default_rng(family.seed)
    R = float(domain.radius_bound)

    weights = np.zeros(T)
    centers = np.zeros((T, d))
    directions = np.zeros((T, d))
    offsets = np.zeros(T)
    linear = np.zeros((T, d))
    target: Optional[np.ndarray] = None

    if family.modulus is not None and not family.modulus > 0:
        raise InfeasibleFamily(f"Modulus must be positive, got {family.modulus}")
    if family.modulus is not None and not (1.0 / T <= family.modulus <= 1.0):
        logger.debug(f"Modulus {family.modulus} outside [1/T, 1]; no grid expert is matched within a factor 2")

    if family.kind is FamilyKind.LINEAR_ADVERSARIAL:
        linear = _orthogonal_adversary(rng, T, d)
        certificates = StreamCertificates(G=1.0, lam=0.0, H=0.0)

    elif family.kind is FamilyKind.STRONGLY_CONVEX_QUADRATIC:
        if family.modulus is None:
            raise InfeasibleFamily("sc-quadratic needs a strong convexity modulus")
        lam = float(family.modulus)
        weights[:] = lam
        if family.drift:
            centers = sample_feasible(domain, rng, T)
        else:
            target = _check_target(family, domain, rng)
            centers[:] = target
        reach = R + float(np.linalg.norm(centers, axis=1).max())
        G = lam * reach
        certificates = StreamCertificates(G=G, lam=lam, alpha=lam / G**2, H=lam, nonnegative=True)

    elif family.kind is FamilyKind.EXP_CONCAVE_SQUARED:
        directions = _random_directions(rng, T, d)
        w_star = _check_target(family, domain, rng)
        offsets = np.clip(directions @ w_star + family.noise * rng.normal(size=T), -R, R)
        a_max = float(np.linalg.norm(directions, axis=1).max())
        reach = R * a_max + float(np.abs(offsets).max())
        certificates = StreamCertificates(
            G=max(2.0 * reach * a_max, 1e-12),
            alpha=1.0 / (2.0 * reach**2),
            H=2.0 * a_max**2,
            nonnegative=True,
        )

    elif family.kind is FamilyKind.SMOOTH_REALIZABLE:
        if family.drift:
            raise InfeasibleFamily("smooth-realizable streams need a fixed target")
        target = _check_target(family, domain, rng)
        reach = R + float(np.linalg.norm(target))
        if family.modulus is None:
            directions = _random_directions(rng, T, d)
            offsets = directions @ target
            a_max = float(np.linalg.norm(directions, axis=1).max())
            certificates = StreamCertificates(
                G=2.0 * a_max**2 * reach,
                alpha=1.0 / (2.0 * (a_max * reach) ** 2),
                H=2.0 * a_max**2,
                nonnegative=True,
            )
        else:
            lam = float(family.modulus)
            weights[:] = lam
            centers[:] = target
            G = lam * reach
            certificates = StreamCertificates(G=G, lam=lam, alpha=lam / G**2, H=lam, nonnegative=True)

    else:
        raise ConfigError(f"Unknown family kind: {family.kind}")

    return LossStream(
        family=family,
        certificates=certificates,
        weights=weights,
        centers=centers,
        directions=directions,
        offsets=offsets,
        linear=linear,
        target=target,
    )


def check_certificates(
    stream: LossStream,
    domain: DomainSpec,
    rng: np.random.Generator,
    samples: int = 1000,
    slack: float = 1e-9,
) -> None:
    """
    Spot-check the stream's certificates at random rounds and feasible points.

    Checks the gradient bound, the strong convexity inequality, midpoint
    concavity of exp(-alpha f) along segments, gradient Lipschitzness,
    nonnegativity and the self-bounding property ||grad f||^2 <= 4 H f.

    Raises:
        InfeasibleFamily: On the first violated certificate
    """
    cert = stream.certificates
    rounds = rng.integers(1, stream.horizon + 1, size=samples)
    xs = sample_feasible(domain, rng, samples)
    ys = sample_feasible(domain, rng, samples)

    for t, x, y in zip(rounds, xs, ys):
        t = int(t)
        fx, fy = stream.loss(t, x), stream.loss(t, y)
        gx, gy = stream.gradient(t, x), stream.gradient(t, y)
        tol = slack * max(1.0, abs(fx), abs(fy))
        dist_sq = float((y - x) @ (y - x))

        g_norm = float(np.linalg.norm(gx))
        if g_norm > cert.G * (1 + slack) + slack:
            raise InfeasibleFamily(f"Gradient norm {g_norm:.6g} exceeds G={cert.G:.6g} at round {t}")

        lower = fx + float(gx @ (y - x)) + 0.5 * cert.lam * dist_sq
        if fy < lower - tol:
            raise InfeasibleFamily(f"Strong convexity ({cert.lam:g}) violated at round {t}")

        if cert.alpha is not None:
            mid = 0.5 * (x + y)
            h_mid = math.exp(-cert.alpha * stream.loss(t, mid))
            h_avg = 0.5 * (math.exp(-cert.alpha * fx) + math.exp(-cert.alpha * fy))
            if h_mid < h_avg - slack:
                raise InfeasibleFamily(f"Exp-concavity ({cert.alpha:.6g}) violated at round {t}")

        if cert.H is not None:
            if float(np.linalg.norm(gx - gy)) > cert.H * math.sqrt(dist_sq) + slack * max(1.0, g_norm):
                raise InfeasibleFamily(f"Smoothness ({cert.H:g}) violated at round {t}")

        if cert.nonnegative:
            if fx < -tol:
                raise InfeasibleFamily(f"Negative loss {fx:.3e} at round {t}")
            if cert.H is not None and g_norm**2 > 4.0 * cert.H * fx + tol:
                raise InfeasibleFamily(f"Self-bounding property violated at round {t}")

    logger.debug(f"Certificates of {stream.family.name} hold on {samples} samples")

"""Two-threshold scheme on the real projective plane.

Points and lines are both unit 3-vectors up to sign (a line is stored by
the normal of its great circle). The dealer draws a uniformly random line
t; the secret is t meet ell, and participant line p gets t meet p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dealing import Dealing
from ..errors import CoincidentPoints

_SIGN_EPS = 1e-12
THROUGH_Q_TOL = 1e-9


def canonicalize(v: np.ndarray) -> np.ndarray:
    """Normalize along the last axis and flip so the first nonzero coordinate is positive."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("zero vector has no projective meaning")
    u = v / norm
    first = np.argmax(np.abs(u) > _SIGN_EPS, axis=-1)
    lead = np.take_along_axis(u, first[..., None], axis=-1)
    return np.where(lead < 0, -u, u)


@dataclass(frozen=True)
class ProjPoint:
    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(float(c) for c in canonicalize(self.v)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.v)

    def close_to(self, other: ProjPoint, tol: float = 1e-9) -> bool:
        return projective_distance(self.array, other.array) <= tol


@dataclass(frozen=True)
class ProjLine:
    n: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(float(c) for c in canonicalize(self.n)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.n)

    def contains(self, point: ProjPoint, tol: float = 1e-10) -> bool:
        return abs(float(self.array @ point.array)) < tol


def projective_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle between projective points (antipodes identified), in [0, pi/2]."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    # atan2 keeps full precision for nearly equal points, where arccos does not
    sin = np.linalg.norm(np.cross(a, b), axis=-1)
    cos = np.abs(np.sum(a * b, axis=-1))
    return np.arctan2(sin, cos)


def meet(line_a: np.ndarray, line_b: np.ndarray) -> np.ndarray:
    """Intersection point of two lines given by their normals (broadcasts)."""
    return canonicalize(np.cross(line_a, line_b))


def join(point_a: np.ndarray, point_b: np.ndarray) -> np.ndarray:
    return canonicalize(np.cross(point_a, point_b))


@dataclass(frozen=True)
class ProjectiveScheme:
    Q: ProjPoint
    ell: ProjLine
    participant_lines: tuple

    def __post_init__(self):
        lines = tuple(self.participant_lines)
        if not self.ell.contains(self.Q):
            raise ValueError("ell must pass through Q")
        for i, line in enumerate(lines):
            if not line.contains(self.Q):
                raise ValueError(f"participant line {i} does not pass through Q")
            if projective_distance(line.array, self.ell.array) < 1e-12:
                raise ValueError(f"participant line {i} equals ell")
        for i in range(len(lines)):
            for j in range(i):
                if projective_distance(lines[i].array, lines[j].array) < 1e-12:
                    raise ValueError(f"participant lines {j} and {i} coincide")
        object.__setattr__(self, "participant_lines", lines)

    @classmethod
    def standard(cls, n_participants: int = 5) -> ProjectiveScheme:
        """Q at the north pole, ell the meridian x = 0, participants at even angular steps.

        With an odd count the middle participant is perpendicular to ell.
        """
        if n_participants < 2:
            raise ValueError("need at least two participant lines")
        angles = [j * math.pi / (n_participants + 1) for j in range(1, n_participants + 1)]
        lines = tuple(ProjLine((math.cos(a), math.sin(a), 0.0)) for a in angles)
        return cls(ProjPoint((0.0, 0.0, 1.0)), ProjLine((1.0, 0.0, 0.0)), lines)

    @property
    def normals(self) -> np.ndarray:
        return np.array([line.n for line in self.participant_lines])

    # -- arc parameter on ell --------------------------------------------------

    def _ell_frame(self) -> tuple[np.ndarray, np.ndarray]:
        e1 = self.Q.array
        e2 = np.cross(self.ell.array, e1)
        return e1, e2 / np.linalg.norm(e2)

    def arc_parameter(self, points: np.ndarray) -> np.ndarray:
        """Angle in [0, pi) of points of ell, measured from Q."""
        e1, e2 = self._ell_frame()
        pts = np.asarray(points, dtype=float)
        ang = np.arctan2(pts @ e2, pts @ e1)
        return np.mod(ang, math.pi)

    # -- dealing ---------------------------------------------------------------

    def random_lines(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform random line normals, redrawn while they pass through Q."""
        normals = rng.standard_normal((size, 3))
        q = self.Q.array
        while True:
            unit = normals / np.linalg.norm(normals, axis=1, keepdims=True)
            bad = np.abs(unit @ q) < THROUGH_Q_TOL
            if not bad.any():
                return unit
            normals[bad] = rng.standard_normal((int(bad.sum()), 3))

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets (size, 3), shares (size, n_participants, 3), line normals (size, 3)."""
        t = self.random_lines(rng, size)
        secrets = meet(t, self.ell.array[None, :])
        shares = meet(t[:, None, :], self.normals[None, :, :])
        return secrets, shares, t

    def deal(self, rng: np.random.Generator) -> Dealing:
        secrets, shares, t = self.sample(rng, 1)
        secret = ProjPoint(secrets[0])
        return Dealing(
            secret,
            {i: tuple(shares[0, i]) for i in range(len(self.participant_lines))},
            {"secret_scalar": float(self.arc_parameter(secrets[0])), "line": tuple(t[0])},
        )

    def recover(self, first, second) -> ProjPoint:
        """Secret from two (participant, point) pairs on distinct participant lines."""
        (_, pt1), (_, pt2) = first, second
        a = canonicalize(np.asarray(getattr(pt1, "v", pt1), dtype=float))
        b = canonicalize(np.asarray(getattr(pt2, "v", pt2), dtype=float))
        if projective_distance(a, b) < 1e-12:
            raise CoincidentPoints("the two share points coincide")
        t = join(a, b)
        return ProjPoint(meet(t, self.ell.array))

    # -- conditional density -----------------------------------------------------

    def distance_to_ell(self, point) -> float:
        p = canonicalize(np.asarray(getattr(point, "v", point), dtype=float))
        return float(math.asin(min(1.0, abs(float(p @ self.ell.array)))))

    def point_at_distance(self, participant: int, d: float) -> ProjPoint:
        """A point of the participant's line at distance ``d`` from ell."""
        n_p = self.participant_lines[participant].array
        q = self.Q.array
        other = np.cross(n_p, q)
        other /= np.linalg.norm(other)
        # points of line p: cos(a) q + sin(a) other; distance from ell is asin(|sin(a) <other, n_ell>|)
        reach = abs(float(other @ self.ell.array))
        target = math.sin(d)
        if target > reach + 1e-12:
            raise ValueError(
                f"points of participant line {participant} lie within distance "
                f"{math.asin(min(1.0, reach)):.6f} of ell; d={d} is out of reach"
            )
        a = math.asin(min(1.0, target / reach))
        return ProjPoint(math.cos(a) * q + math.sin(a) * other)

    def foot_frame(self, point) -> tuple[np.ndarray, np.ndarray]:
        """Closest point of ell to ``point`` and the tangent direction along ell."""
        p = canonicalize(np.asarray(getattr(point, "v", point), dtype=float))
        n = self.ell.array
        f = p - (p @ n) * n
        norm = np.linalg.norm(f)
        f = self.Q.array if norm < 1e-12 else f / norm
        return f, np.cross(n, f)

    def offset_from_foot(self, points: np.ndarray, point) -> np.ndarray:
        """Signed arc offset in [-pi/2, pi/2) of points on ell from the foot of ``point``."""
        f, e2 = self.foot_frame(point)
        pts = np.asarray(points, dtype=float)
        ang = np.arctan2(pts @ e2, pts @ f)
        return np.mod(ang + math.pi / 2, math.pi) - math.pi / 2

    def conditional_density(
        self,
        participant: int,
        share_point,
        rng: np.random.Generator,
        *,
        bins: int = 36,
        trials: int = 10**6,
        tol: float = 1e-2,
        method: str = "binning",
        chunk: int = 1 << 18,
    ) -> tuple[np.ndarray, np.ndarray, int]:
        """Histogram estimate of the secret's density given one share.

        The secret is measured as its offset in [-pi/2, pi/2) from the point
        of ell nearest the share. Returns (bin centres, density, samples used);
        the density integrates to 1.

        ``method="binning"`` keeps uniform deals whose share for this
        participant falls within angular distance ``tol`` of ``share_point``
        (bias O(tol)). This is the conditional law given the share's position
        on the participant's line: lines through the share are weighted by the
        sine of their angle with that line, so the density vanishes where the
        secret would be Q.

        ``method="rotational"`` instead draws t uniformly from the pencil of
        lines through the share point (every direction equally likely), which
        has the closed form :func:`rotational_density`.
        """
        if bins < 18:
            raise ValueError("need at least 18 bins")
        if trials < 10**6:
            raise ValueError("need at least 10**6 Monte Carlo trials")
        if method not in ("binning", "rotational"):
            raise ValueError(f"unknown method {method!r}")
        target = canonicalize(np.asarray(getattr(share_point, "v", share_point), dtype=float))
        n_p = self.participant_lines[participant].array
        if abs(float(target @ n_p)) > 1e-9:
            raise ValueError("share point does not lie on the participant's line")
        edges = np.linspace(-math.pi / 2, math.pi / 2, bins + 1)
        counts = np.zeros(bins)
        # orthonormal frame of the pencil through the target
        u1 = np.cross(target, n_p)
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(target, u1)
        done = 0
        while done < trials:
            size = min(chunk, trials - done)
            if method == "binning":
                t = self.random_lines(rng, size)
                shares = meet(t, n_p[None, :])
                t = t[projective_distance(shares, target[None, :]) <= tol]
            else:
                psi = rng.random(size) * math.pi
                t = np.cos(psi)[:, None] * u1 + np.sin(psi)[:, None] * u2
            if len(t):
                secrets = meet(t, self.ell.array[None, :])
                counts += np.histogram(self.offset_from_foot(secrets, target), bins=edges)[0]
            done += size
        used = int(counts.sum())
        width = edges[1] - edges[0]
        density = counts / (used * width) if used else counts
        return 0.5 * (edges[1:] + edges[:-1]), density, used


def rotational_density(offset, d: float):
    """Density of the secret's offset from the foot point when t is uniform
    over the pencil through a point at distance ``d`` from ell."""
    x = np.asarray(offset, dtype=float)
    sd = math.sin(d)
    return sd / (math.pi * (sd * sd * np.cos(x) ** 2 + np.sin(x) ** 2))

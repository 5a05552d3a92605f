"""Finite-dimensional Hilbert-space programs.

A program is a goal vector u in R^m and, per participant, a list of
spanning vectors. Compiling it with m iid standard normals xi gives the
secret <u, xi> and shares <b, xi>. A subset is qualified when u lies in the
span of its vectors; otherwise the secret keeps a normal residual with
variance equal to the squared distance of u from that span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .dealing import Dealing
from .errors import EmptySubset, IllConditioned, NotQualified

DEFAULT_TOL = 1e-8
MAX_CONDITION = 1e12
_RANK_EPS = 1e-12


@dataclass(frozen=True)
class ProjectionSplit:
    v: np.ndarray  # component of u inside the span
    w: np.ndarray  # u - v, orthogonal to the span

    @property
    def residual_variance(self) -> float:
        return float(self.w @ self.w)


@dataclass(frozen=True)
class HilbertProgram:
    goal: np.ndarray
    subspaces: Mapping[int, np.ndarray]  # participant -> (k_p, m) spanning vectors
    participants: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        u = np.asarray(self.goal, dtype=float).copy()
        if u.ndim != 1 or u.size == 0:
            raise ValueError("goal must be a nonempty vector")
        if not np.linalg.norm(u) > 0:
            raise ValueError("goal vector must be nonzero")
        u.setflags(write=False)
        subs = {}
        for p, vecs in self.subspaces.items():
            b = np.atleast_2d(np.asarray(vecs, dtype=float)).copy()
            if b.shape[1] != u.size:
                raise ValueError(f"participant {p}: vectors have length {b.shape[1]}, expected {u.size}")
            if not np.any(np.linalg.norm(b, axis=1) > 0):
                raise ValueError(f"participant {p} needs a nonzero spanning vector")
            b.setflags(write=False)
            subs[int(p)] = b
        object.__setattr__(self, "goal", u)
        object.__setattr__(self, "subspaces", subs)
        object.__setattr__(self, "participants", tuple(sorted(subs)))

    @property
    def dim(self) -> int:
        return self.goal.size

    def stacked(self, subset: Iterable[int]) -> np.ndarray:
        """Spanning vectors of ``subset`` as rows, participants in sorted order."""
        subset = sorted(set(subset))
        if not subset:
            raise EmptySubset("need a nonempty subset")
        unknown = [p for p in subset if p not in self.subspaces]
        if unknown:
            raise ValueError(f"unknown participants {unknown}")
        return np.vstack([self.subspaces[p] for p in subset])

    # -- qualification -----------------------------------------------------

    def qualify(self, subset: Iterable[int], tol: float = DEFAULT_TOL) -> tuple[bool, ProjectionSplit]:
        if tol <= 0:
            raise ValueError("tol must be positive")
        basis = orthonormal_basis(self.stacked(subset))
        v = basis.T @ (basis @ self.goal) if basis.size else np.zeros_like(self.goal)
        w = self.goal - v
        split = ProjectionSplit(v, w)
        return bool(np.linalg.norm(w) <= tol * np.linalg.norm(self.goal)), split

    def residual_variance(self, subset: Iterable[int]) -> float:
        return self.qualify(subset)[1].residual_variance

    # -- dealing -----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int):
        """Secrets (size,) and shares {participant: (size, k_p)}."""
        xi = rng.standard_normal((size, self.dim))
        return xi @ self.goal, {p: xi @ b.T for p, b in self.subspaces.items()}

    def deal(self, rng: np.random.Generator) -> Dealing:
        secret, shares = self.sample(rng, 1)
        return Dealing(float(secret[0]), {p: tuple(float(x) for x in h[0]) for p, h in shares.items()})

    # -- recovery ----------------------------------------------------------

    def coefficients(self, subset: Iterable[int]) -> tuple[np.ndarray, float]:
        """Least-squares weights on the subset's spanning vectors and the
        condition number of the (rank-revealing) system."""
        b = self.stacked(subset)
        lam, _, _, sv = np.linalg.lstsq(b.T, self.goal, rcond=None)
        kept = sv[sv > sv[0] * max(b.shape) * np.finfo(float).eps] if sv.size else sv
        cond = float(kept[0] / kept[-1]) if kept.size else math.inf
        return lam, cond

    def best_linear_estimate(self, subset: Iterable[int], shares: Mapping[int, Sequence[float]]) -> float:
        """E[secret | shares]: the projection coefficients applied to the shares."""
        subset = sorted(set(subset))
        lam, _ = self.coefficients(subset)
        h = np.concatenate([np.atleast_1d(np.asarray(shares[p], dtype=float)) for p in subset])
        return float(lam @ h)

    def recover(self, subset: Iterable[int], shares: Mapping[int, Sequence[float]], tol: float = DEFAULT_TOL) -> float:
        subset = sorted(set(subset))
        ok, split = self.qualify(subset, tol)
        if not ok:
            raise NotQualified(
                f"goal is not in the span of subset {subset}: residual norm "
                f"{math.sqrt(split.residual_variance):.3g} > {tol:g} * |u|"
            )
        _, cond = self.coefficients(subset)
        if cond > MAX_CONDITION:
            raise IllConditioned(f"condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        return self.best_linear_estimate(subset, shares)


def orthonormal_basis(vectors: np.ndarray) -> np.ndarray:
    """Rows spanning the same space, orthonormal, by modified Gram-Schmidt
    with one reorthogonalization pass. Dependent rows are dropped."""
    out: list[np.ndarray] = []
    for vec in np.atleast_2d(vectors):
        norm0 = np.linalg.norm(vec)
        if norm0 == 0:
            continue
        x = vec.astype(float).copy()
        for _ in range(2):
            for q in out:
                x -= (q @ x) * q
        norm = np.linalg.norm(x)
        if norm > _RANK_EPS * norm0:
            out.append(x / norm)
    return np.asarray(out).reshape(len(out), np.atleast_2d(vectors).shape[1])


# -- text format ---------------------------------------------------------------


def dumps(program: HilbertProgram) -> str:
    lines = [f"dim {program.dim}", "goal " + " ".join(format(x, ".17g") for x in program.goal)]
    for p in program.participants:
        for row in program.subspaces[p]:
            lines.append(f"{p} " + " ".join(format(x, ".17g") for x in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> HilbertProgram:
    """Parse ``dim m`` / ``goal ...`` / ``participant v1 ... vm`` lines.

    Blank lines and ``#`` comments are ignored.
    """
    dim = goal = None
    subs: dict[int, list[list[float]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if dim is None:
                if head != "dim" or len(rest) != 1:
                    raise ValueError("first line must be 'dim m'")
                dim = int(rest[0])
                if dim < 1:
                    raise ValueError("dim must be positive")
            elif goal is None:
                if head != "goal":
                    raise ValueError("second line must start with 'goal'")
                goal = [float(x) for x in rest]
                if len(goal) != dim:
                    raise ValueError(f"goal has {len(goal)} entries, expected {dim}")
            else:
                vec = [float(x) for x in rest]
                if len(vec) != dim:
                    raise ValueError(f"vector has {len(vec)} entries, expected {dim}")
                subs.setdefault(int(head), []).append(vec)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if goal is None:
        raise ValueError("missing 'dim' or 'goal' line")
    return HilbertProgram(np.asarray(goal), subs)


def read_program(src: TextIO) -> HilbertProgram:
    return loads(src.read())


# -- other schemes as programs -------------------------------------------------


def from_gauss_threshold(scheme) -> HilbertProgram:
    """xi = anchor values / sigma; participants keyed by label position."""
    u = scheme.sigma * scheme.weights(0.0)
    rows = scheme.sigma * scheme.weights(np.asarray(scheme.labels))
    return HilbertProgram(u, {i: rows[i] for i in range(len(scheme.labels))})


def from_l2(scheme) -> HilbertProgram:
    """Participant i (1-based) owns coordinate i - 1 scaled by sigma_i."""
    sig = np.asarray(scheme.sigmas)
    eye = np.eye(sig.size)
    return HilbertProgram(sig, {i + 1: sig[i] * eye[i] for i in range(sig.size)})


def from_noisy(n: int) -> HilbertProgram:
    """Coordinate 0 is the secret, coordinate i the noise of participant i - 1."""
    eye = np.eye(n + 1)
    return HilbertProgram(eye[0], {i: eye[0] + eye[i + 1] for i in range(n)})


def table_program(r_values: Sequence[float]) -> HilbertProgram:
    """Coordinates (s, eta, xi_1, xi_2, ...); participant i spans (1, r_i, e_{i+2})."""
    r = np.asarray(r_values, dtype=float)
    m = r.size + 2
    eye = np.eye(m)
    return HilbertProgram(eye[0], {i: eye[0] + r[i] * eye[1] + eye[i + 2] for i in range(r.size)})


def from_wiener_limit(times: Sequence[float]) -> HilbertProgram:
    """Coordinates are normalized increments over [0, t_1], ..., [t_n, 1]; goal is W(1).

    A participant at time 0 holds W(0) = 0 and is left out.
    """
    t = np.asarray(sorted(times), dtype=float)
    dt = np.diff(np.concatenate([[0.0], t, [1.0]]))
    root = np.sqrt(dt)
    subs = {}
    for i in range(t.size):
        if t[i] == 0.0:
            continue
        row = root.copy()
        row[i + 1:] = 0.0
        subs[i] = row
    return HilbertProgram(root, subs)

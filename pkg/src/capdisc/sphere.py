"""Points, caps and rotations on the unit sphere, uniform cap measure,
and deterministic uniform point generators."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc, ndtri

from .cap_transform import weight_mass

# Inputs with norm below this are degenerate and rejected outright.
_DEGENERATE_NORM = 1e-9

# Rows already unit to this accuracy are kept bit-for-bit (CSV round-trips).
_UNIT_TOL = 1e-12

GOLDEN_RATIO_CONJUGATE = (np.sqrt(5.0) - 1.0) / 2.0

UNIFORM_METHODS = ("random", "fibonacci_s2", "kronecker_s1", "halton_inverse")


def unit_vector(coords) -> np.ndarray:
    """Normalize coords to a unit vector; rejects near-zero input."""
    v = np.asarray(coords, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("a unit vector needs at least 2 coordinates")
    norm = float(np.linalg.norm(v))
    if norm < _DEGENERATE_NORM:
        raise ValueError(f"degenerate vector with norm {norm:.3e}")
    if abs(norm - 1.0) > _UNIT_TOL:
        v = v / norm
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class Cap:
    """Closed spherical cap {v : center . v >= height}."""

    center: np.ndarray
    height: float

    def __post_init__(self):
        object.__setattr__(self, "center", unit_vector(self.center))
        if not -1.0 < self.height < 1.0:
            raise ValueError(f"cap height must lie in (-1, 1), got {self.height}")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, v) -> bool:
        return cap_contains(self, v)


def cap_contains(cap: Cap, v) -> bool:
    """Closed membership test: v . center >= height."""
    v = np.asarray(v, dtype=float)
    if v.shape != cap.center.shape:
        raise ValueError("dimension mismatch between cap and point")
    return bool(np.dot(v, cap.center) >= cap.height)


def cap_measure(n: int, s: float) -> float:
    """Normalized uniform measure of a height-s cap on the (n-1)-sphere.

    Equals the weighted integral of (1-t^2)^((n-3)/2) over [s, 1] divided by
    its full mass; evaluated through the regularized incomplete beta
    function, giving 1/2 at s=0 and strict decrease in s.
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if not -1.0 < s < 1.0:
        raise ValueError(f"cap height must lie in (-1, 1), got {s}")
    if s >= 0.0:
        return float(0.5 * betainc((n - 1) / 2, 0.5, 1.0 - s * s))
    return 1.0 - float(0.5 * betainc((n - 1) / 2, 0.5, 1.0 - s * s))


def cap_height_for_measure(n: int, a: float) -> float:
    """Height s with cap_measure(n, s) = a, by bisection plus Newton polish."""
    if not 0.0 < a < 1.0:
        raise ValueError(f"cap measure must lie in (0, 1), got {a}")
    if a == 0.5:
        return 0.0
    lo, hi = -1.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if cap_measure(n, mid) > a:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    # cap_measure'(s) = -(1-s^2)^((n-3)/2) / weight_mass(n)
    mass = weight_mass(n)
    for _ in range(3):
        density = (1.0 - s * s) ** ((n - 3) / 2) / mass
        if density == 0.0 or not np.isfinite(density):
            break
        step = (cap_measure(n, s) - a) / density
        candidate = s + step
        if not lo <= candidate <= hi:
            break
        s = candidate
    return s


@dataclass(frozen=True)
class Provenance:
    """How a point set was produced: generator descriptor plus seed."""

    generator: str
    seed: int = 0


class PointSet:
    """An ordered finite prefix of a sequence of unit vectors.

    Stores coordinates as an (N, n) read-only array; order is significant.
    """

    def __init__(self, coords, provenance: Provenance):
        arr = np.array(coords, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError("coords must be an (N, n) array with n >= 2")
        if arr.shape[0] < 1:
            raise ValueError("a point set needs at least one point")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms < _DEGENERATE_NORM):
            raise ValueError("degenerate (near-zero) point in coords")
        fix = np.abs(norms - 1.0) > _UNIT_TOL
        if np.any(fix):
            arr[fix] /= norms[fix, None]
        arr.setflags(write=False)
        self.coords = arr
        self.provenance = provenance

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def points(self) -> list[np.ndarray]:
        return [self.coords[i] for i in range(self.size)]

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self.coords)

    def angles(self) -> np.ndarray:
        """Canonical angles in [0, 2*pi) for a planar point set."""
        if self.dim != 2:
            raise ValueError("angles are defined for dim 2 only")
        theta = np.arctan2(self.coords[:, 1], self.coords[:, 0])
        theta = np.where(theta < 0.0, theta + 2.0 * np.pi, theta)
        return np.where(theta >= 2.0 * np.pi, 0.0, theta)

    def turns(self) -> np.ndarray:
        """Angles rescaled to [0, 1)."""
        psi = self.angles() / (2.0 * np.pi)
        return np.where(psi >= 1.0, 0.0, psi)


@dataclass(frozen=True)
class Rotation:
    """A proper rotation of R^n, validated to be orthogonal with det +1."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("rotation matrix must be square")
        if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=1e-10):
            raise ValueError("matrix is not orthogonal within 1e-10")
        if abs(np.linalg.det(m) - 1.0) > 1e-10:
            raise ValueError("matrix determinant is not +1 within 1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Rotation":
        return cls(np.eye(n))

    @classmethod
    def planar(cls, angle: float) -> "Rotation":
        c, s = np.cos(angle), np.sin(angle)
        return cls(np.array([[c, -s], [s, c]]))

    @classmethod
    def random(cls, n: int, seed: int = 0) -> "Rotation":
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return cls(q)

    def apply(self, v) -> np.ndarray:
        return unit_vector(self.matrix @ np.asarray(v, dtype=float))


def rotate(ps: PointSet, rho: Rotation) -> PointSet:
    """Apply a rotation to every point (renormalizing) preserving order."""
    if rho.dim != ps.dim:
        raise ValueError("dimension mismatch between rotation and point set")
    rotated = ps.coords @ rho.matrix.T
    prov = replace(ps.provenance, generator=f"rotated({ps.provenance.generator})")
    return PointSet(rotated, prov)


def radical_inverse(base: int, indices) -> np.ndarray:
    """Van der Corput radical inverse of integer indices in the given base."""
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64)).copy()
    if np.any(idx < 0):
        raise ValueError("indices must be nonnegative")
    out = np.zeros(idx.shape, dtype=float)
    scale = 1.0 / base
    while np.any(idx > 0):
        out += (idx % base) * scale
        idx //= base
        scale /= base
    return out


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def generate_uniform(n: int, N: int, method: str, seed: int = 0) -> PointSet:
    """Reference point sets distributed uniformly on the (n-1)-sphere.

    Methods: "random" (normalized Gaussian, seeded), "fibonacci_s2" (n=3
    spiral lattice), "kronecker_s1" (n=2 golden-ratio rotation), and
    "halton_inverse" (any n: coordinate-wise normal inverse-CDF of a
    Halton point, normalized).  Deterministic given (method, seed, N).
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if N < 1:
        raise ValueError(f"need N >= 1 points, got {N}")

    if method == "random":
        rng = np.random.default_rng(seed)
        coords = rng.standard_normal((N, n))
        norms = np.linalg.norm(coords, axis=1)
        while np.any(norms < _DEGENERATE_NORM):  # pragma: no cover
            bad = norms < _DEGENERATE_NORM
            coords[bad] = rng.standard_normal((int(bad.sum()), n))
            norms = np.linalg.norm(coords, axis=1)
        coords /= norms[:, None]
    elif method == "fibonacci_s2":
        if n != 3:
            raise ValueError("fibonacci_s2 requires n = 3")
        coords = fibonacci_sphere(N)
    elif method == "kronecker_s1":
        if n != 2:
            raise ValueError("kronecker_s1 requires n = 2")
        j = np.arange(seed, seed + N, dtype=float)
        frac = j * GOLDEN_RATIO_CONJUGATE
        frac -= np.floor(frac)
        theta = 2.0 * np.pi * frac
        coords = np.column_stack([np.cos(theta), np.sin(theta)])
    elif method == "halton_inverse":
        if n > len(_PRIMES):
            raise ValueError(f"halton_inverse supports n <= {len(_PRIMES)}")
        # Index 0 maps to the excluded quantile 0; start at 1 + seed.
        idx = np.arange(1 + seed, 1 + seed + N)
        gauss = np.column_stack([ndtri(radical_inverse(p, idx)) for p in _PRIMES[:n]])
        coords = gauss / np.linalg.norm(gauss, axis=1)[:, None]
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {UNIFORM_METHODS}")

    return PointSet(coords, Provenance(generator=f"uniform-{method}(n={n},N={N})", seed=seed))


def fibonacci_sphere(N: int) -> np.ndarray:
    """Fibonacci spiral lattice on S^2: midpoint heights, golden-angle azimuths."""
    i = np.arange(N, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / N
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * (np.pi * (3.0 - np.sqrt(5.0)))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


_HEADER_RE = re.compile(r"^# dim=(\d+) generator=(.+) seed=(-?\d+)$")


def save_points(ps: PointSet, path) -> None:
    """Write a point set as CSV with a provenance header, 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim={ps.dim} generator={ps.provenance.generator} seed={ps.provenance.seed}\n")
        for row in ps.coords:
            fh.write(",".join(format(x, ".17g") for x in row) + "\n")


def load_points(path) -> PointSet:
    """Read a point set written by save_points."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        m = _HEADER_RE.match(header)
        if not m:
            raise ValueError(f"malformed point-set header: {header!r}")
        dim, generator, seed = int(m.group(1)), m.group(2), int(m.group(3))
        rows = [[float(tok) for tok in line.strip().split(",")] for line in fh if line.strip()]
    coords = np.array(rows, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != dim:
        raise ValueError(f"point rows do not match declared dim={dim}")
    return PointSet(coords, Provenance(generator=generator, seed=seed))

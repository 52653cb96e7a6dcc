"""Real-coefficient polynomials and their complex roots.

Coefficients are stored in ascending order, ``coeffs[k]`` multiplies
``x**k``. Exact trailing zeros are always dropped. Addition also drops a
trailing coefficient whose value is cancellation noise, i.e. at most
``1e-12`` times the larger of the two contributing terms; the test is per
index, so a genuine small leading coefficient next to huge lower-order ones
(large roots) is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConjugationViolation, NonConvergence

TRUNCATION_RTOL = 1e-12
CONJUGATE_RTOL = 1e-9
MULTIPLE_ROOT_TOL = 1e-7
RESIDUAL_LIMIT = 1e-6

_EPS = np.finfo(float).eps


def _normalize(coeffs: Iterable[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    if not c:
        return (0.0,)
    for x in c:
        if not math.isfinite(x):
            raise ValueError(f"non-finite polynomial coefficient {x!r}")
    n = len(c)
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    if n == 1 and c[0] == 0.0:
        return (0.0,)
    return tuple(c[:n])


@dataclass(frozen=True)
class Poly:
    """Immutable real polynomial, ascending coefficient order."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        object.__setattr__(self, "coeffs", _normalize(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def monic(self) -> Poly:
        if self.is_zero():
            raise ZeroDivisionError("the zero polynomial has no monic form")
        lead = self.leading
        return Poly(c / lead for c in self.coeffs)

    def scale(self, factor: float) -> Poly:
        return Poly(factor * c for c in self.coeffs)

    def __call__(self, x):
        return poly_eval(self, x)

    def __add__(self, other: Poly) -> Poly:
        return poly_add(self, other)

    def __sub__(self, other: Poly) -> Poly:
        return poly_add(self, other.scale(-1.0))

    def __mul__(self, other: Poly) -> Poly:
        return poly_mul(self, other)

    def __neg__(self) -> Poly:
        return self.scale(-1.0)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial, with multiplicity.

    ``residual_bound`` is ``max |p(r)|`` over the monic-scaled polynomial.
    ``multiple`` is set when two roots fall within ``1e-7`` of each other.
    """

    roots: tuple[complex, ...]
    residual_bound: float
    multiple: bool = False
    warnings: tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


def pair_conjugates(roots: Sequence[complex], rtol: float = CONJUGATE_RTOL):
    """Split ``roots`` into exact real roots and conjugate pairs.

    Returns ``(reals, uppers)`` where every element of ``uppers`` has a
    strictly positive imaginary part and stands for the pair ``r, conj(r)``.
    Partners are averaged so the pairing is exact. Raises
    ConjugationViolation if some complex root has no partner.
    """
    reals: list[float] = []
    upper: list[complex] = []
    lower: list[complex] = []
    for r in roots:
        r = complex(r)
        if abs(r.imag) <= rtol * (abs(r) + 1.0):
            reals.append(r.real)
        elif r.imag > 0:
            upper.append(r)
        else:
            lower.append(r)
    if len(upper) != len(lower):
        raise ConjugationViolation(
            f"{len(upper)} roots above the real axis but {len(lower)} below")
    pairs: list[complex] = []
    remaining = list(lower)
    # largest first so the greedy match is order independent for clusters
    for u in sorted(upper, key=lambda r: (-abs(r), r.real, r.imag)):
        j = min(range(len(remaining)),
                key=lambda k: abs(remaining[k].conjugate() - u))
        partner = remaining.pop(j)
        if abs(partner.conjugate() - u) > rtol * (abs(u) + 1.0):
            raise ConjugationViolation(
                f"root {u!r} has no conjugate partner (closest {partner!r})")
        mid = 0.5 * (u + partner.conjugate())
        pairs.append(complex(mid.real, abs(mid.imag)))
    return reals, pairs


def poly_from_roots(roots: Sequence[complex], leading: float = 1.0) -> Poly:
    """Expand ``leading * prod(x - r)``.

    Conjugate pairs are multiplied out as real quadratics, so the result has
    no imaginary residue at all.

    >>> poly_from_roots([10, -0.0625]).coeffs
    (-0.625, -9.9375, 1.0)
    """
    if leading == 0:
        raise ValueError("leading coefficient must be nonzero")
    reals, pairs = pair_conjugates(roots)
    c = np.array([float(leading)])
    for r in reals:
        c = np.convolve(c, [-r, 1.0])
    for r in pairs:
        c = np.convolve(c, [r.real * r.real + r.imag * r.imag, -2.0 * r.real, 1.0])
    return Poly(c)


def poly_mul(a: Poly, b: Poly) -> Poly:
    return Poly(np.convolve(a.coeffs, b.coeffs))


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a.coeffs), len(b.coeffs))
    ca = list(a.coeffs) + [0.0] * (n - len(a.coeffs))
    cb = list(b.coeffs) + [0.0] * (n - len(b.coeffs))
    out = [x + y for x, y in zip(ca, cb)]
    while n > 1 and abs(out[n - 1]) <= TRUNCATION_RTOL * max(abs(ca[n - 1]), abs(cb[n - 1])):
        n -= 1
    return Poly(out[:n])


def poly_eval(p: Poly, x):
    """Horner evaluation; ``x`` may be a scalar or a numpy array."""
    c = p.coeffs
    if np.isscalar(x):
        acc = c[-1]
        for k in range(len(c) - 2, -1, -1):
            acc = acc * x + c[k]
        return acc
    x = np.asarray(x)
    acc = np.full(x.shape, c[-1], dtype=np.result_type(x, float))
    for k in range(len(c) - 2, -1, -1):
        acc = acc * x + c[k]
    return acc


def poly_derivative(p: Poly) -> Poly:
    if p.degree == 0:
        return Poly([0.0])
    return Poly(k * c for k, c in enumerate(p.coeffs) if k > 0)


def _newton_polygon_start(c: np.ndarray) -> np.ndarray:
    """Initial guesses spread over circles given by the Newton polygon of
    ``log|c_k|`` (upper convex hull)."""
    n = len(c) - 1
    logc = np.full(n + 1, -np.inf)
    nz = c != 0
    logc[nz] = np.log(np.abs(c[nz]))
    pts = [k for k in range(n + 1) if nz[k]]
    hull: list[int] = []
    for k in pts:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the chord i -> k
            if (logc[j] - logc[i]) * (k - i) <= (logc[k] - logc[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    guesses = []
    sigma = 0.7
    for i, j in zip(hull[:-1], hull[1:]):
        cnt = j - i
        radius = math.exp((logc[i] - logc[j]) / cnt)
        for t in range(cnt):
            angle = 2 * math.pi * t / cnt + 2 * math.pi * i / n + sigma
            guesses.append(radius * complex(math.cos(angle), math.sin(angle)))
    return np.array(guesses, dtype=complex)


def _horner_with_derivative(c: np.ndarray, z: np.ndarray):
    p = np.full(z.shape, c[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for k in range(len(c) - 2, -1, -1):
        dp = dp * z + p
        p = p * z + c[k]
    return p, dp


def _aberth(c: np.ndarray, max_iter: int) -> np.ndarray:
    n = len(c) - 1
    z = _newton_polygon_start(c)
    absc = np.abs(c)
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        p, dp = _horner_with_derivative(c, z)
        # roundoff floor of Horner's scheme at each iterate
        floor = 4 * n * _EPS * np.polyval(absc[::-1], np.abs(z))
        active &= np.abs(p) > floor
        if not active.any():
            break
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        w[~active] = 0.0
        z = z - w
        small = np.abs(w) <= 2 * _EPS * np.abs(z)
        active &= ~small
        if not active.any():
            break
    return z


def _newton_polish(c: np.ndarray, z: np.ndarray, steps: int = 2) -> np.ndarray:
    for _ in range(steps):
        p, dp = _horner_with_derivative(c, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = z - p / dp
        pc, _ = _horner_with_derivative(c, np.where(np.isfinite(cand), cand, z))
        better = np.isfinite(cand) & (np.abs(pc) < np.abs(p))
        z = np.where(better, cand, z)
    return z


def _polish_real(c: np.ndarray, x: float) -> float:
    """Newton steps restricted to the real line."""
    for _ in range(3):
        p, dp = _horner_with_derivative(c, np.array([complex(x)]))
        p, dp = p[0].real, dp[0].real
        if dp == 0 or p == 0:
            break
        cand = x - p / dp
        pc, _ = _horner_with_derivative(c, np.array([complex(cand)]))
        if abs(pc[0].real) < abs(p):
            x = cand
        else:
            break
    return x


def _enforce_conjugates(c: np.ndarray, z: np.ndarray) -> list[complex]:
    """Pair roots of a real polynomial and make the pairing exact."""
    n = len(z)
    # candidate real roots: tiny imaginary part relative to the magnitude
    is_real = np.abs(z.imag) <= 1e-9 * np.abs(z)
    order = sorted(range(n), key=lambda k: abs(z[k].imag))
    uppers = [k for k in range(n) if not is_real[k] and z[k].imag > 0]
    lowers = [k for k in range(n) if not is_real[k] and z[k].imag < 0]
    # an unbalanced split means a near-real root was misassigned
    while len(uppers) != len(lowers):
        pool = uppers if len(uppers) > len(lowers) else lowers
        k = min(pool, key=lambda k: abs(z[k].imag))
        pool.remove(k)
        is_real[k] = True
    out: list[complex] = []
    for k in order:
        if is_real[k]:
            out.append(complex(_polish_real(c, z[k].real), 0.0))
    remaining = list(lowers)
    for k in sorted(uppers, key=lambda k: (-abs(z[k]), z[k].real)):
        j = min(remaining, key=lambda j: abs(z[j].conjugate() - z[k]))
        remaining.remove(j)
        mid = 0.5 * (z[k] + z[j].conjugate())
        mid = complex(mid.real, abs(mid.imag))
        out.append(mid)
        out.append(mid.conjugate())
    return out


def _quadratic_roots(b: float, c: float) -> list[complex]:
    """Roots of ``x^2 + b x + c`` without cancellation (``c != 0``)."""
    disc = b * b - 4.0 * c
    if disc >= 0:
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        return [complex(q, 0.0), complex(c / q, 0.0)]
    re = -0.5 * b
    im = 0.5 * math.sqrt(-disc)
    return [complex(re, im), complex(re, -im)]


def poly_roots(p: Poly, max_iter: int | None = None) -> RootSet:
    """All complex roots of ``p`` (Aberth-Ehrlich iteration plus Newton
    polish, conjugate symmetry enforced).

    Roots are returned sorted by real part, then imaginary part.

    Raises
    ------
    ValueError
        if ``p`` has degree 0.
    NonConvergence
        if some root has relative backward error above ``1e-6``.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs a polynomial of degree >= 1")
    c = np.array(p.monic().coeffs, dtype=float)
    # exact roots at the origin
    k0 = 0
    while c[k0] == 0.0:
        k0 += 1
    core = c[k0:]
    roots: list[complex] = [0j] * k0
    deg = len(core) - 1
    if deg == 1:
        roots.append(complex(-core[0] / core[1], 0.0))
    elif deg == 2:
        roots.extend(_quadratic_roots(core[1], core[0]))
    elif deg > 2:
        if max_iter is None:
            max_iter = 100 + 20 * deg
        z = _aberth(core, max_iter)
        z = _newton_polish(core, z)
        roots.extend(_enforce_conjugates(core, z))
    roots.sort(key=lambda r: (r.real, r.imag))

    arr = np.array(roots, dtype=complex)
    monic = Poly(c)
    resid = np.array([abs(poly_eval(monic, r)) for r in roots])
    residual_bound = float(resid.max()) if len(resid) else 0.0
    backward = resid / np.maximum(np.polyval(np.abs(c)[::-1], np.abs(arr)), 1e-300)
    if backward.max() > RESIDUAL_LIMIT:
        raise NonConvergence(
            f"root finder residual {backward.max():.3g} (relative) exceeds "
            f"{RESIDUAL_LIMIT:g} for degree {p.degree}")

    multiple = False
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= MULTIPLE_ROOT_TOL:
                multiple = True
    warnings = ("MultipleRoot: roots closer than 1e-7 detected",) if multiple else ()
    return RootSet(tuple(roots), residual_bound, multiple, warnings)

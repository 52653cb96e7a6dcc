"""Open-loop transfer functions in factored form and their closed loops.

A loop is stored as ``K * prod(x - z_i) / (x**k * prod(x - p_i))``. Both
factored polynomials are monic, so ``K`` is the leading coefficient. For
continuous loops ``k`` counts pure integrators and no finite pole sits at the
origin; discrete loops keep ``k = 0`` and may have poles at ``z = 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import ImproperTF, NonCausalClosedLoop, OriginZero
from .polynomial import (
    Poly, RootSet, pair_conjugates, poly_add, poly_eval, poly_from_roots,
    poly_roots)

ORIGIN_TOL = 1e-9


class Domain(str, enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"

    @property
    def variable(self) -> str:
        return "s" if self is Domain.CONTINUOUS else "z"


def _canonical_roots(roots: Sequence[complex]) -> tuple[complex, ...]:
    """Exact conjugate closure, sorted by (real, imag)."""
    reals, pairs = pair_conjugates(roots)
    out = [complex(r, 0.0) for r in reals]
    for r in pairs:
        out.append(r)
        out.append(r.conjugate())
    return tuple(sorted(out, key=lambda r: (r.real, r.imag)))


@dataclass(frozen=True)
class LoopTF:
    """Factored open-loop transfer function.

    Parameters
    ----------
    domain : Domain
    gain : float
        Leading coefficient K (both factored polynomials monic).
    zeros, poles : sequence of complex
        Finite zeros and finite poles. Must be closed under conjugation.
    integrators : int
        Number of poles at ``s = 0``; continuous only.
    """

    domain: Domain
    gain: float
    zeros: tuple[complex, ...] = ()
    poles: tuple[complex, ...] = ()
    integrators: int = 0

    def __post_init__(self):
        dom = Domain(self.domain)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "gain", float(self.gain))
        object.__setattr__(self, "zeros", _canonical_roots(self.zeros))
        object.__setattr__(self, "poles", _canonical_roots(self.poles))
        k = int(self.integrators)
        if k < 0:
            raise ValueError("integrator count must be non-negative")
        object.__setattr__(self, "integrators", k)
        if any(abs(z) < ORIGIN_TOL for z in self.zeros):
            raise OriginZero(f"{dom.value} loop has a zero at the origin")
        if dom is Domain.CONTINUOUS:
            if any(abs(p) < ORIGIN_TOL for p in self.poles):
                raise ValueError(
                    "continuous poles at the origin belong in `integrators`")
        elif k:
            raise ValueError("discrete loops carry origin poles in `poles`")
        if len(self.zeros) > self.n:
            raise ImproperTF(
                f"{len(self.zeros)} zeros but only {self.n} poles")

    @property
    def n(self) -> int:
        return self.integrators + len(self.poles)

    @property
    def m(self) -> int:
        return len(self.zeros)

    @property
    def variable(self) -> str:
        return self.domain.variable

    def num_poly(self) -> Poly:
        """``K * prod(x - z_i)``; the zero polynomial when ``K == 0``."""
        if self.gain == 0:
            return Poly([0.0])
        return poly_from_roots(self.zeros, self.gain)

    def den_poly(self) -> Poly:
        """``x**k * prod(x - p_i)``."""
        base = poly_from_roots(self.poles)
        return Poly((0.0,) * self.integrators + base.coeffs)

    def __str__(self):
        from .parser import format_tf
        return format_tf(self)


def relative_degree(L: LoopTF) -> int:
    return L.n - L.m


@dataclass(frozen=True)
class ClosedLoop:
    """Complementary sensitivity ``T = L / (1 + L)``.

    ``num_poly`` and ``den_poly`` are the unfactored numerator and
    characteristic polynomial; ``poles`` are the roots of ``den_poly`` and
    ``gain`` is the leading coefficient of T in zero-pole-gain form.
    ``open_loop`` is kept when T was built from a loop, which lets the
    numerical integrand use the exact open-loop factors.
    """

    domain: Domain
    gain: float
    zeros: tuple[complex, ...]
    poles: tuple[complex, ...]
    num_poly: Poly
    den_poly: Poly
    open_loop: LoopTF | None = None
    degenerate_leading: bool = False
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def from_polys(cls, num: Poly, den: Poly, domain: Domain) -> ClosedLoop:
        """Build T directly from numerator and denominator polynomials."""
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        zeros: tuple[complex, ...] = ()
        if num.degree >= 1:
            zeros = _canonical_roots(poly_roots(num).roots)
        poles: tuple[complex, ...] = ()
        warnings: tuple[str, ...] = ()
        if den.degree >= 1:
            rs = poly_roots(den)
            poles, warnings = rs.roots, rs.warnings
        return cls(Domain(domain), num.leading / den.leading, zeros, poles,
                   num, den, None, False, warnings)

    def value_at(self, x: complex) -> complex:
        return poly_eval(self.num_poly, x) / poly_eval(self.den_poly, x)

    def at_zero(self) -> float:
        """T(0) from the exact constant coefficients."""
        return self.num_poly.coeffs[0] / self.den_poly.coeffs[0]


def close_loop(L: LoopTF) -> ClosedLoop:
    """Form ``T = L / (1 + L)`` with characteristic polynomial
    ``den + K*num``.

    A continuous biproper loop with ``K = -1`` loses its leading term; the
    result is flagged ``degenerate_leading``. The discrete analogue raises
    NonCausalClosedLoop.
    """
    num = L.num_poly()
    open_den = L.den_poly()
    den = poly_add(open_den, num)
    degenerate = den.degree < L.n
    if degenerate and L.domain is Domain.DISCRETE:
        raise NonCausalClosedLoop(
            "K = -1 with relative degree 0 removes a closed-loop pole "
            "(non-causal closed loop)")
    warnings: list[str] = []
    if degenerate:
        warnings.append(
            f"DegenerateLeading: closed-loop degree dropped from {L.n} to "
            f"{den.degree}")
    if den.is_zero():
        raise ZeroDivisionError("1 + L vanishes identically")
    poles: tuple[complex, ...] = ()
    if den.degree >= 1:
        rs: RootSet = poly_roots(den)
        poles = rs.roots
        warnings.extend(rs.warnings)
    gain = L.gain / den.leading
    return ClosedLoop(L.domain, gain, L.zeros, poles, num, den, L,
                      degenerate, tuple(warnings))


@dataclass(frozen=True)
class ZeroClassification:
    nmp: tuple[complex, ...]
    mp: tuple[complex, ...]
    boundary: tuple[complex, ...]


def classify_zeros(L: LoopTF | ClosedLoop, tol: float = 1e-9) -> ZeroClassification:
    """Split zeros into non-minimum phase, minimum phase and boundary sets.

    Continuous: by sign of the real part. Discrete: by modulus against 1.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    nmp, mp, boundary = [], [], []
    for z in L.zeros:
        if L.domain is Domain.CONTINUOUS:
            key = z.real
        else:
            key = abs(z) - 1.0
        if key > tol:
            nmp.append(z)
        elif key < -tol:
            mp.append(z)
        else:
            boundary.append(z)
    return ZeroClassification(tuple(nmp), tuple(mp), tuple(boundary))


def detect_cancellations(L: LoopTF, tol: float = 1e-7):
    """Zero/pole pairs closer than ``tol``, greedily matched by distance."""
    cands = sorted(
        ((abs(z - p), i, j) for i, z in enumerate(L.zeros)
         for j, p in enumerate(L.poles) if abs(z - p) <= tol))
    used_z, used_p, pairs = set(), set(), []
    for _, i, j in cands:
        if i in used_z or j in used_p:
            continue
        used_z.add(i)
        used_p.add(j)
        pairs.append((L.zeros[i], L.poles[j]))
    return sorted(pairs, key=lambda zp: (zp[0].real, zp[0].imag))


def cancel_common_factors(L: LoopTF, tol: float = 1e-7) -> LoopTF:
    """Return ``L`` with every detected zero/pole pair removed."""
    pairs = detect_cancellations(L, tol)
    zeros, poles = list(L.zeros), list(L.poles)
    for z, p in pairs:
        zeros.remove(z)
        poles.remove(p)
    return replace(L, zeros=tuple(zeros), poles=tuple(poles))

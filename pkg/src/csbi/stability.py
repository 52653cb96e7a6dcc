"""Closed-loop stability verdicts.

Root locations decide; the Routh-Hurwitz and Jury tables are run alongside
as an independent check and only set ``method_agreement``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polynomial import Poly, poly_eval
from .transfer_function import ClosedLoop, Domain

ZERO_PIVOT_EPS = 1e-12


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of a region test on the closed-loop poles.

    ``margin`` is the distance of the worst pole from the boundary (negative
    when outside). Poles within ``tol`` of the boundary are offenders and
    flag the loop as ``marginal``; they make ``stable`` false.
    """

    stable: bool
    margin: float
    method_agreement: bool
    offenders: tuple[complex, ...] = ()
    marginal: bool = False
    notes: tuple[str, ...] = field(default=())


def _pole_margin(domain: Domain, r: complex) -> float:
    if domain is Domain.CONTINUOUS:
        return -r.real
    return 1.0 - abs(r)


def stability_by_roots(T: ClosedLoop, tol: float = 1e-9) -> StabilityVerdict:
    margins = [_pole_margin(T.domain, r) for r in T.poles]
    margin = min(margins) if margins else math.inf
    offenders = tuple(r for r, m in zip(T.poles, margins) if m <= tol)
    marginal = any(abs(m) <= tol for m in margins)
    stable = not offenders

    if T.den_poly.degree >= 1:
        if T.domain is Domain.CONTINUOUS:
            table = routh_hurwitz(T.den_poly)
        else:
            table = jury_test(T.den_poly)
    else:
        table = True
    notes = []
    if marginal:
        notes.append("marginal: closed-loop pole on the stability boundary")
    if table != stable:
        notes.append(
            "MethodDisagreement: coefficient table test says "
            f"{'stable' if table else 'unstable'}, root test says "
            f"{'stable' if stable else 'unstable'}")
    return StabilityVerdict(stable, margin, table == stable, offenders,
                            marginal, tuple(notes))


def _sign_normalized(p: Poly) -> np.ndarray:
    c = np.array(p.coeffs[::-1], dtype=float)  # descending
    if c[0] < 0:
        c = -c
    return c


def routh_table(p: Poly):
    """Routh array of ``p`` (descending rows).

    Returns ``(rows, degenerate)``. A zero first-column pivot is replaced by
    ``eps`` times the row scale; an all-zero row is replaced by the
    derivative of the auxiliary polynomial built from the row above. Either
    event sets ``degenerate``, which means some root is not strictly in the
    open left half plane.
    """
    c = _sign_normalized(p)
    n = len(c) - 1
    width = n // 2 + 1
    r0 = np.zeros(width)
    r1 = np.zeros(width)
    r0[: len(c[0::2])] = c[0::2]
    r1[: len(c[1::2])] = c[1::2]
    rows = [r0, r1]
    degenerate = False
    scale = np.abs(c).max()
    for k in range(2, n + 1):
        a, b = rows[-2], rows[-1]
        rowscale = max(np.abs(b).max(), np.abs(a).max(), scale * 1e-300)
        if np.abs(b).max() <= ZERO_PIVOT_EPS * max(np.abs(a).max(), 1e-300):
            # all-zero row: auxiliary polynomial of the row above
            order = n - (k - 2)
            powers = np.arange(order, -1, -2)
            deriv = a[: len(powers)] * powers
            b = np.zeros(width)
            b[: len(deriv)] = deriv
            rows[-1] = b
            degenerate = True
        if abs(b[0]) <= ZERO_PIVOT_EPS * rowscale:
            b = b.copy()
            b[0] = ZERO_PIVOT_EPS * rowscale
            rows[-1] = b
            degenerate = True
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (b[0] * a[j + 1] - a[0] * b[j + 1]) / b[0]
        rows.append(new)
    return rows[: n + 1], degenerate


def routh_hurwitz(p: Poly) -> bool:
    """True iff every root of ``p`` has a strictly negative real part.

    >>> routh_hurwitz(Poly([2, 3, 1]))
    True
    """
    if p.degree < 1:
        raise ValueError("routh_hurwitz needs degree >= 1")
    c = _sign_normalized(p)
    # necessary condition; also catches roots at the origin
    if np.any(c <= 0):
        return False
    rows, degenerate = routh_table(p)
    if degenerate:
        return False
    first = np.array([r[0] for r in rows])
    return bool(np.all(first > 0))


def jury_test(p: Poly) -> bool:
    """True iff every root of ``p`` lies strictly inside the unit circle.

    Jury table in reflection form: each row pair reduces the degree by one
    through ``(a_n p(z) - a_0 p_rev(z)) / z``; stability requires every
    reflection ratio ``|a_0 / a_n| < 1``.

    >>> jury_test(Poly([0.25, 0, 1]))
    True
    """
    if p.degree < 1:
        raise ValueError("jury_test needs degree >= 1")
    a = np.array(p.coeffs, dtype=float)  # ascending
    # cheap necessary conditions of the classical table
    n = len(a) - 1
    lead = a[-1]
    p1 = float(poly_eval(p, 1.0)) / lead
    pm1 = float(poly_eval(p, -1.0)) * (-1) ** n / lead
    if p1 <= 0 or pm1 <= 0:
        return False
    while len(a) > 1:
        a = a / np.abs(a).max()
        an, a0 = a[-1], a[0]
        if abs(a0) >= abs(an) * (1.0 - ZERO_PIVOT_EPS):
            return False
        rev = a[::-1]
        nxt = an * a - a0 * rev
        # constant term of nxt is zero by construction; divide by z
        a = nxt[1:]
    return True

"""Closed-form complementary sensitivity integrals.

Continuous loops are evaluated in natural log,
``(1/2pi) int ln|T(jw)| dw / w^2``; discrete loops in base 2,
``(1/2pi) int_{-pi}^{pi} log2|T(e^{jw})| dw``. The value depends only on the
open-loop structure: unstable zeros, the leading coefficient K, the number
of integrators and, for a single integrator, the finite poles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import NonCausalClosedLoop, RelativeDegreeZero, ZeroAtOrigin
from .polynomial import poly_derivative
from .stability import StabilityVerdict, stability_by_roots
from .transfer_function import (
    ClosedLoop, Domain, LoopTF, classify_zeros, close_loop, relative_degree)

RARE_RTOL = 1e-9
RARE_NEAR_MISS = 1e-4

SIGN_CONVENTION_WARNING = (
    "DivergenceSignConvention: the sign of the divergence is the sign of "
    "ln(|K prod(-z)| / |prod(-p) + K prod(-z)|) = ln|T(0)|; the inequality "
    "rule sometimes quoted for this case has the opposite direction")
UNSTABLE_HYPOTHESIS_WARNING = (
    "UnstableHypothesisViolated: the closed loop is not stable, so the "
    "closed-form value need not equal the integral")


class Status(str, enum.Enum):
    FINITE = "Finite"
    PLUS_INFINITY = "PlusInfinity"
    MINUS_INFINITY = "MinusInfinity"
    UNDEFINED = "Undefined"
    REFUSED = "Refused"


class Case(str, enum.Enum):
    CONT_MULTI_INTEGRATOR = "ContMultiIntegrator"
    CONT_SINGLE_INTEGRATOR = "ContSingleIntegrator"
    CONT_NO_INTEGRATOR_RARE = "ContNoIntegratorRare"
    CONT_NO_INTEGRATOR_UNBOUNDED = "ContNoIntegratorUnbounded"
    CONT_BIPROPER_K_NEG1 = "ContBiproperKNeg1"
    DISC_STRICTLY_PROPER = "DiscStrictlyProper"
    DISC_BIPROPER = "DiscBiproper"


class LogBase(str, enum.Enum):
    NATURAL = "natural"
    BASE2 = "2"


@dataclass(frozen=True)
class CsbiTerms:
    nmp_zero_sum: float = 0.0
    correction: float = 0.0


@dataclass(frozen=True)
class CsbiResult:
    """Outcome of a closed-form evaluation.

    ``value`` is set only for Finite results and equals
    ``terms.nmp_zero_sum + terms.correction``.
    """

    status: Status
    value: float | None = None
    case_tag: Case | None = None
    terms: CsbiTerms = CsbiTerms()
    warnings: tuple[str, ...] = field(default=())
    log_base: LogBase = LogBase.NATURAL
    reason: str | None = None
    stability: StabilityVerdict | None = None

    @property
    def is_finite(self) -> bool:
        return self.status is Status.FINITE


def convert_log_base(value: float, source: LogBase, target: LogBase) -> float:
    """Re-express a logarithmic quantity in another base."""
    if source is target or not math.isfinite(value):
        return value
    if target is LogBase.BASE2:
        return value / math.log(2.0)
    return value * math.log(2.0)


def lemma2_identity(a: complex, b: complex) -> float:
    """``int ln|(jw - a)/(jw - b)|^2 dw = 2 pi (|Re a| - |Re b|)``."""
    return 2.0 * math.pi * (abs(complex(a).real) - abs(complex(b).real))


def lemma4_identity(a: complex) -> float:
    """``int_{-pi}^{pi} log2|e^{jw} - a|^2 dw``: zero inside the closed unit
    disk, ``2 pi log2|a|^2`` outside."""
    r = abs(complex(a))
    if r <= 1.0:
        return 0.0
    return 2.0 * math.pi * 2.0 * math.log2(r)


def _real_product(values) -> float:
    prod = complex(1.0)
    for v in values:
        prod *= v
    # conjugate closure makes the product real up to rounding
    if abs(prod.imag) > 1e-9 * (abs(prod) + 1e-300):
        raise ValueError(f"product {prod!r} is not real; roots not conjugate-closed")
    return prod.real


def _sum_re_inv(roots) -> float:
    return math.fsum((1.0 / r).real for r in roots)


def _refused(reason: str, case=None, base=LogBase.NATURAL, stability=None,
             warnings=()):
    return CsbiResult(Status.REFUSED, None, case, CsbiTerms(), tuple(warnings),
                      base, reason, stability)


def _near_unity_warning(ratio_gap: float) -> list[str]:
    if ratio_gap <= RARE_NEAR_MISS:
        return [f"NearRareCondition: relative gap {ratio_gap:.3g} to the bounded "
                "no-integrator condition; the numerical integral converges slowly"]
    return []


def csbi_continuous(L: LoopTF, boundary_tol: float = 1e-9,
                    stability_tol: float = 1e-9) -> CsbiResult:
    """Closed-form ``(1/2pi) int ln|T(jw)| dw / w^2`` for a continuous loop.

    Dispatches on the number of integrators k:

    * k >= 2: ``sum Re(1/z_u)``
    * k == 1: ``sum Re(1/z_u) - prod(-p) / (2 K prod(-z))``
    * k == 0: unbounded with the sign of ``ln|T(0)|``, except in the bounded
      case ``prod(-p) = -2 K prod(-z)`` where the value is
      ``sum Re(1/p) - sum Re(1/z_s)``.

    A biproper loop with ``K = -1`` has a degenerate closed loop; it is
    unbounded unless an integrator forces ``T(0) = 1``, which is Undefined.
    """
    if L.domain is not Domain.CONTINUOUS:
        raise ValueError("csbi_continuous needs a continuous-time loop")
    base = LogBase.NATURAL
    if L.gain == 0:
        return CsbiResult(Status.UNDEFINED, log_base=base,
                          reason="K = 0 gives T = 0 and ln|T| = -inf")
    zc = classify_zeros(L, boundary_tol)
    if zc.boundary:
        return _refused(f"BoundaryZero: zeros on the imaginary axis {list(zc.boundary)}",
                        base=base)
    T = close_loop(L)
    verdict = stability_by_roots(T, stability_tol)
    warnings = list(T.warnings) + list(verdict.notes)
    if not verdict.stable:
        case = Case.CONT_BIPROPER_K_NEG1 if T.degenerate_leading else None
        return _refused(
            f"UnstableClosedLoop: poles {list(verdict.offenders)} violate the "
            "open left half plane", case, base, verdict, warnings)

    nmp_sum = _sum_re_inv(zc.nmp)
    k = L.integrators

    if T.degenerate_leading:
        if k >= 1:
            return CsbiResult(
                Status.UNDEFINED, None, Case.CONT_BIPROPER_K_NEG1,
                CsbiTerms(nmp_sum, 0.0), tuple(warnings), base,
                "K = -1 with an integrator: degenerate closed loop with T(0) = 1",
                verdict)
        t0 = T.at_zero()
        log_t0 = math.log(abs(t0))
        if log_t0 == 0.0:
            return CsbiResult(Status.UNDEFINED, None, Case.CONT_BIPROPER_K_NEG1,
                              CsbiTerms(nmp_sum, 0.0), tuple(warnings), base,
                              "degenerate closed loop with |T(0)| = 1", verdict)
        status = Status.PLUS_INFINITY if log_t0 > 0 else Status.MINUS_INFINITY
        warnings.append(SIGN_CONVENTION_WARNING)
        return CsbiResult(status, None, Case.CONT_BIPROPER_K_NEG1,
                          CsbiTerms(nmp_sum, 0.0), tuple(warnings), base,
                          None, verdict)

    prod_p = _real_product(-p for p in L.poles)
    prod_z = _real_product(-z for z in L.zeros)

    if k >= 2:
        return CsbiResult(Status.FINITE, nmp_sum, Case.CONT_MULTI_INTEGRATOR,
                          CsbiTerms(nmp_sum, 0.0), tuple(warnings), base,
                          None, verdict)
    if k == 1:
        correction = -prod_p / (2.0 * L.gain * prod_z)
        return CsbiResult(Status.FINITE, nmp_sum + correction,
                          Case.CONT_SINGLE_INTEGRATOR,
                          CsbiTerms(nmp_sum, correction), tuple(warnings), base,
                          None, verdict)

    kz = L.gain * prod_z
    gap = abs(prod_p + 2.0 * kz) / max(abs(prod_p), abs(2.0 * kz))
    if gap <= RARE_RTOL:
        value_p = _sum_re_inv(L.poles)
        value = value_p - _sum_re_inv(zc.mp)
        return CsbiResult(Status.FINITE, value, Case.CONT_NO_INTEGRATOR_RARE,
                          CsbiTerms(nmp_sum, value - nmp_sum), tuple(warnings),
                          base, None, verdict)
    warnings.extend(_near_unity_warning(gap))
    ratio = abs(kz) / abs(prod_p + kz)
    status = Status.PLUS_INFINITY if ratio > 1.0 else Status.MINUS_INFINITY
    warnings.append(SIGN_CONVENTION_WARNING)
    return CsbiResult(status, None, Case.CONT_NO_INTEGRATOR_UNBOUNDED,
                      CsbiTerms(nmp_sum, 0.0), tuple(warnings), base, None,
                      verdict)


def csbi_discrete(L: LoopTF, boundary_tol: float = 1e-9,
                  stability_tol: float = 1e-9) -> CsbiResult:
    """Closed-form ``(1/2pi) int log2|T(e^{jw})| dw`` for a discrete loop.

    ``sum log2|z_u| + log2|K|`` for relative degree >= 1 and
    ``sum log2|z_u| + log2|K/(1+K)|`` for biproper loops. An unstable closed
    loop does not block the evaluation; it adds a warning.
    """
    if L.domain is not Domain.DISCRETE:
        raise ValueError("csbi_discrete needs a discrete-time loop")
    base = LogBase.BASE2
    if L.gain == 0:
        return CsbiResult(Status.UNDEFINED, log_base=base,
                          reason="K = 0 gives T = 0 and log|T| = -inf")
    zc = classify_zeros(L, boundary_tol)
    if zc.boundary:
        return _refused(f"BoundaryZero: zeros on the unit circle {list(zc.boundary)}",
                        base=base)
    nu = relative_degree(L)
    case = Case.DISC_STRICTLY_PROPER if nu >= 1 else Case.DISC_BIPROPER
    try:
        T = close_loop(L)
    except NonCausalClosedLoop as exc:
        return _refused(f"NonCausal: {exc}", case, base)
    verdict = stability_by_roots(T, stability_tol)
    warnings = list(T.warnings) + list(verdict.notes)
    if not verdict.stable:
        warnings.append(UNSTABLE_HYPOTHESIS_WARNING +
                        f" (offending poles {list(verdict.offenders)})")
    nmp_sum = math.fsum(math.log2(abs(z)) for z in zc.nmp)
    if nu >= 1:
        correction = math.log2(abs(L.gain))
    else:
        correction = math.log2(abs(L.gain / (1.0 + L.gain)))
    return CsbiResult(Status.FINITE, nmp_sum + correction, case,
                      CsbiTerms(nmp_sum, correction), tuple(warnings), base,
                      None, verdict)


def csbi(L: LoopTF, **kwargs) -> CsbiResult:
    if L.domain is Domain.CONTINUOUS:
        return csbi_continuous(L, **kwargs)
    return csbi_discrete(L, **kwargs)


def middleton_crosscheck(T: ClosedLoop, tol: float = 1e-9) -> float:
    """``sum 1/z_u + T'(0) / (2 T(0))`` from the exact closed-loop
    polynomials (quotient rule at s = 0).

    For loops with an integrator ``T(0) = 1`` and this equals the weighted
    integral of ``ln|T|`` itself.
    """
    if T.domain is not Domain.CONTINUOUS:
        raise ValueError("middleton_crosscheck needs a continuous closed loop")
    n0 = T.num_poly.coeffs[0]
    d0 = T.den_poly.coeffs[0]
    if n0 == 0:
        raise ZeroAtOrigin("T(0) = 0")
    n1 = poly_derivative(T.num_poly).coeffs[0]
    d1 = poly_derivative(T.den_poly).coeffs[0]
    t0 = n0 / d0
    dt0 = (n1 * d0 - n0 * d1) / (d0 * d0)
    zs = [z for z in T.zeros if z.real > tol]
    total = sum((1.0 / z for z in zs), complex(0.0)) + dt0 / (2.0 * t0)
    if abs(total.imag) >= 1e-9:
        raise ValueError(f"cross-check has imaginary residue {total.imag:.3g}")
    return total.real


def sung_crosscheck(L: LoopTF, tol: float = 1e-9) -> float:
    """``sum log2|z_u| + log2|K|`` for a strictly proper discrete loop."""
    if L.domain is not Domain.DISCRETE:
        raise ValueError("sung_crosscheck needs a discrete loop")
    if relative_degree(L) == 0:
        raise RelativeDegreeZero(
            "biproper loops pick up an extra log|1/(1+K)| term")
    unstable = [z for z in L.zeros if abs(z) > 1.0 + tol]
    mag = abs(L.gain)
    for z in unstable:
        mag *= abs(z)
    return math.log2(mag)

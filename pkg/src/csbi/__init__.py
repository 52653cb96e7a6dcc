"""Complementary sensitivity Bode integrals for rational loops.

Closed forms for continuous and discrete loops, an independent adaptive
quadrature oracle, closed-loop stability tests and a small text grammar
for transfer functions.
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    Case, CsbiResult, CsbiTerms, LogBase, Status, convert_log_base, csbi,
    csbi_continuous, csbi_discrete, lemma2_identity, lemma4_identity,
    middleton_crosscheck, sung_crosscheck)
from .errors import (  # noqa: E402
    ConjugationViolation, CsbiError, ImproperTF, MixedVariables,
    NonCausalClosedLoop, NonConvergence, OriginZero, ParseError)
from .parser import format_tf, parse_tf  # noqa: E402
from .polynomial import Poly, RootSet, poly_from_roots, poly_roots  # noqa: E402
from .quadrature import (  # noqa: E402
    QuadOptions, QuadratureReport, QuadStatus, Sign, csbi_continuous_numeric,
    csbi_discrete_numeric, lemma2_numeric, lemma4_numeric)
from .stability import (  # noqa: E402
    StabilityVerdict, jury_test, routh_hurwitz, stability_by_roots)
from .transfer_function import (  # noqa: E402
    ClosedLoop, Domain, LoopTF, cancel_common_factors, classify_zeros,
    close_loop, detect_cancellations, relative_degree)

__all__ = [name for name in dir() if not name.startswith("_")]

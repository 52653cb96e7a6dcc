# %% [markdown]
# Four reference loops, each checked three ways: the closed form, the
# quadrature oracle, and the closed-loop stability verdict.

# %%
import math

from csbi import (
    close_loop, csbi, csbi_continuous_numeric, csbi_discrete_numeric,
    detect_cancellations, format_tf, parse_tf, stability_by_roots)

LOOPS = {
    "two integrators": "-1.164e-4*(s-10)*(s+0.0625)/(s^2*(s+10))",
    "one integrator": "-5.77*(s-10)*(s+1)/(s*(s+10)*(s+1))",
    "no integrator": "-2.0348*(s-1)/(s^2+3*s+2)",
    "discrete biproper": "2*(z+2)/(z+0.5)",
}

# %%
for name, text in LOOPS.items():
    L = parse_tf(text)
    T = close_loop(L)
    verdict = stability_by_roots(T)
    res = csbi(L)
    numeric = (csbi_continuous_numeric if L.domain.value == "continuous"
               else csbi_discrete_numeric)(T)
    print(f"--- {name}: {format_tf(L)}")
    print(f"    closed-loop poles  {[complex(round(p.real, 6), round(p.imag, 6)) for p in T.poles]}")
    print(f"    stable             {verdict.stable} (margin {verdict.margin:.4g})")
    print(f"    closed form        {res.status.value} {res.value if res.value is not None else ''}")
    if numeric.value is not None:
        print(f"    quadrature         {numeric.value:.6f} +- {numeric.abs_error_estimate:.1e}")
    else:
        print(f"    quadrature         {numeric.status.value}, sign {numeric.divergence_sign.value}")
    for pair in detect_cancellations(L):
        print(f"    cancelling pair    {pair}")
    for w in res.warnings:
        print(f"    warning            {w[:88]}")

# %% [markdown]
# The discrete loop is the instructive one. Its closed loop has a pole at
# -1.5, so the closed form (which assumes a stable loop) and the integral
# part ways. The gap is exactly the log of the offending pole's modulus.

# %%
L = parse_tf(LOOPS["discrete biproper"])
gap = csbi(L).value - csbi_discrete_numeric(close_loop(L)).value
print(f"closed form minus integral = {gap:.12f}, log2(1.5) = {math.log2(1.5):.12f}")

# %% [markdown]
# Without an integrator T(0) is generally not 1, and ln|T(jw)|/w^2 blows up
# at the origin. The sign of the divergence follows ln|T(0)|. The oracle
# never extrapolates a number in that case; it shows the head integral
# growing as the lower cutoff shrinks.

# %%
import math

from csbi import (
    close_loop, csbi, csbi_continuous_numeric, csbi_discrete,
    csbi_discrete_numeric, parse_tf)
from csbi.quadrature import t_at_zero

for text in ("-2.0348*(s-1)/(s^2+3*s+2)", "-1.5/((s+1)*(s+2))", "-3/((s+1)*(s+6))"):
    L = parse_tf(text)
    T = close_loop(L)
    res = csbi(L)
    q = csbi_continuous_numeric(T)
    print(f"{text:28s} |T(0)| = {abs(t_at_zero(T)):.4f}  closed form: {res.status.value:14s}"
          f" oracle: {q.status.value}" + (f" {q.value:.6f}" if q.value is not None else
                                          f" ({q.divergence_sign.value})"))

# %% [markdown]
# The last loop hits the measure-zero case where |T(0)| = 1 without an
# integrator, so the integral is finite after all.
#
# Discrete loops: for relative degree >= 1 the value only depends on |K| and
# the zeros outside the unit disk, so flipping the sign of K leaves it
# unchanged while stability may change.

# %%
for text in ("0.4*(z-2)/((z-0.5)*(z+0.3))", "-0.4*(z-2)/((z-0.5)*(z+0.3))"):
    L = parse_tf(text)
    res = csbi_discrete(L)
    q = csbi_discrete_numeric(close_loop(L))
    print(f"{text:32s} closed form {res.value:.6f}  integral {q.value:.6f}"
          f"  stable={res.stability.stable}")
print(f"log2(0.4 * 2) = {math.log2(0.8):.6f}")

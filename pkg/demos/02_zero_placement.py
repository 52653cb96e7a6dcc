# %% [markdown]
# How far a right-half-plane zero sits from the origin sets the size of
# the complementary sensitivity integral. With two integrators only the
# zero matters: the value is 1/z. With one integrator a gain-dependent
# correction appears, so the same zero costs more or less depending on K.

# %%
import numpy as np

from csbi import Domain, LoopTF, close_loop, csbi_continuous, csbi_continuous_numeric

zeros = np.array([2.0, 5.0, 10.0, 20.0, 50.0])

print(" z      closed form   quadrature    1/z")
for z in zeros:
    # K (s - z)(s + 1) / (s^2 (s + 20)); K < 0 keeps the loop stable here
    L = LoopTF(Domain.CONTINUOUS, -0.02 * 20 / z, (complex(z), -1 + 0j), (-20 + 0j,), 2)
    res = csbi_continuous(L)
    if not res.is_finite:
        print(f"{z:5.1f}  {res.status.value}: {res.reason}")
        continue
    q = csbi_continuous_numeric(close_loop(L))
    print(f"{z:5.1f}  {res.value:11.6f}  {q.value:11.6f}  {1 / z:9.6f}")

# %% [markdown]
# One integrator: sweep the gain of K (s - 2) / (s (s + 4)) over the range
# where the closed loop stays stable (-2 < K < 0).

# %%
print("   K       zero term   correction   total")
for K in (-0.2, -0.5, -1.0, -1.5, -1.9):
    L = LoopTF(Domain.CONTINUOUS, K, (2 + 0j,), (-4 + 0j,), 1)
    res = csbi_continuous(L)
    print(f"{K:6.2f}  {res.terms.nmp_zero_sum:10.4f}  {res.terms.correction:11.4f}  {res.value:7.4f}")

# %% [markdown]
# The correction equals 1/K here, so it is negative and grows in size as
# |K| shrinks. A sluggish loop ends up with a strongly negative integral,
# while a gain near the stability edge leaves the zero term almost alone.

"""High-precision values of the Gumbel centering constants (mpmath, 30 digits)."""
from mpmath import mp, log, sqrt, pi, euler

mp.dps = 30
kappa = sqrt(2 / pi)
print("kappa", kappa)
for n in (10, 100, 1000, 10000):
    ln = log(n)
    a = 1 / (2 * ln) - log(kappa / sqrt(2 * ln)) / (2 * ln**2)
    print(n, "a_N", a, "refined", a - euler / (2 * ln**2))

"""Exit time of Brownian motion from (-1, 1): CDF values and moments of the
minimum over N independent copies, evaluated with mpmath.

The survival function uses the eigenfunction expansion
    S(w) = (4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 w / 8)
for w >= 0.25 and the image expansion 1 - 2 sum_k (-1)^k erfc((2k+1)/sqrt(2w))
below, both summed to 40 digits.
"""
from mpmath import mp, mpf, exp, erfc, pi, sqrt, quad, inf, log

mp.dps = 40


def survival(w):
    w = mpf(w)
    if w <= 0:
        return mpf(1)
    if w >= mpf("0.25"):
        s = mpf(0)
        for k in range(200):
            m = 2 * k + 1
            t = exp(-m * m * pi * pi * w / 8) / m
            s += t if k % 2 == 0 else -t
            if t < mpf(10) ** -45:
                break
        return 4 / pi * s
    s = mpf(0)
    for k in range(200):
        t = erfc((2 * k + 1) / sqrt(2 * w))
        s += t if k % 2 == 0 else -t
        if t < mpf(10) ** -45:
            break
    return 1 - 2 * s


for w in ("0.05", "0.1", "0.5", "1", "2"):
    print("cdf", w, mp.nstr(1 - survival(w), 20))

for n in (1, 2, 10, 100, 1000):
    pts = [0, mpf("0.02"), mpf("0.05"), mpf("0.1"), mpf("0.25"), 1, 4, inf]
    m1 = quad(lambda w: survival(w) ** n, pts)
    m2 = quad(lambda w: 2 * w * survival(w) ** n, pts)
    print("min", n, "mean", mp.nstr(m1, 15), "var", mp.nstr(m2 - m1 * m1, 15))

# Regenerates detection_golden.csv: the literal detection-probability formula
# (both partial sums n = 0..m-2) evaluated at 50 significant digits.
import mpmath as mp

mp.mp.dps = 50


def pd(snr, lam, m):
    g = mp.mpf(snr)
    lam = mp.mpf(lam)
    half = lam / 2
    first = mp.e ** (-half) * mp.fsum(half**n / mp.factorial(n) for n in range(m - 1))
    z = lam * g / (2 * (1 + g))
    bracket = mp.e ** (-lam / (2 * (1 + g))) - mp.e ** (-half) * mp.fsum(
        z**n / mp.factorial(n) for n in range(m - 1)
    )
    return first + ((1 + g) / g) ** (m - 1) * bracket


def pf(lam, m):
    return mp.gammainc(m, lam / mp.mpf(2), mp.inf, regularized=True)


print("snr,lambda,m,pd,pf")
for m in (2, 3, 5, 8):
    for lam in ("0.5", "4", "10", "16", "30", "60"):
        for snr in ("1e-3", "0.1", "1", "10", "100", "1e4"):
            print(f"{snr},{lam},{m},{mp.nstr(pd(snr, lam, m), 20)},{mp.nstr(pf(mp.mpf(lam), m), 20)}")

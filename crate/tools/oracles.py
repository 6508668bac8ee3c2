#!/usr/bin/env python3
"""Reference constants for the test suite, computed with mpmath.

Run from the repo root:

    python3 tools/oracles.py

The printed values are frozen into crates/core/src/constants.rs and into
unit tests.  Regenerate with this script if the definitions change.
"""

import mpmath as mp

mp.mp.dps = 30


def kernel_constant(lam):
    """Normalizing constant of the singular-integral kernel of order lam.

    G = lam * Gamma((1+lam)/2) / (2 * pi^(1/2+lam) * Gamma(1 - lam/2)),
    chosen so that the integral form has Fourier symbol |xi|^lam under the
    convention F(v)(xi) = int e^{-2 i pi x xi} v(x) dx.
    """
    lam = mp.mpf(lam)
    num = lam * mp.gamma((1 + lam) / 2)
    den = 2 * mp.pi ** (mp.mpf(1) / 2 + lam) * mp.gamma(1 - lam / 2)
    return num / den


def gaussian_point_value(lam):
    """Value at x = 0 of the order-lam operator applied to exp(-pi x^2).

    The Gaussian is self-reciprocal under the chosen Fourier convention, so
    the value equals int |xi|^lam exp(-pi xi^2) dxi = pi^(-(1+lam)/2) *
    Gamma((1+lam)/2).
    """
    lam = mp.mpf(lam)
    return mp.pi ** (-(1 + lam) / 2) * mp.gamma((1 + lam) / 2)


def barrier_value(lam, lam_prime, x):
    """Order-lam operator applied to (1+x^2)^(lam'/2), by direct quadrature.

    Uses the symmetric-pair form of the singular integral; the integrand is
    O(z^(1-lam)) near 0 so plain quadrature on split panels converges.
    """
    lam = mp.mpf(lam)
    lp = mp.mpf(lam_prime)
    g = kernel_constant(lam)

    def phi(y):
        return (1 + y * y) ** (lp / 2)

    def integrand(z):
        return (phi(x + z) + phi(x - z) - 2 * phi(x)) / z ** (1 + lam)

    val = mp.quad(integrand, [mp.mpf("1e-12"), 1, 10, 100, 1000, mp.inf])
    return -g * val


def translation_max_constant(lam):
    """max over sigma > 0 of 4 sin^2(pi sigma) / sigma^lam, and argmax."""
    lam = mp.mpf(lam)

    def f(s):
        return 4 * mp.sin(mp.pi * s) ** 2 / s ** lam

    # stationarity: 2 pi cot(pi s) = lam / s, root in (0, 1/2)
    def fp(s):
        return 2 * mp.pi / mp.tan(mp.pi * s) - lam / s

    s_star = mp.findroot(fp, mp.mpf("0.45"))
    return f(s_star), s_star


def main():
    print("== kernel constant G(lam) ==")
    for lam in ["0.25", "0.5", "0.75", "0.999"]:
        print(f"G({lam}) = {mp.nstr(kernel_constant(lam), 20)}")
    print(f"1/(4 pi)  = {mp.nstr(1 / (4 * mp.pi), 20)}")

    print("\n== Gaussian point value at 0, f = exp(-pi x^2) ==")
    for lam in ["0.25", "0.5", "0.75", "0.999"]:
        print(f"lam={lam}: {mp.nstr(gaussian_point_value(lam), 20)}")

    print("\n== barrier values, lam=0.5, lam'=0.25, phi=(1+x^2)^(lam'/2) ==")
    for x in [0, 1, 2, 5, 10, 20, 50]:
        v = barrier_value("0.5", "0.25", mp.mpf(x))
        print(f"x={x:>3}: {mp.nstr(v, 15)}")

    print("\n== translation max constant c_lam ==")
    for lam in ["0.25", "0.5", "0.75"]:
        c, s = translation_max_constant(lam)
        print(f"lam={lam}: c = {mp.nstr(c, 20)} at sigma = {mp.nstr(s, 15)}")


if __name__ == "__main__":
    main()

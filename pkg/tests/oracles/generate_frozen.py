"""Regenerate the literals in tests/frozen.py.

Runs on mpmath alone (never imports polyflow) so the frozen numbers are an
independent check.  Usage: python tests/oracles/generate_frozen.py
"""
import mpmath as mp

mp.mp.dps = 30
pi = mp.pi


def cos_coeff(f, n):
    """a_n of f on [0,1] in sum a_n cos(n pi sigma)."""
    w = 1 if n == 0 else 2
    return w * mp.quad(lambda s: f(s) * mp.cos(n * pi * s), [0, 0.5, 1])


def main():
    out = {}
    # line separation of k = A cos(pi sigma): d0 = int_0^L cos(theta) ds, theta = (AL/pi) sin(pi sigma)
    A, L = mp.mpf("0.3"), mp.mpf(2)
    out["D0_A03_L2"] = mp.quad(lambda s: L * mp.cos(A * L / pi * mp.sin(pi * s)), [0, 1])
    out["D0_A03_L2_BESSEL"] = L * mp.besselj(0, A * L / pi)
    # y-extent of the same curve: int_0^L sin(theta) ds
    out["Y1_A03_L2"] = mp.quad(lambda s: L * mp.sin(A * L / pi * mp.sin(pi * s)), [0, 1])

    # gradient speeds on k = cos(pi sigma), L = 1, from the pointwise formula
    c = lambda s: mp.cos(pi * s)
    sn = lambda s: mp.sin(pi * s)
    F0 = lambda s: pi**2 * c(s) - c(s) ** 3 / 2
    F1 = lambda s: pi**4 * c(s) + c(s) ** 2 * (-pi**2 * c(s)) - c(s) * (pi * sn(s)) ** 2 / 2
    out["GRAD_M0_A1"] = cos_coeff(F0, 1)
    out["GRAD_M0_A3"] = cos_coeff(F0, 3)
    out["GRAD_M1_A1"] = cos_coeff(F1, 1)
    out["GRAD_M1_A3"] = cos_coeff(F1, 3)

    # length rate -int k F ds for polyharmonic m on k = A cos(pi sigma), L = 1
    A = mp.mpf("0.7")
    for m in range(3):
        F = lambda s, m=m: pi ** (2 * m + 2) * A * c(s)
        out[f"DLDT_A07_M{m}"] = -mp.quad(lambda s: A * c(s) * F(s), [0, 1])

    # quadrature coefficients of a fixed degree-10 cosine polynomial sampled on 17 points
    poly = lambda s: sum(mp.mpf(j + 1) / (j * j + 1) * mp.cos(j * pi * s) for j in range(11)) \
        + mp.sin(pi * s) ** 2
    out["POLY10_COEFFS"] = [cos_coeff(poly, n) for n in range(16)]

    # curvature of the graph y = a (1 + cos(pi x / d)) at x = d/3, a = 0.1, d = 2
    a, d = mp.mpf("0.1"), mp.mpf(2)
    yx = lambda x: -a * pi / d * mp.sin(pi * x / d)
    yxx = lambda x: -a * (pi / d) ** 2 * mp.cos(pi * x / d)
    x = d / 3
    out["GRAPH_K_AT_D3"] = yxx(x) / (1 + yx(x) ** 2) ** mp.mpf(1.5)

    for k, v in out.items():
        if isinstance(v, list):
            print(f"{k} = [")
            for x in v:
                print(f"    {mp.nstr(x, 20)},")
            print("]")
        else:
            print(f"{k} = {mp.nstr(v, 20)}")


if __name__ == "__main__":
    main()

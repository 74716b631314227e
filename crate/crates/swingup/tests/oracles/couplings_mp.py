"""Extended-precision reference values for the dipole-dipole couplings.

Evaluates the perpendicular-dipole closed forms with 50 significant digits
and prints the numbers frozen into the Rust tests.
"""
import mpmath as mp

mp.mp.dps = 50


def shift(d_over_lambda):
    x = 2 * mp.pi * mp.mpf(d_over_lambda)
    return -mp.mpf(3) / 4 * (mp.cos(x) / x - (mp.sin(x) / x**2 + mp.cos(x) / x**3))


def decay(d_over_lambda):
    x = 2 * mp.pi * mp.mpf(d_over_lambda)
    return mp.mpf(3) / 2 * (mp.sin(x) / x + (mp.cos(x) / x**2 - mp.sin(x) / x**3))


if __name__ == "__main__":
    for d in ["0.01", "0.05", "0.1", "0.25", "0.5", "1.0", "1000"]:
        print(d, mp.nstr(shift(d), 20), mp.nstr(decay(d), 20))
    delta1 = mp.mpf("-7595.58")
    om = shift("0.01")
    print("E+", mp.nstr(-delta1 + om, 20), "E-", mp.nstr(-delta1 - om, 20))
    print("peak", mp.nstr(mp.mpf("68.25") * mp.pi / (mp.sqrt(2 * mp.pi) * mp.mpf("0.006")), 20))
    print("beat", mp.nstr(2 * mp.pi / (mp.mpf("15191.16") - mp.mpf("7595.58")), 20))

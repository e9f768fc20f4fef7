# Regenerates normal_reference.inc with mpmath at 50 digits.
import mpmath as mp

mp.mp.dps = 50
xs = [-37.5, -30, -20, -10, -8, -5, -3, -2, -1.5, -1, -0.5, -0.1, 0, 0.1, 0.5, 1, 1.5, 2, 3, 5, 8]
ps = ["1e-300", "1e-100", "1e-20", "1e-10", "1e-5", "0.001", "0.025", "0.1", "0.3", "0.5",
      "0.7", "0.9", "0.975", "0.999", "0.99999"]
with open("normal_reference.inc", "w") as f:
    f.write("// x, Phi(x), 1 - Phi(x)\n")
    f.write("constexpr double kCdfTable[][3] = {\n")
    for x in xs:
        c = mp.ncdf(x)
        f.write(f"    {{{x!r}, {mp.nstr(c, 20)}, {mp.nstr(1 - c, 20)}}},\n")
    f.write("};\n// p, Phi^{-1}(p)\n")
    f.write("constexpr double kQuantileTable[][2] = {\n")
    for p in ps:
        lo, hi = mp.mpf(-40), mp.mpf(40)
        for _ in range(300):
            mid = (lo + hi) / 2
            if mp.ncdf(mid) < mp.mpf(p):
                lo = mid
            else:
                hi = mid
        q = (lo + hi) / 2
        f.write(f"    {{{p}, {mp.nstr(q, 20)}}},\n")
    f.write("};\n")

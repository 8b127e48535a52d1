"""Pick (b, c, h) from data with the two-step tuner and inspect its trace.

Step one scans the lag order downward by significance of the tail
coefficients; step two cross-validates the sieve size at the chosen order;
the kernel bandwidth is then cross-validated on the final fit.
"""

from lsprec import ModelSpec, TuningGrids, simulate, two_step

sample = simulate(ModelSpec(kind="TvMA1"), n=500, seed=29)
grids = TuningGrids(c_grid=(1, 2, 3, 4, 6), h_grid=(0.1, 0.15, 0.2, 0.25),
                    b0=3, B=500, seed=5)
report = two_step(sample, grids, level=0.05, family="Fourier")

print(f"chosen lag order  b = {report.chosen_b}")
print(f"chosen sieve size c = {report.chosen_c}")
print(f"chosen bandwidth  h = {report.chosen_h}")

print("\nlag scan (largest rejecting tail wins):")
for b1, p in report.bstar_trace:
    print(f"  lags {b1}..{grids.b0} zero?  p = {p:.3f}")

print("\nleave-one-out CV over sieve sizes at the chosen order:")
for c, score in report.cv_curve:
    mark = "  <-- chosen" if c == report.chosen_c else ""
    print(f"  c = {c}:  CV = {score:.5f}{mark}")

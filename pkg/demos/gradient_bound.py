"""
A bounded discount cannot keep up with the gradient bound
=========================================================

Integrating 8fR/(p.R) along a ray gives 8f ln(p2.R/p1.R), which grows without
bound, so any F <= 1 must fall short of the bound somewhere. We find where.
"""

import math

import numpy as np

from twm_lab import ClippedLogRay, PoolState
from twm_lab.theorems import SegmentSpec, find_claim34_witness, line_integral_bound, line_integral_grad

F = ClippedLogRay(anchor_value=2.0, cap=1.0)
R, wstar, f = np.ones(2), np.array([0.5, 0.5]), 0.125

seg = SegmentSpec([1.0, 1.0], [math.e, math.e])
print("bound integral", line_integral_bound(f, R, seg).closed_form)
print("F increase   ", line_integral_grad(F, seg, wstar, R, f=f))

w = find_claim34_witness(F, PoolState([1.0, 1.0], R, [0.0, 0.0], f), wstar)
print("witness at p =", w.point, "component", w.component)
print("margin", w.margin, "fd margin", w.verified_margin)
print("ray doublings", w.extra["doublings"])

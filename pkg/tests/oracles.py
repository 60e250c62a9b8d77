"""Reference values computed independently of the package and frozen here.

Peakon convolutions: 30-digit mpmath quadrature of K * U and K' * U for
U(x) = (4/3) exp(-|x|/2), split at the kink and at the evaluation point.
Matching values for A=4, B=0: with t = c - U the level-set mismatch
V_Q(U)**2 - V_P(2c - U)**2 equals (H_- - H_+)/t**2 - 4t/3, so
t**3 = 3(H_- - H_+)/4 = 8, U = 1, 2c - U = 5 and V**2 = 47/48.
"""

import math

PEAKON_C = 4.0 / 3.0

PEAKON_K = {
    0.0: 0.88888888888888888889,
    0.1: 0.88677460530263861757,
    0.5: 0.84539636127126783368,
    1.0: 0.75127278067006624499,
    2.0: 0.53370986587224173449,
    5.0: 0.13993960022107744288,
}

PEAKON_KPRIME = {
    0.1: -0.041237339079781722942,
    0.5: -0.15312899854113017301,
    1.0: -0.21213441648105875734,
    2.0: -0.20670591816429300418,
    5.0: -0.066975156999834069398,
}

# A = 4, B = 0
REF_A, REF_B = 4.0, 0.0
REF_C, REF_ALPHA = 3.0, 4.5
REF_H_MINUS, REF_H_PLUS = 45.0 / 4.0, 7.0 / 12.0
REF_LAMBDA, REF_MU = math.sqrt(6.0), math.sqrt(2.0)
REF_U_LEFT, REF_U_RIGHT = 5.0, 1.0
REF_V_ABS = math.sqrt(47.0 / 48.0)

# step profile, residual (W - c) W' + K' * W at xi = 1
STEP_RESIDUAL_AT_1 = 2.0 * math.exp(-1.0)

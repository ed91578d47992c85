"""Quadrature oracles for the default data-generating process.

x1 ~ N(0,1), e(x) = expit(0.5 x1), E[Y | A=1, x1] = 3 + 2 x1, sigma = 1.
Values printed here are frozen into the C++ tests.
"""
import numpy as np
from scipy import integrate, stats, special


def ex(f):
    return integrate.quad(lambda x: f(x) * stats.norm.pdf(x), -40, 40, epsabs=1e-14, epsrel=1e-13)[0]


e = lambda x: special.expit(0.5 * x)
m1 = lambda x: 3.0 + 2.0 * x

print("E[e]                       =", repr(ex(e)))
print("E[Y|A=1]                   =", repr(ex(lambda x: e(x) * m1(x)) / ex(e)))
print("logit P(A=1)               =", repr(special.logit(ex(e))))
print("IPW dU/dtheta1 intercept   =", repr(-ex(lambda x: (1 - e(x)) * m1(x))))
print("IPW dU/dtheta1 slope       =", repr(-ex(lambda x: (1 - e(x)) * m1(x) * x)))
print("Var U_aipw at truth        =", repr(ex(lambda x: 1.0 / e(x)) + 4.0))
print("E[1/e]                     =", repr(ex(lambda x: 1.0 / e(x))))
print("Var U_ipw at truth         =", repr(ex(lambda x: (1 + m1(x) ** 2) / e(x)) - 9.0))
print("z(0.95)                    =", repr(stats.norm.ppf(0.975)))
print("z(0.6827)                  =", repr(stats.norm.ppf(1 - (1 - 0.6827) / 2)))
print("z(0.5)                     =", repr(stats.norm.ppf(0.75)))
print("z(0.99)                    =", repr(stats.norm.ppf(0.995)))
print("E[expit(0.3 + x1)]         =", repr(ex(lambda x: special.expit(0.3 + x))))

"""Shared fixtures and independent oracles.

The oracles below are written directly from the printed formulas with the
standard ``math`` module, so they share no code with the expression trees.
They return None where the real-valued function is undefined.
"""

import math

import pytest

from cpcbench import suite

# Published DF8 solver reports: (algorithm, x or None, reported value or None, printed type)
REPORTED_DF8 = [
    ("UGO", ("1.23746138046895", "2.80435634606639"), "0.952180605654428", {"I"}),
    ("B&B", ("2.004219271403496", "10.67136385340763"), "0.9861174570357264", {"IV"}),
    ("GA", ("1.25059489169134", "2.81337496113071"), "0.952418250458823", {"I"}),
    ("SA", ("1.33616444508089", "2.87210506473543"), "0.959385654528085", {"II"}),
    ("BFGS+MS", None, None, {"III"}),
    ("GPSO", ("0.4890379808182089", "11.710936491271905"), "1.029215094082444", {"II"}),
]
DF8_OPT = ("1.23746138046895", "2.80435634606639")
DF8_BB = ("2.004219271403496", "10.67136385340763")


def _frac_pow(u, p):
    if u < 0:
        return None
    if u == 0:
        return 0.0 if p > 0 else None
    return u**p


def oracle_df8(x1, x2):
    den = math.pi**2 * x1 * (x1 - 2) * (x2 - 2)
    if den == 0:
        return None
    b1 = math.sin(math.pi * (x1 - 2)) * math.sin(math.pi * (x2 - 2)) / den
    b2 = 2 + (x1 - 7) ** 2 - 2 * (x2 - 7) ** 2
    t1, t2 = _frac_pow(b1, 1.03), _frac_pow(b2, 0.65)
    if t1 is None or t2 is None:
        return None
    return 1 - t1 + t2


def oracle_df13(x1, x2):
    b1 = x1 - 2 * x2**2 - math.exp(x2 - x1**2)
    b2 = 0.5 * math.cos(3 * math.pi * x1 + 4 * math.pi * x2 + 5) - 0.495 * x1
    t1, t2 = _frac_pow(b1, 0.5), _frac_pow(b2, 0.2)
    if t1 is None or t2 is None:
        return None
    return t1 - t2


def oracle_df3(x1, x2):
    c = math.cos(-(2 / 3) * x1**3 - 8 * x1**2)
    if c <= 0:
        return None
    a = x1 - x2 * math.log(c)
    b = 33 * x1 - x1 * x2 + 5 - ((x1 - 4) ** 2 + (x2 - 5) ** 2 - 4) ** 2
    if a <= 0 or b <= 0:
        return None
    return -math.log(a) - math.log(b)


def oracle_df12(x):
    total = 0.0
    for i in range(len(x) - 1):
        s = x[i + 1] ** 2 - x[i] ** 2
        if s < 0:
            return None
        inner = math.sin(math.sqrt(s) - 0.5) - 0.5
        den = 10 * (x[i + 1] ** 2 + x[i] ** 2) - 0.85
        if inner < 0 or den < 0:
            return None
        d = den**0.2
        if d == 0:
            return None
        total += math.sqrt(inner) / d + 0.5
    return -total


@pytest.fixture(scope="session")
def registry():
    return suite.Registry()


@pytest.fixture(scope="session")
def df8(registry):
    return registry.get("CPC-DF8")


@pytest.fixture(scope="session")
def df8_tree(df8):
    return df8.build()

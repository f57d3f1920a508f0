"""Slow, literal BSGD used as an oracle: plain lists, explicit shrink, no scale trick."""

import math


def k(a, b, gamma):
    return math.exp(-gamma * math.fsum((p - q) ** 2 for p, q in zip(a, b)))


def decision(alphas, svs, x, gamma):
    return math.fsum(a * k(s, x, gamma) for a, s in zip(alphas, svs))


def maintain(alphas, svs, gamma, solver, tie_rtol=1e-12):
    lo = min(abs(a) for a in alphas)
    i = next(n for n, a in enumerate(alphas) if abs(a) <= lo * (1 + tie_rtol))
    ai = alphas[i]
    best = None
    for j, aj in enumerate(alphas):
        if j == i or (aj > 0) != (ai > 0):
            continue
        kap = max(k(svs[i], svs[j], gamma), 2.2250738585072014e-308)
        tot = abs(ai) + abs(aj)
        m = 0.5 if abs(abs(aj) - abs(ai)) <= tie_rtol * abs(aj) else abs(ai) / tot
        h, wd = solver.solve(m, kap)
        if best is None or tot * tot * wd < best[0]:
            best = (tot * tot * wd, j, h, kap)
    if best is None:
        del alphas[i], svs[i]
        return None
    _, j, h, kap = best
    aj = alphas[j]
    z = [h * p + (1 - h) * q for p, q in zip(svs[i], svs[j])]
    az = ai * kap ** ((1 - h) ** 2) + aj * kap ** (h * h)
    for n in sorted((i, j), reverse=True):
        del alphas[n], svs[n]
    alphas.append(az)
    svs.append(z)
    return j


def run(X, y, order, lam, gamma, budget, solver):
    """Returns the effective coefficients and support vectors after visiting ``order``."""
    alphas, svs = [], []
    for t, idx in enumerate(order, start=1):
        x = [float(v) for v in X[idx]]
        margin = y[idx] * decision(alphas, svs, x, gamma)
        if t == 1:
            alphas, svs = [], []
        else:
            alphas = [a * (1 - 1 / t) for a in alphas]
        if margin < 1:
            alphas.append(y[idx] / (lam * t))
            svs.append(x)
        if budget is not None and len(alphas) > budget:
            maintain(alphas, svs, gamma, solver)
    return alphas, svs


def epoch_orders(n, epochs, seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    return [i for _ in range(epochs) for i in rng.permutation(n).tolist()]

"""Compute end-correction nodes/weights for the hybrid Gauss-trapezoidal rule
with a logarithmic endpoint singularity.

The rule on [0, inf) reads

    h * sum_p w_p f(x_p h) + h * sum_{k >= a} f(k h)

and is required to be exact (in the Euler-Maclaurin/Navot sense) for
f(x) = x^g and f(x) = x^g log(x), g = 0..j-1.  That gives the 2j moment
equations

    sum_p w_p x_p^g          = -zeta(-g, a)
    sum_p w_p x_p^g log x_p  =  zeta'(-g, a)

solved here by homotopy continuation from an arbitrary starting rule.

Usage: python3 alpert_log_rule.py [j] [a] [steps]
"""

import sys

import mpmath as mp

mp.mp.dps = 70


def targets(j, a):
    out = []
    for g in range(j):
        out.append(-mp.zeta(-g, a))
        out.append(mp.zeta(-g, a, derivative=1))
    return out


def moments(x, w, j):
    out = []
    for g in range(j):
        out.append(mp.fsum(wp * xp**g for xp, wp in zip(x, w)))
        out.append(mp.fsum(wp * xp**g * mp.log(xp) for xp, wp in zip(x, w)))
    return out


def jacobian(x, w, j):
    n = len(x)
    jac = mp.matrix(2 * j, 2 * n)
    for g in range(j):
        for p in range(n):
            xp, wp = x[p], w[p]
            lx = mp.log(xp)
            # d/dx_p
            dxg = g * xp ** (g - 1) if g > 0 else mp.mpf(0)
            jac[2 * g, p] = wp * dxg
            jac[2 * g + 1, p] = wp * (dxg * lx + xp ** (g - 1))
            # d/dw_p
            jac[2 * g, n + p] = xp**g
            jac[2 * g + 1, n + p] = xp**g * lx
    return jac


def gauss_legendre(n):
    xs, ws = [], []
    for i in range(1, n + 1):
        x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < mp.mpf(10) ** (-mp.mp.dps + 5):
                break
        xs.append(x)
        ws.append(2 / ((1 - x * x) * dp * dp))
    return xs, ws


def lebesgue(j, c):
    out = []
    for g in range(j):
        out.append(c ** (g + 1) / (g + 1))
        out.append(c ** (g + 1) * (mp.log(c) / (g + 1) - mp.mpf(1) / (g + 1) ** 2))
    return out


def track(z, j, m0, m1, steps):
    n = j
    for s in range(1, steps + 1):
        t = mp.mpf(s) / steps
        goal = [(1 - t) * c0 + t * c1 for c0, c1 in zip(m0, m1)]
        for _ in range(60):
            x = [z[i] for i in range(n)]
            w = [z[n + i] for i in range(n)]
            r = mp.matrix([mi - gi for mi, gi in zip(moments(x, w, j), goal)])
            if mp.norm(r) < mp.mpf(10) ** (-(mp.mp.dps - 15)):
                break
            dz = mp.lu_solve(jacobian(x, w, j), -r)
            lam = mp.mpf(1)
            while True:
                cand = z + lam * dz
                if all(cand[i] > 0 for i in range(n)):
                    break
                lam /= 2
            z = cand
        else:
            raise RuntimeError(f"no convergence at t = {t}")
    return z


def newton(z, j, goal):
    n = j
    scale = mp.norm(mp.matrix(goal))
    for _ in range(40):
        x = [z[i] for i in range(n)]
        w = [z[n + i] for i in range(n)]
        r = mp.matrix([mi - gi for mi, gi in zip(moments(x, w, j), goal)])
        if mp.norm(r) < mp.mpf(10) ** (-(mp.mp.dps - 20)) * scale:
            return z
        try:
            dz = mp.lu_solve(jacobian(x, w, j), -r)
        except ZeroDivisionError:
            return None
        cand = z + dz
        if not all(cand[i] > 0 for i in range(n)):
            return None
        z = cand
    return None


def continuation(j, a, steps, lift=3):
    # the direct path to the zeta targets folds for large j; reach a larger
    # endpoint offset first, then walk the offset down to a
    a_hi = mp.mpf(a + lift)
    gx, gw = gauss_legendre(j)
    c = a_hi - mp.mpf(1) / 2
    x0, w0 = [], []
    for xi, wi in zip(gx, gw):
        u = (xi + 1) / 2
        x0.append(c * u * u)
        w0.append(c * u * wi)
    z = mp.matrix(x0 + w0)
    z = track(z, j, moments(x0, w0, j), lebesgue(j, c), steps)
    z = track(z, j, lebesgue(j, c), targets(j, a_hi), steps)
    cur, target, da = a_hi, mp.mpf(a), mp.mpf("-0.05")
    while cur > target:
        step = max(da, target - cur)
        nz = newton(z, j, targets(j, cur + step))
        if nz is None:
            da /= 2
            if abs(da) < mp.mpf(10) ** -8:
                raise RuntimeError(f"offset continuation stalled at a = {cur}")
            continue
        z, cur = nz, cur + step
        da = max(da * mp.mpf("1.5"), mp.mpf("-0.2"))
    x = [z[i] for i in range(j)]
    w = [z[j + i] for i in range(j)]
    order = sorted(range(j), key=lambda i: x[i])
    return [x[i] for i in order], [w[i] for i in order]


def main():
    j = int(sys.argv[1]) if len(sys.argv) > 1 else 15
    a = int(sys.argv[2]) if len(sys.argv) > 2 else 10
    steps = int(sys.argv[3]) if len(sys.argv) > 3 else 200
    x, w = continuation(j, a, steps)
    res = [mi - ti for mi, ti in zip(moments(x, w, j), targets(j, a))]
    print(f"// j = {j}, a = {a}, max moment residual = {mp.nstr(max(abs(r) for r in res), 5)}")
    for xi, wi in zip(x, w):
        print(f"    ({mp.nstr(xi, 36, min_fixed=-100, max_fixed=100)}, {mp.nstr(wi, 36, min_fixed=-100, max_fixed=100)}),")


if __name__ == "__main__":
    main()

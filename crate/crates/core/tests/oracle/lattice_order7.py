# Order-7 expansion of the amplitude/phase lattice system at a rational h, written
# independently of the Rust engine (sympy sparse rings over QQ).
#
#   python3 lattice_order7.py S H      e.g.  python3 lattice_order7.py 1 3/5
#
# H must make c = sqrt(1 - S H^2) rational.  Prints A1, A2 (the order-five flow
# d_t2 phi1 = A1 phi1_xxx + A2 phi1_x^2) and g1..g8, the coefficients of
#   d_t2 phi2 = g1 d_t3 phi1 + g2 phi2_xxx + g3 phi1_x phi2_x + g4 phi1_xx^2
#             + g5 phi1_x^3 + g6 phi1_x phi1_xxx + g7 phi1_xxxxx + g8 phi1_xx phi2.
import sys
from fractions import Fraction as Fr
from sympy import QQ, Rational
from sympy.polys.rings import ring

s = int(sys.argv[1])
h = Fr(sys.argv[2])
sigma = 1
c2 = 1 - s * h * h
import math

num, den = c2.numerator, c2.denominator
rn, rd = math.isqrt(num), math.isqrt(den)
assert rn * rn == num and rd * rd == den, "choose h with rational c"
c = Fr(rn, rd)
ORDER = 7
LM = 16

names = ['eps']
P = {j: [f'p{j}_{l}' for l in range(LM + 1)] for j in (1, 2, 3)}
Y = [f'y{l}' for l in range(LM + 1)]
NJ = {k: [f'n{k}_{l}' for l in range(LM + 1)] for k in (1, 2, 3)}
A = ['A1', 'A2']
G = [f'g{i}' for i in range(1, 9)]
for j in P:
    names += P[j]
names += Y
for k in NJ:
    names += NJ[k]
names += A + G
R, *gens = ring(','.join(names), QQ)
gen = dict(zip(names, gens))
EPS = gen['eps']
ie = 0  # index of eps in monomial

jet_chains = [P[1], P[2], P[3], Y, NJ[1], NJ[2], NJ[3]]
nxt = {}
for ch in jet_chains:
    for a, b in zip(ch, ch[1:]):
        nxt[a] = b
gidx = {n: i for i, n in enumerate(names)}


def q(x):
    return QQ(x.numerator, x.denominator) if isinstance(x, Fr) else QQ(x)


def trunc(e, n=ORDER):
    return R({m: v for m, v in e.items() if m[ie] <= n})


def Dx(e):
    out = R(0)
    for a, b in nxt.items():
        i = gidx[a]
        if any(m[i] for m in e.keys()):
            out += e.diff(gen[a]) * gen[b]
    return out


def shift(e, sign):
    out, term = e, e
    fact = 1
    for k in range(1, ORDER + 1):
        term = trunc(Dx(term), ORDER - k)
        fact *= k
        out += term * EPS**k * q(Fr(sign) ** k * h**k / fact)
    return trunc(out)


def mul(a, b, n=ORDER):
    return trunc(a * b, n)


def series(coeffs, u, n=ORDER):
    # sum coeffs[k] u^k with u = O(eps)
    out, pw = R(0), R(1)
    for k, ck in enumerate(coeffs):
        if k > n:
            break
        if ck:
            out += pw * q(ck)
        pw = mul(pw, u, n)
        if pw == 0:
            break
    return trunc(out, n)


def binom_series(a, n=ORDER):
    cs, cur = [], Fr(1)
    for k in range(n + 1):
        cs.append(cur)
        cur = cur * (a - k) / (k + 1)
    return cs


fact = [1]
for k in range(1, 20):
    fact.append(fact[-1] * k)
SIN = [Fr(0) if k % 2 == 0 else Fr((-1) ** (k // 2), fact[k]) for k in range(ORDER + 1)]
COS = [Fr((-1) ** (k // 2), fact[k]) if k % 2 == 0 else Fr(0) for k in range(ORDER + 1)]
SQ = binom_series(Fr(1, 2))
ISQ = binom_series(Fr(-1, 2))

phi = EPS * gen['p1_0'] + EPS**3 * gen['p2_0'] + EPS**5 * gen['p3_0']
K2 = gen['A1'] * gen['p1_3'] + gen['A2'] * gen['p1_1'] ** 2
g = [gen[x] for x in G]
W = (g[0] * gen['y0'] + g[1] * gen['p2_3'] + g[2] * gen['p1_1'] * gen['p2_1'] + g[3] * gen['p1_2'] ** 2
     + g[4] * gen['p1_1'] ** 3 + g[5] * gen['p1_1'] * gen['p1_3'] + g[6] * gen['p1_5'] + g[7] * gen['p1_2'] * gen['p2_0'])


def Dxn(e, n):
    for _ in range(n):
        e = Dx(e)
    return e


rule_cache = {}


def rule(j, m, l):
    key = (j, m, l)
    if key not in rule_cache:
        if m == 1:
            base = gen[f'p{j}_1'] * q(-c)
        elif m == 2:
            base = {1: K2, 2: W}.get(j, R(0))
        else:
            base = gen['y0'] if j == 1 else R(0)
        rule_cache[key] = Dxn(base, l)
    return rule_cache[key]


def dt(e, m):
    out = R(0)
    for j in P:
        for l, nm in enumerate(P[j]):
            i = gidx[nm]
            if not any(mm[i] for mm in e.keys()):
                continue
            r = rule(j, m, l)
            if r != 0:
                out += e.diff(gen[nm]) * r
    return out


def Dt(e):
    return trunc(EPS * dt(e, 1) + EPS**3 * dt(e, 2) + EPS**5 * dt(e, 3))


def coeff_eps(e, k):
    return R({m[:ie] + (0,) + m[ie + 1:]: v for m, v in e.items() if m[ie] == k})


# phase equation -> n_k
Nj = EPS**2 * gen['n1_0'] + EPS**4 * gen['n2_0'] + EPS**6 * gen['n3_0']
cos_sum = R(0)
for sg in (1, -1):
    dP = trunc(shift(phi, sg) - phi)
    Ns = shift(Nj, sg)
    r = mul(series(SQ, Ns), series(ISQ, Nj))
    cos_sum += mul(r, series(COS, dP))
one_h2 = q(1 / (h * h))
R12 = trunc(Dt(phi) - sigma + one_h2 - q(Fr((s - 1) * sigma)) * (1 + Nj)
            - mul((one_h2 - q(Fr(s * sigma)) * (1 + Nj)), cos_sum) * QQ(1, 2), 6)

sol = {}


def sub_n(e):
    for k, expr in sol.items():
        d = expr
        subs = []
        for l in range(LM - 2):
            subs.append((gen[NJ[k][l]], d))
            d = Dx(d)
        e = e.compose(subs)
    return e


for k in (1, 2, 3):
    eq = sub_n(coeff_eps(R12, 2 * k))
    lin = eq.diff(gen[NJ[k][0]])
    assert lin.is_ground, lin
    rest = eq - lin * gen[NJ[k][0]]
    assert rest.diff(gen[NJ[k][0]]) == 0
    sol[k] = -rest * (1 / lin.LC)
    print(f'n{k} =', sol[k], file=sys.stderr)

N_expl = EPS**2 * sol[1] + EPS**4 * sol[2] + EPS**6 * sol[3]
sqrt_nu = series(SQ, N_expl)
sin_sum = R(0)
for sg in (1, -1):
    dP = trunc(shift(phi, sg) - phi)
    Ns = shift(N_expl, sg)
    sin_sum += mul(mul(sqrt_nu, series(SQ, Ns)), series(SIN, dP))
R11 = trunc(Dt(N_expl) - mul(q(Fr(s * sigma)) * (1 + N_expl) - one_h2, sin_sum))
print('order1..3', coeff_eps(R11, 1), '|', coeff_eps(R11, 3), file=sys.stderr)

from sympy import symbols, linsolve


def solve_linear(e, unknowns, known):
    e = e.compose([(gen[k], R(v)) for k, v in known.items()]) if known else e
    ui = [gidx[u] for u in unknowns]
    rows = {}
    for m, v in e.items():
        key = tuple(0 if i in ui else x for i, x in enumerate(m))
        which = [u for u, i in zip(unknowns, ui) if m[i]]
        assert sum(m[i] for i in ui) <= 1
        rows.setdefault(key, {})[which[0] if which else 1] = v
    syms = symbols(' '.join(unknowns))
    eqs = [sum(Rational(str(v)) * (syms[unknowns.index(k)] if k != 1 else 1) for k, v in row.items()) for row in rows.values()]
    return dict(zip(unknowns, list(linsolve(eqs, syms))[0]))


Asol = solve_linear(coeff_eps(R11, 5), A, {})
print('A', Asol)
Gsol = solve_linear(coeff_eps(R11, 7), G, {k: QQ(str(v)) for k, v in Asol.items()})
for k in G:
    print(k, Gsol[k])

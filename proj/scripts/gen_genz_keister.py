#!/usr/bin/env python3
"""Generate nested Gauss-Hermite (Genz-Keister) node/weight tables.

Rules are expressed against the standard normal probability density, so the
weights of every rule sum to one.  The nested sequence has 1, 3, 9, 19, 35
nodes; each extension adds roots of a polynomial orthogonal to the current
node polynomial, Patterson style.  Output is a C++ header with frozen
17-significant-digit values.

Usage: python3 scripts/gen_genz_keister.py > include/bisque/genz_keister_table.hpp
"""

import sys
from mpmath import mp, mpf, sqrt, polyroots, lu_solve, matrix

mp.dps = 60

EXTENSION_SIZES = [2, 6, 10, 16]  # 1 -> 3 -> 9 -> 19 -> 35


def normal_moment(k):
    """E[Z^k] for Z ~ N(0,1)."""
    if k % 2 == 1:
        return mpf(0)
    m = mpf(1)
    for j in range(1, k, 2):
        m *= j
    return m


def poly_mul(a, b):
    out = [mpf(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def node_poly(nodes):
    p = [mpf(1)]
    for x in nodes:
        p = poly_mul(p, [-x, mpf(1)])
    return p


def poly_moment(p):
    """Integral of polynomial (coeff list, ascending) against N(0,1)."""
    return sum(c * normal_moment(k) for k, c in enumerate(p))


def extend(nodes, n_new):
    """Find n_new nodes extending `nodes` via moment orthogonality."""
    q = node_poly(nodes)
    # E(x) = x^n + sum_j e_j x^j with int E * q * x^k dN = 0, k = 0..n-1
    n = n_new
    A = matrix(n, n)
    rhs = matrix(n, 1)
    for k in range(n):
        xk = [mpf(0)] * k + [mpf(1)]
        qk = poly_mul(q, xk)
        for j in range(n):
            xj = [mpf(0)] * j + [mpf(1)]
            A[k, j] = poly_moment(poly_mul(qk, xj))
        lead = [mpf(0)] * n + [mpf(1)]
        rhs[k] = -poly_moment(poly_mul(qk, lead))
    coeffs = lu_solve(A, rhs)
    poly = [coeffs[j] for j in range(n)] + [mpf(1)]
    roots = polyroots(list(reversed(poly)), maxsteps=400, extraprec=200)
    for r in roots:
        assert abs(r.imag) < mpf(10) ** -40, "complex extension root"
    merged = sorted(nodes + [r.real for r in roots])
    # enforce exact +/- symmetry: mirror the positive half
    pos = [x for x in merged if x > mpf(10) ** -30]
    sym = sorted([-x for x in pos]) + [mpf(0)] + pos
    assert len(sym) == len(merged)
    return sym


def interpolatory_weights(nodes):
    n = len(nodes)
    V = matrix(n, n)
    rhs = matrix(n, 1)
    for k in range(n):
        for j in range(n):
            V[k, j] = nodes[j] ** k
        rhs[k] = normal_moment(k)
    w = lu_solve(V, rhs)
    return [(w[j] + w[n - 1 - j]) / 2 for j in range(n)]


def exactness_degree(nodes, weights, limit=80):
    deg = -1
    for k in range(limit):
        approx = sum(w * x ** k for x, w in zip(nodes, weights))
        scale = sum(abs(w) * abs(x) ** k for x, w in zip(nodes, weights)) + abs(normal_moment(k)) + 1
        if abs(approx - normal_moment(k)) > mpf(10) ** -25 * scale:
            break
        deg = k
    return deg


def main():
    levels = [[mpf(0)]]
    for n_new in EXTENSION_SIZES:
        levels.append(extend(levels[-1], n_new))

    rules = []
    for nodes in levels:
        weights = interpolatory_weights(nodes)
        deg = exactness_degree(nodes, weights)
        assert abs(sum(weights) - 1) < mpf(10) ** -40
        rules.append((nodes, weights, deg))

    # nesting check
    for lo, hi in zip(rules, rules[1:]):
        for x in lo[0]:
            assert min(abs(x - y) for y in hi[0]) < mpf(10) ** -40

    out = sys.stdout
    out.write("// Nested Gauss-Hermite (Genz-Keister) rules for the standard normal\n")
    out.write("// density.  Generated by scripts/gen_genz_keister.py; do not edit.\n")
    out.write("#pragma once\n\n#include <array>\n#include <cstddef>\n\n")
    out.write("namespace bisque::detail {\n\n")
    out.write("inline constexpr std::size_t kGenzKeisterLevels = %d;\n\n" % len(rules))
    out.write("inline constexpr std::array<std::size_t, %d> kGenzKeisterCounts = {%s};\n\n"
              % (len(rules), ", ".join(str(len(r[0])) for r in rules)))
    out.write("// Maximum polynomial total degree integrated exactly per level.\n")
    out.write("inline constexpr std::array<int, %d> kGenzKeisterDegrees = {%s};\n\n"
              % (len(rules), ", ".join(str(r[2]) for r in rules)))
    for i, (nodes, weights, _) in enumerate(rules):
        out.write("inline constexpr std::array<double, %d> kGenzKeisterNodes%d = {\n" % (len(nodes), i + 1))
        for x in nodes:
            out.write("    %s,\n" % mp.nstr(x, 17, strip_zeros=False))
        out.write("};\n")
        out.write("inline constexpr std::array<double, %d> kGenzKeisterWeights%d = {\n" % (len(nodes), i + 1))
        for w in weights:
            out.write("    %s,\n" % mp.nstr(w, 17, strip_zeros=False))
        out.write("};\n\n")
    out.write("} // namespace bisque::detail\n")


if __name__ == "__main__":
    main()

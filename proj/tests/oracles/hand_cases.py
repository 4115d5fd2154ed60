# Copyright 2026 The tarfvae Authors. All Rights Reserved.
# SPDX-License-Identifier: Apache-2.0

"""Reference values for the hand-weight unit tests.

Plain-Python evaluation of the stated formulas, independent of the C++ code.
Run: python3 tests/oracles/hand_cases.py
"""
import math


def gelu(x):
    return 0.5 * x * (1.0 + math.erf(x / math.sqrt(2.0)))


def matvec(W, x, b):
    return [sum(wij * xj for wij, xj in zip(row, x)) + bi for row, bi in zip(W, b)]


def mlp_block(h, p):
    # h: C rows of F features.
    h = [[hv + o for hv, o in zip(row, matvec(p["W2"], [gelu(v) for v in matvec(p["W1"], row, p["b1"])], p["b2"]))]
         for row in h]
    C, F = len(h), len(h[0])
    cols = [[h[c][f] for c in range(C)] for f in range(F)]
    mixed = [matvec(p["V2"], [gelu(v) for v in matvec(p["V1"], col, p["c1"])], p["c2"]) for col in cols]
    return [[h[c][f] + mixed[f][c] for f in range(F)] for c in range(C)]


def softmax(v):
    m = max(v)
    e = [math.exp(x - m) for x in v]
    s = sum(e)
    return [x / s for x in e]


print("gelu(1) =", repr(gelu(1.0)))

# mlp_block, C=1, F=2, hidden 2, channel hidden 2
blk = dict(W1=[[0.5, -0.25], [0.1, 0.2]], b1=[0.1, -0.1],
           W2=[[0.3, -0.2], [0.4, 0.1]], b2=[0.05, 0.0],
           V1=[[0.7], [-0.3]], c1=[0.0, 0.2],
           V2=[[0.25, 0.5]], c2=[-0.1])
print("mlp_block =", [repr(v) for v in mlp_block([[1.0, -2.0]], blk)[0]])

# series embedding, T=3, E=2
W = [[1.0, 0.0, -1.0], [0.5, 0.5, 0.5]]
b = [0.1, -0.2]
print("embedding =", [repr(v) for v in matvec(W, [1.0, 2.0, 4.0], b)])

# causal transformer block, C=2, E=2, one head, identity q/k/v/o without bias,
# feed-forward hidden 2 with hand weights.
tok = [[1.0, 0.0], [0.5, 2.0]]
scale = 1.0 / math.sqrt(2.0)
att = []
for i in range(2):
    scores = [sum(a * b for a, b in zip(tok[i], tok[j])) * scale for j in range(i + 1)]
    p = softmax(scores)
    att.append([sum(p[j] * tok[j][c] for j in range(i + 1)) for c in range(2)])
a = [[t + v for t, v in zip(tr, ar)] for tr, ar in zip(tok, att)]
F1 = [[0.2, -0.1], [0.3, 0.4]]
f1 = [0.0, 0.1]
F2 = [[1.0, 0.0], [-0.5, 0.5]]
f2 = [0.0, 0.0]
out = [[av + o for av, o in zip(row, matvec(F2, [gelu(v) for v in matvec(F1, row, f1)], f2))] for row in a]
print("transformer =", [[repr(v) for v in r] for r in out])

# prior micro-case: C=1, L=2, D=1, zero MLP blocks (depth 0)
emb_w, emb_b = [[0.5, -1.0]], [0.2]
e = matvec(emb_w, [1.0, 3.0], emb_b)
mu = matvec([[2.0]], e, [0.1])
lv = matvec([[-1.0]], e, [0.3])
print("prior mu, logvar =", repr(mu[0]), repr(max(-10, min(10, lv[0]))))

# scalar loss micro-case (C=1, D=1, H=1). With one channel the flow is the
# identity (token 1 passes through), so z = z0 and s = 0.
y, yhat = 0.7, 0.2
mu_p, lv_p = 0.5, math.log(0.25)
mu_q, lv_q = -0.3, math.log(0.64)
eps = 0.5
z = mu_q + math.sqrt(0.64) * eps
const = 0.5 * math.log(2 * math.pi)
logvar = 0.5 * (lv_p - lv_q)
logdet = 0.0
recon = 0.5 * (y - yhat) ** 2
qq = -0.5 * eps ** 2
pq = 0.5 * (z - mu_p) ** 2 / 0.25
print("loss terms =", repr(const), repr(logvar), repr(logdet), repr(recon), repr(qq), repr(pq))
print("loss total =", repr(const + logvar + logdet + recon + qq + pq))

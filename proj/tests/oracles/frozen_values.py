"""Independent oracles for frozen expected values used by the C++ unit tests.

Pure-Python / mpmath straight-line computations; nothing here shares code with
the library.  Run `python3 frozen_values.py` to regenerate the numbers.
"""
import math
from fractions import Fraction

import mpmath

mpmath.mp.dps = 50


def triple_loop_matmul(a, b):
    m, k, n = len(a), len(b), len(b[0])
    out = [[0.0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            s = 0.0
            for p in range(k):
                s += a[i][p] * b[p][j]
            out[i][j] = s
    return out


def exact_softmax(row):
    ex = [mpmath.e ** mpmath.mpf(v) for v in row]
    total = sum(ex)
    return [float(e / total) for e in ex]


def direct_layer_norm(row, gain, bias, eps):
    d = len(row)
    r = [mpmath.mpf(v) for v in row]
    mean = sum(r) / d
    var = sum((v - mean) ** 2 for v in r) / d
    inv = 1 / mpmath.sqrt(var + mpmath.mpf(eps))
    return [float((v - mean) * inv * g + b) for v, g, b in zip(r, gain, bias)]


def gelu(x):
    return 0.5 * x * (1.0 + math.erf(x / math.sqrt(2.0)))


def mm(x, w):
    return [[sum(x[i][p] * w[p][j] for p in range(len(w))) for j in range(len(w[0]))] for i in range(len(x))]


def add_bias(x, b):
    return [[v + bb for v, bb in zip(row, b)] for row in x]


def ln_rows(x, g, b, eps=1e-5):
    out = []
    for row in x:
        d = len(row)
        mean = sum(row) / d
        var = sum((v - mean) ** 2 for v in row) / d
        inv = 1.0 / math.sqrt(var + eps)
        out.append([(v - mean) * inv * gg + bb for v, gg, bb in zip(row, g, b)])
    return out


def softmax_rows(x):
    out = []
    for row in x:
        mx = max(row)
        ex = [math.exp(v - mx) for v in row]
        s = sum(ex)
        out.append([e / s for e in ex])
    return out


def encoder_straight_line():
    tok = [[0.1, -0.2], [0.4, 0.3], [-0.5, 0.6], [0.2, 0.9]]
    pos = [[0.05, 0.0], [0.0, 0.05], [-0.05, 0.05]]
    ids = [1, 3, 2]
    wq, bq = [[0.3, -0.1], [0.2, 0.4]], [0.01, -0.02]
    wk, bk = [[-0.2, 0.5], [0.1, 0.3]], [0.0, 0.03]
    wv, bv = [[0.6, 0.1], [-0.3, 0.2]], [0.02, 0.0]
    wo, bo = [[0.5, -0.4], [0.3, 0.7]], [-0.01, 0.02]
    g1, b1n = [1.1, 0.9], [0.05, -0.05]
    w1, b1 = [[0.2, -0.6], [0.7, 0.1]], [0.0, 0.1]
    w2, b2 = [[0.4, 0.3], [-0.2, 0.5]], [0.03, -0.01]
    g2, b2n = [0.8, 1.2], [0.0, 0.02]
    gf, bf = [1.0, 1.05], [-0.02, 0.01]

    x = [[tok[t][c] + pos[i][c] for c in range(2)] for i, t in enumerate(ids)]
    h = ln_rows(x, g1, b1n)
    q = add_bias(mm(h, wq), bq)
    k = add_bias(mm(h, wk), bk)
    v = add_bias(mm(h, wv), bv)
    scale = 1.0 / math.sqrt(2.0)
    scores = [[sum(q[i][c] * k[j][c] for c in range(2)) * scale for j in range(3)] for i in range(3)]
    attn = softmax_rows(scores)
    ctx = mm(attn, v)
    o = add_bias(mm(ctx, wo), bo)
    x = [[x[i][c] + o[i][c] for c in range(2)] for i in range(3)]
    h2 = ln_rows(x, g2, b2n)
    f = [[gelu(v_) for v_ in row] for row in add_bias(mm(h2, w1), b1)]
    f = add_bias(mm(f, w2), b2)
    x = [[x[i][c] + f[i][c] for c in range(2)] for i in range(3)]
    return ln_rows(x, gf, bf), attn


def classify_straight_line():
    h = [[0.3, -1.2, 0.5, 2.0], [-0.7, 0.1, 0.9, -0.4]]
    w = [[0.2, -0.1, 0.05], [0.4, 0.3, -0.2], [-0.6, 0.1, 0.7], [0.15, -0.25, 0.35]]
    b = [0.1, -0.2, 0.05]
    out = []
    for row in h:
        logits = [mpmath.mpf(b[j]) + sum(mpmath.mpf(row[p]) * mpmath.mpf(w[p][j]) for p in range(4)) for j in range(3)]
        ex = [mpmath.e ** l for l in logits]
        s = sum(ex)
        out.append([float(e / s) for e in ex])
    return out


def joint_loss_sum():
    dists = [
        [[0.7, 0.2, 0.1], [0.25, 0.5, 0.25]],
        [[0.1, 0.1, 0.8], [0.3, 0.3, 0.4], [0.05, 0.9, 0.05]],
    ]
    gold = [[0, 2], [2, 1, 1]]
    raw = mpmath.mpf(0)
    for s, sent in enumerate(dists):
        for i, y in enumerate(sent):
            for j in range(3):
                indicator = 1 if gold[s][i] == j else 0
                raw += indicator * -mpmath.log(mpmath.mpf(y[j]))
    return float(raw), float(raw / 5)


def adam_trajectory(steps=100, lr=0.05, b1=0.9, b2=0.999, eps=1e-8):
    theta, m, v = 1.0, 0.0, 0.0
    traj = []
    for t in range(1, steps + 1):
        g = 2.0 * theta
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta = theta - lr * mh / (math.sqrt(vh) + eps)
        traj.append(theta)
    return traj


def counting_f1(pred, gold):
    f1s = []
    for c in range(3):
        tp = sum(1 for p, g in zip(pred, gold) if p == c and g == c)
        fp = sum(1 for p, g in zip(pred, gold) if p == c and g != c)
        fn = sum(1 for p, g in zip(pred, gold) if p != c and g == c)
        p_ = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        r_ = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1s.append(2 * p_ * r_ / (p_ + r_) if p_ + r_ else Fraction(0))
    return f1s, sum(f1s) / 3


if __name__ == "__main__":
    a = [[0.5, -1.25, 2.0, 0.75], [1.5, 0.25, -0.5, 3.0], [-2.0, 1.0, 0.125, -0.375]]
    b = [[1.1, -0.3], [0.7, 2.2], [-1.4, 0.9], [0.05, -0.6]]
    print("matmul", [repr(v) for row in triple_loop_matmul(a, b) for v in row])
    print("softmax[1,2,3]", [repr(v) for v in exact_softmax([1, 2, 3])])
    ln_x = [[0.3, -1.1, 2.4, 0.0, 0.7, -0.2, 1.5, -2.3], [5.0, 5.5, 4.0, 6.25, 5.1, 4.9, 5.3, 4.2]]
    ln_g = [1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 0.9, 1.1]
    ln_b = [0.0, 0.1, -0.1, 0.2, -0.2, 0.05, 0.0, -0.05]
    print("layer_norm", [repr(v) for row in ln_x for v in direct_layer_norm(row, ln_g, ln_b, 1e-5)])
    print("gelu", [repr(float(0.5 * mpmath.mpf(x) * (1 + mpmath.erf(mpmath.mpf(x) / mpmath.sqrt(2))))) for x in (-1.5, 0.0, 0.3, 2.0)])
    hidden, attn = encoder_straight_line()
    print("encoder hidden", [repr(v) for row in hidden for v in row])
    print("encoder attn", [repr(v) for row in attn for v in row])
    print("classify", [repr(v) for row in classify_straight_line() for v in row])
    print("joint_loss raw/mean", [repr(v) for v in joint_loss_sum()])
    traj = adam_trajectory()
    print("adam", {k: repr(traj[k - 1]) for k in (1, 2, 10, 50, 100)})
    f1s, macro = counting_f1([0, 2, 2, 1], [0, 0, 2, 1])
    print("metrics", f1s, macro, float(macro))

"""Writes the CLI fixtures and their reference solutions.

Each fixture directory holds spec.json, its data files and expected.vec,
a reference solution computed with cvxpy. manifest.json lists how each
fixture is compared: on the solution vector, or on the objective value
when the minimizer is not unique.
"""
import json
import pathlib

import cvxpy as cp
import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent
rng = np.random.default_rng(20240611)
manifest = {}


def write_mtx(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = np.nonzero(M)
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{M.shape[0]} {M.shape[1]} {len(rows)}\n")
        for r, c in sorted(zip(rows, cols), key=lambda t: (t[1], t[0])):
            fh.write(f"{r + 1} {c + 1} {M[r, c]:.17g}\n")


def write_csv(path, M):
    with open(path, "w") as fh:
        for row in np.atleast_2d(M):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_vec(path, v):
    with open(path, "w") as fh:
        for e in np.ravel(v):
            fh.write(f"{e:.17g}\n")


def write_libsvm(path, A, labels):
    with open(path, "w") as fh:
        for row, lab in zip(A, labels):
            items = " ".join(f"{j + 1}:{v:.17g}" for j, v in enumerate(row) if v != 0)
            fh.write(f"{lab:.17g} {items}\n")


def solve(prob):
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10, max_iter=500)
    assert prob.status == cp.OPTIMAL, prob.status


def fixture(name, spec, x, compare="x", tol=1e-4):
    d = ROOT / name
    d.mkdir(exist_ok=True)
    spec.setdefault("options", {}).setdefault("tol", 1e-9)
    spec["options"].setdefault("max_time", 20)
    spec["options"].setdefault("max_iter", 10000000)
    (d / "spec.json").write_text(json.dumps(spec, indent=2) + "\n")
    write_vec(d / "expected.vec", x)
    manifest[name] = {"compare": compare, "tol": tol}
    return d


# Lasso, data in libsvm format with the labels as b
m, n = 12, 6
A = rng.standard_normal((m, n))
b = A @ np.array([1.5, 0, -2, 0, 0, 0.7]) + 0.1 * rng.standard_normal(m)
lam = 0.1 * np.abs(A.T @ b).max()
x = cp.Variable(n)
solve(cp.Problem(cp.Minimize(0.5 * cp.sum_squares(A @ x - b) + lam * cp.norm1(x))))
d = fixture("lasso", {"Af": "data.svm", "bf": "labels", "f": {"atom": "square", "count": m}, "cf": 0.5,
                      "g": {"atom": "abs", "count": n}, "cg": lam}, x.value)
write_libsvm(d / "data.svm", A, b)

# Binomial logistic regression with ridge penalty
m, n = 15, 4
A = rng.standard_normal((m, n))
lab = np.sign(A @ rng.standard_normal(n) + 0.3 * rng.standard_normal(m))
lam = 0.5
x = cp.Variable(n)
solve(cp.Problem(cp.Minimize(cp.sum(cp.logistic(cp.multiply(lab, A @ x))) + lam / 2 * cp.sum_squares(x))))
d = fixture("logreg", {"Af": "DA.mtx", "f": {"atom": "log1pexp", "count": m}, "Q": "Q.mtx"}, x.value)
write_mtx(d / "DA.mtx", np.diag(lab) @ A)
write_mtx(d / "Q.mtx", lam * np.eye(n))

# Sparse binomial logistic regression
m, n = 20, 5
A = rng.standard_normal((m, n))
lab = np.sign(A @ np.array([2., 0, 0, -1, 0]) + 0.5 * rng.standard_normal(m))
lam = 1.0
x = cp.Variable(n)
solve(cp.Problem(cp.Minimize(cp.sum(cp.logistic(cp.multiply(lab, A @ x))) + lam * cp.norm1(x))))
d = fixture("sparse_logreg", {"Af": "DA.csv", "f": {"atom": "log1pexp", "count": m},
                              "g": {"atom": "abs", "count": n}, "cg": lam}, x.value)
write_csv(d / "DA.csv", np.diag(lab) @ A)


def svm_data(npts, dim):
    P = rng.standard_normal((npts, dim))
    lab = np.sign(P @ rng.standard_normal(dim) + 0.4 * rng.standard_normal(npts) + 0.3)
    return P, lab


# Dual SVM without intercept: f = square on A^T D(b) x plus -e^T x through a linear atom
npts, dim, alpha = 20, 25, 4.0
P, lab = svm_data(npts, dim)
M = (np.diag(lab) @ P).T
Af = np.vstack([M, -np.ones((1, npts))])
x = cp.Variable(npts)
solve(cp.Problem(cp.Minimize(cp.sum_squares(M @ x) / (2 * alpha) - cp.sum(x)), [x >= 0, x <= 1]))
d = fixture("svm_dual", {"Af": "Af.mtx", "f": [{"atom": "square", "count": dim}, "linear"],
                         "cf": [1 / (2 * alpha)] * dim + [1.0],
                         "g": {"atom": "box_zero_one", "count": npts}}, x.value)
write_mtx(d / "Af.mtx", Af)

# Dual SVM with intercept
npts, dim, alpha = 20, 25, 4.0
P, lab = svm_data(npts, dim)
M = (np.diag(lab) @ P).T
Af = np.vstack([M, -np.ones((1, npts))])
x = cp.Variable(npts)
solve(cp.Problem(cp.Minimize(cp.sum_squares(M @ x) / (2 * alpha) - cp.sum(x)),
                 [x >= 0, x <= 1, lab @ x == 0]))
d = fixture("svm_intercept", {"Af": "Af.mtx", "f": [{"atom": "square", "count": dim}, "linear"],
                              "cf": [1 / (2 * alpha)] * dim + [1.0],
                              "g": {"atom": "box_zero_one", "count": npts},
                              "Ah": {"dense": [lab.tolist()]}, "h": ["eq_const"]}, x.value)
write_mtx(d / "Af.mtx", Af)

# Linearly constrained quadratic program
n, k, p = 6, 8, 3
F = rng.standard_normal((k, n))
bf = rng.standard_normal(k)
Ah = rng.standard_normal((p, n))
bh = rng.standard_normal(p)
x = cp.Variable(n)
solve(cp.Problem(cp.Minimize(0.5 * cp.sum_squares(F @ x - bf)), [Ah @ x == bh]))
d = fixture("qp_eq", {"Af": "F.csv", "bf": "bf.vec", "f": {"atom": "square", "count": k}, "cf": 0.5,
                      "Ah": "Ah.csv", "bh": "bh.vec", "h": {"atom": "eq_const", "count": p}}, x.value)
write_csv(d / "F.csv", F)
write_vec(d / "bf.vec", bf)
write_csv(d / "Ah.csv", Ah)
write_vec(d / "bh.vec", bh)

# Linear program min c^T x, x >= 0, A x <= b
c = np.array([-1.0, -2.0, -1.5, -0.5])
A = np.array([[1.0, 1, 1, 1], [2, 1, 0, 1], [0, 1, 3, 1]])
b = np.array([4.0, 5, 6])
x = cp.Variable(4)
solve(cp.Problem(cp.Minimize(c @ x), [x >= 0, A @ x <= b]))
d = fixture("lp", {"N": 4, "Af": {"dense": [c.tolist()]}, "f": ["linear"],
                   "g": {"atom": "nonneg", "count": 4},
                   "Ah": "A.mtx", "bh": b.tolist(), "h": {"atom": "nonpos", "count": 3}}, x.value)
write_mtx(d / "A.mtx", A)

# TV + l1 regularized regression on a 3x3 image
side = 3
n = side * side
m = 14
A = rng.standard_normal((m, n))
truth = np.array([1, 1, 0, 1, 1, 0, 0, 0, 0], dtype=float)
b = A @ truth + 0.05 * rng.standard_normal(m)
a1, a2 = 0.5, 0.1
rows = []
for i in range(side):
    for j in range(side):
        for di, dj in ((1, 0), (0, 1)):
            r = np.zeros(n)
            if i + di < side and j + dj < side:
                r[i * side + j] = -1
                r[(i + di) * side + j + dj] = 1
            rows.append(r)
Dmat = np.array(rows)
x = cp.Variable(n)
tv = sum(cp.norm(Dmat[2 * k:2 * k + 2] @ x, 2) for k in range(n))
solve(cp.Problem(cp.Minimize(0.5 * cp.sum_squares(A @ x - b) + a1 * tv + a2 * cp.norm1(x))))
d = fixture("tv_l1", {"Af": "A.csv", "bf": "b.vec", "f": {"atom": "square", "count": m}, "cf": 0.5,
                      "g": {"atom": "abs", "count": n}, "cg": a2,
                      "Ah": "D.mtx", "blocks_h": list(range(0, 2 * n + 1, 2)),
                      "h": {"atom": "norm2", "count": n}, "ch": a1}, x.value)
write_csv(d / "A.csv", A)
write_vec(d / "b.vec", b)
write_mtx(d / "D.mtx", Dmat)

# Sparse multinomial logistic regression, x stored feature-major (x[l*q + j])
m, nf, q = 10, 3, 3
A = rng.standard_normal((m, nf))
cls = rng.integers(0, q, m)
Y = np.eye(q)[cls]
lam = 0.3
X = cp.Variable((nf, q))
obj = cp.sum(cp.log_sum_exp(A @ X, axis=1)) - cp.sum(cp.multiply(Y, A @ X)) + lam * cp.sum(cp.norm(X, 2, axis=1))
solve(cp.Problem(cp.Minimize(obj)))
Af = np.vstack([np.kron(A, np.eye(q)), -(A.T @ Y).reshape(1, -1)])
d = fixture("multinomial", {"Af": "Af.mtx", "f": [{"atom": "logsumexp", "count": m}, "linear"],
                            "blocks_f": list(range(0, q * m + 1, q)) + [q * m + 1],
                            "blocks": list(range(0, nf * q + 1, q)),
                            "g": {"atom": "norm2", "count": nf}, "cg": lam},
            X.value.reshape(-1), compare="objective", tol=1e-6)
write_mtx(d / "Af.mtx", Af)

(ROOT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

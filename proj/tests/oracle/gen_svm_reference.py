#!/usr/bin/env python3
"""Freezes an exact QP solution of the hinge-loss SVM for the solver tests.

Objective (bias folded into an always-on feature, so it is regularized):
    min 0.5*(||w||^2 + b^2) + C * sum_i max(0, 1 - y_i*(w.x_i + b))

Run from the repo root:  python3 tests/oracle/gen_svm_reference.py
Writes tests/data/svm_reference.json.
"""
import json
import random

import cvxpy as cp
import numpy as np

random.seed(99)
np.random.seed(99)

datasets = []

# small 2-D overlapping classes
n_per = 20
xs = []
ys = []
for i in range(n_per):
    xs.append([random.gauss(1.0, 1.2), random.gauss(0.5, 0.8)])
    ys.append(1)
for i in range(n_per):
    xs.append([random.gauss(-0.8, 1.0), random.gauss(-0.4, 1.1)])
    ys.append(-1)
datasets.append(("overlap2d", np.array(xs), np.array(ys), 1.0))

# separable 3-D with a weaker C
xs = []
ys = []
for i in range(12):
    xs.append([random.uniform(1, 2), random.uniform(-1, 1), random.uniform(-1, 1)])
    ys.append(1)
for i in range(12):
    xs.append([random.uniform(-2, -1), random.uniform(-1, 1), random.uniform(-1, 1)])
    ys.append(-1)
datasets.append(("separable3d", np.array(xs), np.array(ys), 0.5))

out = []
for name, X, y, C in datasets:
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])  # augmented bias feature
    w = cp.Variable(d + 1)
    loss = cp.sum(cp.pos(1 - cp.multiply(y, Xa @ w)))
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(w) + C * loss))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    w_opt = np.asarray(w.value).ravel()
    margins = y * (Xa @ w_opt)
    out.append(
        {
            "name": name,
            "c": C,
            "x": X.tolist(),
            "y": y.tolist(),
            "objective": float(prob.value),
            "weights": w_opt.tolist(),
            "train_accuracy": float(np.mean((Xa @ w_opt > 0).astype(int) * 2 - 1 == y)),
        }
    )

with open("tests/data/svm_reference.json", "w") as f:
    json.dump({"datasets": out}, f, indent=1)
print("wrote tests/data/svm_reference.json")

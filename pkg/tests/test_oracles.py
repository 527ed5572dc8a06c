"""Sanity checks for the brute-force reference solvers themselves."""

import numpy as np

from oracles import grad_matrix, projection_matrix, subgradient_min, vec_tv_matrix


def test_two_column_closed_form():
    # 2x2, columns 0 | 100, eta = 0.1: u = (10, 90), energy 2*80 + 0.05*400 = 180
    x0 = np.array([[0.0, 100.0, 0.0, 100.0]])
    best = subgradient_min(grad_matrix(2, 2), 2, x0, 0.1, iters=200000)
    assert abs(best[0] - 180.0) < 1e-3


def test_matrices_shapes_and_projection():
    assert grad_matrix(3, 4).shape == (24, 12)
    assert vec_tv_matrix(3, 4).shape == (48, 24)
    p = projection_matrix(3, 4)
    assert np.allclose(p @ p, p) and np.allclose(p, p.T)


def test_linear_term_shifts_minimum():
    # pure quadratic plus linear: minimum of <c,x> + eta/2 |x - x0|^2 is -|c|^2 / (2 eta) + <c, x0>
    a = np.zeros((2, 1))
    c = np.array([[3.0]])
    x0 = np.array([[1.0]])
    best = subgradient_min(a, 2, x0, 2.0, linear=c, iters=20000)
    assert abs(best[0] - (3.0 - 9.0 / 4.0)) < 1e-6

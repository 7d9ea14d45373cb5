"""SPD linear solves and box-constrained convex QP.

The linear solver is Jacobi-preconditioned conjugate gradients; the QP
solver is a projected-Newton active-set method whose free-subspace
systems are solved exactly (sparse LU, dense Cholesky for small blocks).
Both are deterministic: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, ParameterError
from .fem import SparseSPD


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    active_set_size: int = 0


def solve_spd(
    system: SparseSPD,
    tol: float = 1e-10,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = b to relative residual ||A x - b|| / ||b|| <= tol.

    Raises ConvergenceError (carrying the best iterate) if the iteration
    cap is hit. b = 0 returns x = 0 in zero iterations.
    """
    A, b = system.matrix, system.rhs
    n = b.size
    if max_iter is None:
        max_iter = max(20 * n, 1000)
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return np.zeros(n), SolveReport(0, 0.0)

    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ParameterError("system matrix has non-positive diagonal entries")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    res = float(np.linalg.norm(r))
    if res / nb <= tol:
        return x, SolveReport(0, res / nb)
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r))
        if res / nb <= tol:
            return x, SolveReport(it, res / nb)
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"CG did not reach tol={tol} in {max_iter} iterations (residual {res / nb:.3e})",
        iterate=x,
        report=SolveReport(max_iter, res / nb),
    )


def _objective(A, b, x) -> float:
    return 0.5 * float(x @ (A @ x)) - float(b @ x)


def _solve_free(A: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    if rhs.size <= 200:
        return np.linalg.solve(A.toarray(), rhs)
    return spla.splu(A.tocsc()).solve(rhs)


def solve_box_qp(
    system: SparseSPD,
    lower: np.ndarray,
    upper: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 100,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Minimize (1/2) x A x - b x subject to lower <= x <= upper.

    Projected Newton with active-set identification: variables pressed
    against a bound by the gradient are clamped, the remaining block is
    solved exactly, and a projected Armijo backtracking step is taken.
    Terminates when the KKT residual r = A x - b satisfies, componentwise,
    r >= -tol_abs at the lower bound, r <= tol_abs at the upper bound and
    |r| <= tol_abs in between, with tol_abs = tol * max(||b||_inf, 1).
    """
    A, b = system.matrix, system.rhs
    n = b.size
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != (n,) or upper.shape != (n,):
        raise ParameterError("bound vectors must match the system dimension")
    if np.any(lower > upper):
        raise ParameterError("infeasible bounds: lower > upper somewhere")

    tol_abs = tol * max(float(np.max(np.abs(b))), 1.0) if n else 0.0
    x = np.clip(0.5 * (lower + upper) if x0 is None else np.asarray(x0, dtype=float), lower, upper)

    for it in range(1, max_iter + 1):
        r = A @ x - b
        at_lo = x - lower <= 0.0
        at_up = upper - x <= 0.0
        viol = np.abs(r)
        viol[at_lo] = np.maximum(-r[at_lo], 0.0)
        viol[at_up] = np.maximum(r[at_up], 0.0)
        viol[at_lo & at_up] = 0.0
        if float(viol.max(initial=0.0)) <= tol_abs:
            active = int(np.count_nonzero(at_lo | at_up))
            return x, SolveReport(it - 1, float(viol.max(initial=0.0)), active)

        clamped = (at_lo & (r > 0)) | (at_up & (r < 0)) | (lower == upper)
        free = ~clamped
        xt = x.copy()
        xt[at_lo & clamped] = lower[at_lo & clamped]
        xt[at_up & clamped] = upper[at_up & clamped]
        # exact minimizer over the free block with clamped variables fixed
        idx = np.flatnonzero(free)
        rhs = b[idx] - (A[idx] @ xt) + A[idx, :][:, idx] @ xt[idx]
        target = _solve_free(A[idx, :][:, idx], rhs)
        p = xt - x
        p[idx] = target - x[idx]

        f0 = _objective(A, b, x)
        slope = float(r @ p)
        # absolute slack keeps the backtracking meaningful once the
        # remaining decrease falls below the roundoff floor of f0
        slack = 1e-12 * max(1.0, abs(f0))
        alpha = 1.0
        for _ in range(60):
            xn = np.clip(x + alpha * p, lower, upper)
            if _objective(A, b, xn) <= f0 + 1e-4 * alpha * slope + slack or alpha < 1e-16:
                break
            alpha *= 0.5
        x = xn
        # snap to bounds so constraint satisfaction is exact
        x[x <= lower] = lower[x <= lower]
        x[x >= upper] = upper[x >= upper]

    r = A @ x - b
    raise ConvergenceError(
        f"box QP did not reach KKT tolerance {tol_abs:.3e} in {max_iter} iterations",
        iterate=x,
        report=SolveReport(max_iter, float(np.max(np.abs(r)))),
    )


def brute_force_box_qp(A: np.ndarray, b: np.ndarray, lower, upper) -> np.ndarray:
    """Enumerate all active-set sign patterns of a dense box QP (n <= 12).

    Reference oracle for tests: for each of the 3^n assignments of every
    variable to {lower, free, upper}, solve the free block and keep the
    best feasible candidate.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = b.size
    if n > 12:
        raise ParameterError("brute force limited to n <= 12")
    best_x, best_f = None, np.inf
    for code in range(3**n):
        state = np.empty(n, dtype=int)
        c = code
        for i in range(n):
            state[i] = c % 3
            c //= 3
        x = np.where(state == 0, lower, np.where(state == 2, upper, 0.0))
        idx = np.flatnonzero(state == 1)
        if idx.size:
            rhs = b[idx] - A[np.ix_(idx, np.flatnonzero(state != 1))] @ x[state != 1]
            try:
                x[idx] = np.linalg.solve(A[np.ix_(idx, idx)], rhs)
            except np.linalg.LinAlgError:
                continue
        if np.any(x < lower - 1e-12) or np.any(x > upper + 1e-12):
            continue
        f = 0.5 * x @ A @ x - b @ x
        if f < best_f - 1e-14:
            best_f, best_x = f, np.clip(x, lower, upper)
    return best_x

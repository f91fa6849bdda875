"""Self-contained dense SDP solver for small Hermitian trace-form programs.

Template (complex domain, dimension L):

    minimize    Tr(C X)
    subject to  Tr(A_k X) >= b_k,   k = 1..K
                Tr(X) <= c
                X >= 0  (Hermitian PSD)

The Hermitian problem is mapped to a real symmetric one through the standard
embedding X -> [[Re X, -Im X], [Im X, Re X]] (dimension and traces double;
this layer rescales so every reported quantity is in the complex domain) and
solved by an infeasible-start primal-dual predictor-corrector interior-point
method with Nesterov-Todd scaling for the PSD block.  Dimensions here are
tiny (2L <= 64, K+1 linear constraints), so each iteration uses direct dense
factorizations.

Strict-feasibility detection: when the main solve stalls, a phase-1 program
(maximize the minimum constraint slack, embedded in the same template via
two extra diagonal entries encoding a free scalar) certifies infeasibility
or genuine numerical failure.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    NumericalError,
    SdpInfeasibleError,
    ValidationError,
)
from .kernel import validate_hermitian

__all__ = ["SdpProblem", "SdpSolution", "solve_sdp"]

_STEP_DAMPING = 0.98
_MIN_STEP = 1e-10


@dataclass
class SdpProblem:
    """Trace-form Hermitian SDP instance (see module docstring)."""

    objective: np.ndarray
    constraints: tuple
    trace_cap: float
    dim: int

    def __post_init__(self):
        c = validate_hermitian(self.objective, "SDP objective")
        if c.shape[0] != self.dim:
            raise DimensionError(
                f"objective dim {c.shape[0]} does not match declared dim {self.dim}"
            )
        if len(self.constraints) < 1:
            raise ValidationError("at least one SINR constraint is required")
        checked = []
        for i, (a, b) in enumerate(self.constraints):
            a = validate_hermitian(a, f"constraint matrix {i}")
            if a.shape[0] != self.dim:
                raise DimensionError(
                    f"constraint {i} dim {a.shape[0]} != problem dim {self.dim}"
                )
            if not (b > 0 and np.isfinite(b)):
                raise ValidationError(f"constraint bound {i} must be positive, got {b}")
            checked.append((a, float(b)))
        if not (self.trace_cap > 0 and np.isfinite(self.trace_cap)):
            raise ValidationError(f"trace cap must be positive, got {self.trace_cap}")
        self.objective = c
        self.constraints = tuple(checked)


@dataclass
class SdpSolution:
    """Certified solution: primal matrix plus feasibility/gap certificates."""

    matrix: np.ndarray
    objective: float
    duality_gap: float
    max_violation: float
    iterations: int


def _embed(a):
    """Hermitian L x L -> real symmetric 2L x 2L."""
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def _unembed(y):
    """Project a real symmetric 2L x 2L iterate back to a Hermitian matrix."""
    half = y.shape[0] // 2
    re = 0.5 * (y[:half, :half] + y[half:, half:])
    im = 0.5 * (y[half:, :half] - y[:half, half:])
    x = re + 1j * im
    return 0.5 * (x + x.conj().T)


def _sym(a):
    return 0.5 * (a + a.T)


def _inner(a, b):
    return float(np.sum(a * b))


def _psd_power(a, power, floor=1e-300):
    """a^power for symmetric PD ``a`` via eigh, clamping tiny eigenvalues."""
    w, v = np.linalg.eigh(_sym(a))
    w = np.maximum(w, floor * max(1.0, float(w[-1])))
    return (v * w**power) @ v.T


def _nt_scaling(y, s):
    """Nesterov-Todd scaling point of the PSD pair (Y, S).

    Returns (e, e_inv, v) with W = e @ e satisfying W S W = Y and
    v = e^-1 Y e^-1 = e S e the scaled (common) iterate.
    """
    s_half = _psd_power(s, 0.5)
    s_ihalf = _psd_power(s, -0.5)
    inner_mat = _sym(s_half @ y @ s_half)
    w = _sym(s_ihalf @ _psd_power(inner_mat, 0.5) @ s_ihalf)
    e = _psd_power(w, 0.5)
    e_inv = _psd_power(w, -0.5)
    v = _sym(e @ s @ e)
    return e, e_inv, v


def _max_step_psd(x, dx):
    """Largest alpha with x + alpha * dx PSD (x strictly PD)."""
    lam = scipy.linalg.eigh(_sym(dx), _sym(x), eigvals_only=True)
    lo = lam[0]
    if lo >= 0:
        return np.inf
    return -1.0 / lo


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _solve_trace_form(f_mats, f_vals, c_mat, tol_feas, tol_gap, max_iterations):
    """Core IPM on: min <C,Y> s.t. <F_j,Y> - t_j = f_j, Y PSD, t >= 0.

    All data real symmetric.  Returns the final state dict; ``converged``
    signals whether every stopping criterion was met.
    """
    n = c_mat.shape[0]
    m = len(f_mats)
    f_vals = np.asarray(f_vals, dtype=float)

    f_scale = max(1.0, float(np.max(np.abs(f_vals))))
    c_scale = max(1.0, float(np.linalg.norm(c_mat)))
    y_mat = np.eye(n) * max(1.0, f_scale / n)
    s_mat = np.eye(n) * c_scale
    t = np.full(m, max(1.0, f_scale / n))
    z = np.full(m, c_scale)
    y_dual = np.zeros(m)

    state = {}
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        a_of_y = np.array([_inner(fj, y_mat) for fj in f_mats]) - t
        rp = f_vals - a_of_y
        rd = c_mat - sum(yj * fj for yj, fj in zip(y_dual, f_mats)) - s_mat
        rz = y_dual - z

        pobj = _inner(c_mat, y_mat)
        dobj = float(f_vals @ y_dual)
        gap = _inner(y_mat, s_mat) + float(t @ z)
        mu = gap / (n + m)

        pres = float(np.max(np.abs(rp)))
        dres = float(np.linalg.norm(rd)) / (1.0 + float(np.linalg.norm(c_mat)))
        zres = float(np.max(np.abs(rz)))
        if not (np.isfinite(gap) and np.isfinite(pres) and np.isfinite(dres)):
            # diverging iterates (typical of infeasible instances): hand the
            # last finite state to the phase-1 certification path
            break
        obj_scale = 1.0 + abs(pobj)
        state = {
            "Y": y_mat, "S": s_mat, "t": t, "z": z, "y": y_dual,
            "pobj": pobj, "dobj": dobj, "gap": gap,
            "pres": pres, "dres": dres, "zres": zres,
            "iterations": iterations - 1,
        }
        if (
            pres <= tol_feas
            and zres <= tol_feas
            and dres <= tol_gap
            and gap <= tol_gap * obj_scale
            and abs(pobj - dobj) <= tol_gap * obj_scale
        ):
            converged = True
            break

        # Nesterov-Todd scaling of both cone blocks.
        try:
            e, e_inv, v = _nt_scaling(y_mat, s_mat)
        except (np.linalg.LinAlgError, ValueError):
            break
        w_full = _sym(e @ e)
        lam, p_basis = np.linalg.eigh(v)
        denom = lam[:, None] + lam[None, :]

        wfw = [_sym(w_full @ fj @ w_full) for fj in f_mats]
        kkt = np.empty((m, m))
        for j in range(m):
            for k in range(j, m):
                kkt[j, k] = kkt[k, j] = _inner(f_mats[j], wfw[k])
        kkt[np.diag_indices(m)] += t / z
        try:
            kkt_factor = scipy.linalg.cho_factor(kkt, lower=True)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
            try:
                kkt_factor = scipy.linalg.cho_factor(
                    kkt + (1e-14 * np.trace(kkt)) * np.eye(m), lower=True
                )
            except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, ValueError):
                break

        def newton(rhs_psd, rhs_lp):
            rhs_rot = p_basis.T @ rhs_psd @ p_basis
            z_scaled = p_basis @ (2.0 * rhs_rot / denom) @ p_basis.T
            t0 = _sym(e @ z_scaled @ e - w_full @ rd @ w_full)
            g = rp - np.array([_inner(fj, t0) for fj in f_mats])
            g += (rhs_lp - t * rz) / z
            dy = scipy.linalg.cho_solve(kkt_factor, g)
            ds = _sym(rd - sum(dyj * fj for dyj, fj in zip(dy, f_mats)))
            dy_mat = _sym(t0 + sum(dyj * wj for dyj, wj in zip(dy, wfw)))
            dz = dy + rz
            dt = (rhs_lp - t * dz) / z
            return dy_mat, dt, dy, ds, dz

        # Predictor (affine scaling) step, then Mehrotra corrector.
        try:
            dy_aff, dt_aff, _, ds_aff, dz_aff = newton(-v @ v, -t * z)
            ap = min(1.0, _max_step_psd(y_mat, dy_aff), _max_step_lp(t, dt_aff))
            ad = min(1.0, _max_step_psd(s_mat, ds_aff), _max_step_lp(z, dz_aff))
            gap_aff = _inner(y_mat + ap * dy_aff, s_mat + ad * ds_aff) + float(
                (t + ap * dt_aff) @ (z + ad * dz_aff)
            )
            mu_aff = max(gap_aff, 0.0) / (n + m)
            sigma = float(np.clip((mu_aff / mu) ** 3, 1e-10, 1.0 - 1e-10))

            dy_sc = e_inv @ dy_aff @ e_inv
            ds_sc = e @ ds_aff @ e
            rhs_psd = sigma * mu * np.eye(n) - v @ v - _sym(dy_sc @ ds_sc)
            rhs_lp = sigma * mu - t * z - dt_aff * dz_aff
            dy_mat, dt, dy, ds, dz = newton(rhs_psd, rhs_lp)

            ap = min(1.0, _STEP_DAMPING * min(_max_step_psd(y_mat, dy_mat),
                                              _max_step_lp(t, dt)))
            ad = min(1.0, _STEP_DAMPING * min(_max_step_psd(s_mat, ds),
                                              _max_step_lp(z, dz)))
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
            break
        if max(ap, ad) < _MIN_STEP:
            break
        y_mat = _sym(y_mat + ap * dy_mat)
        t = t + ap * dt
        y_dual = y_dual + ad * dy
        s_mat = _sym(s_mat + ad * ds)
        z = z + ad * dz

    state["iterations"] = iterations
    state["converged"] = converged
    return state


def _real_data(problem):
    """Embed the complex template into the real core's (F, f, C) data."""
    f_mats = [_embed(a) for a, _ in problem.constraints]
    f_vals = [2.0 * b for _, b in problem.constraints]
    f_mats.append(-np.eye(2 * problem.dim))
    f_vals.append(-2.0 * problem.trace_cap)
    return f_mats, f_vals, _embed(problem.objective)


def _phase1_bounds(problem, tol, max_iterations):
    """Solve max-min-slack and return (lower, upper) bounds on the optimum.

    The free slack scalar theta is encoded as the difference of two extra
    diagonal PSD entries, which keeps the program inside the solver's own
    template: maximize theta s.t. Tr(A_k X) - theta >= b_k and
    Tr(X) + theta <= c.
    """
    dim = problem.dim + 2
    def lift(a, lo, hi):
        out = np.zeros((dim, dim), dtype=complex)
        out[: problem.dim, : problem.dim] = a
        out[-2, -2] = lo
        out[-1, -1] = hi
        return out

    f_mats = []
    f_vals = []
    for a, b in problem.constraints:
        f_mats.append(_embed(lift(a, -1.0, 1.0)))
        f_vals.append(2.0 * b)
    f_mats.append(_embed(lift(-np.eye(problem.dim), -1.0, 1.0)))
    f_vals.append(-2.0 * problem.trace_cap)
    cap = 2.0 * (problem.trace_cap + max(b for _, b in problem.constraints)) + 1.0
    f_mats.append(-np.eye(2 * dim))
    f_vals.append(-2.0 * cap)
    c_mat = _embed(lift(np.zeros((problem.dim, problem.dim)), -1.0, 1.0))

    state = _solve_trace_form(f_mats, f_vals, c_mat, 2.0 * tol, tol, max_iterations)
    if not state["converged"]:
        raise NumericalError(
            "phase-1 feasibility program did not converge",
            diagnostics={k: state[k] for k in ("pres", "dres", "gap", "iterations")},
        )
    theta_lower = -0.5 * state["pobj"]
    theta_upper = -0.5 * state["dobj"] + tol
    return theta_lower, theta_upper


def solve_sdp(problem, tol=1e-8, max_iterations=200):
    """Solve the trace-form Hermitian SDP to certified tolerance.

    Returns an SdpSolution whose feasibility violations (on each constraint,
    on the trace cap, and on lambda_min(X)) are at most ``tol`` absolute and
    whose duality gap is at most ``tol * (1 + |objective|)``.  Raises
    SdpInfeasibleError with a phase-1 report when no strictly feasible point
    exists, and NumericalError when the iteration stalls on a feasible
    problem.
    """
    if not isinstance(problem, SdpProblem):
        raise ValidationError("solve_sdp expects an SdpProblem")
    f_mats, f_vals, c_mat = _real_data(problem)
    state = _solve_trace_form(f_mats, f_vals, c_mat, 2.0 * tol, tol, max_iterations)

    if not state["converged"]:
        theta_lower, theta_upper = _phase1_bounds(problem, tol, max_iterations)
        report = {
            "theta_lower": theta_lower,
            "theta_upper": theta_upper,
            "main_pres": state["pres"],
            "main_gap": state["gap"],
            "iterations": state["iterations"],
        }
        if theta_upper < tol:
            raise SdpInfeasibleError(
                "SDP has no strictly feasible point "
                f"(max min-slack <= {theta_upper:.3e})",
                report=report,
            )
        raise NumericalError(
            "SDP solve stalled on a feasible problem", diagnostics=report
        )

    x = _unembed(state["Y"])
    objective = float(np.real(np.trace(problem.objective @ x)))
    violations = [
        max(0.0, b - float(np.real(np.trace(a @ x))))
        for a, b in problem.constraints
    ]
    violations.append(max(0.0, float(np.real(np.trace(x))) - problem.trace_cap))
    violations.append(max(0.0, -float(np.linalg.eigvalsh(x)[0])))
    return SdpSolution(
        matrix=x,
        objective=objective,
        duality_gap=0.5 * state["gap"],
        max_violation=float(max(violations)),
        iterations=state["iterations"],
    )

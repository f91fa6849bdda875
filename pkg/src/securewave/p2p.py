"""Waveform and energy design against a known eavesdropper channel.

Given the effective matrices Q_b and Q_e of the intended receiver and the
eavesdropper, pick the unit-norm waveform s and bit energy E that minimize
the eavesdropper's post-filter SINR subject to E s^H Q_b s >= gamma and
E <= E_max.  Two branches: when the energy cap is slack the minimizer is the
smallest generalized eigenvector of (Q_e, Q_b); when the cap binds, the
optimum satisfies a shifted eigen condition solved by bisection.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import q_matrix
from .errors import NoTransmitError, NumericalError, ValidationError, DimensionError
from .kernel import generalized_eigh, phase_normalize

__all__ = ["WaveformDesign", "P2pProblem", "check_feasibility", "eigen_design",
           "kkt_bisection", "design_p2p"]

# Eigenvalues closer than this (relative) are treated as one eigenspace.
_TIE_RTOL = 1e-10
_BISECTION_MAX_ITER = 200


@dataclass
class WaveformDesign:
    """A designed transmission: unit-norm waveform, bit energy, and branch."""

    waveform: np.ndarray
    energy: float
    branch: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.waveform, dtype=complex)
        norm = np.linalg.norm(s)
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"waveform norm {norm} deviates from 1 beyond 1e-10")
        if not (self.energy > 0 and np.isfinite(self.energy)):
            raise ValidationError(f"energy must be positive and finite, got {self.energy}")
        self.waveform = s
        self.energy = float(self.energy)


@dataclass
class P2pProblem:
    """Single-receiver secure design instance.

    ``gamma`` is the intended receiver's SINR requirement in linear scale,
    ``e_max`` the per-bit energy cap, and ``epsilon`` the stopping threshold
    of the cap-active bisection on |s^H Q_b s - gamma/e_max|.
    """

    q_bob: np.ndarray
    q_eve: np.ndarray
    gamma: float
    e_max: float
    epsilon: float = 1e-8

    def __post_init__(self):
        qb = q_matrix(self.q_bob)
        qe = q_matrix(self.q_eve)
        if qb.shape != qe.shape:
            raise DimensionError(f"Q dims differ: {qb.shape} vs {qe.shape}")
        for name, value in (("gamma", self.gamma), ("e_max", self.e_max),
                            ("epsilon", self.epsilon)):
            if not (value > 0 and np.isfinite(value)):
                raise ValidationError(f"{name} must be positive and finite, got {value}")
        self.q_bob = qb
        self.q_eve = qe

    @property
    def dim(self):
        return self.q_bob.shape[0]


def check_feasibility(problem):
    """True iff the SINR target is attainable: lambda_max(Q_b) >= gamma/e_max."""
    top = float(np.linalg.eigvalsh(problem.q_bob)[-1])
    return top >= problem.gamma / problem.e_max


def _min_pair_tie_broken(values, vectors, q_bob):
    """Smallest-eigenvalue vector; inside a degenerate eigenspace pick the
    direction minimizing s^H Q_b s via a secondary eigendecomposition."""
    lam_min = values[-1]
    spread = max(abs(values[0]), abs(lam_min), 1.0)
    members = np.nonzero(np.abs(values - lam_min) <= _TIE_RTOL * spread)[0]
    if members.shape[0] == 1:
        return float(lam_min), vectors[:, -1].copy()
    basis, _ = np.linalg.qr(vectors[:, members])
    small = basis.conj().T @ q_bob @ basis
    small = 0.5 * (small + small.conj().T)
    w, y = np.linalg.eigh(small)
    s = basis @ y[:, 0]
    s = phase_normalize(s / np.linalg.norm(s))
    return float(lam_min), s


def eigen_design(problem):
    """Unconstrained-cap branch: smallest generalized eigenvector of (Q_e, Q_b).

    Returns the design with E = gamma / (s^H Q_b s) when that energy fits the
    cap, or None to signal that the cap binds and the bisection branch is
    required.  Raises NoTransmitError on infeasible problems.
    """
    if not check_feasibility(problem):
        raise NoTransmitError(
            "SINR target is unattainable within the energy budget "
            f"(gamma/e_max = {problem.gamma / problem.e_max:.6g})"
        )
    pairs = generalized_eigh(problem.q_eve, problem.q_bob)
    ratio, s = _min_pair_tie_broken(pairs.values, pairs.vectors, problem.q_bob)
    s_qb_s = float(np.real(s.conj() @ problem.q_bob @ s))
    energy = problem.gamma / s_qb_s
    if energy > problem.e_max:
        return None
    return WaveformDesign(
        waveform=s, energy=energy, branch="eigen",
        info={"eve_bob_ratio": ratio, "s_qb_s": s_qb_s},
    )


def _cap_active_pencil(problem, mu_tilde):
    """Smallest eigenpair of ((1-u)Q_e + uI, (1-u)Q_b) for u = mu_tilde."""
    a = (1.0 - mu_tilde) * problem.q_eve + mu_tilde * np.eye(problem.dim)
    b = (1.0 - mu_tilde) * problem.q_bob
    pairs = generalized_eigh(a, b)
    beta, s = _min_pair_tie_broken(pairs.values, pairs.vectors, problem.q_bob)
    return beta, s, float(np.real(s.conj() @ problem.q_bob @ s))


def kkt_bisection(problem):
    """Cap-active branch: bisection on the shifted-pencil parameter.

    Preconditions: the problem is feasible and the plain eigen design
    violates s^H Q_b s >= gamma/e_max.  The map
    mu_tilde -> s(mu_tilde)^H Q_b s(mu_tilde) is monotone increasing on
    [0, 1), so bisection drives it to the cap-active value gamma/e_max.  The
    returned design carries the stationarity multipliers (mu, beta) in
    ``info`` and uses E = min(e_max, gamma / s^H Q_b s) so the SINR
    constraint is active to roundoff.
    """
    if not check_feasibility(problem):
        raise NoTransmitError("bisection requires a feasible problem")
    target = problem.gamma / problem.e_max
    beta_lo, s_lo, g_lo = _cap_active_pencil(problem, 0.0)
    if g_lo >= target:
        raise ValidationError(
            "eigen design already satisfies the cap constraint; "
            "the bisection branch does not apply"
        )
    lo, hi = 0.0, 1.0 - 1e-9
    beta_hi, s_hi, g_hi = _cap_active_pencil(problem, hi)
    if g_hi < target:
        raise NumericalError(
            "bisection bracket failed: s^H Q_b s below target at mu_tilde -> 1",
            diagnostics={"g_lo": g_lo, "g_hi": g_hi, "target": target},
        )
    # Stop once within epsilon AND tight in relative terms; the relative
    # floor keeps E * s^H Q_b s = gamma to ~1e-12 when the cap is active.
    tol = min(problem.epsilon, 1e-12 * target + np.finfo(float).eps * np.trace(problem.q_bob).real)
    best = None
    iterations = 0
    for iterations in range(1, _BISECTION_MAX_ITER + 1):
        mid = 0.5 * (lo + hi)
        beta, s, g = _cap_active_pencil(problem, mid)
        if best is None or abs(g - target) < abs(best[3] - target):
            best = (mid, beta, s, g)
        if abs(g - target) <= tol:
            break
        if g < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).tiny:
            break
    mu_tilde, beta, s, g = best
    if abs(g - target) > problem.epsilon:
        raise NumericalError(
            "bisection did not reach the cap-active target",
            diagnostics={"gap": abs(g - target), "epsilon": problem.epsilon,
                         "mu_tilde": mu_tilde, "iterations": iterations},
        )
    mu = mu_tilde / (1.0 - mu_tilde)
    energy = min(problem.e_max, problem.gamma / g)
    return WaveformDesign(
        waveform=s, energy=energy, branch="bisection",
        info={"mu": mu, "beta": beta, "mu_tilde": mu_tilde,
              "target_gap": abs(g - target), "iterations": iterations,
              "s_qb_s": g},
    )


def design_p2p(problem):
    """Full known-CSI pipeline: feasibility gate, eigen branch, else bisection.

    Every returned design satisfies E * s^H Q_b s = gamma to ~1e-12 relative
    and E <= e_max; infeasible problems raise NoTransmitError.
    """
    design = eigen_design(problem)
    if design is None:
        design = kkt_bisection(problem)
    return design

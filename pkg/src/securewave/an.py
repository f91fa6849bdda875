"""Unknown-eavesdropper designs: minimum-energy waveform and artificial noise.

Without the eavesdropper's channel, the transmitter whispers: it uses the
top eigenvector of Q_b at the minimum energy meeting the SINR target, then
spends the leftover budget on artificial noise (AN) confined to directions
the intended receiver's effective channel cannot see, so the receiver's SINR
is untouched while any eavesdropper soaks up the extra disturbance.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import q_matrix
from .errors import DimensionError, NoTransmitError, ValidationError
from .kernel import hermitian_eig, left_singular_basis
from .p2p import WaveformDesign
from .util import complex_normal

__all__ = ["AnCovariance", "min_energy_design", "an_covariance", "sample_an",
           "an_pipeline_single", "an_pipeline_multicast"]


@dataclass
class AnCovariance:
    """Artificial-noise covariance R_w with its trace budget.

    ``matrix`` is (E_AN / d) W W^H where the columns of W are an orthonormal
    basis of the orthogonal complement of the blocked directions and d is the
    complement dimension; ``factor`` = sqrt(E_AN/d) W maps i.i.d. unit
    circular Gaussians to AN samples with exactly this covariance.
    """

    matrix: np.ndarray
    budget: float
    blocked: np.ndarray
    factor: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def complement_dim(self):
        return self.factor.shape[1]


def min_energy_design(q_bob, gamma, e_max):
    """Whispering design: s = top eigenvector of Q_b, E = gamma / lambda_1.

    Raises NoTransmitError when even the minimum energy exceeds the cap.
    """
    q = q_matrix(q_bob)
    if not (gamma > 0 and np.isfinite(gamma)):
        raise ValidationError(f"gamma must be positive and finite, got {gamma}")
    if not (e_max > 0 and np.isfinite(e_max)):
        raise ValidationError(f"e_max must be positive and finite, got {e_max}")
    pairs = hermitian_eig(q)
    top = float(pairs.values[0])
    if top <= 0:
        raise ValidationError("Q_b must be positive definite")
    energy = gamma / top
    if energy > e_max:
        raise NoTransmitError(
            f"minimum energy {energy:.6g} exceeds the budget {e_max:.6g}"
        )
    return WaveformDesign(
        waveform=pairs.vectors[:, 0].copy(), energy=energy,
        branch="min-energy", info={"lambda_max": top},
    )


def an_covariance(blocking, budget, dim):
    """Isotropic AN covariance on the complement of the blocked directions.

    ``blocking`` is a sequence of K vectors v_1..v_K (K < dim) that the AN
    must annihilate: v_k^H R_w = 0.  The available energy is spread evenly
    over the orthogonal complement of their span; if the blocking matrix is
    rank deficient (rank r < K) the complement has dimension dim - r and the
    per-dimension share divides by dim - r so the trace still equals the
    budget.
    """
    v = np.column_stack([np.asarray(b, dtype=complex) for b in blocking])
    if v.shape[0] != dim:
        raise DimensionError(
            f"blocking vectors have length {v.shape[0]}, expected {dim}"
        )
    k = v.shape[1]
    if dim <= k:
        raise DimensionError(f"need dim >= K+1 to block {k} directions at dim {dim}")
    if budget < 0 or not np.isfinite(budget):
        raise ValidationError(f"AN budget must be >= 0 and finite, got {budget}")
    singulars, basis = left_singular_basis(v)
    tol = max(dim, k) * np.finfo(float).eps * (singulars[0] if singulars[0] > 0 else 1.0)
    rank = int(np.count_nonzero(singulars > tol))
    complement = basis[:, rank:]
    share = budget / complement.shape[1]
    factor = np.sqrt(share) * complement
    matrix = factor @ factor.conj().T
    matrix = 0.5 * (matrix + matrix.conj().T)
    return AnCovariance(matrix=matrix, budget=float(budget), blocked=v, factor=factor)


def sample_an(an, rng):
    """Draw one AN vector w with E{w} = 0 and E{w w^H} = R_w."""
    return an.factor @ complex_normal(rng, an.factor.shape[1])


def an_pipeline_single(q_bob, gamma, e_max):
    """Min-energy waveform plus AN on the leftover budget for one receiver.

    The blocked direction is Q_b q_1, so the AN lives in the span of the
    remaining eigenvectors of Q_b and the receiver's SINR is exactly
    preserved; the AN budget is e_max minus the transmit energy.
    """
    design = min_energy_design(q_bob, gamma, e_max)
    q = q_matrix(q_bob)
    blocked = q @ design.waveform
    an = an_covariance([blocked], e_max - design.energy, q.shape[0])
    return design, an


def an_pipeline_multicast(design, q_bobs, e_max):
    """AN covariance blocking every intended receiver's effective direction.

    ``design`` is the (already computed) multicast min-energy design; the
    blocked directions are v_k = Q_{b,k} s and the leftover budget
    e_max - E is spread isotropically over their joint complement.
    """
    if design.energy > e_max:
        raise ValidationError(
            f"design energy {design.energy:.6g} exceeds the budget {e_max:.6g}"
        )
    mats = [q_matrix(q) for q in q_bobs]
    blocked = [m @ design.waveform for m in mats]
    return an_covariance(blocked, e_max - design.energy, mats[0].shape[0])

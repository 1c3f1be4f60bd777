"""Rank conditions and observability constants for periodic impulse control.

Two kinds of quantities live here and are kept clearly apart:

* certified: the controllability rank condition, the Kalman rank test, the
  finite-dimensional observability constant (an exact Gramian eigenvalue),
  and operator norms of the flow (an exact mode-wise formula);
* sampled: the interpolation-inequality fit and the delta-approximate
  observability constant, which are empirical surrogates for suprema over
  infinitely many states. Their reports carry method="sampled-fit".

Every report records the horizon, the constant, and which of the two
routes produced it.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import (
    RANK_TOL,
    as_matrix,
    mat_exp,
    numerical_rank,
    spectrum,
    symmetric_part_max_eig,
)
from .schedule import check_cycle, nu, time_at
from .spectral import apply_adjoint_semigroup

__all__ = [
    "ObservabilityReport",
    "HypothesisVerdict",
    "RankDeficiencyError",
    "observation_norm",
    "rank_condition",
    "kalman_rank",
    "finite_obs_constant",
    "interpolation_estimate",
    "delta_obs_constant",
    "compose_obs",
    "semigroup_norm",
    "hypothesis_verdict",
]

# grid resolution for the fitted interpolation exponent
THETA_STEP = 0.01


class RankDeficiencyError(ValueError):
    """Rank condition fails; `witness` holds a direction with zero observations."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class ObservabilityReport:
    """One fitted or certified observability constant.

    Attributes
    ----------
    k : int
        Horizon in impulse counts.
    constant : float
        The constant; +inf when no finite constant exists.
    method : str
        'exact-gramian', 'sampled-fit', or 'composed'.
    theta : float, optional
        Interpolation exponent; only for sampled fits of the
        interpolation inequality.
    delta : float, optional
        The relaxation level, for delta-approximate variants.
    """

    k: int
    constant: float
    method: str
    theta: Optional[float] = None
    delta: Optional[float] = None


@dataclass(frozen=True)
class HypothesisVerdict:
    """Checkable hypotheses of the synthesis and witness routines.

    rank_ok carries the smallest working horizon k_star when true.
    spectral classifies max Re of the coupling spectrum against the first
    diffusion eigenvalue as 'strict', 'boundary', or 'violated';
    dissipative checks the symmetric part against the same threshold;
    omega_full records whether every actuator covers the whole interval.
    """

    rank_ok: bool
    k_star: Optional[int]
    kalman_ok: bool
    spectral: str
    dissipative: bool
    omega_full: bool


def _cyclic_gain(gains, j):
    return gains[(j - 1) % len(gains)]


def rank_condition(P, gains, sched, k_max):
    """Smallest horizon at which the shifted gain stack spans all components.

    Stacks ``exp(-P t_j) Q_{nu(j)}`` for j = 1..k and returns (True, k) for
    the first k <= k_max of full row rank, else (False, None). Blocks are
    normalized to unit spectral norm before stacking; per-block positive
    scaling leaves every column span unchanged but keeps late, strongly
    decayed blocks from dropping below the rank tolerance.
    """
    P = as_matrix(P)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    n = P.shape[0]
    blocks = []
    for j in range(1, k_max + 1):
        Q = as_matrix(_cyclic_gain(gains, j), rows=n)
        block = mat_exp(-P, time_at(sched, j)) @ Q
        scale = np.linalg.norm(block, 2)
        blocks.append(block / scale if scale > 0.0 else block)
        if numerical_rank(np.hstack(blocks)) == n:
            return True, j
    return False, None


def kalman_rank(P, gains):
    """True iff the gains and their coupling iterates span all components."""
    P = as_matrix(P)
    n = P.shape[0]
    layer = [as_matrix(Q, rows=n) for Q in gains]
    blocks = list(layer)
    for _ in range(n - 1):
        layer = [P @ Q for Q in layer]
        blocks.extend(layer)
    return numerical_rank(np.hstack(blocks)) == n


def finite_obs_constant(P, gains, taus):
    """Optimal constant bounding ``||v||^2`` by summed observation energies.

    For observation times taus, the constant is 1/lambda_min of the Gramian
    ``sum_j exp(-P tau_j) Q_j Q_j^T exp(-P^T tau_j)`` with the gains applied
    cyclically. Computed as the inverse squared smallest singular value of
    the stacked observation matrix, so singularity (+inf) coincides exactly
    with the stack's rank decision.
    """
    P = as_matrix(P)
    taus = [float(t) for t in taus]
    if any(t <= 0.0 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("observation times must be positive and strictly increasing")
    blocks = [
        mat_exp(-P, tau) @ as_matrix(_cyclic_gain(gains, j + 1), rows=P.shape[0])
        for j, tau in enumerate(taus)
    ]
    stack = np.hstack(blocks)
    sing = np.linalg.svd(stack, compute_uv=False)
    n = P.shape[0]
    deficient = stack.shape[1] < n or sing[0] == 0.0 or sing[n - 1] <= RANK_TOL * sing[0]
    constant = math.inf if deficient else 1.0 / float(sing[n - 1]) ** 2
    return ObservabilityReport(k=len(taus), constant=constant, method="exact-gramian")


def observation_norm(system, k_ctrl, state):
    """L2 norm of controller k_ctrl's reading of the state.

    The reading is the state mapped through the gain transpose and cut to
    the controller's support; its squared norm is the Gram-weighted energy
    of the retained modes, exact on the truncation.
    """
    Y = system.gain(k_ctrl).T @ np.asarray(state, dtype=float)
    if system._full[k_ctrl - 1]:
        return float(np.linalg.norm(Y))
    G = system.overlap(k_ctrl)
    energy = float(np.einsum("ij,jk,ik->", Y, G, Y))
    return math.sqrt(max(energy, 0.0))


def _observation_sum(system, sched, state, k, final_time):
    """Sum over j = 1..k of the controller readings of the adjoint flow."""
    total = 0.0
    for j in range(1, k + 1):
        evolved = apply_adjoint_semigroup(system, state, final_time - time_at(sched, j))
        total += observation_norm(system, nu(sched, j), evolved)
    return total


def _adjoint_propagator(system, t, modes):
    """Adjoint flow at time t as a (matrix, per-mode decay) pair."""
    lam = system.domain.eigenvalues()[:modes]
    lam1 = system.first_eigenvalue
    shifted = system.coupling.T - lam1 * np.eye(system.n)
    return mat_exp(shifted, t), np.exp(-(lam - lam1) * t)


def _batch_readings(system, sched, Z, k, final_time):
    """lhs norms and summed readings for a batch of states.

    Z has shape (batch, n, modes) with modes <= N; the Gram weighting only
    needs the matching leading block. Returns (lhs, obs) arrays of length
    batch, where lhs is the adjoint-flow norm at final_time and obs the
    summed controller readings at final_time - t_j, j = 1..k.
    """
    batch, _, pm = Z.shape
    E, decay = _adjoint_propagator(system, final_time, pm)
    flowed = np.einsum("ab,kbm->kam", E, Z) * decay[None, None, :]
    lhs = np.linalg.norm(flowed.reshape(batch, -1), axis=1)
    obs = np.zeros(batch)
    for j in range(1, k + 1):
        Ej, dj = _adjoint_propagator(system, final_time - time_at(sched, j), pm)
        evolved = np.einsum("ab,kbm->kam", Ej, Z) * dj[None, None, :]
        ctrl = nu(sched, j)
        Y = np.einsum("ac,kam->kcm", system.gain(ctrl), evolved)
        if system._full[ctrl - 1]:
            energy = np.einsum("kcm,kcm->k", Y, Y)
        else:
            G = system.overlap(ctrl)[:pm, :pm]
            energy = np.einsum("kcm,mn,kcn->k", Y, G, Y)
        obs += np.sqrt(np.maximum(energy, 0.0))
    return lhs, obs


def _observation_kernel(system, sched, k, final_time):
    """Orthonormal basis of component directions invisible to all readings.

    A direction v is unobserved when every ``Q_{nu(j)}^T exp(P^T (T - t_j)) v``
    vanishes; the Gram weighting cannot rescue it because each support has
    positive mass on every mode.
    """
    P = system.coupling
    lam1 = system.first_eigenvalue
    shifted = P.T - lam1 * np.eye(system.n)
    rows = []
    for j in range(1, k + 1):
        E = mat_exp(shifted, final_time - time_at(sched, j))
        rows.append(system.gain(nu(sched, j)).T @ E)
    stacked = np.vstack(rows)
    u, s, vt = np.linalg.svd(stacked)
    if s.size and s[0] > 0.0:
        rank = int(np.count_nonzero(s > RANK_TOL * s[0]))
    else:
        rank = 0
    return vt[rank:].T  # shape (n, n - rank)


def interpolation_estimate(system, sched, k, sample_count, seed=0):
    """Sampled fit of the interpolation inequality at horizon k.

    Over `sample_count` random truncated states z the routine finds the
    largest grid exponent theta in (0, 1) and the smallest constant C so
    that ``||flow*(t_{k+1}) z|| <= C (sum of readings)^theta ||z||^(1-theta)``
    holds on every sample, the readings being taken at times t_{k+1} - t_j.
    The result is an empirical report, not a certificate.

    Raises
    ------
    RankDeficiencyError
        When the rank condition fails at k; the witness attribute carries a
        unit direction whose readings all vanish.
    """
    if sample_count < 100:
        raise ValueError("at least 100 samples are required")
    check_cycle(system, sched)
    gains = [system.gain(j) for j in range(1, system.hbar + 1)]
    t_next = time_at(sched, k + 1)
    ok, _ = rank_condition(system.coupling, gains, sched, k)
    if not ok:
        kernel = _observation_kernel(system, sched, k, t_next)
        witness = kernel[:, 0] if kernel.size else np.zeros(system.n)
        raise RankDeficiencyError(
            f"rank condition fails at horizon {k}: a component direction is "
            "invisible to every controller reading",
            witness=witness,
        )
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((sample_count, system.n, system.domain.modes))
    norms = np.linalg.norm(Z.reshape(sample_count, -1), axis=1)
    keep = norms > 0.0
    Z, norms = Z[keep], norms[keep]
    lhs, obs = _batch_readings(system, sched, Z, k, t_next)
    b = np.log(lhs / norms)
    a = np.log(obs / norms)
    theta = 1.0 - THETA_STEP
    constant = float(np.exp(np.max(b - theta * a)))
    return ObservabilityReport(
        k=k, constant=constant, method="sampled-fit", theta=theta
    )


def _delta_required(lhs, norms, obs, delta):
    """Constant needed per sample: max(0, (lhs - delta ||z||) / readings)."""
    needed = lhs - delta * norms
    out = np.zeros_like(lhs)
    positive = needed > 0.0
    with np.errstate(divide="ignore"):
        out[positive] = np.where(
            obs[positive] > 0.0, needed[positive] / obs[positive], math.inf
        )
    return out


def delta_obs_constant(
    system, sched, k, delta, sample_count=10000, probe_modes=4, seed=0
):
    """Sampled delta-approximate observability constant at horizon k.

    Fits the smallest D so that
    ``||flow*(t_k) z|| <= D * (sum of readings at t_k - t_j) + delta ||z||``
    holds over unit states concentrated on the first `probe_modes` modes
    (the flow damps higher modes, so the supremum lives there), refined by
    a deterministic pattern search around the best sample. When a reading
    kernel direction survives the flow with norm above delta the true
    constant is infinite and +inf is returned.

    Monotonicity in delta holds by construction: for a fixed seed the same
    sample set is used, and each sample's required constant decreases as
    delta grows.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    check_cycle(system, sched)
    t_k = time_at(sched, k)
    kernel = _observation_kernel(system, sched, k, t_k)
    if kernel.size:
        lam1 = system.first_eigenvalue
        shifted = system.coupling.T - lam1 * np.eye(system.n)
        surviving = np.linalg.norm(mat_exp(shifted, t_k) @ kernel, 2)
        if surviving > delta * (1.0 + 1e-12):
            return ObservabilityReport(
                k=k, constant=math.inf, method="sampled-fit", delta=delta
            )

    pm = min(probe_modes, system.domain.modes)
    rng = np.random.default_rng(seed)
    dim = system.n * pm

    def evaluate(zs):
        # zs: (batch, n*pm) unit rows -> required constant per row
        Z = zs.reshape(zs.shape[0], system.n, pm)
        lhs, obs = _batch_readings(system, sched, Z, k, t_k)
        norms = np.linalg.norm(zs, axis=1)
        return _delta_required(lhs, norms, obs, delta)

    samples = rng.standard_normal((sample_count, dim))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    required = evaluate(samples)
    best_idx = int(np.argmax(required))
    best = samples[best_idx]
    best_val = float(required[best_idx])

    # pattern search on the sphere around the best sample
    step = 0.3
    eye = np.eye(dim)
    while step > 1e-8:
        candidates = np.vstack([best + step * eye, best - step * eye])
        candidates /= np.linalg.norm(candidates, axis=1, keepdims=True)
        vals = evaluate(candidates)
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best = candidates[idx]
        else:
            step *= 0.5
    return ObservabilityReport(
        k=k, constant=best_val, method="sampled-fit", delta=delta
    )


def compose_obs(D_op, delta, gamma, k, system, sched):
    """Compose a one-block constant across k blocks of gamma periods.

    Given a valid (delta, D_op) on [0, t_{gamma*hbar}], returns the pair
    (delta_k, D_k) valid on [0, t_{k*gamma*hbar}]:

        delta_k = delta * (sum_i ||flow(t_{i*gamma*hbar})||)
                        / (sum_i 1/||flow(t_{i*gamma*hbar})||),
        D_k     = D_op / (sum_i 1/||flow(t_{i*gamma*hbar})||),

    both sums over i = 0..k-1, with exact operator norms.
    """
    if gamma < 1 or k < 1:
        raise ValueError("gamma and k must be positive integers")
    block = gamma * sched.hbar
    norms = [semigroup_norm(system, time_at(sched, i * block)) for i in range(k)]
    direct = sum(norms)
    inverse = sum(1.0 / v for v in norms)
    return delta * direct / inverse, D_op / inverse


def semigroup_norm(system, t):
    """Exact operator norm of the flow at time t.

    Equals ``exp(-lambda_1 t) ||exp(P t)||_2`` by the mode-wise block
    structure; evaluated as the top singular value of the lambda_1-shifted
    exponential so the identity-coupling case returns exactly 1.
    """
    t = float(t)
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    shifted = system.coupling - system.first_eigenvalue * np.eye(system.n)
    return float(np.linalg.norm(mat_exp(shifted, t), 2))


def hypothesis_verdict(system, sched, k_max):
    """All synthesis hypotheses evaluated on one system and schedule."""
    check_cycle(system, sched)
    gains = [system.gain(j) for j in range(1, system.hbar + 1)]
    ok, k_star = rank_condition(system.coupling, gains, sched, k_max)
    lam1 = system.first_eigenvalue
    tol = 1e-9 * max(1.0, abs(lam1))
    top = spectrum(system.coupling).max_real_part
    if top > lam1 + tol:
        spectral = "violated"
    elif top >= lam1 - tol:
        spectral = "boundary"
    else:
        spectral = "strict"
    return HypothesisVerdict(
        rank_ok=ok,
        k_star=k_star,
        kalman_ok=kalman_rank(system.coupling, gains),
        spectral=spectral,
        dissipative=symmetric_part_max_eig(system.coupling) <= lam1 + tol,
        omega_full=system.has_full_supports(),
    )

"""Optimal probabilistic cache placement.

In the interference-limited regime the placement problem (maximize the total
SDP over the caching matrix subject to box and per-tier budget constraints)
is concave, and its optimum is the fixed point

    p*_ij = min{ [ (sqrt(V_ij E / eta_i) - sum_{k!=i} G_k p*_kj - E) / G_i ]^+ , 1 }

with V_ij = lam_i S_i^(2/beta) t_j, G_i = lam_i S_i^(2/beta) T,
E = D * sum_i lam_i S_i^(2/beta), and eta_i >= 0 chosen so each row sums to
its budget.  The primary solver sweeps that fixed point one tier at a time
(each row update is an exact 1-D water-filling step, the multiplier found by
bisection); an independent projected-gradient solver serves as cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytics import total_sdp_interference_limited
from .model import CachingPolicy, ContentCatalog, NetworkConfig
from .specfun import channel_constants
from .tradeoff import equivalent_cache_size

KKT_TOL = 1e-6


@dataclass(frozen=True)
class ObjectiveConstants:
    """The constants V, G, E of the interference-limited objective."""

    V: np.ndarray   # N x M, V_ij = lam_i S_i^(2/beta) t_j
    G: np.ndarray   # N,     G_i  = lam_i S_i^(2/beta) T
    E: float        # scalar D * sum_i lam_i S_i^(2/beta)


@dataclass(frozen=True)
class KktCertificate:
    """Optimality residuals for a candidate policy.

    stationarity_residual is the largest deviation from the fixed-point map
    above (with the multipliers recomputed at the candidate); rows with a
    degenerate budget (0 or the full catalog) are held fixed and excluded
    from stationarity.  A certificate is accepted iff every residual is
    below 1e-6.
    """

    eta: np.ndarray
    stationarity_residual: float
    budget_residual: float
    box_residual: float

    @property
    def accepted(self) -> bool:
        return (self.stationarity_residual < KKT_TOL
                and self.budget_residual < KKT_TOL
                and self.box_residual < KKT_TOL)


@dataclass(frozen=True)
class SolveOptions:
    max_outer_iters: int = 5000
    convergence_tol: float = 1e-9    # on max |delta P| between sweeps
    bisection_tol: float = 1e-12     # relative bracket width on eta
    method: str = "block-kkt"        # block-kkt | projected-gradient

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.convergence_tol <= 0 or self.bisection_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("block-kkt", "projected-gradient"):
            raise ValueError(f"unknown method {self.method!r}")


def objective_constants(config: NetworkConfig, catalog: ContentCatalog) -> ObjectiveConstants:
    cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
    weights = config.power_weights()
    v = weights[:, None] * catalog.popularity[None, :]
    g = weights * cc.T
    e = cc.D * float(np.sum(weights))
    v.setflags(write=False)
    g.setflags(write=False)
    return ObjectiveConstants(V=v, G=g, E=e)


def _objective(oc: ObjectiveConstants, probs: np.ndarray) -> float:
    den = oc.G @ probs + oc.E
    return float(np.sum((oc.V * probs).sum(axis=0) / den))


def sdp_gradient(config: NetworkConfig, catalog: ContentCatalog,
                 policy: CachingPolicy) -> np.ndarray:
    """Gradient of the interference-limited SDP: V_ij E / (sum_k G_k p_kj + E)^2."""
    oc = objective_constants(config, catalog)
    den = oc.G @ policy.probs + oc.E
    return oc.V * oc.E / den[None, :] ** 2


def baseline_uniform(config: NetworkConfig, catalog: ContentCatalog) -> CachingPolicy:
    """Uniform caching: p_ij = Q_i / M regardless of popularity."""
    config.check_cache_sizes(catalog)
    q = config.cache_sizes()
    return CachingPolicy(np.repeat((q / catalog.size)[:, None], catalog.size, axis=1))


def baseline_popular(config: NetworkConfig, catalog: ContentCatalog) -> CachingPolicy:
    """Most-popular caching: fill each tier's budget from the head of the catalog.

    A fractional budget puts its remainder on the next content, e.g.
    Q = 2.5 gives the row [1, 1, 0.5, 0, ...].
    """
    config.check_cache_sizes(catalog)
    ranks = np.arange(catalog.size, dtype=float)
    rows = [np.clip(t.cache_size - ranks, 0.0, 1.0) for t in config.tiers]
    return CachingPolicy(np.vstack(rows))


def _row_of(eta: float, scores: np.ndarray, offsets: np.ndarray, g: float) -> np.ndarray:
    p = np.zeros_like(scores)
    pos = scores > 0
    p[pos] = (np.sqrt(scores[pos] / eta) - offsets[pos]) / g
    return np.clip(p, 0.0, 1.0)


def _waterfill_row(scores: np.ndarray, offsets: np.ndarray, g: float,
                   budget: float, rel_tol: float) -> tuple[float, np.ndarray]:
    """Solve sum_j min{[(sqrt(scores_j/eta) - offsets_j)/g]^+, 1} = budget for eta.

    The row sum is continuous and nonincreasing in eta, so bisection applies;
    a final active-set solve pins the budget to machine precision.
    Entries with scores_j = 0 stay at zero.
    """
    pos = scores > 0
    n_pos = int(np.count_nonzero(pos))
    if budget > n_pos:
        raise ValueError(
            f"budget {budget} exceeds the {n_pos} contents with positive demand; "
            "the budget constraint cannot bind")
    if budget == n_pos:
        eta = float(np.min(scores[pos] / (offsets[pos] + g) ** 2))
        return eta, _row_of(eta, scores, offsets, g)
    hi = float(np.max(scores[pos] / offsets[pos] ** 2))          # row sum 0
    lo = float(np.min(scores[pos] / (offsets[pos] + g) ** 2))    # row sum n_pos
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(np.sum(_row_of(mid, scores, offsets, g))) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    eta = 0.5 * (lo + hi)
    # Active-set polish: with the saturation pattern fixed, eta is closed form.
    best_eta, best_gap = eta, abs(float(np.sum(_row_of(eta, scores, offsets, g))) - budget)
    for _ in range(50):
        p = _row_of(eta, scores, offsets, g)
        interior = pos & (p > 0.0) & (p < 1.0)
        n_ones = float(np.count_nonzero(p >= 1.0))
        if not np.any(interior):
            break
        denom = g * (budget - n_ones) + float(np.sum(offsets[interior]))
        if denom <= 0:
            break
        eta_new = (float(np.sum(np.sqrt(scores[interior]))) / denom) ** 2
        gap = abs(float(np.sum(_row_of(eta_new, scores, offsets, g))) - budget)
        if gap < best_gap:
            best_eta, best_gap = eta_new, gap
        if eta_new == eta:
            break
        eta = eta_new
    return best_eta, _row_of(best_eta, scores, offsets, g)


def solve_single_tier(catalog: ContentCatalog, q: float, tau: float,
                      beta: float, rel_tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """Optimal single-tier caching probabilities for budget 0 < q < M.

    Returns the probability row (summing to q, nonincreasing) and the
    multiplier eta* found by bisection.
    """
    if not 0 < q < catalog.size:
        raise ValueError(f"budget must satisfy 0 < q < {catalog.size}, got {q}")
    cc = channel_constants(tau, beta)
    scores = catalog.popularity * cc.D
    offsets = np.full(catalog.size, cc.D)
    eta, row = _waterfill_row(scores, offsets, cc.T, q, rel_tol)
    return row, eta


def solve_p2_equivalent(config: NetworkConfig,
                        catalog: ContentCatalog) -> tuple[np.ndarray, float, float]:
    """Equivalent single-tier relaxation: the upper bound on the N-tier optimum.

    Pools the tier budgets into the weighted average Q_e and solves the
    single-tier problem at that budget.  Returns (x, Q_e, bound).
    """
    q_e = equivalent_cache_size(config)
    if q_e >= catalog.size:
        raise ValueError(f"equivalent cache size {q_e} must be below catalog size {catalog.size}")
    if q_e <= 0:
        raise ValueError(f"equivalent cache size must be positive, got {q_e}")
    x, _eta = solve_single_tier(catalog, q_e, config.sinr_threshold,
                                config.path_loss_exponent)
    cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
    bound = float(np.sum(x * catalog.popularity / (cc.T * x + cc.D)))
    return x, q_e, bound


def _free_rows(config: NetworkConfig, catalog: ContentCatalog) -> list[int]:
    return [i for i, t in enumerate(config.tiers)
            if 0.0 < t.cache_size < catalog.size]


def _initial_policy(config: NetworkConfig, catalog: ContentCatalog) -> np.ndarray:
    q = config.cache_sizes()
    return np.repeat((q / catalog.size)[:, None], catalog.size, axis=1)


def kkt_certificate(config: NetworkConfig, catalog: ContentCatalog,
                    policy: CachingPolicy,
                    rel_tol: float = 1e-12) -> KktCertificate:
    """Measure how far a policy is from the fixed-point optimality conditions."""
    oc = objective_constants(config, catalog)
    probs = policy.probs
    q = config.cache_sizes()
    free = _free_rows(config, catalog)
    eta = np.zeros(config.n_tiers)
    stationarity = 0.0
    budget = 0.0
    for i in range(config.n_tiers):
        budget = max(budget, abs(float(np.sum(probs[i])) - q[i]))
    for i in free:
        cross = oc.G @ probs - oc.G[i] * probs[i] + oc.E
        eta_i, rhs = _waterfill_row(oc.V[i] * oc.E, cross, oc.G[i], q[i], rel_tol)
        eta[i] = eta_i
        stationarity = max(stationarity, float(np.max(np.abs(probs[i] - rhs))))
    box = max(0.0, float(np.max(-probs, initial=0.0)),
              float(np.max(probs - 1.0, initial=0.0)))
    return KktCertificate(eta=eta, stationarity_residual=stationarity,
                          budget_residual=budget, box_residual=box)


def _solve_block_kkt(config: NetworkConfig, catalog: ContentCatalog,
                     options: SolveOptions) -> np.ndarray:
    oc = objective_constants(config, catalog)
    probs = _initial_policy(config, catalog)
    q = config.cache_sizes()
    free = _free_rows(config, catalog)
    probs[q == 0.0] = 0.0
    probs[q == float(catalog.size)] = 1.0
    for _sweep in range(options.max_outer_iters):
        delta = 0.0
        for i in free:
            cross = oc.G @ probs - oc.G[i] * probs[i] + oc.E
            _eta, row = _waterfill_row(oc.V[i] * oc.E, cross, oc.G[i], q[i],
                                       options.bisection_tol)
            delta = max(delta, float(np.max(np.abs(row - probs[i]))))
            probs[i] = row
        if delta < options.convergence_tol:
            break
    return probs


def project_capped_simplex(v: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {0 <= p <= 1, sum p = budget}."""
    m = v.size
    if not 0.0 <= budget <= m:
        raise ValueError(f"budget must lie in [0, {m}], got {budget}")
    if budget == 0.0:
        return np.zeros(m)
    if budget == float(m):
        return np.ones(m)
    lo = float(np.min(v)) - 1.0   # all entries clip to 1: sum = m >= budget
    hi = float(np.max(v))         # all entries clip to 0: sum = 0 <= budget
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if float(np.sum(np.clip(v - mid, 0.0, 1.0))) > budget:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    p = np.clip(v - theta, 0.0, 1.0)
    interior = (p > 0.0) & (p < 1.0)
    n_ones = float(np.count_nonzero(p >= 1.0))
    if np.any(interior):
        theta_exact = (float(np.sum(v[interior])) - (budget - n_ones)) / float(
            np.count_nonzero(interior))
        p_exact = np.clip(v - theta_exact, 0.0, 1.0)
        if abs(float(np.sum(p_exact)) - budget) <= abs(float(np.sum(p)) - budget):
            p = p_exact
    return p


def _solve_projected_gradient(config: NetworkConfig, catalog: ContentCatalog,
                              options: SolveOptions,
                              start: np.ndarray | None = None) -> np.ndarray:
    oc = objective_constants(config, catalog)
    q = config.cache_sizes()
    free = _free_rows(config, catalog)
    probs = _initial_policy(config, catalog) if start is None else start.copy()
    probs[q == 0.0] = 0.0
    probs[q == float(catalog.size)] = 1.0

    def project(mat: np.ndarray) -> np.ndarray:
        out = probs.copy()
        for i in free:
            out[i] = project_capped_simplex(mat[i], q[i])
        return out

    step = 1.0
    value = _objective(oc, probs)
    for _it in range(options.max_outer_iters):
        den = oc.G @ probs + oc.E
        grad = oc.V * oc.E / den[None, :] ** 2
        # Backtracking: accept a step that realizes a fraction of the
        # linearized gain; concavity guarantees acceptance for small steps.
        moved = None
        for _bt in range(60):
            cand = project(probs + step * grad)
            gain = float(np.sum(grad * (cand - probs)))
            cand_value = _objective(oc, cand)
            if cand_value >= value + 1e-4 * gain or gain <= 0.0:
                moved = cand
                break
            step *= 0.5
        if moved is None:
            break
        delta = float(np.max(np.abs(moved - probs)))
        probs, value = moved, cand_value
        step *= 1.3
        if delta < options.convergence_tol:
            break
    return probs


def solve_p1(config: NetworkConfig, catalog: ContentCatalog,
             options: SolveOptions = SolveOptions()
             ) -> tuple[CachingPolicy, KktCertificate, float]:
    """Maximize the interference-limited SDP over feasible caching matrices.

    Tier budgets must satisfy 0 < Q_i < M except for the degenerate values
    Q_i = 0 (row pinned to zeros) and Q_i = M (row pinned to ones), which are
    held fixed and excluded from the optimization.  Returns the policy, its
    KKT certificate and the achieved SDP; on non-convergence the best iterate
    is returned and the certificate simply fails (accepted == False).
    """
    config.check_cache_sizes(catalog)
    if np.any(catalog.popularity <= 0):
        # The fixed point is undefined for zero-demand contents.
        raise ValueError("solve_p1 requires strictly positive popularity")
    if options.method == "block-kkt":
        probs = _solve_block_kkt(config, catalog, options)
    else:
        probs = _solve_projected_gradient(config, catalog, options)
    policy = CachingPolicy(probs)
    cert = kkt_certificate(config, catalog, policy, options.bisection_tol)
    achieved = _objective(objective_constants(config, catalog), probs)
    return policy, cert, achieved


def achieved_sdp(config: NetworkConfig, catalog: ContentCatalog,
                 policy: CachingPolicy) -> float:
    """Interference-limited SDP of a policy (same value the solver maximizes)."""
    return total_sdp_interference_limited(config, catalog, policy).total

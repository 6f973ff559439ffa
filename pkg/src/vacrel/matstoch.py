"""Dense primitives for finite-state Markov models.

Kronecker products and sums, matrix exponentials of generator matrices by
uniformization, the time integral of the exponential, and stationary
vectors of irreducible generators. Everything here is plain dense numpy;
the state spaces this package builds stay well under a few hundred states.
"""

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

# Poisson mass below this level is dropped from uniformization windows.
POISSON_TAIL = 1e-13


def kron(a, b):
    """Kronecker product of two matrices (thin wrapper over numpy)."""
    return np.kron(np.asarray(a, float), np.asarray(b, float))


def kron_sum(a, b):
    """Kronecker sum a ⊗ I + I ⊗ b of two square matrices.

    The generator of two independent Markov components run jointly.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("kron_sum: first operand is not square")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("kron_sum: second operand is not square")
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def is_generator(q, tol=1e-12):
    """True if q has nonnegative off-diagonals and zero row sums within tol."""
    q = np.asarray(q, float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        return False
    off = q - np.diag(np.diag(q))
    if off.min(initial=0.0) < -tol:
        return False
    return np.abs(q.sum(axis=1)).max() <= tol


def is_subgenerator(q, tol=1e-12):
    """True if q is a valid transient block: nonneg off-diagonal, negative
    diagonal, row sums <= 0, and nonsingular."""
    q = np.asarray(q, float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        return False
    off = q - np.diag(np.diag(q))
    if off.min(initial=0.0) < -tol or np.diag(q).max() >= 0:
        return False
    if q.sum(axis=1).max() > tol:
        return False
    return np.linalg.matrix_rank(q) == q.shape[0]


def _poisson_tail_bound(mu, tail, upper):
    """Window edge from geometric-series bounds on the Poisson pmf.

    Fallback for extreme mu/tail combinations where scipy's quantile
    functions return NaN. The bounds overestimate both tails, so the
    resulting window is only ever wider than needed.
    """
    log_tail = np.log(tail)
    step = max(1, int(np.sqrt(mu)))
    k = int(mu)
    if upper:
        while True:
            k += step
            logp = k * np.log(mu) - mu - gammaln(k + 1)
            if logp + np.log((k + 1.0) / (k + 1.0 - mu)) < log_tail:
                return k
    while k > 0:
        k -= step
        if k <= 0:
            return 0
        logp = k * np.log(mu) - mu - gammaln(k + 1)
        if logp - np.log1p(-k / mu) < log_tail:
            return k
    return 0


def _poisson_window(mu, tail):
    """Index range and renormalized weights of a Poisson(mu) mass window.

    Returns (k_lo, weights) with weights covering all mass except at most
    `tail` in each truncated end.
    """
    if mu <= 0.0:
        return 0, np.array([1.0])
    lo = poisson.ppf(tail, mu)
    hi = poisson.isf(tail, mu)
    if not np.isfinite(lo):
        lo = _poisson_tail_bound(mu, tail, upper=False)
    if not np.isfinite(hi):
        hi = _poisson_tail_bound(mu, tail, upper=True)
    k_lo = int(max(lo - 1, 0))
    k_hi = max(int(hi + 1), k_lo + 1)
    ks = np.arange(k_lo, k_hi + 1)
    logw = ks * np.log(mu) - mu - gammaln(ks + 1)
    w = np.exp(logw)
    return k_lo, w / w.sum()


def _poisson_mixture(p, rate_time, tail):
    """Sum of Poisson(rate_time)-weighted powers of p over a mass window."""
    k_lo, w = _poisson_window(rate_time, tail)
    term = np.linalg.matrix_power(p, k_lo)
    acc = w[0] * term
    for wk in w[1:]:
        term = term @ p
        acc += wk * term
    return acc


def expm_generator(q, t, tail=POISSON_TAIL):
    """exp(q t) for a generator or subgenerator q, by uniformization.

    Parameters
    ----------
    q : array_like
        Square matrix with nonnegative off-diagonal entries and row sums
        <= 0 (zero for a proper generator).
    t : float
        Nonnegative time.
    tail : float
        Poisson truncation level.

    Returns
    -------
    ndarray
        The transition kernel exp(q t). For a proper generator the rows
        sum to 1 up to roundoff; uniformization never produces negative
        entries.
    """
    q = np.asarray(q, float)
    if t < 0:
        raise ValueError("expm_generator: negative time")
    n = q.shape[0]
    rate = max(-q.diagonal().min(), 0.0)
    if rate * t == 0.0:
        return np.eye(n)
    p = np.eye(n) + q / rate
    return _poisson_mixture(p, rate * t, tail)


def expm_integral(q, t, tail=POISSON_TAIL):
    """Integral of exp(q u) for u from 0 to t.

    Exponentiates the doubled block matrix [[q, I], [0, 0]] and reads the
    upper-right block. That augmented matrix still has nonnegative
    off-diagonal entries, so the same cancellation-free Poisson mixture
    applies to it.

    Returns
    -------
    ndarray
        M(t) with M'(t) = exp(q t) and M(0) = 0. For a proper generator
        the rows of M(t) sum to t.
    """
    q = np.asarray(q, float)
    if t < 0:
        raise ValueError("expm_integral: negative time")
    n = q.shape[0]
    rate = max(-q.diagonal().min(), 0.0)
    if t == 0.0:
        return np.zeros((n, n))
    if rate == 0.0:
        return t * np.eye(n)
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = q
    aug[:n, n:] = np.eye(n)
    p = np.eye(2 * n) + aug / rate
    # The augmented powers grow like k/rate in the upper-right block, so
    # push the truncation level down with the horizon.
    full = _poisson_mixture(p, rate * t, tail / (1.0 + t))
    return full[:n, n:]


def stationary_vector(q):
    """Stationary probability vector of an irreducible generator.

    Solves x q = 0, x e = 1 by replacing the last column of q with ones
    and solving against the last unit basis vector.
    """
    q = np.asarray(q, float)
    n = q.shape[0]
    m = q.copy()
    m[:, -1] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        x = np.linalg.solve(m.T, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("stationary_vector: singular system, "
                         "generator looks reducible") from exc
    if x.min() < -1e-10:
        raise ValueError("stationary_vector: negative mass, "
                         "generator looks reducible")
    x = np.clip(x, 0.0, None)
    return x / x.sum()

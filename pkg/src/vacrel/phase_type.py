"""Phase-type distributions: validation, distribution functions, moments,
and exact sampling by phase jumps."""

from dataclasses import dataclass, field

import numpy as np

from .matstoch import expm_generator


@dataclass(frozen=True)
class PhaseType:
    """Absorption-time distribution of a finite transient Markov chain.

    Parameters
    ----------
    alpha : array_like
        Initial phase probabilities (full mass on transient phases).
    subgen : array_like
        Transient generator block. Its exit rates are -subgen @ e.
    """

    alpha: np.ndarray
    subgen: np.ndarray

    def __init__(self, alpha, subgen):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(alpha, float)))
        object.__setattr__(self, "subgen", np.atleast_2d(np.asarray(subgen, float)))

    @property
    def order(self):
        return self.alpha.size

    @property
    def exit_rates(self):
        """Absorption rate from each phase."""
        return -self.subgen @ np.ones(self.order)

    def validate(self):
        """Collect invariant violations; empty list means valid."""
        problems = []
        a, s = self.alpha, self.subgen
        if s.shape != (a.size, a.size):
            problems.append(f"subgen shape {s.shape} does not match "
                            f"{a.size} initial probabilities")
            return problems
        if a.min() < 0:
            problems.append(f"negative initial probability at index {int(a.argmin())}")
        if abs(a.sum() - 1.0) > 1e-12:
            problems.append(f"initial probabilities sum to {a.sum():.6g}, not 1")
        off = s - np.diag(np.diag(s))
        if off.min(initial=0.0) < 0:
            i, j = np.unravel_index((off - np.diag(np.diag(off))).argmin(), s.shape)
            problems.append(f"negative off-diagonal rate at ({i},{j})")
        if np.diag(s).max() >= 0:
            problems.append(f"nonnegative diagonal at index {int(np.diag(s).argmax())}")
        exits = -s @ np.ones(a.size)
        if exits.min() < -1e-12:
            problems.append(f"negative exit rate at phase {int(exits.argmin())}")
        if np.linalg.matrix_rank(s) < a.size:
            problems.append("singular transient block (absorption not certain)")
        return problems

    def require_valid(self):
        problems = self.validate()
        if problems:
            raise ValueError("invalid phase-type: " + "; ".join(problems))

    def cdf(self, t):
        """P(absorption time <= t). Accepts a scalar or an array of times."""
        t = np.asarray(t, float)
        if t.ndim == 0:
            if t < 0:
                raise ValueError("cdf: negative time")
            surv = self.alpha @ expm_generator(self.subgen, float(t)) @ np.ones(self.order)
            return float(1.0 - surv)
        return np.array([self.cdf(float(x)) for x in t])

    def pdf(self, t):
        """Density alpha exp(subgen t) exit_rates."""
        if t < 0:
            raise ValueError("pdf: negative time")
        return float(self.alpha @ expm_generator(self.subgen, float(t)) @ self.exit_rates)

    def mean(self):
        """Expected absorption time alpha (-subgen)^-1 e."""
        return float(self.alpha @ np.linalg.solve(-self.subgen, np.ones(self.order)))

    def sample(self, rng, size=None):
        """Draw absorption times by simulating the phase jumps.

        Parameters
        ----------
        rng : numpy.random.Generator
            Exclusively owned random stream.
        size : int, optional
            Number of draws; a scalar is returned when omitted.
        """
        hold = -np.diag(self.subgen)
        jump = self.subgen - np.diag(np.diag(self.subgen))
        # Per-phase outcome law: transient targets first, absorption last.
        probs = np.hstack([jump, self.exit_rates[:, None]]) / hold[:, None]
        cum = np.cumsum(probs, axis=1)
        n = 1 if size is None else int(size)
        out = np.empty(n)
        for k in range(n):
            phase = int(rng.choice(self.order, p=self.alpha))
            total = 0.0
            while phase >= 0:
                total += rng.exponential(1.0 / hold[phase])
                nxt = int(np.searchsorted(cum[phase], rng.random(), side="right"))
                phase = nxt if nxt < self.order else -1
            out[k] = total
        return float(out[0]) if size is None else out


def exponential_ph(rate):
    """Single-phase representation of an exponential distribution."""
    if rate <= 0:
        raise ValueError("exponential_ph: rate must be positive")
    return PhaseType([1.0], [[-rate]])

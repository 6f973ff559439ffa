"""Transient and stationary analysis of an assembled model.

Everything here works on the labelled-matrix form produced by
:func:`vacrel.mmap.assemble`. Distributions are row vectors over the
flattened state space; occupancies are time-integrated distributions, so
their entries sum to the elapsed horizon.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .matstoch import expm_generator, expm_integral, stationary_vector
from .mmap import EVENT_FAMILIES
from .phase_type import PhaseType

# Centralized numeric bars: residual and route-agreement for the long-run
# solve, and how exactly a transient distribution must stay normalized.
CROSS_CHECK_TOL = 1e-10
NORMALIZATION_TOL = 1e-9


def _resolve_events(mmap, events):
    """Accept a family name, a single label, or an explicit label list."""
    if isinstance(events, str):
        if events in EVENT_FAMILIES:
            return [e for e in EVENT_FAMILIES[events] if e in mmap.by_event]
        if events in mmap.by_event:
            return [events]
        raise KeyError(f"unknown event or family {events!r}")
    return list(events)


def event_intensity(mmap, dist, events):
    """Rate of the chosen events per unit time under distribution ``dist``."""
    mat = mmap.event_sum(_resolve_events(mmap, events))
    return float(np.asarray(dist) @ mat @ np.ones(mmap.dim))


def availability(mmap, dist):
    """Probability mass on the operational macro-states."""
    dist = np.asarray(dist, float)
    return float(sum(dist[mmap.layout[l].sl].sum()
                     for l in mmap.layout.operational))


def transient_distribution(mmap, t, theta=None):
    if theta is None:
        from .mmap import initial_distribution
        theta = initial_distribution(mmap.spec, mmap.layout)
    return np.asarray(theta, float) @ expm_generator(mmap.generator, t)


@dataclass(frozen=True)
class TransientSweep:
    """Distributions and occupancies along an increasing time grid."""

    mmap: "object"
    times: np.ndarray
    dists: np.ndarray
    occupancies: np.ndarray

    def availability(self):
        return np.array([availability(self.mmap, d) for d in self.dists])

    def intensity(self, events):
        mat = self.mmap.event_sum(_resolve_events(self.mmap, events))
        return self.dists @ mat @ np.ones(self.mmap.dim)

    def mean_counts(self, events):
        """Expected number of the chosen events on [0, t] for each grid t."""
        mat = self.mmap.event_sum(_resolve_events(self.mmap, events))
        return self.occupancies @ mat @ np.ones(self.mmap.dim)


def sweep(mmap, times, theta=None):
    """Walk an increasing time grid, accumulating exact step solutions.

    Each step advances by the time difference only, so a long grid costs
    one propagator and one integral per interval instead of per endpoint.
    """
    times = np.atleast_1d(np.asarray(times, float))
    if times.size and (np.diff(times) < 0).any():
        raise ValueError("time grid must be nondecreasing")
    if times.size and times[0] < 0:
        raise ValueError("time grid must be nonnegative")
    if theta is None:
        from .mmap import initial_distribution
        theta = initial_distribution(mmap.spec, mmap.layout)
    dist = np.asarray(theta, float).copy()
    occ = np.zeros(mmap.dim)
    prev = 0.0
    dists, occs = [], []
    for t in times:
        dt = t - prev
        if dt > 0:
            occ = occ + dist @ expm_integral(mmap.generator, dt)
            dist = dist @ expm_generator(mmap.generator, dt)
            prev = t
        dists.append(dist.copy())
        occs.append(occ.copy())
    return TransientSweep(mmap, times, np.array(dists), np.array(occs))


def occupancy(mmap, t, theta=None):
    """Expected time spent in each state on [0, t], as a row vector."""
    if theta is None:
        from .mmap import initial_distribution
        theta = initial_distribution(mmap.spec, mmap.layout)
    return np.asarray(theta, float) @ expm_integral(mmap.generator, t)


def mean_counts(mmap, t, events, theta=None):
    mat = mmap.event_sum(_resolve_events(mmap, events))
    return float(occupancy(mmap, t, theta) @ mat @ np.ones(mmap.dim))


def closed_form_occupancy_integral(generator, t):
    """Integral of the transition function in closed form.

    Valid for an irreducible generator: subtracting the rank-one limit
    makes the shifted generator invertible. Kept as an independent route
    for cross-checking the series-based integral.
    """
    generator = np.asarray(generator, float)
    n = generator.shape[0]
    pi = stationary_vector(generator)
    limit = np.outer(np.ones(n), pi)
    shifted = generator - limit
    return (expm_generator(generator, t) - np.eye(n) - t * limit) @ np.linalg.inv(shifted)


@dataclass(frozen=True)
class StationaryResult:
    """Long-run distribution with its block decomposition.

    Besides the full vector this keeps everything the block solver built:
    the per-macro sub-vectors, the matrices expressing each block through
    the first one, the pairwise elimination ratios, and the closed first
    block both before and after the normalization column is swapped in.
    """

    pi: np.ndarray
    macro_masses: dict
    availability: float
    pi_by_macro: dict = field(repr=False, default=None)
    reduction_matrices: list = field(repr=False, default=None)
    ratio_matrices: dict = field(repr=False, default=None)
    boundary_block: np.ndarray = field(repr=False, default=None)
    boundary_system: np.ndarray = field(repr=False, default=None)

    def intensity(self, mmap, events):
        return event_intensity(mmap, self.pi, events)


def stationary(mmap, tol=CROSS_CHECK_TOL):
    """Long-run distribution via block reduction, cross-checked globally.

    The block route expresses every macro-state's share through the first
    one, then closes the balance on the first block alone. The result must
    agree with a direct full-size solve to ``tol`` in the max norm; a gap
    means at least one route is wrong, so it raises instead of choosing.
    """
    layout = mmap.layout
    gen = mmap.generator
    n = len(layout.macro_states)
    block = [[gen[layout.macro_states[i].sl, layout.macro_states[j].sl]
              for j in range(n)] for i in range(n)]

    def ratio(j, k):
        # -block[j][k] @ inv(block[k][k]) without forming the inverse
        try:
            return np.linalg.solve(block[k][k].T, -block[j][k].T).T
        except np.linalg.LinAlgError as exc:
            label = layout.macro_states[k].label
            raise RuntimeError(
                f"diagonal block for macro-state {label!r} is singular; "
                f"the chain cannot leave it, so the block reduction has no "
                f"solution") from exc

    ratios = {(j, k): ratio(j, k) for k in range(1, n) for j in range(k)}
    reduction = [None] * n
    for k in range(1, n):
        r = ratios[(0, k)]
        for j in range(1, k):
            r = r + reduction[j] @ ratios[(j, k)]
        reduction[k] = r

    first = layout.macro_states[0].size
    boundary = block[0][0].copy()
    norm_col = np.ones(first)
    for a in range(1, n):
        boundary += reduction[a] @ block[a][0]
        norm_col += reduction[a] @ np.ones(layout.macro_states[a].size)
    closure = boundary.copy()
    closure[:, -1] = norm_col
    rhs = np.zeros(first)
    rhs[-1] = 1.0
    pi_first = np.linalg.solve(closure.T, rhs)

    pi = np.zeros(mmap.dim)
    pi[layout.macro_states[0].sl] = pi_first
    for a in range(1, n):
        pi[layout.macro_states[a].sl] = pi_first @ reduction[a]

    direct = stationary_vector(gen)
    gap = np.abs(pi - direct).max()
    if gap > tol:
        raise RuntimeError(f"block and direct stationary solutions differ by "
                           f"{gap:.3g} (tolerance {tol:g})")
    if pi.min() < -1e-12:
        raise RuntimeError("block stationary solution has negative mass")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()

    return StationaryResult(
        pi=pi,
        macro_masses={lab: float(pi[layout[lab].sl].sum())
                      for lab in layout.labels},
        availability=availability(mmap, pi),
        pi_by_macro={lab: pi[layout[lab].sl].copy() for lab in layout.labels},
        reduction_matrices=reduction,
        ratio_matrices=ratios,
        boundary_block=boundary,
        boundary_system=closure,
    )


def reliability_model(mmap):
    """Absorbing restriction to the operational states.

    Keeps unmarked motion and plain vacation returns inside the working
    region; any failure, repair entry, or maintenance entry absorbs. The
    destructive-failure replacement path leaves and re-enters the region,
    so it counts as absorption and stays excluded.
    """
    layout = mmap.layout
    keep = np.concatenate([np.arange(layout[l].sl.start, layout[l].sl.stop)
                           for l in layout.operational])
    from .mmap import initial_distribution
    theta = initial_distribution(mmap.spec, layout)[keep]
    total = theta.sum()
    if total <= 0:
        raise ValueError("initial distribution has no operational mass")
    inside = (mmap.by_event["O"] + mmap.by_event["I"])[np.ix_(keep, keep)]
    return PhaseType(theta / total, inside)


def reliability(mmap, t):
    """Probability the first failure or service entry happens after ``t``."""
    return 1.0 - reliability_model(mmap).cdf(t)


def _event_column(events):
    if isinstance(events, str):
        return f"mn_{events.lower()}"
    return "mn_" + "_".join(str(e).lower() for e in events)


def write_measures_csv(mmap, times, fileobj, count_events=None, theta=None):
    """Write the transient dashboard as CSV, one row per time point.

    Columns are t, availability, reliability, rocof_rf, rocof_nrf, then a
    mean-count column per entry of ``count_events`` (family names, single
    labels, or label lists). The default covers every family the variant
    supports.
    """
    if count_events is None:
        count_events = [name for name, members in EVENT_FAMILIES.items()
                        if any(e in mmap.by_event for e in members)]
    path = sweep(mmap, times, theta=theta)
    columns = [np.asarray(times, float),
               path.availability(),
               reliability(mmap, np.asarray(times, float)),
               path.intensity("RF"),
               path.intensity("NRF")]
    columns += [path.mean_counts(ev) for ev in count_events]
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["t", "availability", "reliability", "rocof_rf", "rocof_nrf"]
                    + [_event_column(ev) for ev in count_events])
    for row in np.column_stack(columns):
        writer.writerow([repr(float(x)) for x in row])

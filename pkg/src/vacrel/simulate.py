"""Discrete-event simulation of the maintained system.

This is an independent implementation of the system mechanics, written
against the rules of operation rather than the assembled matrices: each
composite situation exposes a set of competing exponential clocks built
directly from the wear, shock, vacation and service parameters. It exists
to cross-check the analytic pipeline, so it must never import from or
depend on the generator assembly.

Estimates come from batch means over a single long run after a warmup,
which gives a serviceable standard error without independence games.
"""

import csv
from bisect import bisect_right
from dataclasses import dataclass
from math import log

import numpy as np

from .matstoch import stationary_vector
from .model import NO_PM_LABELS, PM, PM_LABELS

# Modes of the simulated system.
_OP_AWAY = 0      # unit working, repairperson on vacation
_OP_IDLE = 1      # unit working at the middle level, repairperson present
_WAIT_RF = 2      # repairable failure, repairperson still away
_WAIT_NRF = 3     # destructive failure, repairperson still away
_REPAIR = 4
_MAINTAIN = 5

# Family bookkeeping: event label -> indices into the counters.
FAMILIES = ("RF", "NRF", "CR", "PM", "NU", "I")
_LABEL_FAMILIES = {
    "RF": ("RF",),
    "RF_CR": ("RF", "CR"),
    "NRF": ("NRF",),
    "NRF_NU": ("NRF", "NU"),
    "I": ("I",),
    "I_CR": ("I", "CR"),
    "I_NU": ("I", "NU"),
    "PM": ("PM",),
    "I_PM": ("I", "PM"),
}


class _Uniforms:
    """Pre-drawn uniforms handed out one at a time."""

    def __init__(self, rng, chunk=1 << 14):
        self._rng = rng
        self._chunk = chunk
        self._buf = rng.random(chunk)
        self._pos = 0

    def next(self):
        if self._pos == self._chunk:
            self._buf = self._rng.random(self._chunk)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def next_positive(self):
        # Holding times must be strictly positive so no two events share a
        # clock reading; a zero uniform would break that, so redraw.
        u = self.next()
        while u == 0.0:
            u = self.next()
        return u


def _cumulative(weights):
    cum = np.cumsum(np.asarray(weights, float))
    return cum, float(cum[-1])


def _pick(cum, total, u):
    return bisect_right(cum, u * total)


@dataclass(frozen=True)
class SimulationEstimates:
    """Batch-mean point estimates with standard errors.

    Each estimate is a (mean, standard error) pair; ``occupancy`` maps the
    composite situation labels to the long-run share of time spent there,
    and ``events`` holds the raw measured counts per family.
    """

    horizon: float
    warmup: float
    batches: int
    replications: int
    availability: tuple
    occupancy: dict
    rates: dict
    events: dict

    def rate(self, family):
        return self.rates[family]


def _off_diagonal(mat, i):
    """Destinations and rates out of state i, skipping the diagonal."""
    row = mat[i]
    dests = [j for j in range(len(row)) if j != i and row[j] > 0]
    return dests, [row[j] for j in dests]


class _Mechanics:
    """Competing-clock tables derived from the primitive parameters."""

    def __init__(self, spec):
        spec.require_valid()
        self.spec = spec
        self.pm = spec.variant == PM
        deg = spec.degradation
        self.wear = deg.ph.subgen
        self.wear_rf = deg.rep_rates
        self.wear_nrf = deg.nonrep_rates
        self.level_of = np.concatenate([
            np.full(size, lv) for lv, size in enumerate(deg.level_sizes)])
        self.start_cum, start_total = _cumulative(deg.level_start(0))
        if abs(start_total - 1.0) > 1e-9:
            raise ValueError("fresh units must start at the lowest level")
        self.start_total = start_total

        shock = spec.shock
        self.shock_gen = shock.ph.subgen
        self.shock_rf = shock.rep_rates
        self.shock_nrf = shock.nonrep_rates
        self.shock_restart_cum, self.shock_restart_total = _cumulative(shock.ph.alpha)
        self.shock_steady_cum, self.shock_steady_total = _cumulative(
            stationary_vector(shock.renewal_generator()))

        vac = spec.vacation
        self.vac_gen = vac.subgen
        self.vac_end = vac.exit_rates
        self.vac_start_cum, self.vac_start_total = _cumulative(vac.alpha)

        self.cr_gen = spec.corrective.subgen
        self.cr_done = spec.corrective.exit_rates
        self.cr_start_cum, self.cr_start_total = _cumulative(spec.corrective.alpha)
        if self.pm:
            self.pm_gen = spec.preventive.subgen
            self.pm_done = spec.preventive.exit_rates
            self.pm_start_cum, self.pm_start_total = _cumulative(
                spec.preventive.alpha)

        # Occupancy bookkeeping: which reporting slot each situation uses.
        if self.pm:
            self.labels = PM_LABELS
            self.away_slot = (0, 1, 3)
            self.mode_slot = {_OP_IDLE: 2, _WAIT_RF: 4, _WAIT_NRF: 5,
                              _MAINTAIN: 6, _REPAIR: 7}
            self.operational_slots = (0, 1, 2, 3)
        else:
            self.labels = NO_PM_LABELS
            self.away_slot = (0, 1)
            self.mode_slot = {_OP_IDLE: 2, _WAIT_RF: 3, _WAIT_NRF: 4,
                              _REPAIR: 5}
            self.operational_slots = (0, 1, 2)

        self._tables = {}

    # Each table row is (cumulative rates, total rate, actions); an action
    # is a short tuple interpreted by _apply.

    def table(self, mode, a, b, c):
        key = (mode, a, b, c)
        row = self._tables.get(key)
        if row is None:
            row = self._build(mode, a, b, c)
            self._tables[key] = row
        return row

    def _build(self, mode, a, b, c):
        rates, actions = [], []

        def add(rate, action):
            if rate > 0:
                rates.append(rate)
                actions.append(action)

        if mode in (_OP_AWAY, _OP_IDLE):
            d, s = a, b
            for j, r in zip(*_off_diagonal(self.wear, d)):
                add(r, ("wear", j))
            add(self.wear_rf[d], ("fail_rf", False))
            add(self.wear_nrf[d], ("fail_nrf", False))
            for j, r in zip(*_off_diagonal(self.shock_gen, s)):
                add(r, ("shock", j))
            add(self.shock_rf[s], ("fail_rf", True))
            add(self.shock_nrf[s], ("fail_nrf", True))
            if mode == _OP_AWAY:
                w = c
                for j, r in zip(*_off_diagonal(self.vac_gen, w)):
                    add(r, ("vac", j))
                add(self.vac_end[w], ("return",))
        elif mode in (_WAIT_RF, _WAIT_NRF):
            s, w = a, b
            for j, r in zip(*_off_diagonal(self.shock_gen, s)):
                add(r, ("shock", j))
            add(self.shock_rf[s] + self.shock_nrf[s], ("shock_renew",))
            for j, r in zip(*_off_diagonal(self.vac_gen, w)):
                add(r, ("vac", j))
            add(self.vac_end[w], ("return",))
        else:
            s, m = a, b
            gen = self.cr_gen if mode == _REPAIR else self.pm_gen
            done = self.cr_done if mode == _REPAIR else self.pm_done
            for j, r in zip(*_off_diagonal(self.shock_gen, s)):
                add(r, ("shock", j))
            add(self.shock_rf[s] + self.shock_nrf[s], ("shock_renew",))
            for j, r in zip(*_off_diagonal(gen, m)):
                add(r, ("service", j))
            add(done[m], ("service_done",))
        cum, total = _cumulative(rates)
        return cum, total, tuple(actions)


class _System:
    """Mutable simulation state plus the prose transition rules."""

    def __init__(self, mech, uni):
        self.mech = mech
        self.uni = uni
        self.mode = _OP_AWAY
        self.deg = _pick(mech.start_cum, mech.start_total, uni.next())
        self.shock = _pick(mech.shock_steady_cum, mech.shock_steady_total,
                           uni.next())
        self.aux = _pick(mech.vac_start_cum, mech.vac_start_total, uni.next())
        # aux holds the vacation phase while the repairperson is away and
        # the service phase during repair or maintenance; it is unused and
        # pinned to 0 while the repairperson idles at the workplace.

    def clocks(self):
        m = self.mech
        if self.mode in (_OP_AWAY, _OP_IDLE):
            return m.table(self.mode, self.deg, self.shock,
                           self.aux if self.mode == _OP_AWAY else 0)
        if self.mode in (_WAIT_RF, _WAIT_NRF):
            return m.table(self.mode, self.shock, self.aux, 0)
        return m.table(self.mode, self.shock, self.aux, 0)

    def macro_slot(self):
        m = self.mech
        if self.mode == _OP_AWAY:
            return m.away_slot[m.level_of[self.deg]]
        return m.mode_slot[self.mode]

    def _fresh_unit(self):
        self.deg = _pick(self.mech.start_cum, self.mech.start_total,
                         self.uni.next())

    def _new_vacation(self):
        self.aux = _pick(self.mech.vac_start_cum, self.mech.vac_start_total,
                         self.uni.next())

    def _renew_shock(self):
        self.shock = _pick(self.mech.shock_restart_cum,
                           self.mech.shock_restart_total, self.uni.next())

    def _start_repair(self):
        self.mode = _REPAIR
        self.aux = _pick(self.mech.cr_start_cum, self.mech.cr_start_total,
                         self.uni.next())

    def _start_maintenance(self):
        self.mode = _MAINTAIN
        self.aux = _pick(self.mech.pm_start_cum, self.mech.pm_start_total,
                         self.uni.next())

    def apply(self, action):
        """Execute one action; returns the event label or None."""
        mech = self.mech
        kind = action[0]
        if kind == "shock":
            self.shock = action[1]
            return "O"
        if kind == "vac":
            self.aux = action[1]
            return "O"
        if kind == "service":
            self.aux = action[1]
            return "O"
        if kind == "shock_renew":
            self._renew_shock()
            return "O"

        if kind == "wear":
            self.deg = action[1]
            if (self.mode == _OP_IDLE and mech.pm
                    and mech.level_of[self.deg] == 2):
                # The attending repairperson sees the unit reach the worst
                # operational level and pulls it in for maintenance.
                self._start_maintenance()
                return "PM"
            return "O"

        if kind == "fail_rf":
            if action[1]:
                self._renew_shock()
            if self.mode == _OP_IDLE:
                self._start_repair()
                return "RF_CR"
            self.mode = _WAIT_RF
            return "RF"

        if kind == "fail_nrf":
            if action[1]:
                self._renew_shock()
            if self.mode == _OP_IDLE:
                self._fresh_unit()
                self._new_vacation()
                self.mode = _OP_AWAY
                return "NRF_NU"
            self.mode = _WAIT_NRF
            return "NRF"

        if kind == "return":
            if self.mode == _OP_AWAY:
                lv = mech.level_of[self.deg]
                if lv == 0:
                    self._new_vacation()
                    return "I"
                if lv == 1:
                    self.mode = _OP_IDLE
                    self.aux = 0
                    return "I"
                self._start_maintenance()
                return "I_PM"
            if self.mode == _WAIT_RF:
                self._start_repair()
                return "I_CR"
            self._fresh_unit()
            self._new_vacation()
            self.mode = _OP_AWAY
            return "I_NU"

        if kind == "service_done":
            self._fresh_unit()
            self._new_vacation()
            self.mode = _OP_AWAY
            return "O"
        raise AssertionError(f"unhandled action {action!r}")


def _run_once(mech, horizon, warmup, batches, rng):
    """One warmed-up run; returns per-batch occupancy times and counts."""
    uni = _Uniforms(rng)
    system = _System(mech, uni)
    batch_len = horizon / batches
    occ = np.zeros((len(mech.labels), batches))
    counts = {f: np.zeros(batches) for f in FAMILIES}

    now = -warmup
    batch = 0
    while batch < batches:
        cum, total, actions = system.clocks()
        if total <= 0:
            raise RuntimeError("simulation reached a dead state")
        dt = -log(1.0 - uni.next_positive()) / total
        slot = system.macro_slot()
        target = now + dt
        # Spread the holding time over the batches it covers.
        while now < target:
            if now < 0:
                seg_end = min(0.0, target)
            else:
                seg_end = min((batch + 1) * batch_len, target)
                occ[slot, batch] += seg_end - now
            now = seg_end
            if now >= 0 and batch < batches and now >= (batch + 1) * batch_len:
                batch += 1
                if batch == batches:
                    break
        if batch == batches:
            break
        label = system.apply(actions[_pick(cum, total, uni.next())])
        if now >= 0 and label != "O":
            for fam in _LABEL_FAMILIES[label]:
                counts[fam][batch] += 1
    return occ, counts


def simulate(spec, horizon, *, warmup=1000.0, batches=50, replications=1,
             seed=None, rng=None):
    """Estimate long-run availability, occupancies and event-family rates.

    Parameters
    ----------
    spec : SystemSpec
    horizon : float
        Measured simulation time per replication, excluding the warmup.
    warmup : float
        Burn-in discarded before measuring.
    batches : int
        Number of equal batches each replication splits into; standard
        errors come from the spread across all batches.
    replications : int
        Independent warmed-up runs whose batch means are pooled.
    seed : int or numpy.random.SeedSequence, optional
        Convenience alternative to passing a generator.
    rng : numpy.random.Generator, optional
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if batches < 2:
        raise ValueError("need at least two batches")
    if replications < 1:
        raise ValueError("need at least one replication")
    mech = _Mechanics(spec)
    if replications == 1:
        rngs = [rng if rng is not None else np.random.default_rng(seed)]
    elif rng is not None:
        rngs = rng.spawn(replications)
    else:
        rngs = [np.random.default_rng(s)
                for s in np.random.SeedSequence(seed).spawn(replications)]

    occ_parts, count_parts = [], []
    for stream in rngs:
        occ, counts = _run_once(mech, horizon, warmup, batches, stream)
        occ_parts.append(occ)
        count_parts.append(counts)
    occ = np.concatenate(occ_parts, axis=1)
    counts = {f: np.concatenate([c[f] for c in count_parts]) for f in FAMILIES}
    pooled = occ.shape[1]
    batch_len = horizon / batches

    def summarize(values):
        mean = float(values.mean())
        se = float(values.std(ddof=1) / np.sqrt(pooled))
        return mean, se

    shares = occ / batch_len
    rates = {f: summarize(counts[f] / batch_len) for f in FAMILIES
             if mech.pm or f != "PM"}
    return SimulationEstimates(
        horizon=float(horizon), warmup=float(warmup), batches=int(batches),
        replications=int(replications),
        availability=summarize(shares[list(mech.operational_slots)].sum(axis=0)),
        occupancy={lab: summarize(shares[i])
                   for i, lab in enumerate(mech.labels)},
        rates=rates,
        events={f: float(counts[f].sum()) for f in counts},
    )


def write_estimates_csv(estimates, fileobj):
    """Dump estimates as CSV rows of (quantity, estimate, std_error)."""
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["quantity", "estimate", "std_error"])
    mean, se = estimates.availability
    writer.writerow(["availability", repr(mean), repr(se)])
    for lab, (mean, se) in estimates.occupancy.items():
        writer.writerow([f"occupancy_{lab}", repr(mean), repr(se)])
    for fam, (mean, se) in estimates.rates.items():
        writer.writerow([f"rate_{fam.lower()}", repr(mean), repr(se)])

"""Declarative system specifications and the macro-state layout.

A system couples a multi-level internal degradation process, an external
shock process, a single repairperson with a vacation policy, and one or two
repair facilities (corrective repair, and preventive maintenance in the
three-level variant).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .phase_type import PhaseType

NO_PM = "nopm"
PM = "pm"

# Macro-state label sequences, in the fixed layout order.
NO_PM_LABELS = ("minor_vac", "middle_vac", "middle_idle",
                "rf_wait", "nrf_wait", "repair")
PM_LABELS = ("minor_vac", "middle_vac", "middle_idle", "major_vac",
             "rf_wait", "nrf_wait", "maintenance", "repair")


@dataclass(frozen=True)
class DegradationModel:
    """Internal wear process with its level partition and failure exits.

    Parameters
    ----------
    ph : PhaseType
        Operational-time distribution; its transient block drives the
        internal state while the unit works.
    level_sizes : tuple of int
        Number of internal states in each degradation level, ordered from
        least to most degraded. Two levels for the no-maintenance variant,
        three for the maintenance variant.
    rep_rates : array_like
        Per-state rates of internal failures that can be repaired.
    nonrep_rates : array_like
        Per-state rates of internal failures that destroy the unit.
    """

    ph: PhaseType
    level_sizes: tuple
    rep_rates: np.ndarray
    nonrep_rates: np.ndarray

    def __init__(self, ph, level_sizes, rep_rates, nonrep_rates):
        object.__setattr__(self, "ph", ph)
        object.__setattr__(self, "level_sizes", tuple(int(s) for s in level_sizes))
        object.__setattr__(self, "rep_rates", np.asarray(rep_rates, float))
        object.__setattr__(self, "nonrep_rates", np.asarray(nonrep_rates, float))

    @property
    def order(self):
        return self.ph.order

    def level_slices(self):
        """Index ranges of the levels inside the internal state space."""
        offs = np.concatenate([[0], np.cumsum(self.level_sizes)]).astype(int)
        return [slice(offs[i], offs[i + 1]) for i in range(len(self.level_sizes))]

    def level_start(self, level):
        """Initial probabilities restricted to one level (unnormalized,
        exactly as written in the restart blocks)."""
        return self.ph.alpha[self.level_slices()[level]]

    def validate(self):
        problems = [f"degradation ph: {p}" for p in self.ph.validate()]
        n = self.order
        if sum(self.level_sizes) != n:
            problems.append(f"level sizes {self.level_sizes} do not sum to {n}")
            return problems
        if any(s < 1 for s in self.level_sizes):
            problems.append("every degradation level needs at least one state")
        for vec, name in ((self.rep_rates, "rep_rates"),
                          (self.nonrep_rates, "nonrep_rates")):
            if vec.shape != (n,):
                problems.append(f"{name} has length {vec.size}, expected {n}")
                return problems
            if vec.min() < 0:
                problems.append(f"{name} negative at state {int(vec.argmin())}")
        resid = self.rep_rates + self.nonrep_rates + self.ph.subgen @ np.ones(n)
        bad = np.abs(resid) > 1e-12
        if bad.any():
            row = int(np.abs(resid).argmax())
            problems.append("failure exit rates do not match the internal "
                            f"generator at state {row} (residual {resid[row]:.3g})")
        # Wear never moves back to an earlier level.
        sl = self.level_slices()
        for i in range(len(sl)):
            for j in range(i):
                block = self.ph.subgen[sl[i], sl[j]]
                if np.abs(block).max(initial=0.0) > 1e-12:
                    problems.append(f"internal generator has a backward block "
                                    f"from level {i + 1} to level {j + 1}")
        return problems


@dataclass(frozen=True)
class ShockModel:
    """External shock arrivals with repairable/destructive outcome split."""

    ph: PhaseType
    rep_rates: np.ndarray
    nonrep_rates: np.ndarray

    def __init__(self, ph, rep_rates, nonrep_rates):
        object.__setattr__(self, "ph", ph)
        object.__setattr__(self, "rep_rates", np.asarray(rep_rates, float))
        object.__setattr__(self, "nonrep_rates", np.asarray(nonrep_rates, float))

    @property
    def order(self):
        return self.ph.order

    def renewal_generator(self):
        """Generator of the shock phase when completed arrivals restart it."""
        restart = np.outer(self.rep_rates + self.nonrep_rates, self.ph.alpha)
        return self.ph.subgen + restart

    def validate(self):
        problems = [f"shock ph: {p}" for p in self.ph.validate()]
        p = self.order
        for vec, name in ((self.rep_rates, "rep_rates"),
                          (self.nonrep_rates, "nonrep_rates")):
            if vec.shape != (p,):
                problems.append(f"shock {name} has length {vec.size}, expected {p}")
                return problems
            if vec.min() < 0:
                problems.append(f"shock {name} negative at phase {int(vec.argmin())}")
        resid = self.rep_rates + self.nonrep_rates + self.ph.subgen @ np.ones(p)
        if np.abs(resid).max() > 1e-12:
            row = int(np.abs(resid).argmax())
            problems.append("shock outcome rates do not match the shock "
                            f"generator at phase {row} (residual {resid[row]:.3g})")
        return problems


@dataclass(frozen=True)
class SystemSpec:
    """Complete description of one system variant."""

    variant: str
    degradation: DegradationModel
    shock: ShockModel
    vacation: PhaseType
    corrective: PhaseType
    preventive: Optional[PhaseType] = None

    def validate(self):
        problems = []
        if self.variant not in (NO_PM, PM):
            problems.append(f"unknown variant {self.variant!r}")
            return problems
        want_levels = 3 if self.variant == PM else 2
        if len(self.degradation.level_sizes) != want_levels:
            problems.append(f"variant {self.variant!r} needs {want_levels} "
                            f"degradation levels, got {len(self.degradation.level_sizes)}")
        problems += self.degradation.validate()
        problems += self.shock.validate()
        problems += [f"vacation ph: {p}" for p in self.vacation.validate()]
        problems += [f"corrective ph: {p}" for p in self.corrective.validate()]
        if self.variant == PM:
            if self.preventive is None:
                problems.append("maintenance variant needs a preventive-time ph")
            else:
                problems += [f"preventive ph: {p}" for p in self.preventive.validate()]
        elif self.preventive is not None:
            problems.append("no-maintenance variant must not carry a preventive ph")
        return problems

    def require_valid(self):
        problems = self.validate()
        if problems:
            raise ValueError("invalid system spec: " + "; ".join(problems))

    def with_vacation(self, vacation):
        """Copy of the spec with the vacation distribution replaced."""
        return SystemSpec(self.variant, self.degradation, self.shock,
                          vacation, self.corrective, self.preventive)


@dataclass(frozen=True)
class MacroState:
    label: str
    size: int
    offset: int

    @property
    def sl(self):
        return slice(self.offset, self.offset + self.size)


@dataclass(frozen=True)
class MacroStateLayout:
    """Ordered macro-states partitioning the flattened state space."""

    macro_states: tuple
    operational: tuple
    failed: tuple

    @property
    def total_dim(self):
        last = self.macro_states[-1]
        return last.offset + last.size

    @property
    def labels(self):
        return tuple(m.label for m in self.macro_states)

    def __getitem__(self, label):
        for m in self.macro_states:
            if m.label == label:
                return m
        raise KeyError(label)

    def index(self, label):
        return self.labels.index(label)

    def split(self, vec):
        """Chop a state-space vector into per-macro-state pieces."""
        vec = np.asarray(vec)
        return {m.label: vec[m.sl] for m in self.macro_states}

    def masses(self, vec):
        """Total mass of a state-space vector in each macro-state."""
        vec = np.asarray(vec, float)
        return np.array([vec[m.sl].sum() for m in self.macro_states])


def build_layout(spec):
    """Macro-state layout of a validated spec.

    The unattended operational states carry (degradation, shock, vacation)
    coordinates, the attended middle state drops the vacation coordinate,
    the failed waiting states carry (shock, vacation), and the two service
    states carry (shock, service phase).
    """
    spec.require_valid()
    p = spec.shock.order
    vb = spec.vacation.order
    m_cr = spec.corrective.order
    ls = spec.degradation.level_sizes
    if spec.variant == PM:
        m_pm = spec.preventive.order
        sizes = [ls[0] * p * vb, ls[1] * p * vb, ls[1] * p, ls[2] * p * vb,
                 p * vb, p * vb, p * m_pm, p * m_cr]
        labels = PM_LABELS
        n_op = 4
    else:
        sizes = [ls[0] * p * vb, ls[1] * p * vb, ls[1] * p,
                 p * vb, p * vb, p * m_cr]
        labels = NO_PM_LABELS
        n_op = 3
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    macros = tuple(MacroState(lbl, sizes[i], int(offsets[i]))
                   for i, lbl in enumerate(labels))
    return MacroStateLayout(macros, labels[:n_op], labels[n_op:])


@dataclass(frozen=True)
class FixedCosts:
    """One-off charges per event occurrence."""

    new_unit: float = 0.0
    repair: float = 0.0
    maintenance: float = 0.0
    incorporation: float = 0.0

    def validate(self):
        vals = (self.new_unit, self.repair, self.maintenance, self.incorporation)
        if any(not np.isfinite(v) or v < 0 for v in vals):
            return ["fixed costs must be finite and nonnegative"]
        return []


@dataclass(frozen=True)
class EconomicSpec:
    """Rates of reward and cost attached to states, plus per-event charges.

    level_costs, cr_cost and pm_cost may be scalars (expanded to constant
    vectors) or per-phase vectors.
    """

    reward: float
    downtime_cost: float
    level_costs: tuple
    idle_cost: float
    cr_cost: np.ndarray
    pm_cost: Optional[np.ndarray] = None
    fixed: FixedCosts = field(default_factory=FixedCosts)

    def __init__(self, reward, downtime_cost, level_costs, idle_cost,
                 cr_cost, pm_cost=None, fixed=None):
        object.__setattr__(self, "reward", float(reward))
        object.__setattr__(self, "downtime_cost", float(downtime_cost))
        object.__setattr__(self, "level_costs",
                           tuple(np.atleast_1d(np.asarray(c, float)) for c in level_costs))
        object.__setattr__(self, "idle_cost", float(idle_cost))
        object.__setattr__(self, "cr_cost", np.atleast_1d(np.asarray(cr_cost, float)))
        object.__setattr__(self, "pm_cost",
                           None if pm_cost is None
                           else np.atleast_1d(np.asarray(pm_cost, float)))
        object.__setattr__(self, "fixed", fixed if fixed is not None else FixedCosts())

    def validate(self, spec):
        problems = list(self.fixed.validate())
        if len(self.level_costs) != len(spec.degradation.level_sizes):
            problems.append(f"{len(self.level_costs)} level cost entries for "
                            f"{len(spec.degradation.level_sizes)} levels")
            return problems
        for i, (c, size) in enumerate(zip(self.level_costs,
                                          spec.degradation.level_sizes)):
            if c.size not in (1, size):
                problems.append(f"level {i + 1} cost has length {c.size}, "
                                f"expected 1 or {size}")
        if self.cr_cost.size not in (1, spec.corrective.order):
            problems.append("repair cost vector length mismatch")
        if spec.variant == PM:
            if self.pm_cost is None:
                problems.append("maintenance variant needs pm_cost")
            elif self.pm_cost.size not in (1, spec.preventive.order):
                problems.append("maintenance cost vector length mismatch")
        return problems

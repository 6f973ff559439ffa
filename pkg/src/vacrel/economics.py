"""Reward and cost accounting on top of the assembled model.

State-attached rates (reward while working, costs while down or under
service, the idle repairperson's wage) enter through a net reward vector.
One-off charges attach to event counts: every replacement, repair start,
maintenance start and incorporation is billed once, and the unit bought
at time zero is billed as one extra replacement.
"""

import numpy as np

from . import analysis
from .model import PM


def _expand(values, size):
    values = np.atleast_1d(np.asarray(values, float))
    if values.size == 1:
        return np.full(size, values[0])
    return values


def net_reward_vector(mmap, econ):
    """Per-state net reward rate over the flattened state space."""
    spec = mmap.spec
    problems = econ.validate(spec)
    if problems:
        raise ValueError("invalid economic spec: " + "; ".join(problems))
    layout = mmap.layout
    p = spec.shock.order
    vb = spec.vacation.order
    sizes = spec.degradation.level_sizes
    reward, down = econ.reward, econ.downtime_cost
    level_cost = [_expand(c, s) for c, s in zip(econ.level_costs, sizes)]

    out = np.zeros(layout.total_dim)

    def fill(label, block):
        out[layout[label].sl] = block

    fill("minor_vac", np.kron(reward - level_cost[0], np.ones(p * vb)))
    fill("middle_vac", np.kron(reward - level_cost[1], np.ones(p * vb)))
    fill("middle_idle",
         np.kron(reward - econ.idle_cost - level_cost[1], np.ones(p)))
    fill("rf_wait", np.full(p * vb, -down))
    fill("nrf_wait", np.full(p * vb, -down))
    fill("repair",
         np.kron(np.ones(p), -down - _expand(econ.cr_cost, spec.corrective.order)))
    if spec.variant == PM:
        fill("major_vac", np.kron(reward - level_cost[2], np.ones(p * vb)))
        fill("maintenance",
             np.kron(np.ones(p),
                     -down - _expand(econ.pm_cost, spec.preventive.order)))
    return out


def expected_net_reward(mmap, econ, t, theta=None):
    """Accumulated state-attached net reward on [0, t], before event charges."""
    return float(analysis.occupancy(mmap, t, theta) @ net_reward_vector(mmap, econ))


def _fixed_charges(mmap, counts, fixed):
    charge = (1.0 + counts("NU")) * fixed.new_unit
    charge += counts("CR") * fixed.repair
    charge += counts("I") * fixed.incorporation
    if mmap.spec.variant == PM:
        charge += counts("PM") * fixed.maintenance
    return charge


def total_net_reward(mmap, econ, t, theta=None):
    """Net reward on [0, t] including event charges and the initial unit."""
    gross = expected_net_reward(mmap, econ, t, theta)
    return gross - _fixed_charges(
        mmap, lambda fam: analysis.mean_counts(mmap, t, fam, theta), econ.fixed)


def average_net_reward(mmap, econ, t, theta=None):
    if t <= 0:
        raise ValueError("averaging horizon must be positive")
    return total_net_reward(mmap, econ, t, theta) / t


def profit_curve(mmap, econ, times, theta=None):
    """Reward accumulation over a grid, reusing one transient sweep.

    Returns four aligned arrays: the grid itself, the gross state-reward
    integral, the net total after per-event charges, and the running time
    average of the net total (NaN at t = 0).
    """
    sw = analysis.sweep(mmap, times, theta)
    reward = net_reward_vector(mmap, econ)
    gross = sw.occupancies @ reward
    totals = gross - _fixed_charges(mmap, sw.mean_counts, econ.fixed)
    with np.errstate(divide="ignore", invalid="ignore"):
        averages = np.where(sw.times > 0, totals / np.where(sw.times > 0, sw.times, 1.0),
                            np.nan)
    return sw.times, gross, totals, averages


def stationary_net_reward(mmap, econ, result=None):
    """Long-run net reward per unit time.

    The initial unit is a one-off purchase, so it vanishes from the time
    average; only recurring event charges remain.
    """
    if result is None:
        result = analysis.stationary(mmap)
    rate = float(result.pi @ net_reward_vector(mmap, econ))
    fixed = econ.fixed
    rate -= result.intensity(mmap, "NU") * fixed.new_unit
    rate -= result.intensity(mmap, "CR") * fixed.repair
    rate -= result.intensity(mmap, "I") * fixed.incorporation
    if mmap.spec.variant == PM:
        rate -= result.intensity(mmap, "PM") * fixed.maintenance
    return rate

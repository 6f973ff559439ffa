"""Event-labelled generator assembly.

Builds, for a validated system spec, the family of matrices that split the
joint generator by event type: unmarked phase motion, failures of both
kinds, service starts, and returns from vacation (plain and combined with
the action taken on return). Their sum is the generator of the flattened
chain, and each labelled matrix feeds the event-counting measures.

Event labels
------------
O       unmarked motion (wear, shock phase changes, vacation aging,
        service phase changes, service completions)
RF      repairable failure while the repairperson is away
NRF     destructive failure while the repairperson is away
RF_CR   repairable failure with the repairperson present; repair starts
NRF_NU  destructive failure with the repairperson present; unit replaced
I       return from vacation (new vacation, or idling at the workplace)
I_CR    return from vacation straight into a pending repair
I_NU    return from vacation to replace a destroyed unit
PM      maintenance started by the attending repairperson (variant "pm")
I_PM    return from vacation straight into maintenance (variant "pm")
"""

from dataclasses import dataclass

import numpy as np

from . import model as _model
from .matstoch import kron, kron_sum, stationary_vector

EVENTS_NO_PM = ("O", "RF", "NRF", "RF_CR", "NRF_NU", "I", "I_CR", "I_NU")
EVENTS_PM = EVENTS_NO_PM + ("PM", "I_PM")

# Named event families used by the reporting measures.
EVENT_FAMILIES = {
    "RF": ("RF", "RF_CR"),
    "NRF": ("NRF", "NRF_NU"),
    "CR": ("RF_CR", "I_CR"),
    "PM": ("PM", "I_PM"),
    "NU": ("NRF_NU", "I_NU"),
    "I": ("I", "I_CR", "I_NU", "I_PM"),
}


def events_for(variant):
    return EVENTS_PM if variant == _model.PM else EVENTS_NO_PM


def structural_pattern(variant):
    """Macro-block slots each event matrix may occupy.

    Everything outside these slots must be exactly zero in a correctly
    assembled model; the assembler audits this.
    """
    if variant == _model.PM:
        return {
            "O": {(0, 0), (0, 1), (0, 3), (1, 1), (1, 3), (2, 2), (3, 3),
                  (4, 4), (5, 5), (6, 6), (7, 7), (6, 0), (7, 0)},
            "I": {(0, 0), (1, 2)},
            "RF": {(0, 4), (1, 4), (3, 4)},
            "NRF": {(0, 5), (1, 5), (3, 5)},
            "RF_CR": {(2, 7)},
            "NRF_NU": {(2, 0)},
            "PM": {(2, 6)},
            "I_PM": {(3, 6)},
            "I_CR": {(4, 7)},
            "I_NU": {(5, 0)},
        }
    return {
        "O": {(0, 0), (0, 1), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (5, 0)},
        "I": {(0, 0), (1, 2)},
        "RF": {(0, 3), (1, 3)},
        "NRF": {(0, 4), (1, 4)},
        "RF_CR": {(2, 5)},
        "NRF_NU": {(2, 0)},
        "I_CR": {(3, 5)},
        "I_NU": {(4, 0)},
    }


@dataclass(frozen=True)
class MmapModel:
    """Assembled event-labelled representation of one system."""

    spec: _model.SystemSpec
    layout: _model.MacroStateLayout
    by_event: dict
    generator: np.ndarray

    @property
    def dim(self):
        return self.layout.total_dim

    def event_sum(self, events):
        """Sum of the labelled matrices for a set of event labels."""
        missing = [e for e in events if e not in self.by_event]
        if missing:
            raise KeyError(f"unknown event labels {missing} for this variant")
        total = np.zeros((self.dim, self.dim))
        for e in events:
            total += self.by_event[e]
        return total

    def family(self, name):
        """Sum over a named event family, ignoring labels the variant lacks."""
        members = [e for e in EVENT_FAMILIES[name] if e in self.by_event]
        return self.event_sum(members)


def shock_stationary(shock):
    """Stationary phase distribution of the renewing shock process."""
    return stationary_vector(shock.renewal_generator())


def _col(v):
    return np.asarray(v, float).reshape(-1, 1)


def _row(v):
    return np.asarray(v, float).reshape(1, -1)


def assemble(spec):
    """Build every labelled matrix and the summed generator.

    Raises
    ------
    ValueError
        If the spec fails validation.
    RuntimeError
        If the assembled generator fails the zero-row-sum audit or any
        labelled matrix has mass outside its structural slots. Either one
        signals a block derivation bug, not bad input.
    """
    spec.require_valid()
    layout = _model.build_layout(spec)
    deg, shock, vac = spec.degradation, spec.shock, spec.vacation
    n_lv = len(deg.level_sizes)
    p, vb = shock.order, vac.order

    sl = deg.level_slices()
    wear = deg.ph.subgen
    wear_blocks = [[wear[sl[i], sl[j]] for j in range(n_lv)] for i in range(n_lv)]
    rep = [deg.rep_rates[s] for s in sl]
    nonrep = [deg.nonrep_rates[s] for s in sl]
    start_minor = _row(deg.level_start(0))

    shock_gen = shock.ph.subgen
    shock_renew = shock.renewal_generator()
    # Rank-one restart kernels for arrivals with each outcome.
    shock_rep = np.outer(shock.rep_rates, shock.ph.alpha)
    shock_nonrep = np.outer(shock.nonrep_rates, shock.ph.alpha)

    vac_gen = vac.subgen
    vac_end = _col(vac.exit_rates)
    vac_start = _row(vac.alpha)
    vac_restart = vac_end @ vac_start

    cr_start = _row(spec.corrective.alpha)
    cr_gen = spec.corrective.subgen
    cr_done = _col(spec.corrective.exit_rates)

    ident = np.eye
    ones = np.ones

    by_event = {e: np.zeros((layout.total_dim, layout.total_dim))
                for e in events_for(spec.variant)}

    def put(event, i, j, block):
        mi, mj = layout.macro_states[i], layout.macro_states[j]
        block = np.asarray(block, float)
        if block.shape != (mi.size, mj.size):
            raise RuntimeError(f"block {event}({mi.label} -> {mj.label}) has "
                               f"shape {block.shape}, expected "
                               f"{(mi.size, mj.size)}")
        by_event[event][mi.sl, mj.sl] += block

    # Unattended operational macro-states: wear, shock and vacation run
    # jointly; wear moves between levels stay unmarked.
    unattended = [(0, 0), (1, 1)] + ([(2, 3)] if spec.variant == _model.PM else [])
    for lv, mac in unattended:
        put("O", mac, mac, kron_sum(wear_blocks[lv][lv], kron_sum(shock_gen, vac_gen)))
        for lv2, mac2 in unattended:
            if lv2 > lv:
                put("O", mac, mac2, kron(wear_blocks[lv][lv2], ident(p * vb)))
        #

        # Failures take the unit down with the vacation clock untouched;
        # shock-driven ones renew the shock phase, wear-driven ones keep it.
        put("RF", mac, layout.index("rf_wait"),
            kron(_col(rep[lv]), ident(p * vb))
            + kron(ones((deg.level_sizes[lv], 1)), kron(shock_rep, ident(vb))))
        put("NRF", mac, layout.index("nrf_wait"),
            kron(_col(nonrep[lv]), ident(p * vb))
            + kron(ones((deg.level_sizes[lv], 1)), kron(shock_nonrep, ident(vb))))

    # Vacation completions from the operational states: what the returning
    # repairperson does depends only on the observed level.
    put("I", 0, 0, kron(ident(deg.level_sizes[0] * p), vac_restart))
    put("I", 1, layout.index("middle_idle"),
        kron(ident(deg.level_sizes[1] * p), vac_end))
    if spec.variant == _model.PM:
        pm_start = _row(spec.preventive.alpha)
        put("I_PM", 3, layout.index("maintenance"),
            kron(ones((deg.level_sizes[2], 1)),
                 kron(ident(p), vac_end @ pm_start)))

    # Attended middle state: no vacation coordinate, and every completed
    # shock arrival triggers an action, so the shock block stays plain.
    mid = layout.index("middle_idle")
    put("O", mid, mid, kron_sum(wear_blocks[1][1], shock_gen))
    put("RF_CR", mid, layout.index("repair"),
        kron(_col(rep[1]), kron(ident(p), cr_start))
        + kron(ones((deg.level_sizes[1], 1)), kron(shock_rep, cr_start)))
    put("NRF_NU", mid, 0,
        kron(_col(nonrep[1]), kron(start_minor, kron(ident(p), vac_start)))
        + kron(ones((deg.level_sizes[1], 1)),
               kron(start_minor, kron(shock_nonrep, vac_start))))
    if spec.variant == _model.PM:
        # Passage into the major level under the repairperson's eyes sends
        # the unit straight to maintenance, whatever major state it hit.
        put("PM", mid, layout.index("maintenance"),
            kron(_col(wear_blocks[1][2] @ ones(deg.level_sizes[2])),
                 kron(ident(p), pm_start)))

    # Failed units waiting for the repairperson: only shock renewals and
    # the vacation clock move.
    for wait, service, ev_in in (("rf_wait", "repair", "I_CR"),
                                 ("nrf_wait", None, "I_NU")):
        w = layout.index(wait)
        put("O", w, w, kron_sum(shock_renew, vac_gen))
        if service is not None:
            put(ev_in, w, layout.index(service),
                kron(ident(p), vac_end @ cr_start))
        else:
            put(ev_in, w, 0,
                kron(start_minor, kron(ident(p), vac_end @ vac_start)))

    # Service states: repair and maintenance run against the renewing
    # shock process; completion hands back a minor-level unit and the
    # repairperson leaves on a fresh vacation.
    def service_blocks(mac_label, gen, done):
        mac = layout.index(mac_label)
        put("O", mac, mac, kron_sum(shock_renew, gen))
        put("O", mac, 0, kron(start_minor, kron(ident(p), done @ vac_start)))

    service_blocks("repair", cr_gen, cr_done)
    if spec.variant == _model.PM:
        service_blocks("maintenance", spec.preventive.subgen,
                       _col(spec.preventive.exit_rates))

    generator = sum(by_event.values())
    _audit(spec.variant, layout, by_event, generator)
    return MmapModel(spec, layout, dict(by_event), generator)


def _audit(variant, layout, by_event, generator):
    scale = max(1.0, float(np.abs(np.diag(generator)).max()))
    rowsum = np.abs(generator.sum(axis=1)).max()
    if rowsum > 1e-12 * scale:
        raise RuntimeError(f"assembled generator row sums reach {rowsum:.3g} "
                           f"at scale {scale:.3g}; block derivation bug")
    pattern = structural_pattern(variant)
    n = len(layout.macro_states)
    for event, mat in by_event.items():
        allowed = pattern[event]
        for i in range(n):
            for j in range(n):
                if (i, j) in allowed:
                    continue
                block = mat[layout.macro_states[i].sl, layout.macro_states[j].sl]
                if np.abs(block).max(initial=0.0) != 0.0:
                    raise RuntimeError(
                        f"event {event} has mass in unexpected block "
                        f"({layout.labels[i]} -> {layout.labels[j]})")
    off = generator - np.diag(np.diag(generator))
    if off.min(initial=0.0) < 0:
        raise RuntimeError("assembled generator has a negative rate")


def initial_distribution(spec, layout=None):
    """Start-of-life distribution: a fresh unit, the shock phase in its
    renewal steady state, the repairperson departing on a first vacation."""
    spec.require_valid()
    if layout is None:
        layout = _model.build_layout(spec)
    omega = shock_stationary(spec.shock)
    theta = np.zeros(layout.total_dim)
    vac_levels = [(0, "minor_vac"), (1, "middle_vac")]
    if spec.variant == _model.PM:
        vac_levels.append((2, "major_vac"))
    for lv, label in vac_levels:
        block = kron(kron(_row(spec.degradation.level_start(lv)), _row(omega)),
                     _row(spec.vacation.alpha))
        theta[layout[label].sl] = block.ravel()
    return theta


def write_event_csv(mmap, event, fileobj):
    """Dump one labelled matrix as (row, col, value) triples, nonzeros only."""
    import csv

    writer = csv.writer(fileobj)
    writer.writerow(["row", "col", "value"])
    mat = mmap.by_event[event]
    for i, j in zip(*np.nonzero(mat)):
        writer.writerow([int(i), int(j), repr(float(mat[i, j]))])

"""Assembled event-labelled matrices against elementwise transcriptions.

The assembly builds blocks with Kronecker algebra; these tests rebuild
representative blocks entry by entry straight from the operating rules
(who moves, what restarts, which phase is preserved) and demand exact
agreement. Structural zeros, conservation, and symmetry under relabeling
cover the rest.
"""

import io

import numpy as np
import pytest

import vacrel as vr
from vacrel.mmap import (EVENT_FAMILIES, assemble, events_for,
                         initial_distribution, shock_stationary,
                         structural_pattern, write_event_csv)
from vacrel.model import build_layout

from conftest import random_spec


def block(model, event, row_label, col_label):
    lay = model.layout
    return model.by_event[event][lay[row_label].sl, lay[col_label].sl]


class TestConservationAndStructure:
    def test_row_sums_vanish(self, pm_model, nopm_model):
        for model in (pm_model, nopm_model):
            total = sum(model.by_event.values())
            assert np.abs(total - model.generator).max() == 0.0
            assert np.abs(model.generator.sum(axis=1)).max() < 1e-12

    def test_off_diagonal_rates_nonnegative(self, pm_model):
        for name, mat in pm_model.by_event.items():
            off = mat - np.diag(np.diag(mat))
            assert off.min() >= 0.0, name

    def test_structural_zeros_respected(self, pm_model, nopm_model):
        for model in (pm_model, nopm_model):
            lay = model.layout
            pattern = structural_pattern(model.spec.variant)
            for event, slots in pattern.items():
                mat = model.by_event[event]
                for i, row in enumerate(lay.macro_states):
                    for j, col in enumerate(lay.macro_states):
                        piece = mat[row.sl, col.sl]
                        if (i, j) not in slots:
                            assert np.abs(piece).max() == 0.0, (event, i, j)

    def test_every_event_used_somewhere(self, pm_model, nopm_model):
        for model in (pm_model, nopm_model):
            for event in events_for(model.spec.variant):
                off = model.by_event[event] - np.diag(np.diag(model.by_event[event]))
                assert np.abs(off).max() > 0.0, event

    def test_family_sums_ignore_missing_labels(self, nopm_model):
        assert np.abs(nopm_model.family("PM")).max() == 0.0
        with pytest.raises(KeyError):
            nopm_model.event_sum(["PM"])


class TestLiteralBlocks:
    """Entry-by-entry rebuilds of no-maintenance blocks from the rules."""

    @pytest.fixture(scope="class")
    def parts(self, nopm_bundle):
        spec = nopm_bundle.spec
        model = assemble(spec)
        deg = spec.degradation
        sl0, sl1 = deg.level_slices()
        return {
            "model": model,
            "spec": spec,
            "T": deg.ph.subgen, "alpha": deg.ph.alpha,
            "rep": deg.rep_rates, "nonrep": deg.nonrep_rates,
            "sl0": sl0, "sl1": sl1,
            "L": spec.shock.ph.subgen, "gamma": spec.shock.ph.alpha,
            "Lr": spec.shock.rep_rates, "Ln": spec.shock.nonrep_rates,
            "V": spec.vacation.subgen, "v": spec.vacation.alpha,
            "vexit": spec.vacation.exit_rates,
            "S": spec.corrective.subgen, "beta": spec.corrective.alpha,
            "sexit": spec.corrective.exit_rates,
        }

    def test_unmarked_motion_in_first_macro(self, parts):
        # While the repairperson is away and the unit sits at the first
        # level, the wear state, shock phase and vacation phase move
        # independently; the diagonal carries the whole outflow.
        T, L, V = parts["T"], parts["L"], parts["V"]
        sl0 = parts["sl0"]
        l0 = sl0.stop - sl0.start
        p, vb = L.shape[0], V.shape[0]
        got = block(parts["model"], "O", "minor_vac", "minor_vac")
        ref = np.zeros((l0 * p * vb, l0 * p * vb))
        for i in range(l0):
            for s in range(p):
                for w in range(vb):
                    row = (i * p + s) * vb + w
                    ref[row, row] = T[i, i] + L[s, s] + V[w, w]
                    for i2 in range(l0):
                        if i2 != i:
                            ref[row, (i2 * p + s) * vb + w] = T[i, i2]
                    for s2 in range(p):
                        if s2 != s:
                            ref[row, (i * p + s2) * vb + w] = L[s, s2]
                    for w2 in range(vb):
                        if w2 != w:
                            ref[row, (i * p + s) * vb + w2] = V[w, w2]
        assert np.abs(got - ref).max() < 1e-14

    def test_repairable_failure_from_first_macro(self, parts):
        # Wear-driven failures keep the shock phase; shock-driven failures
        # restart it. The vacation phase always survives.
        sl0 = parts["sl0"]
        l0 = sl0.stop - sl0.start
        rep = parts["rep"][sl0]
        Lr, gamma = parts["Lr"], parts["gamma"]
        p, vb = len(Lr), parts["V"].shape[0]
        got = block(parts["model"], "RF", "minor_vac", "rf_wait")
        ref = np.zeros((l0 * p * vb, p * vb))
        for i in range(l0):
            for s in range(p):
                for w in range(vb):
                    row = (i * p + s) * vb + w
                    ref[row, s * vb + w] += rep[i]
                    for s2 in range(p):
                        ref[row, s2 * vb + w] += Lr[s] * gamma[s2]
        assert np.abs(got - ref).max() < 1e-14

    def test_vacation_return_at_first_level_restarts_vacation(self, parts):
        sl0 = parts["sl0"]
        l0 = sl0.stop - sl0.start
        vexit, v = parts["vexit"], parts["v"]
        p, vb = parts["L"].shape[0], len(v)
        got = block(parts["model"], "I", "minor_vac", "minor_vac")
        ref = np.zeros((l0 * p * vb, l0 * p * vb))
        for i in range(l0):
            for s in range(p):
                for w in range(vb):
                    for w2 in range(vb):
                        ref[(i * p + s) * vb + w,
                            (i * p + s) * vb + w2] = vexit[w] * v[w2]
        assert np.abs(got - ref).max() < 1e-14

    def test_destructive_failure_while_attended_installs_new_unit(self, parts):
        sl0, sl1 = parts["sl0"], parts["sl1"]
        l0, l1 = sl0.stop - sl0.start, sl1.stop - sl1.start
        nonrep = parts["nonrep"][sl1]
        alpha0 = parts["alpha"][sl0]
        Ln, gamma, v = parts["Ln"], parts["gamma"], parts["v"]
        p, vb = len(gamma), len(v)
        got = block(parts["model"], "NRF_NU", "middle_idle", "minor_vac")
        ref = np.zeros((l1 * p, l0 * p * vb))
        for i in range(l1):
            for s in range(p):
                row = i * p + s
                for i2 in range(l0):
                    for w2 in range(vb):
                        # unit-driven: shock phase rides through
                        ref[row, (i2 * p + s) * vb + w2] += \
                            nonrep[i] * alpha0[i2] * v[w2]
                        # shock-driven: shock phase restarts too
                        for s2 in range(p):
                            ref[row, (i2 * p + s2) * vb + w2] += \
                                Ln[s] * gamma[s2] * alpha0[i2] * v[w2]
        assert np.abs(got - ref).max() < 1e-14

    def test_immediate_repair_when_attended(self, parts):
        sl1 = parts["sl1"]
        l1 = sl1.stop - sl1.start
        rep = parts["rep"][sl1]
        Lr, gamma, beta = parts["Lr"], parts["gamma"], parts["beta"]
        p, mc = len(gamma), len(beta)
        got = block(parts["model"], "RF_CR", "middle_idle", "repair")
        ref = np.zeros((l1 * p, p * mc))
        for i in range(l1):
            for s in range(p):
                row = i * p + s
                for m in range(mc):
                    ref[row, s * mc + m] += rep[i] * beta[m]
                    for s2 in range(p):
                        ref[row, s2 * mc + m] += Lr[s] * gamma[s2] * beta[m]
        assert np.abs(got - ref).max() < 1e-14

    def test_return_to_waiting_repairable_failure_starts_service(self, parts):
        vexit, beta = parts["vexit"], parts["beta"]
        p, vb, mc = parts["L"].shape[0], len(vexit), len(beta)
        got = block(parts["model"], "I_CR", "rf_wait", "repair")
        ref = np.zeros((p * vb, p * mc))
        for s in range(p):
            for w in range(vb):
                for m in range(mc):
                    ref[s * vb + w, s * mc + m] = vexit[w] * beta[m]
        assert np.abs(got - ref).max() < 1e-14

    def test_waiting_states_renew_completed_shocks(self, parts):
        # A failed unit cannot fail again: completed arrivals only restart
        # the shock phase, marked as unmarked motion.
        L, Lr, Ln, gamma = parts["L"], parts["Lr"], parts["Ln"], parts["gamma"]
        V = parts["V"]
        p, vb = L.shape[0], V.shape[0]
        got = block(parts["model"], "O", "rf_wait", "rf_wait")
        ref = np.zeros((p * vb, p * vb))
        renew = L + np.outer(Lr + Ln, gamma)
        for s in range(p):
            for w in range(vb):
                row = s * vb + w
                for s2 in range(p):
                    ref[row, s2 * vb + w] += renew[s, s2]
                for w2 in range(vb):
                    if w2 != w:
                        ref[row, s * vb + w2] += V[w, w2]
                ref[row, row] += V[w, w]
        assert np.abs(got - ref).max() < 1e-14

    def test_service_completion_restarts_everything(self, parts):
        sl0 = parts["sl0"]
        l0 = sl0.stop - sl0.start
        alpha0 = parts["alpha"][sl0]
        sexit, v = parts["sexit"], parts["v"]
        p, vb, mc = parts["L"].shape[0], len(v), len(sexit)
        got = block(parts["model"], "O", "repair", "minor_vac")
        ref = np.zeros((p * mc, l0 * p * vb))
        for s in range(p):
            for m in range(mc):
                for i2 in range(l0):
                    for w2 in range(vb):
                        ref[s * mc + m, (i2 * p + s) * vb + w2] = \
                            sexit[m] * alpha0[i2] * v[w2]
        assert np.abs(got - ref).max() < 1e-14


class TestMaintenanceVariantBlocks:
    def test_wear_into_worst_level_triggers_maintenance(self, pm_bundle,
                                                        pm_model):
        spec = pm_bundle.spec
        deg = spec.degradation
        sl1, sl2 = deg.level_slices()[1], deg.level_slices()[2]
        pm_alpha = spec.preventive.alpha
        p, mp = spec.shock.order, spec.preventive.order
        l1 = sl1.stop - sl1.start
        got = block(pm_model, "PM", "middle_idle", "maintenance")
        ref = np.zeros((l1 * p, p * mp))
        forward = deg.ph.subgen[sl1, sl2].sum(axis=1)
        for i in range(l1):
            for s in range(p):
                for m in range(mp):
                    ref[i * p + s, s * mp + m] = forward[i] * pm_alpha[m]
        assert np.abs(got - ref).max() < 1e-14

    def test_return_at_worst_level_goes_to_maintenance(self, pm_bundle,
                                                       pm_model):
        spec = pm_bundle.spec
        vexit = spec.vacation.exit_rates
        pm_alpha = spec.preventive.alpha
        sl2 = spec.degradation.level_slices()[2]
        l2 = sl2.stop - sl2.start
        p, vb, mp = spec.shock.order, spec.vacation.order, spec.preventive.order
        got = block(pm_model, "I_PM", "major_vac", "maintenance")
        ref = np.zeros((l2 * p * vb, p * mp))
        for i in range(l2):
            for s in range(p):
                for w in range(vb):
                    for m in range(mp):
                        ref[(i * p + s) * vb + w, s * mp + m] = \
                            vexit[w] * pm_alpha[m]
        assert np.abs(got - ref).max() < 1e-14


class TestInitialDistribution:
    def test_fresh_start(self, pm_model):
        theta = initial_distribution(pm_model.spec, pm_model.layout)
        assert abs(theta.sum() - 1.0) < 1e-12
        masses = pm_model.layout.masses(theta)
        assert abs(masses[0] - 1.0) < 1e-12
        assert np.abs(masses[1:]).max() == 0.0

    def test_matches_product_form(self, nopm_bundle, nopm_model):
        spec = nopm_bundle.spec
        omega = shock_stationary(spec.shock)
        sl0 = spec.degradation.level_slices()[0]
        ref = np.kron(spec.degradation.ph.alpha[sl0],
                      np.kron(omega, spec.vacation.alpha))
        theta = initial_distribution(spec, nopm_model.layout)
        assert np.abs(theta[nopm_model.layout["minor_vac"].sl] - ref).max() < 1e-14


class TestShockStationary:
    def test_example_balance_by_hand(self, pm_bundle):
        # Renewal generator [[-2.9, 2.9], [3.0, -3.0]]: balance gives
        # omega_1 * 2.9 = omega_2 * 3.0, so omega = (30, 29)/59.
        omega = shock_stationary(pm_bundle.spec.shock)
        assert np.abs(omega - np.array([30.0, 29.0]) / 59.0).max() < 1e-12


class TestRelabelingInvariance:
    def test_vacation_phase_permutation(self):
        rng = np.random.default_rng(77)
        spec = random_spec(rng, "pm")
        vb = spec.vacation.order
        if vb < 2:
            spec = spec.with_vacation(vr.coxian2(1.3, 2.4))
            vb = 2
        perm = np.roll(np.arange(vb), 1)
        permuted = spec.with_vacation(type(spec.vacation)(
            spec.vacation.alpha[perm],
            spec.vacation.subgen[np.ix_(perm, perm)]))
        a = vr.stationary(assemble(spec))
        b = vr.stationary(assemble(permuted))
        assert abs(a.availability - b.availability) < 1e-12
        for lab in a.macro_masses:
            assert abs(a.macro_masses[lab] - b.macro_masses[lab]) < 1e-12

    def test_zero_destructive_rates_kill_those_events(self):
        rng = np.random.default_rng(78)
        spec = random_spec(rng, "nopm")
        deg, shock = spec.degradation, spec.shock
        # fold the destructive exits into the repairable ones
        deg2 = type(deg)(deg.ph, deg.level_sizes,
                         deg.rep_rates + deg.nonrep_rates,
                         np.zeros(deg.order))
        shock2 = type(shock)(shock.ph, shock.rep_rates + shock.nonrep_rates,
                             np.zeros(shock.order))
        spec2 = type(spec)(spec.variant, deg2, shock2, spec.vacation,
                           spec.corrective, None)
        model = assemble(spec2)
        assert np.abs(model.family("NRF")).max() == 0.0
        assert np.abs(model.family("NU")).max() == 0.0
        assert np.abs(model.family("RF")).max() > 0.0


class TestEventCsv:
    def test_debug_dump_layout(self, nopm_model):
        buf = io.StringIO()
        write_event_csv(nopm_model, "RF", buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "row,col,value"
        rows = [line.split(",") for line in lines[1:]]
        assert rows, "RF matrix should have entries"
        mat = nopm_model.by_event["RF"]
        for r, c, val in rows:
            assert float(val) == mat[int(r), int(c)]
        assert len(rows) == int(np.count_nonzero(mat))

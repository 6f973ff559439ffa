"""JSON configuration for complete system descriptions.

A config file carries one system (variant, wear, shocks, vacation policy,
service laws) and optionally its economic parameters. Keys are fixed;
anything unrecognized is an error so that typos cannot silently fall back
to defaults.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (PM, DegradationModel, EconomicSpec, FixedCosts,
                    ShockModel, SystemSpec)
from .phase_type import PhaseType


class ConfigError(ValueError):
    """Structurally or semantically invalid configuration."""


@dataclass(frozen=True)
class ConfigBundle:
    spec: SystemSpec
    economics: Optional[EconomicSpec]
    comment: str = ""


def _take(mapping, context, required, optional=()):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{context} must be an object")
    unknown = set(mapping) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{context} has unknown keys: "
                          f"{', '.join(sorted(unknown))}")
    missing = [k for k in required if k not in mapping]
    if missing:
        raise ConfigError(f"{context} is missing keys: {', '.join(missing)}")
    return mapping


def _array(data, context):
    try:
        arr = np.asarray(data, float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context} is not numeric: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{context} contains non-finite values")
    return arr


def _phase_type(data, context, alpha_key="beta", subgen_key="S"):
    _take(data, context, (alpha_key, subgen_key))
    return PhaseType(_array(data[alpha_key], f"{context}.{alpha_key}"),
                     _array(data[subgen_key], f"{context}.{subgen_key}"))


def _vacation(data):
    if "structure" in data:
        _take(data, "vacation", ("structure", "lambda1", "lambda2"))
        if data["structure"] != "coxian2":
            raise ConfigError(f"unknown vacation structure "
                              f"{data['structure']!r}")
        from .optimize import coxian2
        return coxian2(float(data["lambda1"]), float(data["lambda2"]))
    return _phase_type(data, "vacation", "v", "V")


def parse_config(data):
    """Build a validated bundle from a decoded JSON object."""
    _take(data, "config", ("variant", "degradation", "shock", "vacation",
                           "corrective"),
          ("preventive", "economics", "comment"))
    variant = data["variant"]
    if variant not in ("pm", "nopm"):
        raise ConfigError(f"variant must be 'pm' or 'nopm', got {variant!r}")

    d = _take(data["degradation"], "degradation",
              ("alpha", "T", "levels", "T_r0", "T_nr0"))
    degradation = DegradationModel(
        PhaseType(_array(d["alpha"], "degradation.alpha"),
                  _array(d["T"], "degradation.T")),
        [int(x) for x in d["levels"]],
        _array(d["T_r0"], "degradation.T_r0"),
        _array(d["T_nr0"], "degradation.T_nr0"))

    s = _take(data["shock"], "shock", ("gamma", "L", "L_r0", "L_nr0"))
    shock = ShockModel(
        PhaseType(_array(s["gamma"], "shock.gamma"),
                  _array(s["L"], "shock.L")),
        _array(s["L_r0"], "shock.L_r0"),
        _array(s["L_nr0"], "shock.L_nr0"))

    vacation = _vacation(data["vacation"])
    corrective = _phase_type(data["corrective"], "corrective")
    preventive = None
    if "preventive" in data:
        preventive = _phase_type(data["preventive"], "preventive")

    spec = SystemSpec(variant=variant, degradation=degradation, shock=shock,
                      vacation=vacation, corrective=corrective,
                      preventive=preventive)
    problems = spec.validate()
    if problems:
        raise ConfigError("invalid system: " + "; ".join(problems))

    econ = None
    if "economics" in data:
        e = _take(data["economics"], "economics",
                  ("B", "A", "level_costs", "idle_cost", "cr_cost"),
                  ("pm_cost", "fixed"))
        fixed = FixedCosts()
        if "fixed" in e:
            f = _take(e["fixed"], "economics.fixed", (),
                      ("nu", "cr", "pm", "i"))
            fixed = FixedCosts(new_unit=float(f.get("nu", 0.0)),
                               repair=float(f.get("cr", 0.0)),
                               maintenance=float(f.get("pm", 0.0)),
                               incorporation=float(f.get("i", 0.0)))
        econ = EconomicSpec(
            reward=float(e["B"]), downtime_cost=float(e["A"]),
            level_costs=[_array(c, "economics.level_costs")
                         for c in e["level_costs"]],
            idle_cost=float(e["idle_cost"]),
            cr_cost=_array(e["cr_cost"], "economics.cr_cost"),
            pm_cost=(_array(e["pm_cost"], "economics.pm_cost")
                     if "pm_cost" in e else None),
            fixed=fixed)
        problems = econ.validate(spec)
        if problems:
            raise ConfigError("invalid economics: " + "; ".join(problems))

    return ConfigBundle(spec=spec, economics=econ,
                        comment=str(data.get("comment", "")))


def load_config(path):
    """Read and parse a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OSError(f"cannot parse {path}: {exc}") from None
    return parse_config(data)


def dump_config(bundle):
    """Rebuild the JSON object for a bundle; inverse of parse_config."""

    def listify(arr):
        arr = np.asarray(arr, float)
        return arr.tolist()

    spec = bundle.spec
    data = {
        "variant": spec.variant,
        "degradation": {
            "alpha": listify(spec.degradation.ph.alpha),
            "T": listify(spec.degradation.ph.subgen),
            "levels": [int(x) for x in spec.degradation.level_sizes],
            "T_r0": listify(spec.degradation.rep_rates),
            "T_nr0": listify(spec.degradation.nonrep_rates),
        },
        "shock": {
            "gamma": listify(spec.shock.ph.alpha),
            "L": listify(spec.shock.ph.subgen),
            "L_r0": listify(spec.shock.rep_rates),
            "L_nr0": listify(spec.shock.nonrep_rates),
        },
        "vacation": {
            "v": listify(spec.vacation.alpha),
            "V": listify(spec.vacation.subgen),
        },
        "corrective": {
            "beta": listify(spec.corrective.alpha),
            "S": listify(spec.corrective.subgen),
        },
    }
    if spec.preventive is not None:
        data["preventive"] = {
            "beta": listify(spec.preventive.alpha),
            "S": listify(spec.preventive.subgen),
        }
    econ = bundle.economics
    if econ is not None:
        block = {
            "B": econ.reward,
            "A": econ.downtime_cost,
            "level_costs": [listify(c) for c in econ.level_costs],
            "idle_cost": econ.idle_cost,
            "cr_cost": listify(econ.cr_cost),
        }
        if econ.pm_cost is not None:
            block["pm_cost"] = listify(econ.pm_cost)
        fx = econ.fixed
        if any((fx.new_unit, fx.repair, fx.maintenance, fx.incorporation)):
            block["fixed"] = {"nu": fx.new_unit, "cr": fx.repair,
                              "pm": fx.maintenance, "i": fx.incorporation}
        data["economics"] = block
    if bundle.comment:
        data["comment"] = bundle.comment
    return data


def save_config(bundle, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dump_config(bundle), fh, indent=2, sort_keys=True)
        fh.write("\n")

"""Problem descriptions, schedules, and the JSON configuration schema."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import InputError
from ..integrands import Integrand, integrand_from_config, integrand_to_config

CONFIG_VERSION = 1


def radial_power_solution(p: float, dim: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    """u(x) = (p-1)/p N^(-1/(p-1)) |x|^(p/(p-1)), solving Div(|Du|^(p-2) Du) = 1."""
    if p <= 1.0:
        raise InputError("p must be > 1")
    coef = (p - 1.0) / p * dim ** (-1.0 / (p - 1.0))

    def u(x):
        r = np.linalg.norm(np.asarray(x, float), axis=-1)
        return coef * r ** (p / (p - 1.0))

    return u


def radial_power_gradient(p: float, dim: int = 2) -> Callable[[np.ndarray], np.ndarray]:
    def du(x):
        x = np.asarray(x, float)
        r = np.linalg.norm(x, axis=-1)
        rs = np.maximum(r, 1e-300)
        mag = (rs / dim) ** (1.0 / (p - 1.0))
        return (mag / rs)[..., None] * x

    return du


_BOUNDARY_KINDS = ("zero", "constant", "affine", "quadratic", "radial_power")
_SOURCE_KINDS = ("zero", "constant")


def make_boundary(kind: str, **params) -> Callable[[np.ndarray], np.ndarray]:
    """Trace functions for the JSON config; evaluated at boundary nodes."""
    if kind == "zero":
        return lambda x: np.zeros(np.asarray(x, float).shape[:-1])
    if kind == "constant":
        value = float(params.pop("value"))
        maker = lambda x: np.full(np.asarray(x, float).shape[:-1], value)
    elif kind == "affine":
        slope = np.asarray(params.pop("slope"), float)
        maker = lambda x: np.asarray(x, float) @ slope
    elif kind == "quadratic":
        maker = lambda x: np.sum(np.asarray(x, float) ** 2, axis=-1)
        scale = float(params.pop("scale", 1.0))
        if scale != 1.0:
            inner = maker
            maker = lambda x: scale * inner(x)
    elif kind == "radial_power":
        p = float(params.pop("p"))
        dim = int(params.pop("dim", 2))
        maker = radial_power_solution(p, dim)
    else:
        raise InputError(f"unknown boundary kind {kind!r} (known: {_BOUNDARY_KINDS})")
    if params:
        raise InputError(f"boundary kind {kind!r}: unknown parameters {sorted(params)}")
    return maker


def make_source(kind: str, **params) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "zero":
        maker = lambda x: np.zeros(np.asarray(x, float).shape[:-1])
    elif kind == "constant":
        value = float(params.pop("value"))
        maker = lambda x: np.full(np.asarray(x, float).shape[:-1], value)
    else:
        raise InputError(f"unknown source kind {kind!r} (known: {_SOURCE_KINDS})")
    if params:
        raise InputError(f"source kind {kind!r}: unknown parameters {sorted(params)}")
    return maker


@dataclass(frozen=True)
class ProblemSpec:
    """Dirichlet minimization of  J(w) = int F(Dw) + f w  on [-L, L]^dim.

    The minimizer solves Div(DF(Du)) = f weakly (the discrete first-order
    condition is sum_s vol (DF(Du), Dphi_i) + sum w f phi_i = 0 per interior
    hat function).
    """

    integrand: Integrand
    cells: int = 64
    half_width: float = 1.0
    boundary: Callable[[np.ndarray], np.ndarray] = None
    source: Callable[[np.ndarray], np.ndarray] = None
    source_exponent: float = 2.0
    boundary_desc: dict | None = None
    source_desc: dict | None = None

    def __post_init__(self):
        if self.boundary is None:
            object.__setattr__(self, "boundary", make_boundary("zero"))
            object.__setattr__(self, "boundary_desc", {"kind": "zero", "params": {}})
        if self.source is None:
            object.__setattr__(self, "source", make_source("zero"))
            object.__setattr__(self, "source_desc", {"kind": "zero", "params": {}})
        if self.source_exponent <= 1.0:
            raise InputError("source exponent must be > 1")

    @property
    def dim(self) -> int:
        return self.integrand.dim

    def with_cells(self, cells: int) -> "ProblemSpec":
        from dataclasses import replace
        return replace(self, cells=cells)


@dataclass(frozen=True)
class RegularizationSchedule:
    """Stages (eps_n, mu_n), both nonincreasing to zero.

    eps is the integrand mollification radius, mu the quadratic tilt.  A
    final (0, 0) stage realizes the limit problem; the cascade monitors the
    coupling mu^(p-1) Lip^(2-p) -> 0 and the stagewise energy convergence.
    """

    stages: tuple = ((0.08, 1e-2), (0.02, 1e-4), (0.005, 1e-7), (0.0, 0.0))

    def __post_init__(self):
        stages = tuple((float(e), float(m)) for e, m in self.stages)
        if not stages:
            raise InputError("schedule needs at least one stage")
        eps = [s[0] for s in stages]
        mus = [s[1] for s in stages]
        if any(e < 0 for e in eps) or any(m < 0 for m in mus):
            raise InputError("eps and mu must be >= 0")
        if any(a < b for a, b in zip(eps, eps[1:])) or any(a < b for a, b in zip(mus, mus[1:])):
            raise InputError("eps and mu must be nonincreasing along the schedule")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def geometric(cls, n_stages: int = 4, eps0: float = 0.08, mu0: float = 1e-2,
                  decay: float = 0.05, final_exact: bool = True) -> "RegularizationSchedule":
        stages = [(eps0 * decay ** k, mu0 * decay ** k) for k in range(n_stages)]
        if final_exact:
            stages.append((0.0, 0.0))
        return cls(tuple(stages))

    @classmethod
    def single_exact(cls) -> "RegularizationSchedule":
        return cls(((0.0, 0.0),))


# -- JSON config ----------------------------------------------------------------

_TOP_KEYS = {"version", "problem", "schedule", "solver", "report"}
_PROBLEM_KEYS = {"integrand", "cells", "half_width", "boundary", "source",
                 "source_exponent"}


def _check_keys(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise InputError(f"unknown keys {sorted(extra)} in {where} "
                         f"(allowed: {sorted(allowed)})")


def load_problem_config(cfg: dict | str | Path):
    """Parse and validate a solver config; unknown keys are rejected.

    Returns (ProblemSpec, RegularizationSchedule, solver_options, report_options).
    """
    if not isinstance(cfg, dict):
        cfg = json.loads(Path(cfg).read_text())
    _check_keys(cfg, _TOP_KEYS, "config")
    if cfg.get("version") != CONFIG_VERSION:
        raise InputError(f"config version must be {CONFIG_VERSION}")
    if "problem" not in cfg:
        raise InputError("config requires a 'problem' section")
    prob = dict(cfg["problem"])
    _check_keys(prob, _PROBLEM_KEYS, "problem")
    integrand = integrand_from_config(prob["integrand"])
    bdesc = dict(prob.get("boundary", {"kind": "zero", "params": {}}))
    _check_keys(bdesc, {"kind", "params"}, "boundary")
    sdesc = dict(prob.get("source", {"kind": "zero", "params": {}}))
    _check_keys(sdesc, {"kind", "params"}, "source")
    spec = ProblemSpec(
        integrand=integrand,
        cells=int(prob.get("cells", 64)),
        half_width=float(prob.get("half_width", 1.0)),
        boundary=make_boundary(bdesc["kind"], **bdesc.get("params", {})),
        source=make_source(sdesc["kind"], **sdesc.get("params", {})),
        source_exponent=float(prob.get("source_exponent", 2.0)),
        boundary_desc=bdesc,
        source_desc=sdesc,
    )
    sched_cfg = dict(cfg.get("schedule", {}))
    _check_keys(sched_cfg, {"stages"}, "schedule")
    if "stages" in sched_cfg:
        schedule = RegularizationSchedule(tuple(tuple(s) for s in sched_cfg["stages"]))
    else:
        schedule = RegularizationSchedule()
    solver_opts = dict(cfg.get("solver", {}))
    _check_keys(solver_opts, {"tol", "max_iter"}, "solver")
    report_opts = dict(cfg.get("report", {}))
    _check_keys(report_opts, {"ball_center", "ball_radius", "m", "theta"}, "report")
    return spec, schedule, solver_opts, report_opts


def problem_config_to_dict(spec: ProblemSpec, schedule: RegularizationSchedule) -> dict:
    return {
        "version": CONFIG_VERSION,
        "problem": {
            "integrand": integrand_to_config(spec.integrand),
            "cells": spec.cells,
            "half_width": spec.half_width,
            "boundary": spec.boundary_desc or {"kind": "zero", "params": {}},
            "source": spec.source_desc or {"kind": "zero", "params": {}},
            "source_exponent": spec.source_exponent,
        },
        "schedule": {"stages": [list(s) for s in schedule.stages]},
    }

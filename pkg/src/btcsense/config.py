"""Run configuration: JSON documents, CLI overrides, resonance defaults.

A run is described by a single JSON document so that every output can be
reproduced from one serializable source of truth; command-line flags
override individual fields.  All frequencies are quoted in units of kappa
(kappa = 1 by default).
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .dynamics import SimParams

MODES = ("simulate", "sweep-resonance", "scan-n", "scan-kappa", "compare-mf", "fit")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class PhaseError(ValueError):
    """No resonance defaults exist outside the time-crystal phase."""


def resonance_defaults(
    omega0: float, kappa: float, arcsin_omega: float | None = None
) -> tuple[float, float]:
    """AC frequency and phase matching the intrinsic collective oscillation.

    Returns (sqrt(omega0^2 - kappa^2), arcsin(kappa / omega0)).  The
    arcsin argument's denominator is omega0 by convention here (giving
    phi -> 0 in the kappa -> 0 limit); ``arcsin_omega`` overrides that
    denominator for anyone wanting a different convention.

    Raises
    ------
    PhaseError
        If omega0 <= kappa: the oscillating phase does not exist and no
        resonance is defined.  Field values can still be set manually.
    """
    if omega0 <= kappa:
        raise PhaseError(
            f"resonance undefined for omega0 = {omega0:g} <= kappa = {kappa:g}"
        )
    omega = omega0 if arcsin_omega is None else arcsin_omega
    ratio = kappa / omega
    if not -1.0 <= ratio <= 1.0:
        raise PhaseError(f"arcsin argument kappa/omega = {ratio:g} outside [-1, 1]")
    return math.sqrt(omega0**2 - kappa**2), math.asin(ratio)


@dataclass
class RunConfig:
    """Everything one invocation needs: mode, physics, grids, output."""

    mode: str
    params: SimParams
    output_dir: str = "out"
    n_workers: int = 1
    n_grid: list[int] = field(default_factory=list)
    delta_phi_grid: list[float] = field(default_factory=list)  # units of pi
    delta_omega_grid: list[float] = field(default_factory=list)  # units of kappa
    kappa_grid: list[float] = field(default_factory=list)
    mf_dg: float = 0.01
    envelope_threshold: float = 0.01
    fit_inputs: list[str] = field(default_factory=list)
    resonance_arcsin_omega: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose one of {MODES}")
        if self.n_workers < 1:
            raise ConfigError(f"n_workers must be positive, got {self.n_workers!r}")
        if not 0.0 < self.envelope_threshold < 1.0:
            raise ConfigError("envelope_threshold must be in (0, 1)")
        if self.mf_dg <= 0:
            raise ConfigError("mf_dg must be positive")
        needs = {
            "sweep-resonance": ("delta_phi_grid", "delta_omega_grid"),
            "scan-n": ("n_grid",),
            "scan-kappa": ("n_grid", "kappa_grid"),
            "compare-mf": ("n_grid",),
            "fit": ("fit_inputs",),
        }
        for name in needs.get(self.mode, ()):
            if not getattr(self, name):
                raise ConfigError(f"mode {self.mode!r} requires a non-empty {name}")

    def resolve_field(self, params: SimParams | None = None) -> SimParams:
        """Fill missing omega_ac / phi from the resonance defaults."""
        p = self.params if params is None else params
        if p.ac_on and (p.omega_ac is None or p.phi is None):
            try:
                omega_ac, phi = resonance_defaults(
                    p.omega0, p.kappa, self.resonance_arcsin_omega
                )
            except PhaseError as exc:
                raise ConfigError(
                    f"cannot default the AC field: {exc}; set omega_ac and phi "
                    "explicitly"
                ) from exc
            p = dataclasses.replace(
                p,
                omega_ac=omega_ac if p.omega_ac is None else p.omega_ac,
                phi=phi if p.phi is None else p.phi,
            )
        return p


_PARAM_KEYS = {f.name for f in dataclasses.fields(SimParams)}
_TOP_KEYS = {
    "mode",
    "params",
    "output_dir",
    "n_workers",
    "n_grid",
    "delta_phi_grid",
    "delta_omega_grid",
    "kappa_grid",
    "mf_dg",
    "envelope_threshold",
    "fit_inputs",
    "resonance_arcsin_omega",
}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"config document must be an object, got {type(doc).__name__}")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    raw_params = doc.get("params", {})
    unknown_p = set(raw_params) - _PARAM_KEYS
    if unknown_p:
        raise ConfigError(f"unknown params keys: {sorted(unknown_p)}")
    if "mode" not in doc:
        raise ConfigError("config must set a mode (or pass one on the command line)")
    try:
        params = SimParams(**raw_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from exc
    kwargs = {k: v for k, v in doc.items() if k not in ("params",)}
    try:
        return RunConfig(params=params, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    """Parse a JSON config file, applying flat override values on top.

    Override keys in ``params`` namespace (n_spins, omega0, ...) land in
    the params object; the rest are top-level config fields.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if overrides:
        doc = dict(doc) if isinstance(doc, dict) else doc
        for key, value in overrides.items():
            if key in _PARAM_KEYS:
                doc.setdefault("params", {})
                doc["params"] = dict(doc["params"])
                doc["params"][key] = value
            else:
                doc[key] = value
    return config_from_dict(doc)

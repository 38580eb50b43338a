"""Named effective one-dimensional models and their envelope parameters.

A model supplies the nuclear potential V~ and the pair interaction W~ of the
scaled N-electron Hamiltonian together with integers (mu, nu) and a charge
multiplier c such that

    V~(x) <= c V_mu(x),        W~(x) >= V_{nu-1}(x/sqrt2)/sqrt2.

The certificate code consumes only (mu, nu, c).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .errors import EnvelopeError, InvalidInputError
from .interactions import (CoefficientVector, SQRT2, det_coefficients, pair_coefficients,
                           slater_pair_coefficients, w_values)
from .potentials import vav, vm

VALIDATION_GRID = np.round(np.arange(0, 501) * 0.1, 10)
ENVELOPE_SLACK = 1e-9


@dataclass(frozen=True)
class ModelSpec:
    name: str
    nuclear_potential: Callable
    interaction: CoefficientVector
    mu: int
    nu: int
    charge_multiplier: float = 1.0
    label: str = ""
    # index j of the checked lower bound W >= V_j(x/sqrt2)/sqrt2; defaults to max(nu-1, 0)
    interaction_floor: int | None = None
    description: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.name not in ("m-momentum", "slater", "custom"):
            raise InvalidInputError(f"unknown model kind {self.name!r}")
        if self.mu < 0 or self.nu < 0:
            raise InvalidInputError("mu and nu must be nonnegative")
        if not self.charge_multiplier >= 1:
            raise InvalidInputError("charge multiplier must be >= 1")
        if self.interaction_floor is None:
            object.__setattr__(self, "interaction_floor", max(self.nu - 1, 0))

    @property
    def satisfies_nu_le_2mu(self) -> bool:
        return self.nu <= 2 * self.mu

    def interaction_values(self, x):
        return w_values(self.interaction, x)

    def envelope_violations(self, xs=VALIDATION_GRID) -> dict[str, tuple[float, float]]:
        """Worst (x, amount) for each envelope inequality; amount > 0 is a violation."""
        xs = np.asarray(xs, dtype=float)
        nuc = np.asarray(self.nuclear_potential(xs), dtype=float)
        excess = nuc - self.charge_multiplier * vm(self.mu, xs)
        w = self.interaction_values(xs)
        deficit = vm(self.interaction_floor, xs / SQRT2) / SQRT2 - w
        out = {}
        for key, arr in (("nuclear", excess), ("interaction", deficit)):
            i = int(np.argmax(arr))
            out[key] = (float(xs[i]), float(arr[i]))
        return out

    def check_envelope(self, xs=VALIDATION_GRID, slack: float = ENVELOPE_SLACK) -> None:
        for key, (x, amount) in self.envelope_violations(xs).items():
            if amount > slack:
                raise EnvelopeError(f"{self.label or self.name}: {key} envelope violated", x, amount)


def make_m_model(m: int) -> ModelSpec:
    """All electrons in the Landau state gamma_m: V~ = V_m, W~ = W_{m,m}."""
    if int(m) != m or m < 0:
        raise InvalidInputError("m must be a nonnegative integer")
    m = int(m)
    return ModelSpec("m-momentum", partial(vm, m), pair_coefficients(m, m),
                     mu=m, nu=2 * m, charge_multiplier=1.0, label=f"m:{m}",
                     description={"kind": "m", "m": m})


def make_slater_model(N: int) -> ModelSpec:
    """Antisymmetrized product of gamma_0 ... gamma_{N-1}.

    V_av <= 2 V_N gives mu = N with charge multiplier 2; W_det dominates
    V_{2N-3}(x/sqrt2)/sqrt2, i.e. nu = 2N - 2.
    """
    if int(N) != N or N < 2:
        raise InvalidInputError("Slater model needs N >= 2")
    N = int(N)
    return ModelSpec("slater", partial(vav, N), det_coefficients(list(range(N))),
                     mu=N, nu=2 * N - 2, charge_multiplier=2.0, label=f"slater:{N}",
                     interaction_floor=2 * N - 3, description={"kind": "slater", "N": N})


def make_custom_model(nuclear: Callable, interaction: CoefficientVector, mu: int, nu: int,
                      multiplier: float = 1.0, label: str = "custom",
                      xs=VALIDATION_GRID) -> ModelSpec:
    """User-declared model; the declared envelope is verified before returning."""
    spec = ModelSpec("custom", nuclear, interaction, int(mu), int(nu), float(multiplier),
                     label=label)
    spec.check_envelope(xs)
    return spec


def _nuclear_from_json(d: dict) -> Callable:
    kind = d.get("type")
    if kind == "vm":
        return partial(vm, int(d["m"]))
    if kind == "vav":
        return partial(vav, int(d["N"]))
    if kind == "mix":
        terms = [(float(c), int(m)) for m, c in enumerate(d["weights"]) if c]
        return lambda x: sum(c * vm(m, x) for c, m in terms)
    raise InvalidInputError(f"unknown nuclear potential type {kind!r}")


def _interaction_from_json(d: dict) -> CoefficientVector:
    kind = d.get("type")
    if kind == "product":
        return pair_coefficients(int(d["m1"]), int(d["m2"]))
    if kind == "slater-pair":
        return slater_pair_coefficients(int(d["j"]), int(d["k"]))
    if kind == "det":
        return det_coefficients([int(m) for m in d["m"]])
    if kind == "weights":
        return CoefficientVector(tuple(float(w) for w in d["weights"]), "custom")
    raise InvalidInputError(f"unknown interaction type {kind!r}")


def load_custom_model(path: str | os.PathLike) -> ModelSpec:
    """Read a custom model JSON document.

    Example::

        {"nuclear": {"type": "vm", "m": 1},
         "interaction": {"type": "product", "m1": 0, "m2": 0},
         "mu": 1, "nu": 1, "multiplier": 1}
    """
    with open(path) as fh:
        doc = json.load(fh)
    try:
        return make_custom_model(_nuclear_from_json(doc["nuclear"]),
                                 _interaction_from_json(doc["interaction"]),
                                 doc["mu"], doc["nu"], doc.get("multiplier", 1.0),
                                 label=f"custom:{path}")
    except KeyError as exc:
        raise InvalidInputError(f"custom model file missing field {exc}") from None


@dataclass(frozen=True)
class ModelFamily:
    """Model as a function of electron number (the Slater model depends on N)."""

    label: str
    factory: Callable[[int], ModelSpec]

    def at(self, N: int) -> ModelSpec:
        return self.factory(N)


def _slater_family(N: int) -> ModelSpec:
    # one electron in gamma_0 feels V_av = V_0 and no interaction
    return make_m_model(0) if N < 2 else make_slater_model(N)


def parse_model(text: str) -> ModelSpec | ModelFamily:
    """Model selector strings: m0, m:<k>, slater, slater:<N>, custom:<file>."""
    t = text.strip()
    if t == "m0":
        return make_m_model(0)
    if t.startswith("m:"):
        return make_m_model(int(t[2:]))
    if t == "slater":
        return ModelFamily("slater", _slater_family)
    if t.startswith("slater:"):
        return make_slater_model(int(t[7:]))
    if t.startswith("custom:"):
        return load_custom_model(t[7:])
    raise InvalidInputError(f"unrecognised model {text!r}")


def model_at(model: ModelSpec | ModelFamily, N: int) -> ModelSpec:
    return model.at(N) if isinstance(model, ModelFamily) else model

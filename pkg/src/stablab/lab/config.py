"""JSON experiment configuration: parsing, validation and instance construction."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .. import algebra as alg
from ..defects import BilinearMap, identity_op, linear_op, multiplication_map
from ..errors import ConfigError, StabLabError
from ..newton import Instance, IterationConfig
from ..tensor import TensorRep, builtin_diagonal, validate_diagonal
from .generators import gen_perturbed_hom, gen_perturbed_product, group_hom

_MASK = (1 << 64) - 1


def splitmix64(x):
    """One round of the SplitMix64 output function."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def trial_seed(base_seed, index):
    return splitmix64((base_seed ^ index) & _MASK)


def _schema():
    text = resources.files("stablab.lab").joinpath("config.schema.json").read_text()
    return json.loads(text)


def _path(err):
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


@dataclass
class Experiment:
    instance: Instance
    iteration: IterationConfig
    seed: int


class ExperimentConfig:
    """A validated configuration document; :meth:`build` turns it into an :class:`Instance`."""

    def __init__(self, raw):
        validator = jsonschema.Draft202012Validator(_schema())
        errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
        if errors:
            # oneOf failures hide the useful message in the best-matching branch
            err = jsonschema.exceptions.best_match(errors)
            raise ConfigError(err.message, where=f"field {_path(err)}")
        self.raw = raw

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(str(exc), where=str(path)) from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, where=f"{path}: line {exc.lineno} column {exc.colno}") from exc
        return cls(raw)

    def with_value(self, key, value):
        """A copy with one sweepable parameter replaced (``eta``, ``epsilon_t`` or ``epsilon_psi``)."""
        raw = copy.deepcopy(self.raw)
        if key == "eta":
            raw["iteration"].pop("theta", None)
            raw["iteration"]["eta"] = value
        elif key == "epsilon_t":
            if raw["t_op"]["kind"] != "perturbed":
                raise ConfigError("sweeping epsilon_t needs a perturbed t_op", where="field t_op/kind")
            raw["t_op"]["epsilon_t"] = value
        elif key == "epsilon_psi":
            psi = raw["psi"]
            if psi["kind"] == "explicit":
                raise ConfigError("cannot sweep epsilon_psi of an explicit psi", where="field psi/kind")
            if psi["kind"] == "exact_product":
                raw["psi"] = {"kind": "perturbed_product", "preserve_unit": True,
                              "seed": raw.get("base_seed", 0)}
            raw["psi"]["epsilon_psi"] = value
        else:
            raise ConfigError(f"cannot vary {key!r}", where="--vary")
        return ExperimentConfig(raw)

    @property
    def base_seed(self):
        return self.raw.get("base_seed", 0)

    @property
    def budget(self):
        return self.raw.get("norm_budget", 10**6)

    def build(self, trial=None):
        """Construct the experiment; ``trial`` reseeds every random generator."""
        raw = self.raw
        seed = self.base_seed if trial is None else trial_seed(self.base_seed, trial)
        A = _guard("algebra_domain", build_algebra, raw["algebra_domain"])
        B = _guard("algebra_codomain", build_algebra, raw["algebra_codomain"])
        diag = _guard("diagonal", build_diagonal, raw.get("diagonal", "builtin"), A)
        psi = _guard("psi", build_psi, raw["psi"], B, None if trial is None else splitmix64(seed ^ 1))
        T = _guard("t_op", build_t_op, raw["t_op"], A, B, None if trial is None else splitmix64(seed ^ 2))
        it = raw["iteration"]
        iteration = _guard("iteration", lambda: IterationConfig(**it))
        bounds = raw.get("bounds", {})
        inst = Instance(diag, psi, T, K=bounds.get("K"), L=bounds.get("L"),
                        hypotheses=raw.get("hypotheses", True), budget=self.budget, seed=seed)
        return Experiment(inst, iteration, seed)


def _guard(field, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (StabLabError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc), where=f"field {field}") from exc


def build_algebra(spec):
    if "structure" in spec:
        norm = alg.norm_from_dict(spec["norm"], len(spec["unit"]))
        return alg.make_algebra(spec["structure"], spec["unit"], norm,
                                allow_unnormalized=spec.get("allow_unnormalized", False))
    kind, p = spec["kind"], spec["params"]
    if kind == "cyclic":
        return alg.cyclic_algebra(int(p["k"]))
    if kind == "matrix":
        return alg.matrix_algebra(int(p["n"]))
    if kind == "pointwise":
        return alg.pointwise_algebra(int(p["d"]))
    if "symmetric" in p:
        return alg.symmetric_group_algebra(int(p["symmetric"]))
    return alg.group_algebra(np.array(p["cayley"], dtype=int), np.array(p["inverses"], dtype=int))


def build_diagonal(spec, A):
    if spec == "builtin":
        return builtin_diagonal(A)
    return validate_diagonal(A, TensorRep(spec["left"], spec["right"]), spec.get("tol", 1e-12))


def build_psi(spec, B, seed=None):
    kind = spec["kind"]
    if kind == "exact_product":
        return multiplication_map(B)
    if kind == "perturbed_product":
        return gen_perturbed_product(B, spec["epsilon_psi"], spec.get("preserve_unit", True),
                                     spec.get("seed", 0) if seed is None else seed)
    return BilinearMap(np.array(spec["tensor"], dtype=float), (B, B), B)


def build_t_op(spec, A, B, seed=None):
    kind = spec["kind"]
    if kind == "identity":
        if A.dim != B.dim:
            raise ConfigError("identity needs equal domain and codomain", where="field t_op")
        return identity_op(A) if A is B else linear_op(np.eye(A.dim), A, B)
    if kind == "group_hom":
        return group_hom(A, B, spec["map"])
    if kind == "explicit":
        return linear_op(np.array(spec["matrix"], dtype=float), A, B)
    base = build_t_op(spec["base"], A, B)
    return gen_perturbed_hom(A, B, base, spec["epsilon_t"], spec.get("preserve_unit", True),
                             spec.get("seed", 0) if seed is None else seed, spec.get("direction"))

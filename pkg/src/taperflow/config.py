"""Strict JSON configuration (schema "v1").

Three request kinds share one document format, selected by ``"kind"``:

* ``experiment`` (default) — Monte Carlo experiment, see :class:`ExperimentConfig`
* ``simulate`` — a single seeded path and its partial sums
* ``constants`` — a table of limit constants

Unknown keys are rejected; all problems are reported together with their
JSON paths.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError, TaperflowError
from .filters import FilterSpec, classify_innovation_taper
from .innovations import InnovationModel
from .montecarlo import NORMALIZERS, ROUTES, ExperimentConfig

SCHEMA = "v1"

_COMMON = {"schema", "kind"}
_MODEL = {"case", "beta", "gamma1", "c", "innovation"}
_KEYS = {
    "experiment": _COMMON | _MODEL | {"n", "t", "reps", "seed", "cov_pairs", "normalizer", "route"},
    "simulate": _COMMON | _MODEL | {"n", "t", "seed"},
    "constants": _COMMON | {"ids", "t", "beta", "c", "method"},
}
_INNOVATION_KEYS = {"type", "alpha", "gamma"}


@dataclass(frozen=True)
class SimulationRequest:
    case: int
    beta: float
    gamma1: float | None
    c: float
    innovation: InnovationModel
    n: int
    t_grid: tuple
    seed: int


@dataclass(frozen=True)
class ConstantsRequest:
    ids: tuple
    t_grid: tuple
    beta: float | None
    c: float
    method: str = "auto"


class _Errors:
    def __init__(self):
        self.items = []

    def add(self, path, msg):
        self.items.append(f"{path}: {msg}")

    def raise_if_any(self):
        if self.items:
            raise ConfigurationError("invalid configuration; " + "; ".join(self.items))


def _is_int(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


def _num(doc, key, err, default=None, required=False):
    if key not in doc:
        if required:
            err.add(f"$.{key}", "required")
        return default
    v = doc[key]
    if not _is_num(v):
        err.add(f"$.{key}", f"expected a number, got {v!r}")
        return default
    return float(v)


def _int(doc, key, err, default=None, required=False):
    if key not in doc:
        if required:
            err.add(f"$.{key}", "required")
        return default
    v = doc[key]
    if not _is_int(v):
        err.add(f"$.{key}", f"expected an integer, got {v!r}")
        return default
    return int(v)


def _num_list(doc, key, err, default, integer=False):
    if key not in doc:
        return default
    v = doc[key]
    if _is_num(v):
        v = [v]
    ok = _is_int if integer else _is_num
    if not isinstance(v, list) or not v or not all(ok(x) for x in v):
        err.add(f"$.{key}", f"expected a non-empty list of {'integers' if integer else 'numbers'}")
        return default
    return tuple(int(x) if integer else float(x) for x in v)


def _innovation(doc, err):
    spec = doc.get("innovation", {"type": "gaussian"})
    if not isinstance(spec, dict):
        err.add("$.innovation", "expected an object")
        return InnovationModel.gaussian()
    for k in sorted(set(spec) - _INNOVATION_KEYS):
        err.add(f"$.innovation.{k}", "unknown key")
    kind = spec.get("type", "tapered-pareto" if ("alpha" in spec or "gamma" in spec) else "gaussian")
    if kind == "gaussian":
        if "alpha" in spec or "gamma" in spec:
            err.add("$.innovation", "gaussian innovations take no alpha/gamma")
        return InnovationModel.gaussian()
    if kind != "tapered-pareto":
        err.add("$.innovation.type", f"expected 'gaussian' or 'tapered-pareto', got {kind!r}")
        return InnovationModel.gaussian()
    a, g = spec.get("alpha"), spec.get("gamma")
    for k, v in (("alpha", a), ("gamma", g)):
        if not _is_num(v) or not v > 0:
            err.add(f"$.innovation.{k}", "required positive number")
    if err.items:
        return InnovationModel.gaussian()
    return InnovationModel.tapered_pareto(float(a), float(g))


def parse_config(text: str):
    """Parse a JSON document into an experiment, simulation or constants request."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON: {exc}") from None
    return parse_document(doc)


def parse_document(doc: dict):
    if not isinstance(doc, dict):
        raise ConfigurationError("$: expected a JSON object")
    err = _Errors()
    if doc.get("schema", SCHEMA) != SCHEMA:
        err.add("$.schema", f"unsupported schema {doc.get('schema')!r} (expected {SCHEMA!r})")
    kind = doc.get("kind", "experiment")
    if kind not in _KEYS:
        err.add("$.kind", f"expected one of {sorted(_KEYS)}")
        err.raise_if_any()
    for k in sorted(set(doc) - _KEYS[kind]):
        err.add(f"$.{k}", "unknown key")

    if kind == "constants":
        ids = _num_list(doc, "ids", err, (), integer=True)
        if not ids:
            err.add("$.ids", "required")
        req = ConstantsRequest(ids, _num_list(doc, "t", err, (1.0,)), _num(doc, "beta", err),
                               _num(doc, "c", err, 1.0), doc.get("method", "auto"))
        if req.method not in ("auto", "closed", "quad"):
            err.add("$.method", "expected 'auto', 'closed' or 'quad'")
        err.raise_if_any()
        return req

    case = _int(doc, "case", err, required=True)
    beta = _num(doc, "beta", err, 0.0)
    gamma1 = _num(doc, "gamma1", err)
    c = _num(doc, "c", err, 1.0)
    innovation = _innovation(doc, err)
    seed = _int(doc, "seed", err, 0)
    t = _num_list(doc, "t", err, (1.0,))
    _model_errors(case, beta, gamma1, c, innovation, err)
    if kind == "simulate":
        n = _int(doc, "n", err, required=True)
        err.raise_if_any()
        _check_model(case, beta, gamma1, c, innovation)
        return SimulationRequest(case, beta, gamma1, c, innovation, n, t, seed)

    n_list = _num_list(doc, "n", err, (1000,), integer=True)
    reps = _int(doc, "reps", err, 4000)
    pairs = doc.get("cov_pairs", [[0.5, 1.0]])
    if not (isinstance(pairs, list) and all(isinstance(p, list) and len(p) == 2
                                            and all(_is_num(x) for x in p) for p in pairs)):
        err.add("$.cov_pairs", "expected a list of [s, t] pairs")
        pairs = []
    normalizer = doc.get("normalizer", "asymptotic")
    if normalizer not in NORMALIZERS:
        err.add("$.normalizer", f"expected one of {list(NORMALIZERS)}")
    route = doc.get("route", "auto")
    if route not in ROUTES:
        err.add("$.route", f"expected one of {list(ROUTES)}")
    err.raise_if_any()
    try:
        return ExperimentConfig(case=case, beta=beta, gamma1=gamma1, c=c, innovation=innovation,
                                n_list=n_list, t_grid=t, reps=reps, seed=seed,
                                cov_pairs=tuple(tuple(p) for p in pairs),
                                normalizer=normalizer, route=route)
    except (DomainError, ConfigurationError) as exc:
        raise ConfigurationError(f"invalid configuration; {exc}") from None


def _model_errors(case, beta, gamma1, c, innovation, err):
    if case is not None and not err.items:
        try:
            FilterSpec.for_case(case, beta, gamma1, c)
        except (DomainError, ConfigurationError) as exc:
            err.add("$.case/$.beta", str(exc))
    if innovation.kind == "tapered-pareto":
        try:
            kind = classify_innovation_taper(innovation.gamma, innovation.alpha)
        except DomainError as exc:
            err.add("$.innovation", str(exc))
            return
        if kind != "hard":
            err.add("$.innovation", f"{kind} tapering (gamma={innovation.gamma}, "
                    f"1/alpha={1 / innovation.alpha:.6g}) is out of scope: only hard tapering "
                    "(gamma < 1/alpha) is supported")


def _check_model(case, beta, gamma1, c, innovation):
    # reuse the experiment validation (case/beta/gamma1 consistency, hard tapering)
    try:
        ExperimentConfig(case=case, beta=beta, gamma1=gamma1, c=c, innovation=innovation, reps=1)
    except (DomainError, ConfigurationError) as exc:
        raise ConfigurationError(f"invalid configuration; {exc}") from None


def config_to_dict(config) -> dict:
    if isinstance(config, ExperimentConfig):
        return {
            "schema": SCHEMA, "kind": "experiment", "case": config.case, "beta": config.beta,
            "gamma1": config.gamma1, "c": config.c, "innovation": config.innovation.to_dict(),
            "n": list(config.n_list), "t": list(config.t_grid), "reps": config.reps,
            "seed": config.seed, "cov_pairs": [list(p) for p in config.cov_pairs],
            "normalizer": config.normalizer, "route": config.route,
        }
    if isinstance(config, SimulationRequest):
        return {
            "schema": SCHEMA, "kind": "simulate", "case": config.case, "beta": config.beta,
            "gamma1": config.gamma1, "c": config.c, "innovation": config.innovation.to_dict(),
            "n": config.n, "t": list(config.t_grid), "seed": config.seed,
        }
    if isinstance(config, ConstantsRequest):
        d = {"schema": SCHEMA, "kind": "constants", "ids": list(config.ids),
             "t": list(config.t_grid), "c": config.c, "method": config.method}
        if config.beta is not None:
            d["beta"] = config.beta
        return d
    raise TaperflowError(f"cannot serialize {type(config).__name__}")


def serialize(config) -> str:
    doc = config_to_dict(config)
    if doc.get("gamma1", 0) is None:
        del doc["gamma1"]
    return json.dumps(doc, indent=2, sort_keys=True)

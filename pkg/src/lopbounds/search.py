"""Numerical search for heralded gate implementations.

The circuit unitary is parameterized as ``exp(iH)`` with ``H`` Hermitian, so
``n**2`` real numbers cover all of U(n). For each heralding pattern the
score ``p - w * deviation**2`` is maximized with Nelder-Mead (adaptive
simplex), the penalty is sharpened once by a factor 10, and the result is
pulled onto the valid set by a least-squares solve on the residual
``M - lam*T``. Every reported circuit is re-checked from scratch.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import schur
from scipy.optimize import least_squares, minimize

from .bounds import gate_bound
from .gates import (GateSpec, HeraldedMap, PostselectedCircuit, check_postselected_gate)
from .optics import ModeUnitary
from .postselect import PostselectionPattern

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-8


class BoundViolationError(RuntimeError):
    """A valid circuit beat a proven upper bound; the simulator is wrong somewhere."""


@dataclass
class SearchConfig:
    n_ancilla_modes: int = 2
    n_ancilla_photons: int = 1
    restarts: int = 20
    max_iterations: int = 4000
    validity_tolerance: float = 1e-8
    penalty_weight: float = 1e3
    seed: int = 0
    workers: int = 1
    warm_start: Optional[PostselectedCircuit] = None

    def __post_init__(self):
        if self.n_ancilla_photons > self.n_ancilla_modes:
            raise ValueError("at most one helper photon per ancilla mode")
        if self.n_ancilla_photons < 0 or self.n_ancilla_modes < 0:
            raise ValueError("ancilla budget must be non-negative")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @property
    def ancilla_preparation(self) -> tuple[int, ...]:
        return (1,) * self.n_ancilla_photons + (0,) * (self.n_ancilla_modes - self.n_ancilla_photons)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d.pop("warm_start")
        d["warm_start"] = None if self.warm_start is None else self.warm_start.to_json_dict()
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> "SearchConfig":
        data = dict(data)
        warm = data.pop("warm_start", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown search config fields: {sorted(unknown)}")
        cfg = cls(**data)
        if warm is not None:
            cfg.warm_start = PostselectedCircuit.from_json_dict(warm)
        return cfg


@dataclass
class SearchResult:
    best_circuit: PostselectedCircuit
    best_success_probability: float
    best_deviation: float
    is_valid: bool
    history: list[float]
    best_restart: int
    config: SearchConfig = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "best_success_probability": self.best_success_probability,
            "best_deviation": self.best_deviation,
            "is_valid": self.is_valid,
            "best_restart": self.best_restart,
            "history": self.history,
            "config": self.config.to_json_dict(),
            "best_circuit": self.best_circuit.to_json_dict(),
        }


def parameterize_unitary(params) -> ModeUnitary:
    """exp(iH): ``params[:n]`` is the diagonal of H, the rest are (re, im) of its upper triangle."""
    x = np.asarray(params, dtype=float).ravel()
    n = int(round(np.sqrt(x.size)))
    if n * n != x.size or n == 0:
        raise ValueError(f"parameter vector length must be a positive square, got {x.size}")
    h = np.diag(x[:n]).astype(complex)
    iu = np.triu_indices(n, 1)
    off = x[n:].reshape(-1, 2)
    h[iu] = off[:, 0] + 1j * off[:, 1]
    h[iu[1], iu[0]] = off[:, 0] - 1j * off[:, 1]
    w, v = np.linalg.eigh(h)
    return ModeUnitary((v * np.exp(1j * w)) @ v.conj().T)


def unitary_to_params(u: ModeUnitary) -> np.ndarray:
    """Inverse of :func:`parameterize_unitary` (one branch of the matrix logarithm)."""
    t, z = schur(u.matrix, output="complex")
    h = (z * np.angle(np.diag(t))) @ z.conj().T
    h = (h + h.conj().T) / 2
    n = u.n_modes
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.diag(h).real, np.column_stack([h[iu].real, h[iu].imag]).ravel()])


def heralding_patterns(config: SearchConfig, n_signal_modes: int) -> list[PostselectionPattern]:
    """Ancilla patterns that herald as many photons as were injected, so the signal sector is kept."""
    modes = tuple(range(n_signal_modes, n_signal_modes + config.n_ancilla_modes))
    k = config.n_ancilla_photons
    return [PostselectionPattern(modes, counts)
            for counts in itertools.product(range(k + 1), repeat=len(modes)) if sum(counts) == k]


def _score(x, hm: HeraldedMap, weight: float) -> float:
    m = hm.matrix(parameterize_unitary(x).matrix)
    lam, dev = hm.fit(m)
    return abs(lam) ** 2 - weight * dev ** 2


def objective(params, spec: GateSpec, config: SearchConfig,
              pattern: Optional[PostselectionPattern] = None) -> float:
    """Success probability minus ``penalty_weight * deviation**2``; best over patterns if none given."""
    patterns = [pattern] if pattern is not None else heralding_patterns(config, spec.n_signal_modes)
    return max(_score(params, HeraldedMap(spec, config.ancilla_preparation, p.required_counts),
                      config.penalty_weight) for p in patterns)


def _residual(x, hm: HeraldedMap) -> np.ndarray:
    m = hm.matrix(parameterize_unitary(x).matrix)
    lam, _ = hm.fit(m)
    r = (m - lam * hm.spec.embedded_target).ravel()
    return np.concatenate([r.real, r.imag])


def _local_search(x0, hm: HeraldedMap, config: SearchConfig) -> np.ndarray:
    x = np.asarray(x0, dtype=float)
    for weight in (config.penalty_weight, 10 * config.penalty_weight):
        res = minimize(lambda v: -_score(v, hm, weight), x, method="Nelder-Mead",
                       options={"maxiter": config.max_iterations, "maxfev": 2 * config.max_iterations,
                                "xatol": 1e-10, "fatol": 1e-10, "adaptive": True})
        x = res.x
    polished = least_squares(_residual, x, args=(hm,), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return polished.x


@dataclass
class _Candidate:
    restart: int
    pattern: PostselectionPattern
    params: np.ndarray
    probability: float
    deviation: float
    score: float


def _run_restart(r: int, spec: GateSpec, config: SearchConfig,
                 layouts: list[tuple[PostselectionPattern, HeraldedMap]]) -> list[_Candidate]:
    n = spec.n_signal_modes + config.n_ancilla_modes
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, r]))
    if config.warm_start is not None and r == 0:
        x0 = unitary_to_params(config.warm_start.unitary)
    else:
        x0 = rng.uniform(-np.pi, np.pi, n * n)
    out = []
    for pattern, hm in layouts:
        if config.warm_start is not None and r == 0 and pattern.required_counts != config.warm_start.heralded_counts:
            continue
        x = _local_search(x0, hm, config)
        m = hm.matrix(parameterize_unitary(x).matrix)
        lam, dev = hm.fit(m)
        p = abs(lam) ** 2
        out.append(_Candidate(r, pattern, x, p, dev, p - config.penalty_weight * dev ** 2))
    return out


def _enforce_bound(spec: GateSpec, probability: float) -> None:
    try:
        bound = float(gate_bound(spec.name))
    except KeyError:
        return
    if probability > bound + BOUND_SLACK:
        raise BoundViolationError(f"valid {spec.name} circuit with success probability {probability!r} "
                                  f"exceeds the proven bound {bound}")


def optimize_gate(spec: GateSpec, config: SearchConfig) -> SearchResult:
    """Multi-start search for the highest-probability valid heralded implementation of ``spec``.

    Restart ``r`` draws its start from ``SeedSequence([seed, r])``; ties go to
    the lowest restart index, so results do not depend on ``config.workers``.
    """
    prep = config.ancilla_preparation
    layouts = [(p, HeraldedMap(spec, prep, p.required_counts))
               for p in heralding_patterns(config, spec.n_signal_modes)]
    run = lambda r: _run_restart(r, spec, config, layouts)  # noqa: E731
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            per_restart = list(pool.map(run, range(config.restarts)))
    else:
        per_restart = [run(r) for r in range(config.restarts)]

    history = [max(c.score for c in cands) for cands in per_restart]
    tol = config.validity_tolerance
    best: Optional[_Candidate] = None
    for cands in per_restart:
        for c in cands:
            if c.deviation <= tol:
                _enforce_bound(spec, c.probability)
                if best is None or best.deviation > tol or c.probability > best.probability:
                    best = c
            elif best is None or (best.deviation > tol and c.deviation < best.deviation):
                best = c

    circuit = PostselectedCircuit(spec.n_signal_modes, config.n_ancilla_modes, prep,
                                  parameterize_unitary(best.params), best.pattern)
    check = check_postselected_gate(circuit, spec, tol)
    if check.is_valid:
        _enforce_bound(spec, check.success_probability)
    log.info("%s search: p=%.10f deviation=%.2e valid=%s (restart %d)", spec.name,
             check.success_probability, check.deviation, check.is_valid, best.restart)
    return SearchResult(circuit, check.success_probability, check.deviation, check.is_valid,
                        history, best.restart, config)

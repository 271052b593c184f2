"""
Latent-class factor model of the causes, fitted by EM.

The model is a mixture of independent categoricals: a class c is drawn with
probability weights[c], then each cause independently from
categoricals[c][j]. Exact models (fitted=False) hold Fractions; fitted models
hold floats.

Usage:
    from ci_lab.deconf_pipeline import EMConfig, fit_latent_class_em, simulate_samples

    data = simulate_samples(table, {"A1", "A2"}, n=10_000, seed=0)
    fit = fit_latent_class_em(data, k=2, config=EMConfig(seed=0))
    fit.model.weights, fit.log_likelihood
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from ci_lab.deconf_pipeline.sampling import Dataset
from ci_lab.exceptions import EmptyDataException, TableValidationException
from ci_lab.prob_core import JointTable, Schema, Variable, condition, format_rational, marginal, parse_rational
from ci_lab.schema.documents import ClassDocument, ModelDocument, VariableDocument

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]
FITTED_TOL = 1e-9
MONOTONE_TOL = 1e-8


@dataclass(frozen=True)
class LatentClassModel:
    """
    K class weights and, per class, one categorical per cause.

    categoricals[c][j][i] = P(cause j takes its i-th label | class c).
    Sums are exact for fitted=False and within 1e-9 otherwise.
    """

    schema: Schema
    weights: tuple[Number, ...]
    categoricals: tuple[tuple[tuple[Number, ...], ...], ...]
    fitted: bool
    smoothing: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(
            self, "categoricals", tuple(tuple(tuple(d) for d in per) for per in self.categoricals)
        )
        if not self.weights:
            raise TableValidationException("Model needs at least one class", field="weights")
        if len(self.categoricals) != len(self.weights):
            raise TableValidationException(
                "One categorical set per class", field="categoricals", value=len(self.categoricals)
            )
        self._check_simplex("weights", self.weights)
        for c, per_cause in enumerate(self.categoricals):
            if len(per_cause) != len(self.schema):
                raise TableValidationException("One categorical per cause", field=f"class {c}")
            for var, dist in zip(self.schema.variables, per_cause):
                if len(dist) != len(var.support):
                    raise TableValidationException(
                        "Categorical length must match support", field=f"class {c}/{var.name}"
                    )
                self._check_simplex(f"class {c}/{var.name}", dist)

    def _check_simplex(self, name: str, values: Sequence[Number]) -> None:
        if any(v < 0 for v in values):
            raise TableValidationException("Probabilities must be nonnegative", field=name)
        total = sum(values)
        ok = abs(total - 1) <= FITTED_TOL if self.fitted else total == 1
        if not ok:
            raise TableValidationException("Probabilities must sum to 1", field=name, value=total)

    @property
    def k(self) -> int:
        return len(self.weights)

    @classmethod
    def from_table(cls, table: JointTable, causes: Sequence[str], z: str) -> LatentClassModel:
        """
        The exact model with classes = positive-probability labels of z.

        The table's causes need not be independent given z; this is the
        latent-class reading of its (causes, z) marginal.
        """
        sub = marginal(table, set(causes) | {z})
        schema = table.schema.restrict(causes)
        weights: list[Fraction] = []
        categoricals: list[tuple[tuple[Fraction, ...], ...]] = []
        for (label,), pz in marginal(sub, {z}).items():
            given = condition(sub, {z: label})
            per_cause = []
            for var in schema.variables:
                cause_marginal = dict(marginal(given, {var.name}).items())
                per_cause.append(
                    tuple(cause_marginal.get((label_,), Fraction(0)) for label_ in var.support)
                )
            weights.append(pz)
            categoricals.append(tuple(per_cause))
        return cls(schema=schema, weights=tuple(weights), categoricals=tuple(categoricals), fitted=False)

    def permute(self, order: Sequence[int]) -> LatentClassModel:
        """Reorder classes: new class i is old class order[i]."""
        return LatentClassModel(
            schema=self.schema,
            weights=tuple(self.weights[i] for i in order),
            categoricals=tuple(self.categoricals[i] for i in order),
            fitted=self.fitted,
            smoothing=self.smoothing,
        )

    def log_tables(self) -> list[NDArray[np.float64]]:
        """Per cause, a (k, support) array of log-probabilities."""
        with np.errstate(divide="ignore"):
            return [
                np.log(np.array([[float(p) for p in self.categoricals[c][j]] for c in range(self.k)]))
                for j in range(len(self.schema))
            ]

    def log_weights(self) -> NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return np.log(np.array([float(w) for w in self.weights]))


class EMConfig(BaseModel):
    """EM knobs; recorded with the fit."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_iter: int = Field(default=500, ge=1)
    tol: float = Field(default=1e-8, gt=0, description="Stop when the objective gains less than this")
    restarts: int = Field(default=10, ge=1)
    seed: int = 0
    smoothing: float = Field(default=1e-6, ge=0, description="Pseudo-count per categorical cell")


@dataclass(frozen=True)
class LatentClassFit:
    """
    Best EM run.

    `trace` holds the penalized objective (log-likelihood plus the pseudo-count
    log-prior) per iteration; it never decreases.
    """

    model: LatentClassModel
    responsibilities: NDArray[np.float64]
    log_likelihood: float
    converged: bool
    n_iter: int
    restart: int
    trace: tuple[float, ...] = field(default_factory=tuple)


def _patterns(data: Dataset) -> tuple[NDArray[np.int64], NDArray[np.float64], NDArray[np.int64]]:
    """Distinct rows, their counts and the row -> pattern index."""
    x = data.indices()
    patterns, inverse, counts = np.unique(x, axis=0, return_inverse=True, return_counts=True)
    return patterns, counts.astype(float), np.asarray(inverse).reshape(-1)


def _log_joint(
    patterns: NDArray[np.int64], log_w: NDArray[np.float64], log_theta: Sequence[NDArray[np.float64]]
) -> NDArray[np.float64]:
    out = np.broadcast_to(log_w, (patterns.shape[0], log_w.shape[0])).copy()
    for j, table in enumerate(log_theta):
        out += table[:, patterns[:, j]].T
    return out


def _m_step(
    patterns: NDArray[np.int64],
    counts: NDArray[np.float64],
    resp: NDArray[np.float64],
    sizes: Sequence[int],
    eps: float,
) -> tuple[NDArray[np.float64], list[NDArray[np.float64]]]:
    weighted = resp * counts[:, None]
    nk = weighted.sum(axis=0)
    weights = nk / counts.sum()
    thetas = []
    for j, s in enumerate(sizes):
        cell = np.zeros((resp.shape[1], s))
        for label in range(s):
            cell[:, label] = weighted[patterns[:, j] == label].sum(axis=0)
        cell += eps
        totals = cell.sum(axis=1, keepdims=True)
        thetas.append(np.divide(cell, totals, out=np.full_like(cell, 1.0 / s), where=totals > 0))
    return weights, thetas


def _penalty(thetas: Sequence[NDArray[np.float64]], eps: float) -> float:
    if eps == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(eps * sum(np.log(t).sum() for t in thetas))


def _to_model(schema: Schema, weights: NDArray[np.float64], thetas: Sequence[NDArray[np.float64]], eps: float) -> LatentClassModel:
    k = weights.shape[0]
    return LatentClassModel(
        schema=schema,
        weights=tuple(float(w) for w in weights),
        categoricals=tuple(
            tuple(tuple(float(p) for p in thetas[j][c]) for j in range(len(thetas))) for c in range(k)
        ),
        fitted=True,
        smoothing=eps,
    )


@dataclass
class _Run:
    weights: NDArray[np.float64]
    thetas: list[NDArray[np.float64]]
    log_likelihood: float
    converged: bool
    n_iter: int
    trace: list[float]


def _em_run(
    patterns: NDArray[np.int64],
    counts: NDArray[np.float64],
    sizes: Sequence[int],
    k: int,
    config: EMConfig,
    rng: np.random.Generator,
) -> _Run:
    eps = config.smoothing
    resp = rng.dirichlet(np.ones(k), size=patterns.shape[0])
    weights, thetas = _m_step(patterns, counts, resp, sizes, eps)
    trace: list[float] = []
    converged = False
    n_iter = 0
    ll = -math.inf
    for n_iter in range(1, config.max_iter + 1):
        with np.errstate(divide="ignore"):
            log_joint = _log_joint(patterns, np.log(weights), [np.log(t) for t in thetas])
        log_norm = logsumexp(log_joint, axis=1)
        ll = float(counts @ log_norm)
        objective = ll + _penalty(thetas, eps)
        if trace and objective < trace[-1] - MONOTONE_TOL * max(1.0, abs(trace[-1])):
            raise RuntimeError(
                f"EM objective decreased at iteration {n_iter}: {trace[-1]} -> {objective}"
            )
        trace.append(objective)
        if len(trace) > 1 and trace[-1] - trace[-2] < config.tol:
            converged = True
            break
        resp = np.exp(log_joint - log_norm[:, None])
        weights, thetas = _m_step(patterns, counts, resp, sizes, eps)
    return _Run(weights, thetas, ll, converged, n_iter, trace)


def fit_latent_class_em(data: Dataset, k: int, config: EMConfig | None = None) -> LatentClassFit:
    """
    Fit a k-class model by EM; best of config.restarts random starts.

    Each restart starts from Dirichlet-random responsibilities drawn from
    default_rng([seed, restart]). The highest log-likelihood wins, lowest
    restart index on ties. Non-convergence is flagged, not raised.

    Raises:
        EmptyDataException: No rows
        ValueError: k < 1
    """
    cfg = config or EMConfig()
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(data) == 0:
        raise EmptyDataException("Cannot fit a latent-class model to an empty dataset")
    patterns, counts, inverse = _patterns(data)
    sizes = [len(var.support) for var in data.schema.variables]

    if k == 1:
        weights, thetas = _m_step(patterns, counts, np.ones((patterns.shape[0], 1)), sizes, cfg.smoothing)
        model = _to_model(data.schema, weights, thetas, cfg.smoothing)
        ll = log_likelihood(model, data)
        return LatentClassFit(
            model=model,
            responsibilities=np.ones((len(data), 1)),
            log_likelihood=ll,
            converged=True,
            n_iter=0,
            restart=0,
            trace=(ll + _penalty(thetas, cfg.smoothing),),
        )

    best: _Run | None = None
    best_index = 0
    for r in range(cfg.restarts):
        run = _em_run(patterns, counts, sizes, k, cfg, np.random.default_rng([cfg.seed, r]))
        logger.debug("EM restart %d: loglik=%.6f iters=%d converged=%s", r, run.log_likelihood, run.n_iter, run.converged)
        if best is None or run.log_likelihood > best.log_likelihood:
            best, best_index = run, r
    assert best is not None
    if not best.converged:
        logger.warning("EM did not converge within %d iterations (restart %d)", cfg.max_iter, best_index)
    logger.info("EM k=%d best restart %d loglik=%.6f", k, best_index, best.log_likelihood)

    model = _to_model(data.schema, best.weights, best.thetas, cfg.smoothing)
    log_joint = _log_joint(patterns, model.log_weights(), model.log_tables())
    resp = np.exp(log_joint - logsumexp(log_joint, axis=1)[:, None])
    return LatentClassFit(
        model=model,
        responsibilities=resp[inverse],
        log_likelihood=float(counts @ logsumexp(log_joint, axis=1)),
        converged=best.converged,
        n_iter=best.n_iter,
        restart=best_index,
        trace=tuple(best.trace),
    )


def log_likelihood(model: LatentClassModel, data: Dataset) -> float:
    """Sample log-likelihood; -inf when a row has zero probability under the model."""
    if model.schema.names != data.schema.names:
        raise TableValidationException(
            "Model and data variables differ", value=[model.schema.names, data.schema.names]
        )
    if len(data) == 0:
        raise EmptyDataException("Cannot evaluate the likelihood of an empty dataset")
    _align_supports(model.schema, data.schema)
    patterns, counts, _ = _patterns(data)
    log_joint = _log_joint(patterns, model.log_weights(), model.log_tables())
    with np.errstate(invalid="ignore"):
        return float(counts @ logsumexp(log_joint, axis=1))


def _align_supports(model_schema: Schema, data_schema: Schema) -> None:
    for mv, dv in zip(model_schema.variables, data_schema.variables):
        if mv.support != dv.support:
            raise TableValidationException(
                "Model and data supports differ", field=mv.name, value=[mv.support, dv.support]
            )


@dataclass(frozen=True)
class SubstituteConfounder:
    """Posterior over classes for one cause assignment, plus the MAP class."""

    posterior: tuple[Number, ...]
    map_class: int
    zero_likelihood: bool = False


def substitute_confounder(model: LatentClassModel, a: Mapping[str, str]) -> SubstituteConfounder:
    """
    posterior(c) proportional to weights[c] * prod_j P(a_j | c).

    Exact for exact models. A zero-likelihood assignment yields the uniform
    posterior with zero_likelihood=True. MAP ties go to the lowest index.
    """
    key = model.schema.key(a)
    idx = [var.support.index(label) for var, label in zip(model.schema.variables, key)]
    if not model.fitted:
        scores = [
            model.weights[c] * math.prod((model.categoricals[c][j][i] for j, i in enumerate(idx)), start=Fraction(1))
            for c in range(model.k)
        ]
        total = sum(scores, Fraction(0))
        if total == 0:
            return SubstituteConfounder(tuple(Fraction(1, model.k) for _ in scores), 0, True)
        posterior: tuple[Number, ...] = tuple(Fraction(s) / total for s in scores)
    else:
        log_theta = model.log_tables()
        log_scores = model.log_weights() + sum(log_theta[j][:, i] for j, i in enumerate(idx))
        if np.all(np.isneginf(log_scores)):
            return SubstituteConfounder(tuple(1.0 / model.k for _ in range(model.k)), 0, True)
        posterior = tuple(float(p) for p in np.exp(log_scores - logsumexp(log_scores)))
    best = max(range(model.k), key=lambda c: (posterior[c], -c))
    return SubstituteConfounder(posterior, best)


def _tv(p: Sequence[Number], q: Sequence[Number]) -> float:
    return 0.5 * sum(abs(float(a) - float(b)) for a, b in zip(p, q))


def align_classes(fitted: LatentClassModel, reference: LatentClassModel) -> tuple[int, ...]:
    """
    Class order matching `fitted` to `reference`: fitted.permute(order) lines up
    with reference class by class.

    Cost is the summed total-variation distance of the per-cause categoricals.
    All permutations for k <= 5, greedy beyond.
    """
    if fitted.k != reference.k or fitted.schema != reference.schema:
        raise TableValidationException("Models must share k and cause schema")
    k = fitted.k
    cost = np.array(
        [
            [
                sum(_tv(fitted.categoricals[f][j], reference.categoricals[r][j]) for j in range(len(fitted.schema)))
                for f in range(k)
            ]
            for r in range(k)
        ]
    )
    if k <= 5:
        best = min(
            itertools.permutations(range(k)),
            key=lambda order: sum(cost[r, order[r]] for r in range(k)),
        )
        return tuple(int(i) for i in best)
    order: list[int] = []
    free = set(range(k))
    for r in range(k):
        f = min(sorted(free), key=lambda f: cost[r, f])
        order.append(f)
        free.remove(f)
    return tuple(order)


def model_to_document(model: LatentClassModel) -> ModelDocument:
    """Fitted values as repr() decimal strings, exact ones as "num/den"."""

    def text(value: Number) -> str:
        return repr(float(value)) if model.fitted else format_rational(Fraction(value))

    return ModelDocument(
        variables=[VariableDocument(name=v.name, support=list(v.support)) for v in model.schema.variables],
        classes=[
            ClassDocument(
                weight=text(model.weights[c]),
                categoricals={
                    var.name: [text(p) for p in model.categoricals[c][j]]
                    for j, var in enumerate(model.schema.variables)
                },
            )
            for c in range(model.k)
        ],
        fitted=model.fitted,
        smoothing=repr(float(model.smoothing)),
    )


def model_from_document(doc: ModelDocument) -> LatentClassModel:
    schema = Schema(tuple(Variable(v.name, tuple(v.support)) for v in doc.variables))

    def value(text: str) -> Number:
        return float(text) if doc.fitted else parse_rational(text)

    for cls_doc in doc.classes:
        if set(cls_doc.categoricals) != set(schema.names):
            raise TableValidationException("Class categoricals must cover every variable")
    return LatentClassModel(
        schema=schema,
        weights=tuple(value(c.weight) for c in doc.classes),
        categoricals=tuple(
            tuple(tuple(value(p) for p in c.categoricals[name]) for name in schema.names)
            for c in doc.classes
        ),
        fitted=doc.fitted,
        smoothing=float(doc.smoothing),
    )


def model_to_json(model: LatentClassModel) -> str:
    return model_to_document(model).model_dump_json()

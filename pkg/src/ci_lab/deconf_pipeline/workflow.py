"""
End-to-end deconfounder run on a known table.

Sample the causes, fit a latent-class model, turn its MAP class into a
deterministic substitute Z_hat = f(A) on the exact table, evaluate the
adjustment functional with Z_hat, and report the strata that a deterministic
substitute leaves undefined.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from fractions import Fraction

from ci_lab.deconf_pipeline.adjustment import adjustment_functional, check_target
from ci_lab.deconf_pipeline.degenerate import degenerate_conditioning_report
from ci_lab.deconf_pipeline.latent_class import EMConfig, fit_latent_class_em, substitute_confounder
from ci_lab.deconf_pipeline.sampling import simulate_samples
from ci_lab.exceptions import RoleValidationException
from ci_lab.prob_core import JointTable, marginal, push_forward_deterministic
from ci_lab.validation.models import DeconfounderReport

logger = logging.getLogger(__name__)

SUBSTITUTE = "Z_hat"


def _substitute_name(table: JointTable) -> str:
    name = SUBSTITUTE
    while name in table.schema:
        name += "_"
    return name


def run_deconfounder(
    table: JointTable,
    causes: Sequence[str],
    w: str,
    target: Mapping[str, str],
    *,
    z: str | None = None,
    n: int = 10_000,
    k: int = 2,
    seed: int = 0,
    exact: bool = False,
    em_config: EMConfig | None = None,
    value_map: Mapping[str, Fraction | int | str] | None = None,
) -> DeconfounderReport:
    """
    Args:
        table: Known joint over causes, w and optionally z
        causes: Cause names
        w: Outcome stand-in
        target: Cause assignment a at which psi(a) is evaluated
        z: The table's own conditioner (required when exact=True)
        n, k, seed: Sample size, class count, seed for sampling and EM
        exact: Skip sampling and fitting; adjust for z directly

    Raises:
        RoleValidationException: exact=True without z, or an invalid target
    """
    check_target(table, causes, target)
    if exact:
        if z is None:
            raise RoleValidationException("Exact mode needs the table's z", role="z")
        return DeconfounderReport(
            causes=list(causes),
            w=w,
            target=dict(sorted(target.items())),
            seed=seed,
            exact=True,
            adjustment=adjustment_functional(table, causes, w, z, target, value_map),
        )

    cfg = em_config or EMConfig(seed=seed)
    data = simulate_samples(table, causes, n, seed)
    fit = fit_latent_class_em(data, k, cfg)

    cause_table = marginal(table, set(causes))
    names = cause_table.schema.names
    mapping: dict[tuple[str, ...], str] = {}
    for key in cause_table.entries:
        posterior = substitute_confounder(fit.model, dict(zip(names, key)))
        mapping[key] = str(posterior.map_class)

    name = _substitute_name(table)
    positions = table.positions(names)
    extended = push_forward_deterministic(
        table,
        name,
        {key: mapping[tuple(key[i] for i in positions)] for key in table.entries},
        support=tuple(str(c) for c in range(k)),
    )
    adjustment = adjustment_functional(extended, causes, w, name, target, value_map)
    conditioning = [
        degenerate_conditioning_report(extended, causes, name, target, label)
        for label in extended.schema.support(name)
    ]
    oracle = adjustment_functional(table, causes, w, z, target, value_map) if z is not None else None
    logger.info(
        "Deconfounder run: n=%d k=%d seed=%d, %d degenerate strata",
        n,
        k,
        seed,
        len(adjustment.degenerate_strata),
    )
    return DeconfounderReport(
        causes=list(causes),
        w=w,
        target=dict(sorted(target.items())),
        seed=seed,
        exact=False,
        n=n,
        k=k,
        log_likelihood=fit.log_likelihood,
        converged=fit.converged,
        class_weights=[float(x) for x in fit.model.weights],
        substitute=name,
        substitute_map={",".join(key): label for key, label in sorted(mapping.items())},
        adjustment=adjustment,
        oracle=oracle,
        conditioning=conditioning,
    )

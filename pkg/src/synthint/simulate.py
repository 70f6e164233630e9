"""Low-rank factor-model panel generator.

Produces panels where every potential outcome is an exact inner product
of unit, time, and intervention factors, so the engine's predictions have
a closed-form ground truth. Used for property tests and demos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import AlignedPanel, InterventionPartition


@dataclass(frozen=True, eq=False)
class FactorPanel:
    """An aligned panel with its generating factors and ground truth."""

    aligned: AlignedPanel
    partition: InterventionPartition
    truth: dict[str, np.ndarray]  # label -> N x (T - T0) potential outcomes
    unit_factors: np.ndarray      # N x r
    time_factors: np.ndarray      # T x r
    intervention_factors: np.ndarray  # D x r


def factor_model_panel(
    n_units: int = 30,
    n_days: int = 60,
    t0: int = 40,
    n_interventions: int = 3,
    rank: int = 3,
    seed: int = 0,
    noise_scale: float = 0.0,
    factor_low: float = 0.5,
    factor_high: float = 1.5,
) -> FactorPanel:
    """Generate y[d][n, t] = sum_i u[n, i] * v[t, i] * w[d, i].

    The observed matrix carries intervention 0 (the common setting) over
    the pre-period and each unit's assigned intervention over the post
    period. Units are assigned to interventions round-robin. Optional
    i.i.d. Gaussian noise with standard deviation
    noise_scale * mean(|y_observed|) is added to the observations only;
    the returned ground truth stays noiseless.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(factor_low, factor_high, size=(n_units, rank))
    v = rng.uniform(factor_low, factor_high, size=(n_days, rank))
    w = rng.uniform(factor_low, factor_high, size=(n_interventions, rank))

    labels = [f"d{d}" for d in range(n_interventions)]
    unit_ids = [f"unit{n:02d}" for n in range(n_units)]
    assigned = [d % n_interventions for d in range(n_units)]

    potential = {
        labels[d]: u @ np.diag(w[d]) @ v.T for d in range(n_interventions)
    }
    observed = np.empty((n_units, n_days))
    observed[:, :t0] = potential[labels[0]][:, :t0]
    for n in range(n_units):
        observed[n, t0:] = potential[labels[assigned[n]]][n, t0:]
    if noise_scale > 0:
        sigma = noise_scale * float(np.mean(np.abs(observed)))
        observed = observed + rng.normal(0.0, sigma, size=observed.shape)

    aligned = AlignedPanel(
        matrix=observed,
        mask=np.ones_like(observed, dtype=bool),
        t0_index=t0,
        unit_ids=tuple(unit_ids),
        day_labels=tuple(range(-t0, n_days - t0)),
    )
    groups: dict[str, list[str]] = {label: [] for label in labels}
    for uid, d in zip(unit_ids, assigned):
        groups[labels[d]].append(uid)
    partition = InterventionPartition(
        assignment={uid: labels[d] for uid, d in zip(unit_ids, assigned)},
        groups={label: tuple(members) for label, members in groups.items()},
    )
    truth = {label: mat[:, t0:] for label, mat in potential.items()}
    return FactorPanel(
        aligned=aligned,
        partition=partition,
        truth=truth,
        unit_factors=u,
        time_factors=v,
        intervention_factors=w,
    )

"""Synthetic-interventions engine: SVT denoising, donor-weight learning via
principal component regression, and counterfactual prediction.

Given an aligned panel and an intervention partition, the engine predicts
every unit's post-period trajectory under every intervention by regressing
the target's pre-period on the rank-truncated pre-period of each donor
group, then applying the learned weights to the group's denoised
post-period.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroSpectrum,
    DimensionMismatch,
    EmptyDonorGroup,
    NoObservedPostData,
    NonFiniteInput,
)
from .panel import AlignedPanel, InterventionPartition

PINV_RCOND = 1e-10
DONOR_WARN_THRESHOLD = 5


@dataclass(frozen=True)
class SvtConfig:
    """Rank-selection rule for singular value thresholding."""

    rule: str = "energy"  # "energy" or "fixed"
    energy_fraction: float = 0.90
    fixed_rank: int | None = None
    min_rank: int = 1

    def __post_init__(self):
        if self.rule not in ("energy", "fixed"):
            raise ValueError(f"unknown rank rule {self.rule!r}")
        if self.rule == "energy" and not (0 < self.energy_fraction <= 1):
            raise ValueError("energy fraction must be in (0, 1]")
        if self.rule == "fixed" and (self.fixed_rank is None or self.fixed_rank < 1):
            raise ValueError("fixed rank must be >= 1")
        if self.min_rank < 1:
            raise ValueError("min_rank must be >= 1")

    @classmethod
    def fixed(cls, k: int, min_rank: int = 1) -> "SvtConfig":
        return cls(rule="fixed", fixed_rank=k, min_rank=min_rank)

    @classmethod
    def energy(cls, fraction: float, min_rank: int = 1) -> "SvtConfig":
        return cls(rule="energy", energy_fraction=fraction, min_rank=min_rank)


@dataclass(frozen=True, eq=False)
class DenoisedBlock:
    """A matrix replaced by its best rank-r approximation."""

    matrix: np.ndarray
    rank_used: int
    singular_values: np.ndarray  # full descending spectrum, for diagnostics


@dataclass(frozen=True, eq=False)
class SiModel:
    """Learned donor weights for one (target, intervention) pair."""

    target_id: str
    intervention_label: str
    donor_ids: tuple[str, ...]
    weights: np.ndarray
    pre_fit_rmse: float
    ranks: tuple[int, int]  # (pre, post)


@dataclass(frozen=True, eq=False)
class CfEntry:
    trajectory: np.ndarray
    model: SiModel


@dataclass(frozen=True, eq=False)
class CounterfactualSet:
    """Predicted post-period trajectories for every (unit, intervention)
    pair that has donors, plus the observed rows for comparison."""

    entries: dict[tuple[str, str], CfEntry]
    observed: dict[str, np.ndarray]       # unit -> observed post row
    observed_mask: dict[str, np.ndarray]  # unit -> post observation mask
    assignment: dict[str, str]            # unit -> its actual intervention
    unit_order: tuple[str, ...]
    label_order: tuple[str, ...]
    failures: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def select_rank(singular_values: np.ndarray, config: SvtConfig) -> int:
    """Pick the truncation rank from a descending spectrum."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or not np.any(s > 0):
        raise AllZeroSpectrum("all singular values are zero")
    n_positive = int(np.count_nonzero(s > 0))
    if config.rule == "fixed":
        rank = min(config.fixed_rank, n_positive)
    else:
        energy = np.cumsum(s**2) / np.sum(s**2)
        rank = int(np.searchsorted(energy, config.energy_fraction - 1e-12) + 1)
        rank = min(rank, n_positive)
    return max(rank, min(config.min_rank, n_positive))


def svt(matrix: np.ndarray, config: SvtConfig = SvtConfig()) -> DenoisedBlock:
    """Singular value thresholding: best rank-r approximation of a fully
    observed matrix, with r chosen by the config's rank rule."""
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput("matrix contains non-finite entries")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if not np.any(s > 0):  # zero matrix: truncation is a no-op
        return DenoisedBlock(matrix=m.copy(), rank_used=0, singular_values=s)
    rank = select_rank(s, config)
    truncated = (u[:, :rank] * s[:rank]) @ vt[:rank]
    return DenoisedBlock(matrix=truncated, rank_used=rank, singular_values=s)


def fit_weights(
    target_pre: np.ndarray,
    donor_pre_denoised: DenoisedBlock,
    *,
    target_id: str = "target",
    intervention_label: str = "",
    donor_ids: tuple[str, ...] | None = None,
    post_rank: int = 0,
) -> SiModel:
    """Minimum-norm least-squares weights reproducing the target's
    pre-period from the denoised donor pre-period rows (PCR).

    Singular values of the donor matrix below 1e-10 * sigma_max are
    treated as zero, so the solution is deterministic under rank
    deficiency.
    """
    donors = donor_pre_denoised.matrix
    y = np.asarray(target_pre, dtype=float)
    if donors.shape[0] == 0:
        raise EmptyDonorGroup("donor block has no rows")
    if donors.shape[1] != y.shape[0]:
        raise DimensionMismatch(
            f"donor block has {donors.shape[1]} columns, target has {y.shape[0]}"
        )
    weights = np.linalg.pinv(donors.T, rcond=PINV_RCOND) @ y
    residual = y - donors.T @ weights
    rmse = float(np.sqrt(np.mean(residual**2)))
    if donor_ids is None:
        donor_ids = tuple(f"donor_{i}" for i in range(donors.shape[0]))
    return SiModel(
        target_id=target_id,
        intervention_label=intervention_label,
        donor_ids=donor_ids,
        weights=weights,
        pre_fit_rmse=rmse,
        ranks=(donor_pre_denoised.rank_used, post_rank),
    )


def predict_counterfactual(
    model: SiModel, donor_post_denoised: DenoisedBlock
) -> np.ndarray:
    """Weighted combination of the denoised donor post-period rows."""
    donors = donor_post_denoised.matrix
    if donors.shape[0] != len(model.weights):
        raise DimensionMismatch(
            f"{donors.shape[0]} donor rows vs {len(model.weights)} weights"
        )
    return model.weights @ donors


def top_donors(model: SiModel, k: int) -> list[tuple[str, float]]:
    """Donors ranked by descending absolute weight, ties by input order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    order = sorted(
        range(len(model.weights)), key=lambda i: (-abs(model.weights[i]), i)
    )
    return [(model.donor_ids[i], float(model.weights[i])) for i in order[:k]]


def run_si(
    aligned: AlignedPanel,
    partition: InterventionPartition,
    config: SvtConfig = SvtConfig(),
) -> CounterfactualSet:
    """Predict every unit's post-period under every intervention.

    Per-pair failures (e.g. a singleton group targeted by itself) are
    recorded in the result's failures list without aborting other pairs;
    raises only if zero pairs succeed. When the target belongs to a
    group, it is removed from its own donor set and the group blocks are
    re-denoised without it.
    """
    t0 = aligned.t0_index
    pre = aligned.matrix[:, :t0]
    post = aligned.matrix[:, t0:]
    post_mask = aligned.mask[:, t0:]

    entries: dict[tuple[str, str], CfEntry] = {}
    failures: list[dict] = []
    warnings: list[str] = []

    # donors must be fully observed over the post window; others are
    # usable as targets but not as donors
    usable: dict[str, list[str]] = {}
    for label, members in partition.groups.items():
        kept = []
        for uid in members:
            if post_mask[aligned.row(uid)].all():
                kept.append(uid)
            else:
                warnings.append(
                    f"donor {uid} excluded from group {label!r}: "
                    f"incomplete post-period observation"
                )
        usable[label] = kept
        if 0 < len(kept) < DONOR_WARN_THRESHOLD:
            warnings.append(
                f"group {label!r} has only {len(kept)} usable donors"
            )

    def denoised_blocks(donor_ids: list[str]):
        idx = [aligned.row(uid) for uid in donor_ids]
        return svt(pre[idx], config), svt(post[idx], config)

    block_cache = {
        label: denoised_blocks(ids) for label, ids in usable.items() if ids
    }

    unit_order = tuple(aligned.unit_ids)
    label_order = tuple(partition.groups)
    for target in unit_order:
        if target not in partition.assignment:
            continue
        target_pre = pre[aligned.row(target)]
        for label in label_order:
            donor_ids = [uid for uid in usable[label] if uid != target]
            if not donor_ids:
                failures.append(
                    {"unit_id": target, "label": label,
                     "reason": "EmptyDonorGroup",
                     "detail": "no usable donors after leave-one-out"}
                )
                continue
            try:
                if target in usable[label]:
                    pre_block, post_block = denoised_blocks(donor_ids)
                else:
                    pre_block, post_block = block_cache[label]
                model = fit_weights(
                    target_pre,
                    pre_block,
                    target_id=target,
                    intervention_label=label,
                    donor_ids=tuple(donor_ids),
                    post_rank=post_block.rank_used,
                )
                trajectory = predict_counterfactual(model, post_block)
            except Exception as exc:  # contained: one pair must not kill the batch
                failures.append(
                    {"unit_id": target, "label": label,
                     "reason": type(exc).__name__, "detail": str(exc)}
                )
                continue
            entries[(target, label)] = CfEntry(trajectory, model)

    if not entries:
        raise EmptyDonorGroup("no (unit, intervention) pair succeeded")

    assigned = [u for u in unit_order if u in partition.assignment]
    return CounterfactualSet(
        entries=entries,
        observed={u: post[aligned.row(u)] for u in assigned},
        observed_mask={u: post_mask[aligned.row(u)] for u in assigned},
        assignment=dict(partition.assignment),
        unit_order=tuple(assigned),
        label_order=label_order,
        failures=failures,
        warnings=warnings,
    )


def self_validation(cf: CounterfactualSet) -> dict[str, dict[str, float]]:
    """Post-period RMSE / MAPE / R^2 of each unit's own-intervention
    prediction against its observed trajectory (observed cells only)."""
    metrics: dict[str, dict[str, float]] = {}
    for unit in cf.unit_order:
        label = cf.assignment[unit]
        entry = cf.entries.get((unit, label))
        if entry is None:
            continue
        mask = cf.observed_mask[unit]
        if not mask.any():
            raise NoObservedPostData(f"{unit}: no observed post-period cells")
        observed = cf.observed[unit][mask]
        predicted = entry.trajectory[mask]
        err = predicted - observed
        rmse = float(np.sqrt(np.mean(err**2)))
        nonzero = observed != 0
        mape = (
            float(np.mean(np.abs(err[nonzero] / observed[nonzero])))
            if nonzero.any()
            else float("nan")
        )
        ss_res = float(np.sum(err**2))
        ss_tot = float(np.sum((observed - observed.mean()) ** 2))
        if ss_tot > 0:
            r2 = 1.0 - ss_res / ss_tot
        else:
            r2 = 1.0 if ss_res == 0 else float("nan")
        metrics[unit] = {"rmse": rmse, "mape": mape, "r2": r2}
    return metrics

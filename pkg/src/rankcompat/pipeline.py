"""Model-update experiment: split, train, generate candidates, select, evaluate.

One *replication* splits the data into original-model, updated-model and
evaluation partitions; fits an original model; generates a pool of
cross-entropy ("BCE") candidates by bootstrap resampling and reshuffling,
plus compatibility-trained ("RBC") candidates for each ``alpha``; selects
the best of each pool per ``beta`` with ``beta * AUROC + (1 - beta) * RBC``
on validation data; and scores the selections on the evaluation partition.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple, Sequence

import numpy as np

from rankcompat import metrics
from rankcompat.data_io import apply_shift
from rankcompat.errors import (
    EmptyCandidates,
    EmptyInput,
    InvalidConfig,
    OriginalAllWrong,
    SingleClass,
    SpecTooLarge,
    TooFewReplications,
)
from rankcompat.structures import Dataset, RiskModel
from rankcompat.trainer import TrainConfig, predict, train

log = logging.getLogger(__name__)

# Stream tags mixed into derived seeds so that unrelated random draws never
# share a stream.
_SPLIT, _ORIG, _BOOT, _BCE, _RBC, _REPL = 1, 2, 3, 4, 5, 6
_MAX_REDRAWS = 10
EVAL_TAU = 0.5


def grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded to kill float drift."""
    n = int(round((stop - start) / step))
    return tuple(round(start + i * step, 10) for i in range(n + 1))


DEFAULT_ALPHAS = grid(0.0, 1.0, 0.1)
DEFAULT_BETAS = grid(0.0, 1.0, 0.1)
DEFAULT_REGS = (0.1, 0.01, 0.001)
DEFAULT_TAUS = tuple(sorted(set(grid(0.0, 0.1, 0.01)) | set(grid(0.1, 0.95, 0.05))))


def derive_seed(*keys: int) -> int:
    """Counter-based 63-bit seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


# --------------------------------------------------------------------------
# splitting


@dataclasses.dataclass(frozen=True)
class SplitSpec:
    n_original: int = 1000
    n_updated: int = 5000
    dev_fraction: float = 0.5

    def __post_init__(self):
        if self.n_original < 2 or self.n_updated < 2:
            raise InvalidConfig("n_original and n_updated must be at least 2")
        if not 0.0 < self.dev_fraction < 1.0:
            raise InvalidConfig("dev_fraction must lie in (0, 1)")


class Splits(NamedTuple):
    orig_dev: Dataset
    orig_val: Dataset
    upd_dev: Dataset
    upd_val: Dataset
    eval: Dataset
    index: tuple


def split(dataset: Dataset, spec: SplitSpec, seed: int) -> Splits:
    """Five disjoint random partitions; dev sizes are rounded down."""
    n = dataset.n
    if spec.n_original + spec.n_updated >= n:
        raise SpecTooLarge(
            f"{spec.n_original} + {spec.n_updated} rows requested from a dataset of {n}")
    perm = np.random.default_rng(seed).permutation(n)
    o_dev = int(np.floor(spec.n_original * spec.dev_fraction))
    u_dev = int(np.floor(spec.n_updated * spec.dev_fraction))
    cuts = np.cumsum([o_dev, spec.n_original - o_dev, u_dev, spec.n_updated - u_dev])
    parts = np.split(perm, cuts)
    return Splits(*(dataset.subset(p) for p in parts), index=tuple(parts))


# --------------------------------------------------------------------------
# model generation


def _cfg(base: TrainConfig | None, **changes) -> TrainConfig:
    return (base or TrainConfig()).replace(**changes)


def _require_classes(*datasets):
    for ds in datasets:
        s = int(ds.labels.sum())
        if s == 0 or s == ds.n:
            raise SingleClass("both label classes are required in every partition")


def train_original(orig_dev: Dataset, orig_val: Dataset, reg_grid: Sequence[float],
                   seed: int, base_cfg: TrainConfig | None = None) -> RiskModel:
    """Cross-entropy model whose penalty maximises validation AUROC.

    Ties go to the smaller penalty.
    """
    _require_classes(orig_dev, orig_val)
    if not len(reg_grid):
        raise EmptyCandidates("reg_grid is empty")
    best, best_auc = None, -1.0
    for reg in sorted(reg_grid):
        cfg = _cfg(base_cfg, alpha=1.0, reg_l2=reg, seed=derive_seed(seed, _ORIG))
        model = train(orig_dev, orig_val, None, cfg)
        auc = metrics.auroc(predict(model, orig_val.features), orig_val.labels)
        if auc > best_auc:
            best, best_auc = model, auc
    return best


@dataclasses.dataclass(frozen=True)
class CandidateSpec:
    n_resample: int = 45
    n_shuffle: int = 5
    reg_grid: tuple[float, ...] = DEFAULT_REGS
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHAS

    def __post_init__(self):
        object.__setattr__(self, "reg_grid", tuple(float(r) for r in self.reg_grid))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        if self.n_resample < 0 or self.n_shuffle < 0:
            raise InvalidConfig("n_resample and n_shuffle must be non-negative")
        if self.n_resample + self.n_shuffle < 1 or not self.reg_grid:
            raise InvalidConfig("the candidate pool would be empty")
        if any(r < 0 for r in self.reg_grid):
            raise InvalidConfig("regularisation strengths must be non-negative")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha_grid):
            raise InvalidConfig("alphas must lie in [0, 1]")

    @property
    def n_bce(self) -> int:
        return (self.n_resample + self.n_shuffle) * len(self.reg_grid)


def bce_training_set(upd_dev: Dataset, variant: int, spec: CandidateSpec,
                     seed: int) -> Dataset:
    """Training rows for BCE variant ``variant``.

    Variants below ``n_resample`` are bootstrap draws (redrawn up to ten
    times if a draw has a single class); the rest are permutations.
    """
    rng = np.random.default_rng(derive_seed(seed, _BOOT, variant))
    if variant >= spec.n_resample:
        return upd_dev.subset(rng.permutation(upd_dev.n))
    for _ in range(_MAX_REDRAWS):
        ds = upd_dev.subset(rng.integers(0, upd_dev.n, upd_dev.n))
        if 0 < ds.labels.sum() < ds.n:
            return ds
    raise SingleClass(f"bootstrap variant {variant}: {_MAX_REDRAWS} single-class draws")


def generate_bce_candidates(upd_dev: Dataset, upd_val: Dataset, spec: CandidateSpec,
                            seed: int, base_cfg: TrainConfig | None = None) -> list[RiskModel]:
    """Pool of cross-entropy candidates, variant-major then penalty order."""
    models = []
    for v in range(spec.n_resample + spec.n_shuffle):
        ds = bce_training_set(upd_dev, v, spec, seed)
        for r, reg in enumerate(spec.reg_grid):
            cfg = _cfg(base_cfg, alpha=1.0, reg_l2=reg, seed=derive_seed(seed, _BCE, v, r))
            models.append(train(ds, upd_val, None, cfg))
    return models


def rbc_candidate_seed(seed: int, reg_index: int) -> int:
    """Training seed shared by all alphas at one penalty."""
    return derive_seed(seed, _RBC, reg_index)


def generate_rbc_candidates(upd_dev: Dataset, upd_val: Dataset, orig: RiskModel,
                            spec: CandidateSpec, seed: int,
                            base_cfg: TrainConfig | None = None) -> dict[float, list[RiskModel]]:
    out = {}
    for alpha in spec.alpha_grid:
        out[alpha] = [
            train(upd_dev, upd_val, orig,
                  _cfg(base_cfg, alpha=alpha, reg_l2=reg, seed=rbc_candidate_seed(seed, r)))
            for r, reg in enumerate(spec.reg_grid)
        ]
    return out


# --------------------------------------------------------------------------
# selection


def selection_scores(aurocs, rbcs, beta: float) -> np.ndarray:
    return beta * np.asarray(aurocs, dtype=float) + (1.0 - beta) * np.asarray(rbcs, dtype=float)


def select_index(aurocs, rbcs, beta: float) -> int:
    """Index maximising ``beta * auroc + (1 - beta) * rbc``; first wins ties."""
    if len(aurocs) == 0:
        raise EmptyCandidates("no candidates to select from")
    return int(np.argmax(selection_scores(aurocs, rbcs, beta)))


def select(candidates: Sequence[RiskModel], orig: RiskModel, val: Dataset,
           beta: float) -> RiskModel:
    if not candidates:
        raise EmptyCandidates("no candidates to select from")
    o = predict(orig, val.features)
    aucs, rbcs = [], []
    for model in candidates:
        pop = metrics.pop_table(o, predict(model, val.features), val.labels)
        aucs.append(pop.auroc_u)
        rbcs.append(metrics.rbc_from_pop(pop))
    return candidates[select_index(aucs, rbcs, beta)]


# --------------------------------------------------------------------------
# one replication


@dataclasses.dataclass
class CandidateMetrics:
    """Validation and evaluation metrics of a candidate pool, one entry per model."""

    reg: np.ndarray
    val_auroc: np.ndarray
    val_rbc: np.ndarray
    eval_auroc: np.ndarray
    eval_rbc: np.ndarray
    eval_btc: np.ndarray
    eval_phi_pp: np.ndarray

    def __len__(self):
        return len(self.reg)


def measure_candidates(models: Sequence[RiskModel], orig: RiskModel, val: Dataset,
                       evaluation: Dataset, tau: float = EVAL_TAU) -> CandidateMetrics:
    """Metrics of each candidate against ``orig``.

    BTC at ``tau`` is NaN when the original labels no evaluation patient
    correctly.
    """
    o_val = predict(orig, val.features)
    o_ev = predict(orig, evaluation.features)
    cols = {k: [] for k in ("reg", "val_auroc", "val_rbc", "eval_auroc",
                            "eval_rbc", "eval_btc", "eval_phi_pp")}
    for model in models:
        pv = metrics.pop_table(o_val, predict(model, val.features), val.labels)
        u_ev = predict(model, evaluation.features)
        pe = metrics.pop_table(o_ev, u_ev, evaluation.labels)
        try:
            b = metrics.btc(o_ev, u_ev, evaluation.labels, tau, tau)
        except OriginalAllWrong:
            b = float("nan")
        cols["reg"].append(model.reg_l2)
        cols["val_auroc"].append(pv.auroc_u)
        cols["val_rbc"].append(metrics.rbc_from_pop(pv))
        cols["eval_auroc"].append(pe.auroc_u)
        cols["eval_rbc"].append(metrics.rbc_from_pop(pe))
        cols["eval_btc"].append(b)
        cols["eval_phi_pp"].append(pe.phi_pp)
    return CandidateMetrics(**{k: np.array(v, dtype=float) for k, v in cols.items()})


@dataclasses.dataclass(frozen=True)
class SelectionRecord:
    alpha: float
    beta: float
    bce_index: int
    rbc_index: int
    bce_auroc: float
    bce_rbc: float
    rbc_auroc: float
    rbc_rbc: float

    @property
    def delta_rbc(self) -> float:
        return self.rbc_rbc - self.bce_rbc

    @property
    def delta_auroc(self) -> float:
        return self.rbc_auroc - self.bce_auroc


def evaluate_selection(bce: CandidateMetrics, rbc_by_alpha: dict[float, CandidateMetrics],
                       beta_grid: Sequence[float]) -> list[SelectionRecord]:
    """Pick the best BCE and RBC candidate per (alpha, beta) and compare on eval."""
    records = []
    for alpha, rbc in rbc_by_alpha.items():
        for beta in beta_grid:
            i = select_index(bce.val_auroc, bce.val_rbc, beta)
            j = select_index(rbc.val_auroc, rbc.val_rbc, beta)
            records.append(SelectionRecord(
                float(alpha), float(beta), i, j,
                float(bce.eval_auroc[i]), float(bce.eval_rbc[i]),
                float(rbc.eval_auroc[j]), float(rbc.eval_rbc[j])))
    return records


def bound_violations(orig_eval_auroc: float, cm: CandidateMetrics) -> int:
    """Count candidates in the bounded regime whose eval RBC breaks the lower bound."""
    bad = 0
    for au, r in zip(cm.eval_auroc, cm.eval_rbc):
        if metrics.in_regime(orig_eval_auroc, au):
            if r < metrics.bounds(orig_eval_auroc, au).rbc_lower - 1e-12:
                bad += 1
    return bad


@dataclasses.dataclass
class ReplicationResult:
    seed: int
    original_auroc: float
    original_val_auroc: float
    bce: CandidateMetrics
    rbc: dict[float, CandidateMetrics]
    selections: list[SelectionRecord]
    n_bound_violations: int
    btc_sweep: "BtcSweepGrid | None" = None

    def selection(self, alpha: float, beta: float) -> SelectionRecord:
        for rec in self.selections:
            if np.isclose(rec.alpha, alpha) and np.isclose(rec.beta, beta):
                return rec
        raise KeyError((alpha, beta))

    def report_rows(self):
        header = ["alpha", "beta", "bce_index", "rbc_index", "auroc_bce", "rbc_bce",
                  "auroc_rbc", "rbc_rbc", "delta_rbc", "delta_auroc"]
        rows = [[r.alpha, r.beta, r.bce_index, r.rbc_index, r.bce_auroc, r.bce_rbc,
                 r.rbc_auroc, r.rbc_rbc, r.delta_rbc, r.delta_auroc]
                for r in self.selections]
        return header, rows


def prepare_replication(dataset: Dataset, splits: SplitSpec, cand: CandidateSpec,
                        seed: int, *, train_cfg: TrainConfig | None = None,
                        shift: float = 0.0) -> tuple[Splits, RiskModel]:
    """Split (shifting the updated and evaluation partitions) and fit the original."""
    parts = split(dataset, splits, derive_seed(seed, _SPLIT))
    parts = parts._replace(**{name: apply_shift(getattr(parts, name), shift, seed)
                              for name in ("upd_dev", "upd_val", "eval")})
    _require_classes(parts.upd_dev, parts.upd_val, parts.eval)
    orig = train_original(parts.orig_dev, parts.orig_val, cand.reg_grid, seed, train_cfg)
    return parts, orig


def run_replication(dataset: Dataset, splits: SplitSpec, cand: CandidateSpec,
                    beta_grid: Sequence[float], seed: int, *,
                    train_cfg: TrainConfig | None = None, shift: float = 0.0,
                    btc_taus: tuple[Sequence[float], Sequence[float]] | None = None,
                    ) -> ReplicationResult:
    """One full split/train/generate/select/evaluate cycle.

    ``shift`` translates the updated-model and evaluation partitions (see
    :func:`rankcompat.data_io.apply_shift`). With ``btc_taus`` the BTC
    threshold sweep over the BCE pool is attached to the result.
    """
    parts, orig = prepare_replication(dataset, splits, cand, seed,
                                      train_cfg=train_cfg, shift=shift)
    upd_dev, upd_val, ev = parts.upd_dev, parts.upd_val, parts.eval
    bce_models = generate_bce_candidates(upd_dev, upd_val, cand, seed, train_cfg)
    rbc_models = generate_rbc_candidates(upd_dev, upd_val, orig, cand, seed, train_cfg)

    bce = measure_candidates(bce_models, orig, upd_val, ev)
    rbc = {a: measure_candidates(ms, orig, upd_val, ev) for a, ms in rbc_models.items()}
    orig_auc = metrics.auroc(predict(orig, ev.features), ev.labels)
    orig_val_auc = metrics.auroc(predict(orig, parts.orig_val.features), parts.orig_val.labels)
    violations = bound_violations(orig_auc, bce) + sum(
        bound_violations(orig_auc, cm) for cm in rbc.values())
    sweep = None
    if btc_taus is not None:
        sweep = btc_threshold_sweep(orig, bce_models, upd_val, ev, *btc_taus)
    log.info("replication seed=%d: original eval AUROC %.4f", seed, orig_auc)
    return ReplicationResult(
        seed=seed, original_auroc=orig_auc, original_val_auroc=orig_val_auc,
        bce=bce, rbc=rbc, selections=evaluate_selection(bce, rbc, beta_grid),
        n_bound_violations=violations, btc_sweep=sweep)


def _replication_job(args):
    dataset, splits, cand, beta_grid, seed, kwargs = args
    return run_replication(dataset, splits, cand, beta_grid, seed, **kwargs)


def run_experiment(dataset: Dataset, splits: SplitSpec, cand: CandidateSpec,
                   beta_grid: Sequence[float], base_seed: int, replications: int,
                   jobs: int = 1, **kwargs) -> list[ReplicationResult]:
    """Independent replications with seeds derived from ``(base_seed, r)``.

    Results come back in replication order whatever ``jobs`` is.
    """
    tasks = [(dataset, splits, cand, tuple(beta_grid), derive_seed(base_seed, _REPL, r), kwargs)
             for r in range(replications)]
    if jobs <= 1 or replications <= 1:
        return [_replication_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_replication_job, tasks))


# --------------------------------------------------------------------------
# aggregation


@dataclasses.dataclass(frozen=True)
class SummaryRow:
    alpha: float
    beta: float
    mean_drbc: float
    drbc_lo: float
    drbc_hi: float
    mean_dauroc: float
    dauroc_lo: float
    dauroc_hi: float

    @property
    def improvement(self) -> bool:
        """Delta-RBC interval above zero while the delta-AUROC interval straddles it."""
        return improvement(self.drbc_lo, self.dauroc_lo, self.dauroc_hi)


def improvement(drbc_lo: float, dauroc_lo: float, dauroc_hi: float) -> bool:
    return drbc_lo > 0.0 and dauroc_lo <= 0.0 <= dauroc_hi


SUMMARY_COLUMNS = ["alpha", "beta", "mean_drbc", "drbc_lo", "drbc_hi",
                   "mean_dauroc", "dauroc_lo", "dauroc_hi", "improvement"]


@dataclasses.dataclass(frozen=True)
class ExperimentSummary:
    rows: tuple[SummaryRow, ...]
    n_replications: int

    def row(self, alpha: float, beta: float) -> SummaryRow:
        for r in self.rows:
            if np.isclose(r.alpha, alpha) and np.isclose(r.beta, beta):
                return r
        raise KeyError((alpha, beta))

    def report_rows(self):
        return SUMMARY_COLUMNS, [
            [r.alpha, r.beta, r.mean_drbc, r.drbc_lo, r.drbc_hi, r.mean_dauroc,
             r.dauroc_lo, r.dauroc_hi, r.improvement] for r in self.rows]


def empirical_ci(values, level: float = 0.95) -> tuple[float, float]:
    """Percentile interval of ``values`` (linear interpolation)."""
    tail = 100.0 * (1.0 - level) / 2.0
    lo, hi = np.percentile(np.asarray(values, dtype=float), [tail, 100.0 - tail])
    return float(lo), float(hi)


def aggregate(results: Sequence[ReplicationResult]) -> ExperimentSummary:
    if len(results) < 2:
        raise TooFewReplications("aggregation needs at least two replications")
    rows = []
    for k, first in enumerate(results[0].selections):
        recs = [res.selections[k] for res in results]
        if any((r.alpha, r.beta) != (first.alpha, first.beta) for r in recs):
            raise InvalidConfig("replications were run on different (alpha, beta) grids")
        drbc = np.array([r.delta_rbc for r in recs])
        dauc = np.array([r.delta_auroc for r in recs])
        rows.append(SummaryRow(first.alpha, first.beta,
                               float(drbc.mean()), *empirical_ci(drbc),
                               float(dauc.mean()), *empirical_ci(dauc)))
    return ExperimentSummary(tuple(rows), len(results))


# --------------------------------------------------------------------------
# phi++ histograms


@dataclasses.dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray          # replications x bins
    mean: np.ndarray            # bins


def phi_pp_histogram(values_per_replication, bin: float = 0.01) -> Histogram:
    """Per-replication histograms on [0, 1] (last bin closed), averaged bin-wise."""
    if not bin > 0:
        raise InvalidConfig("bin width must be positive")
    reps = [np.asarray(v, dtype=float).reshape(-1) for v in values_per_replication]
    if not reps or any(r.size == 0 for r in reps):
        raise EmptyInput("need at least one non-empty replication")
    n_bins = int(np.ceil(round(1.0 / bin, 9)))
    edges = np.linspace(0.0, n_bins * bin, n_bins + 1)
    counts = np.array([np.histogram(r, bins=edges)[0] for r in reps], dtype=float)
    return Histogram(edges, counts, counts.mean(axis=0))


def mass_near_mode(counts, edges, radius: float = 0.05) -> float:
    """Share of a histogram's mass in bins centred within ``radius`` of its mode bin."""
    counts = np.asarray(counts, dtype=float)
    centres = 0.5 * (edges[:-1] + edges[1:])
    mode = centres[int(np.argmax(counts))]
    near = np.abs(centres - mode) <= radius + 1e-9
    return float(counts[near].sum() / counts.sum())


# --------------------------------------------------------------------------
# BTC threshold sweep


@dataclasses.dataclass
class BtcSweepGrid:
    """Evaluation BTC of the validation-best pool model per threshold pair.

    ``degenerate`` marks cells where the original model labels nobody
    correctly (on validation, which blocks selection, or on evaluation);
    ``btc`` holds NaN there.
    """

    tau_o: np.ndarray
    tau_u: np.ndarray
    btc: np.ndarray
    degenerate: np.ndarray
    acc_o: np.ndarray           # per tau_o, broadcast to the grid
    acc_u: np.ndarray
    selected: np.ndarray

    @property
    def shape(self):
        return self.btc.shape

    def rows(self):
        header = ["tau_o", "tau_u", "btc", "degenerate", "acc_o", "acc_u", "selected"]
        out = []
        for a, to in enumerate(self.tau_o):
            for b, tu in enumerate(self.tau_u):
                out.append([float(to), float(tu),
                            "" if self.degenerate[a, b] else float(self.btc[a, b]),
                            bool(self.degenerate[a, b]), float(self.acc_o[a, b]),
                            float(self.acc_u[a, b]), int(self.selected[a, b])])
        return header, out


def _correct(scores, taus, y):
    """(len(taus), n) float32 matrix of per-patient correctness."""
    return ((scores[None, :] > np.asarray(taus)[:, None]) == y[None, :]).astype(np.float32)


def btc_threshold_sweep(orig: RiskModel, bce_pool: Sequence[RiskModel], val: Dataset,
                        evaluation: Dataset, tau_grid_o: Sequence[float],
                        tau_grid_u: Sequence[float]) -> BtcSweepGrid:
    if not len(tau_grid_o) or not len(tau_grid_u):
        raise InvalidConfig("threshold grids must be non-empty")
    if not bce_pool:
        raise EmptyCandidates("empty model pool")
    A, B, K = len(tau_grid_o), len(tau_grid_u), len(bce_pool)

    def joint(ds):
        y = ds.labels.astype(bool)
        co = _correct(predict(orig, ds.features), tau_grid_o, y)           # A x n
        cu = np.stack([_correct(predict(m, ds.features), tau_grid_u, y)
                       for m in bce_pool])                                 # K x B x n
        both = co @ cu.reshape(K * B, -1).T                                 # A x (K*B)
        return co.sum(axis=1), both.reshape(A, K, B), cu.mean(axis=2)

    den_v, num_v, _ = joint(val)
    den_e, num_e, acc_u_all = joint(evaluation)
    with np.errstate(invalid="ignore", divide="ignore"):
        btc_v = num_v / den_v[:, None, None]
    sel = np.argmax(np.nan_to_num(btc_v, nan=-1.0), axis=1)               # A x B
    picked = np.take_along_axis(num_e, sel[:, None, :], axis=1)[:, 0, :]
    degenerate = (den_v[:, None] == 0) | (den_e[:, None] == 0)
    degenerate = np.broadcast_to(degenerate, (A, B)).copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        btc_e = np.where(degenerate, np.nan, picked / den_e[:, None])
    y_e = evaluation.labels.astype(bool)
    acc_o = _correct(predict(orig, evaluation.features), tau_grid_o, y_e).mean(axis=1)
    acc_u = acc_u_all[sel, np.arange(B)[None, :]]
    return BtcSweepGrid(np.asarray(tau_grid_o, float), np.asarray(tau_grid_u, float),
                        btc_e, degenerate, np.repeat(acc_o[:, None], B, axis=1),
                        acc_u.astype(float), sel)


def btc_sweep_replication(dataset: Dataset, splits: SplitSpec, cand: CandidateSpec,
                          seed: int, tau_grid_o: Sequence[float] = DEFAULT_TAUS,
                          tau_grid_u: Sequence[float] = DEFAULT_TAUS, *,
                          train_cfg: TrainConfig | None = None,
                          shift: float = 0.0) -> BtcSweepGrid:
    """Threshold sweep for one replication, skipping the RBC candidates.

    Uses the same seeds as :func:`run_replication`, so the sweep matches the
    one attached there.
    """
    parts, orig = prepare_replication(dataset, splits, cand, seed,
                                      train_cfg=train_cfg, shift=shift)
    pool = generate_bce_candidates(parts.upd_dev, parts.upd_val, cand, seed, train_cfg)
    return btc_threshold_sweep(orig, pool, parts.upd_val, parts.eval, tau_grid_o, tau_grid_u)


def mean_btc_grid(grids: Sequence[BtcSweepGrid]) -> BtcSweepGrid:
    """Cell-wise mean over replications; a cell is degenerate only if it always was."""
    if not grids:
        raise EmptyInput("no sweep grids")
    stack = np.stack([g.btc for g in grids])
    degenerate = np.all(np.stack([g.degenerate for g in grids]), axis=0)
    counts = np.sum(~np.isnan(stack), axis=0)
    totals = np.nansum(stack, axis=0)
    btc_mean = np.where(degenerate, np.nan, totals / np.maximum(counts, 1))
    return BtcSweepGrid(grids[0].tau_o, grids[0].tau_u, btc_mean, degenerate,
                        np.mean([g.acc_o for g in grids], axis=0),
                        np.mean([g.acc_u for g in grids], axis=0),
                        np.full(grids[0].btc.shape, -1))

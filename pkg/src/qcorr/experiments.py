"""Experiment pipelines: datasets, training reports, mismatch study, timing and SDP batches.

Every function here is a deterministic function of a :class:`RunConfig`; all
randomness comes from per-item seeds produced by :func:`derive_seed`.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import statistics
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .criteria import PPT_TOL, SteeringWarning, label_details, label_state, ppt_min_eigenvalue
from .linalg import fidelity
from .measurement import (
    features_exact,
    features_from_counts,
    feature_set,
    simulate_counts,
    tomography_reconstruct,
    tomography_set,
)
from .ml import (
    AnnConfig,
    Dataset,
    DtConfig,
    SvmConfig,
    ann_forward,
    binary_task,
    dt_predict,
    evaluate,
    svm_predict,
    train_model,
)
from .ml.data import label_to_roman
from .sdp import classify_sdp, random_density_matrix
from .states import EXCLUSION_HALF_WIDTH, is_excluded, make_state, theoretical_label

MODEL_CHOICES = ("ann", "svm", "dt")
NOISE_CHOICES = ("poisson", "none")


class ConfigError(ValueError):
    pass


class OverlapError(ValueError):
    pass


# ---------------------------------------------------------------- configuration


@dataclass
class GridConfig:
    """Train/test layout over p ∈ [p_min, p_max] and θ ∈ (0, 2π).

    Training angles sit at (j + 1/2)·2π/n_theta; test angles are shifted by
    ``delta_theta`` (default: half a spacing). Angles inside the exclusion
    windows are dropped, rows are ordered θ-major with p varying fastest, and
    each list is truncated to its requested size.
    """

    p_min: float = 0.02
    p_max: float = 0.98
    n_p: int = 20
    n_theta: int = 28
    half_width: float = EXCLUSION_HALF_WIDTH
    n_train: int = 445
    n_test: int = 455
    delta_theta: float | None = None


@dataclass
class SdpConfig:
    dims: list = field(default_factory=lambda: [[2, 2], [2, 3]])
    n_states: list = field(default_factory=lambda: [500, 200])
    budget: int = 500
    budget_sweep: list = field(default_factory=lambda: [50, 100, 250, 500])


@dataclass
class BenchConfig:
    repeats: int = 30
    n_states: int = 30


@dataclass
class RunConfig:
    seed: int = 0
    n0: int = 60000
    noise: str = "poisson"
    workers: int = 1
    grid: GridConfig = field(default_factory=GridConfig)
    ann: AnnConfig = field(default_factory=AnnConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    dt: DtConfig = field(default_factory=DtConfig)
    sdp: SdpConfig = field(default_factory=SdpConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def __post_init__(self):
        if self.noise not in NOISE_CHOICES:
            raise ConfigError(f"noise must be one of {NOISE_CHOICES}, got {self.noise!r}")
        if self.n0 <= 0:
            raise ConfigError("n0 must be positive")
        if self.grid.n_train < 1 or self.grid.n_test < 1:
            raise ConfigError("train and test sizes must be at least 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d or {})
        nested = {
            "grid": GridConfig,
            "ann": AnnConfig,
            "svm": SvmConfig,
            "dt": DtConfig,
            "sdp": SdpConfig,
            "bench": BenchConfig,
        }
        kwargs = {}
        known = {f.name for f in dataclasses.fields(cls)}
        for key, value in d.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key in nested:
                sub = nested[key]
                sub_known = {f.name for f in dataclasses.fields(sub)}
                bad = set(value) - sub_known
                if bad:
                    raise ConfigError(f"unknown keys in {key!r}: {sorted(bad)}")
                kwargs[key] = sub(**value)
            else:
                kwargs[key] = value
        return cls(**kwargs)

    def with_overrides(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def config_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def derive_seed(root: int, tag: str, index: int = 0) -> int:
    """64-bit seed from ``sha256("root:tag:index")``."""
    digest = hashlib.sha256(f"{root}:{tag}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# ---------------------------------------------------------------- datasets


def grid_angles(grid: GridConfig):
    """Return (train_thetas, test_thetas) after removing excluded angles."""
    if grid.n_theta < 1 or grid.n_p < 1:
        raise ConfigError("grid needs at least one p and one θ value")
    spacing = 2 * math.pi / grid.n_theta
    delta = spacing / 2 if grid.delta_theta is None else grid.delta_theta
    base = (np.arange(grid.n_theta) + 0.5) * spacing
    train = [t for t in base if not is_excluded(t, grid.half_width)]
    test = []
    for t in base:
        s = math.fmod(t + delta, 2 * math.pi)
        if 0 < s < 2 * math.pi and not is_excluded(s, grid.half_width):
            test.append(s)
    return np.array(train), np.array(test)


def grid_params(grid: GridConfig):
    """(p, θ) arrays for the training and test states."""
    p_values = np.linspace(grid.p_min, grid.p_max, grid.n_p)
    if p_values[0] <= 0 or p_values[-1] > 1:
        raise ConfigError("p range must lie in (0, 1]")
    train_t, test_t = grid_angles(grid)
    out = []
    for thetas, n in ((train_t, grid.n_train), (test_t, grid.n_test)):
        rows = [(p, t) for t in thetas for p in p_values]
        if len(rows) < n:
            raise ConfigError(f"grid holds {len(rows)} states but {n} were requested")
        out.append(np.array(rows[:n]))
    train, test = out
    overlap = np.abs(
        np.angle(np.exp(1j * (train[:, None, 1] - test[None, :, 1])))
    ) < 1e-9
    overlap &= np.abs(train[:, None, 0] - test[None, :, 0]) < 1e-12
    if np.any(overlap):
        raise OverlapError(f"{int(overlap.sum())} test states coincide with training states")
    return train, test


def simulate_item(p: float, theta: float, noise: str, n0: int, seed: int) -> dict:
    """Features, criterion label and provenance for one family state."""
    rho = make_state(p, theta)
    row = {"p": p, "theta": theta, "seed": seed, "source": "exact" if noise == "none" else "poisson"}
    if noise == "none":
        f = features_exact(rho)
        labeled = rho
    else:
        frec = simulate_counts(rho, feature_set(), n0, derive_seed(seed, "features"))
        trec = simulate_counts(rho, tomography_set(), n0, derive_seed(seed, "tomography"))
        f = features_from_counts(frec)
        labeled = tomography_reconstruct(trec, n0)
    with warnings.catch_warnings():
        # two-way steerable reconstructions are recorded in the row instead
        warnings.simplefilter("ignore", SteeringWarning)
        details = label_details(labeled)
    row.update(
        f1=f.f1,
        f2=f.f2,
        label=int(details.label),
        theory=int(theoretical_label(p, theta)),
        fidelity=fidelity(rho, labeled),
        two_way=details.two_way_steerable,
    )
    return row


def _simulate_star(args):
    return simulate_item(*args)


def generate_split(config: RunConfig, split: str, noise: str | None = None) -> Dataset:
    """Simulate the ``'train'`` or ``'test'`` states of the grid."""
    noise = noise or config.noise
    train, test = grid_params(config.grid)
    params = {"train": train, "test": test}[split]
    jobs = [
        (float(p), float(t), noise, config.n0, derive_seed(config.seed, f"{split}/{noise}", i))
        for i, (p, t) in enumerate(params)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            rows = list(pool.map(_simulate_star, jobs, chunksize=16))
    else:
        rows = [simulate_item(*j) for j in jobs]
    return Dataset(
        np.array([[r["f1"], r["f2"]] for r in rows]),
        np.array([r["label"] for r in rows]),
        params,
        [
            {
                "source": r["source"],
                "seed": r["seed"],
                "fidelity": round(r["fidelity"], 12),
                "theory": label_to_roman(r["theory"]),
                **({"two_way_steerable": True} if r["two_way"] else {}),
            }
            for r in rows
        ],
    )


# ---------------------------------------------------------------- training and evaluation


def model_config(config: RunConfig, kind: str):
    return {"ann": config.ann, "svm": config.svm, "dt": config.dt}[kind]


def resolve_models(choice: str | None):
    if choice in (None, "all"):
        return list(MODEL_CHOICES)
    if choice not in MODEL_CHOICES:
        raise ConfigError(f"unknown model {choice!r}")
    return [choice]


def phase_rows(test: Dataset, predictions) -> list:
    rows = []
    for (p, theta), true, pred in zip(test.params, test.labels, predictions):
        rows.append((float(p), float(theta), label_to_roman(true), label_to_roman(pred), int(true == pred)))
    return rows


def phase_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "theta", "true", "pred", "correct"])
    for p, theta, true, pred, ok in rows:
        w.writerow([repr(p), repr(theta), true, pred, ok])
    return buf.getvalue()


def train_and_evaluate(config: RunConfig, train: Dataset, test: Dataset, models=None):
    """Train each model, evaluate four-class and YES/NO tasks.

    Returns ``(report, fitted)`` where ``fitted`` maps model kind to
    ``(model, EvalReport)``.
    """
    fitted = {}
    report = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "train_size": len(train),
        "test_size": len(test),
        "train_class_counts": train.class_counts().tolist(),
        "test_class_counts": test.class_counts().tolist(),
        "models": {},
    }
    for kind in resolve_models(models):
        cfg = model_config(config, kind)
        model = train_model(kind, train, cfg, n_classes=4)
        ev = evaluate(model, test, n_classes=4)
        fitted[kind] = (model, ev)
        entry = {"four_class": ev.to_dict(), "binary": {}}
        for question in ("entangled", "steerable", "nonlocal"):
            entry["binary"][question] = binary_task(kind, train, test, question, cfg).to_dict()
        report["models"][kind] = entry
    return report, fitted


def mismatch_study(config: RunConfig, models=None, datasets=None) -> dict:
    """Noiseless-trained versus noise-matched models on the same noisy test set.

    ``datasets`` may supply ``(exact_train, noisy_train, noisy_test)`` to
    avoid regenerating them.
    """
    if datasets is None:
        exact_train = generate_split(config, "train", "none")
        noisy_train = generate_split(config, "train", "poisson")
        noisy_test = generate_split(config, "test", "poisson")
    else:
        exact_train, noisy_train, noisy_test = datasets
    report = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "arms": {
            "mismatched": {"train_source": "exact", "train_seed_tag": "train/none"},
            "matched": {"train_source": "poisson", "train_seed_tag": "train/poisson"},
            "test": {"source": "poisson", "seed_tag": "test/poisson"},
        },
        "models": {},
    }
    for kind in resolve_models(models):
        cfg = model_config(config, kind)
        results = {}
        for arm, train in (("matched", noisy_train), ("mismatched", exact_train)):
            model = train_model(kind, train, cfg, n_classes=4)
            results[arm] = evaluate(model, noisy_test, n_classes=4)
        m, x = results["matched"], results["mismatched"]
        report["models"][kind] = {
            "matched_accuracy": m.accuracy,
            "mismatched_accuracy": x.accuracy,
            "accuracy_delta": x.accuracy - m.accuracy,
            "matched_recall": m.to_dict()["recall"],
            "mismatched_recall": x.to_dict()["recall"],
            "class_III_recall": {"matched": m.to_dict()["recall"][2], "mismatched": x.to_dict()["recall"][2]},
            "mismatched_confusion": x.confusion.tolist(),
        }
    return report


# ---------------------------------------------------------------- timing


def _median_time(fn, args_list, repeats: int) -> tuple[float, list]:
    times = []
    for r in range(repeats):
        args = args_list[r % len(args_list)]
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), times


def _label_by_tomography(rho, n0, seed):
    rec = simulate_counts(rho, tomography_set(), n0, seed)
    return label_state(tomography_reconstruct(rec, n0))


def bench(config: RunConfig, fitted: dict, test: Dataset) -> dict:
    """Median per-state wall time of tomography labeling and of each model's inference."""
    reps = max(config.bench.repeats, 30)
    idx = np.linspace(0, len(test) - 1, min(config.bench.n_states, len(test))).astype(int)
    states = [
        (make_state(*test.params[i]), config.n0, derive_seed(config.seed, "bench", int(i))) for i in idx
    ]
    feats = [(test.features[i],) for i in idx]
    predictors = {
        "ann": lambda m: (lambda x: ann_forward(m, x)),
        "svm": lambda m: (lambda x: svm_predict(m, x)),
        "dt": lambda m: (lambda x: dt_predict(m, x)),
    }
    timings = {}
    timings["tomography_labeling"] = _median_time(_label_by_tomography, states, reps)[0]
    for kind, (model, _) in fitted.items():
        fn = predictors[kind](model)
        for x in feats[:3]:
            fn(*x)  # warm caches
        timings[f"{kind}_inference"] = _median_time(fn, feats, reps)[0]
    resolution = time.get_clock_info("perf_counter").resolution
    report = {
        "repeats": reps,
        "median_seconds": timings,
        "timer_resolution": resolution,
        "resolution_flags": {k: resolution > 0.1 * v for k, v in timings.items()},
    }
    if all(f"{k}_inference" in timings for k in MODEL_CHOICES):
        a = timings["tomography_labeling"]
        b = timings["ann_inference"]
        c, d = timings["svm_inference"], timings["dt_inference"]
        report["ordering"] = "tomography > ann > svm, dt"
        report["ordering_holds"] = bool(a > b > c and b > d)
    return report


# ---------------------------------------------------------------- SDP batches


def _ppt_exact(d_a: int, d_b: int) -> bool:
    return d_a * d_b <= 6


def sdp_batch(config: RunConfig):
    """Random Ginibre states through :func:`classify_sdp`.

    Returns ``(rows, summary)``. The budget sweep is read off the single run at
    the largest budget: the iteration sequence does not depend on the budget,
    so a run that stopped at iteration t gives the same verdict for every
    budget ≥ t and ``undecided`` below.
    """
    sc = config.sdp
    if len(sc.dims) != len(sc.n_states):
        raise ConfigError("sdp.dims and sdp.n_states must have the same length")
    budget = max([sc.budget, *sc.budget_sweep])
    rows, summary = [], {"seed": config.seed, "config_hash": config.config_hash(), "runs": []}
    for (d_a, d_b), n in zip(sc.dims, sc.n_states):
        if d_a * d_a * d_b > 100:
            raise ConfigError(f"dims {d_a}x{d_b} exceed the guard d_A^2*d_B <= 100")
        tag = f"sdp/{d_a}x{d_b}"
        outcomes = []
        for i in range(n):
            rho = random_density_matrix(d_a * d_b, seed=derive_seed(config.seed, tag, i))
            ppt = ppt_min_eigenvalue(rho, d_a, d_b)
            t0 = time.perf_counter()
            cls, res = classify_sdp(rho, d_a, d_b, budget)
            wall = (time.perf_counter() - t0) * 1e3
            status = "ppt-violated" if res is None else res.status
            iters = 0 if res is None else res.iterations
            rows.append(
                {
                    "state_id": f"{d_a}x{d_b}-{i}",
                    "ppt_min_eig": ppt,
                    "status": status,
                    "class": cls,
                    "residual": 0.0 if res is None else res.residual,
                    "iterations": iters,
                    "wall_time_ms": wall,
                }
            )
            outcomes.append((ppt, status, iters))
        run = {"dims": [d_a, d_b], "n_states": n, "ppt_exact": _ppt_exact(d_a, d_b), "sweep": []}
        for b in sorted(set([sc.budget, *sc.budget_sweep])):
            classes = []
            for ppt, status, iters in outcomes:
                if status == "ppt-violated":
                    classes.append("entangled")
                elif iters > b:
                    classes.append("undecided")
                else:
                    classes.append({"feasible": "separable-consistent", "infeasible": "entangled"}[status])
            entry = {
                "budget": b,
                "counts": {c: classes.count(c) for c in ("entangled", "separable-consistent", "undecided")},
            }
            if run["ppt_exact"]:
                agree = sum(
                    (c == "separable-consistent") == (ppt >= -PPT_TOL)
                    for c, (ppt, _, _) in zip(classes, outcomes)
                )
                entry["ppt_agreement"] = agree / n
                entry["error_rate"] = 1 - agree / n
            run["sweep"].append(entry)
            if b == sc.budget:
                run.update({k: v for k, v in entry.items() if k != "budget"})
                run["budget"] = b
        summary["runs"].append(run)
    return rows, summary

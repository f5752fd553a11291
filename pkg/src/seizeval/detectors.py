"""Per-window detectors: an energy baseline and a trainable linear model.

Detectors consume one FeatureTensor per window and emit a score in [0, 1].
State is threaded explicitly so streaming replay is reproducible; both
reference detectors are stateless unless exponential smoothing is enabled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDatasetError,
    IncompatibleFeatureError,
    InvalidArgumentError,
    MalformedHeaderError,
    TruncatedPayloadError,
)
from .features import FeatureTensor


def logistic(z: float | np.ndarray) -> float | np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


@dataclass(frozen=True)
class DetectorState:
    """Per-stream memory carried between consecutive windows."""

    prev_score: float | None = None


class Detector:
    """Scoring interface; subclasses implement _raw_score."""

    extractor_id: str = "raw"
    smoothing: float = 0.0

    def initial_state(self) -> DetectorState:
        return DetectorState()

    def reset_state(self, state: DetectorState | None = None) -> DetectorState:
        return DetectorState()

    def _raw_score(self, features: FeatureTensor) -> float:
        raise NotImplementedError

    def check_compatible(self, features: FeatureTensor) -> None:
        if features.extractor_id != self.extractor_id:
            raise IncompatibleFeatureError(
                f"detector expects {self.extractor_id!r} features, "
                f"got {features.extractor_id!r}"
            )

    def detect(
        self, state: DetectorState, features: FeatureTensor
    ) -> tuple[float, DetectorState]:
        self.check_compatible(features)
        score = float(self._raw_score(features))
        if self.smoothing > 0 and state.prev_score is not None:
            score = self.smoothing * state.prev_score + (1 - self.smoothing) * score
        score = min(1.0, max(0.0, score))
        return score, DetectorState(prev_score=score)


def detect_window(
    detector: "Detector | LinearModel",
    state: DetectorState,
    features: FeatureTensor,
) -> tuple[float, DetectorState]:
    if isinstance(detector, LinearModel):
        detector = LinearDetector(detector)
    return detector.detect(state, features)


def reset_state(state: DetectorState | None = None) -> DetectorState:
    return DetectorState()


# ---------------------------------------------------------------------------
# energy baseline


class EnergyDetector(Detector):
    """Logistic squash of mean band energy against a calibrated midpoint."""

    extractor_id = "bands"

    def __init__(
        self,
        band_index: int = 0,
        midpoint: float = 1.0,
        scale: float = 1.0,
        smoothing: float = 0.0,
    ):
        if scale <= 0:
            raise InvalidArgumentError("scale must be positive")
        self.band_index = band_index
        self.midpoint = midpoint
        self.scale = scale
        self.smoothing = smoothing

    def _raw_score(self, features: FeatureTensor) -> float:
        energy = band_energy(features, self.band_index)
        return float(logistic((energy - self.midpoint) / self.scale))

    @classmethod
    def calibrate(
        cls,
        background_energies: np.ndarray,
        band_index: int = 0,
        smoothing: float = 0.0,
    ) -> "EnergyDetector":
        """Fit midpoint/scale to the 90th/50th percentiles of background energy.

        The background median maps to score 0.1 and the 90th percentile to 0.5,
        so most background windows sit below a 0.5 threshold.
        """
        energies = np.asarray(background_energies, dtype=np.float64)
        if energies.size == 0:
            raise DegenerateDatasetError("no background windows to calibrate on")
        p50, p90 = np.percentile(energies, [50, 90])
        scale = max((p90 - p50) / np.log(9.0), 1e-9)
        return cls(band_index=band_index, midpoint=float(p90), scale=float(scale),
                   smoothing=smoothing)


def band_energy(features: FeatureTensor, band_index: int) -> float:
    if features.extractor_id != "bands":
        raise IncompatibleFeatureError(
            f"band energy needs 'bands' features, got {features.extractor_id!r}"
        )
    if not (0 <= band_index < features.shape[1]):
        raise InvalidArgumentError(f"band_index {band_index} out of range")
    return float(features.data[:, band_index, :].mean())


# ---------------------------------------------------------------------------
# trainable linear model


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    extractor_id: str
    feature_shape: tuple[int, int, int]
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = int(np.prod(self.feature_shape))
        if self.weights.shape != (n,):
            raise InvalidArgumentError("weight length must match feature dimensionality")
        if np.any(self.feature_std <= 0):
            raise InvalidArgumentError("feature std components must be positive")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 30
    batch_size: int = 32
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidArgumentError("epochs must be >= 1")


class LinearDetector(Detector):
    def __init__(self, model: LinearModel, smoothing: float = 0.0):
        self.model = model
        self.extractor_id = model.extractor_id
        self.smoothing = smoothing

    def _raw_score(self, features: FeatureTensor) -> float:
        x = features.flat()
        m = self.model
        if x.shape != m.weights.shape:
            raise IncompatibleFeatureError(
                f"feature dimensionality {x.shape[0]} does not match model "
                f"{m.weights.shape[0]}"
            )
        z = ((x - m.feature_mean) / m.feature_std) @ m.weights + m.bias
        return float(logistic(z))


def train_linear(
    dataset: list[tuple[FeatureTensor, int]],
    cfg: TrainConfig | None = None,
) -> LinearModel:
    """Logistic regression by seeded mini-batch gradient descent."""
    cfg = cfg or TrainConfig()
    if not dataset:
        raise DegenerateDatasetError("empty training set")
    labels = np.array([int(y) for _, y in dataset], dtype=np.float64)
    if len(set(labels.tolist())) < 2:
        raise DegenerateDatasetError("training set contains a single class")
    extractor_id = dataset[0][0].extractor_id
    shape = dataset[0][0].shape
    for feat, _ in dataset:
        if feat.extractor_id != extractor_id or feat.shape != shape:
            raise IncompatibleFeatureError("mixed feature kinds in training set")
    X = np.stack([feat.flat() for feat, _ in dataset])
    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), 1e-8)
    Xn = (X - mean) / std

    rng = np.random.default_rng(cfg.seed)
    n, d = Xn.shape
    w = np.zeros(d)
    b = 0.0
    losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = Xn[idx], labels[idx]
            p = logistic(xb @ w + b)
            err = p - yb
            w -= cfg.learning_rate * (xb.T @ err / len(idx) + cfg.l2 * w)
            b -= cfg.learning_rate * float(err.mean())
        p = logistic(Xn @ w + b)
        eps = 1e-12
        loss = float(
            -np.mean(labels * np.log(p + eps) + (1 - labels) * np.log(1 - p + eps))
            + 0.5 * cfg.l2 * float(w @ w)
        )
        losses.append(loss)
    return LinearModel(
        weights=w,
        bias=b,
        feature_mean=mean,
        feature_std=std,
        extractor_id=extractor_id,
        feature_shape=shape,
        loss_history=losses,
    )


# ---------------------------------------------------------------------------
# model serialization (text metadata + float64 LE payload)

_MODEL_MAGIC = "#SEIZMODEL v1"


def save_model(model: LinearModel, path: str | Path) -> None:
    header = (
        f"{_MODEL_MAGIC}\n"
        f"extractor_id={model.extractor_id}\n"
        f"feature_shape={','.join(map(str, model.feature_shape))}\n"
        f"n_dims={model.weights.shape[0]}\n"
        "end_header\n"
    )
    payload = np.concatenate(
        [[model.bias], model.weights, model.feature_mean, model.feature_std]
    ).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload.tobytes())


def load_model(path: str | Path) -> LinearModel:
    raw = Path(path).read_bytes()
    marker = b"end_header\n"
    sep = raw.find(marker)
    if sep < 0:
        raise MalformedHeaderError(f"{path}: missing end_header marker")
    lines = raw[:sep].decode("ascii").splitlines()
    if not lines or lines[0] != _MODEL_MAGIC:
        raise MalformedHeaderError(f"{path}: bad magic line")
    fields = dict(line.split("=", 1) for line in lines[1:] if "=" in line)
    try:
        extractor_id = fields["extractor_id"]
        shape = tuple(int(v) for v in fields["feature_shape"].split(","))
        n_dims = int(fields["n_dims"])
    except (KeyError, ValueError) as exc:
        raise MalformedHeaderError(f"{path}: {exc}") from exc
    payload = np.frombuffer(raw[sep + len(marker) :], dtype="<f8")
    if payload.size < 1 + 3 * n_dims:
        raise TruncatedPayloadError(f"{path}: model payload truncated")
    bias = float(payload[0])
    w = payload[1 : 1 + n_dims].copy()
    mean = payload[1 + n_dims : 1 + 2 * n_dims].copy()
    std = payload[1 + 2 * n_dims : 1 + 3 * n_dims].copy()
    return LinearModel(
        weights=w,
        bias=bias,
        feature_mean=mean,
        feature_std=std,
        extractor_id=extractor_id,
        feature_shape=shape,  # type: ignore[arg-type]
    )

"""Triple-modal observation builder: vision, task description, numeric state.

The vision and description embeddings are deterministic pseudo-embeddings:
hash-seeded random vectors that stand in for a real backbone and a real
sentence encoder while keeping every test exact.  Description vectors are
compressed with PCA fitted on the suite's description matrix.

Numeric state starts from the five execution features
[progress, step count, region, subregion, press state] and can be extended
up to 12 features from a fixed ordered list of additional counters.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError

VISION_DIM = 1024
DESCRIPTION_DIM = 1536
BASE_NUMERIC_SIZE = 5
MAX_NUMERIC_SIZE = 12

# Positions inside the numeric vector (used by the multi-step mouse variant
# to re-encode partial selections).
NUMERIC_PROGRESS = 0
NUMERIC_STEP = 1
NUMERIC_REGION = 2
NUMERIC_SUBREGION = 3
NUMERIC_PRESS = 4


def vision_embed(task_id: int, progress: int, seed: int) -> np.ndarray:
    """Deterministic stand-in screenshot embedding in [-1, 1]^1024."""
    rng = np.random.default_rng([seed, task_id, progress])
    return rng.uniform(-1.0, 1.0, VISION_DIM)


def description_embed(description: str) -> np.ndarray:
    """Deterministic unit-norm pseudo-embedding of a task description."""
    digest = hashlib.sha256(description.encode("utf-8")).digest()
    words = np.frombuffer(digest, dtype=np.uint32)
    rng = np.random.default_rng(words)
    v = rng.normal(0.0, 1.0, DESCRIPTION_DIM)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal top principal directions (columns)."""

    mean: np.ndarray        # (dim,)
    components: np.ndarray  # (dim, d_out)
    eigenvalues: np.ndarray  # (d_out,) descending

    @property
    def d_out(self) -> int:
        return self.components.shape[1]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def identity(cls, mean: np.ndarray) -> "PcaModel":
        """Mean-centering passthrough (full-dimensional output)."""
        dim = mean.shape[0]
        return cls(mean=np.asarray(mean, dtype=float),
                   components=np.eye(dim),
                   eigenvalues=np.ones(dim))


def fit_pca(rows: np.ndarray, d_out: int) -> PcaModel:
    """Fit PCA on a row-sample matrix: top-`d_out` eigenvectors of the sample
    covariance, sorted by descending eigenvalue.

    Sign convention: the first entry of each component with magnitude above
    1e-12 is made positive.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ShapeError(f"expected a 2-d sample matrix, got shape {rows.shape}")
    n, dim = rows.shape
    if d_out < 0 or d_out > min(n, dim):
        raise ConfigError(f"d_out={d_out} must lie in [0, min(n={n}, dim={dim})]")
    if d_out > 0 and n < 2:
        raise ConfigError("need at least 2 rows to fit a covariance")
    mean = rows.mean(axis=0)
    if d_out == 0:
        return PcaModel(mean=mean, components=np.zeros((dim, 0)), eigenvalues=np.zeros(0))
    centered = rows - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:d_out]
    components = eigvecs[:, order]
    components = _fix_signs(components)
    return PcaModel(mean=mean, components=components, eigenvalues=eigvals[order])


def _fix_signs(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def project(model: PcaModel, z: np.ndarray) -> np.ndarray:
    """Mean-center and project onto the principal directions."""
    z = np.asarray(z, dtype=float)
    if z.shape != model.mean.shape:
        raise ShapeError(f"vector shape {z.shape} does not match model dim {model.mean.shape}")
    if model.d_out == 0:
        return np.zeros(0)
    return model.components.T @ (z - model.mean)


def save_pca(model: PcaModel, path) -> None:
    """Flat binary layout: int64 d_out, int64 dim, mean, components column-major."""
    with open(path, "wb") as fh:
        np.array([model.d_out, model.dim], dtype="<i8").tofile(fh)
        model.mean.astype("<f8").tofile(fh)
        np.asfortranarray(model.components.astype("<f8")).T.reshape(-1).tofile(fh)
        model.eigenvalues.astype("<f8").tofile(fh)


def load_pca(path) -> PcaModel:
    with open(path, "rb") as fh:
        head = np.fromfile(fh, dtype="<i8", count=2)
        d_out, dim = int(head[0]), int(head[1])
        mean = np.fromfile(fh, dtype="<f8", count=dim)
        comp = np.fromfile(fh, dtype="<f8", count=dim * d_out).reshape(d_out, dim).T
        eig = np.fromfile(fh, dtype="<f8", count=d_out)
    return PcaModel(mean=mean, components=np.ascontiguousarray(comp), eigenvalues=eig)


@dataclass(frozen=True)
class Observation:
    """One triple-modal observation plus the raw task id."""

    vision: np.ndarray
    task_vec: np.ndarray
    numeric: np.ndarray
    task_id: int

    def concat(self) -> np.ndarray:
        return np.concatenate([self.vision, self.task_vec, self.numeric])

    def __len__(self) -> int:
        return self.vision.shape[0] + self.task_vec.shape[0] + self.numeric.shape[0]


@dataclass(frozen=True)
class EncoderConfig:
    embed_dim: int = 0          # description-embedding output size after PCA
    state_size: int = BASE_NUMERIC_SIZE
    seed: int = 0
    max_steps: int = 100        # feeds the remaining-budget extra feature

    def __post_init__(self):
        if not BASE_NUMERIC_SIZE <= self.state_size <= MAX_NUMERIC_SIZE:
            raise ConfigError(
                f"state_size must be in [{BASE_NUMERIC_SIZE}, {MAX_NUMERIC_SIZE}]")
        if not 0 <= self.embed_dim <= DESCRIPTION_DIM:
            raise ConfigError(f"embed_dim must be in [0, {DESCRIPTION_DIM}]")


def numeric_state(state, size: int, max_steps: int) -> np.ndarray:
    """Numeric feature vector of the requested size from an episode state.

    Base features: [progress, step count, region, subregion, press state].
    Extras, in fixed order: repeat streak, stagnation counter, manager
    streak, subpolicy streak, remaining-step budget, last macro index,
    cumulative-reward sign.
    """
    last_macro = -1.0
    if state.last_action is not None:
        last_macro = float(list(type(state.last_action.macro)).index(state.last_action.macro))
    feats = [
        float(state.progress),
        float(state.t),
        float(state.region),
        float(state.subregion),
        float(state.press_state),
        float(state.repeat_streak),
        float(state.stagnation),
        float(state.manager_streak),
        float(state.subpolicy_streak),
        float(max_steps - state.t),
        last_macro,
        float(np.sign(state.cumulative_reward)),
    ]
    return np.array(feats[:size])


class ObservationBuilder:
    """Assembles observations for one suite under a fixed encoder config.

    Fits (or selects) the description-compression model once per suite:
    no model at embed_dim 0, a PCA fit for intermediate sizes, and a
    mean-centering passthrough at the full 1536 dimensions.
    """

    def __init__(self, suite, config: EncoderConfig):
        self.config = config
        self.suite = suite
        self._vision_cache = {}
        self._task_vecs = {}
        self.pca = None
        if config.embed_dim > 0:
            matrix = np.stack([description_embed(t.description) for t in suite])
            if config.embed_dim == DESCRIPTION_DIM:
                self.pca = PcaModel.identity(matrix.mean(axis=0))
            else:
                if config.embed_dim > min(len(suite), DESCRIPTION_DIM):
                    raise ConfigError(
                        f"embed_dim {config.embed_dim} needs at least that many tasks "
                        f"(suite has {len(suite)})")
                self.pca = fit_pca(matrix, config.embed_dim)
            for task, row in zip(suite, matrix):
                self._task_vecs[task.id] = project(self.pca, row)

    def observation_size(self) -> int:
        return VISION_DIM + self.config.embed_dim + self.config.state_size

    def build(self, state) -> Observation:
        """Observation for the current episode state (state.task must be set)."""
        task = state.task
        key = (task.id, state.progress)
        vision = self._vision_cache.get(key)
        if vision is None:
            vision = vision_embed(task.id, state.progress, self.config.seed)
            self._vision_cache[key] = vision
        task_vec = self._task_vecs.get(task.id)
        if task_vec is None:
            task_vec = np.zeros(self.config.embed_dim)
        numeric = numeric_state(state, self.config.state_size, self.config.max_steps)
        return Observation(vision=vision, task_vec=task_vec, numeric=numeric, task_id=task.id)

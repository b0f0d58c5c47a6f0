"""Parameter tensors, deterministic initialisation and the checkpoint format."""

from collections.abc import Iterable
from pathlib import Path

import numpy as np

from surit.config import ExperimentConfig
from surit.errors import InvalidConfigError, InvalidInputError, MissingFileError
from surit.utils.io import atomic_write_bytes

CHECKPOINT_MAGIC = "SURIT-CHECKPOINT v1"
_END = b"END\n"


class ModelParams(dict[str, np.ndarray]):
    """Name -> float64 tensor mapping in a fixed (insertion) order."""

    def copy(self) -> "ModelParams":
        return ModelParams((name, value.copy()) for name, value in self.items())

    def zeros_like(self) -> "ModelParams":
        return ModelParams((name, np.zeros_like(value)) for name, value in self.items())

    def select(self, prefixes: Iterable[str]) -> list[str]:
        prefixes = tuple(prefixes)
        return [name for name in self if name.startswith(prefixes)]

    def size(self) -> int:
        return int(sum(value.size for value in self.values()))

    def flatten(self) -> np.ndarray:
        return np.concatenate([value.ravel() for value in self.values()]) if self else np.zeros(0)

    def check_finite(self) -> list[str]:
        return [name for name, value in self.items() if not np.all(np.isfinite(value))]

    def add_scaled(self, other: "ModelParams", factor: float = 1.0) -> None:
        """In-place self += factor * other over shared names."""
        for name, value in other.items():
            self[name] += factor * value


def param_shapes(config: ExperimentConfig) -> dict[str, tuple[int, ...]]:
    """Tensor shapes of the full model, in serialisation order."""
    m, d = config.model, config.data
    d_in = m.splice_context * d.feat_dim
    C, D, k = m.unmix_channels, m.unmix_dim, m.kernel_size
    H, Hg, E = m.asr_hidden, m.label_hidden, m.label_embed_dim
    V = d.vocab_size

    shapes: dict[str, tuple[int, ...]] = {}
    for branch in ("mask", "enc"):
        shapes[f"unmix.{branch}.conv1.W"] = (k, d_in, C)
        shapes[f"unmix.{branch}.conv1.b"] = (C,)
        shapes[f"unmix.{branch}.conv2.W"] = (k, C, D)
        shapes[f"unmix.{branch}.conv2.b"] = (D,)

    in_dim = D
    for layer in range(m.asr_layers):
        shapes[f"asr.enc.l{layer}.W"] = (in_dim, 3 * H)
        shapes[f"asr.enc.l{layer}.U"] = (H, 3 * H)
        shapes[f"asr.enc.l{layer}.b"] = (3 * H,)
        in_dim = H
        if m.time_reduction and layer == 0:
            shapes["asr.enc.reduce.W"] = (2 * H, H)
            shapes["asr.enc.reduce.b"] = (H,)

    shapes["asr.pred.embed"] = (V + 1, E)
    shapes["asr.pred.gru.W"] = (E, 3 * Hg)
    shapes["asr.pred.gru.U"] = (Hg, 3 * Hg)
    shapes["asr.pred.gru.b"] = (3 * Hg,)
    shapes["asr.joint.enc.W"] = (H, m.joint_dim)
    shapes["asr.joint.pred.W"] = (Hg, m.joint_dim)
    shapes["asr.joint.b"] = (m.joint_dim,)
    shapes["asr.out.W"] = (m.joint_dim, V + 1)
    shapes["asr.out.b"] = (V + 1,)

    Hs, Es, Js = m.sid_hidden, m.sid_label_embed_dim, m.sid_joint_dim
    shapes["sid.enc.gru.W"] = (D, 3 * Hs)
    shapes["sid.enc.gru.U"] = (Hs, 3 * Hs)
    shapes["sid.enc.gru.b"] = (3 * Hs,)
    shapes["sid.pred.embed"] = (2, Es)
    shapes["sid.joint.enc.W"] = (Hs, Js)
    shapes["sid.joint.pred.W"] = (Es, Js)
    shapes["sid.joint.b"] = (Js,)
    shapes["sid.blank.W"] = (Js, 1)
    shapes["sid.blank.b"] = (1,)
    shapes["sid.label.W"] = (Js, d.profile_dim)
    shapes["sid.label.b"] = (d.profile_dim,)
    return shapes


def _fans(shape: tuple[int, ...]) -> tuple[int, int]:
    if len(shape) == 3:
        k, c_in, c_out = shape
        return k * c_in, k * c_out
    return shape[0], shape[1]


def init_params(config: ExperimentConfig, seed: int) -> ModelParams:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, update-gate biases +1."""
    shapes = param_shapes(config)
    for name, shape in shapes.items():
        if any(dim <= 0 for dim in shape):
            raise InvalidConfigError(f"layer {name} has zero size {shape}")

    rng = np.random.default_rng(seed)
    params = ModelParams()
    for name, shape in shapes.items():
        if len(shape) == 1:
            bias = np.zeros(shape)
            if name.endswith("gru.b") or (name.startswith("asr.enc.l") and name.endswith(".b")):
                hidden = shape[0] // 3
                bias[hidden : 2 * hidden] = 1.0
            params[name] = bias
        else:
            fan_in, fan_out = _fans(shape)
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def save_checkpoint(params: ModelParams, path: Path) -> None:
    """Text manifest (name, shape, byte offset) then raw little-endian float64 data."""
    lines = [CHECKPOINT_MAGIC]
    blobs = []
    offset = 0
    for name, value in params.items():
        data = np.ascontiguousarray(value, dtype="<f8").tobytes()
        shape = ",".join(str(dim) for dim in value.shape)
        lines.append(f"{name}\t{shape}\t{offset}")
        blobs.append(data)
        offset += len(data)
    header = ("\n".join(lines) + "\n").encode("utf-8") + _END
    atomic_write_bytes(path, header + b"".join(blobs))


def load_checkpoint(path: Path) -> ModelParams:
    if not path.exists():
        raise MissingFileError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    split = raw.find(b"\n" + _END)
    if not raw.startswith(CHECKPOINT_MAGIC.encode()) or split < 0:
        raise InvalidInputError(f"{path} is not a surit checkpoint")
    header = raw[:split].decode("utf-8").splitlines()[1:]
    blob = memoryview(raw)[split + 1 + len(_END) :]

    params = ModelParams()
    for line in header:
        name, shape_text, offset_text = line.split("\t")
        shape = tuple(int(dim) for dim in shape_text.split(",")) if shape_text else ()
        count = int(np.prod(shape)) if shape else 1
        values = np.frombuffer(blob, dtype="<f8", count=count, offset=int(offset_text))
        params[name] = values.astype(np.float64).reshape(shape)
    return params


def check_compatible(params: ModelParams, config: ExperimentConfig) -> None:
    """Raise if ``params`` does not have exactly the tensors ``config`` describes."""
    expected = param_shapes(config)
    if list(params) != list(expected):
        missing = sorted(set(expected) - set(params))
        extra = sorted(set(params) - set(expected))
        raise InvalidInputError(f"checkpoint tensors do not match the config (missing {missing}, unexpected {extra})")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise InvalidInputError(f"{name} has shape {params[name].shape}, config expects {shape}")

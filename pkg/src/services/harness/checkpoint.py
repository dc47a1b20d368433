"""
Binary checkpoint format (little-endian throughout).

    magic        4 bytes  b"ALIF"
    version      uint16
    mode         uint8    0 = liif, 1 = aliif
    K, D, B      uint16 x 3
    widths       uint16 x 4   basis hidden, basis layers, expansion hidden, expansion layers
    combine      uint8    0 = linear, 1 = relu
    share        uint8    expansion weights shared across ensemble neighbours
    blocks       uint32   number of parameter blocks
    per block    uint8 ndim, then uint32 x ndim dims
    data         float32 values of every block, in declaration order
    checksum     8 bytes  BLAKE2b-64 digest of everything above

A sidecar ``<checkpoint>.manifest`` records the training config and seed as
``key = value`` lines.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from dotenv import dotenv_values

from src.config.logging_config import setup_logger
from src.services.exceptions import CheckpointError, ChecksumError
from src.services.network.model import ModelSpec, SuperResolutionModel

logger = setup_logger(__name__)

MAGIC = b"ALIF"
FORMAT_VERSION = 1
CHECKSUM_SIZE = 8
MANIFEST_SUFFIX = ".manifest"

_MODES = ("liif", "aliif")
_COMBINES = ("linear", "relu")
_HEADER = struct.Struct("<4sHB3H4HBBI")
_FLOAT = np.dtype("<f4")


@dataclass(frozen=True)
class CheckpointInfo:
    path: Path
    checksum: str
    parameter_count: int

    @property
    def manifest_path(self) -> Path:
        return manifest_path(self.path)


def manifest_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + MANIFEST_SUFFIX)


def checksum(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=CHECKSUM_SIZE).digest()


def encode_checkpoint(model: SuperResolutionModel) -> bytes:
    spec = model.spec
    params = model.parameters()
    try:
        header = _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            _MODES.index(spec.mode),
            spec.k,
            spec.feature_channels,
            spec.num_blocks,
            spec.basis_hidden,
            spec.basis_layers,
            spec.expansion_hidden,
            spec.expansion_layers,
            _COMBINES.index(spec.combine),
            int(spec.share_expansion),
            len(params),
        )
        shapes = [struct.pack(f"<B{tensor.ndim}I", tensor.ndim, *tensor.shape) for tensor in params]
    except struct.error as exc:
        raise CheckpointError(f"model does not fit the checkpoint header: {exc}") from exc
    parts = [header, *shapes]
    parts += [np.ascontiguousarray(tensor.data, dtype=_FLOAT).tobytes() for tensor in params]
    payload = b"".join(parts)
    return payload + checksum(payload)


def _read_header(payload: bytes) -> tuple[ModelSpec, int]:
    if len(payload) < _HEADER.size:
        raise CheckpointError("checkpoint is shorter than its header")
    fields = _HEADER.unpack_from(payload, 0)
    magic, version, mode, k, d, b, basis_hidden, basis_layers, exp_hidden, exp_layers, combine, share, blocks = fields
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if mode >= len(_MODES) or combine >= len(_COMBINES):
        raise CheckpointError(f"invalid mode/combine code {mode}/{combine}")
    spec = ModelSpec(
        mode=_MODES[mode],
        k=k,
        feature_channels=d,
        num_blocks=b,
        basis_hidden=basis_hidden,
        basis_layers=basis_layers,
        expansion_hidden=exp_hidden,
        expansion_layers=exp_layers,
        combine=_COMBINES[combine],
        share_expansion=bool(share),
    )
    errors = spec.validate()
    if errors:
        raise CheckpointError("invalid header: " + "; ".join(errors))
    return spec, blocks


def decode_checkpoint(blob: bytes) -> SuperResolutionModel:
    """
    Rebuild a model from checkpoint bytes.

    Raises:
        ChecksumError: stored checksum does not match the contents
        CheckpointError: malformed header, or block shapes that disagree with the header/data size
    """
    if len(blob) < _HEADER.size + CHECKSUM_SIZE:
        raise CheckpointError(f"checkpoint too short ({len(blob)} bytes)")
    payload, stored = blob[:-CHECKSUM_SIZE], blob[-CHECKSUM_SIZE:]
    if checksum(payload) != stored:
        raise ChecksumError(f"checksum mismatch: stored {stored.hex()}, computed {checksum(payload).hex()}")

    spec, block_count = _read_header(payload)
    offset = _HEADER.size
    shapes: list[tuple[int, ...]] = []
    try:
        for _ in range(block_count):
            (ndim,) = struct.unpack_from("<B", payload, offset)
            shapes.append(struct.unpack_from(f"<{ndim}I", payload, offset + 1))
            offset += 1 + 4 * ndim
    except struct.error as exc:
        raise CheckpointError(f"truncated block table: {exc}") from exc

    expected = sum(int(np.prod(shape)) for shape in shapes) * _FLOAT.itemsize
    if len(payload) - offset != expected:
        raise CheckpointError(f"parameter section holds {len(payload) - offset} bytes, block shapes declare {expected}")

    model = SuperResolutionModel.initialise(spec, seed=0)
    params = model.named_parameters()
    if len(params) != block_count:
        raise CheckpointError(f"header architecture has {len(params)} tensors, file declares {block_count}")
    for (name, tensor), shape in zip(params, shapes, strict=True):
        if tuple(tensor.shape) != tuple(shape):
            raise CheckpointError(f"block {name} has shape {shape}, architecture expects {tensor.shape}")
        count = int(np.prod(shape))
        values = np.frombuffer(payload, dtype=_FLOAT, count=count, offset=offset)
        tensor.data = values.reshape(shape).astype(tensor.dtype)
        offset += count * _FLOAT.itemsize
    return model


def write_manifest(path: str | Path, metadata: dict[str, object]) -> Path:
    target = manifest_path(path)
    lines = [f"{key} = {_manifest_value(value)}" for key, value in metadata.items()]
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target


def _manifest_value(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def read_manifest(path: str | Path) -> dict[str, str]:
    """key/value pairs of a checkpoint's manifest (empty when there is none)."""
    target = manifest_path(path)
    if not target.is_file():
        return {}
    return {key: value or "" for key, value in dotenv_values(target).items()}


def save_checkpoint(
    model: SuperResolutionModel, path: str | Path, metadata: dict[str, object] | None = None
) -> CheckpointInfo:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = encode_checkpoint(model)
    path.write_bytes(blob)
    digest = blob[-CHECKSUM_SIZE:].hex()
    manifest = {"format_version": FORMAT_VERSION, **model.spec.as_dict(), **(metadata or {}), "checksum": digest}
    write_manifest(path, manifest)
    logger.info("Saved checkpoint %s (checksum %s)", path, digest)
    return CheckpointInfo(path=path, checksum=digest, parameter_count=model.parameter_count)


def load_checkpoint(path: str | Path) -> SuperResolutionModel:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint {path} does not exist")
    model = decode_checkpoint(path.read_bytes())
    logger.info("Loaded %s checkpoint %s (K=%d)", model.spec.mode, path, model.spec.k)
    return model

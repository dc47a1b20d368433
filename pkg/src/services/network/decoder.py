"""
Implicit image decoder: continuous coordinates -> RGB.

Two decoders share one query path:
  - liif:  a single MLP f(z, xi, cell)
  - aliif: RGB = sum_k omega_k * MLP_k(z, xi, cell), with omega = softmax(P(z_center, xi))

Coordinates live in [-1, 1]^2 with pixel centres at -1 + (2i + 1) / n (row axis
first). Each query is evaluated at the 4 diagonal feature neighbours and the
predictions are blended with area weights (local ensemble).
"""

from __future__ import annotations

import contextvars
import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from src.config.logging_config import setup_logger
from src.config.settings import config
from src.services.autodiff import ops
from src.services.autodiff.tensor import Tensor
from src.services.exceptions import ContractError
from src.services.imaging.models import Image
from src.services.network.encoder import FeatureMap
from src.services.network.layers import MLP, NamedParameters

logger = setup_logger(__name__)

MODES = ("liif", "aliif")
COMBINE_MODES = ("linear", "relu")

# Shift applied to ensemble neighbour lookups and the clamp margin at the grid border.
ENSEMBLE_EPS = 1e-6
BOUNDARY_EPS = 1e-6
AREA_EPS = 1e-9

# Neighbour order of the local ensemble: (row shift, col shift).
ENSEMBLE_SHIFTS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


# ---------------------------------------------------------------------------
# Query coordinates
# ---------------------------------------------------------------------------
def axis_centres(n: int) -> np.ndarray:
    """Pixel-centre coordinates of an axis with n pixels: -1 + (2i + 1) / n."""
    if n < 1:
        raise ContractError(f"axis length must be >= 1, got {n}")
    return -1.0 + (2.0 * np.arange(n, dtype=np.float64) + 1.0) / n


@dataclass(frozen=True)
class QueryPoint:
    """One query resolved against a feature grid."""

    coord: tuple[float, float]
    nearest: tuple[float, float]
    rel_coord: tuple[float, float]
    cell: tuple[float, float]


@dataclass(frozen=True, eq=False)
class QueryGrid:
    """Every pixel centre of an out_h x out_w target grid, row-major."""

    height: int
    width: int
    coords: np.ndarray
    cells: np.ndarray

    def __len__(self) -> int:
        return self.coords.shape[0]

    def point(self, index: int, feature_size: tuple[int, int]) -> QueryPoint:
        """Resolve query ``index`` against a feature grid of size (h, w)."""
        coord = self.coords[index : index + 1]
        _, centre, rel = nearest_feature(coord, *feature_size)
        return QueryPoint(
            coord=(float(coord[0, 0]), float(coord[0, 1])),
            nearest=(float(centre[0, 0]), float(centre[0, 1])),
            rel_coord=(float(rel[0, 0]), float(rel[0, 1])),
            cell=(float(self.cells[index, 0]), float(self.cells[index, 1])),
        )

    def split(self, batch_size: int) -> list[tuple[int, int]]:
        """[start, stop) ranges covering the grid in chunks of batch_size."""
        if batch_size < 1:
            raise ContractError(f"batch size must be >= 1, got {batch_size}")
        return [(start, min(start + batch_size, len(self))) for start in range(0, len(self), batch_size)]


def make_query_grid(out_h: int, out_w: int) -> QueryGrid:
    """Pixel-centre queries of an out_h x out_w image with cell (2/out_h, 2/out_w)."""
    if out_h < 1 or out_w < 1:
        raise ContractError(f"query grid size must be >= 1x1, got {out_h}x{out_w}")
    rows, cols = np.meshgrid(axis_centres(out_h), axis_centres(out_w), indexing="ij")
    coords = np.stack([rows.reshape(-1), cols.reshape(-1)], axis=1)
    cells = np.tile(np.array([[2.0 / out_h, 2.0 / out_w]]), (coords.shape[0], 1))
    return QueryGrid(height=out_h, width=out_w, coords=coords, cells=cells)


def nearest_feature(coords: np.ndarray, feat_h: int, feat_w: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nearest feature location of each coordinate.

    Returns:
        (flat index into the h*w grid, centre coordinates x_r [N, 2],
         rel_coord xi = (x - x_r) / spacing [N, 2])
    """
    sizes = np.array([feat_h, feat_w])
    spacing = 2.0 / sizes
    index = np.clip(np.floor((coords + 1.0) * sizes / 2.0).astype(np.int64), 0, sizes - 1)
    centres = -1.0 + (2.0 * index + 1.0) / sizes
    flat = index[:, 0] * feat_w + index[:, 1]
    return flat, centres, (coords - centres) / spacing


def ensemble_neighbours(
    coords: np.ndarray, feat_h: int, feat_w: int
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    The 4 diagonal neighbours of each query, in ENSEMBLE_SHIFTS order.

    Returns:
        list of (flat feature index, xi relative to that neighbour, blend weight);
        the weight of a neighbour is the normalised area spanned by the query and
        the diagonally opposite neighbour, so the 4 weights of a query sum to 1.
    """
    half = np.array([1.0 / feat_h, 1.0 / feat_w])
    found = []
    for shift in ENSEMBLE_SHIFTS:
        shifted = coords + np.asarray(shift) * half + ENSEMBLE_EPS
        shifted = np.clip(shifted, -1.0 + BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)
        flat, centres, _ = nearest_feature(shifted, feat_h, feat_w)
        xi = (coords - centres) / (2.0 * half)
        found.append((flat, xi, np.abs(xi[:, 0] * xi[:, 1]) + AREA_EPS))
    total = sum(area for _, _, area in found)
    opposite = [found[len(found) - 1 - i][2] for i in range(len(found))]
    return [(flat, xi, area / total) for (flat, xi, _), area in zip(found, opposite, strict=True)]


# ---------------------------------------------------------------------------
# Feature unfolding
# ---------------------------------------------------------------------------
@functools.lru_cache(maxsize=64)
def _neighbour_index(feat_h: int, feat_w: int) -> np.ndarray:
    """[h*w, 9] flat indices of the edge-clamped 3x3 neighbourhood, row-major over the window."""
    rows = np.arange(feat_h)[:, None, None]
    cols = np.arange(feat_w)[None, :, None]
    dy = np.repeat(np.array([-1, 0, 1]), 3)[None, None, :]
    dx = np.tile(np.array([-1, 0, 1]), 3)[None, None, :]
    nr = np.clip(rows + dy, 0, feat_h - 1)
    nc = np.clip(cols + dx, 0, feat_w - 1)
    index = (nr * feat_w + nc).reshape(feat_h * feat_w, 9)
    index.setflags(write=False)
    return index


def unfold_rows(fm: FeatureMap) -> Tensor:
    """Unfolded features as rows [h*w, 9*D]; column c*9 + j is channel c of neighbour j."""
    d, h, w = fm.channels, fm.height, fm.width
    rows = ops.reshape(ops.transpose(fm.tensor, (1, 2, 0)), (h * w, d))
    gathered = ops.gather_rows(rows, _neighbour_index(h, w).reshape(-1))
    gathered = ops.transpose(ops.reshape(gathered, (h * w, 9, d)), (0, 2, 1))
    return ops.reshape(gathered, (h * w, 9 * d))


def unfold_features(fm: FeatureMap) -> FeatureMap:
    """3x3 feature unfolding with edge clamping: [D, H, W] -> [9*D, H, W]."""
    rows = unfold_rows(fm)
    unfolded = ops.transpose(ops.reshape(rows, (fm.height, fm.width, 9 * fm.channels)), (2, 0, 1))
    return FeatureMap(unfolded)




# ---------------------------------------------------------------------------
# Mixture weights and decoders
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MixtureWeights:
    """Per-query K-vectors omega [N, K]; non-negative rows summing to 1."""

    omega: Tensor

    @property
    def k(self) -> int:
        return self.omega.shape[1]

    def validate(self, tolerance: float = 1e-6) -> None:
        values = self.omega.data
        if values.size and float(values.min()) < 0.0:
            raise ContractError("mixture weights must be non-negative")
        worst = float(np.max(np.abs(values.sum(axis=1) - 1.0))) if values.size else 0.0
        if worst > tolerance:
            raise ContractError(f"mixture weights must sum to 1 (worst deviation {worst:.3g})")


class BasisMlpBank:
    """K basis MLPs with identical architecture, 3 outputs each."""

    def __init__(self, nets: list[MLP]) -> None:
        if not nets:
            raise ContractError("basis bank needs K >= 1 networks")
        widths = nets[0].widths
        if any(net.widths != widths for net in nets):
            raise ContractError("all basis MLPs must share one architecture")
        self.nets = nets

    def __len__(self) -> int:
        return len(self.nets)

    @property
    def in_features(self) -> int:
        return self.nets[0].in_features

    def named_parameters(self) -> NamedParameters:
        return [item for net in self.nets for item in net.named_parameters()]


@dataclass(frozen=True, eq=False)
class DecoderInput:
    """Decoder rows [z (9*D), xi (2), cell (2)]."""

    z: Tensor
    rel_coord: np.ndarray
    cell: np.ndarray

    def as_tensor(self) -> Tensor:
        dtype = self.z.dtype
        return ops.concat(
            [self.z, Tensor(self.rel_coord, dtype=dtype), Tensor(self.cell, dtype=dtype)],
            axis=1,
        )


def _checked(weights: MixtureWeights) -> MixtureWeights:
    if config.DEBUG_CHECKS:
        weights.validate(config.MIXTURE_SUM_TOLERANCE)
    return weights


def expansion_weights(z_center: Tensor, xi: np.ndarray | Tensor, network: MLP) -> MixtureWeights:
    """omega = softmax(P([z_center, xi])), one K-vector per row."""
    xi_tensor = xi if isinstance(xi, Tensor) else Tensor(xi, dtype=z_center.dtype)
    if z_center.ndim != 2 or xi_tensor.shape != (z_center.shape[0], 2):
        raise ContractError(f"expansion input mismatch: z {z_center.shape}, xi {xi_tensor.shape}")
    if z_center.shape[1] + 2 != network.in_features:
        raise ContractError(
            f"expansion network expects width {network.in_features}, got {z_center.shape[1]} + 2"
        )
    return _checked(MixtureWeights(ops.softmax(network(ops.concat([z_center, xi_tensor], axis=1)))))


def mix_outputs(outputs: list[Tensor], weights: MixtureWeights, combine: str = "linear") -> Tensor:
    """sum_k omega_k * outputs[k]; combine="relu" applies an outer ReLU."""
    if weights.k != len(outputs):
        raise ContractError(f"mixture has K={weights.k} weights but {len(outputs)} basis outputs")
    if combine not in COMBINE_MODES:
        raise ContractError(f"unknown combine mode {combine!r}")
    out: Tensor | None = None
    for k, pred in enumerate(outputs):
        term = ops.scale_rows(pred, ops.take_column(weights.omega, k))
        out = term if out is None else ops.add(out, term)
    return ops.relu(out) if combine == "relu" else out


def decode_liif(inputs: Tensor, mlp: MLP) -> Tensor:
    """Single shared MLP: [N, 9D + 4] -> [N, 3], no output nonlinearity."""
    if inputs.ndim != 2 or inputs.shape[1] != mlp.in_features:
        raise ContractError(f"decoder expects inputs of width {mlp.in_features}, got shape {inputs.shape}")
    return mlp(inputs)


def decode_aliif(inputs: Tensor, weights: MixtureWeights, bank: BasisMlpBank, combine: str = "linear") -> Tensor:
    """Weighted combination of the K basis MLPs; combine="relu" applies an outer ReLU."""
    if weights.k != len(bank):
        raise ContractError(f"mixture has K={weights.k} weights but the bank holds {len(bank)} networks")
    if weights.omega.shape[0] != inputs.shape[0]:
        raise ContractError(f"{weights.omega.shape[0]} weight rows for {inputs.shape[0]} decoder rows")
    return mix_outputs([decode_liif(inputs, net) for net in bank.nets], weights, combine)


# ---------------------------------------------------------------------------
# Feature projections
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class FirstLayerSplit:
    """
    First layer of an MLP whose input rows start with an unfolded feature z.

    z @ W_z depends on the feature cell only, so it is computed once per cell
    and gathered per query; the trailing columns (xi, cell) go through
    ``trailing`` per query.
    """

    features: Tensor
    trailing: Tensor
    bias: Tensor

    def __call__(self, flat: np.ndarray, rest: Tensor) -> Tensor:
        """Pre-activation rows for feature cells ``flat`` and trailing inputs ``rest``."""
        return ops.add_bias(ops.add(ops.gather_rows(self.features, flat), ops.matmul(rest, self.trailing)), self.bias)


def split_first_layer(unfolded: Tensor, mlp: MLP) -> FirstLayerSplit:
    first = mlp.layers[0]
    width = unfolded.shape[1]
    if width >= first.in_features:
        raise ContractError(f"feature width {width} leaves no trailing inputs for an MLP of width {first.in_features}")
    w_features = ops.gather_rows(first.weight, np.arange(width))
    w_trailing = ops.gather_rows(first.weight, np.arange(width, first.in_features))
    return FirstLayerSplit(features=ops.matmul(unfolded, w_features), trailing=w_trailing, bias=first.bias)


@dataclass(frozen=True, eq=False)
class ProjectedFeatures:
    """Feature-map dependent part of every decoder first layer."""

    height: int
    width: int
    basis: list[FirstLayerSplit]
    expansion: FirstLayerSplit | None


# ---------------------------------------------------------------------------
# Decoder with local ensemble
# ---------------------------------------------------------------------------
class ImplicitDecoder:
    """Either the LIIF decoder (one MLP) or the A-LIIF decoder (expansion net + basis bank)."""

    def __init__(
        self,
        mode: str,
        mlp: MLP | None = None,
        expansion: MLP | None = None,
        bank: BasisMlpBank | None = None,
        combine: str = "linear",
        share_expansion: bool = False,
    ) -> None:
        if mode not in MODES:
            raise ContractError(f"unknown decoder mode {mode!r}, expected one of {MODES}")
        if mode == "liif" and mlp is None:
            raise ContractError("liif decoder needs an MLP")
        if mode == "aliif" and (expansion is None or bank is None):
            raise ContractError("aliif decoder needs an expansion network and a basis bank")
        if mode == "aliif" and expansion.out_features != len(bank):
            raise ContractError(f"expansion network outputs {expansion.out_features} scores for K={len(bank)}")
        if combine not in COMBINE_MODES:
            raise ContractError(f"unknown combine mode {combine!r}")
        self.mode = mode
        self.mlp = mlp
        self.expansion = expansion
        self.bank = bank
        self.combine = combine
        self.share_expansion = share_expansion

    @property
    def in_features(self) -> int:
        return self.mlp.in_features if self.mode == "liif" else self.bank.in_features

    @property
    def basis_nets(self) -> list[MLP]:
        return [self.mlp] if self.mode == "liif" else self.bank.nets

    def named_parameters(self) -> NamedParameters:
        if self.mode == "liif":
            return self.mlp.named_parameters()
        return self.expansion.named_parameters() + self.bank.named_parameters()

    def project(self, fm: FeatureMap) -> ProjectedFeatures:
        """Unfold the feature map and apply every first-layer feature block once."""
        unfolded = unfold_rows(fm)
        if unfolded.shape[1] + 4 != self.in_features:
            raise ContractError(
                f"feature width {unfolded.shape[1]} + 4 does not match decoder width {self.in_features}"
            )
        expansion = None
        if self.mode == "aliif":
            if unfolded.shape[1] + 2 != self.expansion.in_features:
                raise ContractError(
                    f"expansion network expects width {self.expansion.in_features}, got {unfolded.shape[1]} + 2"
                )
            expansion = split_first_layer(unfolded, self.expansion)
        return ProjectedFeatures(
            height=fm.height,
            width=fm.width,
            basis=[split_first_layer(unfolded, net) for net in self.basis_nets],
            expansion=expansion,
        )

    def _mixture(self, projected: ProjectedFeatures, flat: np.ndarray, xi: np.ndarray) -> MixtureWeights:
        rest = Tensor(xi, dtype=projected.expansion.features.dtype)
        scores = self.expansion.from_first_layer(projected.expansion(flat, rest))
        return _checked(MixtureWeights(ops.softmax(scores)))

    def _decode(
        self,
        projected: ProjectedFeatures,
        flat: np.ndarray,
        xi: np.ndarray,
        rel_cell: np.ndarray,
        shared: MixtureWeights | None,
    ) -> Tensor:
        rest = Tensor(np.concatenate([xi, rel_cell], axis=1), dtype=projected.basis[0].features.dtype)
        outputs = [
            net.from_first_layer(split(flat, rest)) for net, split in zip(self.basis_nets, projected.basis, strict=True)
        ]
        if self.mode == "liif":
            return outputs[0]
        weights = shared if shared is not None else self._mixture(projected, flat, xi)
        return mix_outputs(outputs, weights, self.combine)

    def mixture_weights(self, fm: FeatureMap, coords: np.ndarray) -> np.ndarray:
        """omega at the nearest feature of each coordinate (diagnostics)."""
        if self.mode != "aliif":
            raise ContractError("mixture weights exist only in aliif mode")
        flat, _, xi = nearest_feature(coords, fm.height, fm.width)
        z = ops.gather_rows(unfold_rows(fm), flat)
        return expansion_weights(z, xi, self.expansion).omega.data.copy()

    def query(self, fm: FeatureMap, coords: np.ndarray, cells: np.ndarray) -> Tensor:
        """
        Unclamped RGB [N, 3] at continuous coordinates (differentiable).

        Args:
            fm: encoder feature map [D, h, w]
            coords: [N, 2] query coordinates in [-1, 1]
            cells: [N, 2] query pixel sizes in normalised units
        """
        return self.query_projected(self.project(fm), coords, cells)

    def query_projected(self, projected: ProjectedFeatures, coords: np.ndarray, cells: np.ndarray) -> Tensor:
        """query() against features already passed through project()."""
        coords = np.clip(np.asarray(coords, dtype=np.float64), -1.0, 1.0)
        h, w = projected.height, projected.width
        spacing = np.array([2.0 / h, 2.0 / w])
        rel_cell = np.asarray(cells, dtype=np.float64) / spacing

        shared: MixtureWeights | None = None
        if self.mode == "aliif" and self.share_expansion:
            flat, _, xi = nearest_feature(coords, h, w)
            shared = self._mixture(projected, flat, xi)

        out: Tensor | None = None
        for flat, xi, blend in ensemble_neighbours(coords, h, w):
            pred = self._decode(projected, flat, xi, rel_cell, shared)
            term = ops.scale_rows(pred, Tensor(blend, dtype=pred.dtype))
            out = term if out is None else ops.add(out, term)
        return out


def render(
    fm: FeatureMap,
    queries: QueryGrid,
    decoder: ImplicitDecoder,
    batch_size: int | None = None,
    workers: int | None = None,
) -> Image:
    """
    Evaluate every query of a full grid and clamp to [0, 1].

    The feature map is projected once; queries are then decoded in independent
    chunks of batch_size (default config.QUERY_BATCH_SIZE) on up to ``workers``
    threads (default config.RENDER_WORKERS). Each chunk writes a disjoint slice
    of the output, so the image does not depend on either setting.
    """
    batch_size = config.QUERY_BATCH_SIZE if batch_size is None else batch_size
    workers = config.RENDER_WORKERS if workers is None else workers
    if batch_size < 1:
        raise ContractError(f"query batch size must be >= 1, got {batch_size}")
    if workers < 1:
        raise ContractError(f"render workers must be >= 1, got {workers}")

    projected = decoder.project(fm)
    rgb = np.empty((len(queries), 3), dtype=np.float32)
    chunks = queries.split(batch_size)

    def decode_chunk(start: int, stop: int) -> None:
        pred = decoder.query_projected(projected, queries.coords[start:stop], queries.cells[start:stop])
        rgb[start:stop] = pred.data

    if workers == 1 or len(chunks) == 1:
        for start, stop in chunks:
            decode_chunk(start, stop)
    else:
        # Each task runs in a copy of the caller's context (default dtype, no tape).
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as executor:
            futures = [
                executor.submit(contextvars.copy_context().run, decode_chunk, start, stop) for start, stop in chunks
            ]
            for future in futures:
                future.result()
    logger.debug("Rendered %sx%s image in %d chunks", queries.height, queries.width, len(chunks))
    return Image.from_array(rgb.reshape(queries.height, queries.width, 3))

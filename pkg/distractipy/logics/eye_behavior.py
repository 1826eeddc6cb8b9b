import logging
from collections.abc import Sequence

import numpy as np
from scipy import ndimage, signal

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import EyeConfig, SvmConfig
from distractipy.learners.smo_svm import SmoSvmTrainer
from distractipy.models.dtos.eye_dtos import FilterBankParamsDTO, GazeFeaturesDTO, IrisEstimateDTO
from distractipy.models.dtos.learner_dtos import RbfSvmModelDTO
from distractipy.models.dtos.session_dtos import FaceChannelRecordDTO
from distractipy.models.errors import DimensionMismatchError, InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_FILTER_BANK = FilterBankParamsDTO()


def _normalize(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant map becomes all zeros."""
    low = values.min()
    span = values.max() - low
    if span <= 0:
        return np.zeros_like(values, dtype=np.float64)
    return (values - low) / span


def hough_response(patch: np.ndarray, params: FilterBankParamsDTO = DEFAULT_FILTER_BANK) -> np.ndarray:
    """Circular Hough accumulator for circles of the configured radii.

    Edge pixels are those whose Sobel gradient magnitude exceeds the configured
    percentile; each votes, weighted by its magnitude, at both points one radius away
    along its gradient direction. The response is the maximum over radii, smoothed 3x3.

    Args:
        patch: (P, P) grayscale patch.
        params: Filter bank constants.

    Returns:
        np.ndarray: (P, P) response.
    """
    patch = np.asarray(patch, dtype=np.float64)
    gx = ndimage.sobel(patch, axis=1)
    gy = ndimage.sobel(patch, axis=0)
    magnitude = np.hypot(gx, gy)
    if magnitude.max() <= 0:
        return np.zeros_like(patch)
    edges = magnitude > np.percentile(magnitude, params.hough_edge_percentile)
    ys, xs = np.nonzero(edges)
    weights = magnitude[ys, xs]
    ux = gx[ys, xs] / weights
    uy = gy[ys, xs] / weights

    height, width = patch.shape
    low, high = params.hough_radii
    response = np.zeros_like(patch)
    for radius in range(low, high + 1):
        accumulator = np.zeros_like(patch)
        for sign in (1.0, -1.0):
            cx = np.rint(xs + sign * radius * ux).astype(np.int64)
            cy = np.rint(ys + sign * radius * uy).astype(np.int64)
            inside = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
            np.add.at(accumulator, (cy[inside], cx[inside]), weights[inside])
        np.maximum(response, accumulator, out=response)
    return ndimage.uniform_filter(response, size=3, mode="constant")


def gabor_kernel(params: FilterBankParamsDTO = DEFAULT_FILTER_BANK) -> np.ndarray:
    """Circular Gabor kernel: a Gaussian envelope times a radial complex sinusoid.

    Args:
        params: Filter bank constants.

    Returns:
        np.ndarray: Complex (S, S) kernel centered on the middle sample.
    """
    half = params.gabor_support // 2
    ys, xs = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    radius = np.hypot(xs, ys)
    sigma = params.gabor_sigma
    envelope = np.exp(-(radius**2) / (2.0 * sigma**2)) / np.sqrt(2.0 * np.pi * sigma**2)
    return envelope * np.exp(2j * np.pi * params.gabor_frequency * radius)


def gabor_response(patch: np.ndarray, params: FilterBankParamsDTO = DEFAULT_FILTER_BANK) -> np.ndarray:
    """Magnitude of the circular Gabor filter response, zero-padded at the border.

    Args:
        patch: (P, P) grayscale patch.
        params: Filter bank constants.

    Returns:
        np.ndarray: (P, P) response.
    """
    patch = np.asarray(patch, dtype=np.float64)
    return np.abs(signal.fftconvolve(patch, gabor_kernel(params), mode="same"))


def separability_masks(
    params: FilterBankParamsDTO = DEFAULT_FILTER_BANK,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center disk, left half-annulus and right half-annulus masks.

    Args:
        params: Filter bank constants.

    Returns:
        Three boolean (2 r23 + 1)-square masks.
    """
    outer = params.mask_r23
    ys, xs = np.mgrid[-outer : outer + 1, -outer : outer + 1]
    squared = xs * xs + ys * ys
    disk = squared <= params.mask_r1**2
    ring = (squared > params.mask_r1**2) & (squared <= outer**2)
    return disk, ring & (xs < 0), ring & (xs > 0)


def separability_from_means(
    c1: np.ndarray | float,
    c2: np.ndarray | float,
    c3: np.ndarray | float,
    epsilon: float = 1e-6,
) -> np.ndarray:
    """Contrast of the surrounding half-annuli against the center disk.

    ``S = (C2 - C1) / C1 + (C3 - C1) / C1``, and 0 where ``C1 < epsilon``.

    Args:
        c1: Center disk mean.
        c2: Left half-annulus mean.
        c3: Right half-annulus mean.
        epsilon: Smallest usable center mean.

    Returns:
        np.ndarray: The separability value(s).
    """
    c1 = np.asarray(c1, dtype=np.float64)
    usable = c1 >= epsilon
    safe = np.where(usable, c1, 1.0)
    return np.where(usable, (np.asarray(c2) - c1) / safe + (np.asarray(c3) - c1) / safe, 0.0)


def separability_response(patch: np.ndarray, params: FilterBankParamsDTO = DEFAULT_FILTER_BANK) -> np.ndarray:
    """Separability measure at every pixel; masks are clipped at the patch border.

    Args:
        patch: (P, P) grayscale patch.
        params: Filter bank constants.

    Returns:
        np.ndarray: (P, P) response.
    """
    patch = np.asarray(patch, dtype=np.float64)
    ones = np.ones_like(patch)
    means = []
    for mask in separability_masks(params):
        weights = mask.astype(np.float64)
        total = ndimage.correlate(patch, weights, mode="constant", cval=0.0)
        count = ndimage.correlate(ones, weights, mode="constant", cval=0.0)
        means.append(total / np.maximum(count, 1.0))
    return separability_from_means(*means, epsilon=params.separability_epsilon)


def locate_iris(patch: np.ndarray, params: FilterBankParamsDTO = DEFAULT_FILTER_BANK) -> IrisEstimateDTO:
    """Estimate the iris center from the three normalized filter responses.

    The patch is min-max normalized first, so the estimate does not change under a
    positive affine change of intensities.

    Args:
        patch: (P, P) grayscale patch in [0, 1].
        params: Filter bank constants.

    Returns:
        IrisEstimateDTO: Argmax of the summed responses (first in row-major order on ties).
    """
    normalized = _normalize(np.asarray(patch, dtype=np.float64))
    responses = [
        _normalize(hough_response(normalized, params)),
        _normalize(gabor_response(normalized, params)),
        _normalize(separability_response(normalized, params)),
    ]
    combined = responses[0] + responses[1] + responses[2]

    def peak(response: np.ndarray) -> tuple[int, int]:
        row, column = np.unravel_index(int(np.argmax(response)), response.shape)
        return int(column), int(row)

    return IrisEstimateDTO(
        center=peak(combined),
        combined_score=float(combined.max()),
        per_filter_peaks=(peak(responses[0]), peak(responses[1]), peak(responses[2])),
    )


def temporal_consistency(
    history: Sequence[IrisEstimateDTO],
    current: IrisEstimateDTO,
    max_distance: float = 15.0,
) -> IrisEstimateDTO:
    """Reject center jumps relative to the last valid center.

    A jump falls back to the nearest per-filter peak within reach; if none is close
    enough the estimate is kept but marked invalid.

    Args:
        history: Earlier estimates of the same eye, oldest first.
        current: The new estimate.
        max_distance: Largest accepted move in pixels.

    Returns:
        IrisEstimateDTO: The checked estimate.
    """
    previous = next((estimate for estimate in reversed(history) if estimate.valid), None)
    if previous is None:
        return current
    anchor = np.asarray(previous.center, dtype=np.float64)
    if np.linalg.norm(np.asarray(current.center) - anchor) <= max_distance:
        return current.with_center(current.center)
    distances = [float(np.linalg.norm(np.asarray(peak) - anchor)) for peak in current.per_filter_peaks]
    nearest = int(np.argmin(distances))
    if distances[nearest] <= max_distance:
        return current.with_center(current.per_filter_peaks[nearest])
    return current.with_center(current.center, valid=False)


class IrisTracker:
    """Iris localization with temporal consistency for one eye of one session."""

    def __init__(self, params: FilterBankParamsDTO = DEFAULT_FILTER_BANK, eye_config: EyeConfig | None = None) -> None:
        """Initialize the tracker.

        Args:
            params: Filter bank constants.
            eye_config: Optional config section. If not provided, uses the global config.
        """
        self.params = params
        self.configs: EyeConfig = eye_config or BaseConfig.global_config().EYE
        self.history: list[IrisEstimateDTO] = []

    def update(self, patch: np.ndarray) -> IrisEstimateDTO:
        """Locate the iris in the next patch of this eye.

        Args:
            patch: (P, P) grayscale patch.

        Returns:
            IrisEstimateDTO: The checked estimate.
        """
        located = locate_iris(patch, self.params)
        estimate = temporal_consistency(self.history, located, self.configs.CONSISTENCY_DISTANCE)
        self.history.append(estimate)
        return estimate


def patch_to_color(
    center: tuple[float, float],
    outer: np.ndarray,
    inner: np.ndarray,
    patch_size: int,
) -> np.ndarray:
    """Map a patch position to color-frame pixels.

    The patch is an axis-aligned square as wide as the corner distance, centered
    between the two corners.

    Args:
        center: (x, y) in patch pixels.
        outer: Outer eye corner.
        inner: Inner eye corner.
        patch_size: Side of the patch.

    Returns:
        np.ndarray: (x, y) in color-frame pixels.
    """
    width = float(np.linalg.norm(outer - inner))
    middle = (outer + inner) / 2.0
    return middle + (np.asarray(center, dtype=np.float64) - (patch_size - 1) / 2.0) * width / patch_size


def gaze_features(
    left_iris: np.ndarray,
    right_iris: np.ndarray,
    record: FaceChannelRecordDTO,
    clamp: float = 2.0,
) -> GazeFeaturesDTO:
    """Iris position relative to the eye corners.

    Per eye: ``(iris - outer) / |outer - inner|``, clamped to ``[-clamp, clamp]``.

    Args:
        left_iris: Left iris (x, y) in color-frame pixels.
        right_iris: Right iris (x, y) in color-frame pixels.
        record: Tracked face record providing the corners.
        clamp: Bound of every component.

    Returns:
        GazeFeaturesDTO: Valid gaze features.

    Raises:
        InvalidArgumentError: If the record is untracked or an eye's corners coincide.
    """
    if not record.tracked:
        raise InvalidArgumentError(argument_name="record", additional_data={"reason": "untracked"})
    values = []
    for side, iris in (("L", left_iris), ("R", right_iris)):
        outer, inner = record.corners(side)
        width = float(np.linalg.norm(outer - inner))
        if width < 1e-9:
            raise InvalidArgumentError(argument_name="eye_corners", additional_data={"side": side})
        values.extend(np.clip((np.asarray(iris, dtype=np.float64) - outer) / width, -clamp, clamp))
    x_l, y_l, x_r, y_r = (float(value) for value in values)
    return GazeFeaturesDTO(x_l=x_l, y_l=y_l, x_r=x_r, y_r=y_r, valid=True)


def iris_template(patch: np.ndarray, center: tuple[int, int], size: int = 24) -> np.ndarray:
    """Standardized crop around the iris center, clamped at the patch border.

    Args:
        patch: (P, P) grayscale patch.
        center: (x, y) crop center.
        size: Side of the template.

    Returns:
        np.ndarray: (size, size) zero-mean, unit-variance template; zeros for a constant crop.
    """
    patch = np.asarray(patch, dtype=np.float64)
    x, y = center
    offsets = np.arange(size) - size // 2
    rows = np.clip(y + offsets, 0, patch.shape[0] - 1)
    columns = np.clip(x + offsets, 0, patch.shape[1] - 1)
    crop = patch[np.ix_(rows, columns)]
    spread = crop.std()
    if spread < 1e-12:
        return np.zeros((size, size))
    return (crop - crop.mean()) / spread


def train_closure_svm(
    templates: np.ndarray,
    labels: np.ndarray,
    svm_config: SvmConfig | None = None,
) -> RbfSvmModelDTO:
    """Train the eye closure SVM on iris templates.

    Args:
        templates: (N, S, S) templates.
        labels: (N,) +1 for an open eye, -1 for a closed eye.
        svm_config: Optional config section. If not provided, uses the global config.

    Returns:
        RbfSvmModelDTO: The trained SVM.
    """
    templates = np.asarray(templates, dtype=np.float64)
    if templates.ndim != 3:
        raise DimensionMismatchError(expected=(-1, 24, 24), actual=templates.shape)
    logger.debug("Training closure SVM on %d templates", templates.shape[0])
    return SmoSvmTrainer(svm_config).fit(templates.reshape(templates.shape[0], -1), labels)


def eye_closure_scores(templates: np.ndarray, model: RbfSvmModelDTO) -> np.ndarray:
    """SVM scores of many templates; positive means an open eye.

    Args:
        templates: (N, S, S) templates.
        model: Trained closure SVM.

    Returns:
        np.ndarray: (N,) scores.
    """
    templates = np.asarray(templates, dtype=np.float64)
    return model.decision_function(templates.reshape(templates.shape[0], -1))


def eye_closure_score(template: np.ndarray, model: RbfSvmModelDTO) -> float:
    """SVM score of one template.

    Args:
        template: (S, S) template.
        model: Trained closure SVM.

    Returns:
        float: Raw decision value.
    """
    return float(eye_closure_scores(np.asarray(template)[None], model)[0])

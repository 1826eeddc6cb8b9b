import logging

import cv2
import numpy as np
from scipy import ndimage

from distractipy.configs.base_config import BaseConfig
from distractipy.configs.config_template import AdaBoostConfig, ArmConfig
from distractipy.learners.real_adaboost import OneVsAllTrainer, RealAdaBoostTrainer
from distractipy.models.dtos.arm_dtos import (
    ARM_FEATURE_COUNT,
    ArmFeatureVectorDTO,
    ArmScoresDTO,
    ContourChainDTO,
    ForegroundMask,
)
from distractipy.models.dtos.learner_dtos import OneVsAllModelDTO
from distractipy.models.errors import BaseError, DimensionMismatchError, EmptyInputError, OutOfRangeError
from distractipy.models.types.distraction_types import ArmPoseType

logger = logging.getLogger(__name__)

EIGEN_TIE_TOLERANCE = 1e-12
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def remove_background(frame: np.ndarray, background: np.ndarray, threshold_mm: float = 80.0) -> ForegroundMask:
    """Segment the driver as the pixels clearly nearer than the empty-seat scan.

    Args:
        frame: (H, W) depth frame in millimeters, 0 meaning no reading.
        background: (H, W) driver-absent depth scan.
        threshold_mm: Minimum depth difference of a foreground pixel.

    Returns:
        ForegroundMask: The largest 8-connected foreground component.

    Raises:
        DimensionMismatchError: If the two rasters differ in shape.
    """
    if frame.shape != background.shape:
        raise DimensionMismatchError(expected=background.shape, actual=frame.shape)
    depth = frame.astype(np.int64)
    seat = background.astype(np.int64)
    foreground = (depth > 0) & (seat > 0) & (seat - depth > threshold_mm)
    return largest_component(foreground)


def largest_component(mask: np.ndarray) -> ForegroundMask:
    """Keep the largest 8-connected component; the first in raster order wins ties.

    Args:
        mask: Boolean image.

    Returns:
        ForegroundMask: A mask with at most one component.
    """
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return np.zeros(mask.shape, dtype=bool)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


def marching_squares(mask: ForegroundMask) -> list[tuple[int, int]]:
    """Ordered outer boundary pixels of the foreground component.

    The outer border of the component holding the topmost, then leftmost pixel is
    followed with OpenCV's 8-connected border tracing. Repeated pixels (one pixel wide
    necks) split the border into loops and only the longest loop is kept. The chain runs
    counter-clockwise in image coordinates and starts at its topmost, then leftmost pixel.

    Args:
        mask: Boolean image with at least one foreground pixel.

    Returns:
        List of (x, y) pixels; consecutive pixels (and last to first) are 8-neighbors.

    Raises:
        EmptyInputError: If the mask is empty.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyInputError("mask")
    first_y, first_x = (int(value) for value in np.argwhere(mask)[0])
    padded = np.ascontiguousarray(np.pad(mask, 1), dtype=np.uint8)
    contours, _ = cv2.findContours(padded, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE, offset=(-1, -1))
    border = next(
        contour[:, 0, :]
        for contour in contours
        if np.any((contour[:, 0, 0] == first_x) & (contour[:, 0, 1] == first_y))
    )

    chain = _keep_longest_loop(_collapse_repeats([(int(x), int(y)) for x, y in border]))
    if _shoelace(chain) > 0:
        chain.reverse()
    top = min(range(len(chain)), key=lambda index: (chain[index][1], chain[index][0]))
    return chain[top:] + chain[:top]


def _shoelace(chain: list[tuple[int, int]]) -> float:
    """Twice the signed area of a closed chain; negative for counter-clockwise chains with y pointing down."""
    xy = np.asarray(chain, dtype=np.float64)
    return float(np.sum(xy[:, 0] * np.roll(xy[:, 1], -1) - np.roll(xy[:, 0], -1) * xy[:, 1]))


def _collapse_repeats(pixels: list[tuple[int, int]]) -> list[tuple[int, int]]:
    chain = [pixel for index, pixel in enumerate(pixels) if index == 0 or pixel != pixels[index - 1]]
    while len(chain) > 1 and chain[-1] == chain[0]:
        chain.pop()
    return chain


def _keep_longest_loop(chain: list[tuple[int, int]]) -> list[tuple[int, int]]:
    while True:
        seen: dict[tuple[int, int], int] = {}
        repeat = None
        for index, pixel in enumerate(chain):
            if pixel in seen:
                repeat = (seen[pixel], index)
                break
            seen[pixel] = index
        if repeat is None:
            return chain
        first, second = repeat
        inner = chain[first:second]
        outer = chain[second:] + chain[:first]
        chain = inner if len(inner) > len(outer) else outer


def back_project(pixels: np.ndarray, depth: np.ndarray, shape: tuple[int, int], focal_length: float) -> np.ndarray:
    """Pinhole back-projection of image pixels to camera-space millimeters.

    Args:
        pixels: (N, 2) integer (x, y) pixels.
        depth: (N,) depths in millimeters.
        shape: (H, W) of the image.
        focal_length: Focal length in pixels.

    Returns:
        np.ndarray: (N, 3) points (X, Y, Z).
    """
    height, width = shape
    z = np.asarray(depth, dtype=np.float64)
    x = (pixels[:, 0] - width / 2.0) * z / focal_length
    y = (pixels[:, 1] - height / 2.0) * z / focal_length
    return np.column_stack([x, y, z])


def frontal_chain(frame: np.ndarray, mask: ForegroundMask, focal_length: float) -> ContourChainDTO:
    """Trace the frontal contour and attach the 3D point of every contour pixel.

    Args:
        frame: (H, W) depth frame.
        mask: Driver foreground.
        focal_length: Focal length in pixels.

    Returns:
        ContourChainDTO: The closed contour.
    """
    pixels = np.asarray(marching_squares(mask), dtype=np.int64)
    ys, xs = np.nonzero(mask)
    points = back_project(pixels, frame[pixels[:, 1], pixels[:, 0]], mask.shape, focal_length)
    return ContourChainDTO(pixels=pixels, points3d=points, centroid=(float(xs.mean()), float(ys.mean())))


def _longest_cyclic_run(flags: np.ndarray) -> np.ndarray:
    """Positions of the longest run of True in a cyclic sequence, in sequence order."""
    count = flags.shape[0]
    if count == 0 or not flags.any():
        return np.zeros(0, dtype=np.int64)
    if flags.all():
        return np.arange(count)
    shift = int(np.argmin(flags)) + 1
    rolled = np.roll(flags, -shift)
    padded = np.concatenate([[False], rolled, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    longest = int(np.argmax(ends - starts))
    return (np.arange(starts[longest], ends[longest]) + shift) % count


def right_side_filter(chain: ContourChainDTO) -> ContourChainDTO:
    """Keep the longest contiguous part of the chain at or right of the centroid column.

    Args:
        chain: A closed frontal chain.

    Returns:
        ContourChainDTO: The sub-chain, possibly empty.
    """
    return chain.subchain(_longest_cyclic_run(chain.pixels[:, 0] >= chain.centroid[0]))


def front_rim_filter(chain: ContourChainDTO) -> ContourChainDTO:
    """Keep the longest contiguous part of a profile chain nearer than its centroid.

    Args:
        chain: A closed profile chain whose x coordinate is the depth bin.

    Returns:
        ContourChainDTO: The sub-chain, possibly empty.
    """
    return chain.subchain(_longest_cyclic_run(chain.pixels[:, 0] < chain.centroid[0]))


def principal_axis(points: np.ndarray) -> np.ndarray:
    """Unit direction of largest variance of a point cloud.

    The sign is chosen so the largest-magnitude component is positive; among equal top
    eigenvalues the lexicographically largest normalized eigenvector wins. A cloud with
    zero covariance gives the zero vector.

    Args:
        points: (N, 3) points.

    Returns:
        np.ndarray: (3,) axis.
    """
    points = np.asarray(points, dtype=np.float64)
    centered = points - points.mean(axis=0)
    covariance = centered.T @ centered / points.shape[0]
    scale = float(np.abs(covariance).max())
    if scale == 0.0:
        return np.zeros(3)
    values, vectors = np.linalg.eigh(covariance)
    top = values[-1]
    candidates = [
        _sign_normalize(vectors[:, index])
        for index in range(3)
        if values[index] >= top - EIGEN_TIE_TOLERANCE * max(1.0, abs(top))
    ]
    return max(candidates, key=lambda vector: tuple(vector.tolist()))


def _sign_normalize(vector: np.ndarray) -> np.ndarray:
    vector = vector / np.linalg.norm(vector)
    return -vector if vector[int(np.argmax(np.abs(vector)))] < 0 else vector


def segment_axes(chain: ContourChainDTO, n_segments: int = 20) -> np.ndarray:
    """Principal axis of each of ``n_segments`` consecutive equal runs of the chain.

    Args:
        chain: Contour chain with 3D points.
        n_segments: Number of runs; the remainder goes to the first runs.

    Returns:
        np.ndarray: (n_segments, 3) axes.

    Raises:
        OutOfRangeError: If the chain is shorter than ``n_segments``.
    """
    if len(chain) < n_segments:
        raise OutOfRangeError(
            field_name="chain_length",
            additional_data={"required": n_segments, "available": len(chain)},
        )
    return np.stack([principal_axis(run) for run in np.array_split(chain.points3d, n_segments)])


def profile_projection(
    frame: np.ndarray,
    mask: ForegroundMask,
    bin_mm: float = 5.0,
    closing_size: int = 3,
) -> ForegroundMask:
    """Side view of the driver: image row against quantized depth.

    Args:
        frame: (H, W) depth frame.
        mask: Nonempty driver foreground.
        bin_mm: Depth bin width.
        closing_size: Side of the square closing element.

    Returns:
        ForegroundMask: (H, bins) image, column 0 being the nearest depth bin.

    Raises:
        EmptyInputError: If the mask is empty.
    """
    if not mask.any():
        raise EmptyInputError("mask")
    ys, xs = np.nonzero(mask)
    depth = frame[ys, xs].astype(np.float64)
    bins = np.floor((depth - depth.min()) / bin_mm).astype(np.int64)
    image = np.zeros((mask.shape[0], int(bins.max()) + 1), dtype=bool)
    image[ys, bins] = True
    pad = closing_size
    closed = ndimage.binary_closing(
        np.pad(image, pad),
        structure=np.ones((closing_size, closing_size), dtype=bool),
    )[pad:-pad, pad:-pad]
    return largest_component(closed)


def profile_chain(
    frame: np.ndarray,
    mask: ForegroundMask,
    focal_length: float,
    bin_mm: float = 5.0,
    closing_size: int = 3,
) -> ContourChainDTO:
    """Trace the profile contour and attach 3D points to its (row, depth bin) pixels.

    Depth comes from the bin center. X is the mean X of the driver pixels that fell in
    the cell, else of the row, else 0.

    Args:
        frame: (H, W) depth frame.
        mask: Driver foreground.
        focal_length: Focal length in pixels.
        bin_mm: Depth bin width.
        closing_size: Side of the closing element.

    Returns:
        ContourChainDTO: The closed profile chain; pixel x is the depth bin.
    """
    image = profile_projection(frame, mask, bin_mm, closing_size)
    pixels = np.asarray(marching_squares(image), dtype=np.int64)

    ys, xs = np.nonzero(mask)
    depth = frame[ys, xs].astype(np.float64)
    nearest = depth.min()
    bins = np.floor((depth - nearest) / bin_mm).astype(np.int64)
    source = back_project(np.column_stack([xs, ys]), depth, mask.shape, focal_length)

    height, columns = image.shape
    cell = ys * columns + bins
    cell_sum = np.bincount(cell, weights=source[:, 0], minlength=height * columns)
    cell_count = np.bincount(cell, minlength=height * columns)
    row_sum = np.bincount(ys, weights=source[:, 0], minlength=height)
    row_count = np.bincount(ys, minlength=height)

    chain_cells = pixels[:, 1] * columns + pixels[:, 0]
    chain_rows = pixels[:, 1]
    x = np.where(
        cell_count[chain_cells] > 0,
        cell_sum[chain_cells] / np.maximum(cell_count[chain_cells], 1),
        np.where(row_count[chain_rows] > 0, row_sum[chain_rows] / np.maximum(row_count[chain_rows], 1), 0.0),
    )
    z = nearest + (pixels[:, 0] + 0.5) * bin_mm
    y = (pixels[:, 1] - mask.shape[0] / 2.0) * z / focal_length

    fy, fx = np.nonzero(image)
    return ContourChainDTO(
        pixels=pixels,
        points3d=np.column_stack([x, y, z]),
        centroid=(float(fx.mean()), float(fy.mean())),
    )


def arm_features(
    frame: np.ndarray,
    background: np.ndarray,
    focal_length: float = 571.0,
    arm_config: ArmConfig | None = None,
) -> ArmFeatureVectorDTO:
    """Compute the 120 arm features of one frame.

    Frontal view: contour, right side of the body, segment axes. Profile view: contour
    of the (row, depth) image, front rim, segment axes. Any failing stage yields the
    zero vector flagged invalid.

    Args:
        frame: (H, W) depth frame.
        background: (H, W) empty-seat scan.
        focal_length: Focal length in pixels.
        arm_config: Optional config section. If not provided, uses the global config.

    Returns:
        ArmFeatureVectorDTO: 20 frontal then 20 profile axes, flattened.
    """
    configs: ArmConfig = arm_config or BaseConfig.global_config().ARM
    try:
        mask = remove_background(frame, background, configs.BACKGROUND_THRESHOLD_MM)
        frontal = right_side_filter(frontal_chain(frame, mask, focal_length))
        profile = front_rim_filter(
            profile_chain(frame, mask, focal_length, configs.PROFILE_BIN_MM, configs.CLOSING_SIZE),
        )
        values = np.concatenate(
            [
                segment_axes(frontal, configs.SEGMENT_COUNT).ravel(),
                segment_axes(profile, configs.SEGMENT_COUNT).ravel(),
            ],
        )
    except BaseError as e:
        logger.debug("Arm features unavailable: %s", e)
        return ArmFeatureVectorDTO(values=np.zeros(2 * 3 * configs.SEGMENT_COUNT), valid=False)
    return ArmFeatureVectorDTO(values=values, valid=True)


def train_arm_classifier(
    features: np.ndarray,
    poses: np.ndarray,
    adaboost_config: AdaBoostConfig | None = None,
) -> OneVsAllModelDTO:
    """Train one Real AdaBoost scorer per arm pose.

    Args:
        features: (N, 120) valid arm feature vectors.
        poses: (N,) ArmPoseType codes.
        adaboost_config: Optional config section. If not provided, uses the global config.

    Returns:
        OneVsAllModelDTO: Models for the poses present.

    Raises:
        SingleClassError: If fewer than two poses are present.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != ARM_FEATURE_COUNT:
        raise DimensionMismatchError(expected=(features.shape[0], ARM_FEATURE_COUNT), actual=features.shape)
    present = {ArmPoseType(int(code)).name for code in np.unique(poses)}
    missing = sorted({pose.name for pose in ArmPoseType} - present)
    if missing:
        logger.warning("Arm training data lacks poses %s", ", ".join(missing))
    trainer = OneVsAllTrainer(RealAdaBoostTrainer(adaboost_config=adaboost_config))
    return trainer.fit(features, np.asarray(poses, dtype=np.int64))


def arm_score_matrix(features: np.ndarray, model: OneVsAllModelDTO) -> np.ndarray:
    """Raw pose scores of many frames in ArmPoseType order.

    A pose without a model scores one below the lowest modelled pose of that frame.

    Args:
        features: (N, 120) arm feature vectors.
        model: Trained arm classifier.

    Returns:
        np.ndarray: (N, 4) scores.
    """
    raw = model.scores(np.atleast_2d(features))
    scores = np.repeat(raw.min(axis=1, keepdims=True) - 1.0, len(ArmPoseType), axis=1)
    scores[:, list(model.class_codes)] = raw
    return scores


def arm_scores(features: ArmFeatureVectorDTO, model: OneVsAllModelDTO) -> ArmScoresDTO:
    """Raw scores of the four pose models for one frame.

    Args:
        features: Arm feature vector, valid or not.
        model: Trained arm classifier.

    Returns:
        ArmScoresDTO: The four scores.
    """
    up, down, right, forward = arm_score_matrix(features.values[None, :], model)[0]
    return ArmScoresDTO(up=up, down=down, right=right, forward=forward)

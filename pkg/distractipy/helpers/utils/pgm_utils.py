import logging
from pathlib import Path

import cv2
import numpy as np

from distractipy.models.errors import InvalidArgumentError, SessionFormatError

logger = logging.getLogger(__name__)


class PgmUtils:
    """Binary PGM ("P5") raster reading and writing through OpenCV.

    16-bit rasters are stored with maxval 65535 and 8-bit rasters with maxval 255;
    OpenCV writes samples big-endian as the format requires.
    """

    SUPPORTED_DTYPES = (np.uint8, np.uint16)

    @classmethod
    def read(cls, path: Path, dtype: type[np.unsignedinteger]) -> np.ndarray:
        """Read a grayscale PGM raster.

        Args:
            path (Path): File to read.
            dtype (type): Expected sample type, ``np.uint8`` or ``np.uint16``.

        Returns:
            np.ndarray: The (H, W) raster.

        Raises:
            SessionFormatError: If the file is missing, unreadable, or has another sample type.
        """
        if not path.is_file():
            raise SessionFormatError(file_name=cls._display_name(path), reason="file missing")
        raster = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if raster is None:
            raise SessionFormatError(file_name=cls._display_name(path), reason="not a readable PGM raster")
        if raster.ndim != 2 or raster.dtype != dtype:
            raise SessionFormatError(
                file_name=cls._display_name(path),
                reason=f"expected a single-channel {np.dtype(dtype).name} raster, got {raster.dtype} {raster.shape}",
            )
        return raster

    @classmethod
    def write(cls, path: Path, raster: np.ndarray) -> None:
        """Write a grayscale raster as binary PGM.

        Args:
            path (Path): Destination file; parent directories are created.
            raster (np.ndarray): (H, W) uint8 or uint16 raster.

        Raises:
            InvalidArgumentError: If the raster is not a 2-D uint8/uint16 array.
            SessionFormatError: If OpenCV fails to write the file.
        """
        if raster.ndim != 2 or raster.dtype not in cls.SUPPORTED_DTYPES:
            raise InvalidArgumentError(
                argument_name="raster",
                additional_data={"dtype": str(raster.dtype), "shape": str(raster.shape)},
            )
        path.parent.mkdir(parents=True, exist_ok=True)
        if not cv2.imwrite(str(path), np.ascontiguousarray(raster)):
            logger.error("OpenCV could not write %s", path)
            raise SessionFormatError(file_name=cls._display_name(path), reason="write failed")

    @staticmethod
    def _display_name(path: Path) -> str:
        return f"{path.parent.name}/{path.name}" if path.parent.name in {"depth", "eyes"} else path.name

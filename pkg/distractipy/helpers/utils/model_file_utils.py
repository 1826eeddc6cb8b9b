import logging
import math
import struct
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from distractipy.models.dtos.base_dtos import BaseDTO
from distractipy.models.dtos.fusion_dtos import FusionHmmBundleDTO
from distractipy.models.dtos.learner_dtos import (
    DecisionTreeDTO,
    GaussianHmmDTO,
    OneVsAllModelDTO,
    RbfSvmModelDTO,
    RealAdaBoostModelDTO,
)
from distractipy.models.dtos.pipeline_dtos import TrainedPipelineDTO
from distractipy.models.errors import InvalidArgumentError, ModelFormatError

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseDTO)

MAGIC = b"DSTRPY"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<II")
_TREE_FIELDS = ("feature", "threshold", "left", "right", "positive_mass", "negative_mass")


class ArrayEntry(BaseModel):
    """Location of one array in the data section."""

    name: str
    dtype: str
    shape: list[int]
    offset: int


class ModelFileHeader(BaseModel):
    """JSON header of a model file."""

    kind: str
    version: int
    attributes: dict[str, Any]
    arrays: list[ArrayEntry]


class _Payload:
    """Named arrays and scalar attributes collected while encoding a model."""

    def __init__(self, attributes: dict[str, Any] | None = None, arrays: dict[str, np.ndarray] | None = None) -> None:
        self.attributes: dict[str, Any] = attributes or {}
        self.arrays: dict[str, np.ndarray] = arrays or {}

    def array(self, name: str) -> np.ndarray:
        return self.arrays[name]


class ModelFileUtils:
    """Reads and writes trained models as single self-describing files.

    Layout: the magic ``DSTRPY``, the format version and the header length as
    little-endian u32, a UTF-8 JSON header, then the raw little-endian array bytes the
    header indexes. Identical models produce identical bytes.
    """

    KINDS: dict[type[BaseDTO], str] = {
        OneVsAllModelDTO: "one_vs_all",
        RbfSvmModelDTO: "rbf_svm",
        GaussianHmmDTO: "gaussian_hmm",
        FusionHmmBundleDTO: "fusion_hmm",
        TrainedPipelineDTO: "pipeline",
    }

    @classmethod
    def save(cls, model: BaseDTO, path: Path) -> None:
        """Write a model file, replacing any existing file.

        Args:
            model (BaseDTO): One of the supported model types.
            path (Path): Destination file.

        Raises:
            InvalidArgumentError: If the model type is not supported.
        """
        kind = cls.KINDS.get(type(model))
        if kind is None:
            raise InvalidArgumentError(argument_name="model", additional_data={"type": type(model).__name__})
        payload = _Payload()
        cls._encode(model, "", payload)

        entries = []
        chunks = []
        offset = 0
        for name in sorted(payload.arrays):
            array = payload.arrays[name]
            dtype = "<f8" if array.dtype.kind == "f" else "<i8"
            data = np.ascontiguousarray(array, dtype=np.dtype(dtype)).tobytes()
            entries.append(ArrayEntry(name=name, dtype=dtype, shape=list(array.shape), offset=offset))
            chunks.append(data)
            offset += len(data)
        header = ModelFileHeader(
            kind=kind,
            version=FORMAT_VERSION,
            attributes=dict(sorted(payload.attributes.items())),
            arrays=entries,
        )
        header_bytes = header.model_dump_json().encode("utf-8")

        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as stream:
            stream.write(MAGIC)
            stream.write(_PREAMBLE.pack(FORMAT_VERSION, len(header_bytes)))
            stream.write(header_bytes)
            for chunk in chunks:
                stream.write(chunk)
        logger.debug("Wrote %s model to %s (%d bytes of arrays)", kind, path, offset)

    @classmethod
    def load(cls, path: Path, expected: type[M]) -> M:
        """Read a model file.

        Args:
            path (Path): File to read.
            expected (type): The model type the caller needs.

        Returns:
            The decoded model.

        Raises:
            ModelFormatError: If the file is missing, corrupt, of another version or of another kind.
        """
        try:
            raw = path.read_bytes()
        except OSError as e:
            logger.exception("Cannot read model file %s", path)
            raise ModelFormatError(path=str(path), reason="unreadable") from e
        preamble_end = len(MAGIC) + _PREAMBLE.size
        if len(raw) < preamble_end or not raw.startswith(MAGIC):
            raise ModelFormatError(path=str(path), reason="bad magic")
        version, header_length = _PREAMBLE.unpack(raw[len(MAGIC) : preamble_end])
        if version != FORMAT_VERSION:
            raise ModelFormatError(path=str(path), reason=f"unsupported version {version}")
        try:
            header = ModelFileHeader.model_validate_json(raw[preamble_end : preamble_end + header_length])
        except ValidationError as e:
            raise ModelFormatError(path=str(path), reason="corrupt header") from e
        expected_kind = cls.KINDS.get(expected)
        if header.kind != expected_kind:
            raise ModelFormatError(path=str(path), reason=f"expected {expected_kind}, found {header.kind}")

        data = memoryview(raw)[preamble_end + header_length :]
        payload = _Payload(attributes=header.attributes)
        try:
            for entry in header.arrays:
                count = math.prod(entry.shape)
                values = np.frombuffer(data, dtype=np.dtype(entry.dtype), count=count, offset=entry.offset)
                payload.arrays[entry.name] = values.reshape(entry.shape).astype(entry.dtype[1:], copy=True)
            model = cls._decode(expected, "", payload)
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(path=str(path), reason=f"corrupt payload: {e}") from e
        return model

    @classmethod
    def _encode(cls, model: BaseDTO, prefix: str, payload: _Payload) -> None:
        match model:
            case RealAdaBoostModelDTO():
                payload.arrays[f"{prefix}tree_sizes"] = np.array([tree.node_count for tree in model.trees])
                for field in _TREE_FIELDS:
                    payload.arrays[f"{prefix}{field}"] = np.concatenate([getattr(tree, field) for tree in model.trees])
                payload.arrays[f"{prefix}smoothing"] = model.smoothing
                payload.arrays[f"{prefix}loss_history"] = model.loss_history
            case OneVsAllModelDTO():
                payload.attributes[f"{prefix}class_codes"] = list(model.class_codes)
                for index, boosted in enumerate(model.models):
                    cls._encode(boosted, f"{prefix}{index}.", payload)
            case RbfSvmModelDTO():
                payload.arrays[f"{prefix}support_vectors"] = model.support_vectors
                payload.arrays[f"{prefix}dual_coefficients"] = model.dual_coefficients
                payload.attributes[f"{prefix}bias"] = model.bias
                payload.attributes[f"{prefix}sigma"] = model.sigma
                payload.attributes[f"{prefix}C"] = model.C
            case GaussianHmmDTO():
                for field in ("start_prob", "transitions", "means", "variances", "log_likelihood_history"):
                    payload.arrays[f"{prefix}{field}"] = getattr(model, field)
            case FusionHmmBundleDTO():
                payload.attributes[f"{prefix}class_codes"] = list(model.class_codes)
                payload.attributes[f"{prefix}use_smoothed"] = model.use_smoothed
                payload.arrays[f"{prefix}feature_mean"] = model.feature_mean
                payload.arrays[f"{prefix}feature_scale"] = model.feature_scale
                for index, hmm in enumerate(model.models):
                    cls._encode(hmm, f"{prefix}{index}.", payload)
            case TrainedPipelineDTO():
                payload.attributes["window_size"] = model.window_size
                payload.attributes["use_deltas"] = model.use_deltas
                payload.attributes["feature_groups"] = list(model.feature_groups)
                cls._encode(model.arm_classifier, "arm.", payload)
                for name, part in (
                    ("closure", model.closure_svm),
                    ("adaboost", model.fusion_adaboost),
                    ("hmm", model.fusion_hmm),
                ):
                    payload.attributes[f"has_{name}"] = part is not None
                    if part is not None:
                        cls._encode(part, f"{name}.", payload)
            case _:
                raise InvalidArgumentError(argument_name="model", additional_data={"type": type(model).__name__})

    @classmethod
    def _decode(cls, model_type: type[M], prefix: str, payload: _Payload) -> M:
        attributes = payload.attributes
        if model_type is RealAdaBoostModelDTO:
            sizes = payload.array(f"{prefix}tree_sizes")
            bounds = np.concatenate([[0], np.cumsum(sizes)])
            columns = {field: payload.array(f"{prefix}{field}") for field in _TREE_FIELDS}
            trees = tuple(
                DecisionTreeDTO(**{field: values[start:end] for field, values in columns.items()})
                for start, end in zip(bounds[:-1], bounds[1:], strict=True)
            )
            decoded: BaseDTO = RealAdaBoostModelDTO(
                trees=trees,
                smoothing=payload.array(f"{prefix}smoothing"),
                loss_history=payload.array(f"{prefix}loss_history"),
            )
        elif model_type is OneVsAllModelDTO:
            codes = tuple(int(code) for code in attributes[f"{prefix}class_codes"])
            decoded = OneVsAllModelDTO(
                class_codes=codes,
                models=tuple(
                    cls._decode(RealAdaBoostModelDTO, f"{prefix}{index}.", payload) for index in range(len(codes))
                ),
            )
        elif model_type is RbfSvmModelDTO:
            decoded = RbfSvmModelDTO(
                support_vectors=payload.array(f"{prefix}support_vectors"),
                dual_coefficients=payload.array(f"{prefix}dual_coefficients"),
                bias=float(attributes[f"{prefix}bias"]),
                sigma=float(attributes[f"{prefix}sigma"]),
                C=float(attributes[f"{prefix}C"]),
            )
        elif model_type is GaussianHmmDTO:
            fields = ("start_prob", "transitions", "means", "variances", "log_likelihood_history")
            decoded = GaussianHmmDTO(**{field: payload.array(f"{prefix}{field}") for field in fields})
        elif model_type is FusionHmmBundleDTO:
            codes = tuple(int(code) for code in attributes[f"{prefix}class_codes"])
            decoded = FusionHmmBundleDTO(
                class_codes=codes,
                models=tuple(cls._decode(GaussianHmmDTO, f"{prefix}{index}.", payload) for index in range(len(codes))),
                feature_mean=payload.array(f"{prefix}feature_mean"),
                feature_scale=payload.array(f"{prefix}feature_scale"),
                use_smoothed=bool(attributes[f"{prefix}use_smoothed"]),
            )
        elif model_type is TrainedPipelineDTO:
            decoded = TrainedPipelineDTO(
                arm_classifier=cls._decode(OneVsAllModelDTO, "arm.", payload),
                closure_svm=cls._decode(RbfSvmModelDTO, "closure.", payload) if attributes["has_closure"] else None,
                fusion_adaboost=(
                    cls._decode(OneVsAllModelDTO, "adaboost.", payload) if attributes["has_adaboost"] else None
                ),
                fusion_hmm=cls._decode(FusionHmmBundleDTO, "hmm.", payload) if attributes["has_hmm"] else None,
                window_size=int(attributes["window_size"]),
                use_deltas=bool(attributes["use_deltas"]),
                feature_groups=tuple(attributes["feature_groups"]),
            )
        else:
            raise TypeError(f"unsupported model type {model_type.__name__}")
        return decoded  # type: ignore[return-value]

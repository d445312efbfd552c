"""
PGM images, CSV matrices and JSON reports
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from models.image import ImageBuffer

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class PgmError(ValueError):
    """Base class for unreadable PGM files"""


class PgmHeaderError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


class PgmSampleError(PgmError):
    pass


def _header_tokens(data: bytes) -> Tuple[List[bytes], int]:
    """Magic, width, height and maxval, plus the offset just past maxval"""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data):
            char = data[pos:pos + 1]
            if char == b"#":
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            elif char.isspace():
                pos += 1
            else:
                break
        if pos >= len(data):
            raise PgmHeaderError(f"Incomplete PGM header ({len(tokens)} of 4 fields)")
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path: PathLike) -> ImageBuffer:
    """Read a P2 or P5 file; samples are rescaled to [0, 255] as v * 255 / maxval"""
    data = Path(path).read_bytes()
    tokens, pos = _header_tokens(data)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise PgmHeaderError(f"Not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(token) for token in tokens[1:])
    except ValueError:
        raise PgmHeaderError(f"Malformed PGM header fields: {tokens[1:]!r}")
    if width < 1 or height < 1:
        raise PgmHeaderError(f"Invalid PGM size {width}x{height}")
    if not 0 < maxval <= 65535:
        raise PgmMaxvalError(f"PGM maxval must be in [1, 65535], got {maxval}")

    count = width * height
    if magic == b"P5":
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        body = data[pos + 1:]
        if pos >= len(data) or len(body) < count * dtype.itemsize:
            raise PgmTruncatedError("unexpected end of data")
        samples = np.frombuffer(body, dtype=dtype, count=count).astype(np.int64)
    else:
        lines = [line.split(b"#", 1)[0] for line in data[pos:].splitlines()]
        fields = b" ".join(lines).split()
        if len(fields) < count:
            raise PgmTruncatedError("unexpected end of data")
        try:
            samples = np.array([int(v) for v in fields[:count]], dtype=np.int64)
        except ValueError:
            raise PgmSampleError("Non-integer sample in P2 data")

    if samples.min() < 0 or samples.max() > maxval:
        raise PgmSampleError(f"Sample outside [0, {maxval}]")
    logger.debug(f"Read {magic.decode()} {width}x{height} maxval={maxval} from {path}")
    return ImageBuffer.from_samples(width, height, samples * 255.0 / maxval)


def write_pgm(img: ImageBuffer, path: PathLike, maxval: int = 255, binary: bool = True) -> None:
    """Write canonical P5 (or P2): rescale by maxval / 255, clamp, round half to even"""
    if not 0 < maxval <= 65535:
        raise PgmMaxvalError(f"PGM maxval must be in [1, 65535], got {maxval}")
    scaled = img.pixels if maxval == 255 else img.pixels * (maxval / 255.0)
    samples = np.rint(np.clip(scaled, 0, maxval)).astype(np.int64)

    magic = "P5" if binary else "P2"
    header = f"{magic}\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    if binary:
        dtype = np.uint8 if maxval < 256 else ">u2"
        body = samples.astype(dtype).tobytes()
    else:
        body = (" ".join(str(v) for v in samples.reshape(-1)) + "\n").encode("ascii")
    Path(path).write_bytes(header + body)
    logger.info(f"Wrote {magic} {img.width}x{img.height} to {path}")


def write_csv_matrix(matrix, path: PathLike, header: Optional[Sequence[str]] = None) -> None:
    """Header row, then one row per matrix row with 17 significant digits"""
    values = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    columns = list(header) if header is not None else [f"c{i}" for i in range(values.shape[1])]
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(values, columns=columns).to_csv(output, index=False, float_format="%.17g", lineterminator="\n")


def expansion_frame(expansion) -> pd.DataFrame:
    """One row per basis term: kind, frequency or degree, fixed weight"""
    if hasattr(expansion, "waves"):
        rows = []
        for w1, w2, weight in expansion.waves:
            kinds = ["cosine"] if (w1 == 0.0 and w2 == 0.0) else ["cosine", "sine"]
            rows.extend({"kind": k, "frequency_x": w1, "frequency_y": w2, "weight": weight} for k in kinds)
        return pd.DataFrame(rows, columns=["kind", "frequency_x", "frequency_y", "weight"])
    return pd.DataFrame(
        {
            "kind": [phi.kind.value for phi in expansion.basis],
            "frequency_or_degree": [phi.parameter for phi in expansion.basis],
            "weight": list(expansion.fixed_weights),
        }
    )


def write_expansion_csv(expansion, path: PathLike) -> None:
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    expansion_frame(expansion).to_csv(output, index=False, float_format="%.17g", lineterminator="\n")


def write_json_report(report: Dict[str, Any], path: PathLike) -> None:
    """Flat JSON object, keys in insertion order"""
    output = Path(path)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as f:
        f.write(json.dumps(report, indent=4))

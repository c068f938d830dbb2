"""
NVTJ container: the binary framing shared by trajectories, visualizers and baselines

    magic "NVTJ" | u32 version | 4-byte section tag | u64 header length | JSON header
    | little-endian float64 arrays, in the order listed by header["arrays"]
"""
import json
import struct
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from errors import FormatError
from models import SectionTag

MAGIC = b"NVTJ"
VERSION = 1
_PREFIX = struct.Struct("<4sI4sQ")


def dumps_header(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def pack_container(tag: SectionTag, header: dict, arrays: List[Tuple[str, np.ndarray]]) -> bytes:
    header = dict(header)
    header["arrays"] = [{"name": name, "shape": list(np.shape(array))} for name, array in arrays]
    body = dumps_header(header)
    chunks = [_PREFIX.pack(MAGIC, VERSION, tag.value, len(body)), body]
    for _, array in arrays:
        chunks.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    return b"".join(chunks)


def unpack_container(data: bytes, tag: SectionTag) -> Tuple[dict, Dict[str, np.ndarray]]:
    if len(data) < _PREFIX.size:
        raise FormatError("truncated prefix", offset=0, expected=_PREFIX.size, actual=len(data))
    magic, version, found_tag, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if found_tag != tag.value:
        raise FormatError(f"section tag {found_tag!r}, expected {tag.value!r}", offset=8)

    start = _PREFIX.size
    if len(data) < start + header_len:
        raise FormatError("truncated header", offset=start, expected=start + header_len, actual=len(data))
    try:
        header = json.loads(data[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header ({exc})", offset=start) from None

    offset = start + header_len
    expected_total = offset + sum(8 * int(np.prod(a["shape"], dtype=np.int64)) for a in header.get("arrays", []))
    if len(data) != expected_total:
        raise FormatError("payload length mismatch", offset=offset, expected=expected_total, actual=len(data))

    arrays = {}
    for entry in header.get("arrays", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        arrays[entry["name"]] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape)
        offset += 8 * count
    return header, arrays


def write_container(path: Union[str, Path], tag: SectionTag, header: dict, arrays: List[Tuple[str, np.ndarray]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(pack_container(tag, header, arrays))
    return path


def read_container(path: Union[str, Path], tag: SectionTag) -> Tuple[dict, Dict[str, np.ndarray]]:
    return unpack_container(Path(path).read_bytes(), tag)

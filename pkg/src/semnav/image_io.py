"""Binary PGM (P5) and PPM (P6) readers and writers.

Output bytes are fully determined by the array contents: single-space
separators, one trailing newline after the maxval, no comments. Golden-file
tests rely on that.
"""

import numpy as np

from .errors import InvalidInput


def write_pgm(path, data: np.ndarray) -> None:
    """Write a 2-D uint8 or uint16 array as binary PGM.

    uint16 samples are stored big-endian per the format.
    """
    data = np.asarray(data)
    if data.ndim != 2:
        raise InvalidInput("PGM data must be 2-D")
    if data.dtype == np.uint8:
        maxval = 255
        payload = data.tobytes()
    elif data.dtype == np.uint16:
        maxval = 65535
        payload = data.astype(">u2").tobytes()
    else:
        raise InvalidInput(f"unsupported PGM dtype {data.dtype}")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5 {w} {h} {maxval}\n".encode("ascii"))
        f.write(payload)


def write_ppm(path, data: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as binary PPM."""
    data = np.asarray(data)
    if data.ndim != 3 or data.shape[2] != 3 or data.dtype != np.uint8:
        raise InvalidInput("PPM data must be (H, W, 3) uint8")
    h, w = data.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6 {w} {h} 255\n".encode("ascii"))
        f.write(data.tobytes())


def _read_header(blob: bytes, magic: bytes):
    # Header tokens may be separated by any whitespace and '#' comments.
    if not blob.startswith(magic):
        raise InvalidInput(f"not a {magic.decode()} file")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InvalidInput("truncated netpbm header")
        tokens.append(int(blob[start:pos]))
    pos += 1  # single whitespace byte after maxval
    return tokens[0], tokens[1], tokens[2], pos


def _payload(blob: bytes, pos: int, dtype, count: int) -> np.ndarray:
    try:
        return np.frombuffer(blob, dtype=dtype, count=count, offset=pos)
    except ValueError:
        raise InvalidInput("netpbm payload shorter than header promises") from None


def read_pgm(path):
    """Read a binary PGM. Returns uint8 or uint16 (native order) array."""
    with open(path, "rb") as f:
        blob = f.read()
    w, h, maxval, pos = _read_header(blob, b"P5")
    if maxval > 255:
        data = _payload(blob, pos, ">u2", w * h).astype(np.uint16)
    else:
        data = _payload(blob, pos, np.uint8, w * h).copy()
    return data.reshape(h, w)


def read_ppm(path):
    """Read a binary PPM into an (H, W, 3) uint8 array."""
    with open(path, "rb") as f:
        blob = f.read()
    w, h, maxval, pos = _read_header(blob, b"P6")
    if maxval != 255:
        raise InvalidInput("only maxval 255 PPM supported")
    data = _payload(blob, pos, np.uint8, w * h * 3).copy()
    return data.reshape(h, w, 3)

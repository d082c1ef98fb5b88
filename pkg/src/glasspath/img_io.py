"""Image file IO: linear EXR, sRGB PNG previews, and depth rasters.

The EXR codec is self-contained (no system OpenEXR in scope): single-part
scanline files, RGB float32 written uncompressed or ZIPS, reads
NONE/ZIPS/ZIP with float32 or half channels. Layout follows the OpenEXR 2.0
file format: magic 20000630, attribute list, chunk offset table, then
per-chunk (y, size, channel-interleaved scanlines in alphabetical channel
order B, G, R).
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np
from PIL import Image

_MAGIC = 20000630
_VERSION = 2
_PT_UINT = 0
_PT_HALF = 1
_PT_FLOAT = 2
_COMP_NONE = 0
_COMP_ZIPS = 1
_COMP_ZIP = 3
_LINES_PER_CHUNK = {_COMP_NONE: 1, _COMP_ZIPS: 1, _COMP_ZIP: 16}


# -- sRGB transfer (IEC 61966-2-1) ----------------------------------------

def srgb_to_linear(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    return np.where(s <= 0.04045, s / 12.92, ((s + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(x: np.ndarray) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * x ** (1.0 / 2.4) - 0.055)


# -- EXR ---------------------------------------------------------------------

def _attr(name: bytes, type_: bytes, value: bytes) -> bytes:
    return name + b"\x00" + type_ + b"\x00" + struct.pack("<i", len(value)) + value


def _channel_entry(name: bytes, pixel_type: int) -> bytes:
    return name + b"\x00" + struct.pack("<iBBBBii", pixel_type, 0, 0, 0, 0, 1, 1)


def write_exr(path, rgb: np.ndarray, compression: str = "none") -> None:
    """Write linear RGB as a float32 scanline EXR."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    if not np.all(np.isfinite(rgb)):
        raise ValueError("refusing to write non-finite pixels")
    comp = {"none": _COMP_NONE, "zips": _COMP_ZIPS}[compression]
    data = rgb.astype("<f4")
    h, w = data.shape[:2]

    channels = _channel_entry(b"B", _PT_FLOAT) + _channel_entry(b"G", _PT_FLOAT) + \
        _channel_entry(b"R", _PT_FLOAT) + b"\x00"
    box = struct.pack("<iiii", 0, 0, w - 1, h - 1)
    header = b"".join([
        _attr(b"channels", b"chlist", channels),
        _attr(b"compression", b"compression", struct.pack("<B", comp)),
        _attr(b"dataWindow", b"box2i", box),
        _attr(b"displayWindow", b"box2i", box),
        _attr(b"lineOrder", b"lineOrder", struct.pack("<B", 0)),
        _attr(b"pixelAspectRatio", b"float", struct.pack("<f", 1.0)),
        _attr(b"screenWindowCenter", b"v2f", struct.pack("<ff", 0.0, 0.0)),
        _attr(b"screenWindowWidth", b"float", struct.pack("<f", 1.0)),
        b"\x00",
    ])

    chunks = []
    for y in range(h):
        # channels in alphabetical order: B, G, R
        raw = data[y, :, 2].tobytes() + data[y, :, 1].tobytes() + data[y, :, 0].tobytes()
        if comp == _COMP_ZIPS:
            packed = zlib.compress(_zip_predict(raw))
            if len(packed) >= len(raw):
                packed = raw
        else:
            packed = raw
        chunks.append(struct.pack("<ii", y, len(packed)) + packed)

    preamble = struct.pack("<ii", _MAGIC, _VERSION) + header
    table_pos = len(preamble)
    data_pos = table_pos + 8 * h
    offsets = []
    pos = data_pos
    for c in chunks:
        offsets.append(pos)
        pos += len(c)
    with open(path, "wb") as f:
        f.write(preamble)
        f.write(struct.pack(f"<{h}Q", *offsets))
        for c in chunks:
            f.write(c)


def _zip_predict(raw: bytes) -> bytes:
    """OpenEXR zip preprocessing: interleave-split halves, then delta-encode."""
    a = np.frombuffer(raw, dtype=np.uint8)
    half = (len(a) + 1) // 2
    t = np.empty_like(a)
    t[:half] = a[0::2]
    t[half:] = a[1::2]
    d = t.astype(np.int16)
    d[1:] = d[1:] - d[:-1] + (128 + 256)
    return d.astype(np.uint8).tobytes()


def _zip_unpredict(buf: bytes) -> bytes:
    a = np.frombuffer(buf, dtype=np.uint8).astype(np.int64)
    a[1:] -= 128
    s = np.cumsum(a) % 256
    half = (len(a) + 1) // 2
    out = np.empty(len(a), dtype=np.uint8)
    out[0::2] = s[:half]
    out[1::2] = s[half:]
    return out.tobytes()


def _read_attrs(f):
    attrs = {}
    while True:
        name = _read_cstr(f)
        if name == b"":
            return attrs
        type_ = _read_cstr(f)
        (size,) = struct.unpack("<i", f.read(4))
        attrs[name.decode()] = (type_.decode(), f.read(size))


def _read_cstr(f) -> bytes:
    out = bytearray()
    while True:
        c = f.read(1)
        if c in (b"", b"\x00"):
            return bytes(out)
        out += c


def _parse_channels(blob: bytes):
    channels = []
    pos = 0
    while blob[pos] != 0:
        end = blob.index(0, pos)
        name = blob[pos:end].decode()
        pixel_type, _, _, _, _, xs, ys = struct.unpack_from("<iBBBBii", blob, end + 1)
        if xs != 1 or ys != 1:
            raise ValueError("subsampled channels are not supported")
        channels.append((name, pixel_type))
        pos = end + 1 + 16
    return channels


def read_exr(path) -> np.ndarray:
    """Read a scanline EXR into (H, W, 3) float32 RGB.

    Accepts RGB float/half files with NONE, ZIPS or ZIP compression
    (the formats this package writes, plus common external ones).
    """
    with open(path, "rb") as f:
        magic, version = struct.unpack("<ii", f.read(8))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not an EXR file")
        if version & 0x200:
            raise ValueError("tiled EXR files are not supported")
        attrs = _read_attrs(f)
        channels = _parse_channels(attrs["channels"][1])
        comp = attrs["compression"][1][0]
        if comp not in _LINES_PER_CHUNK:
            raise ValueError(f"unsupported EXR compression code {comp}")
        x_min, y_min, x_max, y_max = struct.unpack("<iiii", attrs["dataWindow"][1])
        w = x_max - x_min + 1
        h = y_max - y_min + 1
        lines = _LINES_PER_CHUNK[comp]
        n_chunks = (h + lines - 1) // lines
        f.read(8 * n_chunks)  # offset table; chunks follow in order

        dtypes = {_PT_HALF: np.dtype("<f2"), _PT_FLOAT: np.dtype("<f4")}
        for name, ptype in channels:
            if ptype not in dtypes:
                raise ValueError(f"channel {name}: unsupported pixel type {ptype}")
        planes = {name: np.zeros((h, w), dtype=np.float32) for name, _ in channels}
        bytes_per_line = sum(w * dtypes[pt].itemsize for _, pt in channels)

        for _ in range(n_chunks):
            y, size = struct.unpack("<ii", f.read(8))
            payload = f.read(size)
            y0 = y - y_min
            rows = min(lines, h - y0)
            raw_size = bytes_per_line * rows
            if comp != _COMP_NONE and size != raw_size:
                payload = _zip_unpredict(zlib.decompress(payload))
            if len(payload) != raw_size:
                raise ValueError("corrupt EXR chunk")
            pos = 0
            for r in range(rows):
                for name, ptype in channels:
                    dt = dtypes[ptype]
                    n = w * dt.itemsize
                    planes[name][y0 + r] = np.frombuffer(payload[pos:pos + n], dtype=dt)
                    pos += n

    for want in ("R", "G", "B"):
        if want not in planes:
            raise ValueError(f"EXR file lacks channel {want}")
    return np.stack([planes["R"], planes["G"], planes["B"]], axis=-1)


# -- PNG ---------------------------------------------------------------------

def write_png_preview(path, linear_rgb: np.ndarray, exposure_scale: float = 1.0) -> None:
    """Tone-mapped 8-bit sRGB preview of a linear radiance image."""
    x = np.asarray(linear_rgb, dtype=np.float64) * exposure_scale
    u8 = np.round(linear_to_srgb(x) * 255.0).astype(np.uint8)
    Image.fromarray(u8, mode="RGB").save(path)


def preview_exposure_scale(linear_rgb: np.ndarray, percentile: float = 99.0) -> float:
    """Exposure that maps the given percentile of the image to white."""
    p = float(np.percentile(np.asarray(linear_rgb), percentile))
    if p <= 1e-6:
        return 1.0
    return float(np.clip(1.0 / p, 1.0, 1000.0))


def load_rgb(path) -> np.ndarray:
    """Load an 8-bit sRGB image (PNG/JPEG) as linear float RGB in [0,1]."""
    img = Image.open(path).convert("RGB")
    return srgb_to_linear(np.asarray(img, dtype=np.float64) / 255.0)


def load_depth(path, scale: float = 1.0) -> np.ndarray:
    """Load a depth raster in meters.

    Supported: .npy float arrays, 16-bit grayscale PNG (meters = value *
    scale), and 32-bit float TIFF. The scale factor applies to integer
    rasters only.
    """
    path = Path(path)
    if path.suffix == ".npy":
        return np.asarray(np.load(path), dtype=np.float64)
    img = Image.open(path)
    arr = np.asarray(img)
    if arr.dtype in (np.uint16, np.int32, np.uint8):
        return arr.astype(np.float64) * scale
    if arr.dtype in (np.float32, np.float64):
        return arr.astype(np.float64)
    raise ValueError(f"unsupported depth raster dtype {arr.dtype} in {path}")

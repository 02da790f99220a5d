"""File formats: PGM image stacks, FDM1 depth rasters, CSV metrics, and
JSON scene/light configurations.

Every format is parseable without third-party decoders: binary PGM (P5)
for images, a four-line-header float32 raster ("FDM1") for depth maps,
RFC-4180 CSV for metrics, and JSON for scenes and lights.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    InputError,
    MalformedHeader,
    TruncatedPayload,
    UnsupportedMaxval,
)
from .integration import DepthMap
from .metrology import Circle, ComparisonReport, SliceProfile, ViaMeasurement
from .photometric import ImageStack, LightSet, normalize_lights
from .synthetic import SceneSpec, ViaSpec

MAX_PGM_MAXVAL = 65535

MEASUREMENT_COLUMNS = (
    "via_id",
    "level_um",
    "center_x_um",
    "center_y_um",
    "radius_um",
    "roundness_um",
    "depth_um",
    "diameter_um",
)
COMPARISON_COLUMNS = (
    "via_id",
    "ref_depth_um",
    "meas_depth_um",
    "depth_err_pct",
    "ref_diam_um",
    "meas_diam_um",
    "diam_err_pct",
)
REFERENCE_COLUMNS = ("via_id", "depth_um", "diameter_um")


# ---------------------------------------------------------------- PGM


def save_pgm(path, raster) -> None:
    """Write one [0,1] intensity raster as 16-bit binary PGM (P5,
    maxval 65535, big-endian samples)."""
    a = np.asarray(raster, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise InputError("PGM raster must be non-empty 2-D")
    if a.min() < 0 or a.max() > 1:
        raise InputError("PGM intensities must lie in [0, 1]")
    samples = np.round(a * MAX_PGM_MAXVAL).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{a.shape[1]} {a.shape[0]}\n{MAX_PGM_MAXVAL}\n".encode("ascii"))
        fh.write(samples.tobytes())


def _pgm_tokens(data: bytes):
    """Header tokens of a PNM file, skipping '#' comments; returns the
    tokens and the payload offset (one whitespace byte past the maxval)."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if pos == start:
            raise MalformedHeader("PGM header ended prematurely")
        tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("PGM header not terminated by whitespace")
    return tokens, pos + 1


def load_pgm(path) -> np.ndarray:
    """Read a binary PGM (P5) into a float raster scaled to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, offset = _pgm_tokens(data)
    if tokens[0] != b"P5":
        raise MalformedHeader(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeader("PGM dimensions/maxval are not integers") from exc
    if width < 1 or height < 1:
        raise MalformedHeader("PGM dimensions must be positive")
    if maxval < 1:
        raise MalformedHeader("PGM maxval must be positive")
    if maxval > MAX_PGM_MAXVAL:
        raise UnsupportedMaxval(f"PGM maxval {maxval} exceeds {MAX_PGM_MAXVAL}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[offset:]
    if len(payload) < expected:
        raise MalformedHeader(
            f"PGM pixel data truncated ({len(payload)} of {expected} bytes)"
        )
    if len(payload) > expected:
        raise MalformedHeader("PGM has trailing bytes after pixel data")
    samples = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return samples.astype(float) / maxval


def load_image_stack(paths, pixel_pitch: float) -> ImageStack:
    """Load co-registered PGM frames, one per light, in the given order."""
    paths = list(paths)
    if len(paths) < 3:
        raise InputError(
            f"photometric stereo needs at least 3 images, got {len(paths)}"
        )
    frames = [load_pgm(p) for p in paths]
    first = frames[0].shape
    for p, f in zip(paths[1:], frames[1:]):
        if f.shape != first:
            raise DimensionMismatch(
                f"{p} is {f.shape[1]}x{f.shape[0]}, "
                f"expected {first[1]}x{first[0]}"
            )
    return ImageStack(frames=np.stack(frames), pixel_pitch=pixel_pitch)


# ---------------------------------------------------------------- FDM1


def save_depth_map(path, depth_map: DepthMap) -> None:
    """Write the FDM1 format: a four-line ASCII header and row-major
    little-endian float32 payload."""
    z32 = depth_map.z.astype("<f4")
    header = (
        f"FDM1\nwidth {depth_map.width}\nheight {depth_map.height}\n"
        f"pitch_um {depth_map.pixel_pitch!r}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(z32.tobytes())


def load_depth_map(path) -> DepthMap:
    """Read an FDM1 file; bit-exact for float32-representable values."""
    with open(path, "rb") as fh:
        data = fh.read()
    head, sep, _ = data.partition(b"\n")
    if not sep or head != b"FDM1":
        raise BadMagic("not an FDM1 file")
    rest = data[len(head) + 1 :]
    fields = {}
    for key in ("width", "height", "pitch_um"):
        line, sep, rest = rest.partition(b"\n")
        if not sep:
            raise MalformedHeader("FDM1 header ended prematurely")
        name, space, value = line.partition(b" ")
        if not space or name.decode("ascii", "replace") != key:
            raise MalformedHeader(f"expected FDM1 header line '{key} <value>'")
        fields[key] = value
    try:
        width = int(fields["width"])
        height = int(fields["height"])
        pitch = float(fields["pitch_um"])
    except ValueError as exc:
        raise MalformedHeader("unparseable FDM1 header value") from exc
    if width < 1 or height < 1 or pitch <= 0:
        raise MalformedHeader("FDM1 dimensions and pitch must be positive")
    expected = width * height * 4
    if len(rest) < expected:
        raise TruncatedPayload(
            f"FDM1 payload holds {len(rest)} of {expected} bytes"
        )
    if len(rest) > expected:
        raise MalformedHeader("FDM1 has trailing bytes after the payload")
    z = np.frombuffer(rest, dtype="<f4").reshape(height, width)
    return DepthMap(z=z.astype(float), pixel_pitch=pitch)


# ---------------------------------------------------------------- CSV


def _fmt(value) -> str:
    return format(value, ".6g")


def emit_metrics(report) -> str:
    """Serialize a ViaMeasurement or ComparisonReport to RFC-4180 CSV."""
    if isinstance(report, ViaMeasurement):
        return _emit_measurement(report)
    if isinstance(report, ComparisonReport):
        return _emit_comparison(report)
    raise InputError(f"cannot serialize {type(report).__name__} to CSV")


def _emit_measurement(m: ViaMeasurement, via_id: int = 0) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(MEASUREMENT_COLUMNS)
    for prof in m.profiles:
        writer.writerow([
            via_id,
            _fmt(prof.level),
            _fmt(prof.circle.cx),
            _fmt(prof.circle.cy),
            _fmt(prof.circle.r),
            _fmt(prof.roundness),
            _fmt(m.depth),
            _fmt(m.diameter),
        ])
    return out.getvalue()


def _emit_comparison(report: ComparisonReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(COMPARISON_COLUMNS)
    for row in report.rows:
        writer.writerow([
            row.via_id,
            _fmt(row.ref_depth),
            _fmt(row.meas_depth),
            _fmt(row.depth_error_pct),
            _fmt(row.ref_diameter),
            _fmt(row.meas_diameter),
            _fmt(row.diameter_error_pct),
        ])
    writer.writerow(
        ["MAPE", "", "", _fmt(report.mape_depth), "", "", _fmt(report.mape_diameter)]
    )
    return out.getvalue()


def _csv_rows(text: str, columns, label: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader(f"{label} CSV is empty") from None
    if header != list(columns):
        raise MalformedHeader(
            f"{label} CSV header is {header}, expected {list(columns)}"
        )
    return [row for row in reader if row]


def parse_measurement_csv(text: str):
    """Parse an inspect CSV back into (via_id, ViaMeasurement) pairs,
    ordered by first appearance."""
    grouped: dict[int, dict] = {}
    for row in _csv_rows(text, MEASUREMENT_COLUMNS, "measurement"):
        if len(row) != len(MEASUREMENT_COLUMNS):
            raise MalformedHeader(f"measurement row has {len(row)} fields")
        try:
            via_id = int(row[0])
            level, cx, cy, radius, rnd, depth, diameter = map(float, row[1:])
        except ValueError as exc:
            raise MalformedHeader(f"unparseable measurement row {row}") from exc
        entry = grouped.setdefault(
            via_id, {"depth": depth, "diameter": diameter, "profiles": []}
        )
        entry["profiles"].append(
            SliceProfile(
                level=level,
                circle=Circle(cx=cx, cy=cy, r=radius),
                roundness=rnd,
                point_count=3,
            )
        )
    result = []
    for via_id, entry in grouped.items():
        profiles = sorted(entry["profiles"], key=lambda p: p.level)
        result.append(
            (
                via_id,
                ViaMeasurement(
                    depth=entry["depth"],
                    diameter=entry["diameter"],
                    profiles=profiles,
                ),
            )
        )
    return result


def parse_reference_csv(text: str):
    """Parse reference values: rows of via_id,depth_um,diameter_um."""
    refs = []
    for row in _csv_rows(text, REFERENCE_COLUMNS, "reference"):
        if len(row) != len(REFERENCE_COLUMNS):
            raise MalformedHeader(f"reference row has {len(row)} fields")
        try:
            refs.append((float(row[1]), float(row[2])))
        except ValueError as exc:
            raise MalformedHeader(f"unparseable reference row {row}") from exc
    return refs


# ---------------------------------------------------------------- JSON


LIGHT_KINDS = ("positions_mm", "unit_vectors")


def _require_keys(obj: dict, required, optional, label: str):
    missing = [k for k in required if k not in obj]
    if missing:
        raise InputError(f"{label} is missing keys {missing}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise InputError(f"{label} has unknown keys {unknown}")


def parse_lights(obj: dict) -> LightSet:
    _require_keys(obj, ("kind", "values"), (), "light config")
    kind = obj["kind"]
    values = obj["values"]
    if kind not in LIGHT_KINDS:
        raise InputError(f"light kind must be one of {LIGHT_KINDS}, got {kind!r}")
    arr = np.asarray(values, dtype=float)
    if kind == "positions_mm":
        return normalize_lights(arr)
    return LightSet(arr)


def load_lights(path) -> LightSet:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("light config must be a JSON object")
    return parse_lights(obj)


def save_lights(path, lights: LightSet) -> None:
    obj = {"kind": "unit_vectors", "values": lights.directions.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def parse_scene(obj: dict) -> SceneSpec:
    _require_keys(
        obj,
        ("raster", "vias"),
        ("albedo", "noise_sigma", "shadow_model"),
        "scene",
    )
    raster = obj["raster"]
    if not isinstance(raster, dict):
        raise InputError("scene raster must be an object")
    _require_keys(raster, ("width", "height", "pixel_pitch_um"), (), "raster")
    vias = []
    for i, v in enumerate(obj["vias"]):
        if not isinstance(v, dict):
            raise InputError(f"via {i} must be an object")
        _require_keys(
            v,
            ("center_um", "radius_top_um", "radius_bottom_um", "depth_um"),
            ("wall_profile", "rim_noise_amplitude_um"),
            f"via {i}",
        )
        center = v["center_um"]
        if not (isinstance(center, (list, tuple)) and len(center) == 2):
            raise InputError(f"via {i} center_um must be [x, y]")
        vias.append(
            ViaSpec(
                center=(float(center[0]), float(center[1])),
                radius_top=float(v["radius_top_um"]),
                radius_bottom=float(v["radius_bottom_um"]),
                depth=float(v["depth_um"]),
                wall_profile=v.get("wall_profile", "straight-taper"),
                rim_noise_amplitude=float(v.get("rim_noise_amplitude_um", 0.0)),
            )
        )
    return SceneSpec(
        width=int(raster["width"]),
        height=int(raster["height"]),
        pixel_pitch=float(raster["pixel_pitch_um"]),
        vias=vias,
        albedo=float(obj.get("albedo", 0.8)),
        noise_sigma=float(obj.get("noise_sigma", 0.0)),
        shadow_model=obj.get("shadow_model", "horizon"),
    )


def load_scene(path) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("scene config must be a JSON object")
    return parse_scene(obj)


def save_scene(path, scene: SceneSpec) -> None:
    obj = {
        "raster": {
            "width": scene.width,
            "height": scene.height,
            "pixel_pitch_um": scene.pixel_pitch,
        },
        "albedo": scene.albedo,
        "noise_sigma": scene.noise_sigma,
        "shadow_model": scene.shadow_model,
        "vias": [
            {
                "center_um": list(v.center),
                "radius_top_um": v.radius_top,
                "radius_bottom_um": v.radius_bottom,
                "depth_um": v.depth,
                "wall_profile": v.wall_profile,
                "rim_noise_amplitude_um": v.rim_noise_amplitude,
            }
            for v in scene.vias
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")

"""Plain-text artifacts: meshes, multistatic matrices, indicator fields and field snapshots.

Every file starts with a version header of the form::

    # eddy-lsm-<kind> v1 config=<hash> [key=value ...]

Numbers are written with 17 significant digits so that reloading is exact.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import polars as pl
from loguru import logger

from eddy_lsm.exceptions import FileFormatError
from eddy_lsm.models.fields import ComplexField
from eddy_lsm.models.mesh import Mesh
from eddy_lsm.models.results import IndicatorField, MultistaticMatrix, ReconstructionMetrics, SamplingGrid
from eddy_lsm.solvers.green import COINCIDENCE_TOLERANCE, green_values

FORMAT_VERSION = "v1"

PathLike = Union[str, Path]


def _num(x: float) -> str:
    return format(float(x), ".17g")


def format_header(kind: str, config_hash: Optional[str] = None, **extra: object) -> str:
    """Version header line (without newline)."""
    parts = [f"# eddy-lsm-{kind}", FORMAT_VERSION, f"config={config_hash or 'none'}"]
    parts.extend(f"{key}={value}" for key, value in extra.items())
    return " ".join(parts)


def parse_header(line: str, kind: str) -> Dict[str, str]:
    """Key/value pairs of a version header.

    Raises:
        FileFormatError: If the line is not a header of ``kind`` in the supported version
    """
    tokens = line.strip().split()
    if len(tokens) < 3 or tokens[0] != "#" or not tokens[1].startswith("eddy-lsm-"):
        raise FileFormatError(f"missing eddy-lsm header, got {line.strip()[:60]!r}", line=1)
    found = tokens[1][len("eddy-lsm-") :]
    if found != kind:
        raise FileFormatError(f"expected a {kind} file, found {found}", line=1)
    if tokens[2] != FORMAT_VERSION:
        raise FileFormatError(f"unsupported format version {tokens[2]} (expected {FORMAT_VERSION})", line=1)

    fields = {}
    for token in tokens[3:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise FileFormatError(f"malformed header field {token!r}", line=1)
        fields[key] = value
    return fields


def _config_value(fields: Dict[str, str]) -> Optional[str]:
    value = fields.get("config", "none")
    return None if value == "none" else value


def _read_lines(path: PathLike) -> List[str]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def _floats(tokens: Sequence[str], line: int) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError as e:
        raise FileFormatError(f"invalid number ({e})", line=line) from e


def _ints(tokens: Sequence[str], line: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise FileFormatError(f"invalid integer ({e})", line=line) from e


def _body(lines: List[str], start: int, count: int, what: str) -> Iterable[Tuple[int, List[str]]]:
    """Yield (line number, tokens) for ``count`` lines starting at index ``start``."""
    for k in range(count):
        index = start + k
        if index >= len(lines) or not lines[index].strip():
            raise FileFormatError(f"file ends after {k} of {count} {what} lines", line=index + 1)
        yield index + 1, lines[index].split()


def _check_trailing(lines: List[str], start: int) -> None:
    for index in range(start, len(lines)):
        if lines[index].strip():
            raise FileFormatError("unexpected trailing data", line=index + 1)


# Mesh


def save_mesh(mesh: Mesh, path: PathLike, config_hash: Optional[str] = None) -> Path:
    """Write ``vertices N triangles M`` followed by ``r z flag`` and ``i j k tag`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_header("mesh", config_hash), f"vertices {mesh.n_vertices} triangles {mesh.n_triangles}"]
    lines.extend(
        f"{_num(r)} {_num(z)} {int(flag)}" for (r, z), flag in zip(mesh.vertices, mesh.boundary_flags)
    )
    lines.extend(f"{i} {j} {k} {int(tag)}" for (i, j, k), tag in zip(mesh.triangles, mesh.region_tags))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Saved mesh with {mesh.n_vertices} vertices to {path}")
    return path


def load_mesh(path: PathLike) -> Mesh:
    """Read a mesh written by :func:`save_mesh`.

    Raises:
        FileFormatError: On header, count or content errors (with line number)
    """
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError("empty file", line=1)
    parse_header(lines[0], "mesh")

    if len(lines) < 2:
        raise FileFormatError("missing size line", line=2)
    size = lines[1].split()
    if len(size) != 4 or size[0] != "vertices" or size[2] != "triangles":
        raise FileFormatError("expected 'vertices N triangles M'", line=2)
    n_vertices, n_triangles = _ints([size[1], size[3]], line=2)

    vertices = np.empty((n_vertices, 2))
    flags = np.empty(n_vertices, dtype=np.int8)
    for k, (number, tokens) in enumerate(_body(lines, 2, n_vertices, "vertex")):
        if len(tokens) != 3:
            raise FileFormatError("expected 'r z flag'", line=number)
        vertices[k] = _floats(tokens[:2], number)
        flags[k] = _ints(tokens[2:], number)[0]

    triangles = np.empty((n_triangles, 3), dtype=np.int64)
    tags = np.empty(n_triangles, dtype=np.int8)
    for k, (number, tokens) in enumerate(_body(lines, 2 + n_vertices, n_triangles, "triangle")):
        if len(tokens) != 4:
            raise FileFormatError("expected 'i j k tag'", line=number)
        values = _ints(tokens, number)
        triangles[k] = values[:3]
        tags[k] = values[3]
    _check_trailing(lines, 2 + n_vertices + n_triangles)

    if n_vertices < 4:
        raise FileFormatError(f"a mesh needs at least 4 vertices, got {n_vertices}", line=2)
    n_radial = int(np.argmax(vertices[:, 1] != vertices[0, 1])) or n_vertices
    r_ticks = vertices[:n_radial, 0].copy()
    z_ticks = vertices[::n_radial, 1].copy()
    if triangles.size and (triangles.min() < 0 or triangles.max() >= n_vertices):
        raise FileFormatError("triangle references a vertex out of range", line=2)
    try:
        return Mesh(
            r_ticks=r_ticks,
            z_ticks=z_ticks,
            vertices=vertices,
            triangles=triangles,
            boundary_flags=flags,
            region_tags=tags,
        )
    except ValueError as e:
        raise FileFormatError(f"inconsistent mesh: {e}", line=2) from e


# Multistatic matrix


def save_matrix(matrix: MultistaticMatrix, path: PathLike) -> Path:
    """Write header ``N delta M kind seed`` then N rows of ``Re Im`` pairs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    band = "full" if matrix.band is None else str(matrix.band)
    seed = "none" if matrix.seed is None else str(matrix.seed)
    lines = [
        format_header("matrix", matrix.config_hash, convention=matrix.band_convention),
        f"{matrix.size} {_num(matrix.delta)} {band} {matrix.kind} {seed}",
    ]
    for row in matrix.entries:
        lines.append(" ".join(f"{_num(z.real)} {_num(z.imag)}" for z in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Saved {matrix.size}x{matrix.size} matrix to {path}")
    return path


def load_matrix(path: PathLike) -> MultistaticMatrix:
    """Read a matrix written by :func:`save_matrix`; the round-trip is bit-exact.

    Raises:
        FileFormatError: On header, size or content errors (with line number)
    """
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError("empty file", line=1)
    fields = parse_header(lines[0], "matrix")

    if len(lines) < 2:
        raise FileFormatError("missing 'N delta M kind seed' line", line=2)
    meta = lines[1].split()
    if len(meta) != 5:
        raise FileFormatError("expected 'N delta M kind seed'", line=2)
    n = _ints(meta[:1], 2)[0]
    delta = _floats(meta[1:2], 2)[0]
    band = None if meta[2] == "full" else _ints(meta[2:3], 2)[0]
    kind = meta[3]
    seed = None if meta[4] == "none" else _ints(meta[4:5], 2)[0]
    if n < 1:
        raise FileFormatError(f"matrix size must be positive, got {n}", line=2)

    entries = np.empty((n, n), dtype=complex)
    for i, (number, tokens) in enumerate(_body(lines, 2, n, "matrix row")):
        if len(tokens) != 2 * n:
            raise FileFormatError(f"expected {2 * n} numbers, got {len(tokens)}", line=number)
        values = np.array(_floats(tokens, number))
        entries[i] = values[0::2] + 1j * values[1::2]
    _check_trailing(lines, 2 + n)

    try:
        return MultistaticMatrix(
            entries=entries,
            kind=kind,
            delta=delta,
            band=band,
            band_convention=fields.get("convention", "exclusive"),
            seed=seed,
            config_hash=_config_value(fields),
        )
    except ValueError as e:
        raise FileFormatError(f"invalid matrix metadata: {e}", line=2) from e


# Indicator field

INDICATOR_COLUMNS = ["r", "z", "raw", "normalized", "epsilon", "flag"]


def indicator_frame(field: IndicatorField) -> pl.DataFrame:
    points = field.grid.points()
    return pl.DataFrame(
        {
            "r": points[:, 0],
            "z": points[:, 1],
            "raw": field.raw,
            "normalized": field.normalized,
            "epsilon": field.epsilon,
            "flag": np.asarray(field.flags, dtype=np.int64),
        }
    )


def save_indicator(field: IndicatorField, path: PathLike) -> Path:
    """CSV ``r,z,raw,normalized,epsilon,flag`` per grid point, after a version header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    header = format_header(
        "indicator",
        field.config_hash,
        grid=",".join([_num(grid.r_lo), _num(grid.r_hi), _num(grid.z_lo), _num(grid.z_hi), str(grid.n_r), str(grid.n_z)]),
        delta=_num(field.delta),
    )
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(header + "\n")
        indicator_frame(field).write_csv(handle)
    logger.debug(f"Saved indicator over {grid.size} points to {path}")
    return path


def load_indicator(path: PathLike) -> IndicatorField:
    """Read an indicator CSV written by :func:`save_indicator`.

    Raises:
        FileFormatError: On header or content errors
    """
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError("empty file", line=1)
    fields = parse_header(lines[0], "indicator")
    try:
        r_lo, r_hi, z_lo, z_hi, n_r, n_z = fields["grid"].split(",")
        grid = SamplingGrid(
            r_lo=float(r_lo), r_hi=float(r_hi), z_lo=float(z_lo), z_hi=float(z_hi), n_r=int(n_r), n_z=int(n_z)
        )
        delta = float(fields.get("delta", "0"))
    except (KeyError, ValueError) as e:
        raise FileFormatError(f"invalid grid description in header: {e}", line=1) from e

    if len(lines) < 2 or lines[1].strip().split(",") != INDICATOR_COLUMNS:
        raise FileFormatError(f"expected columns {','.join(INDICATOR_COLUMNS)}", line=2)
    rows = [line for line in lines[2:] if line.strip()]
    if len(rows) != grid.size:
        raise FileFormatError(f"expected {grid.size} rows, found {len(rows)}", line=len(rows) + 3)

    try:
        frame = pl.read_csv(Path(path), skip_rows=1, schema_overrides={"flag": pl.Int64})
    except Exception as e:
        raise FileFormatError(f"unreadable indicator table: {e}") from e

    return IndicatorField(
        grid=grid,
        raw=frame["raw"].to_numpy().astype(float),
        epsilon=frame["epsilon"].to_numpy().astype(float),
        flags=frame["flag"].to_numpy().astype(np.int8),
        delta=delta,
        config_hash=_config_value(fields),
    )


def save_pgm(field: IndicatorField, path: PathLike) -> Path:
    """8-bit binary PGM of the normalized indicator; the top row is the largest z."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    image = field.grid.reshape(field.normalized)[::-1]
    pixels = np.clip(np.rint(255.0 * image), 0, 255).astype(np.uint8)
    header = f"P5\n{format_header('indicator', field.config_hash)}\n{field.grid.n_r} {field.grid.n_z}\n255\n"
    path.write_bytes(header.encode("ascii") + pixels.tobytes())
    return path


# Field snapshots


def field_vertex_values(field: ComplexField) -> np.ndarray:
    """Total field value per vertex; NaN at a vertex on the point source."""
    values = field.values.astype(complex)
    if not field.has_singular_part:
        return values

    source = field.singular_source
    r, z = field.mesh.vertices[:, 0], field.mesh.vertices[:, 1]
    at_source = np.hypot(r - source.r, z - source.z) < COINCIDENCE_TOLERANCE * source.r
    phi, _, _ = green_values(r[~at_source], z[~at_source], source.r, source.z)
    values[~at_source] += field.singular_amplitude * phi
    values[at_source] = np.nan
    return values


def save_field(field: ComplexField, path: PathLike, config_hash: Optional[str] = None) -> Path:
    """CSV ``r,z,Re(u),Im(u)`` per vertex, after a version header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = field_vertex_values(field)
    frame = pl.DataFrame(
        {
            "r": field.mesh.vertices[:, 0],
            "z": field.mesh.vertices[:, 1],
            "Re(u)": values.real,
            "Im(u)": values.imag,
        }
    )
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_header("field", config_hash) + "\n")
        frame.write_csv(handle)
    return path


def load_field_frame(path: PathLike) -> pl.DataFrame:
    """Field snapshot as a polars frame."""
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError("empty file", line=1)
    parse_header(lines[0], "field")
    return pl.read_csv(Path(path), skip_rows=1)


# Metrics


def save_metrics(metrics: Sequence[ReconstructionMetrics], path: PathLike, config_hash: Optional[str] = None) -> Path:
    """One CSV row per reconstruction."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pl.DataFrame([m.as_row() for m in metrics], infer_schema_length=None)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_header("metrics", config_hash) + "\n")
        frame.write_csv(handle)
    return path

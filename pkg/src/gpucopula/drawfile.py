"""Line-delimited persistence for posterior draws.

The first line is ``# `` followed by a JSON header naming the format,
its version, the generating family, rotation, concentration ``M`` and
seed, plus the full sampler configuration when available. Every other
line is one retained draw::

    iteration theta K rho_1 y_11 y_12 ... rho_K y_K1 y_K2

with all reals printed at 17 significant digits, so a write/read round
trip reproduces every float bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .partition import Family
from .sampler import PosteriorDraw

__all__ = ["FORMAT_NAME", "FORMAT_VERSION", "DrawFileError", "DrawHeader", "write_draws", "read_draws"]

FORMAT_NAME = "gpucopula-draws"
FORMAT_VERSION = 1


class DrawFileError(ValueError):
    """A draw file is malformed or has an unsupported version."""


@dataclass
class DrawHeader:
    family: Family
    rotated: bool = False
    concentration: float = 1.0
    seed: int | None = None
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "family": Family.parse(self.family).value,
            "rotated": bool(self.rotated),
            "concentration": float(self.concentration),
            "seed": self.seed,
            "config": self.config,
        }


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def format_draw(draw: PosteriorDraw) -> str:
    fields = [str(int(draw.iteration)), _fmt(draw.theta), str(draw.weights.size)]
    for w, (y1, y2) in zip(draw.weights, draw.atoms):
        fields += [_fmt(w), _fmt(y1), _fmt(y2)]
    return " ".join(fields)


def write_draws(path, draws, header: DrawHeader) -> None:
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header.as_dict(), sort_keys=True) + "\n")
        for d in draws:
            fh.write(format_draw(d) + "\n")


def _parse_header(line: str, path) -> DrawHeader:
    if not line.startswith("# "):
        raise DrawFileError(f"{path}:1: missing '# ' header line")
    try:
        meta = json.loads(line[2:])
    except json.JSONDecodeError as exc:
        raise DrawFileError(f"{path}:1: header is not valid JSON ({exc})") from None
    if meta.get("format") != FORMAT_NAME:
        raise DrawFileError(f"{path}:1: not a draw file (format {meta.get('format')!r})")
    if meta.get("version") != FORMAT_VERSION:
        raise DrawFileError(f"{path}:1: unsupported draw-file version {meta.get('version')!r}")
    try:
        family = Family.parse(meta["family"])
    except (KeyError, ValueError):
        raise DrawFileError(f"{path}:1: header has no valid family") from None
    return DrawHeader(
        family=family,
        rotated=bool(meta.get("rotated", False)),
        concentration=float(meta.get("concentration", 1.0)),
        seed=meta.get("seed"),
        config=meta.get("config") or {},
    )


def _parse_record(line: str, path, lineno: int) -> PosteriorDraw:
    parts = line.split()
    try:
        it, theta, k = int(parts[0]), float(parts[1]), int(parts[2])
        vals = np.array([float(p) for p in parts[3:]], dtype=float)
    except (IndexError, ValueError):
        raise DrawFileError(f"{path}:{lineno}: malformed draw record") from None
    if vals.size != 3 * k:
        raise DrawFileError(f"{path}:{lineno}: expected {3 * k} component fields, got {vals.size}")
    trip = vals.reshape(k, 3)
    try:
        return PosteriorDraw(theta=theta, weights=trip[:, 0], atoms=trip[:, 1:], iteration=it)
    except ValueError as exc:
        raise DrawFileError(f"{path}:{lineno}: {exc}") from None


def read_draws(path):
    """Return ``(header, draws)`` from a draw file."""
    path = Path(path)
    draws = []
    with open(path) as fh:
        first = fh.readline()
        if not first:
            raise DrawFileError(f"{path}: empty file")
        header = _parse_header(first.rstrip("\n"), path)
        for lineno, line in enumerate(fh, start=2):
            if line.strip():
                draws.append(_parse_record(line, path, lineno))
    if not draws:
        raise DrawFileError(f"{path}: no draws")
    return header, draws

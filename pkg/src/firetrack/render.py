"""SVG overlays of a world snapshot: heat map, footprints, agents and links."""

from __future__ import annotations

import json
from xml.sax.saxutils import escape

import numpy as np

from .fire_model import Extent, Raster
from .runtime import WorldState

SNAPSHOT_VERSION = 1


def world_snapshot(world: WorldState, raster: Raster, trails=None) -> dict:
    """Plain-data view of a world, enough to redraw it without the simulator."""
    cam = world.agents[0].cam if world.agents else None
    e = raster.extent
    snap = {
        "version": SNAPSHOT_VERSION,
        "step": world.step,
        "comm_radius": world.comm_radius,
        "tan_half_angles": [float(t) for t in cam.tan_half_angles] if cam else None,
        "agents": [
            {
                "id": a.id,
                "x": a.pose.x,
                "y": a.pose.y,
                "z": a.pose.z,
                "zeta": int(a.zeta),
                "desired": [a.desired.x, a.desired.y, a.desired.z],
                "zeta_flips": a.zeta_flips,
            }
            for a in world.agents
        ],
        "heat": {
            "extent": [e.x_min, e.y_min, e.x_max, e.y_max],
            "resolution": raster.resolution,
            "values": raster.values.tolist(),
        },
    }
    if trails:
        snap["trails"] = {str(k): [list(map(float, p)) for p in v] for k, v in trails.items()}
    return snap


def write_snapshot(snap: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(snap, fh, separators=(",", ":"))


def read_snapshot(path) -> dict:
    with open(path) as fh:
        snap = json.load(fh)
    if snap.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {snap.get('version')!r}")
    return snap


def _n(v: float) -> str:
    return f"{v:.6g}"


def render_svg(snap: dict, width_px: int = 800) -> str:
    """Draw a snapshot. World y grows north, so the scene is flipped vertically."""
    heat = snap["heat"]
    ext = Extent(*heat["extent"])
    values = np.asarray(heat["values"], dtype=float)
    scale = width_px / ext.width
    height_px = ext.height * scale
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{_n(height_px)}" '
        f'viewBox="{_n(ext.x_min)} {_n(-ext.y_max)} {_n(ext.width)} {_n(ext.height)}">',
        f'<text x="{_n(ext.x_min + 5)}" y="{_n(-ext.y_max + 15)}" font-size="12">step {snap["step"]}</text>',
        '<g id="heat" transform="scale(1,-1)">',
        f'<rect x="{_n(ext.x_min)}" y="{_n(ext.y_min)}" width="{_n(ext.width)}" '
        f'height="{_n(ext.height)}" fill="#000"/>',
    ]
    if values.size:
        ny, nx = values.shape
        cw, ch = ext.width / nx, ext.height / ny
        peak = float(values.max())
        if peak > 0:
            level = np.round(255 * values / peak).astype(int)
            for r, c in zip(*np.nonzero(level)):
                g = level[r, c]
                x = ext.x_min + c * cw
                y = ext.y_max - (r + 1) * ch
                out.append(
                    f'<rect class="heat" x="{_n(x)}" y="{_n(y)}" width="{_n(cw)}" height="{_n(ch)}" '
                    f'fill="rgb({g},{g},{g})"/>'
                )
    out.append("</g>")

    agents = snap.get("agents", [])
    out.append('<g id="scene" transform="scale(1,-1)">')
    radius = snap.get("comm_radius", 0.0)
    for i, a in enumerate(agents):
        for b in agents[i + 1 :]:
            d = np.linalg.norm([a["x"] - b["x"], a["y"] - b["y"], a["z"] - b["z"]])
            if d <= radius:
                out.append(
                    f'<line class="link" x1="{_n(a["x"])}" y1="{_n(a["y"])}" x2="{_n(b["x"])}" '
                    f'y2="{_n(b["y"])}" stroke="#36f" stroke-width="1" stroke-dasharray="4 3"/>'
                )
    for key, pts in (snap.get("trails") or {}).items():
        path = " ".join(f"{_n(x)},{_n(y)}" for x, y, *_ in pts)
        out.append(f'<polyline class="trail" points="{path}" fill="none" stroke="#0a0" stroke-width="0.8"/>')
    tan = snap.get("tan_half_angles") or [0.0, 0.0]
    for a in agents:
        hx, hy = a["z"] * tan[0], a["z"] * tan[1]
        out.append(
            f'<rect class="fov" x="{_n(a["x"] - hx)}" y="{_n(a["y"] - hy)}" width="{_n(2 * hx)}" '
            f'height="{_n(2 * hy)}" fill="none" stroke="{"#f80" if a["zeta"] else "#888"}" stroke-width="1"/>'
        )
    for a in agents:
        out.append(f'<circle class="agent" cx="{_n(a["x"])}" cy="{_n(a["y"])}" r="4" fill="#e22"/>')
    out.append("</g>")
    # Labels are drawn unflipped so the text reads upright.
    out.append('<g id="labels" font-size="10">')
    for a in agents:
        out.append(f'<text x="{_n(a["x"] + 5)}" y="{_n(-a["y"] - 5)}">{escape(str(a["id"]))}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

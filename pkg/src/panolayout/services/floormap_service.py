"""
floormap_service.py

Top-view SVG floor map of a scene: the wall polygon, one rectangle per object footprint
with an arrow along its facing direction (none for plants), a 1 m scale bar and the
camera. Scene meters map to SVG units at a fixed `PX_PER_M`, with y pointing up in the
scene and down in the SVG. All coordinates are printed with two decimals, so the same
scene always yields the same text.
"""

import logging

import numpy as np
from jinja2 import Environment

from panolayout.models import SceneParameters

logger = logging.getLogger(__name__)

PX_PER_M = 100.0
MARGIN_PX = 40.0
ARROW_OVERHANG_M = 0.25

CLASS_COLORS = {"bed": "#7aa6c2", "chair": "#d9a45b", "tv": "#6c6c6c", "plant": "#6fae6f"}


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class FloormapService:
    def __init__(self, template_env: Environment):
        self.template = template_env.get_template("floormap/floormap.svg.jinja2")

    def render(self, scene: SceneParameters) -> str:
        vertices = scene.vertices()
        x_min, y_min = vertices.min(axis=0)
        x_max, y_max = vertices.max(axis=0)

        def to_svg(p) -> tuple[float, float]:
            return (MARGIN_PX + (p[0] - x_min) * PX_PER_M, MARGIN_PX + (y_max - p[1]) * PX_PER_M)

        width = 2 * MARGIN_PX + (x_max - x_min) * PX_PER_M
        height = 2 * MARGIN_PX + (y_max - y_min) * PX_PER_M + MARGIN_PX

        objects = []
        for obj in scene.objects:
            cx, cy = to_svg(obj.position)
            d, w = obj.footprint.depth * PX_PER_M, obj.footprint.width * PX_PER_M
            arrow = None
            if obj.category.has_orientation:
                tip = np.asarray(obj.position) + obj.normal * (obj.footprint.depth / 2.0 + ARROW_OVERHANG_M)
                arrow = tuple(_fmt(v) for v in to_svg(tip))
            objects.append({
                "category": obj.category.value,
                "cx": _fmt(cx), "cy": _fmt(cy),
                "x": _fmt(cx - d / 2.0), "y": _fmt(cy - w / 2.0),
                "w": _fmt(d), "h": _fmt(w),
                # svg rotations run clockwise on screen
                "angle": _fmt(-obj.orientation),
                "color": CLASS_COLORS[obj.category.value],
                "arrow": arrow,
            })

        bar_y = height - MARGIN_PX / 2.0
        svg = self.template.render(
            width=_fmt(width), height=_fmt(height),
            walls=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (to_svg(v) for v in vertices)),
            objects=objects,
            camera=tuple(_fmt(v) for v in to_svg((0.0, 0.0))),
            bar=(_fmt(MARGIN_PX), _fmt(bar_y), _fmt(MARGIN_PX + PX_PER_M), _fmt(bar_y)),
            bar_label_y=_fmt(bar_y - 8.0),
        )
        logger.debug("floor map with %d walls and %d objects", len(scene.walls), len(scene.objects))
        return svg + "\n"

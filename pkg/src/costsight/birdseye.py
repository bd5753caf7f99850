"""Bird's-eye SVG of the area ahead of the ego-vehicle.

The perceivable area is a 60 degree wedge opening away from the vehicle;
braking-distance zones are shaded arcs. Human instances are drawn at
``x = d * sin(bearing)``, ``y = d * cos(bearing)`` meters ahead: gray
crosses where both compared rules overlooked them, colored dots where only
one rule detected them. When bearings are missing the export degrades to a
distance-only strip plot instead of failing.
"""

import math

from .consequence import FIELD_HALF_ANGLE_DEG

SIZE = 640
MARGIN = 40
COLOR_A = "#2c7fb8"
COLOR_B = "#d95f02"
COLOR_BOTH_MISSED = "#7a7a7a"
ZONE_FILLS = ("#fddbc7", "#fee8d8", "#fdf3ea", "#f5f5f5")

_PLOTTED = ("overlooked_both", "only_a", "only_b")


def to_cartesian(distance_m, bearing_deg):
    """Ground-plane coordinates: x right of heading, y meters ahead."""
    rad = math.radians(bearing_deg)
    return distance_m * math.sin(rad), distance_m * math.cos(rad)


def birdseye_points(report, max_radius=None):
    """JSON-ready point list with plot coordinates and zone arcs."""
    zones = [z.to_dict() for z in report.zones]
    radius = max_radius or (
        1.15 * max(z.max_distance_m for z in report.zones)
        if report.zones else 50.0
    )
    has_bearings = all(
        p.bearing_deg is not None for p in report.points
    )
    points = []
    for i, p in enumerate(report.points):
        if p.category not in _PLOTTED:
            continue
        d = p.to_dict()
        if has_bearings:
            d["x"], d["y"] = to_cartesian(p.distance_m, p.bearing_deg)
        else:
            # deterministic horizontal spread for the strip fallback
            d["x"] = ((i * 7) % 21 - 10) / 10.0 * 0.08 * radius
            d["y"] = p.distance_m
        points.append(d)
    return {
        "layout": "wedge" if has_bearings else "strip",
        "field_half_angle_deg": FIELD_HALF_ANGLE_DEG,
        "max_radius_m": radius,
        "rule_names": list(report.rule_names),
        "zones": zones,
        "points": points,
    }


def _marker(px, py, category, name_a, name_b):
    if category == "overlooked_both":
        s = 5
        return (
            f'<g stroke="{COLOR_BOTH_MISSED}" stroke-width="2">'
            f'<line x1="{px - s:.1f}" y1="{py - s:.1f}" '
            f'x2="{px + s:.1f}" y2="{py + s:.1f}"/>'
            f'<line x1="{px - s:.1f}" y1="{py + s:.1f}" '
            f'x2="{px + s:.1f}" y2="{py - s:.1f}"/></g>'
        )
    color = COLOR_A if category == "only_a" else COLOR_B
    whom = name_a if category == "only_a" else name_b
    return (
        f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" fill="{color}">'
        f"<title>detected only by {whom}</title></circle>"
    )


def birdseye_svg(report, max_radius=None):
    """Self-contained SVG drawing of the report's bird's-eye view."""
    data = birdseye_points(report, max_radius)
    radius = data["max_radius_m"]
    cx, cy = SIZE / 2.0, SIZE - MARGIN
    scale = (SIZE - 2 * MARGIN) / radius
    half = math.radians(FIELD_HALF_ANGLE_DEG)
    name_a, name_b = data["rule_names"]

    def at(x_m, y_m):
        return cx + scale * x_m, cy - scale * y_m

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" '
        f'height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if data["layout"] == "wedge":
        def sector(r_m, fill):
            (x1, y1) = at(r_m * math.sin(-half), r_m * math.cos(-half))
            (x2, y2) = at(r_m * math.sin(half), r_m * math.cos(half))
            rr = scale * r_m
            return (
                f'<path d="M {cx:.1f} {cy:.1f} L {x1:.1f} {y1:.1f} '
                f'A {rr:.1f} {rr:.1f} 0 0 1 {x2:.1f} {y2:.1f} Z" '
                f'fill="{fill}" stroke="#999" stroke-width="1"/>'
            )

        parts.append(sector(radius, "#fbfbfb"))
        ordered = sorted(data["zones"], key=lambda z: -z["max_distance_m"])
        for i, z in enumerate(ordered):
            fill = ZONE_FILLS[min(len(ZONE_FILLS) - 1, len(ordered) - 1 - i)]
            parts.append(sector(z["max_distance_m"], fill))
            lx, ly = at(0, z["max_distance_m"])
            parts.append(
                f'<text x="{lx + 4:.1f}" y="{ly - 3:.1f}" font-size="11" '
                f'fill="#555">{z["name"]} ({z["max_distance_m"]:g} m)</text>'
            )
        for p in data["points"]:
            px, py = at(p["x"], p["y"])
            parts.append(_marker(px, py, p["category"], name_a, name_b))
    else:
        left, right = cx - 0.1 * SIZE, cx + 0.1 * SIZE
        parts.append(
            f'<line x1="{cx}" y1="{MARGIN}" x2="{cx}" y2="{cy}" '
            'stroke="#999"/>'
        )
        for z in data["zones"]:
            _, zy = at(0, z["max_distance_m"])
            parts.append(
                f'<line x1="{left}" y1="{zy:.1f}" x2="{right}" y2="{zy:.1f}" '
                'stroke="#c66" stroke-dasharray="4 3"/>'
                f'<text x="{right + 4:.1f}" y="{zy - 3:.1f}" font-size="11" '
                f'fill="#555">{z["name"]} ({z["max_distance_m"]:g} m)</text>'
            )
        for p in data["points"]:
            px, py = at(p["x"], p["y"])
            parts.append(_marker(px, py, p["category"], name_a, name_b))
    # ego marker and legend
    parts.append(
        f'<rect x="{cx - 6:.1f}" y="{cy - 3:.1f}" width="12" height="18" '
        'rx="3" fill="#222"/>'
    )
    legend = (
        (COLOR_BOTH_MISSED, "overlooked by both"),
        (COLOR_A, f"detected only by {name_a}"),
        (COLOR_B, f"detected only by {name_b}"),
    )
    for i, (color, label) in enumerate(legend):
        y = MARGIN + 16 * i
        parts.append(
            f'<circle cx="{MARGIN}" cy="{y}" r="4" fill="{color}"/>'
            f'<text x="{MARGIN + 10}" y="{y + 4}" font-size="12" '
            f'fill="#333">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def birdseye_export(report, max_radius=None):
    """(svg_text, point_dict) pair for a consequence report."""
    return birdseye_svg(report, max_radius), birdseye_points(report, max_radius)

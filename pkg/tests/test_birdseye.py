import json
import math

from costsight import birdseye_export, birdseye_points, birdseye_svg
from costsight.consequence import (
    BirdseyePoint,
    ConsequenceReport,
    PixelPrecision,
    ZoneTally,
)


def make_report(points):
    return ConsequenceReport(
        threshold=0.5,
        zones=(
            ZoneTally("30kmh", 20.6),
            ZoneTally("50kmh", 46.5),
        ),
        precision_a=PixelPrecision(10, 2),
        precision_b=PixelPrecision(9, 1),
        points=tuple(points),
        rule_names=("passenger", "robot"),
    )


def point(distance, bearing, category):
    return BirdseyePoint(
        image_id="img", instance_id=1, distance_m=distance,
        bearing_deg=bearing, category=category, recall_a=0.2, recall_b=0.1,
    )


class TestPoints:
    def test_empty_report(self):
        data = birdseye_points(make_report([]))
        assert data["points"] == []
        assert data["layout"] == "wedge"
        assert [z["name"] for z in data["zones"]] == ["30kmh", "50kmh"]

    def test_polar_to_cartesian_oracle(self):
        pts = [point(10.0, 0.0, "overlooked_both"),
               point(20.0, 30.0, "only_a"),
               point(40.0, -15.0, "only_b")]
        data = birdseye_points(make_report(pts))
        for raw, out in zip(pts, data["points"]):
            rad = math.radians(raw.bearing_deg)
            assert out["x"] == raw.distance_m * math.sin(rad)
            assert out["y"] == raw.distance_m * math.cos(rad)

    def test_centre_line_point(self):
        data = birdseye_points(make_report([point(10.0, 0.0,
                                                  "overlooked_both")]))
        assert data["points"][0]["x"] == 0.0
        assert data["points"][0]["y"] == 10.0

    def test_detected_by_both_not_plotted(self):
        data = birdseye_points(make_report([point(5.0, 0.0, "detected_both")]))
        assert data["points"] == []

    def test_missing_bearing_falls_back_to_strip(self):
        data = birdseye_points(make_report([point(5.0, None, "only_a")]))
        assert data["layout"] == "strip"
        assert data["points"][0]["y"] == 5.0

    def test_json_serializable(self):
        data = birdseye_points(make_report([point(5.0, 1.0, "only_b")]))
        json.dumps(data)


class TestSvg:
    def test_empty_report_draws_wedge_and_zones(self):
        svg = birdseye_svg(make_report([]))
        assert svg.startswith("<svg")
        assert svg.count("<path") == 3  # outer wedge + two zone sectors
        assert "circle" in svg  # legend markers only
        assert "30kmh" in svg and "50kmh" in svg

    def test_cross_inside_inner_arc(self):
        svg = birdseye_svg(make_report([point(10.0, 0.0, "overlooked_both")]))
        assert svg.count("<line") >= 2

    def test_marker_count_matches_categories(self):
        pts = [point(10.0, 0.0, "only_a"), point(12.0, 3.0, "only_b"),
               point(30.0, -9.0, "only_a")]
        svg = birdseye_svg(make_report(pts))
        # 3 data dots + 3 legend dots
        assert svg.count("<circle") == 6

    def test_strip_fallback_renders(self):
        svg = birdseye_svg(make_report([point(5.0, None, "only_a")]))
        assert "dasharray" in svg

    def test_export_pairs_svg_and_points(self):
        svg, data = birdseye_export(make_report([point(8.0, 2.0, "only_a")]))
        assert svg.startswith("<svg")
        assert len(data["points"]) == 1

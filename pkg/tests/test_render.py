import os
import xml.etree.ElementTree as ET

from absim.chart_io import ChartFeatureSet
from absim.config import load_scenario
from absim.render import render_svg
from absim.sim_engine import prepare_route, run_scenario
from absim.waterway_graph import PlannedRoute

from conftest import DATA, scenario_path

NS = "{http://www.w3.org/2000/svg}"


def test_empty_chart_two_point_route():
    route = PlannedRoute(((0.0, 0.0), (100.0, 50.0)), (0.0, 0.0))
    root = ET.fromstring(render_svg(ChartFeatureSet({}), route))
    lines = root.findall(f".//{NS}polyline")
    assert [el.get("class") for el in lines] == ["route"]
    assert len(root.findall(f".//{NS}rect[@class='marker start']")) == 1
    assert len(root.findall(f".//{NS}circle[@class='marker end']")) == 1
    assert root.findall(f".//{NS}g") == []


def test_deterministic_and_layer_order():
    cfg = load_scenario(scenario_path("headon_colav.json"))
    res = run_scenario(cfg)
    a = render_svg(res.chart, res.route, res.log)
    assert a == render_svg(res.chart, res.route, res.log)
    classes = [el.get("class") for el in ET.fromstring(a) if el.get("class")]
    assert classes == ["route", "trajectory", "target", "marker start", "marker end"]


def test_golden_synthetic_chart():
    cfg = load_scenario(scenario_path("ghent_synthetic.json"))
    route, chart, _ = prepare_route(cfg)
    with open(os.path.join(DATA, "ghent_render.svg")) as f:
        assert render_svg(chart, route) == f.read()
    groups = [el.get("class") for el in ET.fromstring(render_svg(chart, route))]
    assert groups[:5] == [None, "land", "depth", "bridge", "axes"]

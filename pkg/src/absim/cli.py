"""Command-line entry point.

    absim run SCENARIO... [--out DIR] [--render/--no-render] [--quiet] [--jobs N]
    absim plan SCENARIO --out route.geojson
    absim validate SCENARIO...

Exit codes: 0 ok, 1 scenario error, 2 planning error, 3 model fault.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from absim._util import atomic_write
from absim.chart_io import ChartError
from absim.config import ScenarioError, load_scenario
from absim.render import render_svg
from absim.sim_engine import prepare_route, run_scenario
from absim.waterway_graph import PlanningError

EXIT_OK, EXIT_SCENARIO, EXIT_PLANNING, EXIT_FAULT = 0, 1, 2, 3
OUTPUT_FILES = ("trajectory.csv", "metrics.json", "route.geojson", "render.svg")
_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
           "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("absim")


def _setup_logging(quiet):
    level = _LEVELS.get(os.environ.get("ABSIM_LOG", "warn").lower(), logging.WARNING)
    if quiet:
        level = max(level, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(level)


def trajectory_csv(simlog):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(simlog.csv_header())
    for row in simlog.csv_rows():
        w.writerow(["%.9g" % (v + 0.0) for v in row])  # no "-0"
    return buf.getvalue()


def route_geojson(route):
    return json.dumps(route.to_geojson(), indent=1) + "\n"


def write_outputs(result, out_dir, render=True):
    """Write the run files into ``out_dir``; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    docs = {
        "trajectory.csv": trajectory_csv(result.log),
        "metrics.json": json.dumps(result.metrics.to_dict() if result.metrics else
                                   {"outcome": result.log.outcome}, indent=1) + "\n",
        "route.geojson": route_geojson(result.route),
    }
    if render:
        docs["render.svg"] = render_svg(result.chart, result.route, result.log)
    for name, text in docs.items():
        path = os.path.join(out_dir, name)
        atomic_write(path, text)
        paths[name] = path
    return paths


def _run_one(path, out_dir, render):
    """(exit code, message) for one scenario; safe to call in a worker."""
    try:
        cfg = load_scenario(path)
        result = run_scenario(cfg)
    except (ScenarioError, ChartError) as exc:
        return EXIT_SCENARIO, f"{path}: scenario error: {exc}"
    except PlanningError as exc:
        return EXIT_PLANNING, f"{path}: planning error: {exc}"
    write_outputs(result, out_dir, render)
    m = result.metrics
    if result.log.outcome == "fault":
        return EXIT_FAULT, f"{path}: model fault after {len(result.log)} steps (partial outputs in {out_dir})"
    msg = f"{path}: {result.log.outcome} in {len(result.log)} steps"
    if m is not None:
        msg += f", D_actual={m.D_actual:.1f} m, CXTE={m.CXTE:.1f} m*s"
    return EXIT_OK, msg


def cmd_run(args):
    paths = args.scenario
    if len(paths) == 1:
        outs = [args.out]
    else:
        outs = [os.path.join(args.out, os.path.splitext(os.path.basename(p))[0]) for p in paths]
    jobs = [(p, o, args.render) for p, o in zip(paths, outs)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_run_one, *zip(*jobs)))
    else:
        results = [_run_one(*j) for j in jobs]
    code = EXIT_OK
    for rc, msg in results:
        if rc == EXIT_OK:
            if not args.quiet:
                print(msg)
        else:
            print(msg, file=sys.stderr)
        code = max(code, rc)
    return code


def cmd_plan(args):
    try:
        cfg = load_scenario(args.scenario)
        route, _, _ = prepare_route(cfg)
    except (ScenarioError, ChartError) as exc:
        print(f"{args.scenario}: scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except PlanningError as exc:
        print(f"{args.scenario}: planning error: {exc}", file=sys.stderr)
        return EXIT_PLANNING
    atomic_write(args.out, route_geojson(route))
    if not args.quiet:
        print(f"{args.out}: {len(route.path_points)} points, {route.cost:.1f} m")
    return EXIT_OK


def cmd_validate(args):
    code = EXIT_OK
    for path in args.scenario:
        try:
            cfg = load_scenario(path)
            if cfg.chart_path and not os.path.exists(cfg.chart_path):
                raise ScenarioError(f"chart not found: {cfg.chart_path}")
        except ScenarioError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            code = EXIT_SCENARIO
            continue
        if not args.quiet:
            print(f"{path}: ok")
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="absim", description="Inland vessel GNC simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate scenarios and write outputs")
    r.add_argument("scenario", nargs="+")
    r.add_argument("--out", default="out", help="output directory (one subdirectory per scenario when several)")
    r.add_argument("--render", dest="render", action="store_true", default=True,
                   help="write render.svg (default)")
    r.add_argument("--no-render", dest="render", action="store_false")
    r.add_argument("--quiet", action="store_true")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("plan", help="plan the route only")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_plan)

    v = sub.add_parser("validate", help="check scenario files without running")
    v.add_argument("scenario", nargs="+")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    _setup_logging(getattr(args, "quiet", False))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

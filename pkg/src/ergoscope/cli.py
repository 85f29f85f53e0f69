"""Command-line driver.

    ergoscope <sample|voxelize|isosurface|ehem|evaluate|optimize> --config PATH
              [--seed N] [--out DIR] [--workers N] [--print-config]

Exit codes: 0 success, 2 config error, 3 degenerate workspace, 4 numerical failure.
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .config import load_config
from .ehem import mirror_ehem, sample_ehem
from .errors import ErgoscopeError
from .interaction import combine_dual_arm
from .optimizer import analyze_design, optimize
from .workspace import (VoxelGrid, extract_isosurface, minimum_pair_distance, sample_workspace,
                        threshold_filter, voxelize)

log = logging.getLogger("ergoscope")

COMMANDS = ("sample", "voxelize", "isosurface", "ehem", "evaluate", "optimize")


class Artifacts:
    """Writes files into the output directory; removes them all if the run fails."""

    def __init__(self, directory, prov):
        self.directory = os.path.abspath(directory)
        self.prov = prov
        self.written = []

    def path(self, name):
        if os.path.basename(name) != name:
            raise ValueError(f"artifact name {name!r} must be a bare file name")
        return os.path.join(self.directory, name)

    def write(self, name, writer, *args):
        os.makedirs(self.directory, exist_ok=True)
        final = self.path(name)
        tmp = final + ".part"
        self.written.append(tmp)
        writer(tmp, *args, self.prov)
        os.replace(tmp, final)
        self.written[-1] = final
        log.info("wrote %s", final)
        return final

    def write_text(self, name, text):
        def writer(path, body, prov):
            with open(path, "w") as fh:
                fh.write(body)
        return self.write(name, writer, text)

    def discard(self):
        for p in self.written:
            if os.path.exists(p):
                os.remove(p)
        self.written.clear()


def _scatter(cfg):
    s = cfg.section("sampling")
    return sample_workspace(cfg.manipulator(), s["n_samples"], s["seed"], cfg.dexterity(), s["workers"])


def _voxel_size(cfg, scatter):
    s = cfg.section("sampling")
    return minimum_pair_distance(scatter) if s["r_auto"] else s["r"]


def cmd_sample(cfg, out, args):
    out.write("scatter.csv", io.write_scatter_csv, _scatter(cfg))


def cmd_voxelize(cfg, out, args):
    scatter = threshold_filter(_scatter(cfg), cfg.section("dexterity")["tau"])
    out.write("workspace.grid", io.write_grid, voxelize(scatter, _voxel_size(cfg, scatter)))


def _write_mesh(cfg, out, mesh):
    if not len(mesh):
        log.warning("isosurface is empty at isovalue %s", cfg.section("isosurface")["isovalue"])
    for fmt in cfg.section("output")["mesh_formats"]:
        writer = io.write_ply if fmt == "ply" else io.write_obj
        out.write(f"isosurface.{fmt}", writer, mesh)


def cmd_isosurface(cfg, out, args):
    if args.grid:
        grid = io.read_grid(args.grid)
    else:
        scatter = _scatter(cfg)
        lay = cfg.section("layout")
        grid = combine_dual_arm(voxelize(scatter, _voxel_size(cfg, scatter)), cfg.layout(), lay["binarize"])
    _write_mesh(cfg, out, extract_isosurface(grid, cfg.section("isosurface")["isovalue"]))


def cmd_ehem(cfg, out, args):
    e, s = cfg.section("ehem"), cfg.section("sampling")
    left = cfg.ehem()
    right = mirror_ehem(left, e["mirror_plane"])
    (lo_l, hi_l), (lo_r, hi_r) = left.bounds(), right.bounds()
    lo, hi = np.minimum(lo_l, lo_r), np.maximum(hi_l, hi_r)
    r = s["r"]
    dims = tuple(int(n) for n in np.floor((hi - lo) / r).astype(int) + 1)
    template = VoxelGrid(lo + 0.5 * r, r, np.zeros(dims))
    for name, model in (("ehem_left.grid", left), ("ehem_right.grid", right)):
        field = sample_ehem(model, e["n_samples"], s["seed"], template, s["workers"])
        out.write(name, io.write_grid, field.grid)


def _params(cfg):
    s, lay = cfg.section("sampling"), cfg.section("layout")
    return {"K": cfg.section("dexterity")["K"], "tau": cfg.section("dexterity")["tau"],
            "r": s["r"], "r_auto": s["r_auto"], "n_samples": s["n_samples"],
            "ehem_samples": cfg.section("ehem")["n_samples"], "R": list(lay["R"]),
            "alpha": lay["alpha"], "binarize": lay["binarize"], "interaction_tau": lay["interaction_tau"],
            "convention": cfg.section("manipulator")["convention"]}


def cmd_evaluate(cfg, out, args):
    design = cfg.design()
    result = analyze_design(design, cfg.eval_config())
    out.write_text("evaluate.txt", io.format_evaluate_report(design, result, _params(cfg), out.prov))
    out.write("interaction.grid", io.write_grid, result.v_interaction)


def cmd_optimize(cfg, out, args):
    problem = cfg.problem()
    result = optimize(problem)
    model = cfg.manipulator()
    out.write_text("optimize.txt", io.format_optimize_report(result, model, problem.strategy,
                                                             problem.budget, out.prov))
    best = analyze_design(result.best, problem.eval_config)
    out.write_text("best_evaluate.txt", io.format_evaluate_report(result.best, best, _params(cfg), out.prov))
    out.write("best_interaction.grid", io.write_grid, best.v_interaction)


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser():
    parser = argparse.ArgumentParser(prog="ergoscope", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--seed", type=int, help="override sampling.seed")
    parser.add_argument("--out", help="override output.directory")
    parser.add_argument("--workers", type=int, help="override sampling.workers")
    parser.add_argument("--grid", help="isosurface: read this grid file instead of sampling")
    parser.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.out, args.workers)
    except ErgoscopeError as exc:
        print(f"ergoscope: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.print_config:
        sys.stdout.write(cfg.dump())
        return 0
    out = Artifacts(cfg.section("output")["directory"],
                    io.provenance(cfg.digest(), cfg.section("sampling")["seed"]))
    try:
        HANDLERS[args.command](cfg, out, args)
    except ErgoscopeError as exc:
        out.discard()
        print(f"ergoscope: {exc}", file=sys.stderr)
        return exc.exit_code
    except BaseException:
        out.discard()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())

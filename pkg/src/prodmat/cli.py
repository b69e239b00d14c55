"""Command line entry point: ``prodmat <command> [--config FILE] [--seed S] [--out PATH] [--format csv|json]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import acceptance
from . import harness as H
from . import kernels as K
from .planepart import SkewShape, SliceSelection, marginal_extract, sample_plane_partitions
from .rmt import ProcessParams, rng_stream, sample_product_process

COMMANDS = ("sample-product", "sample-pp", "kernel-eval", "moments", "limit-test", "selftest", "emit")


def _process_params(block: dict) -> ProcessParams:
    try:
        return ProcessParams(block["n"], block["p"], block["l"], tuple(block["m"]), tuple(block["nu"]))
    except KeyError as exc:
        raise SystemExit(f"config params need n, p, l, m and nu; missing {exc}") from None


def _shape(block: dict) -> SkewShape:
    return SkewShape(block["A"], block["B"], tuple(block.get("pi", ())))


def _write_table(cfg: H.RunConfig, header: list[str], rows, extra: dict | None = None) -> None:
    """Data tables go to --out (stdout when absent) as CSV or JSON."""
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
    else:
        doc = {"config_hash": cfg.digest(), "columns": header, "rows": [list(r) for r in rows]}
        doc.update(extra or {})
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit(cfg: H.RunConfig, reports) -> None:
    if cfg.out is None:
        raise SystemExit("--out is required for report output")
    H.emit_results(reports, cfg.format, cfg.out, config=cfg, timing=cfg.timing)


def cmd_sample_product(cfg: H.RunConfig) -> int:
    params = _process_params(cfg.params)
    x = sample_product_process(params, rng_stream(cfg.seed), cfg.N)
    rows = [(s, lvl + 1, j + 1, float(x[s, lvl, j])) for s in range(cfg.N) for lvl in range(params.p) for j in range(params.n)]
    _write_table(cfg, ["sample", "level", "index", "value"], rows)
    return 0


def cmd_sample_pp(cfg: H.RunConfig) -> int:
    shape, q = _shape(cfg.params), float(cfg.params["q"])
    fill = sample_plane_partitions(
        shape, q, cfg.N, rng=rng_stream(cfg.seed), burn_in=cfg.burn_in, thin=cfg.thin, chains=cfg.params.get("chains")
    )
    if "alphas" in cfg.params:
        slices = SliceSelection(tuple(cfg.params["alphas"]))
        pts = marginal_extract(fill, slices, q, shape)
        rows = [
            (s, a, j + 1, float(pts[s, k, j]))
            for s in range(cfg.N)
            for k, a in enumerate(slices.alphas)
            for j in range(pts.shape[2])
        ]
        _write_table(cfg, ["sample", "slice", "index", "point"], rows)
    else:
        rows = [(s, i, j, int(fill[s, i, j])) for s in range(cfg.N) for i in range(shape.A) for j in range(shape.B)]
        _write_table(cfg, ["sample", "row", "col", "entry"], rows)
    return 0


def cmd_kernel_eval(cfg: H.RunConfig) -> int:
    params = _process_params(cfg.params)
    kind = cfg.params.get("kind", "contour")
    ker = K.kernel_handle(params, kind)
    rows = []
    for r, x, s, y in cfg.params.get("points", []):
        K.KernelQuery(int(r), float(x), int(s), float(y)).check(params)
        rows.append((int(r), float(x), int(s), float(y), float(ker(int(r), float(x), int(s), float(y)))))
    _write_table(cfg, ["r", "x", "s", "y", "kernel"], rows)
    return 0


def cmd_moments(cfg: H.RunConfig) -> int:
    mus = cfg.params.get("mus", [cfg.params.get("mu", [1, 0])])
    factors = int(cfg.params.get("factors", 1))
    reports = [H.run_moment_test(tuple(mu), factors, cfg.N, seed=cfg.seed + k) for k, mu in enumerate(mus)]
    _emit(cfg, reports)
    return 0 if all(r.passed for r in reports) else 1


def cmd_limit_test(cfg: H.RunConfig) -> int:
    shape = _shape(cfg.params)
    slices = SliceSelection(tuple(cfg.params["alphas"]))
    q_list = tuple(cfg.params.get("q_list", (0.8, 0.9, 0.95)))
    report = H.run_limit_theorem_test(
        shape,
        slices,
        q_list,
        cfg.N,
        seed=cfg.seed,
        burn_in=cfg.burn_in,
        thin=cfg.thin,
        chains=int(cfg.params.get("chains", 2000)),
        resamples=int(cfg.params.get("resamples", 1000)),
    )
    _emit(cfg, [report])
    return 0 if report.passed else 1


def cmd_selftest(cfg: H.RunConfig) -> int:
    which = cfg.params.get("criteria") or sorted(acceptance.CRITERIA)
    reports = []
    for k in which:
        batch = acceptance.CRITERIA[int(k)]()
        ok = all(r.passed for r in batch)
        failed = "; ".join(f"{r.name}={r.statistic:.3g}" for r in batch if not r.passed)
        print(f"{'PASS' if ok else 'FAIL'} criterion {k} ({len(batch)} checks){': ' + failed if failed else ''}", flush=True)
        reports += batch
    if cfg.out is not None:
        _emit(cfg, reports)
    return 0 if all(r.passed for r in reports) else 1


def cmd_emit(cfg: H.RunConfig) -> int:
    src = cfg.params.get("input")
    if src is None:
        raise SystemExit("emit needs params.input (a results file) and params.input_format")
    reports = H.load_results(src, cfg.params.get("input_format", "csv"))
    _emit(cfg, reports)
    return 0


HANDLERS = {
    "sample-product": cmd_sample_product,
    "sample-pp": cmd_sample_pp,
    "kernel-eval": cmd_kernel_eval,
    "moments": cmd_moments,
    "limit-test": cmd_limit_test,
    "selftest": cmd_selftest,
    "emit": cmd_emit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodmat", description="Truncated unitary products and plane partitions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON RunConfig document")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        p.add_argument("--out", help="output path (data tables default to stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--N", type=int, help="sample count")
        p.add_argument("--params", help="inline JSON object merged over the config's params block")
        p.add_argument("--no-timing", dest="timing", action="store_const", const=False, help="write runtime_ms as 0")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "out": args.out, "format": args.format, "N": args.N, "timing": args.timing}
    cfg = H.RunConfig.from_json(args.config, **overrides)
    if args.params:
        cfg.params = {**cfg.params, **json.loads(args.params)}
    return HANDLERS[args.command](cfg)


if __name__ == "__main__":
    raise SystemExit(main())

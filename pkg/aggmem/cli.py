"""
Command-line front end.

    python -m aggmem persistence --beta 2 3
    python -m aggmem moments --uniform -K 50 | python -m aggmem ar-coeffs --from-moments -

Every command prints a '# {...}' JSON header with the resolved command, spec,
K and seed before its data. Exit codes: 0 success, 1 bad input, 2 numerical
integrity failure.
"""
import argparse
import contextlib
import json
import logging
import sys
from typing import IO, Any, Dict, Iterator, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.table import Table

from aggmem import __version__, complexfn, crud, densities, diagnostics, panel_sim, thresholds, wold_map
from aggmem.config import get_log_level, resolve_seed
from aggmem.database import get_session_local, init_db
from aggmem.errors import AggregationError, DomainError, SpecValidationError
from aggmem.schemas import (
    BetaSpec,
    DiracSpec,
    DistributionSpec,
    PanelConfig,
    PolynomialSpec,
    RunCreate,
    RunResponse,
    UniformSpec,
    parse_spec,
    spec_to_dict,
)
from aggmem.utils import (
    format_header,
    load_panel_config,
    parse_float_list,
    read_moments_csv,
    round_floats,
    significant,
    write_csv,
)

logger = logging.getLogger("aggmem.cli")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_NUMERICAL = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Spec and header helpers

def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(loc) for loc in item["loc"]) or "spec"
        parts.append(f"{where}: {item['msg']}")
    return "invalid input: " + "; ".join(parts)


def _spec_validation_error(error: ValidationError) -> SpecValidationError:
    first = error.errors()[0] if error.errors() else None
    invariant = ".".join(str(loc) for loc in first["loc"]) if first else None
    return SpecValidationError(_validation_message(error), invariant=invariant or None)


def spec_from_args(args: argparse.Namespace) -> Optional[DistributionSpec]:
    """Spec from --beta/--uniform/--poly/--dirac/--spec, validated before any work"""
    if args.beta is not None:
        return BetaSpec(p=args.beta[0], q=args.beta[1])
    if args.uniform:
        return UniformSpec()
    if args.poly is not None:
        return PolynomialSpec(c=parse_float_list(args.poly))
    if args.dirac is not None:
        return DiracSpec(phi0=args.dirac)
    if args.spec is not None:
        with open(args.spec, encoding="utf-8") as f:
            return parse_spec(json.load(f))
    return None


def _require_spec(args: argparse.Namespace) -> DistributionSpec:
    spec = spec_from_args(args)
    if spec is None:
        raise DomainError("a spec is required: --beta P Q | --uniform | --poly c0,c1,... | --dirac PHI0 | --spec FILE.json")
    return spec


def _header(args: argparse.Namespace, spec: Any, K: Optional[int], **extra) -> str:
    seed, _ = resolve_seed(args.seed)
    header: Dict[str, Any] = {
        "command": args.command,
        "spec": spec if isinstance(spec, dict) or spec is None else spec_to_dict(spec),
        "K": K,
        "seed": seed,
    }
    header.update(extra)
    return format_header(header)


def _emit_json(out: IO[str], payload: Any):
    out.write(json.dumps(round_floats(payload), indent=2) + "\n")


def _console(out: IO[str]) -> Console:
    return Console(file=out, width=110, color_system=None, highlight=False)


def _record(command: str, spec: DistributionSpec, config: Dict[str, Any], seed: int, seed_source: str,
            n_units: Optional[int], n_periods: Optional[int], summary: Dict[str, Any]):
    init_db()
    db = get_session_local()()
    try:
        run = crud.record_run(db, RunCreate(
            command=command, spec_json=json.dumps(spec_to_dict(spec)), config_json=json.dumps(config),
            seed=seed, seed_source=seed_source, n_units=n_units, n_periods=n_periods,
            summary_json=json.dumps(round_floats(summary)),
        ))
        return run.id
    finally:
        db.close()


# ---------------------------------------------------------------------------
# Commands

def cmd_moments(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    u = densities.moments(spec, args.K)
    out.write(_header(args, spec, args.K) + "\n")
    if args.format == "json":
        _emit_json(out, {"exactness": u.exactness, "u": u.u[1:].tolist()})
    else:
        write_csv(out, ["k", "u_k"], u.to_rows())
    return EXIT_OK


def cmd_ar_coeffs(args, out: IO[str]) -> int:
    if args.from_moments is not None:
        stream = sys.stdin if args.from_moments == "-" else open(args.from_moments, encoding="utf-8")
        try:
            source_header, u = read_moments_csv(stream)
        finally:
            if stream is not sys.stdin:
                stream.close()
        source_header = source_header or {}
        spec, K = source_header.get("spec"), source_header.get("K", u.K)
    else:
        spec = _require_spec(args)
        K = args.K
        u = densities.moments(spec, K)

    a = wold_map.ar_from_ma(u)
    out.write(_header(args, spec, K) + "\n")
    if args.format == "json":
        payload = {"a": a.a.tolist()}
        if args.partial_sums:
            payload["S"] = a.partial_sums.tolist()
        _emit_json(out, payload)
    elif args.partial_sums:
        write_csv(out, ["k", "a_k", "S_k"], a.to_rows())
    else:
        write_csv(out, ["k", "a_k"], [(k, ak) for k, ak, _ in a.to_rows()])
    return EXIT_OK


def cmd_persistence(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    report = wold_map.persistence_report(spec)
    out.write(_header(args, spec, None) + "\n")
    _emit_json(out, report.model_dump(mode="json"))
    return EXIT_OK


def cmd_gf_eval(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    points = np.array(args.z, dtype=complex) if args.z else complexfn.default_disc_grid()
    out.write(_header(args, spec, args.K if args.method == "series" else None, method=args.method) + "\n")

    if args.method == "series":
        u = densities.moments(spec, args.K)
        rows = []
        for z in points:
            m = complexfn.m_series(u, complex(z))
            a = m.value / (1.0 + m.value)
            rows.append((z.real, z.imag, m.value.real, m.value.imag, a.real, a.imag, m.remainder_bound))
        columns = ["re_z", "im_z", "re_m", "im_m", "re_a", "im_a", "remainder_bound"]
    else:
        rows = complexfn.grid_sweep(spec, points).tolist()
        columns = ["re_z", "im_z", "re_m", "im_m", "re_a", "im_a"]

    if args.format == "json":
        _emit_json(out, [dict(zip(columns, row)) for row in rows])
    else:
        write_csv(out, columns, rows)
    return EXIT_OK


def cmd_abel(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    table = complexfn.abel_limit(spec)
    out.write(_header(args, spec, None) + "\n")
    rows = [(int(j), r, a, m) for j, r, a, m in zip(table.levels, table.r, table.a_r, table.m_r)]
    if args.format == "json":
        _emit_json(out, {
            "table": [dict(zip(["j", "r_j", "a_r", "m_r"], row)) for row in rows],
            "estimate": table.estimate, "method": table.method, "monotone": table.monotone,
        })
    else:
        write_csv(out, ["j", "r_j", "a_r", "m_r"], rows)
        out.write(format_header({"estimate": table.estimate, "method": table.method}) + "\n")
    return EXIT_OK


def cmd_verify(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    checks = diagnostics.property_battery(spec, args.K)
    out.write(_header(args, spec, args.K) + "\n")

    if args.format == "json":
        _emit_json(out, checks)
    else:
        table = Table(title=f"Property checks: {spec.describe()}", box=box.SIMPLE)
        table.add_column("Check")
        table.add_column("Result")
        table.add_column("Detail")
        for check in checks:
            table.add_row(check["check"], "PASS" if check["passed"] else "FAIL", check["detail"])
        _console(out).print(table)

    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_NUMERICAL


def _panel_config(args) -> PanelConfig:
    data: Dict[str, Any] = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            data = load_panel_config(f.read())

    spec = spec_from_args(args)
    if spec is not None:
        data["spec"] = spec
    if "spec" not in data:
        raise DomainError("a spec is required, from the flags or the config file")

    for key, value in (("N", args.N), ("T", args.T), ("burn_in", args.burn_in),
                       ("sigma_eps", args.sigma_eps), ("sigma_eta", args.sigma_eta)):
        if value is not None:
            data[key] = value
    data.setdefault("N", 1000)
    data.setdefault("T", 1000)

    if args.seed is not None or "seed" not in data:
        seed, source = resolve_seed(args.seed)
        data["seed"], data["seed_source"] = seed, source
    else:
        data["seed_source"] = "config"
    return PanelConfig(**data)


def cmd_simulate(args, out: IO[str]) -> int:
    cfg = _panel_config(args)
    run = panel_sim.simulate_panel(cfg, workers=args.workers)
    config = cfg.model_dump(mode="json", exclude={"spec"})
    out.write(format_header({"command": args.command, "spec": spec_to_dict(cfg.spec), "K": None,
                             "seed": cfg.seed, "seed_source": cfg.seed_source, "config": config,
                             "burn_in_max": run.burn_in_max}) + "\n")

    if args.format == "json":
        _emit_json(out, {"aggregate": run.aggregate.tolist(), "provenance": run.provenance()})
    else:
        write_csv(out, ["t", "X"], zip(range(1, cfg.T + 1), run.aggregate.tolist()))

    if args.record:
        summary = {"mean": float(np.mean(run.aggregate)), "variance": float(np.var(run.aggregate)),
                   "burn_in_max": run.burn_in_max}
        run_id = _record(args.command, cfg.spec, config, cfg.seed, cfg.seed_source, cfg.N, cfg.T, summary)
        logger.info("simulation recorded as run %d", run_id)
    return EXIT_OK


def cmd_study(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    seed, source = resolve_seed(args.seed)
    seeds = [int(s) for s in parse_float_list(args.seeds)] if args.seeds else [seed, seed + 1]
    N_list = [int(n) for n in parse_float_list(args.N_list)]
    sigma_eps = 0.0 if args.sigma_eps is None else args.sigma_eps
    sigma_eta = 1.0 if args.sigma_eta is None else args.sigma_eta
    burn_in = thresholds.DEFAULT_BURN_IN if args.burn_in is None else args.burn_in

    report = panel_sim.aggregation_convergence_study(
        spec, N_list, args.T or 1000, seeds, sigma_eps=sigma_eps, sigma_eta=sigma_eta,
        burn_in=burn_in, workers=args.workers,
    )
    out.write(_header(args, spec, None, seeds=seeds) + "\n")
    payload = report.model_dump(mode="json")
    _emit_json(out, payload)

    if args.record:
        config = {"N_list": N_list, "T": report.T, "seeds": seeds, "sigma_eps": sigma_eps,
                  "sigma_eta": sigma_eta, "burn_in": burn_in}
        summary = {"loglog_slope": report.loglog_slope, "common_variance": report.common_variance}
        _record(args.command, spec, config, seed, source, max(N_list), report.T, summary)
    return EXIT_OK


def _render_report(report, out: IO[str]):
    console = _console(out)
    table = Table(title=f"Memory report: {report.spec.describe()}", box=box.SIMPLE, show_header=False)
    table.add_column("Item")
    table.add_column("Value")
    table.add_row("memory class", report.memory_class.value if report.memory_class else "indeterminate")
    table.add_row("persistence a(1)", "n/a" if report.persistence is None else f"{significant(report.persistence)!r}")
    for K, S in report.partial_sums.items():
        table.add_row(f"S_{K}", repr(significant(S)))
    for n, value in report.cesaro.items():
        table.add_row(f"Cesaro n={n}", repr(significant(value)))
    if report.abel is not None:
        table.add_row("Abel estimate", f"{significant(report.abel.estimate)!r} ({report.abel.method})")
    table.add_row("Hausdorff J=10", "pass" if report.hausdorff.passed else "fail")
    for name, state in report.channels.items():
        table.add_row(f"channel {name}", state)
    table.add_row("verdict", report.verdict)
    console.print(table)


def cmd_report(args, out: IO[str]) -> int:
    spec = _require_spec(args)
    report = diagnostics.memory_report(spec, args.K)
    out.write(_header(args, spec, args.K) + "\n")
    if args.format == "json":
        _emit_json(out, report.model_dump(mode="json"))
    else:
        _render_report(report, out)
    if args.truncation:
        gap = diagnostics.truncation_gap(spec, args.truncation)
        if args.format == "json":
            _emit_json(out, gap.to_dict())
        else:
            out.write(f"truncation K={gap.K}: gap {significant(gap.gap)!r}, gap to a(1) "
                      f"{significant(gap.gap_to_persistence)!r}, discrepancy {significant(gap.discrepancy)!r}\n")
    return EXIT_OK


def cmd_runs(args, out: IO[str]) -> int:
    init_db()
    db = get_session_local()()
    try:
        if args.delete is not None:
            if not crud.delete_run(db, args.delete):
                raise DomainError(f"run with id {args.delete} not found")
            out.write(json.dumps({"deleted": args.delete}) + "\n")
            return EXIT_OK
        runs = crud.get_runs(db, limit=args.limit, command=args.filter)
        logger.info("listing %d of %d recorded runs", len(runs), crud.count_runs(db, command=args.filter))
        payload = [RunResponse.model_validate(r).model_dump(mode="json") for r in runs]
        out.write(json.dumps(payload, indent=2) + "\n")
    finally:
        db.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser

def _spec_parent() -> ArgumentParser:
    parent = ArgumentParser(add_help=False)
    group = parent.add_mutually_exclusive_group()
    group.add_argument("--beta", nargs=2, type=float, metavar=("P", "Q"), help="Beta(P, Q) mixing law")
    group.add_argument("--uniform", action="store_true", help="uniform mixing law")
    group.add_argument("--poly", metavar="c0,c1,...", help="polynomial density coefficients")
    group.add_argument("--dirac", type=float, metavar="PHI0", help="point mass at PHI0")
    group.add_argument("--spec", metavar="FILE.json", help="spec as a JSON object")
    parent.add_argument("--seed", type=int, help="global seed (default: $AGGMEM_SEED)")
    parent.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    return parent


def _panel_parent() -> ArgumentParser:
    parent = ArgumentParser(add_help=False)
    parent.add_argument("-N", type=int, help="number of units")
    parent.add_argument("-T", type=int, help="number of periods")
    parent.add_argument("--sigma-eps", type=float, help="common shock standard deviation")
    parent.add_argument("--sigma-eta", type=float, help="idiosyncratic shock standard deviation")
    parent.add_argument("--burn-in", type=int, help="minimum burn-in per unit")
    parent.add_argument("--workers", type=int, help="simulation threads (default: $AGGMEM_WORKERS)")
    parent.add_argument("--record", action="store_true", help="write provenance to the run ledger")
    return parent


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="aggmem", description="Aggregation of random AR(1) processes and long memory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="logging level (default: $AGGMEM_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    spec = _spec_parent()
    panel = _panel_parent()
    formats = ("csv", "json")

    p = sub.add_parser("moments", parents=[spec], help="moments u_k of the mixing law")
    p.add_argument("-K", type=int, default=wold_map.DEFAULT_ORDER)
    p.add_argument("--format", choices=formats, default="csv")
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("ar-coeffs", parents=[spec], help="AR coefficients a_k of the limit aggregate")
    p.add_argument("-K", type=int, default=wold_map.DEFAULT_ORDER)
    p.add_argument("--from-moments", metavar="FILE", help="read moments CSV from FILE ('-' for stdin)")
    p.add_argument("--partial-sums", action="store_true", help="add the S_k column")
    p.add_argument("--format", choices=formats, default="csv")
    p.set_defaults(handler=cmd_ar_coeffs)

    p = sub.add_parser("persistence", parents=[spec], help="persistence a(1) and memory class")
    p.set_defaults(handler=cmd_persistence, format="json")

    p = sub.add_parser("gf-eval", parents=[spec], help="m(z) and a(z) on points or the default disc grid")
    p.add_argument("--z", type=complex, action="append", help="evaluation point, e.g. 0.5+0.3j (repeatable)")
    p.add_argument("--method", choices=("integral", "series"), default="integral")
    p.add_argument("-K", type=int, default=wold_map.DEFAULT_ORDER, help="series order")
    p.add_argument("--format", choices=formats, default="csv")
    p.set_defaults(handler=cmd_gf_eval)

    p = sub.add_parser("abel", parents=[spec], help="Abel table a(1 - 2^-j) and extrapolated a(1)")
    p.add_argument("--format", choices=formats, default="csv")
    p.set_defaults(handler=cmd_abel)

    p = sub.add_parser("verify", parents=[spec], help="run the property-check battery")
    p.add_argument("-K", type=int, default=wold_map.DEFAULT_ORDER)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("simulate", parents=[spec, panel], help="simulate the aggregate path")
    p.add_argument("--config", metavar="FILE", help="panel configuration (JSON or key=value)")
    p.add_argument("--format", choices=formats, default="csv")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("study", parents=[spec, panel], help="aggregate variance across cross-section sizes")
    p.add_argument("--N-list", dest="N_list", default="100,1000,10000", metavar="N1,N2,...")
    p.add_argument("--seeds", metavar="S1,S2,...", help="seeds (default: SEED, SEED+1)")
    p.set_defaults(handler=cmd_study, format="json")

    p = sub.add_parser("report", parents=[spec], help="long-memory verdict from every evidence channel")
    p.add_argument("-K", type=int, default=max(diagnostics.CESARO_ORDERS))
    p.add_argument("--truncation", type=int, metavar="K", help="also report the AR(K) truncation gap")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("runs", help="list recorded runs")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--command", dest="filter", metavar="NAME", help="only runs of this command")
    p.add_argument("--delete", type=int, metavar="ID", help="delete a recorded run")
    p.set_defaults(handler=cmd_runs, seed=None, out=None)

    return parser


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def _configure_logging(level: Optional[str]):
    logging.basicConfig(level=get_log_level(level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, dispatch, and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_DOMAIN

    _configure_logging(args.log_level)
    try:
        with _output(args.out) as out:
            return args.handler(args, out)
    except ValidationError as e:
        error = _spec_validation_error(e)
        logger.debug("validation failed on %s", error.invariant)
        print(f"error: {error.detail}", file=sys.stderr)
        return error.exit_code
    except AggregationError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


def main(argv: Optional[List[str]] = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

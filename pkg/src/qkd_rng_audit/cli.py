"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 model or saturation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import rng_models
from .bb84 import game as game_mod
from .bb84.protocol import (
    EveStrategy,
    PartyConfig,
    ProtocolParams,
    ProtocolTranscript,
    Seeds,
    alice_budget,
    run_protocol,
)
from .errors import AuditError, CapacityError
from .rng_models import RngDistribution
from .security_bound import SecurityBudget, bound_report

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "QKD_RNG_AUDIT_SEED"


class UsageError(Exception):
    pass


def fmt(x, digits: int) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return format(x, f".{digits}g")
    if isinstance(x, dict):
        return json.dumps(x, sort_keys=True)
    return str(x)


def emit(record: dict, args) -> str:
    if args.format == "json":
        return json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.format == "csv":
        rest = {k: v for k, v in record.items() if k != "config"}
        buf = io.StringIO()
        if "config" in record:
            buf.write("# config: " + json.dumps(record["config"], sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rest)
        w.writerow(["" if v is None else fmt(v, args.digits) for v in rest.values()])
        return buf.getvalue()
    return "".join(f"{key}: {fmt(val, args.digits)}\n" for key, val in record.items())


def resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from exc


# -- distribution specs --------------------------------------------------------


def parse_dist(spec: str, omega: int | None = None) -> RngDistribution:
    """Read a distribution from a JSON file, inline JSON, or ``kind:key=value,...``.

    Inline kinds: ``uniform``, ``iid_bias`` (``b``), ``markov`` (``initial``,
    ``p01`` = Pr[1 | 0], ``p10`` = Pr[0 | 1]), ``point`` (``atom``) and
    ``explicit`` (``table`` as ``/``-separated values). ``omega`` may be
    omitted when the caller can infer it.
    """
    spec = spec.strip()
    if spec.startswith("{"):
        return rng_models.loads(spec)
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        return rng_models.load(path)
    kind, _, rest = spec.partition(":")
    fields = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"expected key=value in distribution spec, got {item!r}")
        fields[key.strip()] = val.strip()
    if "omega" in fields:
        omega = int(fields.pop("omega"))
    if kind == "point":
        return rng_models.point_mass(fields["atom"])
    if kind == "explicit":
        doc = {"omega": omega, "kind": "explicit", "table": fields["table"].split("/")}
        if omega is None:
            doc["omega"] = int(np.log2(len(doc["table"])))
        return rng_models.from_dict(doc)
    if omega is None:
        raise UsageError(f"distribution spec {spec!r} needs omega=<bits>")
    if kind == "uniform":
        return rng_models.uniform(omega)
    if kind in ("iid_bias", "iid"):
        return rng_models.from_dict({"omega": omega, "kind": "iid_bias", "b": fields["b"]})
    if kind == "markov":
        p01, p10 = rng_models._exact(fields["p01"]), rng_models._exact(fields["p10"])
        return rng_models.from_dict({
            "omega": omega, "kind": "markov", "initial": fields.get("initial", "1/2"),
            "transition": [[str(1 - p01), str(p01)], [str(p10), str(1 - p10)]],
        })
    raise UsageError(f"unknown distribution kind {kind!r}")


def parse_grid(text: str, cast=float) -> list:
    """Comma list, or ``logspace:start:stop:num`` / ``linspace:start:stop:num``."""
    text = text.strip()
    if not text:
        return []
    for name, fn in (("logspace", np.geomspace), ("linspace", np.linspace)):
        if text.startswith(name + ":"):
            try:
                a, b, num = text.split(":")[1:]
                return [cast(v) for v in fn(float(a), float(b), int(num))]
            except ValueError as exc:
                raise UsageError(f"bad {name} grid {text!r}") from exc
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc


# -- commands ---------------------------------------------------------------------


def cmd_entropy(args) -> int:
    d = parse_dist(args.dist, args.omega)
    H = rng_models.entropy(d)
    record = {"config": vars_config(args), "omega": d.omega, "kind": d.kind, "entropy": H, "deficit": rng_models.entropy_deficit(d)}
    sys.stdout.write(emit(record, args))
    return EXIT_OK


def cmd_bound(args) -> int:
    rep = bound_report(SecurityBudget(args.eps0, args.k, args.epsA, args.epsB))
    sys.stdout.write(emit({"config": vars_config(args), **rep.to_dict()}, args))
    if rep.saturated:
        sys.stderr.write("exact-delta bound saturated: entropy deficit >= 2 bits leaves no finite ratio envelope\n")
        return EXIT_MODEL
    return EXIT_OK


SWEEP_COLUMNS = ["eps0", "k", "epsA", "epsB", "leading", "exact", "delta_A", "delta_B", "saturated", "vacuous"]


def cmd_sweep(args) -> int:
    grids = [
        parse_grid(args.eps0),
        parse_grid(args.k, int),
        parse_grid(args.epsA),
        parse_grid(args.epsB),
    ]
    if any(not g for g in grids):
        raise UsageError("every sweep axis needs at least one value")
    rows = []
    for eps0, k, eA, eB in itertools.product(*grids):
        r = bound_report(SecurityBudget(eps0, k, eA, eB))
        rows.append({
            "eps0": eps0, "k": k, "epsA": eA, "epsB": eB, "leading": r.leading, "exact": r.exact,
            "delta_A": r.delta_A, "delta_B": r.delta_B, "saturated": r.saturated, "vacuous": r.vacuous,
        })
    if args.format == "json":
        text = json.dumps({"config": vars_config(args), "rows": rows}, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(vars_config(args), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(["" if row[c] is None else fmt(row[c], args.digits) for c in SWEEP_COLUMNS])
        text = buf.getvalue()
    write_out(args.out, text)
    return EXIT_OK


def vars_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def write_out(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def simulation_config(args) -> dict:
    params = ProtocolParams(
        n=args.n_qubits, k=args.k, test_method=args.test_method, hashing=args.hashing,
        qber_threshold=args.threshold, noise=args.noise,
    )
    alice = parse_dist(args.dist, alice_budget(params))
    bob = parse_dist(args.bob_dist, params.n)
    eve = EveStrategy.parse(args.eve)
    return {
        "params": params.to_dict(),
        "alice_law": alice.to_dict(),
        "bob_law": bob.to_dict(),
        "eve": eve.label,
        "mode": "exact" if args.trials is None else "monte_carlo",
        "trials": args.trials,
        "seed": resolve_seed(args.seed),
        "observable": args.observable,
    }


def run_simulation(config: dict) -> tuple[dict, ProtocolTranscript]:
    """Execute a resolved simulation config; the report and transcript depend on nothing else."""
    params = ProtocolParams(**config["params"])
    alice = rng_models.from_dict(config["alice_law"])
    bob = rng_models.from_dict(config["bob_law"])
    eve = EveStrategy.parse(config["eve"])
    seed = int(config["seed"])
    report: dict = {"config": config}
    if config["mode"] == "exact":
        try:
            res = game_mod.game_g_exact(params, alice, eve, bob_law=bob, seed=seed, observable=config["observable"])
        except CapacityError as exc:
            raise CapacityError(f"{exc}. Re-run with --trials N for the Monte Carlo game") from exc
        chk = game_mod.theorem_check(res, rng_models.entropy_deficit(bob))
        report.update({
            "info": res.info, "h": res.h, "holevo_ceiling": "PASS" if res.holevo_ok else "FAIL",
            "epsilon_A": res.epsilon_A, "epsilon_B": rng_models.entropy_deficit(bob),
            "abort_prob_prng": res.abort_prob0, "abort_prob_irng": res.abort_prob1,
            "observable": res.observable, "injective": res.injective,
            "eve_info_prng": res.epsilon_prime, "eve_info_irng": res.eta,
        })
        if chk is None:
            report["theorem_check"] = "N/A"
        else:
            ok = chk.holds("leading") and chk.holds("exact")
            report.update({
                "bound_leading": chk.leading, "bound_exact": chk.exact,
                "theorem_check": "PASS" if ok else "FAIL",
            })
    else:
        mc = game_mod.game_g_monte_carlo(params, alice, eve, int(config["trials"]), seed, bob_law=bob)
        report.update({
            "info": mc.estimate, "half_width": mc.half_width, "confidence": mc.confidence, "h": mc.h,
            "holevo_ceiling": "PASS" if mc.holevo_ok else "FAIL",
            "epsilon_A": rng_models.entropy_deficit(alice), "theorem_check": "N/A",
        })
    transcript = run_protocol(
        PartyConfig(alice), PartyConfig(bob), params, eve, Seeds.derive(seed), enforce_min_qubits=False
    )
    transcript.config = config
    return report, transcript


def _write_run(out_dir: str, report: dict, transcript: ProtocolTranscript, args) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "transcript.json").write_text(transcript.to_json())
    summary = {k: v for k, v in report.items() if k != "config"}
    sys.stdout.write(emit(summary, args))


def cmd_simulate(args) -> int:
    config = simulation_config(args)
    report, transcript = run_simulation(config)
    _write_run(args.out, report, transcript, args)
    return EXIT_OK if report["holevo_ceiling"] == "PASS" and report["theorem_check"] != "FAIL" else EXIT_MODEL


def cmd_replay(args) -> int:
    original = ProtocolTranscript.from_json(Path(args.transcript).read_text())
    if not original.config:
        raise UsageError("transcript carries no run config to replay")
    report, transcript = run_simulation(original.config)
    _write_run(args.out, report, transcript, args)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkd-rng-audit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, fmt="text"):
        # fresh options per subcommand; shared parent actions would share defaults
        p = sub.add_parser(name, help=help)
        p.add_argument("--format", choices=("text", "json", "csv"), default=fmt)
        p.add_argument("--digits", type=int, default=9, help="significant digits in text/CSV output")
        return p

    p = add("entropy", "entropy and deficit of a generator")
    p.add_argument("--dist", required=True)
    p.add_argument("--omega", type=int, default=None)
    p.set_defaults(func=cmd_entropy)

    p = add("bound", "evaluate the security bound")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps0", type=float, default=0.0)
    p.add_argument("--epsA", type=float, required=True)
    p.add_argument("--epsB", type=float, default=0.0)
    p.set_defaults(func=cmd_bound)

    p = add("sweep", "tabulate the bound over a parameter grid", fmt="csv")
    p.add_argument("--k", default="64")
    p.add_argument("--eps0", default="0")
    p.add_argument("--epsA", required=True)
    p.add_argument("--epsB", default="0")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = add("simulate", "run the distinguishing game around BB84")
    p.add_argument("--dist", required=True, help="Alice's generator")
    p.add_argument("--bob-dist", default="uniform")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eve", default="none")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--test-method", choices=("random", "alternate"), default="random")
    p.add_argument("--hashing", choices=("toeplitz", "none"), default="toeplitz")
    p.add_argument("--threshold", type=float, default=0.11)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--observable", choices=("key", "transcript"), default=None)
    p.add_argument("--out", required=True, help="directory for report.json and transcript.json")
    p.set_defaults(func=cmd_simulate)

    p = add("replay", "re-run a simulation from its transcript")
    p.add_argument("transcript")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (AuditError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_MODEL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end. Every subcommand prints (or writes) one JSON report;
the exit status is 0 iff all of its checks pass, 1 if some fail and 2 for
configuration errors (reported as a JSON error object)."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import discovery, envs
from .decodability import check_future_decodability, check_past_decodability
from .errors import AssumptionViolated, BudgetExceeded, OutOfRange, Unreachable
from .inference import verify_decoupling, verify_identity
from .io import load_model, model_hash, policy_from_dict
from .model import FmPomdp, Policy, default_budget, diameter, validate_model
from .objectives import Objective
from .report import TOOL, VERSION, dumps, error_object
from .trajectories import dump_trajectory, simulate

COMMANDS = ("validate", "diameter", "decodability", "identities", "decoupling", "discover", "dump-ik", "simulate")


def _nav_exo():
    return envs.compose(envs.make_navigation(envs.NavSpec(5)), envs.make_exo_cycle(4), name="navigation-exo4")


BUILTINS = {
    "fj-counterexample": lambda: envs.make_fj_counterexample(4),
    "fj-counterexample-p2": lambda: envs.make_fj_counterexample(2),
    "fj-counterexample-observed": lambda: envs.make_fj_counterexample(1),
    "navigation": lambda: envs.make_navigation(envs.NavSpec(5)),
    "navigation-curtain": lambda: envs.make_navigation(envs.NavSpec(5, frozenset({2}))),
    "navigation-exo4": _nav_exo,
    "gridworld-exo": lambda: envs.compose(envs.make_gridworld(2, 3), envs.make_exo_cycle(4), envs.exo_tagged,
                                          name="gridworld-exo", block=True),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str = "fj-counterexample"
    policy: str = "uniform"
    objectives: list = field(default_factory=lambda: ["MIK_A"])
    kmax: int | None = None
    anchor: int | None = None
    seed: int = 0
    budget: int = field(default_factory=default_budget)
    out: str | None = None
    report: str | None = None
    decimal: bool = False
    timing: bool = False
    k_range: str = "1..10"
    length: int | None = None
    h: list = field(default_factory=lambda: [1, 2])
    m: int | None = None
    n: int | None = None
    no_actions: bool = False
    confusion_csv: str | None = None

    def echo(self) -> dict:
        keep = {"model", "policy", "seed", "budget"}
        per = {
            "identities": {"objectives", "kmax", "anchor"},
            "discover": {"objectives", "kmax", "anchor"},
            "dump-ik": {"k_range", "out"},
            "simulate": {"length", "out"},
            "decoupling": {"h"},
            "decodability": {"m", "n", "no_actions"},
        }
        keep |= per.get(self.command, set())
        return {k: getattr(self, k) for k in sorted(keep)}


def load(cfg: RunConfig) -> tuple[FmPomdp, Policy]:
    if cfg.budget <= 0:
        raise ConfigError("budget must be positive")
    if cfg.model in BUILTINS:
        model = BUILTINS[cfg.model]()
    elif Path(cfg.model).is_file():
        model = load_model(cfg.model)
    else:
        raise ConfigError(f"unknown model {cfg.model!r}; builtins: {', '.join(sorted(BUILTINS))}")
    if cfg.policy == "uniform":
        policy = Policy.uniform(model)
    elif Path(cfg.policy).is_file():
        policy = policy_from_dict(json.loads(Path(cfg.policy).read_text()))
    else:
        raise ConfigError(f"unknown policy {cfg.policy!r}; use 'uniform' or a JSON file")
    bad = validate_model(model, policy).violations
    if any(v.kind == "shape" for v in bad):
        raise ConfigError(f"policy does not fit the model: {bad[0].detail}")
    return model, policy


def _parse_k(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad k range {text!r}; expected e.g. 1..10") from None
    if not 1 <= lo <= hi:
        raise ConfigError(f"bad k range {text!r}")
    return lo, hi


def _objectives(cfg) -> list:
    try:
        return [Objective.parse(o) for o in cfg.objectives]
    except ValueError:
        raise ConfigError(f"unknown objective in {cfg.objectives}; choose from {[o.value for o in Objective]}") from None


def _verdict(v) -> dict:
    return {"holds": v.holds, "span": v.span, "with_actions": v.with_actions, "anchors": list(v.anchors),
            "windows": v.n_windows, "conflicts": len(v.conflicts),
            "witness": None if v.witness is None else {"payload": v.witness[0], "states": list(v.witness[1:])}}


def _cmd_validate(cfg, model, policy):
    rep = validate_model(model, policy, for_discovery=True)
    res = {"violations": [{"kind": v.kind, "where": v.where, "detail": v.detail} for v in rep.violations]}
    return res, [("no violations", rep.ok)]


def _cmd_diameter(cfg, model, policy):
    try:
        return {"diameter": diameter(model)}, [("diameter defined", True)]
    except Unreachable as e:
        return {"diameter": None, "unreachable": [e.s1, e.s2]}, [("diameter defined", False)]


def _cmd_decodability(cfg, model, policy):
    wa = not cfg.no_actions
    past = check_past_decodability(model, policy, cfg.m, wa, budget=cfg.budget)
    fut = check_future_decodability(model, policy, cfg.n, wa, budget=cfg.budget)
    return {"past": _verdict(past), "future": _verdict(fut)}, [("past decodable", past.holds),
                                                               ("future decodable", fut.holds)]


def _kmax(cfg, model):
    return cfg.kmax if cfg.kmax is not None else diameter(model)


def _cmd_identities(cfg, model, policy):
    res, checks = {}, []
    for ob in _objectives(cfg):
        try:
            rep = verify_identity(model, policy, ob, _kmax(cfg, model), cfg.anchor, cfg.budget)
        except AssumptionViolated as e:
            res[ob.value] = {"assumption_violated": str(e), "witness": e.witness}
            checks.append((f"{ob.value} identity", False))
            continue
        res[ob.value] = {
            "t": rep.t, "K_max": rep.K_max, "max_discrepancy": rep.max_discrepancy,
            "per_k": {str(k): {"form": r["form"], "keys": r["keys"], "max_discrepancy": r["max_discrepancy"],
                               "violating_keys": len(r["violations"])} for k, r in rep.per_k.items()},
        }
        checks.append((f"{ob.value} identity", rep.holds))
    return res, checks


def _cmd_decoupling(cfg, model, policy):
    res, checks = {}, []
    for h in cfg.h:
        rep = verify_decoupling(model, policy, h)
        res[str(h)] = {"max_residual": rep.max_residual, "checked": rep.checked, "witness": rep.witness}
        checks.append((f"decoupling h={h}", rep.holds))
    return res, checks


def _cmd_discover(cfg, model, policy):
    res, checks = {}, []
    for ob in _objectives(cfg):
        try:
            r = discovery.discover_partition(model, policy, ob, _kmax(cfg, model), cfg.anchor, cfg.budget)
        except AssumptionViolated as e:
            res[ob.value] = {"assumption_violated": str(e), "witness": e.witness}
            checks.append((f"{ob.value} recovers the agent state", False))
            continue
        res[ob.value] = r.to_dict()
        checks.append((f"{ob.value} recovers the agent state", r.verdict.isomorphic))
        if cfg.confusion_csv:
            path = Path(cfg.confusion_csv)
            if len(cfg.objectives) > 1:
                path = path.with_name(f"{path.stem}-{ob.value}{path.suffix}")
            path.write_text(r.verdict.confusion_csv(list(r.truth.names)))
    return res, checks


def _cmd_dump_ik(cfg, model, policy):
    lo, hi = _parse_k(cfg.k_range)
    dump = envs.dump_ik_examples(model, lo, hi, cfg.budget)
    out = Path(cfg.out or "ik_examples.txt")
    out.write_bytes(dump.text.encode("utf-8"))
    expected = model.n_states * sum(model.n_actions ** k for k in range(lo, hi + 1))
    return {"total": dump.total, "k_lo": lo, "k_hi": hi, "file": str(out)}, [("total matches |S| sum |A|^k",
                                                                               dump.total == expected)]


def _cmd_simulate(cfg, model, policy):
    length = cfg.length or model.horizon
    tr = simulate(model, policy, length, cfg.seed)
    text = dump_trajectory(tr, model_hash(model), cfg.seed)
    if cfg.out:
        Path(cfg.out).write_bytes(text.encode("utf-8"))
    steps = [[t, tr.state(t), tr.exo[t - 1], tr.obs[t - 1], tr.action(t) if t < tr.end else None]
             for t in range(1, tr.end + 1)]
    return {"length": length, "steps": steps}, [("trajectory sampled", True)]


HANDLERS = {
    "validate": _cmd_validate, "diameter": _cmd_diameter, "decodability": _cmd_decodability,
    "identities": _cmd_identities, "decoupling": _cmd_decoupling, "discover": _cmd_discover,
    "dump-ik": _cmd_dump_ik, "simulate": _cmd_simulate,
}


def run(cfg: RunConfig) -> dict:
    """Execute one subcommand and return the report as a plain dict."""
    if cfg.command not in HANDLERS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    start = time.perf_counter()
    model, policy = load(cfg)
    results, checks = HANDLERS[cfg.command](cfg, model, policy)
    report = {
        "tool": TOOL, "version": VERSION, "command": cfg.command, "config": cfg.echo(),
        "model": {"name": model.name, "hash": model_hash(model)},
        "results": results,
        "checks": [{"name": n, "passed": bool(p)} for n, p in checks],
        "passed": all(p for _, p in checks),
    }
    if cfg.timing:
        report["wall_time_s"] = round(time.perf_counter() - start, 6)
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", default="fj-counterexample", help="builtin name or model JSON file")
    common.add_argument("--policy", default="uniform", help="'uniform' or a policy JSON file")
    common.add_argument("--budget", type=int, default=default_budget(), help="max enumerated paths")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--decimal", action="store_true", help="render fractions as 6-digit decimals")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")

    p = _Parser(prog="fmpomdp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common])
    sub.add_parser("diameter", parents=[common])
    d = sub.add_parser("decodability", parents=[common])
    d.add_argument("--m", type=int)
    d.add_argument("--n", type=int)
    d.add_argument("--no-actions", action="store_true")
    for name in ("identities", "discover"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--objective", action="append", dest="objectives")
        s.add_argument("--kmax", type=int)
        s.add_argument("--anchor", type=int)
        if name == "discover":
            s.add_argument("--confusion-csv")
    s = sub.add_parser("decoupling", parents=[common])
    s.add_argument("--h", type=int, action="append")
    s = sub.add_parser("dump-ik", parents=[common])
    s.add_argument("--k", dest="k_range", default="1..10")
    s.add_argument("--out")
    s = sub.add_parser("simulate", parents=[common])
    s.add_argument("--length", type=int)
    s.add_argument("--out")
    return p


def config_from_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    ns = {k: v for k, v in ns.items() if v is not None}
    return RunConfig(**ns)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        report = run(cfg)
    except ConfigError as e:
        sys.stdout.write(error_object("ConfigError", str(e)))
        return 2
    except (BudgetExceeded, OutOfRange) as e:
        sys.stdout.write(error_object(type(e).__name__, str(e)))
        return 2
    text = dumps(report, cfg.decimal)
    if cfg.report:
        Path(cfg.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())

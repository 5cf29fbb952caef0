"""Batch experiment driver.

Subcommands: gen, solve, equilibrium, map-schedule, bench, oracle.  Every
subcommand is deterministic given its flags (no timestamps are written), so
re-runs produce byte-identical files; --jobs only changes scheduling, never
results, because each task carries its own derived seed and outputs are
merged in task order.

Exit codes: 0 success; 2 usage error; 3 validation/input error; 4 completed
but at least one benchmark group produced only unreachable metrics.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import equilibrium as eq
from . import metrics as mt
from .emvl import run_emvl, run_emvl_trials
from .gatesim import run_emvl_bits
from .model import (
    Distribution,
    IsingModel,
    generate_instance,
    load_instance,
    save_instance,
)
from .rng import derive_seed, derive_stream_seed
from .sa import run_sa, run_sa_trials
from .schedules import BetaLinear, SparsitySchedule, TempLinear
from .validation import (
    BracketingError,
    ExtrapolationError,
    GroundTruthError,
    ValidationError,
)

ALGORITHMS = ("emvl", "emvl-bits", "sa-conventional", "sa-optimized")
_CLI_ERRORS = (ValidationError, GroundTruthError, BracketingError, ExtrapolationError)


def _fmt(x) -> str:
    if x is None:
        return "unreachable"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _write_csv(path, comments, columns, rows) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _run_tasks(tasks, jobs: int):
    """Run callables and return results in submission order."""
    if jobs <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def _out_path(args, name) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = Path(args.out_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"could not parse float list {text!r}") from exc


def _cli_distribution(name: str) -> Distribution:
    alias = {"gaussian": Distribution.GAUSSIAN_Q10}
    if name in alias:
        return alias[name]
    try:
        return Distribution(name)
    except ValueError as exc:
        raise ValidationError(f"unknown distribution {name!r}") from exc


def family_instance(master_seed: int, dist: Distribution, n: int, index: int) -> IsingModel:
    """Deterministic member of an instance family; shared by gen/oracle/bench."""
    instance_id = f"{dist.value}_n{n}_m{master_seed}_i{index:02d}"
    inst_seed = derive_seed(master_seed, "gen", dist.value, n, index)
    return generate_instance(dist, n, inst_seed, instance_id=instance_id)


def cmd_gen(args) -> int:
    dist = _cli_distribution(args.dist)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        model = family_instance(args.seed, dist, args.n, k)
        path = out_dir / f"{model.instance_id}.ising"
        save_instance(model, path)
        print(path)
    return 0


def _solve_schedule(args):
    if args.alg in ("emvl", "emvl-bits"):
        if args.ps_init is None:
            raise ValidationError(f"--ps-init is required for --alg {args.alg}")
        return SparsitySchedule(args.ps_init, args.ps_fin, args.tfin)
    beta = args.beta_start is not None or args.beta_end is not None
    temp = args.t_start is not None or args.t_end is not None
    if beta == temp:
        raise ValidationError(
            "annealing needs exactly one schedule: --beta-start/--beta-end or --t-start/--t-end"
        )
    if beta:
        if args.beta_start is None or args.beta_end is None:
            raise ValidationError("both --beta-start and --beta-end are required")
        return BetaLinear(args.beta_start, args.beta_end, args.tfin)
    if args.t_start is None or args.t_end is None:
        raise ValidationError("both --t-start and --t-end are required")
    return TempLinear(args.t_start, args.t_end, args.tfin)


def cmd_solve(args) -> int:
    model = load_instance(args.instance)
    schedule = _solve_schedule(args)
    if args.alg == "emvl":
        finals, bests, seeds = run_emvl_trials(model, schedule, args.seed, args.trials)
    elif args.alg == "emvl-bits":
        finals = np.empty(args.trials, np.int64)
        bests = np.empty(args.trials, np.int64)
        seeds = np.empty(args.trials, np.uint64)
        for k in range(args.trials):
            seeds[k] = derive_stream_seed(args.seed, model.instance_id, k)
            res = run_emvl_bits(model, schedule, int(seeds[k]))
            finals[k] = res.final_energy
            bests[k] = res.best_energy
    else:
        variant = "optimized" if args.alg == "sa-optimized" else "conventional"
        finals, bests, seeds = run_sa_trials(
            model, schedule, args.seed, args.trials, variant=variant
        )
    rows = [
        (k, int(seeds[k]), int(finals[k]), int(bests[k]), args.tfin)
        for k in range(args.trials)
    ]
    out = _out_path(args, args.out)
    _write_csv(
        out,
        [
            f"solve instance={model.instance_id} alg={args.alg} "
            f"schedule={schedule.describe() if hasattr(schedule, 'describe') else schedule}"
        ],
        ["trial", "seed", "final_energy", "best_energy", "iterations"],
        rows,
    )
    print(out)
    if args.trace:
        trial0_seed = int(derive_stream_seed(args.seed, model.instance_id, 0))
        if args.alg == "emvl":
            res = run_emvl(model, schedule, trial0_seed, collect_trace=True)
        elif args.alg == "emvl-bits":
            res = run_emvl_bits(model, schedule, trial0_seed, collect_trace=True)
        else:
            variant = "optimized" if args.alg == "sa-optimized" else "conventional"
            res = run_sa(model, schedule, trial0_seed, variant, collect_trace=True)
        control = "p_s" if res.trace.control_name == "p_s" else "temperature"
        trace_path = _out_path(args, args.trace)
        _write_csv(
            trace_path,
            [f"trace of trial 0 (seed {trial0_seed})"],
            ["t", "energy", control],
            [
                (t, int(res.trace.energy[t]), float(res.trace.control[t]))
                for t in range(len(res.trace))
            ],
        )
        print(trace_path)
    return 0


def _equilibrium_model(args) -> IsingModel:
    if args.instance:
        return load_instance(args.instance)
    if args.n is None or args.dist is None:
        raise ValidationError("equilibrium needs --instance or both --n and --dist")
    dist = _cli_distribution(args.dist)
    return generate_instance(
        dist, args.n, derive_seed(args.seed, "equilibrium-instance", dist.value, args.n)
    )


def cmd_equilibrium(args) -> int:
    model = _equilibrium_model(args)
    if args.alg == "emvl":
        if args.fixed_ps is None:
            raise ValidationError("--alg emvl needs --fixed-ps")
        grid = _parse_float_list(args.fixed_ps)
        sampler = lambda v: eq.sample_emvl_equilibrium(
            model, v, trials=args.trials, burn_in_sweeps=args.burn_in, seed=args.seed
        )
    elif args.alg == "mcmc":
        if args.fixed_t is None:
            raise ValidationError("--alg mcmc needs --fixed-t")
        grid = _parse_float_list(args.fixed_t)
        sampler = lambda v: eq.sample_mcmc_equilibrium(
            model, v, trials=args.trials, burn_in_sweeps=args.burn_in, seed=args.seed
        )
    else:
        raise ValidationError(f"equilibrium algorithm must be emvl or mcmc, got {args.alg!r}")
    if not grid:
        raise ValidationError("control grid is empty")
    samples = _run_tasks([lambda v=v: sampler(v) for v in grid], args.jobs)
    rows = [(s.control_value, s.mean, s.std, s.trials) for s in samples]
    out = _out_path(args, args.out)
    _write_csv(
        out,
        [f"equilibrium instance={model.instance_id} alg={args.alg}"],
        ["p_s_or_T", "mean", "std", "trials"],
        rows,
    )
    print(out)
    return 0


def cmd_map_schedule(args) -> int:
    if args.from_map:
        tmap = eq.SparsityTemperatureMap.load(args.from_map)
    else:
        if args.n is None or args.dist is None:
            raise ValidationError("map-schedule needs --from-map or both --n and --dist")
        if args.ps_grid is None:
            raise ValidationError("map-schedule needs --ps-grid when building a map")
        tmap = eq.build_sparsity_map(
            n=args.n,
            distribution=_cli_distribution(args.dist),
            ps_grid=_parse_float_list(args.ps_grid),
            t_lo=args.t_lo,
            t_hi=args.t_hi,
            tolerance=args.tol,
            seed=args.seed,
            trials=args.trials,
            burn_in_sweeps=args.burn_in,
        )
    if args.out_map:
        map_path = _out_path(args, args.out_map)
        tmap.save(map_path)
        print(map_path)
    if args.out_csv:
        csv_path = _out_path(args, args.out_csv)
        _write_csv(
            csv_path,
            [f"sparsity-temperature map n={tmap.n} distribution={tmap.distribution}"],
            ["p_s", "T_fit", "ks_distance"],
            list(zip(tmap.p_s, tmap.t_fit, tmap.ks_distance)),
        )
        print(csv_path)
    schedule = eq.map_to_sa_schedule(
        tmap, SparsitySchedule(args.p_init, 0.0, args.tfin)
    )
    obj = {
        "kind": "temp_linear",
        "t_start": schedule.t_start,
        "t_end": schedule.t_end,
        "t_fin": schedule.t_fin,
    }
    if args.out_schedule:
        sched_path = _out_path(args, args.out_schedule)
        with open(sched_path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(sched_path)
    print(json.dumps(obj, sort_keys=True))
    return 0


def _load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    cfg["_dir"] = Path(path).resolve().parent
    return cfg


def _config_families(cfg):
    inst = cfg["instances"]
    for dist_name in inst["distributions"]:
        dist = _cli_distribution(dist_name)
        for n in inst["sizes"]:
            yield dist, int(n)


def _config_models(cfg, dist: Distribution, n: int) -> list[IsingModel]:
    count = int(cfg["instances"]["count"])
    master = int(cfg["master_seed"])
    return [family_instance(master, dist, n, k) for k in range(count)]


def _algorithm_schedule(entry: dict, dist: Distribution, n: int, t_fin: int, cfg_dir: Path):
    alg = entry["algorithm"]
    if alg in ("emvl", "emvl-bits"):
        return SparsitySchedule(float(entry["p_init"]), float(entry.get("p_fin", 0.0)), t_fin)
    sched = entry["schedule"]
    kind = sched["kind"]
    if kind == "beta_linear":
        return BetaLinear(float(sched["beta_start"]), float(sched["beta_end"]), t_fin)
    if kind == "temp_linear":
        return TempLinear(float(sched["t_start"]), float(sched["t_end"]), t_fin)
    if kind == "sparsity_mapped":
        template = sched["map"]
        map_path = Path(template.format(distribution=dist.value, n=n))
        if not map_path.is_absolute():
            map_path = cfg_dir / map_path
        tmap = eq.SparsityTemperatureMap.load(map_path)
        p_init = float(sched.get("p_init", 0.4))
        return eq.map_to_sa_schedule(tmap, SparsitySchedule(p_init, 0.0, t_fin))
    raise ValidationError(f"unknown schedule kind {kind!r}")


def _bench_best_energies(entry, model, schedule, master: int, trials: int, t_fin: int):
    alg = entry["algorithm"]
    context = f"{model.instance_id}/{entry['label']}/tfin{t_fin}"
    if alg == "emvl":
        _f, bests, _s = run_emvl_trials(model, schedule, master, trials, context=context)
        return bests
    if alg == "emvl-bits":
        bests = np.empty(trials, np.int64)
        for k in range(trials):
            seed = derive_stream_seed(master, context, k)
            bests[k] = run_emvl_bits(model, schedule, seed).best_energy
        return bests
    variant = "optimized" if alg == "sa-optimized" else "conventional"
    _f, bests, _s = run_sa_trials(
        model, schedule, master, trials, variant=variant, context=context
    )
    return bests


def cmd_bench(args) -> int:
    cfg = _load_config(args.config)
    registry_path = args.registry or cfg.get("registry")
    if registry_path is None:
        raise ValidationError("bench needs a ground-truth registry (--registry or config)")
    registry_path = Path(registry_path)
    if not registry_path.is_absolute():
        registry_path = cfg["_dir"] / registry_path
    if not registry_path.exists():
        raise GroundTruthError(f"registry {registry_path} not found; run the oracle command")
    registry = mt.load_registry(registry_path)

    master = int(cfg["master_seed"])
    trials = int(cfg["trials"])
    grid = [int(t) for t in cfg["t_fin_grid"]]
    if not grid:
        raise ValidationError("t_fin_grid must be non-empty")

    missing = []
    for dist, n in _config_families(cfg):
        for model in _config_models(cfg, dist, n):
            if model.instance_id not in registry:
                missing.append(model.instance_id)
    if missing:
        raise GroundTruthError(
            "missing ground truth for: " + ", ".join(missing) + "; run the oracle command"
        )

    for entry in cfg["algorithms"]:
        if entry["algorithm"] not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {entry['algorithm']!r}")
        entry.setdefault("label", entry["algorithm"])

    cells = []
    for entry in cfg["algorithms"]:
        for dist, n in _config_families(cfg):
            if entry["algorithm"] == "emvl-bits" and dist is not Distribution.BIMODAL:
                raise ValidationError(
                    "emvl-bits supports only bimodal instance families"
                )
            for t_fin in grid:
                cells.append((entry, dist, n, t_fin))

    def run_cell(cell):
        entry, dist, n, t_fin = cell
        schedule = _algorithm_schedule(entry, dist, n, t_fin, cfg["_dir"])
        p_target = {}
        p_exact = {}
        for model in _config_models(cfg, dist, n):
            gt = registry[model.instance_id]
            bests = _bench_best_energies(entry, model, schedule, master, trials, t_fin)
            if int(bests.min()) < gt.e_gs:
                print(
                    f"warning: {model.instance_id} reached {int(bests.min())} below "
                    f"registry value {gt.e_gs}; registry is stale",
                    file=sys.stderr,
                )
            p_target[model.instance_id] = mt.success_probability(
                bests, mt.target_energy_99(gt.e_gs)
            )
            p_exact[model.instance_id] = mt.success_probability(bests, gt.e_gs)
        return mt.RunMetrics(
            algorithm=entry["label"],
            schedule=str(entry.get("schedule", {"kind": "sparsity"})),
            n=n,
            distribution=dist.value,
            t_fin=t_fin,
            p_hat_target=p_target,
            p_hat_exact=p_exact,
        )

    results = _run_tasks([lambda c=c: run_cell(c) for c in cells], args.jobs)

    rows = [
        (r.algorithm, r.n, r.distribution, r.t_fin, r.p_hat_mean, r.stt, r.sts)
        for r in results
    ]
    out = _out_path(args, args.out)
    _write_csv(
        out,
        [f"bench config={Path(args.config).name} trials={trials}"],
        ["algorithm", "n", "distribution", "t_fin", "p_hat_mean", "stt", "sts"],
        rows,
    )
    print(out)

    groups: dict[tuple, list[mt.RunMetrics]] = {}
    for r in results:
        groups.setdefault((r.algorithm, r.n, r.distribution), []).append(r)
    any_dead_group = any(
        all(r.stt is None and r.sts is None for r in group) for group in groups.values()
    )
    return 4 if any_dead_group else 0


def cmd_oracle(args) -> int:
    models: list[IsingModel] = []
    if args.config:
        cfg = _load_config(args.config)
        for dist, n in _config_families(cfg):
            models.extend(_config_models(cfg, dist, n))
    for path in args.instance or []:
        models.append(load_instance(path))
    if not models:
        raise ValidationError("oracle needs --config and/or --instance files")

    registry_path = Path(args.registry)
    registry = mt.load_registry(registry_path) if registry_path.exists() else {}

    def solve_one(model: IsingModel) -> mt.GroundTruth:
        return mt.ground_truth_for(
            model, seed=args.seed, cap=args.cap, trials=args.bk_trials, t_fin=args.bk_tfin
        )

    truths = _run_tasks([lambda m=m: solve_one(m) for m in models], args.jobs)
    for gt in truths:
        old = registry.get(gt.instance_id)
        if old is None or gt.e_gs < old.e_gs:
            registry[gt.instance_id] = gt
    registry_path.parent.mkdir(parents=True, exist_ok=True)
    mt.save_registry(registry, registry_path)
    print(registry_path)
    return 0


def _add_common(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--out-dir", default=".", help="directory for outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparseising",
        description="Ising ground-state search: sparsified majority-vote solver, "
        "annealing baselines, equilibrium calibration, and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instance files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dist", required=True, help="bimodal | gaussian | gaussian_q10")
    p.add_argument("--count", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run solver trials on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--alg", required=True, choices=ALGORITHMS)
    p.add_argument("--ps-init", type=float, default=None)
    p.add_argument("--ps-fin", type=float, default=0.0)
    p.add_argument("--beta-start", type=float, default=None)
    p.add_argument("--beta-end", type=float, default=None)
    p.add_argument("--t-start", type=float, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--tfin", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", default="solve.csv")
    p.add_argument("--trace", default=None, help="write trial 0 per-sweep trace CSV")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("equilibrium", help="fixed-parameter equilibrium sweeps")
    p.add_argument("--instance", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dist", default=None)
    p.add_argument("--alg", required=True, choices=("emvl", "mcmc"))
    p.add_argument("--fixed-ps", default=None, help="comma list of sparsity values")
    p.add_argument("--fixed-t", default=None, help="comma list of temperatures")
    p.add_argument("--trials", type=int, default=eq.TRIALS_DEFAULT)
    p.add_argument("--burn-in", type=int, default=eq.BURN_IN_SWEEPS_DEFAULT)
    p.add_argument("--out", default="equilibrium.csv")
    _add_common(p)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("map-schedule", help="build or reload a sparsity-temperature map")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dist", default=None)
    p.add_argument("--ps-grid", default=None, help="comma list of sparsity values")
    p.add_argument("--t-lo", type=float, default=0.5)
    p.add_argument("--t-hi", type=float, default=20000.0)
    p.add_argument("--tol", type=float, default=None, help="mean-energy tolerance")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--burn-in", type=int, default=300)
    p.add_argument("--p-init", type=float, required=True)
    p.add_argument("--tfin", type=int, required=True)
    p.add_argument("--from-map", default=None)
    p.add_argument("--out-map", default="map.json")
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-schedule", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_map_schedule)

    p = sub.add_parser("bench", help="run a benchmark grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--registry", default=None)
    p.add_argument("--out", default="metrics.csv")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="fill the ground-truth registry")
    p.add_argument("--config", default=None)
    p.add_argument("--instance", action="append", default=None)
    p.add_argument("--registry", required=True)
    p.add_argument("--cap", type=int, default=mt.EXHAUSTIVE_CAP_DEFAULT)
    p.add_argument("--bk-trials", type=int, default=mt.BEST_KNOWN_TRIALS)
    p.add_argument("--bk-tfin", type=int, default=mt.BEST_KNOWN_T_FIN)
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "map-schedule" and args.tol is None and args.from_map is None:
            parser.error("map-schedule needs --tol when building a map")
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except _CLI_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

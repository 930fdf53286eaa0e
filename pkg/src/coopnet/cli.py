"""Command-line front end: config parsing, dispatch, CSV + metadata emission.

Configuration is a flat ``key=value`` text file plus command-line overrides
(flags win).  Every run writes its CSV atomically and a ``<out>.meta``
sidecar echoing the fully resolved configuration; the sidecar itself is a
valid config file, so a run can be reproduced from it alone.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile

import numpy as np

from . import experiments, netgen, smallsys
from .dynamics import DynamicsConfig
from .errors import CoopnetError, InvalidConfigError
from .experiments import StabilityConfig
from .game import GameConfig
from .netgen import GrowthConfig

EXPERIMENTS = ("sweep_r_growing", "sweep_r_static", "fixation", "sweep_k",
               "degree_dist", "small_system")


@dataclasses.dataclass
class RunConfig:
    experiment: str
    model: str = netgen.MODEL_BAM
    L: int = 3
    N0: int | None = None
    fl_mode: str = netgen.FL_PREFERENTIAL
    rl_mode: str = netgen.RL_UNIFORM_SOURCE_PA_TARGET
    one_rl_random: bool = False
    n: float = 0.001
    rule: str = "imitation"
    beta: float = 1.0
    timing: str = "sync"
    growth_unit: str = "nodes"
    K: int | None = None
    pc: float | None = None  # None -> protocol default
    r: float | None = None
    r_grid: str | None = None  # "min:max:step"
    k_values: str | None = None  # comma list; "inf" allowed
    ni_values: str | None = None  # comma list
    m: int = 500
    n_final: int = experiments.DEFAULT_N_FINAL
    seed_size: int = experiments.DEFAULT_SEED_SIZE
    realizations: int = 40
    networks: int = 10
    initial_conditions: int = 10
    transient: int = 10_000
    window: int = 1_000
    max_windows: int = 50
    scenario: str = "all"
    k: int = 2
    d: float = 1.0
    seed: int = 0
    workers: int | None = None
    nonstationary_tolerance: float = 0.5
    out: str = "out.csv"

    def growth_config(self) -> GrowthConfig:
        return GrowthConfig(model=self.model, L=self.L, N0=self.N0, fl_mode=self.fl_mode,
                            rl_mode=self.rl_mode, one_rl_random=self.one_rl_random,
                            per_link_updates=self.growth_unit == "links")

    def dynamics_config(self) -> DynamicsConfig:
        return DynamicsConfig(rule=self.rule, beta=self.beta, timing=self.timing,
                              n=self.n, growth_unit=self.growth_unit)

    def game_config(self, default_pc=0.5) -> GameConfig:
        pc = self.pc if self.pc is not None else default_pc
        return GameConfig(r=self.r if self.r is not None else 2.0, K=self.K, p_c=pc)

    def stability_config(self) -> StabilityConfig:
        return StabilityConfig(transient=self.transient, window=self.window,
                               max_windows=self.max_windows)


_BOOL_KEYS = {"one_rl_random"}
_INT_KEYS = {"L", "N0", "K", "m", "n_final", "seed_size", "realizations", "networks",
             "initial_conditions", "transient", "window", "max_windows",
             "k", "seed", "workers"}
_FLOAT_KEYS = {"n", "beta", "pc", "r", "d", "nonstationary_tolerance"}


def _coerce(key: str, value: str):
    if key in _BOOL_KEYS:
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise InvalidConfigError(f"{key}: expected a boolean, got {value!r}")
    try:
        if key in _INT_KEYS:
            return None if value == "none" else int(value)
        if key in _FLOAT_KEYS:
            return None if value == "none" else float(value)
    except ValueError:
        raise InvalidConfigError(f"{key}: cannot parse {value!r}") from None
    return None if value == "none" else value


def _read_config_file(path) -> dict:
    values = {}
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in fields:
                raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, value)
    return values


def parse_grid(spec: str) -> list[float]:
    """Parse "min:max:step" into an inclusive grid."""
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise InvalidConfigError(f"grid must be min:max:step, got {spec!r}") from None
    if not lo < hi:
        raise InvalidConfigError(f"grid min must be < max (got {spec!r})")
    if step <= 0:
        raise InvalidConfigError(f"grid step must be > 0 (got {spec!r})")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 12) for i in range(count) if lo + i * step <= hi + 1e-9]


def _parse_list(spec: str, allow_inf=False):
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if allow_inf and tok in ("inf", "unbounded", "none"):
            out.append(None)
        else:
            out.append(int(tok))
    return out


def parse_config(argv) -> RunConfig:
    """Build a validated RunConfig from a subcommand, optional config file,
    and flag overrides (flags win)."""
    parser = argparse.ArgumentParser(prog="coopnet", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name.replace("_", "-"))
        p.add_argument("--config")
        p.add_argument("--model", choices=["bam", "model-a"])
        p.add_argument("--L", type=int)
        p.add_argument("--N0", type=int)
        p.add_argument("--fl-mode", choices=[netgen.FL_PREFERENTIAL, netgen.FL_RANDOM])
        p.add_argument("--rl-mode", choices=[netgen.RL_UNIFORM_SOURCE_PA_TARGET,
                                             netgen.RL_PA_SOURCE_UNIFORM_TARGET])
        p.add_argument("--one-rl-random", action="store_const", const=True)
        p.add_argument("--n", type=float)
        p.add_argument("--rule", choices=["imitation", "fermi"])
        p.add_argument("--beta", type=float)
        p.add_argument("--timing", choices=["sync", "async"])
        p.add_argument("--growth-unit", choices=["nodes", "links"])
        p.add_argument("--K", type=int)
        p.add_argument("--pc", type=float)
        p.add_argument("--r", type=float)
        p.add_argument("--r-grid")
        p.add_argument("--k-values")
        p.add_argument("--ni-values")
        p.add_argument("--M", dest="m", type=int)
        p.add_argument("--N-final", dest="n_final", type=int)
        p.add_argument("--seed-size", dest="seed_size", type=int)
        p.add_argument("--realizations", type=int)
        p.add_argument("--networks", type=int)
        p.add_argument("--initial-conditions", dest="initial_conditions", type=int)
        p.add_argument("--transient", type=int)
        p.add_argument("--window", type=int)
        p.add_argument("--max-windows", dest="max_windows", type=int)
        p.add_argument("--scenario", choices=("all",) + smallsys.SCENARIOS)
        p.add_argument("--k", type=int)
        p.add_argument("--d", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--nonstationary-tolerance", dest="nonstationary_tolerance", type=float)
        p.add_argument("--out")
    args = parser.parse_args(argv)

    values = {"experiment": args.experiment.replace("-", "_")}
    if args.config:
        file_values = _read_config_file(args.config)
        file_values.pop("experiment", None)
        values.update(file_values)
    for f in dataclasses.fields(RunConfig):
        if f.name == "experiment":
            continue
        flag_val = getattr(args, f.name, None)
        if flag_val is not None:
            values[f.name] = flag_val
    if values.get("model") == "model-a":
        values["model"] = netgen.MODEL_A

    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.experiment not in EXPERIMENTS:
        raise InvalidConfigError(f"unknown experiment {cfg.experiment!r}; accepted: {EXPERIMENTS}")
    if cfg.realizations < 1:
        raise InvalidConfigError(f"realizations must be >= 1, got {cfg.realizations}")
    if cfg.seed < 0 or cfg.seed >= 2 ** 64:
        raise InvalidConfigError("seed must be a 64-bit unsigned integer")
    if cfg.r_grid is not None:
        parse_grid(cfg.r_grid)
    # these constructors perform the range checks (n, K, pc, r, model, L)
    cfg.growth_config()
    cfg.dynamics_config()
    cfg.game_config()
    cfg.stability_config()
    if cfg.experiment in ("sweep_r_growing", "sweep_r_static") and cfg.r_grid is None \
            and cfg.r is None:
        raise InvalidConfigError("r sweeps need --r-grid (or a single --r)")
    if cfg.experiment == "sweep_k" and cfg.k_values is None:
        raise InvalidConfigError("sweep_k needs --k-values (comma list; 'inf' for unbounded)")
    if cfg.experiment == "fixation" and cfg.ni_values is None:
        raise InvalidConfigError("fixation needs --ni-values (comma list of seed sizes)")


def _r_values(cfg: RunConfig):
    if cfg.r_grid is not None:
        return parse_grid(cfg.r_grid)
    return [cfg.r]


def _atomic_write(path, write_fn):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_metadata(cfg: RunConfig, extra=None):
    def emit(fh):
        for f in dataclasses.fields(cfg):
            value = getattr(cfg, f.name)
            if value is None:
                value = "none"
            elif isinstance(value, bool):
                value = "true" if value else "false"
            fh.write(f"{f.name}={value}\n")
        for key, value in (extra or {}).items():
            fh.write(f"# {key}={value}\n")
    _atomic_write(cfg.out + ".meta", emit)


def run(cfg: RunConfig) -> int:
    """Dispatch one experiment; returns a process exit status."""
    extra = {}
    if cfg.experiment == "sweep_r_growing":
        records = experiments.sweep_r_growing(
            cfg.growth_config(), cfg.dynamics_config(), cfg.game_config(default_pc=0.0),
            _r_values(cfg), n_final=cfg.n_final, realizations=cfg.realizations,
            seed_size=cfg.seed_size, stability=cfg.stability_config(),
            master_seed=cfg.seed, workers=cfg.workers)
        status = _finish_sweep(cfg, records, extra)
    elif cfg.experiment == "sweep_r_static":
        records = experiments.sweep_r_static(
            cfg.growth_config(), cfg.dynamics_config(), cfg.game_config(),
            _r_values(cfg), n_final=cfg.n_final, networks=cfg.networks,
            initial_conditions=cfg.initial_conditions,
            stability=cfg.stability_config(), master_seed=cfg.seed, workers=cfg.workers)
        status = _finish_sweep(cfg, records, extra)
    elif cfg.experiment == "sweep_k":
        records = experiments.sweep_k(
            cfg.growth_config(), cfg.dynamics_config(), cfg.game_config(default_pc=0.0),
            _parse_list(cfg.k_values, allow_inf=True), n_final=cfg.n_final,
            realizations=cfg.realizations, seed_size=cfg.seed_size,
            stability=cfg.stability_config(), master_seed=cfg.seed, workers=cfg.workers)
        status = _finish_sweep(cfg, records, extra)
    elif cfg.experiment == "fixation":
        curve = experiments.fixation_probability(
            cfg.growth_config(), cfg.dynamics_config(), cfg.game_config(default_pc=0.5),
            _parse_list(cfg.ni_values), m=cfg.m, n_final=cfg.n_final,
            stability=cfg.stability_config(), master_seed=cfg.seed, workers=cfg.workers)
        _atomic_write(cfg.out, lambda fh: experiments.write_fixation_csv(curve, fh))
        status = 0
    elif cfg.experiment == "degree_dist":
        status = _run_degree_dist(cfg, extra)
    else:  # small_system
        rows = _analyzer_rows(cfg)
        _atomic_write(cfg.out, lambda fh: experiments.write_analyzer_csv(rows, fh))
        status = 0
    _write_metadata(cfg, extra)
    return status


def _finish_sweep(cfg, records, extra) -> int:
    _atomic_write(cfg.out, lambda fh: experiments.write_sweep_csv(records, fh))
    total = sum(r.realizations + r.discarded for r in records)
    discarded = sum(r.discarded for r in records)
    extra["discarded_realizations"] = discarded
    if total and discarded / total > cfg.nonstationary_tolerance:
        print(f"error: {discarded}/{total} realizations never reached stationarity",
              file=sys.stderr)
        return 1
    return 0


def _run_degree_dist(cfg: RunConfig, extra) -> int:
    growth = cfg.growth_config()
    degrees = []
    for i in range(cfg.realizations):
        ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(5, i))
        g = netgen.grow_network(growth, cfg.n_final, np.random.default_rng(ss))
        degrees.extend(g.degree)
    dist = netgen.degree_distribution(np.asarray(degrees))
    _atomic_write(cfg.out, dist.write_csv)
    if dist.fitted_gamma is not None:
        extra["fitted_gamma"] = f"{dist.fitted_gamma:.6g}"
    return 0


def _analyzer_rows(cfg: RunConfig):
    r = cfg.r if cfg.r is not None else 2.0
    if cfg.scenario != "all":
        return [smallsys.analyze(cfg.scenario, r, k=cfg.k, d=cfg.d)]
    rows = [smallsys.analyze("two_node", r), smallsys.analyze("chain3", r),
            smallsys.analyze("star3_defector", r)]
    rows += [smallsys.analyze("hub_k", r, k=k) for k in range(2, 11)]
    rows.append(smallsys.analyze("parent_child", r, d=cfg.d))
    return rows


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv if argv is not None else sys.argv[1:])
    except CoopnetError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except CoopnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

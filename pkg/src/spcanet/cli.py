"""Command-line entry point.

Subcommands::

    spcanet synth  --output-dir DIR [--d 100 --n 200 --c 4 ...]
    spcanet run    --config cfg.json [--mode admm|spcanet|gridsearch] [--key value ...]
    spcanet ablate --config cfg.json
    spcanet sweep  --config cfg.json [--k-max 8]
    spcanet eval   --data-path A.csv --labels-path y.csv --x-path X.csv

Every ``RunConfig`` key can come from a flat JSON config file or from a
flag of the same name; flags win. Unknown config keys are an error. The
output directory defaults to ``$SPCANET_OUTPUT_DIR`` (else
``./spcanet-out``). Outputs are assembled in memory and only written once
the whole command has succeeded.
"""
import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np

from . import io as fileio
from .admm import SolverParams, solve
from .errors import ContractViolation, NumericalFailure, ParseError
from .linalg import center_rows, objective
from .synth import synth
from .ufs import DEFAULT_FEATURE_COUNTS, evaluate, format_report
from .unfolding import TrainConfig, dumps_model, forward, init_model, stage_sweep, train

OUTPUT_ENV = "SPCANET_OUTPUT_DIR"
MODES = ("admm", "spcanet", "gridsearch")
DEFAULT_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)


def default_output_dir():
    return os.environ.get(OUTPUT_ENV, "spcanet-out")


@dataclass
class RunConfig:
    data_path: str = ""
    labels_path: Optional[str] = None
    output_dir: Optional[str] = None
    m: int = 0
    center: bool = True
    mode: str = "admm"
    # fixed-parameter solver
    lam: float = 0.1
    mu: float = 0.1
    alpha: float = 1.0
    beta: float = 1.0
    eta: Optional[float] = None
    max_iters: int = 500
    tol: float = 1e-6
    gradient_mode: str = "exact"
    # unrolled network
    n_stages: int = 5
    param_mode: str = "untied"
    larg_linear: bool = False
    loss_lambda: float = 0.1
    loss_mu: float = 0.1
    # SPSA training
    iterations: int = 200
    spsa_a: float = 0.1
    spsa_c: float = 0.1
    spsa_big_a: float = 10.0
    seed: int = 0
    # evaluation and experiments
    feature_counts: List[int] = field(default_factory=lambda: list(DEFAULT_FEATURE_COUNTS))
    repeats: int = 50
    grid_lambda: List[float] = field(default_factory=lambda: list(DEFAULT_GRID))
    grid_mu: List[float] = field(default_factory=lambda: list(DEFAULT_GRID))
    k_max: int = 8

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ContractViolation(f"unknown config key(s): {', '.join(unknown)}")
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def to_dict(self):
        return dataclasses.asdict(self)

    def validate(self):
        if not self.data_path:
            raise ContractViolation("data_path is required")
        if self.mode not in MODES:
            raise ContractViolation(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.m < 0:
            raise ContractViolation("m must be >= 0 (0 picks it automatically)")
        if self.repeats < 1:
            raise ContractViolation("repeats must be >= 1")
        if not self.feature_counts or not self.grid_lambda or not self.grid_mu:
            raise ContractViolation("feature_counts and the search grids must be non-empty")
        self.solver_params()
        self.train_config()

    def solver_params(self, lam=None, mu=None):
        return SolverParams(
            lam=self.lam if lam is None else lam,
            mu=self.mu if mu is None else mu,
            alpha=self.alpha, beta=self.beta, eta=self.eta,
            max_iters=self.max_iters, tol=self.tol, gradient_mode=self.gradient_mode,
        )

    def train_config(self):
        return TrainConfig(
            iterations=self.iterations, spsa_a=self.spsa_a, spsa_c=self.spsa_c,
            spsa_big_a=self.spsa_big_a, seed=self.seed,
        )

    def model_kwargs(self, param_mode=None):
        return dict(
            n_stages=self.n_stages, mode=param_mode or self.param_mode,
            larg_linear=self.larg_linear, lam=self.lam, mu=self.mu,
            alpha=self.alpha, beta=self.beta, eta=self.eta,
            loss_lambda=self.loss_lambda, loss_mu=self.loss_mu,
            gradient_mode=self.gradient_mode,
        )


class Job:
    """Loaded inputs for one command, with the resolved component count."""

    def __init__(self, cfg):
        self.cfg = cfg
        a = fileio.load_matrix(cfg.data_path)
        self.data = a
        self.a = center_rows(a) if cfg.center else a
        self.labels = fileio.load_labels(cfg.labels_path) if cfg.labels_path else None
        if self.labels is not None and self.labels.size != a.shape[1]:
            raise ContractViolation(
                f"{cfg.labels_path}: {self.labels.size} labels for {a.shape[1]} samples"
            )
        if cfg.m:
            self.m = cfg.m
        else:
            auto = int(np.unique(self.labels).size) if self.labels is not None else 10
            self.m = min(auto, *a.shape)

    def loss_of(self, x):
        return objective(self.a, x, self.cfg.loss_lambda, self.cfg.loss_mu)

    def report(self, x):
        cfg = self.cfg
        counts = [h for h in cfg.feature_counts if h <= self.a.shape[0]]
        return evaluate(self.a, self.labels, x, counts, cfg.repeats, cfg.seed)


def _history_csv(records):
    out = ["iter,objective,residual_y,residual_z"]
    out += [f"{r.iter},{r.objective!r},{r.residual_y!r},{r.residual_z!r}" for r in records]
    return "\n".join(out) + "\n"


def gridsearch(job):
    """Solve for every (lam, mu) pair and keep the one with the lowest loss."""
    cfg = job.cfg
    table = []
    best = None
    for lam in cfg.grid_lambda:
        for mu in cfg.grid_mu:
            result = solve(job.a, job.m, cfg.solver_params(lam, mu))
            value = job.loss_of(result.x)
            table.append((lam, mu, value))
            if best is None or value < best[1]:
                best = (result, value, lam, mu)
    return best, table


def _run_outputs(job):
    cfg = job.cfg
    files = {}
    if cfg.mode == "admm":
        result = solve(job.a, job.m, cfg.solver_params())
        x = result.x
        files["history.csv"] = _history_csv(result.history)
    elif cfg.mode == "gridsearch":
        (result, _, lam, mu), table = gridsearch(job)
        x = result.x
        files["history.csv"] = _history_csv(result.history)
        files["grid.csv"] = "lam,mu,loss\n" + "".join(f"{l!r},{u!r},{v!r}\n" for l, u, v in table)
    else:
        model = init_model(job.a, job.m, **cfg.model_kwargs())
        trained = train(model, job.a, job.m, cfg.train_config())
        fwd = forward(trained.model, job.a, job.m)
        x = fwd.x
        files["model.txt"] = dumps_model(trained.model)
        files["train_history.csv"] = "step,loss\n" + "".join(
            f"{i},{v!r}\n" for i, v in enumerate(trained.history)
        )
        files["history.csv"] = "stage,objective,residual_y,residual_z\n" + "".join(
            f"{k + 1},{job.loss_of(s.x)!r},{s.residual_y!r},{s.residual_z!r}\n"
            for k, s in enumerate(fwd.trace)
        )
    files["x.csv"] = fileio.format_csv(x)
    files["loss.txt"] = f"{job.loss_of(x)!r}\n"
    if job.labels is not None:
        files["eval.csv"] = format_report(job.report(x))
    return files


def _ablate_outputs(job):
    cfg = job.cfg
    tcfg = cfg.train_config()
    rows = []
    (gs, _, _, _), _ = gridsearch(job)
    candidates = [("gridsearch", gs.x)]
    untrained = init_model(job.a, job.m, **cfg.model_kwargs("untied"))
    candidates.append(("untrained", forward(untrained, job.a, job.m).x))
    for name, mode in (("static", "tied"), ("dynamic", "untied")):
        model = train(init_model(job.a, job.m, **cfg.model_kwargs(mode)), job.a, job.m, tcfg).model
        candidates.append((name, forward(model, job.a, job.m).x))
    for name, x in candidates:
        row = {"config": name, "loss": job.loss_of(x)}
        if job.labels is not None:
            rep = job.report(x)
            i = int(np.argmax(rep.acc_mean))
            j = int(np.argmax(rep.nmi_mean))
            row.update(acc=rep.acc_mean[i], acc_std=rep.acc_std[i], acc_h=rep.feature_counts[i],
                       nmi=rep.nmi_mean[j], nmi_std=rep.nmi_std[j], nmi_h=rep.feature_counts[j])
        rows.append(row)
    cols = list(rows[0])
    text = ",".join(cols) + "\n" + "".join(
        ",".join(r[c] if isinstance(r[c], str) else repr(r[c]) for c in cols) + "\n" for r in rows
    )
    return {"ablation.csv": text}


def _sweep_outputs(job):
    cfg = job.cfg
    kwargs = cfg.model_kwargs()
    kwargs.pop("n_stages")
    rows = stage_sweep(job.a, job.m, cfg.k_max, cfg.train_config(), **kwargs)
    return {"sweep.csv": "n_stages,loss\n" + "".join(f"{r.n_stages},{r.loss!r}\n" for r in rows)}


def write_outputs(output_dir, files):
    """Write every file via a temporary name and rename it into place."""
    os.makedirs(output_dir, exist_ok=True)
    staged = []
    try:
        for name, content in files.items():
            final = os.path.join(output_dir, name)
            tmp = final + ".tmp"
            mode = "wb" if isinstance(content, bytes) else "w"
            with open(tmp, mode) as fh:
                fh.write(content)
            staged.append((tmp, final))
    except BaseException:
        for tmp, _ in staged:
            os.remove(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)


def _execute(cfg, build):
    job = Job(cfg)
    files = build(job)
    effective = cfg.to_dict()
    effective["m"] = job.m
    files["config.json"] = json.dumps(effective, indent=2, sort_keys=True) + "\n"
    write_outputs(cfg.output_dir or default_output_dir(), files)
    return 0


def cmd_run(cfg):
    return _execute(cfg, _run_outputs)


def cmd_ablate(cfg):
    return _execute(cfg, _ablate_outputs)


def cmd_sweep(cfg):
    return _execute(cfg, _sweep_outputs)


def cmd_eval(data_path, labels_path, x_path, output_dir=None, feature_counts=None,
             repeats=50, seed=0, center=True):
    a = fileio.load_matrix(data_path)
    if center:
        a = center_rows(a)
    labels = fileio.load_labels(labels_path)
    x = fileio.load_matrix(x_path)
    counts = [h for h in (feature_counts or DEFAULT_FEATURE_COUNTS) if h <= a.shape[0]]
    report = evaluate(a, labels, x, counts, repeats, seed)
    write_outputs(output_dir or default_output_dir(), {"eval.csv": format_report(report)})
    return 0


def cmd_synth(output_dir=None, d=100, n=200, c=4, informative_count=20, noise_sigma=0.3,
              seed=0, binary=False):
    data, labels, planted = synth(d, n, c, informative_count, noise_sigma, seed)
    files = {
        "data.spm" if binary else "data.csv":
            fileio.format_binary(data) if binary else fileio.format_csv(data),
        "labels.csv": fileio.format_labels(labels),
        "planted.csv": fileio.format_labels(planted),
    }
    write_outputs(output_dir or default_output_dir(), files)
    return 0


def _parse_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _list_of(kind):
    def parse(text):
        return [kind(t) for t in text.split(",") if t.strip()]
    return parse


_FIELD_TYPES = {
    "feature_counts": _list_of(int),
    "grid_lambda": _list_of(float),
    "grid_mu": _list_of(float),
    "center": _parse_bool,
    "larg_linear": _parse_bool,
    "eta": float,
    "labels_path": str,
    "output_dir": str,
}


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat JSON config file")
    for f in fields(RunConfig):
        kind = _FIELD_TYPES.get(f.name) or type(f.default)
        parser.add_argument(
            "--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=None,
            help=f"overrides config key {f.name!r}",
        )


def _config_from_args(args):
    values = {}
    if args.config:
        with open(args.config) as fh:
            try:
                values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ParseError(f"{args.config}: top level must be an object")
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig.from_dict(values)


def build_parser():
    parser = argparse.ArgumentParser(prog="spcanet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "solve, train or grid-search, then write X and reports"),
        ("ablate", "grid search vs untrained vs tied vs untied comparison"),
        ("sweep", "trained loss as a function of the number of stages"),
    ):
        _add_config_flags(sub.add_parser(name, help=helptext))

    p = sub.add_parser("synth", help="write a planted-cluster dataset")
    p.add_argument("--output-dir")
    p.add_argument("--d", type=int, default=100)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--c", type=int, default=4)
    p.add_argument("--informative-count", type=int, default=20)
    p.add_argument("--noise-sigma", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--binary", action="store_true", help="write data.spm instead of data.csv")

    p = sub.add_parser("eval", help="ACC/NMI report for a given projection matrix")
    p.add_argument("--data-path", required=True)
    p.add_argument("--labels-path", required=True)
    p.add_argument("--x-path", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--feature-counts", type=_list_of(int))
    p.add_argument("--repeats", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center", type=_parse_bool, default=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args.output_dir, args.d, args.n, args.c, args.informative_count,
                             args.noise_sigma, args.seed, args.binary)
        if args.command == "eval":
            return cmd_eval(args.data_path, args.labels_path, args.x_path, args.output_dir,
                            args.feature_counts, args.repeats, args.seed, args.center)
        cfg = _config_from_args(args)
        return {"run": cmd_run, "ablate": cmd_ablate, "sweep": cmd_sweep}[args.command](cfg)
    except (ContractViolation, NumericalFailure, ParseError, OSError) as exc:
        print(f"spcanet {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

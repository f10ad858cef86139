"""Unrolled ADMM network with learnable per-stage parameters.

Each stage is one :func:`spcanet.admm.admm_step` whose ``lam, mu, alpha,
beta, eta`` come from the stage's log-parameters, so the parameters stay
positive whatever values the trainer proposes. Training minimises the
reconstruction-plus-sparsity loss of the final X with SPSA, a two-point
derivative-free gradient estimate, which avoids differentiating through
the SVD.
"""
import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .admm import GRADIENT_MODES, SolverParams, admm_step, default_eta, init_state
from .errors import ContractViolation, NumericalFailure, ParseError
from .linalg import as_matrix, objective

PARAM_NAMES = ("lambda", "mu", "alpha", "beta", "eta")
MODES = ("untied", "tied")
FORMAT_HEADER = "# spcanet model v1"


@dataclass(frozen=True)
class StageParams:
    log_lambda: float
    log_mu: float
    log_alpha: float
    log_beta: float
    log_eta: float

    @classmethod
    def from_values(cls, lam, mu, alpha, beta, eta):
        return cls(*(math.log(v) for v in (lam, mu, alpha, beta, eta)))

    @classmethod
    def from_vector(cls, v):
        return cls(*(float(t) for t in v))

    def as_vector(self):
        return np.array(
            [self.log_lambda, self.log_mu, self.log_alpha, self.log_beta, self.log_eta]
        )

    def values(self):
        """Realised ``(lam, mu, alpha, beta, eta)``; raises if any is not a positive finite number."""
        with np.errstate(over="ignore"):
            vals = tuple(float(np.exp(t)) for t in self.as_vector())
        for name, v in zip(PARAM_NAMES, vals):
            if not (math.isfinite(v) and v > 0):
                raise NumericalFailure(f"stage parameter {name} realised to {v}")
        return vals

    def realize(self, gradient_mode="exact"):
        lam, mu, alpha, beta, eta = self.values()
        return SolverParams(
            lam=lam, mu=mu, alpha=alpha, beta=beta, eta=eta,
            max_iters=1, tol=0.0, gradient_mode=gradient_mode,
        )


@dataclass(frozen=True)
class UnfoldedModel:
    """A K-stage unrolled solver.

    In ``tied`` mode all stages share one parameter set (and one pair of
    mixing matrices); ``stages`` still holds K entries, all equal.
    ``mixing`` holds per-stage ``(w_u, w_v)`` pairs when ``larg_linear``
    is set. ``loss_lambda`` and ``loss_mu`` weight the training loss only.
    """

    stages: Tuple[StageParams, ...]
    mode: str = "untied"
    larg_linear: bool = False
    mixing: Optional[Tuple[Tuple[np.ndarray, np.ndarray], ...]] = None
    loss_lambda: float = 0.1
    loss_mu: float = 0.1
    gradient_mode: str = "exact"

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if len(self.stages) < 1:
            raise ContractViolation("a model needs at least one stage")
        if self.mode not in MODES:
            raise ContractViolation(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "tied" and any(s != self.stages[0] for s in self.stages):
            raise ContractViolation("tied model has differing stage parameters")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ContractViolation(f"unknown gradient_mode {self.gradient_mode!r}")
        if self.loss_lambda < 0 or self.loss_mu < 0:
            raise ContractViolation("loss weights must be >= 0")
        if self.larg_linear:
            if self.mixing is None or len(self.mixing) != len(self.stages):
                raise ContractViolation("larg_linear needs one (w_u, w_v) pair per stage")
            object.__setattr__(
                self, "mixing", tuple((np.asarray(u, float), np.asarray(v, float)) for u, v in self.mixing)
            )
        elif self.mixing is not None:
            raise ContractViolation("mixing matrices given without larg_linear")

    @property
    def n_stages(self):
        return len(self.stages)


def init_model(a, m, n_stages=5, mode="untied", larg_linear=False, lam=0.1, mu=0.1,
               alpha=1.0, beta=1.0, eta=None, loss_lambda=0.1, loss_mu=0.1,
               gradient_mode="exact"):
    """Model whose every stage equals the default fixed-parameter solver.

    ``eta=None`` picks the solver's default step for ``a``.
    """
    a = as_matrix(a, "data")
    if eta is None:
        eta = default_eta(a, alpha, beta)
    stage = StageParams.from_values(lam, mu, alpha, beta, eta)
    mixing = None
    if larg_linear:
        d = a.shape[0]
        mixing = tuple((np.eye(d), np.eye(m)) for _ in range(n_stages))
    return UnfoldedModel(
        stages=(stage,) * n_stages, mode=mode, larg_linear=larg_linear, mixing=mixing,
        loss_lambda=loss_lambda, loss_mu=loss_mu, gradient_mode=gradient_mode,
    )


class StageRecord(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    residual_y: float
    residual_z: float


class ForwardResult(NamedTuple):
    x: np.ndarray
    trace: List[StageRecord]


def forward(model, a, m, gram=None, keep_trace=True):
    """Run the K stages from the SVD initialisation and return the final X."""
    a = as_matrix(a, "data")
    if gram is None:
        gram = a @ a.T
    state = init_state(a, m)
    trace = []
    for k, stage in enumerate(model.stages):
        p = stage.realize(model.gradient_mode)
        mixing = model.mixing[k] if model.larg_linear else None
        state = admm_step(a, state, p, gram, mixing)
        if keep_trace:
            trace.append(StageRecord(state.x, state.y, state.z, state.residual_y, state.residual_z))
    return ForwardResult(state.x, trace)


def loss(model, a, x_bar):
    """Reconstruction error plus the model's fixed sparsity weights on ``x_bar``."""
    return objective(a, x_bar, model.loss_lambda, model.loss_mu)


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 200
    spsa_a: float = 0.1
    spsa_c: float = 0.1
    spsa_big_a: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 0:
            raise ContractViolation("iterations must be a non-negative integer")
        for name in ("spsa_a", "spsa_c", "spsa_big_a"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be > 0")


class TrainResult(NamedTuple):
    model: UnfoldedModel
    history: List[float]
    best_loss: float
    rejected: int


# SPSA gain exponents (Spall's standard choice)
_GAIN_DECAY = 0.602
_PERTURB_DECAY = 0.101


def _pack(model):
    stages = model.stages[:1] if model.mode == "tied" else model.stages
    parts = [s.as_vector() for s in stages]
    if model.larg_linear:
        mixing = model.mixing[:1] if model.mode == "tied" else model.mixing
        for w_u, w_v in mixing:
            parts += [w_u.ravel(), w_v.ravel()]
    return np.concatenate(parts)


def _unpack(model, theta):
    k = model.n_stages
    n_sets = 1 if model.mode == "tied" else k
    stages = [StageParams.from_vector(theta[5 * i: 5 * i + 5]) for i in range(n_sets)]
    mixing = None
    if model.larg_linear:
        d = model.mixing[0][0].shape[0]
        m = model.mixing[0][1].shape[0]
        pos = 5 * n_sets
        mixing = []
        for _ in range(n_sets):
            w_u = theta[pos: pos + d * d].reshape(d, d)
            pos += d * d
            w_v = theta[pos: pos + m * m].reshape(m, m)
            pos += m * m
            mixing.append((w_u.copy(), w_v.copy()))
    if n_sets == 1:
        stages = stages * k
        if mixing is not None:
            mixing = mixing * k
    return replace(model, stages=tuple(stages), mixing=None if mixing is None else tuple(mixing))


def _evaluate(model, a, m, gram):
    """Loss of ``model`` on ``a``, or ``inf`` when the forward pass breaks down."""
    try:
        with np.errstate(all="ignore"):
            x = forward(model, a, m, gram, keep_trace=False).x
            value = loss(model, a, x)
    except (NumericalFailure, ContractViolation, np.linalg.LinAlgError):
        return math.inf
    return value if math.isfinite(value) else math.inf


_CALIBRATION_DRAWS = 4


def _gradient_scale(model, theta, a, m, gram, rng, c):
    sizes = []
    for _ in range(_CALIBRATION_DRAWS):
        delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
        hi = _evaluate(_unpack(model, theta + c * delta), a, m, gram)
        lo = _evaluate(_unpack(model, theta - c * delta), a, m, gram)
        if math.isfinite(hi) and math.isfinite(lo):
            sizes.append(abs(hi - lo) / (2.0 * c))
    scale = float(np.mean(sizes)) if sizes else 0.0
    return scale if scale > 0 else 1.0


def _spsa(model, a, m, gram, cfg, rng):
    theta = _pack(model)
    current = _evaluate(model, a, m, gram)
    if not math.isfinite(current):
        raise NumericalFailure("initial model produces a non-finite loss")
    best_theta, best = theta, current
    history = [current]
    rejected = 0
    if cfg.iterations == 0:
        return model, history, best, rejected
    scale = _gradient_scale(model, theta, a, m, gram, rng, cfg.spsa_c)

    for t in range(1, cfg.iterations + 1):
        a_t = cfg.spsa_a / (t + cfg.spsa_big_a) ** _GAIN_DECAY
        c_t = cfg.spsa_c / t ** _PERTURB_DECAY
        delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
        theta_plus = theta + c_t * delta
        theta_minus = theta - c_t * delta
        loss_plus = _evaluate(_unpack(model, theta_plus), a, m, gram)
        loss_minus = _evaluate(_unpack(model, theta_minus), a, m, gram)
        for cand, value in ((theta_plus, loss_plus), (theta_minus, loss_minus)):
            if value < best:
                best_theta, best = cand, value
        if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
            rejected += 1
            history.append(current)
            continue
        ghat = (loss_plus - loss_minus) / (2.0 * c_t * scale) * delta
        proposal = theta - a_t * ghat
        value = _evaluate(_unpack(model, proposal), a, m, gram)
        if not math.isfinite(value):
            rejected += 1
            history.append(current)
            continue
        theta, current = proposal, value
        if current < best:
            best_theta, best = theta, current
        history.append(current)

    return _unpack(model, best_theta), history, best, rejected


def _as_tied(model):
    k = model.n_stages
    mixing = None if model.mixing is None else (model.mixing[0],) * k
    return replace(model, mode="tied", stages=(model.stages[0],) * k, mixing=mixing)


def _all_stages_equal(model):
    if any(s != model.stages[0] for s in model.stages):
        return False
    if model.mixing is None:
        return True
    u0, v0 = model.mixing[0]
    return all(np.array_equal(u, u0) and np.array_equal(v, v0) for u, v in model.mixing)


def train(model, a, m, cfg=None):
    """Fit the model's log-parameters (and mixing matrices, if enabled) by SPSA.

    Step ``t`` draws a Rademacher direction ``delta``, evaluates the loss
    at ``theta +/- c_t delta`` and moves along the two-point gradient
    estimate with gain ``a_t = spsa_a / (t + spsa_big_a)^0.602`` and
    perturbation ``c_t = spsa_c / t^0.101``. Gradient estimates are
    divided by the mean size of a few estimates drawn at the starting
    point, so ``spsa_a`` acts as a step length in log-parameter units
    whatever the scale of the loss.

    An untied model whose stages are still all equal is first trained as
    a tied model, then every stage is released and training continues
    from there; the untied search therefore starts at the tied optimum.

    Candidates with a non-finite loss are skipped and counted in
    ``rejected``. The best model seen (perturbed points included) is
    returned, with the loss of the iterate after every step.
    """
    cfg = cfg or TrainConfig()
    a = as_matrix(a, "data")
    gram = a @ a.T
    rng = np.random.default_rng(cfg.seed)

    warm = (
        model.mode == "untied"
        and model.n_stages > 1
        and cfg.iterations > 0
        and _all_stages_equal(model)
    )
    if not warm:
        fitted, history, best, rejected = _spsa(model, a, m, gram, cfg, rng)
        return TrainResult(fitted, history, best, rejected)

    tied, history, _, rejected = _spsa(_as_tied(model), a, m, gram, cfg, rng)
    fitted, more, best, more_rejected = _spsa(replace(tied, mode="untied"), a, m, gram, cfg, rng)
    return TrainResult(fitted, history + more[1:], best, rejected + more_rejected)


class SweepRow(NamedTuple):
    n_stages: int
    loss: float


def stage_sweep(a, m, k_max, cfg=None, **model_kwargs):
    """Train one model per stage count ``K = 1..k_max`` with identical budgets."""
    if k_max < 1:
        raise ContractViolation("k_max must be >= 1")
    rows = []
    for k in range(1, k_max + 1):
        model = init_model(a, m, n_stages=k, **model_kwargs)
        rows.append(SweepRow(k, train(model, a, m, cfg).best_loss))
    return rows


def _fmt(v):
    return repr(float(v))


def dumps_model(model):
    """Serialise to the flat ``key = value`` text format (floats round-trip exactly)."""
    lines = [
        FORMAT_HEADER,
        f"n_stages = {model.n_stages}",
        f"mode = {model.mode}",
        f"larg_linear = {'true' if model.larg_linear else 'false'}",
        f"gradient_mode = {model.gradient_mode}",
        f"loss_lambda = {_fmt(model.loss_lambda)}",
        f"loss_mu = {_fmt(model.loss_mu)}",
    ]
    for k, stage in enumerate(model.stages):
        for name, v in zip(PARAM_NAMES, stage.as_vector()):
            lines.append(f"stage.{k}.log_{name} = {_fmt(v)}")
        if model.larg_linear:
            for tag, w in zip(("w_u", "w_v"), model.mixing[k]):
                lines.append(f"stage.{k}.{tag} = {w.shape[0]}x{w.shape[1]}")
                lines.extend(",".join(_fmt(v) for v in row) for row in w)
    return "\n".join(lines) + "\n"


def loads_model(text):
    lines = text.splitlines()
    keys = {}
    blocks = {}
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw or raw.startswith("#"):
            continue
        if "=" not in raw:
            raise ParseError(f"model line {i}: expected 'key = value', got {raw!r}")
        key, value = (t.strip() for t in raw.split("=", 1))
        if key.endswith((".w_u", ".w_v")):
            try:
                rows, cols = (int(t) for t in value.split("x"))
                block = [[float(t) for t in lines[i + r].split(",")] for r in range(rows)]
            except (ValueError, IndexError) as exc:
                raise ParseError(f"model line {i}: bad matrix block for {key}: {exc}") from exc
            if any(len(r) != cols for r in block):
                raise ParseError(f"model line {i}: matrix block {key} is not {rows}x{cols}")
            blocks[key] = np.array(block)
            i += rows
        else:
            keys[key] = value
    try:
        k = int(keys.pop("n_stages"))
        mode = keys.pop("mode")
        larg = keys.pop("larg_linear") == "true"
        gradient_mode = keys.pop("gradient_mode")
        loss_lambda = float(keys.pop("loss_lambda"))
        loss_mu = float(keys.pop("loss_mu"))
        stages = [
            StageParams(*(float(keys.pop(f"stage.{s}.log_{name}")) for name in PARAM_NAMES))
            for s in range(k)
        ]
        mixing = None
        if larg:
            mixing = tuple((blocks.pop(f"stage.{s}.w_u"), blocks.pop(f"stage.{s}.w_v")) for s in range(k))
    except KeyError as exc:
        raise ParseError(f"model file is missing key {exc.args[0]}") from exc
    except ValueError as exc:
        raise ParseError(f"model file has a malformed value: {exc}") from exc
    if keys or blocks:
        raise ParseError(f"model file has unknown keys: {sorted(keys) + sorted(blocks)}")
    return UnfoldedModel(
        stages=tuple(stages), mode=mode, larg_linear=larg, mixing=mixing,
        loss_lambda=loss_lambda, loss_mu=loss_mu, gradient_mode=gradient_mode,
    )


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read())

"""Truncation-error experiments: strong, pathwise, and weak, with rate fitting.

Every experiment couples the coarse approximation to the reference through the
same noise realization: the band-kappa solution is by construction the
projection of the band-kappa_ref solution, because modes evolve independently.
The per-sample error is therefore exactly the norm of the reference tail above
degree kappa (computed in coefficient space via Parseval, or on a grid).

Since the per-mode sampling is exact in distribution, experiments take a
single step of size T; the number of time steps does not enter the error.
Sample i draws from a generator seeded deterministically from (seed, i), so
results do not depend on how samples are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .harmonics import SphereGrid, grid_l2_norm, grid_max_abs, synthesize
from .modes import CoefficientField, degree_offsets, degree_sizes, laplacian_eigenvalue, mode_count
from .noise import ConvFactorTable, _wave_entries
from .schrodinger import SchrodingerState, schrodinger_step
from .spectrum import PowerSpectrum, random_sobolev_data
from .wave import Propagator, WaveState, propagate, step as wave_step

EQUATIONS = ("wave", "wave-dsphere", "schrodinger")
ERROR_KINDS = ("l2-coefficients", "l2-grid", "max-grid")
INITIAL_DATA_MODES = ("zero", "random-sobolev", "file")
WEAK_METHODS = ("mc", "analytic")

# Test functionals phi(u); both depend on u only through the squared L^2 norm.
FUNCTIONALS = {
    "squared-norm": lambda s: s,
    "exp-neg-squared-norm": lambda s: np.exp(-s),
}


@dataclass
class ExperimentConfig:
    """Knobs for one convergence experiment (and for path simulation)."""

    equation: str = "wave"
    dim: int = 3
    alpha: float = 3.0
    scale: float = 1.0
    ell0: int = 1
    head_value: float = 1.0
    beta: float | None = None
    gamma: float | None = None
    initial_data: str = "zero"
    v1_file: str | None = None
    v2_file: str | None = None
    T: float = 1.0
    steps: int = 1
    kappas: list[int] = field(default_factory=lambda: [2, 4, 8, 16, 32])
    kappa_ref: int = 64
    samples: int = 100
    seed: int = 0
    error_kind: str = "l2-coefficients"
    n_theta: int | None = None
    n_phi: int | None = None
    weak_functional: str = "squared-norm"
    weak_method: str = "mc"
    store_every: int = 1
    threads: int = 1
    output: str = "."

    def validate(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"unknown equation {self.equation!r}, expected one of {EQUATIONS}")
        if self.error_kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.error_kind!r}")
        if self.initial_data not in INITIAL_DATA_MODES:
            raise ValueError(f"unknown initial data mode {self.initial_data!r}")
        if self.weak_functional not in FUNCTIONALS:
            raise ValueError(f"unknown test functional {self.weak_functional!r}")
        if self.weak_method not in WEAK_METHODS:
            raise ValueError(f"unknown weak method {self.weak_method!r}")
        if self.equation != "wave-dsphere" and self.dim != 3:
            raise ValueError("dim != 3 requires equation == 'wave-dsphere'")
        if self.dim < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {self.dim}")
        if self.dim != 3 and self.error_kind != "l2-coefficients":
            raise ValueError("grid-based errors are available for dim == 3 only")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if not self.kappas:
            raise ValueError("kappas must be non-empty")
        ks = list(self.kappas)
        if any(k < 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError(f"kappas must be strictly increasing and non-negative, got {ks}")
        if self.kappa_ref < 0:
            raise ValueError(f"kappa_ref must be non-negative, got {self.kappa_ref}")
        if self.initial_data == "file" and self.v1_file is None and self.v2_file is None:
            raise ValueError("initial_data == 'file' needs v1_file and/or v2_file")

    def validate_experiment(self):
        """Stricter checks for truncation-error experiments (not needed to simulate)."""
        self.validate()
        if self.kappa_ref <= max(self.kappas):
            raise ValueError(
                f"kappa_ref ({self.kappa_ref}) must exceed every tested kappa "
                f"(max {max(self.kappas)})")

    def power_spectrum(self) -> PowerSpectrum:
        return PowerSpectrum(self.alpha, self.scale, self.ell0, self.head_value)

    def grid(self) -> SphereGrid:
        n_theta = self.n_theta if self.n_theta is not None else self.kappa_ref + 1
        n_phi = self.n_phi if self.n_phi is not None else 2 * self.kappa_ref + 2
        return SphereGrid(n_theta, n_phi)

    def component_names(self) -> tuple[str, str]:
        if self.equation == "schrodinger":
            return ("real", "imag")
        return ("position", "velocity")

    def resolved(self) -> dict:
        """Config as written into output metadata; enough to re-run bit-identically.

        The output directory is omitted: it does not influence the numbers, and
        keeping it out makes runs into different directories byte-comparable.
        """
        d = asdict(self)
        d["kappas"] = list(self.kappas)
        del d["output"]
        return d


@dataclass(eq=False)
class FitResult:
    slope: float
    intercept: float
    residuals: np.ndarray


def fit_rate(kappas, errors) -> FitResult:
    """Least-squares slope of log(error) against log(kappa)."""
    kappas = np.asarray(kappas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if kappas.size < 3:
        raise ValueError(f"rate fitting needs at least 3 points, got {kappas.size}")
    if np.any(errors <= 0.0):
        raise ValueError("rate fitting needs strictly positive errors "
                         "(drop exact-zero points such as kappa == kappa_ref)")
    x = np.log(kappas)
    y = np.log(errors)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - (slope * x + intercept)
    return FitResult(float(slope), float(intercept), residuals)


@dataclass(eq=False)
class ErrorTable:
    """Per-kappa error statistics with a fitted log-log rate."""

    kappas: list[int]
    errors: np.ndarray
    stderrs: np.ndarray
    slope: float
    fit_kappas: list[int]
    metadata: dict

    def __post_init__(self):
        ks = list(self.kappas)
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("kappas must be strictly increasing")
        if np.any(np.asarray(self.errors) < 0):
            raise ValueError("errors must be non-negative")


def default_fit_range(kappas, kappa_ref) -> list[int]:
    """Fit range: drop kappa_ref (zero error) and the smallest, pre-asymptotic kappa."""
    ks = [k for k in kappas if k != kappa_ref]
    return ks[1:]


def _make_table(cfg, kind, component, kappas, errors, stderrs, extra=None) -> ErrorTable:
    fit_ks = default_fit_range(kappas, cfg.kappa_ref)
    sel = [kappas.index(k) for k in fit_ks]
    if len(fit_ks) >= 3:
        slope = fit_rate(fit_ks, np.asarray(errors)[sel]).slope
    else:
        slope = float("nan")  # too few points after exclusions; no rate claimed
    metadata = {
        "experiment": kind,
        "component": component,
        "time_stepping": "single-exact-step",
        "fit_kappas": list(fit_ks),
        "slope": slope,
    }
    metadata.update(cfg.resolved())
    if extra:
        metadata.update(extra)
    return ErrorTable(list(kappas), np.asarray(errors, dtype=float),
                      np.asarray(stderrs, dtype=float), slope, list(fit_ks), metadata)


# ---------------------------------------------------------------------------
# sampling of coupled terminal states at the reference band limit
# ---------------------------------------------------------------------------

def _load_initial_fields(cfg):
    """Fixed (non-random) initial data, or None per component when absent."""
    v1 = v2 = None
    if cfg.initial_data == "file":
        from .io import read_coefficient_csv
        if cfg.v1_file:
            v1 = read_coefficient_csv(cfg.v1_file).truncated(cfg.kappa_ref)
        if cfg.v2_file:
            v2 = read_coefficient_csv(cfg.v2_file).truncated(cfg.kappa_ref)
    return v1, v2


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


class _TerminalSampler:
    """Draws coupled (component1, component2) coefficient arrays at kappa_ref.

    Draw order per sample: first component data (if random), second component
    data (if random), then the convolution increments; this pins reproducibility.
    """

    def __init__(self, cfg: ExperimentConfig):
        cfg.validate_experiment()
        self.cfg = cfg
        self.ps = cfg.power_spectrum()
        self.kref = cfg.kappa_ref
        self.dim = cfg.dim
        self.fixed_v1, self.fixed_v2 = _load_initial_fields(cfg)
        if cfg.equation == "schrodinger":
            self.factors = ConvFactorTable.for_schrodinger(self.kref, cfg.T)
            self.prop = None
        else:
            self.factors = ConvFactorTable.for_wave(self.kref, self.dim, cfg.T)
            self.prop = Propagator.build(self.kref, self.dim, cfg.T)

    def _initial(self, rng, fixed, exponent):
        if self.cfg.initial_data == "random-sobolev" and exponent is not None:
            return random_sobolev_data(exponent, self.kref, rng, self.dim)
        if fixed is not None:
            return fixed
        return CoefficientField.zeros(self.kref, self.dim)

    def __call__(self, index: int):
        cfg = self.cfg
        rng = _sample_rng(cfg.seed, index)
        v1 = self._initial(rng, self.fixed_v1, cfg.beta)
        v2 = self._initial(rng, self.fixed_v2, cfg.gamma)
        if cfg.equation == "schrodinger":
            state = SchrodingerState(v1, v2)
            state = schrodinger_step(state, cfg.T, self.ps, rng, self.factors)
            return state.real.data, state.imag.data
        state = WaveState(v1, v2)
        state = wave_step(state, cfg.T, self.ps, rng, self.factors, self.prop)
        return state.position.data, state.velocity.data


class _TailErrors:
    """Per-sample truncation errors for every tested kappa and one error kind."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.offsets = degree_offsets(cfg.kappa_ref, cfg.dim)
        self.counts = [mode_count(k, cfg.dim) for k in cfg.kappas]
        if cfg.error_kind in ("l2-grid", "max-grid"):
            self.grid = cfg.grid()
            self.grid.basis_table(cfg.kappa_ref)  # build the cache up front
        else:
            self.grid = None

    def __call__(self, data: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if cfg.error_kind == "l2-coefficients":
            per_degree = np.add.reduceat(data**2, self.offsets)
            suffix = np.cumsum(per_degree[::-1])[::-1]
            tails = [suffix[k + 1] if k + 1 <= cfg.kappa_ref else 0.0 for k in cfg.kappas]
            return np.sqrt(np.maximum(tails, 0.0))
        out = np.empty(len(cfg.kappas))
        for j, n in enumerate(self.counts):
            tail = data.copy()
            tail[:n] = 0.0
            f = synthesize(CoefficientField(tail, cfg.kappa_ref, cfg.dim), self.grid)
            out[j] = grid_l2_norm(f) if cfg.error_kind == "l2-grid" else grid_max_abs(f)
        return out


def _map_samples(cfg, fn, n):
    """Evaluate fn(0..n-1) preserving index order; threads only bound workers."""
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, range(n)))
    return [fn(i) for i in range(n)]


def _grid_metadata(tails: "_TailErrors") -> dict:
    if tails.grid is None:
        return {}
    return {"grid_n_theta": tails.grid.n_theta, "grid_n_phi": tails.grid.n_phi}


def strong_error_experiment(cfg: ExperimentConfig) -> dict[str, ErrorTable]:
    """Mean-square truncation errors per kappa for both solution components."""
    sampler = _TerminalSampler(cfg)
    tails = _TailErrors(cfg)

    def one(i):
        c1, c2 = sampler(i)
        return tails(c1), tails(c2)

    results = _map_samples(cfg, one, cfg.samples)
    names = cfg.component_names()
    out = {}
    for pos, name in enumerate(names):
        sq = np.array([r[pos] ** 2 for r in results])
        mean_sq = sq.mean(axis=0)
        rms = np.sqrt(mean_sq)
        if cfg.samples > 1:
            se_mean = sq.std(axis=0, ddof=1) / math.sqrt(cfg.samples)
            stderr = np.where(rms > 0, se_mean / (2.0 * np.maximum(rms, 1e-300)), 0.0)
        else:
            stderr = np.zeros_like(rms)
        out[name] = _make_table(cfg, "strong", name, list(cfg.kappas), rms, stderr,
                                extra=_grid_metadata(tails))
    return out


def pathwise_error_experiment(cfg: ExperimentConfig) -> dict[str, ErrorTable]:
    """Truncation errors along a single realization (sample index 0)."""
    sampler = _TerminalSampler(cfg)
    tails = _TailErrors(cfg)
    c1, c2 = sampler(0)
    names = cfg.component_names()
    out = {}
    for name, data in zip(names, (c1, c2)):
        errs = tails(data)
        out[name] = _make_table(cfg, "pathwise", name, list(cfg.kappas), errs,
                                np.zeros_like(errs), extra=_grid_metadata(tails))
    return out


def weak_error_experiment(cfg: ExperimentConfig,
                          functional: str | None = None) -> dict[str, ErrorTable]:
    """|E phi(u^kref) - E phi(u^kappa)| with common random numbers.

    Both supported functionals depend on u only through its squared L^2 norm,
    which is a prefix sum of squared coefficients under the coupling.
    """
    name_phi = functional or cfg.weak_functional
    if name_phi not in FUNCTIONALS:
        raise ValueError(f"unknown test functional {name_phi!r}")
    phi = FUNCTIONALS[name_phi]
    sampler = _TerminalSampler(cfg)
    offsets = degree_offsets(cfg.kappa_ref, cfg.dim)
    k_idx = np.asarray(cfg.kappas)

    def one(i):
        deltas = []
        for data in sampler(i):
            per_degree = np.add.reduceat(data**2, offsets)
            prefix = np.cumsum(per_degree)
            ref = phi(prefix[-1])
            deltas.append(ref - phi(prefix[k_idx]))
        return deltas

    results = _map_samples(cfg, one, cfg.samples)
    names = cfg.component_names()
    out = {}
    for pos, name in enumerate(names):
        d = np.array([r[pos] for r in results])
        mean = d.mean(axis=0)
        stderr = (d.std(axis=0, ddof=1) / math.sqrt(cfg.samples)
                  if cfg.samples > 1 else np.zeros_like(mean))
        out[name] = _make_table(cfg, "weak-mc", name, list(cfg.kappas),
                                np.abs(mean), stderr,
                                extra={"functional": name_phi})
    return out


def analytic_second_moment(ps: PowerSpectrum, kappa: int, t: float, dim: int = 3,
                           v1: CoefficientField | None = None,
                           v2: CoefficientField | None = None):
    """Closed-form E ||u1^kappa(t)||^2 and E ||u2^kappa(t)||^2.

    The noise contributes sum_{ell<=kappa} h(ell,dim) A_ell C_ell(t)_{11|22};
    deterministic initial data adds the exactly propagated coefficients.
    Zero-variance oracle for weak errors and a sanity check for MC estimates.
    """
    lams = np.array([-laplacian_eigenvalue(ell, dim) for ell in range(kappa + 1)])
    c11, _, c22 = _wave_entries(lams, t)
    sizes = degree_sizes(kappa, dim).astype(float)
    a = ps.values(kappa)
    pos = float(np.dot(sizes, a * c11))
    vel = float(np.dot(sizes, a * c22))
    if v1 is not None or v2 is not None:
        prop = Propagator.build(kappa, dim, t)
        z = CoefficientField.zeros(kappa, dim)
        state = WaveState((v1 or z).truncated(kappa), (v2 or z).truncated(kappa))
        moved = propagate(state, prop)
        pos += float(np.sum(moved.position.data**2))
        vel += float(np.sum(moved.velocity.data**2))
    return pos, vel


def analytic_weak_error_experiment(cfg: ExperimentConfig) -> dict[str, ErrorTable]:
    """Weak errors of the squared norm from the second-moment formula (no sampling)."""
    if cfg.equation == "schrodinger":
        raise ValueError("the analytic weak oracle covers the wave equation only")
    if cfg.initial_data == "random-sobolev":
        raise ValueError("the analytic weak oracle needs deterministic initial data")
    cfg.validate_experiment()
    ps = cfg.power_spectrum()
    v1, v2 = _load_initial_fields(cfg)
    ref = analytic_second_moment(ps, cfg.kappa_ref, cfg.T, cfg.dim, v1, v2)
    names = cfg.component_names()
    errors = {n: [] for n in names}
    for k in cfg.kappas:
        vals = analytic_second_moment(ps, k, cfg.T, cfg.dim, v1, v2)
        for n, r, v in zip(names, ref, vals):
            errors[n].append(abs(r - v))
    return {
        n: _make_table(cfg, "weak-analytic", n, list(cfg.kappas),
                       np.asarray(errors[n]), np.zeros(len(cfg.kappas)),
                       extra={"functional": "squared-norm"})
        for n in names
    }


def theoretical_rates(cfg: ExperimentConfig) -> dict[str, float]:
    """Predicted log-log slopes implied by the spectrum decay and data smoothness."""
    if cfg.equation == "schrodinger":
        r = cfg.alpha / 2.0 - 1.0
        return {"real": -r, "imag": -r}
    pos_terms = [(cfg.alpha + 3.0 - cfg.dim) / 2.0]
    vel_terms = [(cfg.alpha + 1.0 - cfg.dim) / 2.0]
    if cfg.initial_data != "zero":
        if cfg.beta is not None:
            pos_terms.append(cfg.beta)
            vel_terms.append(cfg.beta - 1.0)
        if cfg.gamma is not None:
            pos_terms.append(cfg.gamma + 1.0)
            vel_terms.append(cfg.gamma)
    return {"position": -min(pos_terms), "velocity": -min(vel_terms)}

"""Seeded Monte Carlo sweeps, per-trial records and constant estimation."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammainc
from scipy.stats import binomtest, norm

from .cech import CechComplex, _enumerate
from .errors import ConfigError, FitError, MorseEulerViolation
from .geometry import GeometryContext
from .homology import betti_numbers
from .morse import _census_from_kernel, euler_coefficients, is_covered
from .sampling import RngStream, sample_poisson
from .theta import DEFAULT_EPSILON, count_theta_cycles

LAMBDA_RULES = ("absolute", "offset")


def offset_lambda(n: float, c: float, w: float) -> float:
    """log n + c log log n + w."""
    return math.log(n) + c * math.log(math.log(n)) + w


@dataclass
class SweepConfig:
    dim: int
    n_values: list
    lambda_rule: str = "absolute"
    lambda_values: list = field(default_factory=list)
    c: float = 0.0
    w_values: list = field(default_factory=list)
    trials: int = 1
    master_seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    outputs: str = "sweep.csv"

    def grid(self) -> list[tuple[float, float, float]]:
        """Grid points ``(n, Lambda, w)`` in sweep order; w is nan for absolute Lambda."""
        pts = []
        for n in self.n_values:
            if self.lambda_rule == "absolute":
                pts.extend((float(n), float(lam), math.nan) for lam in self.lambda_values)
            else:
                pts.extend((float(n), offset_lambda(n, self.c, w), float(w)) for w in self.w_values)
        return pts

    @property
    def ctx(self) -> GeometryContext:
        return GeometryContext(self.dim)

    def validate(self) -> "SweepConfig":
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        if self.lambda_rule not in LAMBDA_RULES:
            raise ConfigError(f"lambda_rule must be one of {LAMBDA_RULES}, got {self.lambda_rule!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if any(not n > 0 for n in self.n_values):
            raise ConfigError("n_values must be positive")
        if self.lambda_rule == "offset" and any(n <= math.e for n in self.n_values):
            raise ConfigError("offset rule needs n > e so that log log n is defined")
        ctx = self.ctx
        for n, lam, _ in self.grid():
            if not lam > 0:
                raise ConfigError(f"Lambda must be positive, got {lam} at n={n}")
            r = ctx.radius_for_lambda(lam, n)
            if r >= ctx.r_max:
                raise ConfigError(f"n={n}, Lambda={lam:.6g} gives r={r:.6g}, which exceeds "
                                  f"r_max = r_conv/3 = {ctx.r_max:.6g}")
        return self

    @classmethod
    def from_file(cls, path) -> "SweepConfig":
        """Parse flat ``key=value`` text; lists are comma-separated, ``#`` starts a comment."""
        kinds = {"dim": int, "trials": int, "master_seed": int, "c": float, "epsilon": float,
                 "lambda_rule": str, "outputs": str,
                 "n_values": list, "lambda_values": list, "w_values": list}
        vals: dict = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = (t.strip() for t in line.partition("="))
                if not sep or key not in kinds:
                    raise ConfigError(f"{path}:{lineno}: unrecognized line {raw.strip()!r}")
                try:
                    if kinds[key] is list:
                        vals[key] = [float(v) for v in value.split(",") if v.strip()]
                    else:
                        vals[key] = kinds[key](value)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
        if "dim" not in vals or "n_values" not in vals:
            raise ConfigError(f"{path}: dim and n_values are required")
        return cls(**vals).validate()


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: int
    n_realized: int
    lam: float
    r: float
    betti: tuple
    C: tuple
    chi_betti: int
    chi_morse: int
    covered: bool
    theta: tuple  # beta_k^eps for k = 1..d-1; empty entries when Lambda <= 1
    torus_homology_match: bool

    @staticmethod
    def header(dim: int) -> list[str]:
        return (["trial_index", "seed", "n_realized", "lambda", "r"]
                + [f"betti_{k}" for k in range(dim + 1)]
                + [f"C_{k}" for k in range(dim + 1)]
                + ["chi_betti", "chi_morse", "covered"]
                + [f"theta_{k}" for k in range(1, dim)]
                + ["torus_homology_match"])

    def row(self) -> list[str]:
        return ([str(self.trial_index), str(self.seed), str(self.n_realized),
                 f"{self.lam:.17g}", f"{self.r:.17g}"]
                + [str(b) for b in self.betti] + [str(c) for c in self.C]
                + [str(self.chi_betti), str(self.chi_morse), str(int(self.covered))]
                + ["" if t is None else str(t) for t in self.theta]
                + [str(int(self.torus_homology_match))])

    def theta_violations(self) -> int:
        """Indices k where the Theta count exceeds beta_k (a broken lower bound)."""
        return sum(1 for k, t in enumerate(self.theta, start=1) if t is not None and t > self.betti[k])


def evaluate_cloud(cloud, r: float, lam: float, ctx: GeometryContext, epsilon: float = DEFAULT_EPSILON,
                   trial_index: int = 0, seed: int = 0, with_theta: bool = True) -> TrialRecord:
    """Complex, homology, critical census, coverage and Theta-counts for one cloud at radius r."""
    d = ctx.dim
    simp, crit, ties = _enumerate(cloud, r, d + 1, d, True)
    cplx = CechComplex(dim=d, radius=float(r), vertices=[v for v, _ in simp], radii=[x for _, x in simp])
    bv = betti_numbers(cplx)
    census = _census_from_kernel(crit, ties, len(cloud), d, r)
    if bv.chi_from_betti != census.chi_morse:
        raise MorseEulerViolation(
            f"trial {trial_index}: chi from Betti numbers {bv.chi_from_betti} != "
            f"chi from critical points {census.chi_morse} (betti={bv.betti}, C={census.counts})")
    covered = is_covered(cloud, r, ctx) if len(cloud) else False
    if with_theta and lam > 1:
        theta, _ = count_theta_cycles(cloud, r, epsilon, ctx, lam=lam, census=census)
    else:
        theta = (None,) * (d - 1)
    return TrialRecord(trial_index=trial_index, seed=seed, n_realized=len(cloud), lam=float(lam),
                       r=float(r), betti=tuple(int(b) for b in bv.betti), C=tuple(census.counts),
                       chi_betti=bv.chi_from_betti, chi_morse=census.chi_morse, covered=bool(covered),
                       theta=tuple(theta), torus_homology_match=bv.matches_torus())


def run_trial(config: SweepConfig, trial_index: int) -> TrialRecord:
    """Trial ``trial_index`` of the sweep; grid point ``trial_index // trials``.

    The cloud comes from stream ``trial_index`` of ``master_seed``, so each
    record is reproducible on its own.
    """
    grid = config.grid()
    g = trial_index // config.trials
    if not 0 <= g < len(grid):
        raise ConfigError(f"trial index {trial_index} outside the sweep")
    n, lam, _ = grid[g]
    ctx = config.ctx
    r = ctx.radius_for_lambda(lam, n)
    if r >= ctx.r_max:
        raise ConfigError(f"r={r:.6g} exceeds r_max = r_conv/3 = {ctx.r_max:.6g}")
    stream = RngStream(config.master_seed, trial_index)
    cloud = sample_poisson(n, ctx, stream)
    return evaluate_cloud(cloud, r, lam, ctx, config.epsilon, trial_index, stream.seed)


# --- summaries -------------------------------------------------------------

def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass(frozen=True)
class GridSummary:
    n: float
    lam: float
    w: float
    trials: int
    p_covered: float
    covered_ci: tuple
    p_match: float
    match_ci: tuple
    betti_mean: tuple
    betti_se: tuple
    C_mean: tuple
    C_se: tuple
    theta_mean: tuple
    theta_se: tuple

    @staticmethod
    def header(dim: int) -> list[str]:
        cols = ["n", "lambda", "w", "trials", "p_covered", "covered_lo", "covered_hi",
                "p_match", "match_lo", "match_hi"]
        for name, ks in (("betti", range(dim + 1)), ("C", range(dim + 1)), ("theta", range(1, dim))):
            for k in ks:
                cols += [f"{name}_{k}_mean", f"{name}_{k}_se"]
        return cols

    def row(self) -> list[str]:
        out = [f"{self.n:.17g}", f"{self.lam:.17g}", f"{self.w:.17g}", str(self.trials),
               f"{self.p_covered:.17g}", f"{self.covered_ci[0]:.17g}", f"{self.covered_ci[1]:.17g}",
               f"{self.p_match:.17g}", f"{self.match_ci[0]:.17g}", f"{self.match_ci[1]:.17g}"]
        for means, ses in ((self.betti_mean, self.betti_se), (self.C_mean, self.C_se),
                           (self.theta_mean, self.theta_se)):
            for m, s in zip(means, ses):
                out += [f"{m:.17g}", f"{s:.17g}"]
        return out


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if len(v) == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
    return float(v.mean()), se


def summarize(records: Sequence[TrialRecord], n: float, lam: float, w: float, dim: int) -> GridSummary:
    T = len(records)
    cov = sum(r.covered for r in records)
    match = sum(r.torus_homology_match for r in records)

    def cols(getter, ks):
        stats = [_mean_se([getter(r)[k] for r in records]) for k in ks]
        return tuple(s[0] for s in stats), tuple(s[1] for s in stats)

    bm, bs = cols(lambda r: r.betti, range(dim + 1))
    cm, cs = cols(lambda r: r.C, range(dim + 1))
    tm, ts = cols(lambda r: r.theta, range(dim - 1))
    return GridSummary(n, lam, w, T, cov / T if T else math.nan, wilson_interval(cov, T),
                       match / T if T else math.nan, wilson_interval(match, T), bm, bs, cm, cs, tm, ts)


def _run_many(config: SweepConfig, indices: Iterable[int], workers: int) -> list[TrialRecord]:
    indices = list(indices)
    if workers <= 1:
        return [run_trial(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so output order never depends on completion order
        return list(pool.map(run_trial, [config] * len(indices), indices, chunksize=4))


def sweep(config: SweepConfig, workers: int = 1) -> list[GridSummary]:
    """Run every trial, write the trial CSV to ``config.outputs`` and the per-grid summary next to it."""
    config.validate()
    out = Path(config.outputs)
    summary_path = out.with_name(out.stem + ".summary.csv")
    d = config.dim
    summaries = []
    with open(out, "w", newline="") as fh, open(summary_path, "w", newline="") as sh:
        w = csv.writer(fh)
        sw = csv.writer(sh)
        w.writerow(TrialRecord.header(d))
        sw.writerow(GridSummary.header(d))
        for g, (n, lam, wv) in enumerate(config.grid()):
            idx = range(g * config.trials, (g + 1) * config.trials)
            recs = _run_many(config, idx, workers)
            for rec in recs:
                w.writerow(rec.row())
            fh.flush()
            s = summarize(recs, n, lam, wv, d)
            sw.writerow(s.row())
            summaries.append(s)
    return summaries


def read_records(path, dim: int) -> list[TrialRecord]:
    """Load a trial CSV written by ``sweep``."""
    recs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TrialRecord.header(dim):
            raise ConfigError(f"{path}: header does not match a d={dim} trial CSV")
        for row in reader:
            recs.append(TrialRecord(
                trial_index=int(row["trial_index"]), seed=int(row["seed"]),
                n_realized=int(row["n_realized"]), lam=float(row["lambda"]), r=float(row["r"]),
                betti=tuple(int(row[f"betti_{k}"]) for k in range(dim + 1)),
                C=tuple(int(row[f"C_{k}"]) for k in range(dim + 1)),
                chi_betti=int(row["chi_betti"]), chi_morse=int(row["chi_morse"]),
                covered=row["covered"] == "1",
                theta=tuple(int(row[f"theta_{k}"]) if row[f"theta_{k}"] else None for k in range(1, dim)),
                torus_homology_match=row["torus_homology_match"] == "1"))
    return recs


# --- constant estimation -----------------------------------------------------

@dataclass(frozen=True)
class ConstantFit:
    """Least-squares estimates of D_1..D_d and the implied A_1..A_{d-1}."""

    lambdas: np.ndarray
    D: np.ndarray
    D_se: np.ndarray
    D_cov: np.ndarray
    A: np.ndarray
    A_se: np.ndarray
    # relative residuals (observed - fitted) / fitted, shape (d, grid)
    residuals: np.ndarray
    a0_stat: float
    a0_se: float
    level: float = 0.95

    def _ci(self, est, se):
        z = norm.ppf(0.5 + self.level / 2)
        return np.column_stack([est - z * se, est + z * se])

    @property
    def D_ci(self) -> np.ndarray:
        return self._ci(self.D, self.D_se)

    @property
    def A_ci(self) -> np.ndarray:
        return self._ci(self.A, self.A_se)

    @property
    def max_rel_residual(self) -> np.ndarray:
        return np.nanmax(np.abs(self.residuals), axis=1)


def fit_constants(lambdas, means, cov=None) -> ConstantFit:
    """Fit E[C_k]/n = D_k P(k, Lambda) given per-grid means.

    ``means`` has shape (d, G): the mean of C_k/n at each Lambda. ``cov`` is
    an optional (G, d, d) array with the covariance of those means; it sets
    the weights (1/variance) and the standard errors. Without it the fit is
    ordinary least squares and the errors are zero.
    """
    lam = np.asarray(lambdas, dtype=float)
    Y = np.atleast_2d(np.asarray(means, dtype=float))
    d, G = Y.shape
    if len(lam) != G:
        raise FitError("one mean per Lambda value is required")
    if len(np.unique(lam)) < 2:
        raise FitError("singular design: need at least two distinct Lambda values")
    X = np.vstack([gammainc(k, lam) for k in range(1, d + 1)])
    if cov is None:
        cov = np.zeros((G, d, d))
    cov = np.asarray(cov, dtype=float)
    var = np.stack([cov[:, k, k] for k in range(d)])
    use_w = np.all(var > 0)
    W = 1.0 / var if use_w else np.ones_like(X)
    denom = (W * X * X).sum(1)
    if np.any(denom <= 0):
        raise FitError("singular design: the shape functions vanish on the grid")
    # D_k = sum_g c_kg y_kg, linear in the means
    coef = W * X / denom[:, None]
    D = (coef * Y).sum(1)
    Dcov = np.einsum("kg,lg,gkl->kl", coef, coef, cov)
    fitted = D[:, None] * X
    with np.errstate(divide="ignore", invalid="ignore"):
        resid = np.where(fitted > 0, (Y - fitted) / fitted, np.nan)
    # A_j is linear in D: A = M D
    M = np.array([euler_coefficients(np.eye(d)[i]) for i in range(d)]).T
    A_full = M @ D
    A_cov = M @ Dcov @ M.T
    signs = (-1.0) ** np.arange(d)
    a0 = float(signs @ D)
    a0_se = float(math.sqrt(max(signs @ Dcov @ signs, 0.0)))
    return ConstantFit(lambdas=lam, D=D, D_se=np.sqrt(np.maximum(np.diag(Dcov), 0.0)), D_cov=Dcov,
                       A=A_full[1:], A_se=np.sqrt(np.maximum(np.diag(A_cov)[1:], 0.0)),
                       residuals=resid, a0_stat=a0, a0_se=a0_se)


def estimate_constants(records: Sequence[TrialRecord], dim: int) -> ConstantFit:
    """Fit D_k from trial records grouped by Lambda; n is recovered as Lambda / (omega_d r^d)."""
    ctx = GeometryContext(dim)
    groups: dict[float, list] = {}
    for rec in records:
        n = rec.lam / (ctx.omega_d * rec.r ** dim)
        groups.setdefault(rec.lam, []).append(np.asarray(rec.C[1:dim + 1], dtype=float) / n)
    if len(groups) < 2:
        raise FitError("singular design: need at least two distinct Lambda values")
    lams = sorted(groups)
    means, covs = [], []
    for lam in lams:
        Z = np.vstack(groups[lam])
        means.append(Z.mean(0))
        covs.append(np.cov(Z, rowvar=False, ddof=1).reshape(dim, dim) / len(Z)
                    if len(Z) > 1 else np.zeros((dim, dim)))
    return fit_constants(lams, np.array(means).T, np.array(covs))

"""Seeded Monte Carlo studies of rejection rates and bound coverage.

Every replication ``r`` draws its data from the substreams
``(master_seed, r, 0)`` and ``(master_seed, r, 1)`` and its resampling from
``(master_seed, r, 2)``, so reports are identical for any worker count.
"""
from __future__ import annotations

import configparser
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .inference import decide, test_almost_dominance
from .models import NormalParams, epsilon_normal, fit_normal_ml, normal_quantile
from .rng import substream

MODES = ("nonparametric", "parametric")
VARIANCE_METHODS = ("bootstrap", "plug-in", "delta")


@dataclass(frozen=True)
class SimConfig:
    model_F: NormalParams = NormalParams(0.0, 1.0)
    model_G: NormalParams = NormalParams(0.455, 1.5)
    n: int = 1000
    m: int = 1000
    epsilon_0: float = 0.05
    alpha: float = 0.05
    replications: int = 1000
    variance_method: str = "bootstrap"
    bootstrap_B: int = 500
    mode: str = "nonparametric"
    master_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.n < 2 or self.m < 2:
            raise ValueError("sample sizes must be at least 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 < self.epsilon_0 < 1:
            raise ValueError("epsilon_0 must lie in (0, 1)")
        if self.variance_method not in VARIANCE_METHODS:
            raise ValueError(f"variance_method must be one of {VARIANCE_METHODS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.variance_method == "bootstrap" and self.bootstrap_B < 2:
            raise ValueError("bootstrap_B must be at least 2")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")

    @property
    def true_epsilon(self) -> float:
        s = self.model_F.standardized(self.model_G)
        return float(epsilon_normal(s.mu, s.sigma))

    def flat(self) -> dict:
        d = {"name": self.name,
             "F_mu": self.model_F.mu, "F_sigma": self.model_F.sigma,
             "G_mu": self.model_G.mu, "G_sigma": self.model_G.sigma}
        for f in fields(self):
            if f.name not in ("model_F", "model_G", "name"):
                d[f.name] = getattr(self, f.name)
        return d


_INT_KEYS = {"n", "m", "replications", "bootstrap_B", "master_seed"}
_FLOAT_KEYS = {"epsilon_0", "alpha", "F_mu", "F_sigma", "G_mu", "G_sigma"}
_STR_KEYS = {"variance_method", "mode", "name"}


def config_from_mapping(mapping, name: str = "") -> SimConfig:
    kw = {}
    model = {"F_mu": 0.0, "F_sigma": 1.0, "G_mu": 0.455, "G_sigma": 1.5}
    for key, raw in mapping.items():
        if key in _INT_KEYS:
            kw[key] = int(raw)
        elif key in model:
            model[key] = float(raw)
        elif key in _FLOAT_KEYS:
            kw[key] = float(raw)
        elif key in _STR_KEYS:
            kw[key] = str(raw).strip()
        else:
            raise ValueError(f"unknown configuration key {key!r}")
    kw.setdefault("name", name)
    return SimConfig(NormalParams(model["F_mu"], model["F_sigma"]),
                     NormalParams(model["G_mu"], model["G_sigma"]), **kw)


def read_configs(path) -> list[SimConfig]:
    """Read ``key = value`` simulation settings.

    Without section headers the file describes one study. With sections,
    each section is one study and ``[DEFAULT]`` holds shared keys.
    """
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not any(line.lstrip().startswith("[") for line in text.splitlines()):
        text = "[study]\n" + text
    parser.read_string(text)
    sections = parser.sections()
    if not sections:
        return [config_from_mapping(dict(parser.defaults()))]
    return [config_from_mapping(dict(parser[s]), name=s) for s in sections]


@dataclass(frozen=True)
class SimReport:
    """Outcome of a study.

    ``rate`` is the rejection rate (``kind == "rejection"``) or the coverage
    of the upper bound (``kind == "coverage"``); failed replications count
    as neither.
    """

    kind: str
    rate: float
    count: int
    replications: int
    failures: int
    binomial_se: float
    mean_epsilon_hat: float
    mean_sigma_hat: float
    config: dict = field(default_factory=dict)

    @property
    def rejection_rate(self) -> float:
        return self.rate

    def to_dict(self) -> dict:
        return asdict(self)


def normal_sampler(params: NormalParams, count: int, key) -> np.ndarray:
    """I.i.d. normal draws by inverse transform on the substream ``key``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    g = substream(key)
    u = (g.integers(0, 2 ** 53, size=count, dtype=np.int64) + 0.5) / 2.0 ** 53
    return params.mu + params.sigma * normal_quantile(u)


def _ml_epsilon(mx, sx, my, sy):
    return epsilon_normal((my - mx) / sx, sy / sx)


def _parametric_sigma(fx: NormalParams, fy: NormalParams, n, m, cfg: SimConfig, key):
    rate = math.sqrt(n * m / (n + m))
    if cfg.variance_method == "bootstrap":
        B = cfg.bootstrap_B
        mx, sx, my, sy = np.empty(B), np.empty(B), np.empty(B), np.empty(B)
        for b in range(B):
            xb = normal_sampler(fx, n, (*key, b, 0))
            yb = normal_sampler(fy, m, (*key, b, 1))
            mx[b], sx[b] = xb.mean(), xb.std()
            my[b], sy[b] = yb.mean(), yb.std()
        eps = _ml_epsilon(mx, sx, my, sy)
        return float(np.std(rate * eps, ddof=1))
    # delta method on the ML estimates: Var(mean) = s^2/n, Var(sd) = s^2/(2n)
    theta = np.array([fx.mu, fx.sigma, fy.mu, fy.sigma])
    var = np.array([fx.sigma ** 2 / n, fx.sigma ** 2 / (2 * n),
                    fy.sigma ** 2 / m, fy.sigma ** 2 / (2 * m)])
    grad = np.empty(4)
    for i in range(4):
        h = 1e-6 * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (_ml_epsilon(*up) - _ml_epsilon(*dn)) / (2 * h)
    return float(rate * math.sqrt(np.dot(grad * grad, var)))


def run_replication(cfg: SimConfig, r: int):
    """Test result of replication ``r``, or None when it fails."""
    x = normal_sampler(cfg.model_F, cfg.n, (cfg.master_seed, r, 0))
    y = normal_sampler(cfg.model_G, cfg.m, (cfg.master_seed, r, 1))
    key = (cfg.master_seed, r, 2)
    try:
        if cfg.mode == "nonparametric":
            return test_almost_dominance(x, y, cfg.epsilon_0, cfg.alpha, cfg.variance_method,
                                         seed=key, replicates=cfg.bootstrap_B)
        fx, fy = fit_normal_ml(x), fit_normal_ml(y)
        eps = float(_ml_epsilon(fx.mu, fx.sigma, fy.mu, fy.sigma))
        if not math.isfinite(eps):
            return None
        sigma = _parametric_sigma(fx, fy, cfg.n, cfg.m, cfg, key)
        return decide(eps, cfg.epsilon_0, sigma, cfg.n, cfg.m, cfg.alpha,
                      f"parametric-{cfg.variance_method}")
    except (ValueError, RuntimeError):
        return None


def _chunk(args):
    cfg, start, stop = args
    out = []
    for r in range(start, stop):
        res = run_replication(cfg, r)
        if res is None:
            out.append(None)
        else:
            out.append((res.reject, res.upper_bound, res.epsilon_hat, res.sigma_hat))
    return out


def _collect(cfg: SimConfig, workers: int):
    R = cfg.replications
    if workers <= 1:
        return _chunk((cfg, 0, R))
    step = max(1, -(-R // (4 * workers)))
    jobs = [(cfg, s, min(R, s + step)) for s in range(0, R, step)]
    results = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_chunk, jobs):
            results.extend(part)
    return results


def _report(kind, cfg, hits, rows):
    R = cfg.replications
    ok = [row for row in rows if row is not None]
    failures = R - len(ok)
    p = hits / R
    eps = float(np.mean([row[2] for row in ok])) if ok else float("nan")
    sig = float(np.mean([row[3] for row in ok])) if ok else float("nan")
    return SimReport(kind, p, hits, R, failures, math.sqrt(p * (1 - p) / R), eps, sig,
                     cfg.flat())


def run_rejection_study(cfg: SimConfig, workers: int = 1) -> SimReport:
    """Fraction of replications in which H0 is rejected."""
    rows = _collect(cfg, workers)
    hits = sum(1 for row in rows if row is not None and row[0])
    return _report("rejection", cfg, hits, rows)


def run_coverage_study(cfg: SimConfig, workers: int = 1) -> SimReport:
    """Fraction of replications whose upper bound is at least the true index.

    ``epsilon_0`` does not enter the coverage and is only echoed.
    """
    truth = cfg.true_epsilon
    rows = _collect(cfg, workers)
    hits = sum(1 for row in rows if row is not None and truth <= row[1])
    rep = _report("coverage", cfg, hits, rows)
    return replace(rep, config={**rep.config, "true_epsilon": truth})


REPORT_COLUMNS = ["name", "F_mu", "F_sigma", "G_mu", "G_sigma", "n", "m", "epsilon_0", "alpha",
                  "replications", "variance_method", "bootstrap_B", "mode", "master_seed",
                  "kind", "rate", "se", "failures", "mean_epsilon_hat", "mean_sigma_hat"]


def report_row(rep: SimReport) -> dict:
    row = {k: rep.config.get(k) for k in REPORT_COLUMNS if k in rep.config}
    row.update(kind=rep.kind, rate=repr(rep.rate), se=repr(rep.binomial_se),
               failures=rep.failures, mean_epsilon_hat=repr(rep.mean_epsilon_hat),
               mean_sigma_hat=repr(rep.mean_sigma_hat))
    return row


def write_reports_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            w.writerow(report_row(rep))

"""Granger-causality F tests of latent series against the speed series.

A candidate series Granger-causes speed when adding its last L values to a
regression already containing speed's own last L values significantly lowers
the residual sum of squares.  Tests are marginal (one candidate at a time)
and selection applies a Bonferroni correction across candidates.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from cimlab.causesel.fdist import f_cdf
from cimlab.causesel.ols import ols_fit

DEFAULT_LAG = 3
DEFAULT_ALPHA = 0.05

_RSS_ZERO_RTOL = 1e-12


@dataclass
class SeriesPanel:
    """Per-episode (latent matrix T x k, speed vector T) pairs plus lag order."""

    episodes: list[tuple[np.ndarray, np.ndarray]]
    lag: int = DEFAULT_LAG

    def __post_init__(self) -> None:
        if self.lag < 1:
            raise ValueError("lag order must be >= 1")
        if not self.episodes:
            raise ValueError("panel needs at least one episode")
        cleaned = []
        k = None
        for Z, s in self.episodes:
            Z = np.asarray(Z, dtype=np.float64)
            s = np.asarray(s, dtype=np.float64).ravel()
            if Z.ndim != 2 or Z.shape[0] != s.size:
                raise ValueError(f"episode shapes disagree: Z {Z.shape}, speed {s.shape}")
            if k is None:
                k = Z.shape[1]
            elif Z.shape[1] != k:
                raise ValueError("episodes have differing latent dimension")
            cleaned.append((Z, s))
        self.episodes = cleaned

    @property
    def n_latents(self) -> int:
        return self.episodes[0][0].shape[1]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.lag).encode())
        for Z, s in self.episodes:
            h.update(np.ascontiguousarray(Z, dtype="<f8").tobytes())
            h.update(np.ascontiguousarray(s, dtype="<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class GrangerResult:
    latent_index: int
    f_stat: float
    p_value: float
    rss_restricted: float
    rss_unrestricted: float
    n_effective: int

    def to_dict(self) -> dict:
        return {
            "latent_index": self.latent_index,
            "f_stat": self.f_stat,
            "p_value": self.p_value,
            "rss_restricted": self.rss_restricted,
            "rss_unrestricted": self.rss_unrestricted,
            "n_effective": self.n_effective,
        }


@dataclass
class CauseSet:
    """Latent indices judged Granger-causes of speed, with test evidence."""

    indices: list[int]  # ascending
    results: list[GrangerResult]  # all tested candidates, sorted by p ascending
    alpha: float
    correction: str
    lag: int
    panel_fingerprint: str = ""

    def __post_init__(self) -> None:
        self.indices = sorted(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def result_for(self, index: int) -> GrangerResult:
        for r in self.results:
            if r.latent_index == index:
                return r
        raise KeyError(index)

    def to_json(self) -> str:
        return json.dumps(
            {
                "indices": self.indices,
                "results": [r.to_dict() for r in self.results],
                "alpha": self.alpha,
                "correction": self.correction,
                "lag": self.lag,
                "panel_fingerprint": self.panel_fingerprint,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @staticmethod
    def from_json(text: str) -> "CauseSet":
        d = json.loads(text)
        return CauseSet(
            indices=[int(i) for i in d["indices"]],
            results=[GrangerResult(**r) for r in d["results"]],
            alpha=float(d["alpha"]),
            correction=str(d["correction"]),
            lag=int(d["lag"]),
            panel_fingerprint=str(d.get("panel_fingerprint", "")),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "CauseSet":
        return CauseSet.from_json(Path(path).read_text(encoding="utf-8"))


def build_lagged(
    panel: SeriesPanel, i: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked lag matrices for candidate i: (X_restricted, X_unrestricted, y).

    Restricted rows are [1, S_{t-1..t-L}]; unrestricted rows append
    [Z_{i,t-1..t-L}].  Lag windows never cross episode boundaries; episodes
    too short to contribute a single row are skipped with a warning.
    """
    L = panel.lag
    if not (0 <= i < panel.n_latents):
        raise IndexError(f"latent index {i} out of range for k={panel.n_latents}")
    rows_r: list[np.ndarray] = []
    rows_u: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    for ep_idx, (Z, s) in enumerate(panel.episodes):
        T = s.size
        if T < L + 1:
            warnings.warn(f"episode {ep_idx} has T={T} < {L + 1}; skipped", stacklevel=2)
            continue
        t = np.arange(L, T)
        y = s[t]
        # lag j column = series at t-j, j = 1..L (newest lag first)
        s_lags = np.column_stack([s[t - j] for j in range(1, L + 1)])
        z_lags = np.column_stack([Z[t - j, i] for j in range(1, L + 1)])
        ones = np.ones((t.size, 1))
        rows_r.append(np.hstack([ones, s_lags]))
        rows_u.append(np.hstack([ones, s_lags, z_lags]))
        ys.append(y)
    if not ys:
        raise ValueError(f"no episode long enough for lag order {L}")
    return np.vstack(rows_r), np.vstack(rows_u), np.concatenate(ys)


def granger_test(panel: SeriesPanel, i: int, lag: int | None = None) -> GrangerResult:
    """F test of H0: candidate i's lags add nothing beyond speed's own lags."""
    if lag is not None and lag != panel.lag:
        panel = SeriesPanel(panel.episodes, lag=lag)
    L = panel.lag
    Xr, Xu, y = build_lagged(panel, i)
    n = y.size
    df_den = n - (2 * L + 1)
    if df_den <= 0:
        raise ValueError(f"nonpositive denominator degrees of freedom: n={n}, L={L}")
    _, rss_r = ols_fit(Xr, y)
    _, rss_u = ols_fit(Xu, y)
    rss_u = min(rss_u, rss_r)  # nested models; guard roundoff

    scale = max(rss_r, float(y @ y), 1.0)
    if rss_u <= _RSS_ZERO_RTOL * scale:
        if rss_r <= _RSS_ZERO_RTOL * scale:
            return GrangerResult(i, 0.0, 1.0, rss_r, rss_u, n)
        return GrangerResult(i, math.inf, 0.0, rss_r, rss_u, n)

    f_stat = max(0.0, ((rss_r - rss_u) / L) / (rss_u / df_den))
    p = 1.0 - f_cdf(f_stat, L, df_den)
    return GrangerResult(i, f_stat, min(max(p, 0.0), 1.0), rss_r, rss_u, n)


def select_causes(
    panel: SeriesPanel, lag: int | None = None, alpha: float = DEFAULT_ALPHA
) -> CauseSet:
    """Test every latent, Bonferroni-correct, keep candidates with p < alpha/k."""
    if lag is not None and lag != panel.lag:
        panel = SeriesPanel(panel.episodes, lag=lag)
    k = panel.n_latents
    results = [granger_test(panel, i) for i in range(k)]
    threshold = alpha / k
    selected = [r.latent_index for r in results if r.p_value < threshold]
    ranked = sorted(results, key=lambda r: (r.p_value, r.latent_index))
    return CauseSet(
        indices=selected,
        results=ranked,
        alpha=alpha,
        correction="bonferroni",
        lag=panel.lag,
        panel_fingerprint=panel.fingerprint(),
    )


def load_panel_csv(path: str | Path, target: str = "speed") -> tuple[SeriesPanel, list[str]]:
    """Read a generic one-episode panel from CSV (columns = series).

    The ``target`` column becomes the speed series; every other column is a
    candidate.  Returns the panel and the candidate column names in latent
    index order.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if target not in header:
        raise ValueError(f"CSV has no {target!r} column (columns: {header})")
    data = np.asarray(rows, dtype=np.float64)
    t_idx = header.index(target)
    cand_idx = [j for j in range(len(header)) if j != t_idx]
    Z = data[:, cand_idx]
    s = data[:, t_idx]
    return SeriesPanel([(Z, s)]), [header[j] for j in cand_idx]

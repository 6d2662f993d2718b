"""(delta, sigma) grid sweeps, ratio maps, boundary extraction, and output.

CSV is the source of truth for every run; SVG heatmaps are rendered from
the same arrays. Grid cells are computed independently with per-cell RNG
streams, so thread count never changes results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import protocols
from .noise import RdgInstance, make_rng
from .optimize import OptimizeConfig, optimize_qsp

KNOWN_PROTOCOLS = ("maj", "qsp-simple", "qsp-opt", "qsp-mc", "adaptive")


@dataclass(frozen=True)
class SweepSpec:
    delta_range: tuple  # (min, max, steps)
    sigma_range: tuple
    protocols: tuple
    n_queries: int = 3
    seed: int = 0
    n_trials: int = 100_000
    optimizer: OptimizeConfig | None = None

    def __post_init__(self):
        for lo, hi, steps in (self.delta_range, self.sigma_range):
            if steps < 2:
                raise ValueError("ranges need at least 2 steps")
            if not lo < hi:
                raise ValueError("range min must be below max")
        for p in self.protocols:
            if p not in KNOWN_PROTOCOLS:
                raise ValueError(f"unknown protocol {p!r}; known: {KNOWN_PROTOCOLS}")
        if self.n_queries < 1:
            raise ValueError("n_queries must be >= 1")

    @property
    def deltas(self) -> np.ndarray:
        lo, hi, steps = self.delta_range
        return np.linspace(lo, hi, int(steps))

    @property
    def sigmas(self) -> np.ndarray:
        lo, hi, steps = self.sigma_range
        return np.linspace(lo, hi, int(steps))


@dataclass
class ErrorSurface:
    spec: SweepSpec
    deltas: np.ndarray
    sigmas: np.ndarray
    values: dict = field(default_factory=dict)  # protocol -> (err, std) arrays


def _cell_error(spec: SweepSpec, protocol: str, i: int, j: int):
    delta = float(spec.deltas[i])
    sigma = float(spec.sigmas[j])
    rdg = RdgInstance.from_delta_sigma(delta, sigma)
    n = spec.n_queries
    if protocol == "maj":
        if n % 2 == 0:
            raise ValueError("maj needs an odd query budget")
        res = protocols.maj_protocol_error(rdg, (n - 1) // 2)
        return res.error_prob, 0.0
    if protocol == "qsp-simple":
        return protocols.simple_qsp_error_exact(rdg, n), 0.0
    if protocol == "qsp-mc":
        proto = protocols.QspProtocol.simple(n, rdg)
        res = protocols.qsp_error_mc(
            proto, rdg, spec.n_trials, make_rng(spec.seed, i, j, 2)
        )
        return res.error_prob, res.std_error
    if protocol == "qsp-opt":
        cfg = spec.optimizer or OptimizeConfig(
            n_starts=4,
            objective_mode="quadrature" if n <= 4 else "monte-carlo",
            quadrature_order=12,
            n_trials_per_eval=spec.n_trials,
        )
        # Per-cell deterministic seed derived from the base seed.
        cell_cfg = OptimizeConfig(
            n_starts=cfg.n_starts,
            n_trials_per_eval=cfg.n_trials_per_eval,
            max_iters=cfg.max_iters,
            convergence_tol=cfg.convergence_tol,
            seed=int(np.random.SeedSequence((spec.seed, i, j, 3)).generate_state(1)[0]),
            objective_mode=cfg.objective_mode,
            quadrature_order=cfg.quadrature_order,
        )
        report = optimize_qsp(rdg, n, cell_cfg)
        if cfg.objective_mode == "quadrature":
            return report.best_error, 0.0
        return report.refreshed_error, report.refreshed_std
    if protocol == "adaptive":
        res = protocols.adaptive_incoherent_error(
            rdg, n, spec.n_trials, make_rng(spec.seed, i, j, 4)
        )
        return res.error_prob, res.std_error
    raise ValueError(f"unknown protocol {protocol!r}")


def run_sweep(spec: SweepSpec, threads: int = 1) -> ErrorSurface:
    """Evaluate every requested protocol on the grid; deterministic per seed."""
    nd, ns = len(spec.deltas), len(spec.sigmas)
    surface = ErrorSurface(spec, spec.deltas, spec.sigmas)
    cells = [(p, i, j) for p in spec.protocols for i in range(nd) for j in range(ns)]

    def work(cell):
        p, i, j = cell
        return cell, _cell_error(spec, p, i, j)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]

    for p in spec.protocols:
        surface.values[p] = (np.zeros((nd, ns)), np.zeros((nd, ns)))
    for (p, i, j), (err, std) in results:
        surface.values[p][0][i, j] = err
        surface.values[p][1][i, j] = std
    return surface


def ratio_map(a: ErrorSurface, b: ErrorSurface, protocol_a=None, protocol_b=None):
    """Elementwise error ratio a/b; 0/0 maps to 1, x/0 to inf."""
    if a.deltas.shape != b.deltas.shape or a.sigmas.shape != b.sigmas.shape:
        raise ValueError("surfaces must share a grid")
    if not (np.array_equal(a.deltas, b.deltas) and np.array_equal(a.sigmas, b.sigmas)):
        raise ValueError("surfaces must share a grid")
    pa = protocol_a or next(iter(a.values))
    pb = protocol_b or next(iter(b.values))
    ea, eb = a.values[pa][0], b.values[pb][0]
    out = np.empty_like(ea)
    both_zero = (ea == 0) & (eb == 0)
    div_zero = (eb == 0) & ~both_zero
    ok = ~(both_zero | div_zero)
    out[both_zero] = 1.0
    out[div_zero] = np.inf
    out[ok] = ea[ok] / eb[ok]
    return out


def extract_boundary(ratio: np.ndarray, spec: SweepSpec):
    """Ordered polylines of the ratio = 1 level set (marching squares).

    Returns a list of arrays of (delta, sigma) points; empty when the
    ratio never crosses 1.
    """
    from skimage import measure

    finite = np.where(np.isfinite(ratio), ratio, np.nanmax(ratio[np.isfinite(ratio)]))
    if finite.min() >= 1.0 or finite.max() <= 1.0:
        return []
    polylines = []
    for contour in measure.find_contours(finite, 1.0):
        deltas = np.interp(contour[:, 0], np.arange(len(spec.deltas)), spec.deltas)
        sigmas = np.interp(contour[:, 1], np.arange(len(spec.sigmas)), spec.sigmas)
        polylines.append(np.column_stack([deltas, sigmas]))
    return polylines


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(surface: ErrorSurface, path) -> None:
    """delta,sigma,protocol,error_prob,std_error rows, UTF-8, LF endings."""
    lines = ["delta,sigma,protocol,error_prob,std_error"]
    for p in surface.spec.protocols:
        err, std = surface.values[p]
        for i, d in enumerate(surface.deltas):
            for j, s in enumerate(surface.sigmas):
                lines.append(
                    f"{_fmt(d)},{_fmt(s)},{p},{_fmt(err[i, j])},{_fmt(std[i, j])}"
                )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_surface_csv(path):
    """Parse an emit_csv file back into (deltas, sigmas, values dict)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "delta,sigma,protocol,error_prob,std_error":
            raise ValueError("unrecognized sweep CSV header")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    deltas = sorted({float(r[0]) for r in rows})
    sigmas = sorted({float(r[1]) for r in rows})
    di = {d: i for i, d in enumerate(deltas)}
    sj = {s: j for j, s in enumerate(sigmas)}
    values = {}
    for d, s, p, e, se in rows:
        if p not in values:
            values[p] = (
                np.zeros((len(deltas), len(sigmas))),
                np.zeros((len(deltas), len(sigmas))),
            )
        values[p][0][di[float(d)], sj[float(s)]] = float(e)
        values[p][1][di[float(d)], sj[float(s)]] = float(se)
    return np.array(deltas), np.array(sigmas), values


def _diverging_color(ratio: float) -> str:
    """Blue below 1, white at 1, red above 1 (log scale, clipped at 4x)."""
    if not math.isfinite(ratio) or ratio <= 0:
        t = 1.0
    else:
        t = max(-1.0, min(1.0, math.log(ratio) / math.log(4)))
    if t >= 0:  # a worse than b -> red
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"rgb({r},{g},{b})"


def _sequential_color(value: float, vmax: float) -> str:
    t = max(0.0, min(1.0, value / vmax if vmax > 0 else 0.0))
    shade = round(255 * (1 - 0.85 * t))
    return f"rgb({shade},{shade},255)"


def emit_svg_heatmap(
    matrix: np.ndarray,
    deltas: np.ndarray,
    sigmas: np.ndarray,
    path,
    title: str = "",
    diverging: bool = False,
    sigma_over_pi: bool = False,
) -> None:
    """Render a grid heatmap as standalone SVG 1.1 with radian axis labels."""
    nd, ns = matrix.shape
    cw, ch = max(2, 600 // nd), max(2, 600 // ns)
    width, height = nd * cw + 120, ns * ch + 100
    vmax = float(np.nanmax(matrix)) if not diverging else 0.0
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}">',
        f'<text x="{width / 2}" y="20" text-anchor="middle">{title}</text>',
    ]
    for i in range(nd):
        for j in range(ns):
            v = matrix[i, j]
            color = (
                _diverging_color(float(v))
                if diverging
                else _sequential_color(float(v), vmax)
            )
            # sigma increases upward, delta rightward
            x = 80 + i * cw
            y = 40 + (ns - 1 - j) * ch
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{color}"/>'
            )
    sig_unit = "sigma/pi" if sigma_over_pi else "sigma (rad)"
    sig_lo = sigmas[0] / math.pi if sigma_over_pi else sigmas[0]
    sig_hi = sigmas[-1] / math.pi if sigma_over_pi else sigmas[-1]
    parts += [
        f'<text x="{80 + nd * cw / 2}" y="{40 + ns * ch + 35}" '
        f'text-anchor="middle">delta (rad)</text>',
        f'<text x="80" y="{40 + ns * ch + 18}">{deltas[0]:.3g}</text>',
        f'<text x="{80 + nd * cw}" y="{40 + ns * ch + 18}" '
        f'text-anchor="end">{deltas[-1]:.3g}</text>',
        f'<text x="20" y="{40 + ns * ch / 2}" transform="rotate(-90 20 '
        f'{40 + ns * ch / 2})" text-anchor="middle">{sig_unit}</text>',
        f'<text x="75" y="{40 + ns * ch}" text-anchor="end">{sig_lo:.3g}</text>',
        f'<text x="75" y="52" text-anchor="end">{sig_hi:.3g}</text>',
    ]
    if diverging:
        parts.append(
            f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">'
            "blue: second protocol better, white: ratio 1, red: first better"
            "</text>"
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")

"""Figure builders: each consumes the parsed time series and writes one
PNG. Rendering is a pure read; re-rendering the same inputs produces the
same figures."""

import os
import re
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvdata import read_timeseries

FIGURES = ("fisher_envelope", "entropy", "conservation", "l2_window", "h3")


@dataclass
class PlotSpec:
    inputs: list
    out_dir: str
    figures: tuple = FIGURES
    t_min: float = 0.05
    report: str = None

    def __post_init__(self):
        if not self.figures:
            raise ValueError("at least one figure must be requested")
        unknown = [f for f in self.figures if f not in FIGURES]
        if unknown:
            raise ValueError(f"unknown figures: {', '.join(unknown)}")


def reference_envelope(t, anchor_t, anchor_value):
    """The t^(-9/2) reference curve anchored at one point."""
    c = anchor_value * anchor_t**4.5
    return c * np.asarray(t, dtype=float) ** -4.5


def _fig_fisher_envelope(data, spec, ax):
    t = data.t
    pos = t > 0
    ax.loglog(t[pos], data["fisher"][pos], "o-", ms=3, label="I(t)")
    past = t[pos] >= spec.t_min
    if past.any():
        ta = t[pos][past][0]
        ia = data["fisher"][pos][past][0]
        ref_t = t[pos][t[pos] >= ta]
        ax.loglog(ref_t, reference_envelope(ref_t, ta, ia), "k--",
                  label="t^(-9/2) reference")
    ax.set_xlabel("t")
    ax.set_ylabel("Fisher information")
    ax.legend()


def _fig_entropy(data, spec, ax):
    ax.plot(data.t, data["entropy"], "o-", ms=3, label="H(t)")
    ax.set_xlabel("t")
    ax.set_ylabel("entropy")
    ax.legend()


def _fig_h3(data, spec, ax):
    ax.plot(data.t, data["h3"], "o-", ms=3, label="H3(f | M)")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted relative entropy")
    ax.legend()


def _fig_conservation(data, spec, ax):
    t = data.t
    mass = data["mass"]
    energy = data["energy"]
    eps = 1e-18
    ax.semilogy(t, np.abs(mass - mass[0]) / max(abs(mass[0]), eps) + eps,
                label="|mass drift|")
    ax.semilogy(t, np.abs(energy - energy[0]) / max(abs(energy[0]), eps) + eps,
                label="|energy drift|")
    mom = np.sqrt(data["px"] ** 2 + data["py"] ** 2 + data["pz"] ** 2)
    ax.semilogy(t, mom / max(abs(mass[0]), eps) + eps, label="|momentum|/mass")
    ax.set_xlabel("t")
    ax.set_ylabel("relative drift")
    ax.legend()


def _window_constants(report_path):
    """Pull (k, t0, Ck, Y0, t1) from a check report's l2_window line."""
    if not report_path or not os.path.exists(report_path):
        return None
    with open(report_path) as fh:
        for line in fh:
            if "check=l2_window" not in line:
                continue
            kv = dict(
                tok.split("=", 1) for tok in line.split() if "=" in tok)
            try:
                return {key: float(kv[key]) for key in ("k", "t0", "Ck", "Y0", "t1")}
            except (KeyError, ValueError):
                return None
    return None


def _fig_l2_window(data, spec, ax):
    t = data.t
    for k in data.k_list:
        ax.plot(t, data[f"l2_{k}"] ** 2, "o-", ms=3, label=f"Y = ||f||^2 (k={k})")
    consts = _window_constants(spec.report)
    if consts and consts["Y0"] > 0:
        t0, t1, ck, y0 = consts["t0"], consts["t1"], consts["Ck"], consts["Y0"]
        sigma = np.linspace(t0, t1, 200, endpoint=False)
        decay = np.exp(-2.0 * ck * (sigma - t0))
        denom = decay * (1.0 / y0**2 + 1.0) - 1.0
        good = denom > 0
        ax.plot(sigma[good], np.sqrt(1.0 / denom[good]), "k--",
                label="comparison-ODE bound")
    ax.set_xlabel("t")
    ax.set_ylabel("squared weighted norm")
    ax.legend()


_BUILDERS = {
    "fisher_envelope": _fig_fisher_envelope,
    "entropy": _fig_entropy,
    "conservation": _fig_conservation,
    "l2_window": _fig_l2_window,
    "h3": _fig_h3,
}


def render(spec):
    """Render every requested figure for every input; returns the paths."""
    os.makedirs(spec.out_dir, exist_ok=True)
    written = []
    for path in spec.inputs:
        data = read_timeseries(path)
        stem = re.sub(r"\W+", "_", os.path.splitext(os.path.basename(path))[0])
        for name in spec.figures:
            fig, ax = plt.subplots(figsize=(6.4, 4.8))
            _BUILDERS[name](data, spec, ax)
            ax.set_title(name.replace("_", " "))
            fig.tight_layout()
            out = os.path.join(spec.out_dir, f"{stem}_{name}.png")
            fig.savefig(out, dpi=110)
            plt.close(fig)
            written.append(out)
    return written

"""Static SVG plots of a simulated scenario."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .logs import _input_names  # noqa: E402
from .scenario import obstacles_at  # noqa: E402


def _path_plot(result, ax):
    cfg = result.config
    xs = np.array([r.state.as_array() for r in result.records])
    ax.plot(xs[:, 0], xs[:, 1], "k-", lw=1.2, label="ego")
    t_end = result.records[-1].t
    for j, (start, end) in enumerate(zip(obstacles_at(cfg, 0.0), obstacles_at(cfg, t_end))):
        for obs, alpha in ((start, 0.15), (end, 0.35)):
            ax.add_patch(plt.Circle(obs.center, obs.r, color="tab:red", alpha=alpha))
        if np.any(start.velocity):
            ax.plot(*np.vstack([start.center, end.center]).T, "r--", lw=0.8)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]" if cfg.mode == "vertical" else "z [m]")
    ax.legend(loc="best")


def write_plots(result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    t = np.array([r.t for r in result.records])
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    _path_plot(result, ax)
    written.append(os.path.join(out_dir, "path.svg"))
    fig.savefig(written[-1])
    plt.close(fig)

    for key, label in (("h", "h"), ("psi", "psi")):
        fig, ax = plt.subplots(figsize=(6, 3))
        for j in range(len(cfg.obstacles)):
            ax.plot(t, [getattr(r.obstacles[j], key) for r in result.records], label=f"obstacle {j}")
        ax.axhline(0.0, color="grey", lw=0.6)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(label)
        if cfg.obstacles:
            ax.legend(loc="best")
        written.append(os.path.join(out_dir, f"{key}.svg"))
        fig.savefig(written[-1])
        plt.close(fig)

    names = _input_names(cfg.mode)
    fig, axes = plt.subplots(2, 1, figsize=(6, 4), sharex=True)
    u_ref = np.array([r.u_ref for r in result.records])
    u_safe = np.array([r.u_safe for r in result.records])
    for i, ax in enumerate(axes):
        ax.plot(t, u_ref[:, i], "--", label="u_ref")
        ax.plot(t, u_safe[:, i], "-", label="u_safe")
        ax.set_ylabel(names[i])
        ax.legend(loc="best")
    axes[-1].set_xlabel("t [s]")
    written.append(os.path.join(out_dir, "inputs.svg"))
    fig.savefig(written[-1])
    plt.close(fig)
    return written

"""Static figures for runs and sweeps, rendered to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from vinedesign.evaluation import OBJECTIVE_KEYS  # noqa: E402
from vinedesign.robot import extend_genotype  # noqa: E402

LABELS = {
    "f_ik": "IK error (cm)",
    "f_links_to_seg": "links to segment",
    "f_undulation": "undulation",
    "f_links_on_seg": "links on segment",
    "f_length": "total length (cm)",
}


def _cylinder_mesh(cyl, resolution=24):
    theta = np.linspace(0, 2 * np.pi, resolution)
    z = np.array([0.0, cyl.height])
    tt, zz = np.meshgrid(theta, z)
    cx, cy, cz = cyl.base_center
    return cx + cyl.radius * np.cos(tt), cy + cyl.radius * np.sin(tt), cz + zz


def plot_scene(record, task, path, title=None):
    """3D view plus top view of every configuration, obstacle and target segment."""
    _, phenotypes = extend_genotype(record.genotype, task)
    fig = plt.figure(figsize=(11, 5))
    ax3 = fig.add_subplot(1, 2, 1, projection="3d")
    ax2 = fig.add_subplot(1, 2, 2)
    colors = plt.cm.tab10(np.arange(len(phenotypes)) % 10)

    for cyl in task.obstacles:
        x, y, z = _cylinder_mesh(cyl)
        ax3.plot_surface(x, y, z, color="0.6", alpha=0.35, linewidth=0)
        ax2.add_patch(plt.Circle(cyl.base_center[:2], cyl.radius, color="0.6", alpha=0.5))
    for i, (ph, c) in enumerate(zip(phenotypes, colors), 1):
        nodes = np.asarray(ph.nodes)
        ax3.plot(*nodes.T, "-o", color=c, ms=2, lw=1.5, label=f"config {i}")
        ax2.plot(nodes[:, 0], nodes[:, 1], "-o", color=c, ms=2, lw=1.5)
    for t in task.targets:
        seg = np.stack([t.segment.a, t.segment.b])
        ax3.plot(*seg.T, "--", color="k", lw=1)
        ax3.scatter(*t.position, color="r", s=20)
        ax2.plot(seg[:, 0], seg[:, 1], "--", color="k", lw=1)
        ax2.plot(*t.position[:2], "r*", ms=8)
    home = task.home.position
    ax3.scatter(*home, color="k", marker="s", s=30)
    ax2.plot(*home[:2], "ks", ms=5)

    pts = np.vstack([np.asarray(ph.nodes) for ph in phenotypes] + [home[None]])
    span = np.ptp(pts, axis=0)
    ax3.set_box_aspect(np.maximum(span, 0.1 * span.max()))
    ax3.set_xlabel("x (cm)")
    ax3.set_ylabel("y (cm)")
    ax3.set_zlabel("z (cm)")
    ax3.legend(loc="upper left", fontsize=7)
    ax2.set_aspect("equal")
    ax2.set_xlabel("x (cm)")
    ax2.set_ylabel("y (cm)")
    ax2.set_title("top view")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_history(history, path, title=None):
    """Best-so-far objectives per generation, one panel per objective."""
    values = np.array([h.as_array() for h in history])
    gens = np.arange(len(history))
    fig, axes = plt.subplots(1, len(OBJECTIVE_KEYS), figsize=(14, 2.8))
    for ax, key, col in zip(axes, OBJECTIVE_KEYS, values.T):
        ax.plot(gens, col, lw=1.2)
        ax.set_title(LABELS[key], fontsize=9)
        ax.set_xlabel("generation")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_rank_boxes(labels, ranks, path, title=None):
    """Box plot of global ranks per combination (rows of ``ranks``)."""
    ranks = np.asarray(ranks)
    fig, ax = plt.subplots(figsize=(max(6, 0.22 * len(labels)), 4))
    ax.boxplot(ranks.T, showfliers=False)
    ax.set_xticks(np.arange(1, len(labels) + 1), labels, rotation=90, fontsize=7)
    ax.set_ylabel("global rank")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_average_ranks(labels, average_ranks, cd, path, title=None):
    """Average Friedman ranks with the critical difference drawn from the best."""
    avg = np.asarray(average_ranks)
    order = np.argsort(avg, kind="stable")
    fig, ax = plt.subplots(figsize=(max(6, 0.22 * len(labels)), 4))
    ax.bar(np.arange(len(avg)), avg[order], color="tab:blue")
    ax.axhline(avg[order[0]] + cd, color="tab:red", ls="--", lw=1, label=f"best + CD ({cd:.2f})")
    ax.set_xticks(np.arange(len(avg)), [labels[i] for i in order], rotation=90, fontsize=7)
    ax.set_ylabel("average rank")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)

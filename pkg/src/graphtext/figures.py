"""Matplotlib figures rendered next to report files.

All functions write PNGs with the Agg backend and strip the Software
metadata chunk so identical data produces byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE_KW = {"format": "png", "metadata": {"Software": None}, "dpi": 110}


def save_loss_curve(epoch_losses, path, title="training loss") -> None:
    """Mean per-pair loss against epoch number."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = np.arange(1, len(epoch_losses) + 1)
    ax.plot(xs, epoch_losses, marker="o")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean pair loss")
    ax.set_title(title)
    ax.set_xticks(xs)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_score_histogram(pos_scores, neg_scores, path,
                         title="link scores") -> None:
    """Overlaid histograms of positive- and negative-pair scores."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    lo = float(min(pos.min(), neg.min()))
    hi = float(max(pos.max(), neg.max()))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    bins = np.linspace(lo, hi, 41)
    ax.hist(pos, bins=bins, alpha=0.6, label="held-out edges")
    ax.hist(neg, bins=bins, alpha=0.6, label="non-edges")
    ax.set_xlabel("inner-product score")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_alpha_histogram(alpha, path) -> None:
    """Distribution of the foreign-window ratio alpha over nodes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(np.asarray(alpha, dtype=np.float64), bins=40)
    ax.set_xlabel("alpha (foreign windows per walk started)")
    ax.set_ylabel("nodes")
    ax.set_title("walk co-occurrence imbalance")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_degree_alpha_scatter(degrees, alpha, path) -> None:
    """alpha against node degree; high-degree nodes dominate windows."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.scatter(np.asarray(degrees), np.asarray(alpha), s=8, alpha=0.5)
    ax.set_xlabel("degree")
    ax.set_ylabel("alpha")
    ax.set_title("degree vs. walk-window exposure")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)

"""Figure rendering for the report path (PNG next to each CSV export)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_profile(rows, out_path, reference=None):
    """Profile plot from (x, f) rows; optional dotted reference curve."""
    x = [r[0] for r in rows]
    f = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(x, f, "-", lw=1.5, label="reconstruction")
    if reference is not None:
        ax.plot(x, reference, ":", lw=1.5, label="deterministic profile")
        ax.legend(loc="best", frameon=False)
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_xlim(x[0], x[-1])
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_eigenvalues(js, closed_form, out_path, estimates=None):
    """Eigenvalue decay on a log scale; reconstructed values overlaid when
    available."""
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy(js, closed_form, "o:", label="closed form")
    if estimates is not None:
        m = min(len(js), len(estimates))
        ax.semilogy(js[:m], estimates[:m], "s-", label="reconstructed")
    ax.set_xlabel("frequency index j")
    ax.set_ylabel("eigenvalue")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)

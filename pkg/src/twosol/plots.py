"""Figure rendering for scenario outputs (PNG files next to the data)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": "twosol"}
_DPI = 120


def _save(fig, path):
    # format is fixed explicitly: staged files carry a .partial suffix
    fig.savefig(path, dpi=_DPI, metadata=_META, format="png")
    plt.close(fig)


def profile_figure(profile, path):
    """Ground-state profile on linear and logarithmic scales."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    r = profile.r
    ax1.plot(r, profile.q, lw=1.5)
    ax1.set_xlabel("r")
    ax1.set_ylabel("q(r)")
    ax1.set_title("ground state")
    ax2.semilogy(r, np.maximum(np.abs(profile.q), 1e-300), lw=1.5)
    ax2.set_xlabel("r")
    ax2.set_title("tail decay")
    fig.tight_layout()
    _save(fig, path)


def interaction_figure(r, g, asym, path):
    """Interaction scalar against its tail asymptote."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(r, g, "o-", label="g(r)")
    ax.semilogy(r, asym, "--", label="g0 q(r)")
    ax.set_xlabel("r")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def series_figure(series, path):
    """Tracked-run panels: separation, coefficients, energy."""
    t = series["t"]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    axes[0].plot(t, series["z1"] - series["z2"], lw=1.2)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("separation")
    axes[1].semilogy(t, np.maximum(series["b"], 1e-300), lw=1.2)
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("b")
    axes[2].plot(t, series["energy"], lw=1.2)
    axes[2].set_xlabel("t")
    axes[2].set_ylabel("E")
    fig.tight_layout()
    _save(fig, path)


def reduced_figure(t, separation, path, asym=None):
    """Separation of the reduced flow versus log time."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    sel = t > 0
    ax.semilogx(t[sel], separation[sel], lw=1.4, label="r(t)")
    if asym is not None:
        ax.semilogx(t[sel], asym[sel], "--", lw=1.2, label="log-law")
    ax.set_xlabel("t")
    ax.set_ylabel("separation")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def shoot_figure(a1, a2, kinds, path):
    """Probed coefficient points colored by their classification."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    colors = {
        "persisted": "tab:green", "unstable_exit": "tab:red",
        "collision": "tab:purple", "blowup": "k",
    }
    for kind in sorted(set(kinds)):
        sel = [k == kind for k in kinds]
        ax.plot(
            np.asarray(a1)[sel], np.asarray(a2)[sel], "o",
            ms=4, color=colors.get(kind, "gray"), label=kind,
        )
    ax.set_xlabel("a1")
    ax.set_ylabel("a2")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def lipschitz_figure(distances, ratios, bound, path):
    """Probe difference quotients against the fitted bound."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(distances, ratios, "o", label="quotients")
    ax.axhline(bound, ls="--", color="tab:red", label="fitted bound")
    ax.set_xlabel("geometry distance")
    ax.set_ylabel("|h - h~| / distance")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)

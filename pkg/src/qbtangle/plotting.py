"""Optional figure rendering (needs matplotlib; install the ``plot`` extra)."""
from __future__ import annotations

from pathlib import Path


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("plotting needs matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_trajectory(taus, tau13, tau123, path, title=""):
    """Write tau13 (red) and tau123 (blue) against tau to ``path``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(taus, tau13, color="red", label=r"$\tau_{13}$")
    ax.plot(taus, tau123, color="blue", label=r"$\tau_{123}$")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("tangle")
    ax.set_ylim(-0.05, 1.05)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

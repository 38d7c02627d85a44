"""Shared helpers for the demo scripts: argument parsing and optional plotting."""
import argparse
from pathlib import Path


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", type=Path, default=None,
                   help="directory for a PNG figure (needs matplotlib); omit for text only")
    return p


def figure(out, name, draw):
    """Call ``draw(ax)`` on a fresh axis and save ``out/name``; no-op without ``out``."""
    if out is None:
        return
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping figure")
        return
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 5))
    draw(ax)
    fig.tight_layout()
    fig.savefig(out / name, dpi=120)
    plt.close(fig)
    print(f"wrote {out / name}")

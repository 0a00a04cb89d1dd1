#!/usr/bin/env python3
"""Plot best-so-far efficiency against evaluation count for trace CSVs.

With matplotlib installed writes a PNG; without it, falls back to an ASCII
chart on stdout so the toolkit itself stays plotting-free.
"""

import argparse
import sys
from pathlib import Path

from propopt.ga import load_trace


def ascii_chart(traces, width=72, height=18):
    lo = min(min(best for _, _, best in t.entries) for t, _ in traces)
    hi = max(max(best for _, _, best in t.entries) for t, _ in traces)
    if hi <= lo:
        hi = lo + 1e-9
    span = max(len(t.entries) for t, _ in traces)
    rows = [[" "] * width for _ in range(height)]
    marks = "abcdefghijklmnopqrstuvwxyz"
    for k, (trace, _) in enumerate(traces):
        mark = marks[k % len(marks)]
        for idx, _, best in trace.entries:
            col = min(width - 1, int((idx - 1) / span * width))
            row = height - 1 - int((best - lo) / (hi - lo) * (height - 1))
            rows[row][col] = mark
    print(f"best-so-far eta, {lo:.4f} (bottom) to {hi:.4f} (top), "
          f"{span} evaluations wide")
    for row in rows:
        print("|" + "".join(row))
    print("+" + "-" * width)
    for k, (trace, path) in enumerate(traces):
        final = trace.entries[-1][2]
        print(f"  {marks[k % len(marks)]}: {trace.method_tag:<5} "
              f"final {final:.4f}  {path.name}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("traces", nargs="+", type=Path)
    ap.add_argument("-o", "--out", type=Path, default=None,
                    help="PNG path (requires matplotlib)")
    args = ap.parse_args(argv)

    traces = [(load_trace(p), p) for p in args.traces]

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        if args.out:
            print("matplotlib not installed, printing ASCII instead",
                  file=sys.stderr)
        ascii_chart(traces)
        return 0

    fig, ax = plt.subplots(figsize=(7, 4.2))
    for trace, path in traces:
        xs = [idx for idx, _, _ in trace.entries]
        ys = [best for _, _, best in trace.entries]
        ax.step(xs, ys, where="post",
                label=f"{trace.method_tag} {path.stem}")
    ax.set_xlabel("evaluations")
    ax.set_ylabel("best-so-far eta")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    out = args.out or Path("traces.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

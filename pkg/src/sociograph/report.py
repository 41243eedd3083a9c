"""Ablation report rendering: TSV, aligned text tables, and figures.

The ``eval`` CLI path writes, for each recommendation target, a delimited
table (machine-readable), an aligned text table mirroring the classic
indexed-properties-by-K layout, and a matplotlib chart of accuracy against K
per configuration, saved next to the TSV output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import AblationTable

CONFIG_LABELS = {
    "metadata_only": "PR metadata",
    "plus_title": "+ PR title",
    "plus_description": "+ PR description",
    "plus_graph": "+ socio-technical graph",
}


def table_to_tsv_lines(table: AblationTable) -> list[str]:
    lines = ["config\tk\taccuracy\tmrr"]
    for config in table.configs:
        for k in table.ks:
            pair = table.cells[(config, k)]
            lines.append(f"{config}\t{k}\t{pair.accuracy:.4f}\t{pair.mrr:.4f}")
    return lines


def render_text_table(table: AblationTable) -> str:
    """Aligned text table: one row per config, Acc/MRR columns per K."""
    header = ["Indexed Properties"]
    for k in table.ks:
        header += [f"K={k} Acc", f"K={k} MRR"]
    rows = [header]
    for config in table.configs:
        row = [CONFIG_LABELS.get(config, config)]
        for k in table.ks:
            pair = table.cells[(config, k)]
            row += [f"{pair.accuracy:.2f}", f"{pair.mrr:.2f}"]
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    out = []
    for row in rows:
        out.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    title = f"{table.target} recommendation ({table.n_queries} queries)"
    ruler = "-" * max(len(line) for line in out)
    return "\n".join([title, ruler] + out)


def save_accuracy_figure(table: AblationTable, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for config in table.configs:
        accuracies = [table.cells[(config, k)].accuracy for k in table.ks]
        ax.plot(table.ks, accuracies, marker="o", label=CONFIG_LABELS.get(config, config))
    ax.set_xlabel("K")
    ax.set_ylabel("accuracy@K")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(list(table.ks))
    ax.set_title(f"{table.target} recommendation accuracy")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_reports(tables: dict[str, AblationTable], out_dir) -> list[Path]:
    """Write TSV + text + PNG per target; returns the files written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for target, table in sorted(tables.items()):
        tsv = out_dir / f"ablation_{target}.tsv"
        with open(tsv, "w", encoding="utf-8", newline="\n") as fh:
            for line in table_to_tsv_lines(table):
                fh.write(line)
                fh.write("\n")
        written.append(tsv)
        txt = out_dir / f"ablation_{target}.txt"
        txt.write_text(render_text_table(table) + "\n", encoding="utf-8")
        written.append(txt)
        png = out_dir / f"ablation_{target}.png"
        save_accuracy_figure(table, png)
        written.append(png)
    return written

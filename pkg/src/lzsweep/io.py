"""CSV and manifest emission.

Normative output contract (frozen per major version):
  map.csv columns: gamma, M, E0_Vnm, rho_cb_res, j_res_e_per_fs, regime, flags
  rows row-major over the grid; numbers printed with 9 significant digits;
  header comment lines "# key: value" carry provenance.
  manifest.txt: provenance comments plus the fully resolved configuration in
  the config grammar (re-parseable; the round trip is exact).
"""

import os

from .config import RunConfig
from .sweep import MapResult


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def emit_map(result: MapResult, out_dir: str, cfg: RunConfig | None = None) -> dict[str, str]:
    """Write map.csv and manifest.txt under out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "map.csv")
    manifest_path = os.path.join(out_dir, "manifest.txt")

    lines = []
    for key, value in sorted(result.manifest.items()):
        lines.append(f"# {key}: {value}")
    lines.append("gamma,M,E0_Vnm,rho_cb_res,j_res_e_per_fs,regime,flags")
    for idx in range(len(result.gamma)):
        flag = "R" if result.relativistic[idx] else "-"
        lines.append(",".join((
            _fmt(result.gamma[idx]), _fmt(result.m[idx]), _fmt(result.e0[idx]),
            _fmt(result.rho_cb_res[idx]), _fmt(result.j_res[idx]),
            result.regime_label(idx), flag,
        )))
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    mlines = [f"# {key}: {value}" for key, value in sorted(result.manifest.items())]
    for idx, reason in sorted(result.failures.items()):
        mlines.append(f"# failed_cell {idx}: {reason}")
    if cfg is not None:
        mlines.append(cfg.canonical_text().rstrip("\n"))
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(mlines) + "\n")

    return {"map": csv_path, "manifest": manifest_path}


def emit_table(path: str, header: str, rows, provenance: dict[str, str] | None = None) -> str:
    """Generic CSV writer with the same comment-header convention."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [f"# {k}: {v}" for k, v in sorted((provenance or {}).items())]
    lines.append(header)
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else _fmt(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path

"""Structured experiment results and deterministic CSV serialization.

All numbers are written with shortest round-trip float formatting, so a
given report always serializes to byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np


def fmt_float(x: float) -> str:
    """Canonical shortest round-trip representation of a float."""
    return repr(float(x))


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    if len(header) != len(columns):
        raise ValueError("header and column counts differ")
    n = len(columns[0])
    for col in columns:
        if len(col) != n:
            raise ValueError("columns must have equal length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(fmt_float(col[i]) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path: Path) -> tuple[list[str], dict[str, np.ndarray]]:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = text[0].split(",")
    rows = [line.split(",") for line in text[1:]]
    cols = {name: np.array([float(r[j]) for r in rows]) for j, name in enumerate(header)}
    return header, cols


@dataclass
class FeasibilityReport:
    """Margins of the storage feasibility inequalities.

    Each check passes when its margin (the ratio that the corresponding
    "much less than" inequality requires to be small) stays below the
    threshold.
    """

    optical_depth: float
    margins: dict[str, float]
    threshold: float = 0.1

    def _ok(self, key: str) -> bool:
        return self.margins[key] < self.threshold

    @property
    def storage_window_ok(self) -> bool:
        return self._ok("storage")

    @property
    def spectral_window_ok(self) -> bool:
        return self._ok("spectral")

    @property
    def compression_ok(self) -> bool:
        return self._ok("compression")

    @property
    def all_ok(self) -> bool:
        return all(m < self.threshold for m in self.margins.values())

    def summary_lines(self) -> list[str]:
        lines = [f"optical_depth = {fmt_float(self.optical_depth)}",
                 f"threshold = {fmt_float(self.threshold)}"]
        for key in sorted(self.margins):
            ok = "pass" if self._ok(key) else "fail"
            lines.append(f"margin_{key} = {fmt_float(self.margins[key])} ({ok})")
        return lines


@dataclass
class ExperimentReport:
    """Results of one experiment: tagged series, scalars, feasibility.

    ``profiles`` holds spatial arrays (e.g. stored envelopes) and
    ``snapshots`` full field states; both are optional payloads for
    writers and are not part of the scalar summary.
    """

    kind: str
    params: dict = field(default_factory=dict)
    series: dict[str, np.ndarray] = field(default_factory=dict)
    scalars: dict[str, float] = field(default_factory=dict)
    feasibility: Optional[FeasibilityReport] = None
    profiles: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)

    def write_series_csv(self, path: Path, columns: Optional[list[str]] = None) -> None:
        names = columns if columns is not None else list(self.series)
        write_csv(path, names, [np.asarray(self.series[k], dtype=float) for k in names])

    def summary_lines(self) -> list[str]:
        lines = [f"experiment = {self.kind}"]
        for key in sorted(self.params):
            lines.append(f"param_{key} = {self.params[key]}")
        for key in sorted(self.scalars):
            val = self.scalars[key]
            text = fmt_float(val) if isinstance(val, float) and math.isfinite(val) else str(val)
            lines.append(f"{key} = {text}")
        if self.feasibility is not None:
            lines.extend(self.feasibility.summary_lines())
        return lines


def write_curve_csv(path: Path, t_us: np.ndarray, omega: np.ndarray,
                    vg_over_c: np.ndarray) -> None:
    """One velocity curve: header t_us,omega_rad_per_us,vg_over_c."""
    write_csv(path, ["t_us", "omega_rad_per_us", "vg_over_c"],
              [t_us, omega, vg_over_c])


def write_manifest_csv(path: Path, rows: list[tuple[str, str, str]]) -> None:
    """Sweep manifest: header curve_id,eta_or_kind,file."""
    lines = ["curve_id,eta_or_kind,file"]
    for curve_id, tag, fname in rows:
        lines.append(f"{curve_id},{tag},{fname}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_storage_csv(path: Path, z_um: np.ndarray, e_in: np.ndarray,
                      phig_stored: np.ndarray, e_out: np.ndarray) -> None:
    """Storage/retrieval profiles: input light, stored molecules, output light."""
    write_csv(
        path,
        ["z_um", "re_E_in", "im_E_in", "re_phig_stored", "im_phig_stored",
         "re_E_out", "im_E_out"],
        [z_um, e_in.real, e_in.imag, phig_stored.real, phig_stored.imag,
         e_out.real, e_out.imag],
    )


def write_summary_txt(path: Path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_snapshots(outdir: Path, snapshots, fields: dict[str, str]) -> Path:
    """Dump one CSV per snapshot plus a manifest of snapshot times.

    ``fields`` maps column stem -> attribute name on the snapshot objects,
    e.g. {"E": "E", "phi_a": "phi_a"}.  Columns are z_um then re_/im_ pairs.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_rows = []
    for i, snap in enumerate(snapshots):
        fname = f"snapshot_{i:05d}.csv"
        header = ["z_um"]
        cols = [np.asarray(snap.z, dtype=float)]
        for stem, attr in fields.items():
            arr = np.asarray(getattr(snap, attr))
            header += [f"re_{stem}", f"im_{stem}"]
            cols += [arr.real, arr.imag]
        write_csv(outdir / fname, header, cols)
        manifest_rows.append((str(i), fmt_float(snap.t), fname))
    manifest = outdir / "snapshots.csv"
    lines = ["index,t_us,file"] + [",".join(row) for row in manifest_rows]
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest

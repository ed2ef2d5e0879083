"""CSV tables and their schemas.

Every table written here starts with its header row followed by a
``# config = <hash>`` comment tying the file to the exact configuration
that produced it.  Floats are serialized with ``repr``, the shortest
round-trip form, so single-threaded reruns reproduce files byte for byte.
"""

from __future__ import annotations

import os

import numpy as np

from .poisson import CASE_LABELS


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, header, rows, config_hash: str) -> None:
    lines = [",".join(header), f"# config = {config_hash}"]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> tuple[list[str], str, list[list[str]]]:
    """Inverse of write_csv: (header, config hash, raw string rows)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    comment = lines[1]
    if not comment.startswith("# config = "):
        raise ValueError(f"{path}: missing config comment line")
    return header, comment[len("# config = "):], [ln.split(",") for ln in lines[2:]]


# ---------------------------------------------------------------------------
# table builders
# ---------------------------------------------------------------------------

ENERGIES_HEADER = ["s", "E0c_u", "E0c_v", "E2_u", "F2_u", "gap_density_forms"]


def energies_rows(ladder, wave_field: str = "u", kg_field: str | None = "v"):
    """Per-slice energy table from a finished ladder.

    E0c columns are the canonical (boost-form) energies; the gap column
    records the worst relative disagreement among the three equivalent
    density forms on that slice, a direct readout of quadrature health.
    """
    s = np.asarray(ladder.s_values)
    e0_u = ladder.energy(wave_field, "eb")
    e0_v = (ladder.energy(kg_field, "eb") if kg_field is not None
            else np.zeros_like(s))
    e2_u = ladder.series(wave_field, "e2")
    l2_u = ladder.series(wave_field, "l2u")
    from .slices import f2_functional
    f2 = f2_functional(s, l2_u, e2_u)
    rows = []
    for i, sv in enumerate(s):
        forms = [ladder.value(sv, wave_field, f) for f in ("ea", "eb", "ec")]
        ref = max(abs(v) for v in forms) or 1.0
        gap = (max(forms) - min(forms)) / ref
        rows.append((float(sv), float(e0_u[i]), float(e0_v[i]),
                     float(e2_u[i]), float(f2[i]), float(gap)))
    return ENERGIES_HEADER, rows


POISSON_HEADER = ["t", "r", "t0", "mu", "nu", "lambda_integral", "bound",
                  "ratio", "case_breakdown"]


def poisson_row(t, r, t0, mu, nu, integral, bound, ratio, breakdown: dict):
    label = "|".join(f"{c}:{repr(float(breakdown.get(c, 0.0)))}"
                     for c in CASE_LABELS)
    return (float(t), float(r), float(t0), float(mu), float(nu),
            float(integral), float(bound), float(ratio), label)


SHARP_DECAY_HEADER = ["t", "x1", "x2", "s", "lhs", "rhs", "margin", "entry_type"]


def sharp_decay_rows(margins: list[dict]):
    return SHARP_DECAY_HEADER, [
        (m["t"], m["x1"], m["x2"], m["s"], m["lhs"], m["rhs"], m["margin"],
         m["entry_type"]) for m in margins]


DECAY_FIT_HEADER = ["quantity", "alpha", "beta", "C", "residual",
                    "n_samples", "s_min", "s_max"]


def decay_fit_rows(fits):
    return DECAY_FIT_HEADER, [
        (f.quantity, f.alpha, f.beta, f.C, f.residual, f.n_samples,
         f.s_min, f.s_max) for f in fits]

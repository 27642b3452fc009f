"""Plot-ready data for the variance, distribution and key-rate figures.

Each figure writes ``<fig_id>.csv`` with columns ``series,x,empirical,analytic``
and a ``<fig_id>.json`` sidecar with the parameters used.  The B = 1 panels
are exposed as ``fig3a``-``fig3c``; no separate ``fig4`` id exists.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..analytic import (
    noise_var_from_snr_db,
    predict_distribution,
    reference_pdfs,
    normal_pdf,
    skr_closed_form,
)
from ..channel import ChannelModel, sample_batch
from ..geometry import AnglePair, RisGeometry
from ..stats import empirical_summary, histogram_pdf, mi_knn
from ..weights import PhaseScheme, wrap_phase
from .experiment import CONVENTIONS, geometry_for_size

FIGURES = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig5")

CASE_1 = (30.0, 30.0, 150.0, 60.0)
CASE_2 = (110.0, 50.0, 310.0, 20.0)
M_GRID = (16, 36, 64, 100, 144)
SNR_GRID_DB = (-10.0, -5.0, 0.0, 5.0, 10.0)

DISTRIBUTION_TRIALS = 100_000
MI_TRIALS = 5_000
MI_K = 5

_FIG2_SCHEMES = {
    "cips": PhaseScheme.cips(),
    "cgps_q2": PhaseScheme.cgps(2),
    "cgps_q4": PhaseScheme.cgps(4),
    "dips_b3": PhaseScheme.dips(3),
}
_FIG5_SCHEMES = {
    "cips": PhaseScheme.cips(),
    "cgps_q2": PhaseScheme.cgps(2),
    "dips_b2": PhaseScheme.dips(2),
    "dips_b1": PhaseScheme.dips(1),
}


def _model(scheme: PhaseScheme, m: int = 64, angles=CASE_1, noise_var: float = 0.0) -> ChannelModel:
    geom = geometry_for_size(m, RisGeometry(1, 1))
    return ChannelModel(geom, AnglePair.from_degrees(*angles), scheme, 0j, noise_var)


def _variance_rows(schemes: dict, angles, trials: int, seed: int) -> list[tuple]:
    rows = []
    for name, scheme in schemes.items():
        for m in M_GRID:
            model = _model(scheme, m, angles)
            emp = empirical_summary(sample_batch(model, trials, seed)).var_total
            ana = predict_distribution(scheme, model.geometry, model.legit_angles).var_total
            rows.append((name, m, emp, ana))
    return rows


def _fig2a(trials, seed, **_):
    return _variance_rows(_FIG2_SCHEMES, CASE_1, trials, seed)


def _fig2_hist(trials, seed, which: str, **_):
    rows = []
    for name in ("cips", "dips_b3"):
        model = _model(_FIG2_SCHEMES[name])
        h = sample_batch(model, trials, seed).samples
        pdfs = reference_pdfs(predict_distribution(model.scheme, model.geometry, model.legit_angles))
        if which == "magnitude":
            centers, dens = histogram_pdf(np.abs(h), 60, (0.0, 6.0 * math.sqrt(model.geometry.size / 2)))
            ana = pdfs.magnitude(centers)
        else:
            centers, dens = histogram_pdf(wrap_phase(np.angle(h)), 50, (0.0, 2 * math.pi))
            ana = pdfs.phase(centers)
        rows += [(name, float(c), float(d), float(a)) for c, d, a in zip(centers, dens, ana)]
    return rows


def _fig3a(trials, seed, **_):
    rows = []
    scheme = PhaseScheme.dips(1)
    for case, angles in (("case1", CASE_1), ("case2", CASE_2)):
        for m in M_GRID:
            model = _model(scheme, m, angles)
            s = empirical_summary(sample_batch(model, trials, seed))
            p = predict_distribution(scheme, model.geometry, model.legit_angles)
            rows += [
                (f"{case}_var_re", m, s.var_re, p.var_re),
                (f"{case}_var_im", m, s.var_im, p.var_im),
                (f"{case}_covariance", m, s.covariance, p.covariance),
                (f"{case}_var_total", m, s.var_total, p.var_total),
            ]
    return rows


def _fig3_hist(trials, seed, part: str, **_):
    rows = []
    scheme = PhaseScheme.dips(1)
    for case, angles in (("case1", CASE_1), ("case2", CASE_2)):
        model = _model(scheme, 64, angles)
        h = sample_batch(model, trials, seed).samples
        p = predict_distribution(scheme, model.geometry, model.legit_angles)
        x, var = (h.real, p.var_re) if part == "real" else (h.imag, p.var_im)
        half = 5.0 * math.sqrt(model.geometry.size / 2)
        centers, dens = histogram_pdf(x, 60, (-half, half))
        ana = normal_pdf(0.0, var)(centers)
        rows += [(case, float(c), float(d), float(a)) for c, d, a in zip(centers, dens, ana)]
    return rows


def _fig5(trials, seed, snr_grid=SNR_GRID_DB, **_):
    rows = []
    for name, scheme in _FIG5_SCHEMES.items():
        for snr in snr_grid:
            noise = noise_var_from_snr_db(snr, 64)
            model = _model(scheme, 64, CASE_1, noise)
            batch = sample_batch(model, trials, seed)
            est = mi_knn(batch.y_a, batch.y_b, MI_K).bits
            ana = skr_closed_form(scheme, model.geometry, model.legit_angles, noise).rate_bits_per_sample
            rows.append((name, float(snr), est, ana))
    return rows


_BUILDERS = {
    "fig2a": (_fig2a, {}),
    "fig2b": (_fig2_hist, {"which": "magnitude"}),
    "fig2c": (_fig2_hist, {"which": "phase"}),
    "fig3a": (_fig3a, {}),
    "fig3b": (_fig3_hist, {"part": "real"}),
    "fig3c": (_fig3_hist, {"part": "imag"}),
    "fig5": (_fig5, {}),
}


def figure_rows(fig_id: str, trials: int | None = None, seed: int = 0, **kwargs) -> list[tuple]:
    if fig_id not in _BUILDERS:
        raise ValueError(f"unknown figure {fig_id!r}; expected one of {FIGURES}")
    builder, fixed = _BUILDERS[fig_id]
    if trials is None:
        trials = MI_TRIALS if fig_id == "fig5" else DISTRIBUTION_TRIALS
    return builder(trials=trials, seed=seed, **fixed, **kwargs)


def reproduce_figure(fig_id: str, outdir: str | Path, trials: int | None = None, seed: int = 0) -> list[Path]:
    """Write ``<fig_id>.csv`` and ``<fig_id>.json`` into ``outdir``."""
    rows = figure_rows(fig_id, trials, seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{fig_id}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["series", "x", "empirical", "analytic"])
        for series, x, emp, ana in rows:
            writer.writerow([series, x, repr(float(emp)), repr(float(ana))])
    meta = {
        "figure": fig_id,
        "trials": trials if trials is not None else (MI_TRIALS if fig_id == "fig5" else DISTRIBUTION_TRIALS),
        "seed": seed,
        "spacing_wavelengths": 0.5,
        "angles_deg": {"case1": list(CASE_1), "case2": list(CASE_2)},
        "m_grid": list(M_GRID),
        "conventions": CONVENTIONS,
    }
    if fig_id == "fig5":
        meta.update({"snr_db": list(SNR_GRID_DB), "k_neighbors": MI_K, "m": 64})
    json_path = outdir / f"{fig_id}.json"
    json_path.write_text(json.dumps(meta, indent=2) + "\n")
    return [csv_path, json_path]
